"""Person-period expansion of questions into asker visits.

After the k-th answer arrives at ``t_k`` the asker is assumed to look at the
question every ``visit_interval`` hours, at ``t_k + j*dt`` for j = 1, 2, ...,
until the next answer arrives or the question is closed.  Each look that does
not end in a close is a ``closed=False`` row; the close itself is one final
``closed=True`` row at the exact close time.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import IO

import numpy as np

from .events import QuestionRecord

OBS_HEADER = ("question_id", "visit_time", "n", "l", "w", "closed")


@dataclass(frozen=True)
class VisitObservation:
    question_id: str
    visit_time: float
    n_answers: int
    last_interarrival: float
    waiting: float
    closed: bool


@dataclass(frozen=True)
class QuestionSummary:
    total_answers: int
    elapsed_time: float


def _check_expandable(q: QuestionRecord) -> None:
    if not q.answer_times:
        raise ValueError(f"question {q.question_id!r}: no answers, cannot be closed")
    if q.closed_at is None:
        raise ValueError(f"question {q.question_id!r}: no close time")
    if q.closed_at < q.answer_times[-1]:
        raise ValueError(
            f"question {q.question_id!r}: closed at {q.closed_at!r} before last answer at {q.answer_times[-1]!r}"
        )


def expand_question(q: QuestionRecord, visit_interval: float = 1.0, snap_close: bool = False) -> list[VisitObservation]:
    """Visit rows for one closed question.

    With ``snap_close`` the closing row is moved to the first scheduled visit
    at or after the close time instead of the exact close time.
    """
    if not visit_interval > 0:
        raise ValueError("visit_interval must be positive")
    _check_expandable(q)
    times = q.answer_times
    closed_at = q.closed_at
    rows = []
    for k, t_k in enumerate(times, start=1):
        prev = times[k - 2] if k > 1 else q.posted_at
        l = t_k - prev
        end = times[k] if k < len(times) else closed_at
        end = min(end, closed_at)
        j = 1
        while True:
            v = t_k + j * visit_interval
            if v >= end:
                break
            rows.append(VisitObservation(q.question_id, v, k, l, v - t_k, False))
            j += 1
    k = len(times)
    t_k = times[-1]
    l = t_k - (times[-2] if k > 1 else q.posted_at)
    close_time = closed_at
    if snap_close and closed_at > t_k:
        close_time = t_k + math.ceil((closed_at - t_k) / visit_interval) * visit_interval
    rows.append(VisitObservation(q.question_id, close_time, k, l, close_time - t_k, True))
    return rows


def expand_corpus(
    records: Iterable[QuestionRecord], visit_interval: float = 1.0, snap_close: bool = False
) -> list[VisitObservation]:
    out: list[VisitObservation] = []
    for q in records:
        out.extend(expand_question(q, visit_interval, snap_close))
    return out


def summarize(q: QuestionRecord) -> QuestionSummary:
    """TotalAnswers and ElapsedTime (close time minus last answer) of a question."""
    _check_expandable(q)
    return QuestionSummary(len(q.answer_times), q.closed_at - q.answer_times[-1])


def design_matrix(observations: Sequence[VisitObservation]) -> tuple[np.ndarray, np.ndarray]:
    """Columns (1, n, l, w) and the 0/1 outcome vector."""
    m = len(observations)
    X = np.empty((m, 4))
    y = np.empty(m)
    X[:, 0] = 1.0
    for i, o in enumerate(observations):
        X[i, 1] = o.n_answers
        X[i, 2] = o.last_interarrival
        X[i, 3] = o.waiting
        y[i] = 1.0 if o.closed else 0.0
    return X, y


def write_observations(observations: Iterable[VisitObservation]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(OBS_HEADER)
    for o in observations:
        writer.writerow(
            (o.question_id, repr(o.visit_time), o.n_answers, repr(o.last_interarrival), repr(o.waiting), int(o.closed))
        )
    return buf.getvalue()


def read_observations(stream: IO | str) -> list[VisitObservation]:
    text = stream if isinstance(stream, str) else stream.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if tuple(header) != OBS_HEADER:
        raise ValueError(f"line 1: expected header {','.join(OBS_HEADER)!r}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            qid, v, n, l, w, closed = row
            if closed not in ("0", "1"):
                raise ValueError(f"closed must be 0 or 1, got {closed!r}")
            out.append(VisitObservation(qid, float(v), int(n), float(l), float(w), closed == "1"))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out
