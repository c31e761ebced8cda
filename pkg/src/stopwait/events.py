"""Question event logs: parsing, serialization, eligibility, open-time histogram.

Two on-disk formats are supported.

CSV, one event per row with header ``event,question_id,time_hours``::

    event,question_id,time_hours
    posted,q1,0.0
    answer,q1,1.0
    closed_by_asker,q1,5.2

``event`` is one of ``posted``, ``answer``, ``closed_by_asker``,
``closed_other``.  Rows for different questions may be interleaved.

JSONL, one object per question::

    {"question_id": "q1", "posted_at": 0.0, "answer_times": [1.0],
     "closed_at": 5.2, "closed_by_asker": true}

Times are decimal hours.  Floats are written with ``repr`` so both formats
round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import IO

import numpy as np

CSV_HEADER = ("event", "question_id", "time_hours")
EVENTS = ("posted", "answer", "closed_by_asker", "closed_other")
FORMATS = ("csv", "jsonl")

#: Questions must be closed by the asker in less than this many hours.
ELIGIBLE_HOURS = 100.0


class EventLogError(ValueError):
    """Raised when an event log has malformed lines or invalid records.

    ``problems`` lists every problem found, each prefixed with its line number
    or question id.
    """

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        head = "; ".join(self.problems[:5])
        more = f" (+{len(self.problems) - 5} more)" if len(self.problems) > 5 else ""
        super().__init__(f"{len(self.problems)} problem(s) in event log: {head}{more}")


@dataclass(frozen=True)
class QuestionRecord:
    question_id: str
    posted_at: float
    answer_times: tuple[float, ...] = ()
    closed_at: float | None = None
    closed_by_asker: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "answer_times", tuple(float(t) for t in self.answer_times))
        problems = validate(self)
        if problems:
            raise EventLogError([f"question {self.question_id!r}: {p}" for p in problems])

    @property
    def open_duration(self) -> float | None:
        if self.closed_at is None:
            return None
        return self.closed_at - self.posted_at


def validate(q: QuestionRecord) -> list[str]:
    problems = []
    times = (q.posted_at, *q.answer_times) + ((q.closed_at,) if q.closed_at is not None else ())
    if not all(math.isfinite(t) for t in times):
        return ["non-finite time"]
    if q.answer_times and q.answer_times[0] < q.posted_at:
        problems.append(f"answer at {q.answer_times[0]!r} before posting at {q.posted_at!r}")
    if any(b <= a for a, b in zip(q.answer_times, q.answer_times[1:])):
        problems.append("answer times not strictly ascending")
    if q.closed_at is not None:
        if not q.answer_times:
            problems.append("closed without any answer")
        elif q.closed_at < q.answer_times[0]:
            problems.append(f"closed at {q.closed_at!r} before first answer at {q.answer_times[0]!r}")
    elif q.closed_by_asker:
        problems.append("closed_by_asker set without a close time")
    return problems


def _read_text(stream: IO | str | bytes) -> str:
    if isinstance(stream, bytes):
        return stream.decode("utf-8")
    if isinstance(stream, str):
        return stream
    data = stream.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


@dataclass
class _Draft:
    line: int
    posted_at: float | None = None
    answers: list[float] = field(default_factory=list)
    closed_at: float | None = None
    closed_by_asker: bool = False
    close_events: int = 0
    post_events: int = 0


def _parse_csv(text: str) -> list[QuestionRecord]:
    problems: list[str] = []
    drafts: dict[str, _Draft] = {}
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None:
        return []
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise EventLogError([f"line 1: expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}"])
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 3:
            problems.append(f"line {lineno}: expected 3 fields, got {len(row)}")
            continue
        event, qid, raw = row
        if event not in EVENTS:
            problems.append(f"line {lineno}: unknown event {event!r}")
            continue
        try:
            t = float(raw)
        except ValueError:
            problems.append(f"line {lineno}: bad time {raw!r}")
            continue
        if not math.isfinite(t):
            problems.append(f"line {lineno}: non-finite time {raw!r}")
            continue
        d = drafts.setdefault(qid, _Draft(line=lineno))
        if event == "posted":
            d.post_events += 1
            d.posted_at = t
        elif event == "answer":
            d.answers.append(t)
        else:
            d.close_events += 1
            d.closed_at = t
            d.closed_by_asker = event == "closed_by_asker"

    records = []
    for qid, d in drafts.items():
        where = f"question {qid!r} (first seen line {d.line})"
        if d.post_events != 1:
            problems.append(f"{where}: expected one posted event, got {d.post_events}")
            continue
        if d.close_events > 1:
            problems.append(f"{where}: {d.close_events} close events")
            continue
        if len(set(d.answers)) != len(d.answers):
            problems.append(f"{where}: duplicate answer times")
            continue
        try:
            records.append(
                QuestionRecord(qid, d.posted_at, tuple(sorted(d.answers)), d.closed_at, d.closed_by_asker)
            )
        except EventLogError as exc:
            problems.extend(f"{where}: {p.split(': ', 1)[1]}" for p in exc.problems)
    if problems:
        raise EventLogError(problems)
    return records


def _parse_jsonl(text: str) -> list[QuestionRecord]:
    problems: list[str] = []
    records = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            qid = obj["question_id"]
            if not isinstance(qid, str):
                raise TypeError("question_id must be a string")
            closed_at = obj.get("closed_at")
            fields = dict(
                posted_at=float(obj["posted_at"]),
                answer_times=[float(t) for t in obj["answer_times"]],
                closed_at=None if closed_at is None else float(closed_at),
                closed_by_asker=obj["closed_by_asker"],
            )
            if not isinstance(fields["closed_by_asker"], bool):
                raise TypeError("closed_by_asker must be a boolean")
        except (ValueError, KeyError, TypeError) as exc:
            problems.append(f"line {lineno}: malformed record ({exc})")
            continue
        if qid in seen:
            problems.append(f"line {lineno}: duplicate question_id {qid!r} (first on line {seen[qid]})")
            continue
        seen[qid] = lineno
        answers = fields["answer_times"]
        if answers != sorted(answers):
            problems.append(f"line {lineno}: question {qid!r}: answer times not ascending")
            continue
        try:
            records.append(QuestionRecord(qid, **fields))
        except EventLogError as exc:
            problems.extend(f"line {lineno}: {p}" for p in exc.problems)
    if problems:
        raise EventLogError(problems)
    return records


def parse_event_log(stream: IO | str | bytes, fmt: str = "csv") -> list[QuestionRecord]:
    """Parse a CSV or JSONL event log into one record per question.

    Every malformed line and invalid record is collected; if there are any,
    a single :class:`EventLogError` listing them all is raised.
    """
    text = _read_text(stream)
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "jsonl":
        return _parse_jsonl(text)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def serialize_event_log(records: Iterable[QuestionRecord], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for q in records:
            writer.writerow(("posted", q.question_id, repr(q.posted_at)))
            for t in q.answer_times:
                writer.writerow(("answer", q.question_id, repr(t)))
            if q.closed_at is not None:
                event = "closed_by_asker" if q.closed_by_asker else "closed_other"
                writer.writerow((event, q.question_id, repr(q.closed_at)))
        return buf.getvalue()
    if fmt == "jsonl":
        lines = [
            json.dumps(
                {
                    "question_id": q.question_id,
                    "posted_at": q.posted_at,
                    "answer_times": list(q.answer_times),
                    "closed_at": q.closed_at,
                    "closed_by_asker": q.closed_by_asker,
                }
            )
            for q in records
        ]
        return "".join(line + "\n" for line in lines)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def is_eligible(q: QuestionRecord, limit: float = ELIGIBLE_HOURS) -> bool:
    return q.closed_by_asker and q.closed_at is not None and (q.closed_at - q.posted_at) < limit


def filter_eligible(records: Iterable[QuestionRecord], limit: float = ELIGIBLE_HOURS) -> list[QuestionRecord]:
    """Questions closed by their asker less than ``limit`` hours after posting."""
    return [q for q in records if is_eligible(q, limit)]


@dataclass(frozen=True)
class HistogramReport:
    bin_width: float
    counts: tuple[int, ...]
    durations: tuple[float, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def edges(self) -> np.ndarray:
        return np.arange(len(self.counts) + 1) * self.bin_width

    @property
    def fractions(self) -> np.ndarray:
        counts = np.asarray(self.counts, dtype=float)
        return counts / counts.sum() if self.n else counts

    def fraction_within(self, t: float) -> float:
        """Fraction of questions open for less than ``t`` hours."""
        if not self.durations:
            return 0.0
        return float(np.mean(np.asarray(self.durations) < t))


def open_duration_histogram(records: Sequence[QuestionRecord], bin_width: float = 1.0) -> HistogramReport:
    """Histogram of open durations in bins ``[k*bw, (k+1)*bw)``."""
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    durations = []
    for q in records:
        if q.closed_at is None:
            raise ValueError(f"question {q.question_id!r} has no close time; filter first")
        durations.append(q.closed_at - q.posted_at)
    if not durations:
        return HistogramReport(bin_width, (), ())
    idx = np.floor(np.asarray(durations) / bin_width).astype(int)
    counts = np.bincount(idx, minlength=idx.max() + 1)
    return HistogramReport(bin_width, tuple(int(c) for c in counts), tuple(durations))
