"""Synthetic question corpora with known ground truth.

Answers arrive by a Poisson or gamma renewal process.  After each arrival the
asker looks every ``visit_interval`` hours until the next answer, deciding each
time whether to close; optionally also once at the arrival instant itself.
The default schedule is the one the visit expansion assumes, so simulated
corpora expand to rows whose likelihood is exactly the fitted logit.  Two asker models are
available: a logit agent that closes with the logit probability, and an agent
that compares utilities perturbed by fresh type 1 extreme value noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .events import QuestionRecord
from .model import TABLE3, CostSpec, LogitCoefficients, UtilitySpec, combine, expected_wait_cost, logistic, utility


@dataclass(frozen=True)
class Arrivals:
    """Inter-arrival law: ``poisson`` (exponential gaps) or ``gamma`` renewal with the same mean."""

    kind: str = "poisson"
    rate: float = 0.05
    shape: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("poisson", "gamma"):
            raise ValueError(f"unknown arrival kind {self.kind!r}")
        if not self.rate > 0:
            raise ValueError("arrival rate must be positive")
        if not self.shape > 0:
            raise ValueError("gamma shape must be positive")

    def gaps(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "poisson":
            return gen.exponential(1.0 / self.rate, size)
        return gen.gamma(self.shape, 1.0 / (self.rate * self.shape), size)


@dataclass(frozen=True)
class LogitAgent:
    coefficients: LogitCoefficients = TABLE3

    def close_probability(self, n: int, l: float, w: float) -> float:
        return logistic(self.coefficients.index(n, l, w))

    def decide(self, n: int, l: float, w: float, gen: np.random.Generator) -> bool:
        return gen.random() < self.close_probability(n, l, w)


def gumbel(gen: np.random.Generator, size=None):
    return -np.log(-np.log(gen.random(size)))


@dataclass(frozen=True)
class GumbelAgent:
    """Closes iff ``u(n) + e0 > u(n+1) - E[c(T)] + e1`` with fresh Gumbel ``e0, e1``."""

    utility: UtilitySpec
    cost: CostSpec

    @property
    def coefficients(self) -> LogitCoefficients:
        return combine(self.utility, self.cost)

    def close_probability(self, n: int, l: float, w: float) -> float:
        return logistic(self.coefficients.index(n, l, w))

    def decide(self, n: int, l: float, w: float, gen: np.random.Generator) -> bool:
        e0, e1 = gumbel(gen, 2)
        stay = utility(self.utility, n + 1) - expected_wait_cost(self.cost, l, w)
        return utility(self.utility, n) + e0 > stay + e1


@dataclass(frozen=True)
class SimScenario:
    n_questions: int = 1536
    arrival: Arrivals = field(default_factory=Arrivals)
    horizon: float = 96.0
    visit_interval: float = 1.0
    agent: LogitAgent | GumbelAgent = field(default_factory=LogitAgent)
    seed: int = 0
    check_at_arrival: bool = False

    def __post_init__(self) -> None:
        if self.n_questions < 0:
            raise ValueError("n_questions must be >= 0")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not self.visit_interval > 0:
            raise ValueError("visit_interval must be positive")


def generate_arrivals(scenario: SimScenario, question_index: int) -> list[float]:
    """Answer times in ``(0, horizon)`` for one question, measured from posting."""
    gen = rngmod.stream(scenario.seed, rngmod.ARRIVALS, question_index)
    expected = scenario.arrival.rate * scenario.horizon
    chunk = int(expected + 4 * math.sqrt(expected) + 8)
    times: list[float] = []
    t = 0.0
    while True:
        arr = t + np.cumsum(scenario.arrival.gaps(gen, chunk))
        inside = arr[arr < scenario.horizon]
        times.extend(inside.tolist())
        if inside.size < arr.size:
            return times
        t = float(arr[-1])


def visit_schedule(answer_times, visit_interval: float, horizon: float, check_at_arrival: bool = False):
    """Yield (time, n, l, w) for every look up to ``horizon``."""
    posted = 0.0
    for k, t_k in enumerate(answer_times, start=1):
        prev = answer_times[k - 2] if k > 1 else posted
        l = t_k - prev
        end = answer_times[k] if k < len(answer_times) else math.inf
        j = 0 if check_at_arrival else 1
        while True:
            v = t_k + j * visit_interval
            if v >= end or v > horizon:
                break
            yield v, k, l, v - t_k
            j += 1


def simulate_asker(answer_times, scenario: SimScenario, question_index: int) -> float | None:
    """Time of the first visit at which the agent closes, or ``None``."""
    gen = rngmod.stream(scenario.seed, rngmod.AGENT, question_index)
    schedule = visit_schedule(list(answer_times), scenario.visit_interval, scenario.horizon, scenario.check_at_arrival)
    for v, n, l, w in schedule:
        if scenario.agent.decide(n, l, w, gen):
            return v
    return None


def simulate_question(scenario: SimScenario, question_index: int) -> QuestionRecord:
    answers = generate_arrivals(scenario, question_index)
    closed_at = simulate_asker(answers, scenario, question_index)
    qid = f"q{question_index:06d}"
    if closed_at is None:
        return QuestionRecord(qid, 0.0, tuple(answers))
    return QuestionRecord(qid, 0.0, tuple(t for t in answers if t <= closed_at), closed_at, True)


def generate_dataset(scenario: SimScenario) -> list[QuestionRecord]:
    return [simulate_question(scenario, i) for i in range(scenario.n_questions)]


# ---------------------------------------------------------------- scenario files

_SCENARIO_KEYS = {
    "n_questions": int,
    "arrival": str,
    "rate": float,
    "shape": float,
    "horizon": float,
    "visit_interval": float,
    "agent": str,
    "alpha": float,
    "beta1": float,
    "beta2": float,
    "beta3": float,
    "alpha_u": float,
    "u0": float,
    "seed": int,
    "check_at_arrival": lambda v: {"true": True, "false": False, "1": True, "0": False}[v.lower()],
}


def parse_scenario(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment) into typed values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"scenario line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SCENARIO_KEYS:
            raise ValueError(f"scenario line {lineno}: unknown key {key!r}")
        try:
            out[key] = _SCENARIO_KEYS[key](value)
        except (ValueError, KeyError):
            raise ValueError(f"scenario line {lineno}: bad value {value!r} for {key}") from None
    return out


def build_scenario(params: dict) -> SimScenario:
    """Scenario from flat parameters; missing keys take the defaults."""
    coeffs = LogitCoefficients(
        params.get("alpha", TABLE3.alpha),
        params.get("beta1", TABLE3.beta1),
        params.get("beta2", TABLE3.beta2),
        params.get("beta3", TABLE3.beta3),
    )
    kind = params.get("agent", "logit")
    if kind == "logit":
        agent = LogitAgent(coeffs)
    elif kind == "gumbel":
        u, c = coeffs.split(params.get("alpha_u", 1.0), params.get("u0", 0.0))
        agent = GumbelAgent(u, c)
    else:
        raise ValueError(f"unknown agent {kind!r}")
    defaults = SimScenario()
    return SimScenario(
        n_questions=params.get("n_questions", defaults.n_questions),
        arrival=Arrivals(params.get("arrival", "poisson"), params.get("rate", 0.05), params.get("shape", 1.0)),
        horizon=params.get("horizon", defaults.horizon),
        visit_interval=params.get("visit_interval", defaults.visit_interval),
        agent=agent,
        seed=params.get("seed", defaults.seed),
        check_at_arrival=params.get("check_at_arrival", defaults.check_at_arrival),
    )


def scenario_params(s: SimScenario) -> dict:
    """Flat parameters of a scenario (inverse of :func:`build_scenario`)."""
    c = s.agent.coefficients
    out = {
        "n_questions": s.n_questions,
        "arrival": s.arrival.kind,
        "rate": s.arrival.rate,
        "shape": s.arrival.shape,
        "horizon": s.horizon,
        "visit_interval": s.visit_interval,
        "agent": "gumbel" if isinstance(s.agent, GumbelAgent) else "logit",
        "alpha": c.alpha,
        "beta1": c.beta1,
        "beta2": c.beta2,
        "beta3": c.beta3,
        "seed": s.seed,
        "check_at_arrival": str(s.check_at_arrival).lower(),
    }
    if isinstance(s.agent, GumbelAgent):
        out["alpha_u"] = s.agent.utility.alpha_u
        out["u0"] = s.agent.utility.u0
    return out


def format_scenario(s: SimScenario) -> str:
    return "".join(f"{k} = {v}\n" for k, v in scenario_params(s).items())
