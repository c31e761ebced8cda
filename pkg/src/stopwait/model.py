"""Closed-form pieces of the speed-quantity stopping model.

The asker closes a question after ``n`` answers when the marginal benefit of
one more answer falls short of the expected cost of waiting for it.  The logit
index ``alpha + beta1*n + beta2*l + beta3*w`` equals expected waiting cost minus
marginal benefit, so a fitted :class:`LogitCoefficients` splits into a
:class:`UtilitySpec` and a :class:`CostSpec` once ``alpha_u`` is chosen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

#: Illustrative marginal benefits at zero answers used for utility curves.
DEFAULT_ALPHA_U = (1.0, 2.0, 3.0, 4.0)


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


def _check_nonneg(name: str, value: float) -> None:
    if not value >= 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class LogitCoefficients:
    alpha: float
    beta1: float
    beta2: float
    beta3: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta1", "beta2", "beta3"):
            _check_finite(name, getattr(self, name))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta1, self.beta2, self.beta3])

    @classmethod
    def from_array(cls, values) -> "LogitCoefficients":
        a, b1, b2, b3 = (float(v) for v in values)
        return cls(a, b1, b2, b3)

    def index(self, n: float, l: float, w: float) -> float:
        return self.alpha + self.beta1 * n + self.beta2 * l + self.beta3 * w

    def split(self, alpha_u: float, u0: float = 0.0) -> tuple["UtilitySpec", "CostSpec"]:
        """Split into utility and cost parts with ``alpha_c - alpha_u == alpha``.

        ``alpha_u`` is not identified by the logit fit and must be supplied.
        """
        _check_finite("alpha_u", alpha_u)
        u = UtilitySpec(alpha_u=alpha_u, beta1=self.beta1, u0=u0)
        c = CostSpec(alpha_c=self.alpha + alpha_u, beta2=self.beta2, beta3=self.beta3)
        return u, c


#: Table 3 estimates (one-hour visit schedule).
TABLE3 = LogitCoefficients(alpha=-4.408, beta1=0.027, beta2=0.028, beta3=0.021)


@dataclass(frozen=True)
class UtilitySpec:
    alpha_u: float
    beta1: float
    u0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("alpha_u", "beta1", "u0"):
            _check_finite(name, getattr(self, name))

    @property
    def concave(self) -> bool:
        return self.beta1 > 0


@dataclass(frozen=True)
class CostSpec:
    alpha_c: float
    beta2: float
    beta3: float

    def __post_init__(self) -> None:
        for name in ("alpha_c", "beta2", "beta3"):
            _check_finite(name, getattr(self, name))


def combine(u: UtilitySpec, c: CostSpec) -> LogitCoefficients:
    """Logit coefficients implied by a utility/cost pair."""
    return LogitCoefficients(alpha=c.alpha_c - u.alpha_u, beta1=u.beta1, beta2=c.beta2, beta3=c.beta3)


class Decision(str, Enum):
    CLOSE = "close"
    WAIT = "wait"


def logistic(z: float) -> float:
    """Logistic CDF ``1 / (1 + exp(-z))``, evaluated without overflow."""
    z = float(z)
    _check_finite("z", z)
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logistic_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def close_probability(c: LogitCoefficients, n: float, l: float, w: float) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    _check_nonneg("l", l)
    _check_nonneg("w", w)
    return logistic(c.index(n, l, w))


def marginal_benefit(u: UtilitySpec, n: float) -> float:
    """u(n+1) - u(n)."""
    _check_nonneg("n", n)
    return u.alpha_u - u.beta1 * n


def utility(u: UtilitySpec, n: float) -> float:
    _check_nonneg("n", n)
    half = u.beta1 / 2.0
    return (u.alpha_u + half) * n - half * n * n + u.u0


def expected_wait_cost(c: CostSpec, l: float, w: float) -> float:
    _check_nonneg("l", l)
    _check_nonneg("w", w)
    return c.alpha_c + c.beta2 * l + c.beta3 * w


def myopic_decision(u: UtilitySpec, c: CostSpec, n: float, l: float, w: float) -> Decision:
    # ties close: the myopic rule is stated only for strict inequalities
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if marginal_benefit(u, n) <= expected_wait_cost(c, l, w):
        return Decision.CLOSE
    return Decision.WAIT


def utility_peak(u: UtilitySpec) -> int | None:
    """Integer location of the utility maximum, ``floor(alpha_u/beta1 + 0.5)``.

    Returns ``None`` when ``alpha_u <= 0`` (utility never increases).
    """
    if not u.beta1 > 0:
        raise ValueError("utility_peak needs beta1 > 0 (no interior peak otherwise)")
    if u.alpha_u <= 0:
        return None
    return int(math.floor(u.alpha_u / u.beta1 + 0.5))


def utility_curve(u: UtilitySpec, n_max: int = 50) -> np.ndarray:
    n = np.arange(n_max + 1, dtype=float)
    half = u.beta1 / 2.0
    return (u.alpha_u + half) * n - half * n * n + u.u0
