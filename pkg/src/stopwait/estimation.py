"""Estimators: logit MLE, Pearson correlation, inverse Gaussian fit, tail slope, KS."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .model import LogitCoefficients, logistic_array
from .visits import design_matrix

TERMS = ("alpha", "beta1", "beta2", "beta3")

GRAD_TOL = 1e-8
MAX_ITER = 100
MAX_HALVINGS = 30
DIVERGENCE_NORM = 1e3


# ---------------------------------------------------------------- logit


def logit_loglik(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    eta = X @ beta
    # log p = -log(1+e^-eta), log(1-p) = -log(1+e^eta)
    return float(-(y * np.logaddexp(0.0, -eta) + (1.0 - y) * np.logaddexp(0.0, eta)).sum())


def logit_gradient(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    return X.T @ (y - logistic_array(X @ beta))


def logit_hessian(beta: np.ndarray, X: np.ndarray) -> np.ndarray:
    p = logistic_array(X @ beta)
    return -(X.T * (p * (1.0 - p))) @ X


def significance_stars(p_value: float) -> str:
    """Stars at the 1%, 0.5% and 0.1% levels."""
    if p_value < 0.001:
        return "***"
    if p_value < 0.005:
        return "**"
    if p_value < 0.01:
        return "*"
    return ""


@dataclass(frozen=True)
class LogitFit:
    coefficients: LogitCoefficients
    standard_errors: tuple[float, float, float, float]
    log_likelihood: float
    n_observations: int
    iterations: int
    converged: bool
    gradient_norm: float
    message: str = ""
    loglik_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def z_values(self) -> np.ndarray:
        return self.coefficients.as_array() / np.asarray(self.standard_errors)

    @property
    def p_values(self) -> np.ndarray:
        return 2.0 * special.ndtr(-np.abs(self.z_values))

    def rows(self) -> list[tuple[str, float, float, float, str]]:
        """(term, estimate, std_error, z, stars) per coefficient."""
        est = self.coefficients.as_array()
        return [
            (term, float(est[i]), float(self.standard_errors[i]), float(self.z_values[i]), significance_stars(p))
            for i, (term, p) in enumerate(zip(TERMS, self.p_values))
        ]


def fit_logit_arrays(X: np.ndarray, y: np.ndarray, max_iter: int = MAX_ITER, tol: float = GRAD_TOL) -> LogitFit:
    """Newton-Raphson from zero with step halving on the Bernoulli log-likelihood."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[1] != 4 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (m, 4) with len(y) == m")
    if not np.all(np.isfinite(X)):
        raise ValueError("covariates must be finite")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("outcomes must be 0/1")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise ValueError("need at least one observation of each outcome")

    k = X.shape[1]
    beta = np.zeros(k)
    ll = logit_loglik(beta, X, y)
    trace = [ll]
    grad = logit_gradient(beta, X, y)
    message = ""
    converged = False
    it = 0
    while it < max_iter:
        if np.max(np.abs(grad)) < tol:
            converged = True
            break
        H = logit_hessian(beta, X)
        try:
            step = np.linalg.solve(H, -grad)
        except np.linalg.LinAlgError:
            # zero or collinear columns: minimum-norm Newton step
            step = np.linalg.lstsq(H, -grad, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            message = "singular information matrix (collinear covariates or separation)"
            break
        it += 1
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + t * step
            ll_new = logit_loglik(cand, X, y)
            if ll_new >= ll:
                break
            t *= 0.5
        else:
            message = "step halving failed to increase the likelihood"
            break
        beta, ll = cand, ll_new
        trace.append(ll)
        grad = logit_gradient(beta, X, y)
        if np.linalg.norm(beta) > DIVERGENCE_NORM:
            message = "coefficient norm diverged beyond 1e3 (complete or quasi-complete separation)"
            break
    else:
        if np.max(np.abs(grad)) < tol:
            converged = True
        else:
            message = f"no convergence within {max_iter} iterations"

    if converged:
        message = "converged"
        eta = X @ beta
        if eta[y == 1].min() > eta[y == 0].max():
            # the fitted index itself separates the outcomes, so no finite MLE exists
            converged = False
            message = "complete separation: fitted index perfectly separates outcomes"
    H = logit_hessian(beta, X)
    try:
        cov = np.linalg.inv(-H)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se = np.full(k, np.nan)
        if converged and np.linalg.matrix_rank(X) == k:
            # full-rank design but no curvature left: fitted p saturated at 0/1
            converged = False
            message = "singular information matrix at full-rank design (complete or quasi-complete separation)"
        else:
            message += "; rank-deficient design, standard errors undefined"
    se_t = tuple(float(s) for s in se)
    return LogitFit(
        coefficients=LogitCoefficients.from_array(beta),
        standard_errors=se_t,
        log_likelihood=ll,
        n_observations=len(y),
        iterations=it,
        converged=converged,
        gradient_norm=float(np.max(np.abs(grad))),
        message=message,
        loglik_trace=tuple(trace),
    )


def fit_logit(observations, max_iter: int = MAX_ITER, tol: float = GRAD_TOL) -> LogitFit:
    """Fit ``p = logistic(alpha + beta1*n + beta2*l + beta3*w)`` to visit rows."""
    if not len(observations):
        raise ValueError("no observations")
    X, y = design_matrix(observations)
    return fit_logit_arrays(X, y, max_iter=max_iter, tol=tol)


def format_logit_report(fit: LogitFit) -> str:
    lines = [
        f"n_observations={fit.n_observations}",
        f"log_likelihood={fit.log_likelihood!r}",
        f"iterations={fit.iterations}",
        f"converged={str(fit.converged).lower()}",
        f"gradient_max_norm={fit.gradient_norm!r}",
        f"message={fit.message}",
    ]
    for term, est, se, z, stars in fit.rows():
        lines += [f"{term}.estimate={est!r}", f"{term}.std_error={se!r}", f"{term}.z={z!r}", f"{term}.significance={stars}"]
    return "\n".join(lines) + "\n"


def format_logit_csv(fit: LogitFit) -> str:
    out = ["term,estimate,std_error,z,significance"]
    out += [f"{t},{e!r},{s!r},{z!r},{st}" for t, e, s, z, st in fit.rows()]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- correlation


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    ci_low: float
    ci_high: float
    n: int

    @property
    def p_value(self) -> float:
        """Two-sided p-value of r = 0 from the t distribution with n-2 dof."""
        from scipy import stats

        if abs(self.r) >= 1:
            return 0.0
        t = self.r * math.sqrt((self.n - 2) / (1 - self.r * self.r))
        return float(2 * stats.t.sf(abs(t), self.n - 2))


def pearson_correlation(pairs: Sequence[tuple[float, float]], z_crit: float = 1.96) -> CorrelationResult:
    """Sample Pearson r with a Fisher-z 95% interval ``tanh(atanh(r) -/+ 1.96/sqrt(n-3))``."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be a sequence of (x, y)")
    n = arr.shape[0]
    if n < 3:
        raise ValueError(f"need n >= 3 for the confidence interval, got {n}")
    x = arr[:, 0] - arr[:, 0].mean()
    y = arr[:, 1] - arr[:, 1].mean()
    sxx, syy = float(x @ x), float(y @ y)
    if sxx == 0 or syy == 0:
        raise ValueError("correlation undefined for a constant variable")
    r = float(x @ y) / math.sqrt(sxx * syy)
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        return CorrelationResult(r, r, r, n)
    z = math.atanh(r)
    half = z_crit / math.sqrt(n - 3) if n > 3 else math.inf
    return CorrelationResult(r, math.tanh(z - half), math.tanh(z + half), n)


def format_correlation_report(res: CorrelationResult) -> str:
    stars = significance_stars(res.p_value)
    return (
        f"correlation={res.r!r}\n"
        f"significance={stars}\n"
        f"ci95_low={res.ci_low!r}\n"
        f"ci95_high={res.ci_high!r}\n"
        f"observations={res.n}\n"
    )


# ---------------------------------------------------------------- inverse Gaussian


@dataclass(frozen=True)
class InverseGaussianParams:
    mu: float
    lam: float

    def __post_init__(self) -> None:
        if not (self.mu > 0 and self.lam > 0 and math.isfinite(self.mu) and math.isfinite(self.lam)):
            raise ValueError(f"mu and lambda must be positive and finite, got {self.mu!r}, {self.lam!r}")

    @property
    def variance(self) -> float:
        return self.mu**3 / self.lam

    @classmethod
    def from_brownian(cls, distance: float, drift: float, sigma: float) -> "InverseGaussianParams":
        """Passage-time law of drifted Brownian motion started ``distance`` above a barrier."""
        return cls(distance / abs(drift), distance**2 / sigma**2)

    def brownian(self, sigma: float = 1.0) -> tuple[float, float]:
        """(distance, drift) whose passage time is this distribution for a given sigma."""
        distance = sigma * math.sqrt(self.lam)
        return distance, -distance / self.mu


def fit_inverse_gaussian(samples: Sequence[float]) -> InverseGaussianParams:
    """Closed-form MLE: mu = mean, lambda = n / sum(1/x - 1/mu)."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    if not np.all(x > 0) or not np.all(np.isfinite(x)):
        raise ValueError("samples must be positive and finite")
    mu = float(x.mean())
    s = float(np.sum(1.0 / x - 1.0 / mu))
    if not s > 0:
        raise ValueError("zero dispersion: lambda is unbounded")
    return InverseGaussianParams(mu, x.size / s)


def _positive(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("inverse Gaussian support is x > 0")
    return arr


def invgauss_pdf(p: InverseGaussianParams, x):
    arr = _positive(x)
    out = np.sqrt(p.lam / (2 * np.pi)) * arr**-1.5 * np.exp(-p.lam * (arr - p.mu) ** 2 / (2 * p.mu**2 * arr))
    return float(out) if out.ndim == 0 else out


def invgauss_logpdf(p: InverseGaussianParams, x):
    arr = _positive(x)
    out = 0.5 * np.log(p.lam / (2 * np.pi)) - 1.5 * np.log(arr) - p.lam * (arr - p.mu) ** 2 / (2 * p.mu**2 * arr)
    return float(out) if out.ndim == 0 else out


def invgauss_cdf(p: InverseGaussianParams, x):
    arr = _positive(x)
    r = np.sqrt(p.lam / arr)
    a = special.ndtr(r * (arr / p.mu - 1.0))
    # exp(2 lam/mu) * Phi(-b) overflows for large lam/mu; combine in log space
    b = r * (arr / p.mu + 1.0)
    second = np.exp(2.0 * p.lam / p.mu + special.log_ndtr(-b))
    out = np.clip(a + second, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- tail slope and KS


def loglog_slope(values, frequencies, tail_range: tuple[float, float]) -> float:
    """Least-squares slope of log(frequency) on log(value) inside ``tail_range``."""
    v = np.asarray(values, dtype=float)
    f = np.asarray(frequencies, dtype=float)
    lo, hi = tail_range
    keep = (v >= lo) & (v <= hi) & (f > 0) & (v > 0)
    if np.unique(v[keep]).size < 5:
        raise ValueError(f"insufficient tail support: fewer than 5 distinct values in [{lo}, {hi}]")
    slope, _ = np.polyfit(np.log(v[keep]), np.log(f[keep]), 1)
    return float(slope)


def integer_frequencies(samples) -> tuple[np.ndarray, np.ndarray]:
    """Counts of samples rounded to the nearest integer: (values, counts)."""
    x = np.asarray(samples, dtype=float)
    k = np.floor(x + 0.5).astype(np.int64)
    values, counts = np.unique(k, return_counts=True)
    return values, counts


def tail_slope(samples, tail_range: tuple[float, float]) -> float:
    """Log-log slope of integer-binned frequencies over ``tail_range``."""
    x = np.asarray(samples, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("samples must be positive")
    values, counts = integer_frequencies(x)
    return loglog_slope(values, counts, tail_range)


def ks_distance(samples, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov-Smirnov statistic of ``samples`` against ``cdf`` (both step sides)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("need at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def empirical_cdf(samples) -> tuple[np.ndarray, np.ndarray]:
    x = np.sort(np.asarray(samples, dtype=float))
    values, counts = np.unique(x, return_counts=True)
    return values, np.cumsum(counts) / x.size
