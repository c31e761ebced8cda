"""Answer-value random walk, its stopping threshold, and first-passage times.

Answer values follow ``X[n+1] = X[n] + Z[n]`` with i.i.d. steps.  The value of
holding a last answer worth ``x`` solves

    V(x) = x + max(0, delta * E[V(x + Z)])

and the asker stops once the walk falls below the root ``x*`` of the
continuation value ``delta * E[V(x + Z)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .estimation import InverseGaussianParams

GAUSS_HERMITE_NODES = 31
MAX_VALUE_ITER = 10_000


class ThresholdOutOfGrid(ValueError):
    """The continuation value has no sign change on the grid."""

    def __init__(self, direction: str):
        self.direction = direction
        super().__init__(f"threshold {direction} grid; widen the grid")


@dataclass(frozen=True)
class StepDistribution:
    kind: str
    value: float = 0.0
    sd: float = 0.0
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "normal" and not self.sd > 0:
            raise ValueError("normal step needs sd > 0")
        if self.kind == "discrete":
            if not self.points:
                raise ValueError("discrete step needs at least one point")
            probs = [p for _, p in self.points]
            if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
                raise ValueError("discrete probabilities must be non-negative and sum to 1")
        if self.kind not in ("deterministic", "normal", "discrete"):
            raise ValueError(f"unknown step kind {self.kind!r}")

    @classmethod
    def deterministic(cls, d: float) -> "StepDistribution":
        return cls("deterministic", value=float(d))

    @classmethod
    def normal(cls, mean: float, sd: float) -> "StepDistribution":
        return cls("normal", value=float(mean), sd=float(sd))

    @classmethod
    def discrete(cls, points) -> "StepDistribution":
        return cls("discrete", points=tuple((float(v), float(p)) for v, p in points))

    @property
    def mean(self) -> float:
        if self.kind == "discrete":
            return sum(v * p for v, p in self.points)
        return self.value

    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights with ``E[f(Z)] ~= sum(w * f(nodes))``."""
        if self.kind == "deterministic":
            return np.array([self.value]), np.array([1.0])
        if self.kind == "discrete":
            v, p = zip(*self.points)
            return np.array(v), np.array(p)
        t, w = np.polynomial.hermite.hermgauss(GAUSS_HERMITE_NODES)
        return self.value + math.sqrt(2.0) * self.sd * t, w / math.sqrt(math.pi)

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "deterministic":
            return np.full(size, self.value)
        if self.kind == "normal":
            return gen.normal(self.value, self.sd, size)
        v, p = zip(*self.points)
        return np.asarray(v)[gen.choice(len(v), size=size, p=np.asarray(p))]


@dataclass(frozen=True)
class ThresholdSolution:
    x_star: float
    delta: float
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    continuation: np.ndarray = field(repr=False)
    iterations: int = 0
    sup_norm_residual: float = 0.0
    residuals: tuple[float, ...] = field(default=(), repr=False)

    @property
    def cell(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def stops(self, last_value: float) -> bool:
        return last_value < self.x_star


class _Interpolator:
    """Fixed linear map from grid values to V at off-grid query points.

    Below the grid V is the identity (stop region).  Above it V continues from
    its edge value with the always-continue slope ``1/(1-delta)``; anchoring at
    the edge keeps V continuous, and the offset to the exact asymptote
    ``x/(1-delta) + delta*E[Z]/(1-delta)**2`` vanishes as the grid widens.
    """

    def __init__(self, grid: np.ndarray, queries: np.ndarray, delta: float):
        lo, hi = grid[0], grid[-1]
        h = grid[1] - grid[0]
        self.below = queries < lo
        self.above = queries > hi
        pos = np.clip((queries - lo) / h, 0.0, len(grid) - 1)
        self.i = np.minimum(np.floor(pos).astype(int), len(grid) - 2)
        self.frac = pos - self.i
        self.queries = queries
        self.offset = np.where(self.above, (queries - hi) / (1.0 - delta), 0.0)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        interp = values[self.i] * (1.0 - self.frac) + values[self.i + 1] * self.frac + self.offset
        return np.where(self.below, self.queries, interp)


def _grid(grid_spec) -> np.ndarray:
    lo, hi, count = grid_spec
    if not hi > lo:
        raise ValueError("grid needs hi > lo")
    if int(count) < 100:
        raise ValueError("grid needs at least 100 points")
    return np.linspace(float(lo), float(hi), int(count))


def solve_value_function(
    step: StepDistribution,
    delta: float,
    grid_spec: tuple[float, float, int] = (-10.0, 10.0, 2001),
    tol: float = 1e-10,
    max_iter: int = MAX_VALUE_ITER,
) -> ThresholdSolution:
    """Value iteration of the discounted stopping problem on a uniform grid."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = _grid(grid_spec)
    nodes, weights = step.quadrature()
    queries = (x[:, None] + nodes[None, :]).ravel()
    interp = _Interpolator(x, queries, delta)
    # the always-continue regime cannot start below -E[Z]/(1-delta)
    if interp.above.any() and x[-1] < -step.mean / (1.0 - delta):
        raise ThresholdOutOfGrid(
            f"cannot be bracketed: upper edge {x[-1]:g} is below {-step.mean / (1.0 - delta):g}, "
            "where the always-continue asymptote starts to hold; extend the"
        )
    m = len(nodes)

    def continuation(v):
        return delta * (interp(v).reshape(-1, m) @ weights)

    V = x.copy()
    residuals = []
    for it in range(1, max_iter + 1):
        V_new = x + np.maximum(0.0, continuation(V))
        res = float(np.max(np.abs(V_new - V)))
        residuals.append(res)
        V = V_new
        if res < tol:
            break
    else:
        raise RuntimeError(f"value iteration did not converge in {max_iter} iterations (residual {res:g})")
    cont = continuation(V)
    x_star = _root(x, cont)
    return ThresholdSolution(x_star, delta, x, V, cont, it, res, tuple(residuals))


def _root(grid: np.ndarray, cont: np.ndarray) -> float:
    go = cont >= 0
    changes = int(np.count_nonzero(go[1:] != go[:-1]))
    if changes == 0:
        raise ThresholdOutOfGrid("below" if go[0] else "above")
    if changes > 1:
        raise ValueError(f"continuation changes sign {changes} times; expected exactly once")
    if go[0]:
        raise ValueError("continuation decreases across zero; expected non-decreasing")
    j = int(np.argmax(go))
    c0, c1 = cont[j - 1], cont[j]
    return float(grid[j - 1] + (grid[j] - grid[j - 1]) * (-c0) / (c1 - c0))


def find_threshold(sol: ThresholdSolution) -> float:
    """Interpolated zero of the continuation value; stop iff last value < x*."""
    return _root(sol.grid, sol.continuation)


def sign_changes(values: np.ndarray) -> int:
    go = np.asarray(values) >= 0
    return int(np.count_nonzero(go[1:] != go[:-1]))


@dataclass(frozen=True)
class PassageSample:
    steps: int
    terminal_value: float
    censored: bool = False


def simulate_first_passage(
    start: float,
    threshold: float,
    step: StepDistribution,
    rng_seed: int,
    max_steps: int = 1_000_000,
    index: int = 0,
    chunk: int = 256,
) -> PassageSample:
    """Walk from ``start`` until the value is at or below ``threshold``."""
    if not start > threshold:
        raise ValueError("start must lie above the threshold")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    gen = rngmod.stream(rng_seed, rngmod.WALK, index)
    x = float(start)
    done = 0
    while done < max_steps:
        k = min(chunk, max_steps - done)
        path = x + np.cumsum(step.sample(gen, k))
        hit = np.flatnonzero(path <= threshold)
        if hit.size:
            j = int(hit[0])
            return PassageSample(done + j + 1, float(path[j]))
        x = float(path[-1])
        done += k
    return PassageSample(max_steps, x, censored=True)


@dataclass(frozen=True)
class PassageEnsemble:
    times: np.ndarray
    censored: np.ndarray

    def __len__(self) -> int:
        return len(self.times)


def _brownian_path(gen, distance, mean_inc, sd_inc, dt, max_steps, chunk):
    x = distance
    done = 0
    while done < max_steps:
        k = min(chunk, max_steps - done)
        path = x + np.cumsum(gen.normal(mean_inc, sd_inc, k))
        below = path <= 0.0
        if below.any():
            return (done + int(np.argmax(below)) + 1) * dt, False
        x = float(path[-1])
        done += k
    return max_steps * dt, True


def brownian_passage_ensemble(
    distance: float,
    drift: float,
    sigma: float,
    dt: float,
    n_paths: int,
    rng_seed: int,
    max_time: float | None = None,
    chunk: int = 4096,
) -> PassageEnsemble:
    """Euler-discretized Brownian absorption times at a barrier ``distance`` below the start.

    The continuous-time limit is inverse Gaussian with
    ``mu = distance/|drift|`` and ``lambda = distance**2/sigma**2``.
    Path ``i`` draws from its own stream, so path ``i`` is the same whatever
    ``n_paths`` is.
    """
    if not drift < 0:
        raise ValueError("drift must be negative for almost-sure passage")
    if not (distance > 0 and sigma > 0 and dt > 0):
        raise ValueError("distance, sigma and dt must be positive")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    max_steps = np.iinfo(np.int64).max if max_time is None else max(1, int(math.ceil(max_time / dt)))
    mean_inc, sd_inc = drift * dt, sigma * math.sqrt(dt)
    times = np.empty(n_paths)
    censored = np.zeros(n_paths, dtype=bool)
    for i in range(n_paths):
        gen = rngmod.stream(rng_seed, rngmod.BROWNIAN, i)
        times[i], censored[i] = _brownian_path(gen, distance, mean_inc, sd_inc, dt, max_steps, chunk)
    return PassageEnsemble(times, censored)


def analytic_passage_law(distance: float, drift: float, sigma: float) -> InverseGaussianParams:
    return InverseGaussianParams.from_brownian(distance, drift, sigma)


def format_solution_csv(sol: ThresholdSolution) -> str:
    lines = ["x,V,continuation"]
    lines += [f"{x!r},{v!r},{c!r}" for x, v, c in zip(sol.grid.tolist(), sol.values.tolist(), sol.continuation.tolist())]
    lines.append(f"# x_star={sol.x_star!r},delta={sol.delta!r},iterations={sol.iterations}")
    return "\n".join(lines) + "\n"


def format_ensemble_csv(ens: PassageEnsemble) -> str:
    lines = ["path_index,passage_time,censored"]
    lines += [f"{i},{t!r},{int(c)}" for i, (t, c) in enumerate(zip(ens.times.tolist(), ens.censored.tolist()))]
    return "\n".join(lines) + "\n"
