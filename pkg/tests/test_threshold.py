import numpy as np
import pytest

from stopwait.estimation import InverseGaussianParams, fit_inverse_gaussian, invgauss_cdf, ks_distance
from stopwait.threshold import (
    StepDistribution,
    ThresholdOutOfGrid,
    analytic_passage_law,
    brownian_passage_ensemble,
    find_threshold,
    format_ensemble_csv,
    format_solution_csv,
    sign_changes,
    simulate_first_passage,
    solve_value_function,
)

NORMAL = StepDistribution.normal(-0.4, 1.0)


def test_step_distribution_validation():
    with pytest.raises(ValueError):
        StepDistribution.normal(0, 0)
    with pytest.raises(ValueError):
        StepDistribution.discrete([(1, 0.5), (2, 0.4)])
    d = StepDistribution.discrete([(-1, 0.75), (1, 0.25)])
    assert d.mean == pytest.approx(-0.5)
    nodes, weights = NORMAL.quadrature()
    assert len(nodes) == 31 and weights.sum() == pytest.approx(1.0)
    assert nodes @ weights == pytest.approx(-0.4)
    assert (nodes + 0.4) ** 2 @ weights == pytest.approx(1.0)


@pytest.mark.parametrize("d", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("delta", [0.5, 0.9, 0.99])
def test_deterministic_threshold_is_step_size(d, delta):
    sol = solve_value_function(StepDistribution.deterministic(-d), delta, (-5.0, 5.0, 1001))
    assert abs(sol.x_star - d) <= sol.cell
    assert find_threshold(sol) == sol.x_star


def test_contraction_ratio():
    for delta in (0.5, 0.9):
        sol = solve_value_function(NORMAL, delta, (-10, 10, 401))
        r = np.asarray(sol.residuals)
        r = r[r > 1e-13]
        assert np.all(r[1:] <= delta * r[:-1] * (1 + 1e-9))


@pytest.mark.parametrize("delta", [0.5, 0.9, 0.95])
def test_solution_structure(delta):
    sol = solve_value_function(NORMAL, delta, (-10, 20, 601))
    assert np.all(np.diff(sol.values) >= -1e-12)
    assert np.all(sol.values >= sol.grid - 1e-12)
    stop = sol.grid < sol.x_star
    assert np.allclose(sol.values[stop], sol.grid[stop])
    assert np.all(np.diff(sol.continuation) >= -1e-12)
    assert sign_changes(sol.continuation) == 1
    assert sol.stops(sol.x_star - 0.01) and not sol.stops(sol.x_star + 0.01)


def test_fine_grid_oracle_agreement():
    coarse = solve_value_function(NORMAL, 0.95, (-10, 20, 201))
    fine = solve_value_function(NORMAL, 0.95, (-10, 20, 2001))
    assert abs(coarse.x_star - fine.x_star) <= 2 * coarse.cell


def test_discrete_step():
    step = StepDistribution.discrete([(-1.0, 0.5), (0.5, 0.5)])
    sol = solve_value_function(step, 0.8, (-10, 10, 801))
    assert sign_changes(sol.continuation) == 1
    assert np.all(np.diff(sol.values) >= -1e-12)


def test_threshold_outside_grid():
    # stopping is optimal everywhere on this grid: continuation all negative
    with pytest.raises(ThresholdOutOfGrid, match="above"):
        solve_value_function(StepDistribution.deterministic(-1.0), 0.5, (-10, -3, 200))
    with pytest.raises(ThresholdOutOfGrid, match="below"):
        solve_value_function(StepDistribution.deterministic(-1.0), 0.5, (3, 10, 200))
    with pytest.raises(ThresholdOutOfGrid):
        solve_value_function(NORMAL, 0.99, (-10, 10, 200))


def test_solver_argument_checks():
    with pytest.raises(ValueError):
        solve_value_function(NORMAL, 1.0)
    with pytest.raises(ValueError):
        solve_value_function(NORMAL, 0.9, (0, 1, 50))
    with pytest.raises(RuntimeError):
        solve_value_function(NORMAL, 0.9, (-10, 10, 201), tol=1e-12, max_iter=5)


def test_first_passage_deterministic():
    assert simulate_first_passage(3, 0, StepDistribution.deterministic(-1), 0).steps == 3
    s = simulate_first_passage(1, 0, StepDistribution.deterministic(-2), 0)
    assert (s.steps, s.terminal_value, s.censored) == (1, -1.0, False)
    c = simulate_first_passage(10, 0, StepDistribution.deterministic(-1), 0, max_steps=4)
    assert c.censored and c.steps == 4
    with pytest.raises(ValueError):
        simulate_first_passage(0, 0, NORMAL, 0)


def test_first_passage_reproducible():
    a = simulate_first_passage(5, 0, NORMAL, 123, index=7)
    b = simulate_first_passage(5, 0, NORMAL, 123, index=7)
    assert a == b


def test_walk_step_counts_approach_inverse_gaussian():
    # small steps relative to the distance: counts behave like Brownian passage times
    step = StepDistribution.normal(-0.05, 0.25)
    start = 5.0
    counts = np.array([simulate_first_passage(start, 0, step, 1, index=i).steps for i in range(3000)], dtype=float)
    law = InverseGaussianParams(start / 0.05, start**2 / 0.25**2)
    assert counts.mean() == pytest.approx(law.mu, rel=0.05)
    assert ks_distance(counts, lambda x: invgauss_cdf(law, x)) < 0.05


def test_brownian_ensemble_small():
    law = InverseGaussianParams(6.1, 5.8)
    distance, drift = law.brownian()
    ens = brownian_passage_ensemble(distance, drift, 1.0, 1e-3, 2000, 7)
    ref = analytic_passage_law(distance, drift, 1.0)
    assert (ref.mu, ref.lam) == pytest.approx((6.1, 5.8))
    assert not ens.censored.any()
    assert ens.times.mean() == pytest.approx(6.1, rel=0.1)
    assert ks_distance(ens.times, lambda x: invgauss_cdf(law, x)) < 0.04
    again = brownian_passage_ensemble(distance, drift, 1.0, 1e-3, 50, 7)
    assert np.array_equal(again.times, ens.times[:50])


def test_brownian_censoring_and_errors():
    ens = brownian_passage_ensemble(1.0, -0.01, 1.0, 1e-2, 20, 0, max_time=0.5)
    assert ens.censored.any()
    assert np.all(ens.times <= 0.5 + 1e-12)
    with pytest.raises(ValueError):
        brownian_passage_ensemble(1.0, 0.0, 1.0, 1e-3, 10, 0)


def test_csv_formats():
    sol = solve_value_function(StepDistribution.deterministic(-1.0), 0.9, (-2, 2, 101))
    text = format_solution_csv(sol)
    lines = text.splitlines()
    assert lines[0] == "x,V,continuation" and len(lines) == 103
    assert lines[-1].startswith("# x_star=")
    ens = brownian_passage_ensemble(1.0, -1.0, 1.0, 1e-2, 3, 0)
    assert format_ensemble_csv(ens).splitlines()[0] == "path_index,passage_time,censored"


def test_ig_fit_of_ensemble():
    law = InverseGaussianParams(2.0, 4.0)
    d, v = law.brownian(0.5)
    ens = brownian_passage_ensemble(d, v, 0.5, 1e-3, 1500, 3)
    fit = fit_inverse_gaussian(ens.times)
    assert fit.mu == pytest.approx(2.0, rel=0.05)
    assert fit.lam == pytest.approx(4.0, rel=0.15)
