import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stopwait import rng
from stopwait.events import parse_event_log, serialize_event_log, validate
from stopwait.model import TABLE3, LogitCoefficients, logistic
from stopwait.simulate import (
    Arrivals,
    GumbelAgent,
    LogitAgent,
    SimScenario,
    build_scenario,
    format_scenario,
    generate_arrivals,
    generate_dataset,
    gumbel,
    parse_scenario,
    scenario_params,
    simulate_asker,
    simulate_question,
    visit_schedule,
)
from stopwait.visits import expand_question


def small(**kw):
    base = dict(n_questions=200, arrival=Arrivals("poisson", 0.2), horizon=96.0, seed=3)
    base.update(kw)
    return SimScenario(**base)


def test_same_seed_same_corpus():
    assert generate_dataset(small()) == generate_dataset(small())
    assert generate_dataset(small()) != generate_dataset(small(seed=4))


def test_zero_questions():
    assert generate_dataset(small(n_questions=0)) == []


def test_question_independent_of_corpus_size():
    big = generate_dataset(small(n_questions=50))
    assert big[:10] == generate_dataset(small(n_questions=10))
    assert simulate_question(small(), 37) == big[37]


def test_poisson_arrival_count():
    s = small(n_questions=2000, arrival=Arrivals("poisson", 0.05))
    counts = np.array([len(generate_arrivals(s, i)) for i in range(s.n_questions)])
    mean = 0.05 * 96
    assert abs(counts.mean() - mean) < 4 * math.sqrt(mean / counts.size)


def test_gamma_gaps_keep_the_mean():
    gaps = Arrivals("gamma", 0.5, 4.0).gaps(rng.stream(1, rng.SAMPLES), 40_000)
    assert gaps.mean() == pytest.approx(2.0, rel=0.02)
    assert gaps.var() == pytest.approx(4.0 / 4.0, rel=0.05)


def test_arrivals_validation():
    for bad in (dict(kind="uniform"), dict(rate=0.0), dict(shape=-1.0)):
        with pytest.raises(ValueError):
            Arrivals(**bad)
    with pytest.raises(ValueError):
        SimScenario(n_questions=-1)


def test_very_negative_alpha_never_closes():
    s = small(agent=LogitAgent(LogitCoefficients(-1e3, 0.0, 0.0, 0.0)))
    assert not any(q.closed_by_asker for q in generate_dataset(s))


def test_very_positive_alpha_closes_at_first_visit():
    s = small(agent=LogitAgent(LogitCoefficients(1e3, 0.0, 0.0, 0.0)))
    for q in generate_dataset(s):
        first_visit = next(visit_schedule(generate_arrivals(s, int(q.question_id[1:])), 1.0, s.horizon), None)
        if first_visit is None:
            assert not q.closed_by_asker
        else:
            assert q.closed_by_asker and q.closed_at == first_visit[0]


def test_check_at_arrival_closes_at_the_answer():
    s = small(agent=LogitAgent(LogitCoefficients(1e3, 0.0, 0.0, 0.0)), check_at_arrival=True)
    for q in generate_dataset(s):
        if q.answer_times:
            assert q.closed_at == q.answer_times[0] and len(q.answer_times) == 1


def test_visit_schedule_grid():
    rows = list(visit_schedule([1.0, 2.5], 1.0, 6.0))
    assert rows == [(2.0, 1, 1.0, 1.0), (3.5, 2, 1.5, 1.0), (4.5, 2, 1.5, 2.0), (5.5, 2, 1.5, 3.0)]
    rows = list(visit_schedule([1.0, 2.5], 1.0, 6.0, check_at_arrival=True))
    assert rows[0] == (1.0, 1, 1.0, 0.0) and (2.5, 2, 1.5, 0.0) in rows


def test_records_satisfy_invariants():
    s = small(agent=LogitAgent(LogitCoefficients(-2.0, 0.05, 0.03, 0.02)))
    for q in generate_dataset(s):
        assert validate(q) == []
        assert q.posted_at == 0.0
        assert all(t < s.horizon for t in q.answer_times)
        if q.closed_by_asker:
            assert q.closed_at <= s.horizon
            assert q.answer_times[-1] <= q.closed_at


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), idx=st.integers(0, 10_000))
def test_closed_loop_determinism(seed, idx):
    """Expanding a simulated question and replaying the agent's draws finds the same close."""
    s = small(seed=seed, arrival=Arrivals("poisson", 0.3))
    q = simulate_question(s, idx)
    if not q.closed_by_asker:
        return
    gen = rng.stream(seed, rng.AGENT, idx)
    rows = expand_question(q, s.visit_interval)
    for row in rows:
        if s.agent.decide(row.n_answers, row.last_interarrival, row.waiting, gen):
            break
    assert row.closed and row.visit_time == q.closed_at
    assert simulate_asker(q.answer_times, s, idx) == q.closed_at


def test_gumbel_draws_are_standard():
    e = gumbel(rng.stream(0, rng.SAMPLES), 200_000)
    assert e.mean() == pytest.approx(np.euler_gamma, abs=0.01)
    assert e.var() == pytest.approx(math.pi**2 / 6, rel=0.02)


@pytest.mark.parametrize("n,l,w", [(1, 1.0, 1.0), (5, 10.0, 30.0), (40, 2.0, 80.0)])
def test_gumbel_agent_matches_logit_frequency(n, l, w):
    coeffs = LogitCoefficients(-1.5, 0.05, 0.03, 0.02)
    agent = GumbelAgent(*coeffs.split(2.0))
    p = logistic(coeffs.index(n, l, w))
    assert agent.close_probability(n, l, w) == pytest.approx(p)
    gen = rng.stream(11, rng.AGENT, n)
    m = 100_000
    hits = sum(agent.decide(n, l, w, gen) for _ in range(m))
    assert abs(hits / m - p) < 3 * math.sqrt(p * (1 - p) / m)


def test_gumbel_agent_reproduces_coefficients():
    agent = GumbelAgent(*TABLE3.split(1.0, 0.5))
    assert agent.coefficients.as_array() == pytest.approx(TABLE3.as_array())


def test_simulated_log_round_trips_through_both_formats():
    corpus = generate_dataset(small(n_questions=60))
    for fmt in ("csv", "jsonl"):
        text = serialize_event_log(corpus, fmt)
        assert parse_event_log(text, fmt) == corpus
        assert serialize_event_log(parse_event_log(text, fmt), fmt) == text


def test_scenario_text_round_trip():
    s = SimScenario(n_questions=12, arrival=Arrivals("gamma", 0.1, 2.5), horizon=48.0, seed=9,
                    agent=GumbelAgent(*TABLE3.split(3.0, 1.0)), check_at_arrival=True)
    rebuilt = build_scenario(parse_scenario(format_scenario(s)))
    a, b = scenario_params(rebuilt), scenario_params(s)
    assert a.keys() == b.keys()
    for k in a:
        assert a[k] == (pytest.approx(b[k]) if isinstance(b[k], float) else b[k])
    assert generate_dataset(rebuilt) == generate_dataset(s)


def test_parse_scenario_comments_and_errors():
    params = parse_scenario("# corpus\nn_questions = 5  # few\n\nagent = gumbel\ncheck_at_arrival = TRUE\n")
    assert params == {"n_questions": 5, "agent": "gumbel", "check_at_arrival": True}
    with pytest.raises(ValueError, match="line 1"):
        parse_scenario("colour = red")
    with pytest.raises(ValueError, match="line 2"):
        parse_scenario("seed = 1\nrate = fast")
    with pytest.raises(ValueError, match="key = value"):
        parse_scenario("seed 1")
    with pytest.raises(ValueError):
        build_scenario({"agent": "oracle"})


def test_build_scenario_defaults():
    s = build_scenario({})
    assert s.n_questions == 1536 and s.horizon == 96.0 and s.visit_interval == 1.0
    assert isinstance(s.agent, LogitAgent) and s.agent.coefficients == TABLE3
