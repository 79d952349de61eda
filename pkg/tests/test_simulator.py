import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robust_planner import blocksworld
from robust_planner.errors import SimulationError
from robust_planner.planner import import_plan, plan
from robust_planner.simulator import (
    EXCEEDANCE_HEADER,
    SWEEP_HEADER,
    ExecutionConfig,
    ValueDistribution,
    csv_text,
    exact_distribution,
    exceedance,
    monte_carlo,
    probability_sweep,
    sweep_grid,
)
from test_planner import FIXTURES, LOTTERY


@pytest.fixture(scope="module")
def one_action():
    return import_plan((FIXTURES / "one_action_plan.json").read_text())


def test_fixture_exact_distribution(one_action):
    d = exact_distribution(one_action)
    assert d.support == {19: pytest.approx(0.28), 51: pytest.approx(0.72)}
    assert exceedance(d) == [(19, pytest.approx(1.0)), (51, pytest.approx(0.72))]


def test_fixture_exec_prob_endpoints(one_action):
    assert monte_carlo(one_action, ExecutionConfig(trials=50, execution_probability=0.0)).mean == 19
    assert monte_carlo(one_action, ExecutionConfig(trials=50, execution_probability=1.0)).mean == 51


def test_zero_success_keeps_initial_value(fig9_plans):
    for p in fig9_plans.values():
        s = monte_carlo(p, ExecutionConfig(trials=200, execution_probability=0.0, seed=3))
        assert s.mean == 19.0 and s.stddev == 0.0
        assert exact_distribution(p, 0.0).support == {19.0: 1.0}


def test_certain_success_reaches_success_leaf(fig9_plans):
    for p in fig9_plans.values():
        s = monte_carlo(p, ExecutionConfig(trials=20, execution_probability=1.0))
        assert s.mean == p.success_leaf().value


def test_depth_zero_plan_point_mass():
    from robust_planner import parse_domain, parse_scenario

    sc = parse_scenario(
        "problem p\n domain lottery\n init: ready\n value-model delta\n vmin 0 vmax 10\n depth-limit 0\n",
        parse_domain(LOTTERY),
    )
    p = plan(sc)
    assert exact_distribution(p).support == {0.0: 1.0}
    s = monte_carlo(p, ExecutionConfig(trials=10))
    assert s.mean == 0.0 and s.histogram == {0.0: 10}


def test_exact_mass_sums_to_one(fig9_plans):
    for p in fig9_plans.values():
        for q in (None, 0.1, 0.5, 0.9):
            d = exact_distribution(p, q)
            assert d.total_mass == pytest.approx(1.0, abs=1e-12)


def test_exceedance_monotone(fig9_plans):
    e = exceedance(exact_distribution(fig9_plans[0.5]))
    assert e[0][1] == pytest.approx(1.0)
    assert all(a[1] >= b[1] for a, b in zip(e, e[1:]))
    assert [v for v, _ in e] == sorted(v for v, _ in e)


def test_same_seed_same_result(fig9_plans):
    p = fig9_plans[0.6]
    a = monte_carlo(p, ExecutionConfig(trials=300, seed=11))
    b = monte_carlo(p, ExecutionConfig(trials=300, seed=11))
    assert a == b
    assert (a.values == b.values).all()


def test_monte_carlo_agrees_with_exact(fig9_plans):
    p = fig9_plans[0.5]
    d = exact_distribution(p)
    n = 2000
    within = 0
    for seed in range(20):
        s = monte_carlo(p, ExecutionConfig(trials=n, seed=seed))
        within += abs(s.mean - d.mean) <= 4 * d.stddev / math.sqrt(n)
    assert within >= 19


def test_histogram_counts_trials(fig9_plans):
    s = monte_carlo(fig9_plans[0.5], ExecutionConfig(trials=500, seed=1))
    assert sum(s.histogram.values()) == 500
    assert all(float(k).is_integer() for k in s.histogram)


def test_override_requires_binary_success_failure():
    from robust_planner import parse_domain, parse_scenario

    sc = parse_scenario(
        "problem p\n domain lottery\n init: ready\n value-model delta\n vmin 0 vmax 10\n depth-limit 1\n",
        parse_domain(LOTTERY),
    )
    p = plan(sc)
    monte_carlo(p, ExecutionConfig(trials=5))
    with pytest.raises(SimulationError):
        monte_carlo(p, ExecutionConfig(trials=5, execution_probability=0.5))
    with pytest.raises(SimulationError):
        exact_distribution(p, 0.5)


@pytest.mark.parametrize("kw", [{"trials": 0}, {"trials": 2.5}, {"execution_probability": 1.5}, {"bin_width": 0}])
def test_bad_config(kw):
    with pytest.raises(SimulationError):
        ExecutionConfig(**kw)


def test_sweep_grid():
    assert sweep_grid(0.1) == [i / 10 for i in range(11)]
    assert sweep_grid(1.0) == [0.0, 1.0]
    for bad in (0.3, 0.0, -0.1, 1.5):
        with pytest.raises(SimulationError):
            sweep_grid(bad)


def test_sweep_endpoints(fig9_plans):
    rows = probability_sweep(fig9_plans[0.5], sweep_grid(0.5), trials=50, seed=0)
    assert [r[0] for r in rows] == [0.0, 0.5, 1.0]
    assert rows[0][1] == 19.0
    assert rows[-1][1] == fig9_plans[0.5].success_leaf().value
    assert probability_sweep(fig9_plans[0.5], [], trials=5, seed=0) == []


def test_csv_formatting():
    text = csv_text(SWEEP_HEADER, [(0.1, 1 / 3), (1.0, 19.0)])
    assert text == "exec_prob,mean_value\n0.1,0.333333\n1,19\n"
    assert csv_text(EXCEEDANCE_HEADER, []).splitlines() == ["value,prob_geq"]


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.integers(-50, 50), st.floats(0.001, 1.0), min_size=1, max_size=8))
def test_exceedance_properties(raw):
    total = math.fsum(raw.values())
    d = ValueDistribution({float(k): m / total for k, m in raw.items()})
    e = exceedance(d)
    assert e[0][1] == pytest.approx(1.0)
    for v, pr in e:
        assert pr == pytest.approx(d.prob_at_least(v), abs=1e-12)
    assert d.stddev >= 0
    assert min(d.support) - 1e-9 <= d.mean <= max(d.support) + 1e-9
