import math

import numpy as np
import pytest

from immunet.bounds import effective_degrees, phi
from immunet.cascade import IC, estimate_sigma
from immunet.errors import SizeCapError
from immunet.graph import ProbGraph
from immunet.immunize import ExactEvaluator, greedy, singleton_groups
from immunet.oracle import (
    ExactEngine,
    counterexample_a,
    counterexample_b,
    critical_subset_check,
    exact_pi,
    exact_sigma,
    exhaustive_opt,
    submodularity_gap_check,
)

from util import random_instance


def test_counterexample_a_values():
    g = counterexample_a()
    assert exact_pi(g, ()).value == 0.0
    assert exact_pi(g, {1}).value == 1.0
    assert exact_pi(g, {2}).value == 1.0
    assert exact_pi(g, {1, 2}).value == 4.0


@pytest.mark.parametrize("a", [1, 3, 6])
def test_counterexample_b_values(a):
    g = counterexample_b(a)
    assert exact_pi(g, ()).value == 0.0
    assert exact_pi(g, {1}).value == 2 + a
    assert exact_pi(g, {2}).value == 1 + a
    assert exact_pi(g, {1, 2}).value == 2 + a


def test_chain_expected_value():
    g = ProbGraph(3, [(0, 1, 0.5), (1, 2, 0.5)], utility=[1.0, 2.0, 4.0], seeds={0})
    result = exact_pi(g, {1})
    assert result.enumerated_realizations == 4
    assert abs(result.value - (0.5 * 2.0 + 0.25 * 4.0)) < 1e-12


def test_breakdown_mass():
    rng = np.random.default_rng(3)
    g = random_instance(rng, m_range=(6, 10))
    res = ExactEngine(g).pi({1}, keep_breakdown=True)
    probs, values = res.breakdown
    assert abs(probs.sum() - 1.0) < 1e-12
    assert abs(probs @ values - res.value) < 1e-12


def test_arc_cap():
    g = ProbGraph(10, [(u, v, 0.5) for u in range(5) for v in range(5, 10)], seeds={0})
    assert g.num_arcs == 25
    with pytest.raises(SizeCapError, match="25 arcs"):
        exact_pi(g, ())
    with pytest.raises(SizeCapError):
        exact_pi(g, (), arc_cap=24)


def test_subset_cap():
    g = counterexample_a()
    with pytest.raises(SizeCapError):
        exhaustive_opt(g, 3, subset_cap=5)


def test_exhaustive_opt_counterexamples():
    ga = counterexample_a()
    best, value = exhaustive_opt(ga, 2)
    assert best == {1, 2} and value == 4.0
    assert exhaustive_opt(ga, 0) == (frozenset(), 0.0)
    a = 3
    gb = counterexample_b(a)
    best, value = exhaustive_opt(gb, 1)
    assert best == {1} and value == 2 + a


def test_exhaustive_opt_tie_prefers_lexicographic():
    # two symmetric branches: removing {1} and removing {2} tie at value 1
    g = ProbGraph(3, [(0, 1, 1.0), (0, 2, 1.0)], seeds={0})
    best, value = exhaustive_opt(g, 1)
    assert best == {1} and value == 1.0


def test_exact_pi_monotone_and_zero_at_empty():
    rng = np.random.default_rng(17)
    for _ in range(10):
        g = random_instance(rng)
        engine = ExactEngine(g)
        assert engine.pi(()).value == 0.0
        nodes = [u for u in range(1, g.n)]
        small = set(int(u) for u in rng.choice(nodes, size=1))
        big = small | {int(u) for u in rng.choice(nodes, size=2)}
        assert engine.pi(small).value <= engine.pi(big).value + 1e-12


def test_exact_sigma_matches_monte_carlo():
    rng = np.random.default_rng(23)
    g = random_instance(rng)
    exact = exact_sigma(g).value
    mc = estimate_sigma(g, IC, replicates=10_000, master_seed=5)
    assert abs(mc.mean - exact) <= 4 * mc.stderr


# ---------------------------------------------------------------------------
# critical subsets
# ---------------------------------------------------------------------------


def test_critical_subset_certain_path():
    g = ProbGraph(3, [(0, 1, 1.0), (1, 2, 1.0)], seeds={0})
    report = critical_subset_check(g, seeds={0}, target=2, s_star={1})
    assert report.size_probability == {1: 1.0}
    assert report.p_blocking_differs == 1.0
    assert report.holds


def test_critical_subset_counterexample_a_vacuous_bound():
    g = counterexample_a()
    report = critical_subset_check(g, seeds={0}, target=3, s_star={1, 2})
    # both nodes are needed in the single (certain) realization
    assert report.size_probability == {2: 1.0}
    assert math.isinf(report.max_effective_degree)
    assert report.holds  # 1 - phi(inf) = 1 makes the bound vacuous but valid


def test_critical_subset_random_instances():
    rng = np.random.default_rng(31)
    checked = 0
    tries = 0
    while checked < 30 and tries < 400:
        tries += 1
        g = random_instance(rng, m_range=(6, 10))
        nodes = [u for u in range(1, g.n)]
        target = int(rng.choice(nodes))
        pool = [u for u in nodes if u != target]
        s_star = set(int(u) for u in rng.choice(pool, size=2, replace=False))
        report = critical_subset_check(g, seeds={0}, target=target, s_star=s_star)
        if report.p_blocking_differs == 0.0:
            continue
        checked += 1
        assert report.holds
        assert math.isfinite(report.max_effective_degree)
        assert abs(sum(report.size_probability.values()) - report.p_blocking_differs) < 1e-12
    assert checked == 30


# ---------------------------------------------------------------------------
# relaxed submodularity
# ---------------------------------------------------------------------------


def test_gap_check_submodular_tree():
    # disjoint certain paths: blocking sets never interact
    g = ProbGraph(5, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 4, 1.0)], seeds={0})
    assert submodularity_gap_check(g, s_star={1, 2}, s=(), alpha=0.0, beta=0.0)


def test_gap_check_counterexample_violates_plain_submodularity():
    g = counterexample_a()
    assert not submodularity_gap_check(g, s_star={1, 2}, s=(), alpha=0.0, beta=0.0)
    # with alpha = 1 - phi(lambda) = 1 the left side vanishes
    assert submodularity_gap_check(g, s_star={1, 2}, s=(), alpha=1.0, beta=0.0)


def test_gap_check_with_effective_degree_alpha_on_random_instances():
    rng = np.random.default_rng(37)
    for _ in range(10):
        g = random_instance(rng, m_range=(6, 10))
        lam = float(np.max(effective_degrees(g).lambdas, initial=0.0))
        nodes = [u for u in range(1, g.n)]
        s_star = set(int(u) for u in rng.choice(nodes, size=2, replace=False))
        s = set(int(u) for u in rng.choice(nodes, size=1))
        assert submodularity_gap_check(g, s_star, s, alpha=1.0 - phi(lam), beta=0.0)


# ---------------------------------------------------------------------------
# greedy guarantee (exact evaluation)
# ---------------------------------------------------------------------------


def test_greedy_exact_respects_guarantee():
    rng = np.random.default_rng(41)
    for _ in range(15):
        g = random_instance(rng, m_range=(6, 10))
        engine = ExactEngine(g)
        lam = float(np.max(effective_degrees(g).lambdas, initial=0.0))
        bound = 1.0 - math.exp(-phi(lam))
        for k in (1, 2):
            selection = greedy(g, singleton_groups(g), k, IC, ExactEvaluator())
            chosen = set()
            for gid in selection.chosen:
                chosen.add(gid)
            achieved = engine.pi(chosen).value
            _, opt = exhaustive_opt(g, k, engine=engine)
            assert achieved >= bound * opt - 1e-9
