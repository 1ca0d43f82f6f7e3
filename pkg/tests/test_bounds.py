import csv
import io
import math

import numpy as np
import pytest

from immunet.bounds import (
    BoundReport,
    effective_degree_ic,
    effective_degree_link,
    effective_degree_sir,
    effective_degrees,
    factor_vs_r0,
    household_factor,
    household_lambda,
    household_profile,
    link_effective_degrees,
    optimize_threshold,
    phi,
    recommended_replicates,
)
from immunet.cascade import CascadeModel
from immunet.errors import ConfigError, DomainError
from immunet.graph import GenConfig, HouseholdSpec, ProbGraph, build_households, generate


# ---------------------------------------------------------------------------
# phi
# ---------------------------------------------------------------------------


def test_phi_anchors():
    assert phi(0.0) == 1.0
    assert abs(phi(1.0) - 1.0 / (math.e - 1.0)) < 1e-12
    assert phi(math.inf) == 0.0


def test_phi_strictly_decreasing_and_bounded():
    grid = np.linspace(0.0, 20.0, 200)
    values = phi(grid)
    assert np.all(np.diff(values) < 0)
    assert np.all(values > 0) and np.all(values <= 1)


def test_phi_domain():
    with pytest.raises(DomainError):
        phi(-0.1)


def test_phi_array_roundtrip():
    out = phi(np.array([0.0, 1.0, np.inf]))
    assert out.shape == (3,)
    assert out[0] == 1.0 and out[2] == 0.0


# ---------------------------------------------------------------------------
# effective degrees
# ---------------------------------------------------------------------------


def star(p: float, leaves: int) -> ProbGraph:
    return ProbGraph.undirected(leaves + 1, [(0, i, p) for i in range(1, leaves + 1)])


def test_effective_degree_ic_values():
    assert effective_degree_ic(star(0.0, 4), 0) == 0.0
    g = star(0.1, 10)
    expected = 0.9**-5 - 1.0
    assert abs(effective_degree_ic(g, 0) - expected) < 1e-12
    assert abs(expected - 0.69351) < 1e-5
    assert math.isinf(effective_degree_ic(star(1.0, 2), 0))
    # leaf: one neighbor
    assert abs(effective_degree_ic(g, 1) - (0.9**-0.5 - 1.0)) < 1e-12


def test_effective_degree_sir_values():
    g = star(0.1, 10)
    assert effective_degree_sir(g, 0, 1.0) == effective_degree_ic(g, 0)
    b = 0.9**-5
    expected = 0.5 * b / (1.0 - 0.5 * b) - 1.0
    assert abs(effective_degree_sir(g, 0, 0.5) - expected) < 1e-12
    assert abs(expected - 4.5254) < 1e-4
    # divergent attempt series
    assert math.isinf(effective_degree_sir(star(0.5, 10), 0, 0.1))


def test_effective_degree_link_values():
    assert effective_degree_link(0.0) == 0.0
    assert effective_degree_link(0.5) == 1.0
    assert abs(effective_degree_link(0.9) - 9.0) < 1e-12
    assert math.isinf(effective_degree_link(1.0))
    with pytest.raises(DomainError):
        effective_degree_link(1.5)
    assert abs((1 - math.exp(-phi(effective_degree_link(0.5)))) - 0.4412) < 2e-4


def test_effective_degree_monotone_in_p_and_degree():
    for d in (2, 5, 9):
        lams = [effective_degree_ic(star(p, d), 0) for p in (0.1, 0.3, 0.5, 0.7)]
        assert all(a < b for a, b in zip(lams, lams[1:]))
    for p in (0.2, 0.5):
        lams = [effective_degree_ic(star(p, d), 0) for d in (1, 3, 6, 9)]
        assert all(a < b for a, b in zip(lams, lams[1:]))


def test_effective_degree_sir_monotone_in_gamma():
    g = star(0.2, 8)
    lams = [effective_degree_sir(g, 0, gamma) for gamma in (0.4, 0.6, 0.8, 1.0)]
    assert all(a > b for a, b in zip(lams, lams[1:]))


def test_profile_matches_scalar_and_restriction():
    g = generate(GenConfig("er", 40, 6, r0=1.2, rng_seed=1))
    prof = effective_degrees(g)
    for u in (0, 7, 19):
        assert abs(prof.lambdas[u] - effective_degree_ic(g, u)) < 1e-12
    sub = effective_degrees(g, nodes=[7, 19])
    assert np.allclose(sub.lambdas, prof.lambdas[[7, 19]])
    sirp = effective_degrees(g, CascadeModel("sir", 0.7))
    for u in (0, 7):
        assert abs(sirp.lambdas[u] - effective_degree_sir(g, u, 0.7)) < 1e-12


def test_link_profile():
    g = ProbGraph(3, [(0, 1, 0.5), (1, 2, 0.9)], seeds={0})
    prof = link_effective_degrees(g)
    assert np.allclose(prof.lambdas, [1.0, 9.0])
    assert prof.model == "link"


# ---------------------------------------------------------------------------
# threshold optimization
# ---------------------------------------------------------------------------


def test_optimize_uniform_profile():
    from immunet.bounds import EffectiveDegreeProfile

    prof = EffectiveDegreeProfile(np.full(10, 0.7), "ic")
    report = optimize_threshold(prof, 4)
    assert report.n_s == 0 and report.lambda_prime == 0.7
    assert abs(report.factor - (1 - math.exp(-phi(0.7)))) < 1e-12


def test_optimize_threshold_example():
    from immunet.bounds import EffectiveDegreeProfile

    prof = EffectiveDegreeProfile(np.array([5.0, 0.7, 0.7, 0.7]), "ic")
    report = optimize_threshold(prof, 2)
    rows = {i: factor for i, _, _, factor in report.table}
    assert abs(rows[1] - 0.0334) < 5e-4
    assert abs(rows[2] - 0.2920) < 5e-4
    assert report.lambda_prime == 0.7 and report.n_s == 1
    assert abs(report.factor - 0.2920) < 5e-4
    assert abs(report.bicriteria[0] - 1.5) < 1e-12
    assert abs(report.bicriteria[1] - (1 - math.exp(-phi(0.7)))) < 1e-12


def test_optimize_vanishing_lambda_reaches_one_minus_inv_e():
    from immunet.bounds import EffectiveDegreeProfile

    prof = EffectiveDegreeProfile(np.zeros(5), "ic")
    report = optimize_threshold(prof, 3)
    assert abs(report.factor - (1 - 1 / math.e)) < 1e-12


def test_optimize_is_argmax_and_capped():
    rng = np.random.default_rng(2)
    from immunet.bounds import EffectiveDegreeProfile

    for _ in range(10):
        lams = rng.gamma(1.0, 2.0, size=30)
        prof = EffectiveDegreeProfile(lams, "ic")
        k = int(rng.integers(1, 12))
        report = optimize_threshold(prof, k)
        assert all(report.factor >= row[3] for row in report.table)
        assert 0.0 <= report.factor <= 1 - 1 / math.e + 1e-12


def test_optimize_errors():
    from immunet.bounds import EffectiveDegreeProfile

    with pytest.raises(ConfigError):
        optimize_threshold(EffectiveDegreeProfile(np.array([]), "ic"), 3)
    with pytest.raises(ConfigError):
        optimize_threshold(EffectiveDegreeProfile(np.array([1.0]), "ic"), 0)


def test_bound_report_csv():
    from immunet.bounds import EffectiveDegreeProfile

    report = optimize_threshold(
        EffectiveDegreeProfile(np.array([5.0, 0.7, 0.7]), "ic"), 2
    )
    buf = io.StringIO()
    report.to_csv(buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["i", "lambda_prime", "n_s", "factor"]
    assert rows[-1][0] == "best"
    assert float(rows[-1][3]) == report.factor
    assert len(rows) == 2 + len(report.table)


# ---------------------------------------------------------------------------
# closed-form factor vs r0
# ---------------------------------------------------------------------------


def test_factor_vs_r0_anchors():
    assert abs(factor_vs_r0(10, 1, 1.0) - 0.50) < 0.005
    assert abs(factor_vs_r0(10, 1, 2.0) - 0.26) < 0.005
    assert abs(factor_vs_r0(10, 1, 0.0) - (1 - 1 / math.e)) < 1e-12


def test_factor_vs_r0_monotone():
    factors = [factor_vs_r0(10, 1, r0) for r0 in np.linspace(0.0, 3.0, 13)]
    assert all(a > b for a, b in zip(factors, factors[1:]))
    skews = [factor_vs_r0(10, s, 1.0) for s in (1, 1.5, 2, 3)]
    assert all(a > b for a, b in zip(skews, skews[1:]))


def test_factor_vs_r0_domain():
    with pytest.raises(DomainError):
        factor_vs_r0(10, 1, 10.0)
    with pytest.raises(DomainError):
        factor_vs_r0(10, 0.5, 1.0)
    with pytest.raises(DomainError):
        factor_vs_r0(0, 1, 0.0)


def test_factor_vs_r0_agrees_with_profile_on_uniform_degree_graph():
    # ring: every node has degree exactly 2
    n = 24
    edges = [(i, (i + 1) % n, 0.0) for i in range(n)]
    for r0 in (0.5, 1.0, 1.5):
        g = ProbGraph.undirected(n, edges).with_uniform_p(r0 / 2.0)
        report = optimize_threshold(effective_degrees(g), k=5)
        assert abs(report.factor - factor_vs_r0(2.0, 1.0, r0)) < 1e-12
        assert report.n_s == 0


# ---------------------------------------------------------------------------
# households
# ---------------------------------------------------------------------------


def test_household_lambda_value():
    assert household_lambda(0.0, 10) == 0.0
    assert abs(household_lambda(0.1, 10) - (0.9**-5 - 1)) < 1e-12


def test_household_factor_limits():
    assert abs(household_factor(0.0, 2) - 0.393) < 0.002
    assert abs(household_factor(0.0, 3) - 0.283) < 0.002
    assert abs(household_factor(0.0, 4) - 0.221) < 0.002
    lam = 0.8
    assert abs(household_factor(lam, 1) - (1 - math.exp(-phi(lam)))) < 1e-12
    assert household_factor(lam, 2) < household_factor(0.0, 2)


def test_household_profile_recovers_blocks():
    g = generate(GenConfig("er", 30, 4, r0=1.0, rng_seed=7))
    hh = build_households(g, HouseholdSpec(size=3, strength=8.0, r0=1.0))
    weak = float(np.min(hh.p))
    households, lams = household_profile(hh, p_threshold=2 * weak)
    assert households == [tuple(range(i, i + 3)) for i in range(0, 30, 3)]
    assert np.all(lams >= 0) and np.all(np.isfinite(lams))
    # external degree of household h counts its weak edges once each
    h0 = households[0]
    external = sum(
        1
        for u, v, p in hh.arc_list()
        if u < v and p <= 2 * weak and ((u in h0) != (v in h0))
    )
    assert abs(lams[0] - household_lambda(weak, external)) < 1e-12


# ---------------------------------------------------------------------------
# sample-size guidance
# ---------------------------------------------------------------------------


def test_recommended_replicates_example():
    assert recommended_replicates(100, 3, 10, 5, 0.05) == 1419


def test_recommended_replicates_scale_free():
    u = 250.0
    r = recommended_replicates(u, 4, 7, u, 0.05)
    assert r <= math.ceil(math.log(2 * 7 * 4 / 0.05) / 2)


def test_recommended_replicates_quarter_on_double_eps():
    r1 = recommended_replicates(100, 2, 5, 2, 0.05)
    r2 = recommended_replicates(100, 2, 5, 4, 0.05)
    assert abs(r2 - r1 / 4) <= 1


def test_recommended_replicates_validation():
    with pytest.raises(ConfigError):
        recommended_replicates(100, 1, 1, 0, 0.05)
    with pytest.raises(ConfigError):
        recommended_replicates(100, 1, 1, 5, 1.5)
    with pytest.raises(ConfigError):
        recommended_replicates(100, 0, 1, 5, 0.05)
