import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jumpdecay import params as P
from jumpdecay.levy import Exponential, LevyModel, Polynomial, SubExponential, SuperExponential, big_psi, tail_mass

POWER = LevyModel(profile=Polynomial(1.0, 1.0))  # nu = r^-2 on all of (0, inf)
CAUCHY = LevyModel.stable(1.0)
SUBEXP = LevyModel(profile=SubExponential(1.0, 1.0, 0.5, 0.0))
EXP2 = LevyModel(profile=Exponential(1.0, 1.0, 2.0))
EXP0 = LevyModel(profile=Exponential(1.0, 1.0, 0.0))


def brute_conv_ratio(model, x, s, h=0.2, half=1000.0):
    # midpoint Riemann sum of int_{|y|>s, |x-y|>s} nu(y) nu(x-y) dy / nu(x); cell edges on hZ
    y = -half + h * (np.arange(int(2 * half / h)) + 0.5)
    keep = (np.abs(y) > s) & (np.abs(x - y) > s)
    y = y[keep]
    return float(np.sum(model.nu_radial(np.abs(y)) * model.nu_radial(np.abs(x - y))) * h / model.nu_radial(x))


def test_k1_against_brute_force_double_sum():
    est = P.k1(POWER, 1.0)
    assert est.stabilized
    xs = np.arange(2.0, 401.0, 2.0)
    brute = max(brute_conv_ratio(POWER, x, 1.0) for x in xs)
    assert est.value == pytest.approx(brute, rel=0.02)


def test_k1_non_increasing_and_tail_domination():
    vals = [P.k1(CAUCHY, float(s)).value for s in (1, 2, 4)]
    assert vals[1] <= vals[0] * (1 + P.STABLE_RTOL)
    assert vals[2] <= vals[1] * (1 + P.STABLE_RTOL)
    for s, v in zip((1, 2, 4), vals):
        assert v >= tail_mass(CAUCHY, s) / (2 * CAUCHY.c5**4)


def test_k1_rejects_small_s():
    with pytest.raises(ValueError):
        P.k1(CAUCHY, 0.5)


def test_k2_power_law_closed_form():
    # sup_{|x| >= 2s} (|x| / (|x| - s))^2 = 4, attained at |x| = 2s
    for s in (1.0, 3.0):
        assert P.k2(POWER, s, 2 * s) == pytest.approx(4.0, rel=1e-10)
    # grid search confirmation
    xs = np.linspace(2.0, 50.0, 20001)
    assert np.max((xs / (xs - 1.0)) ** 2) == pytest.approx(P.k2(POWER, 1.0, 2.0), rel=1e-10)


def test_k2_exponential_growth():
    vals = [P.k2(EXP0, s, 2 * s + 2) for s in (1.0, 2.0, 4.0)]
    # K2 >= C e^{c s1}: normalised ratio does not decay
    norm = [v / math.exp(s) for v, s in zip(vals, (1.0, 2.0, 4.0))]
    assert min(norm) >= 0.99 * norm[0]


@settings(max_examples=40, deadline=None)
@given(s1=st.floats(0.1, 5.0), gap=st.floats(0.01, 5.0), delta=st.floats(0.0, 3.0), c=st.floats(0.1, 2.0))
def test_k2_at_least_one(s1, gap, delta, c):
    m = LevyModel(profile=Exponential(1.0, c, delta))
    assert P.k2(m, s1, s1 + gap) >= 1.0


def test_k3_grid_cauchy_scale_invariant():
    a, b = P.k3_grid(CAUCHY, 1.0), P.k3_grid(CAUCHY, 4.0)
    assert a == pytest.approx(b, rel=1e-6)


def test_k3_upper_theta_term():
    consts = {"C9": 1.0, "C10": 1.0, "C4": 1.0}
    base = P.k3_upper(CAUCHY, 2.0, consts)
    with_theta = P.k3_upper(CAUCHY, 2.0, {**consts, "Theta": 0.5})
    assert with_theta - base == pytest.approx(math.e * 0.5 / big_psi(CAUCHY, 0.5) ** 2, rel=1e-10)
    with pytest.raises(ValueError):
        P.k3_upper(CAUCHY, 2.0, {"C9": 1.0})


def test_green_bdd_bounded_d3():
    m3 = LevyModel.stable(1.0, d=3)
    consts = {"C9": 1.0, "C10": 1.0, "C4": 1.0}
    out = P.green_bdd_diagnostic(m3, (1, 2, 4, 8, 16), lambda s: P.k3_upper(m3, s, consts))
    assert out["verdict"] == "pass"


def test_c3_bound_refinement_and_scaling():
    coarse = P.c3_bound(CAUCHY, 1.0)
    fine = P.c3_bound(CAUCHY, 1.0, n=2401)
    assert coarse == pytest.approx(fine, rel=0.05)
    # stable alpha = 1: exact 1/s scaling, within the H-doubling factor 4
    assert P.c3_bound(CAUCHY, 2.0) <= coarse
    assert P.c3_bound(CAUCHY, 2.0) == pytest.approx(coarse / 2, rel=1e-3)


def test_c3_bound_pure_diffusion():
    m = LevyModel(a=1.0, profile=Polynomial(1.0, 1.0), scale=1e-14)
    for s in (1.0, 2.0):
        assert P.c3_bound(m, s) == pytest.approx(P.BUMP_SUP_DD / s**2, rel=1e-4)


def test_exit_times_cauchy_closed_form():
    ex = P.GridExitTimes(CAUCHY)
    m, hw = ex.mean(1.0)
    assert abs(m - 1.0) <= max(hw, 1e-3)
    p, _ = ex.survival(1.0, 1.0)
    assert 0 < p < 1


def test_h1_h2_eta0_positive():
    ex = P.GridExitTimes(CAUCHY)
    k3 = lambda s: P.k3_grid(CAUCHY, s)  # noqa: E731
    assert P.h1(CAUCHY, 1, 2, ex, k3).value > 0
    assert P.h2(CAUCHY, 1, ex, k3).value > 0
    e0 = P.eta0(CAUCHY, ex, k3)
    assert 0 < e0.low <= e0.value <= e0.high < math.inf


def test_h2_scaled_decreasing_polynomial():
    ex = P.GridExitTimes(CAUCHY)
    k3 = lambda s: P.k3_grid(CAUCHY, s)  # noqa: E731
    vals = [s * P.h2(CAUCHY, s, ex, k3).value for s in (8, 16, 32)]
    assert vals[0] > vals[1] > vals[2]


def test_cond1_nonpositive_eta_fails():
    row = P.cond1_check(CAUCHY, 8, 16, 32, 0.0, P.GridExitTimes(CAUCHY), lambda s: P.k3_grid(CAUCHY, s))
    assert row["verdict"] == "fail"


def test_cond1_extended_lattice_passes():
    ex = P.GridExitTimes(CAUCHY)
    k3 = lambda s: P.k3_grid(CAUCHY, s)  # noqa: E731
    lhs = [P.cond1_check(CAUCHY, r, 2 * r, 4 * r, 1.0, ex, k3)["lhs"] for r in (8, 64, 512)]
    # LHS falls like 1 / r1
    assert lhs[0] > lhs[1] > lhs[2]
    assert lhs[0] / lhs[2] == pytest.approx(64, rel=0.1)
    row = P.cond1_check(CAUCHY, 2.0**18, 2.0**19, 2.0**20, 1.0, ex, k3)
    assert row["verdict"] == "pass"


@pytest.mark.xfail(strict=True, reason="constants as measured are too large for the lattice {8,16,32} at eta = 1")
def test_cond1_literal_lattice():
    ex = P.GridExitTimes(CAUCHY)
    k3 = lambda s: P.k3_grid(CAUCHY, s)  # noqa: E731
    rows = [P.cond1_check(CAUCHY, r, 2 * r, 4 * r, 1.0, ex, k3) for r in (8, 16, 32)]
    assert any(r["verdict"] == "pass" for r in rows)


def test_cond1_exponential_lhs_does_not_vanish():
    # the growth comes from K2; cheap exit-time and K3 stand-ins keep the test fast
    ex = P.AnalyticExitBound(EXP0, 1.0)
    k3 = lambda s: 1.0  # noqa: E731
    lhs = [P.cond1_check(EXP0, r, 2 * r, 4 * r, 1.0, ex, k3)["lhs"] for r in (1, 2, 4)]
    assert lhs[2] > lhs[1] > lhs[0]


def test_cond1_monotone_in_eta():
    ex = P.GridExitTimes(CAUCHY)
    k3 = lambda s: P.k3_grid(CAUCHY, s)  # noqa: E731
    row = P.cond1_check(CAUCHY, 8, 16, 32, 1.0, ex, k3)
    eta = 1.1 * row["lhs_high"]
    assert P.cond1_check(CAUCHY, 8, 16, 32, eta, ex, k3)["verdict"] == "pass"
    assert P.cond1_check(CAUCHY, 8, 16, 32, 2 * eta, ex, k3)["verdict"] == "pass"


def test_jump_paring_audit_verdicts():
    assert P.jump_paring_audit(LevyModel(profile=Exponential(1.0, 1.0, 1.6)))["verdict"] == "pass"
    assert P.jump_paring_audit(EXP0)["verdict"] == "fail"
    assert P.jump_paring_audit(LevyModel(profile=SuperExponential(1.0, 1.0, 2.0, 0.0)))["verdict"] == "fail"


def test_jump_paring_constant_polynomial_brute_force():
    out = P.jump_paring_audit(POWER)
    assert out["verdict"] == "pass"
    # g = r^-2 everywhere for this profile; brute-force convolution ratio with s -> 0 is not
    # integrable, the audit restricts to |y|, |x - y| >= 1
    brute = max(brute_conv_ratio(POWER, x, 1.0) for x in out["x"])
    assert out["C7"] == pytest.approx(brute, rel=0.02)


def test_smallness_checks():
    sub = P.smallness_checks(SUBEXP, kappa1=4.0)
    assert sub["intr_killing"]["verdict"] == "pass"
    poly = P.smallness_checks(POWER, kappa1=2.0, kappa2=P.nu_doubling_constant(POWER))
    assert poly["intr_killing"]["verdict"] == "pass"
    assert poly["unif_bdd"]["verdict"] == "pass"
    assert P.smallness_checks(EXP2)["unif_bdd"]["verdict"] == "fail"


def test_probe_classes_and_quadrature():
    poly = P.subexponentiality_probe(POWER)
    last = poly["curve"][-1]
    assert last["r"] == 50.0
    assert abs(last["ratio"] - 2.0) <= last["ci_halfwidth"]
    assert poly["classification"] == "subexponential"
    rel = P.subexponentiality_probe(LevyModel(profile=Exponential(1.0, 1.0, 1.6)))
    assert rel["classification"] == "bounded-above-2"
    assert min(c["ratio"] for c in rel["curve"]) > 2
    for c in rel["curve"]:
        q = P.subexponential_ratio_quadrature(LevyModel(profile=Exponential(1.0, 1.0, 1.6)), c["r"])
        assert abs(c["ratio"] - q) <= 3 * c["ci_halfwidth"]
    sup = P.subexponentiality_probe(LevyModel(profile=SuperExponential(1.0, 1.0, 2.0, 0.0)), r_set=(5, 10, 20))
    ratios = [c["ratio"] for c in sup["curve"]]
    assert ratios[0] < ratios[1] < ratios[2]


def test_condition_report_cauchy():
    rep = P.condition_report(CAUCHY)
    v = rep.verdicts
    assert v["K1_monotone"]["verdict"] == "pass"
    assert v["tail_domination"]["verdict"] == "pass"
    assert v["jump_paring"]["verdict"] == "pass"
    assert rep.eta0["value"] > 0
    d = rep.to_dict()
    assert set(d) >= {"k1_samples", "k2_samples", "verdicts", "eta0"}
