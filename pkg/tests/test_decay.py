import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jumpdecay import decay as D
from jumpdecay import spectral as S
from jumpdecay.levy import Exponential, LevyModel, Polynomial, SubExponential
from jumpdecay.mc import HittingEstimate

POWER = LevyModel(profile=Polynomial(1.0, 1.0))  # nu = r^-2
EXP1 = LevyModel(profile=Exponential(1.0, 1.0, 1.0))
SUBEXP = LevyModel(profile=SubExponential(1.0, 0.7, 0.5, 0.0))
GRID = S.Grid1D(100.0, 2**12)


def nu_field(model, grid, scale=1.0):
    r = np.maximum(np.abs(grid.x), grid.h)
    return scale * np.exp(np.asarray(model.log_nu_radial(r), float))


def test_power_fit_recovers_exponent():
    x = np.linspace(10, 50, 200)
    fit = D.fit_decay(x, 3.0 * x**-2.0, (10, 50), "power")
    assert fit.power == pytest.approx(2.0, abs=1e-6)
    assert fit.log_amplitude == pytest.approx(math.log(3.0), abs=1e-6)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_exp_fit_recovers_rate_and_log_term():
    x = np.linspace(5, 40, 300)
    fit = D.fit_decay(x, 2.0 * np.exp(-x) / x, (5, 40), "exp")
    assert fit.rate == pytest.approx(1.0, abs=1e-4)
    assert fit.power == pytest.approx(1.0, abs=1e-4)
    fixed = D.fit_decay(x, 2.0 * np.exp(-x) / x, (5, 40), "exp", delta=1.0)
    assert fixed.rate == pytest.approx(1.0, abs=1e-10) and fixed.fixed == {"delta": 1.0}


def test_stretched_fit_finds_beta():
    x = np.linspace(5, 200, 400)
    fit = D.fit_decay(x, np.exp(-0.7 * np.sqrt(x)), (5, 200), "stretched-exp", delta=0.0)
    assert fit.beta == pytest.approx(0.5, abs=1e-4)
    assert fit.rate == pytest.approx(0.7, rel=1e-3)


def test_fit_rejects_bad_input():
    x = np.linspace(1, 10, 10)
    with pytest.raises(D.FitError):
        D.fit_decay(x, np.ones_like(x), (1, 10), "gaussian")
    with pytest.raises(D.FitError):
        D.fit_decay(x, np.ones_like(x), (20, 30), "power")
    with pytest.raises(D.FitError):
        D.fit_decay(x, -np.ones_like(x), (1, 10), "power")


@settings(max_examples=40, deadline=None)
@given(p=st.floats(0.5, 6.0), amp=st.floats(-5.0, 5.0))
def test_power_fit_round_trip(p, amp):
    x = np.geomspace(10, 50, 60)
    fit = D.fit_decay(x, np.exp(amp - p * np.log(x)), (10, 50), "power")
    assert fit.power == pytest.approx(p, abs=1e-8)


def test_ratio_of_nu_to_itself_is_one():
    st_ = D.tail_ratio(nu_field(POWER, GRID), POWER, (10, 50), GRID)
    assert st_.min == pytest.approx(1.0, rel=1e-12) and st_.max == pytest.approx(1.0, rel=1e-12)
    assert st_.verdict == "pass" and st_.spread == pytest.approx(1.0)
    # light tails work through logs even where nu underflows
    far = S.Grid1D(2000.0, 2**14)
    lt = D.tail_ratio(nu_field(EXP1, far), EXP1, (300, 600), far, check_roundoff=False)
    assert lt.spread == pytest.approx(1.0, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(1e-3, 1e3))
def test_ratio_scale_equivariance(c):
    base = np.exp(-np.abs(GRID.x) / 7) + 0.1 * nu_field(POWER, GRID)
    a = D.tail_ratio(base, POWER, (10, 50), GRID)
    b = D.tail_ratio(c * base, POWER, (10, 50), GRID)
    assert b.min == pytest.approx(c * a.min, rel=1e-10)
    assert b.spread == pytest.approx(a.spread, rel=1e-10)


def test_window_guards():
    with pytest.raises(D.WindowError):
        D.window_nodes(GRID, (5, 50))
    with pytest.raises(D.WindowError):
        D.window_nodes(GRID, (10, 60))
    with pytest.raises(D.WindowError):
        D.window_nodes(GRID, (10, 50), resolved_radius=30.0)
    with pytest.raises(D.WindowError):
        D.window_nodes(GRID, (20, 10))
    assert D.window_nodes(GRID, (5, 50), near_guard=False).size > 3


def test_grid_from_nodes():
    assert D.grid_from_nodes(GRID.x) == GRID
    with pytest.raises(D.WindowError):
        D.grid_from_nodes(np.linspace(-1, 1, 64))


def fit_of(model, grid, window, family):
    idx = D.window_nodes(grid, window)
    return D.fit_decay(grid.x[idx], nu_field(model, grid)[idx], window, family)


def test_regime_nu_driven_and_inconclusive():
    fit = fit_of(POWER, GRID, (10, 50), "power")
    assert D.classify_regime(POWER, -1.0, fit)["regime"] == "nu-driven"
    noisy = D.Fit("power", None, 2.0, None, 0.0, 0.5, 10, (10, 50))
    out = D.classify_regime(POWER, -1.0, noisy)
    assert out["regime"] == "inconclusive" and out["notes"]


def test_regime_lambda_driven_needs_sweep():
    slow = D.Fit("exp", 0.3, 0.0, None, 0.0, 0.999, 50, (10, 50))
    assert D.classify_regime(EXP1, -0.1, slow)["regime"] == "not-nu-driven"
    sweep = [(-0.1, 0.3), (-0.3, 0.5), (-0.6, 0.75)]
    assert D.classify_regime(EXP1, -0.1, slow, sweep=sweep)["regime"] == "lambda-driven"
    bad = [(-0.1, 0.5), (-0.3, 0.3), (-0.6, 0.75)]
    out = D.classify_regime(EXP1, -0.1, slow, sweep=bad)
    assert out["regime"] == "not-nu-driven"
    assert any("not monotone" in n for n in out["notes"])


def test_regime_slower_than_nu_and_confining():
    fit = D.Fit("exp", 0.5, 1.0, None, 0.0, 0.999, 50, (10, 50))
    out = D.classify_regime(EXP1, -1.0, fit, audit_verdict="fail", ratio_log_growth=math.log(10.0))
    assert "slower-than-nu" in out["candidates"]
    assert D.classify_regime(POWER, 1.0, fit, confining_band=3.0)["regime"] == "confining-nu-over-V"
    assert D.classify_regime(POWER, 1.0, fit, confining_band=300.0)["regime"] == "inconclusive"


def test_matches_nu_bands():
    ok = D.Fit("stretched-exp", 0.7, 0.0, 0.55, 0.0, 1.0, 10, (1, 2))
    assert D.matches_nu(SUBEXP, ok)
    off = D.Fit("stretched-exp", 0.7, 0.0, 0.75, 0.0, 1.0, 10, (1, 2))
    assert not D.matches_nu(SUBEXP, off)
    assert D.matches_nu(POWER, D.Fit("power", None, 2.1, None, 0.0, 1.0, 10, (1, 2)))
    assert not D.matches_nu(POWER, D.Fit("power", None, 2.3, None, 0.0, 1.0, 10, (1, 2)))


def test_potential_radius():
    assert D.potential_radius(S.Well(2.0, 1.0), 0.5) == pytest.approx(1.0, abs=1e-3)
    # Poschl-Teller depth / cosh^2: |V| <= delta / 2 beyond arccosh(sqrt(2 depth / delta))
    r = D.potential_radius(S.PoschlTeller(3.0, 1.0), 0.1)
    assert r == pytest.approx(math.acosh(math.sqrt(60.0)), abs=1e-3)
    with pytest.raises(ValueError):
        D.potential_radius(S.ConfiningPower(1.0), 0.1)


def test_lower_bound_constant_formula():
    K, c6 = D.lower_bound_constant(POWER, -1.0, 0.5, 2.0, 0.3, 1.7, C6=2.0)
    e = 1.5
    assert K == pytest.approx((1 - math.exp(-e)) / (POWER.c5**2 * 2.0**3 * e) * 0.3 * 1.7, rel=1e-14)
    assert D.lower_bound_constant(POWER, -1.0, 0.5, 2.0, 0.3, 1.7, C6=math.inf)[0] == 0.0


def test_lower_bound_certificate_pass_and_fail():
    g = S.Grid1D(100.0, 2**12)
    V = S.Well(2.0, 1.0)
    shaped = np.minimum(nu_field(POWER, g), 1.0)
    # mass on B(0, 1) is 2, so K = 0.0777 / c5^2 and a field equal to nu in the tail clears it
    cert = D.lower_bound_certificate(POWER, shaped, g, -1.0, 0.5, V, 0.3, C6=2.0)
    assert cert.r == pytest.approx(1.0, abs=1e-3) and cert.mass == pytest.approx(2.0, rel=0.01)
    assert cert.verdict == "pass"
    thin = np.where(np.abs(g.x) < 5, shaped, 1e-9 * shaped)
    cert = D.lower_bound_certificate(POWER, thin, g, -1.0, 0.5, V, 0.3, C6=2.0)
    assert cert.verdict == "fail" and cert.worst_margin < 0
    with pytest.raises(D.FitError):
        D.lower_bound_certificate(POWER, -shaped, g, -1.0, 0.5, V, 0.3, C6=2.0)


def est(x, value):
    return HittingEstimate(x, 1.0, 1.0, value, 0.0, 1.0, 0.0, 8.0, 100)


def test_hitting_overlay():
    one = D.hitting_overlay([est(4.0, 0.1)], POWER)
    assert one["stability"] == "n/a" and one["C"] == pytest.approx(0.1 * 16)
    same = D.hitting_overlay([est(x, 3.0 / x**2) for x in (2.0, 4.0, 8.0)], POWER)
    assert same["stability"] == "stable" and same["C"] == pytest.approx(3.0)
    assert same["log_ratio_slope"] == pytest.approx(0.0, abs=1e-12)
    slow = D.hitting_overlay([est(x, 1.0 / x) for x in (2.0, 4.0, 8.0)], POWER)
    assert slow["stability"] == "unstable" and slow["log_ratio_slope"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        D.hitting_overlay([], POWER)


def test_decay_report_on_ground_state():
    # the fitted power creeps up to 2 as the window moves out (1.846 on [8, 32] is outside the band)
    g = S.Grid1D(128.0, 2**13)
    res = S.ground_state(LevyModel.stable(1.0), S.Well(2.0, 1.0), g)
    rep = D.decay_report(res.phi0, LevyModel.stable(1.0), g, (16.0, 64.0), res.lambda0)
    assert rep.fit["family"] == "power"
    assert rep.ratio_stats["verdict"] == "pass"
    assert rep.regime["regime"] == "nu-driven"


def test_overlay_rows_and_empty_window():
    fit = fit_of(POWER, GRID, (10, 50), "power")
    rows = D.overlay_rows(nu_field(POWER, GRID), POWER, GRID, (10, 50), fit)
    assert all(r[3] == pytest.approx(1.0) and r[4] == pytest.approx(r[1], rel=1e-8) for r in rows)
    assert D.overlay_rows(nu_field(POWER, GRID), POWER, GRID, None) == []
