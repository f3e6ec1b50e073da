import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from jumpdecay.levy import (
    Exponential,
    LevyModel,
    Polynomial,
    RadialLaw,
    SubExponential,
    SuperExponential,
    UserTable,
    big_psi,
    density_regularity_checks,
    fourier_density,
    interval_nu_integral,
    nu_ball_moment,
    pruitt_H,
    pruitt_comparability,
    psi,
    tail_mass,
    transition_density,
)

CATALOG = [
    LevyModel(profile=Polynomial(1.0, 1.0)),
    LevyModel(profile=Polynomial(0.5, 0.5)),
    LevyModel(profile=SubExponential(1.0, 1.0, 0.5, 0.0)),
    LevyModel(profile=Exponential(1.0, 1.0, 2.0)),
    LevyModel(profile=SuperExponential(1.0, 1.0, 2.0, 0.0)),
    LevyModel(a=0.5, profile=Exponential(0.5, 2.0, 0.0)),
]


def test_profile_values():
    poly = LevyModel(profile=Polynomial(1.0, 1.0))
    assert poly.nu_radial(2.0) == pytest.approx(0.25, rel=1e-14)
    ex = LevyModel(profile=Exponential(1.0, 1.0, 1.0))
    assert ex.nu_radial(1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
    # large-r branch is the bare formula
    assert ex.nu_radial(3.0) == pytest.approx(math.exp(-3.0) / 3.0, rel=1e-13)


def test_user_table_rejects_increasing_values():
    with pytest.raises(ValueError):
        UserTable((1.0, 2.0, 3.0), (1.0, 2.0, 0.5))
    with pytest.raises(ValueError):
        UserTable((1.0, 1.0, 3.0), (1.0, 0.5, 0.25))


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        Polynomial(gamma=2.0)
    with pytest.raises(ValueError):
        SubExponential(beta=1.0)
    with pytest.raises(ValueError):
        LevyModel(d=4)
    with pytest.raises(ValueError):
        LevyModel(comparability=(2.0, 1.0))


@pytest.mark.parametrize("model", CATALOG + [LevyModel.stable(1.0), LevyModel.relativistic()])
def test_psi_vanishes_at_zero(model):
    assert psi(model, 0.0) == 0.0


def test_relativistic_quadrature_matches_closed_form():
    m = LevyModel.relativistic(1.0)
    xi = np.array([0.3, 1.0, 3.0, 10.0])
    exact = np.sqrt(xi**2 + 1) - 1
    assert np.allclose(psi(m, xi, method="closed"), exact, rtol=1e-14)
    quad = psi(m, xi, method="quadrature")
    assert np.allclose(quad, exact, rtol=2e-3)


def test_stable_quadrature_matches_closed_form():
    m = LevyModel.stable(1.0)
    xi = np.array([0.5, 1.0, 4.0])
    assert np.allclose(psi(m, xi, method="quadrature"), xi, rtol=1e-8)


def test_subexp_psi_against_trapezoid_oracle():
    # psi(1) = 2 int_0^inf (1 - cos r) nu(r) dr, independent uniform trapezoid on [1e-8, 1e3]
    m = LevyModel(profile=SubExponential(1.0, 1.0, 0.5, 0.0))
    total, n, lo, hi = 0.0, 10**7, 1e-8, 1e3
    h = (hi - lo) / (n - 1)
    for start in range(0, n, 10**6):
        r = lo + h * np.arange(start, min(start + 10**6 + 1, n))
        # 2 sin^2(r/2) rather than 1 - cos r: the latter cancels to 0 near r = 1e-8
        f = 2 * np.sin(r / 2) ** 2 * m.nu_radial(r)
        total += h * (f.sum() - 0.5 * (f[0] + f[-1]))
    oracle = 2 * total
    assert psi(m, 1.0) == pytest.approx(oracle, rel=1e-6)


def test_big_psi_stable_and_doubling():
    m = LevyModel.stable(1.0)
    for r in (0.5, 1.0, 3.0):
        assert big_psi(m, r) == pytest.approx(r, rel=1e-12)
    poly = LevyModel(profile=Polynomial(1.0, 1.0))
    ratios = [big_psi(poly, 2 * r) / big_psi(poly, r) for r in (0.25, 0.5, 1.0)]
    assert max(ratios) <= 4.0
    for r in (0.25, 0.5, 1.0, 2.0):
        assert big_psi(poly, r) >= big_psi(poly, r / 2)


def test_pruitt_closed_form_power_law():
    # nu = r^-2 everywhere: H(1) = int_{|y|<1} 1 dy + int_{|y|>1} y^-2 dy = 2 + 2
    m = LevyModel(profile=Polynomial(1.0, 1.0))
    assert pruitt_H(m, 1.0) == pytest.approx(4.0, rel=1e-9)
    # and H(r) = 4 / r by scaling
    assert pruitt_H(m, 3.0) == pytest.approx(4.0 / 3.0, rel=1e-9)


@pytest.mark.parametrize("model", CATALOG)
def test_pruitt_doubling(model):
    for r in (0.5, 1.0, 2.0):
        assert pruitt_H(model, r) <= 4 * pruitt_H(model, 2 * r) * (1 + 1e-12)


def test_pruitt_diffusion_dominates_near_zero():
    m = LevyModel(a=1.0, profile=Exponential(1.0, 1.0, 0.0))
    r = 1e-4
    assert pruitt_H(m, r) * r**2 == pytest.approx(1.0, rel=2e-3)


def test_pruitt_comparability_band():
    m = LevyModel.stable(1.0)
    c1, c2 = pruitt_comparability(m, np.geomspace(0.1, 10, 9))
    assert c1 <= c2
    c1f, c2f = pruitt_comparability(m, np.geomspace(0.1, 10, 17))
    assert c1f == pytest.approx(c1, rel=0.01) and c2f == pytest.approx(c2, rel=0.01)
    a, b = pruitt_comparability(m, [2.0])
    assert a == b


def test_cauchy_density():
    m = LevyModel.stable(1.0)
    x = np.linspace(-20, 20, 4001)
    p = fourier_density(m, 1.0, x)
    assert np.max(np.abs(p - 1 / (math.pi * (1 + x**2)))) < 1e-6


def test_gaussian_limit_density():
    m = LevyModel(a=1.0, profile=Polynomial(1.0, 1.0), scale=1e-14)
    x = np.linspace(-15, 15, 3001)
    t = 0.7
    p = fourier_density(m, t, x)
    exact = np.exp(-(x**2) / (4 * t)) / math.sqrt(4 * math.pi * t)
    assert np.max(np.abs(p - exact)) < 1e-6


def test_exponential_density_mass():
    m = LevyModel(profile=Exponential(1.0, 1.0, 0.0))
    x = -60 + 120 / 4096 * np.arange(4096)
    sl = transition_density(m, 5.0, x)
    assert abs(1 - sl.mass) <= 1e-4
    assert np.all(sl.values >= 0)


def test_density_regularity_constants_finite():
    m = LevyModel.stable(1.0)
    out = density_regularity_checks(m, (0.1, 1.0, 10.0), (1, 2, 4, 8), L=100.0, h=0.01)
    assert math.isfinite(out["C17"]) and math.isfinite(out["C9"])
    assert not out["unbounded_growth"]


def test_tail_mass_values():
    m = LevyModel(profile=Polynomial(1.0, 1.0))
    assert tail_mass(m, 1.0) == pytest.approx(2.0, rel=1e-10)
    sub = LevyModel(profile=SubExponential(1.0, 1.0, 0.5, 0.0))
    # 2 int_4^inf e^{-sqrt r} dr = 4 Gamma(2, 2)
    oracle = 4 * special.gammaincc(2, 2.0) * special.gamma(2)
    assert tail_mass(sub, 4.0) == pytest.approx(oracle, rel=1e-9)


@pytest.mark.parametrize("model", CATALOG)
def test_tail_mass_monotone(model):
    assert tail_mass(model, 2.0) < tail_mass(model, 1.0)


def test_ball_moment_and_interval_integral():
    m = LevyModel(profile=Polynomial(1.0, 1.0))
    # int_{|y|<eps} y^2 y^-2 dy = 2 eps
    assert nu_ball_moment(m, 0.5) == pytest.approx(1.0, rel=1e-10)
    assert interval_nu_integral(m, 2.0, 4.0) == pytest.approx(0.25, rel=1e-10)
    assert interval_nu_integral(m, -4.0, -2.0) == pytest.approx(0.25, rel=1e-10)


def test_radial_law_survival_power_law():
    m = LevyModel(profile=Polynomial(1.0, 1.0))
    law = RadialLaw(m, 0.5)
    # P(|J| > r) = (1/r) / (1/0.5)
    for r in (1.0, 7.0, 100.0):
        assert math.exp(float(law.log_survival(r))) == pytest.approx(0.5 / r, rel=1e-6)
    rng = np.random.default_rng(3)
    s = law.sample_radius(rng, 200_000, above=10.0)
    assert s.min() >= 10.0
    # conditioned law is again 1/r above 10
    assert np.mean(s > 20.0) == pytest.approx(0.5, abs=0.01)


def test_model_json_round_trip():
    for m in CATALOG + [LevyModel.stable(0.7), LevyModel.relativistic(n_table=50)]:
        back = LevyModel.from_dict(m.to_dict())
        assert back == m


@settings(max_examples=40, deadline=None)
@given(gamma=st.floats(0.1, 1.8), delta=st.floats(0.2, 3.0), a=st.floats(0.0, 2.0),
       xi=st.floats(0.01, 20.0), eta=st.floats(0.01, 20.0))
def test_psi_properties(gamma, delta, a, xi, eta):
    m = LevyModel(a=a, profile=Polynomial(gamma, delta))
    p, q, pq = psi(m, xi), psi(m, eta), psi(m, xi + eta)
    assert p > 0
    assert psi(m, -xi) == pytest.approx(p, rel=1e-12)
    # sqrt(psi) is subadditive for any Levy exponent
    assert math.sqrt(pq) <= (math.sqrt(p) + math.sqrt(q)) * (1 + 1e-8)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(0.2, 3.0), beta=st.floats(0.1, 0.9), delta=st.floats(0.0, 2.0), s=st.floats(0.5, 10.0))
def test_tail_mass_monotone_property(c, beta, delta, s):
    m = LevyModel(profile=SubExponential(1.0, c, beta, delta))
    assert tail_mass(m, 2 * s) < tail_mass(m, s)
    assert pruitt_H(m, s) <= 4 * pruitt_H(m, 2 * s) * (1 + 1e-12)
