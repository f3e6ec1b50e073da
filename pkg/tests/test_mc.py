import math

import numpy as np
import pytest
from scipy import special, stats

from jumpdecay import mc as M
from jumpdecay import spectral as S
from jumpdecay.levy import LevyModel, Polynomial, psi

CAUCHY = LevyModel.stable(1.0)
BM = LevyModel(a=0.5, profile=Polynomial(1.0, 1.0), scale=0.0)  # psi = xi^2 / 2


def test_brownian_variance():
    x = M.sample_increments(BM, M.PathConfig(seed=5), 2.0, 200_000)
    # Var X_t = 2 a t; the sample variance has relative sd sqrt(2 / n)
    assert np.var(x) == pytest.approx(2.0, abs=4 * 2.0 * math.sqrt(2 / x.size))


def test_exact_stable_sampler_ks():
    x = M.sample_increments(CAUCHY, M.PathConfig(sampler="exact-stable", seed=1), 1.0, 100_000)
    assert stats.kstest(x, stats.cauchy.cdf).statistic < 0.01
    # t^(1/alpha) scaling
    y = M.sample_increments(CAUCHY, M.PathConfig(sampler="exact-stable", seed=2), 3.0, 100_000)
    assert stats.kstest(y / 3.0, stats.cauchy.cdf).statistic < 0.01


def test_compound_poisson_matches_exact_tail():
    exact = 1 - 2 / math.pi * math.atan(2.0)
    for eps in (0.1, 0.05):
        y = M.sample_increments(CAUCHY, M.PathConfig(epsilon=eps, dt=0.005, seed=1), 1.0, 100_000)
        assert abs(np.mean(np.abs(y) > 2) / exact - 1) <= 0.05
        assert stats.kstest(y, stats.cauchy.cdf).statistic < 0.01


def test_multi_jump_guard():
    with pytest.raises(M.ConfigError):
        M.PathConfig(epsilon=0.1, dt=0.02).validate(CAUCHY)
    with pytest.raises(M.ConfigError):
        M.PathConfig(sampler="exact-stable").validate(LevyModel(profile=Polynomial(1.0, 1.0)))


def test_start_inside_hits_at_zero():
    out = M.first_hitting(CAUCHY, M.PathConfig(dt=0.005, n_paths=100, seed=0), 0.5, 1.0)
    assert np.all(out["tau"] == 0.0) and out["hit_fraction"] == 1.0


def test_cauchy_mean_exit_time():
    # E^0 tau for (-1, 1) is sqrt(1 - 0^2) = 1
    e = M.exit_time_ball(CAUCHY, M.PathConfig(epsilon=0.1, dt=0.002, n_paths=20_000, seed=2), 1.0)
    assert e.censored_fraction == 0.0
    assert abs(e.mean - 1.0) <= 3 * e.ci_halfwidth / 1.96


def test_brownian_mean_exit_time():
    r = 1.5
    e = M.exit_time_ball(BM, M.PathConfig(dt=0.01, n_paths=20_000, seed=2), r)
    assert abs(e.mean - r**2 / (2 * BM.a * BM.d)) <= 3 * e.ci_halfwidth / 1.96


def test_feynman_kac_exact_cases():
    xs = np.linspace(-1e3, 1e3, 11)
    cfg = M.PathConfig(dt=0.01, n_paths=2000, seed=3)
    free = M.fk_expectation(BM, cfg, lambda p: np.zeros_like(p), 0.0, 1.0, xs, np.ones_like(xs))
    assert free.value == pytest.approx(1.0, abs=1e-12)
    const = M.fk_expectation(BM, cfg, lambda p: np.full_like(p, 0.7), 0.0, 1.0, xs, np.ones_like(xs))
    assert const.value == pytest.approx(math.exp(-0.7), rel=1e-12)
    # V >= 0 can only shrink the expectation
    pos = M.fk_expectation(BM, cfg, lambda p: p**2, 0.0, 1.0, xs, np.ones_like(xs))
    assert 0 < pos.value < 1


def test_laplace_hitting_limits():
    cfg = M.PathConfig(epsilon=0.1, dt=0.005, horizon=4.0, n_paths=4000, seed=7)
    rows = M.laplace_hitting(CAUCHY, cfg, (4.0,), 1.0, (0.1, 1.0, 1e6))[0]
    vals = [r.value for r in rows]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] == 0.0
    with pytest.raises(ValueError):
        M.laplace_hitting(CAUCHY, cfg, (4.0,), 1.0, 0.0)


def test_determinism_across_workers(monkeypatch):
    cfg = M.PathConfig(epsilon=0.1, dt=0.005, n_paths=10_000, block=1000, seed=11)
    monkeypatch.setenv(M.WORKERS_ENV, "1")
    a = M.sample_increments(CAUCHY, cfg, 1.0)
    ta = M.first_hitting(CAUCHY, cfg.with_(horizon=2.0), 3.0, 1.0)["tau"]
    monkeypatch.setenv(M.WORKERS_ENV, "3")
    b = M.sample_increments(CAUCHY, cfg, 1.0)
    tb = M.first_hitting(CAUCHY, cfg.with_(horizon=2.0), 3.0, 1.0)["tau"]
    assert np.array_equal(a, b) and np.array_equal(ta, tb)


def test_domination_sandwich():
    rep = M.domination_check(CAUCHY, 8.0, 1.0)
    assert rep.verdict == "pass"
    assert rep.sigma_mass > 0 and rep.sigma_sup > 0
    with pytest.raises(ValueError):
        M.modified_model(CAUCHY, 2.0)


def cauchy_resolvent_kernel(x):
    # (1/pi) int_0^inf cos(k x) / (1 + k) dk in sine and cosine integrals
    si, ci = special.sici(x)
    return -(ci * np.cos(x) + (si - math.pi / 2) * np.sin(x)) / math.pi


def test_potential_kernel_three_routes():
    sym = np.abs
    for x in (1.0, 2.0, 8.0):
        assert M.potential_kernel_quadrature(sym, 1.0, x) == pytest.approx(cauchy_resolvent_kernel(x), abs=1e-9)
    # grid kernel: O(h^2) in the step, periodised over 2L; extrapolate in h and remove the images
    g1, g2 = S.Grid1D(256.0, 2**14), S.Grid1D(256.0, 2**15)
    k1, k2 = M.potential_kernel(sym, 1.0, g1), M.potential_kernel(sym, 1.0, g2)
    for x in (1.0, 2.0, 8.0):
        rich = (4 * k2[int(np.argmin(np.abs(g2.x - x)))] - k1[int(np.argmin(np.abs(g1.x - x)))]) / 3
        images = sum(cauchy_resolvent_kernel(abs(x + k * 512.0)) for k in range(-2000, 2001) if k)
        assert rich - images == pytest.approx(cauchy_resolvent_kernel(x), abs=3e-7)


def test_potential_kernel_ordering():
    out = M.potential_kernel_ordering(CAUCHY, 8.0)
    assert out["verdict"] == "pass"
    assert out["eta"] == pytest.approx(2 * out["sigma_mass"])


def test_flattened_symbol_is_psi_plus_sigma_part():
    mod = M.modified_model(CAUCHY, 8.0)
    xi = np.array([0.0, 0.5, 2.0])
    assert mod.psi_sigma(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(mod.symbol(xi) >= np.asarray(psi(CAUCHY, xi)))
    # large xi: the cosine term averages out and psi_sigma -> |sigma|
    assert mod.psi_sigma(np.array([400.0]))[0] == pytest.approx(mod.sigma_mass, rel=1e-2)


def test_ikeda_watanabe_probe():
    p = M.ikeda_watanabe_probe(CAUCHY, M.PathConfig(epsilon=0.1, dt=0.002, n_paths=40_000, seed=3))
    assert p["censored_fraction"] == 0.0
    assert p["relative_gap"] <= 0.10


def test_mc_green_against_killed_resolvent():
    g = S.Grid1D(16.0, 4096)
    inside = np.abs(g.x) < 1.0
    y, delta = 0.3, 0.1
    rhs = (np.abs(g.x[inside] - y) < delta) / (2 * delta)
    u = S.killed_resolvent(CAUCHY, g, inside, rhs)
    i = int(np.argmin(np.abs(g.x[inside] + 0.2)))
    x = float(g.x[inside][i])
    m, hw = M.mc_green(CAUCHY, M.PathConfig(epsilon=0.1, dt=0.002, n_paths=20_000, seed=4), 1.0, x, y, delta)
    # grid error between N = 2048 and 4096 is 0.4%
    assert abs(m - u[i]) <= 3 * hw / 1.96 + 0.01 * u[i]
    with pytest.raises(ValueError):
        M.mc_green(CAUCHY, M.PathConfig(), 1.0, 1.5, 0.0, 0.1)
