"""The bundled acceptance suite: ten end-to-end criteria with pinned tolerances.

Each criterion returns a CriterionResult; ``run_suite`` prints one line per
criterion.  Configurations are fixed here so that results are reproducible.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import decay, mc, params, spectral
from .levy import (
    Exponential,
    LevyModel,
    SubExponential,
    SuperExponential,
    big_psi,
    fourier_density,
    pruitt_H,
    tail_mass,
)

# pinned tolerances
C1_RESIDUAL = 1e-8
C1_SPREAD = 10.0
C1_POWER = (1.85, 2.15)
C2_RATE_REL = 0.15
C2_BETA_ABS = 0.1
C2_CAP = 25.0
C3_SATURATION_REL = 0.15
C3_SHALLOW_MAX = 0.8
C4_GROWTH = 5.0
C5_K1_RTOL = 0.01
C6_TOL = 1e-8
C8_DENSITY_REL = 0.05
C8_FK_CIS = 3.0
C8_OVERLAY_FACTOR = 2.0
C9_BAND = 10.0
C9_POWER = (3.7, 4.3)
C10_SELF_ADJ = 1e-10


@dataclass
class CriterionResult:
    number: int
    title: str
    verdict: str
    detail: str
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"[{self.verdict.upper():<12}] criterion {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f} s)"

    def to_dict(self):
        return asdict(self)


def _verdict(ok):
    return "pass" if ok else "fail"


def _ground(model, V, grid):
    res = spectral.ground_state(model, V, grid)
    return res, res.phi0


# ----------------------------------------------------------------------------


def criterion_1():
    m = LevyModel.stable(1.0)
    g = spectral.Grid1D(128.0, 2**15)
    res, phi = _ground(m, spectral.Well(2.0, 1.0), g)
    win = (20.0, 60.0)
    stats = decay.tail_ratio(phi, m, win, g)
    idx = decay.window_nodes(g, win)
    fit = decay.fit_decay(g.x[idx], phi[idx], win, "power")
    lam, resid = res.lambda0, float(res.residuals[0])
    ok = (res.discrete and lam < 0 and resid <= C1_RESIDUAL and stats.spread <= C1_SPREAD
          and C1_POWER[0] <= fit.power <= C1_POWER[1])
    return _verdict(ok), (f"lambda0={lam:.6f} residual={resid:.1e} ratio max/min={stats.spread:.3f} "
                          f"power={fit.power:.4f}"), {
        "lambda0": lam, "residual": resid, "spread": stats.spread, "power": fit.power, "r2": fit.r2}


def criterion_2():
    m = LevyModel(profile=SubExponential(1.0, 1.0, 0.5, 0.0))
    g = spectral.Grid1D(96.0, 2**15)
    res, phi = _ground(m, spectral.Well(3.0, 1.0), g)
    win = (15.0, 40.0)
    stats = decay.tail_ratio(phi, m, win, g, cap=C2_CAP)
    idx = decay.window_nodes(g, win)
    fit = decay.fit_decay(g.x[idx], phi[idx], win, "stretched-exp", delta=m.profile.delta)
    fit_b = decay.fit_decay(g.x[idx], phi[idx], win, "stretched-exp", beta=m.profile.beta, delta=m.profile.delta)
    ok_c = abs(fit.rate - 1.0) <= C2_RATE_REL
    ok_b = abs(fit.beta - 0.5) <= C2_BETA_ABS
    ok = ok_c and ok_b and stats.verdict == "pass"
    return _verdict(ok), (f"fit c={fit.rate:.4f} beta={fit.beta:.4f} (c with beta fixed at 1/2: {fit_b.rate:.4f}) "
                          f"ratio max/min={stats.spread:.3f} lambda0={res.lambda0:.4f}"), {
        "lambda0": res.lambda0, "c": fit.rate, "beta": fit.beta, "c_beta_fixed": fit_b.rate, "spread": stats.spread}


C3_DEPTHS = (0.5, 1.0, 2.0, 4.0, 8.0)
C3_WINDOW = (8.0, 16.0)


def criterion_3():
    m = LevyModel(profile=Exponential(1.0, 1.0, 2.0))
    g = spectral.Grid1D(64.0, 2**14)
    rows = []
    for a in C3_DEPTHS:
        res, phi = _ground(m, spectral.Well(a, 1.0), g)
        idx = decay.window_nodes(g, C3_WINDOW, spectral.roundoff_profile(phi, g)[1])
        x, p = g.x[idx], phi[idx]
        fixed = decay.fit_decay(x, p, C3_WINDOW, "exp", delta=m.profile.delta)
        free = decay.fit_decay(x, p, C3_WINDOW, "exp")
        rows.append({"a": a, "lambda0": res.lambda0, "bound": res.discrete, "rate": fixed.rate,
                     "rate_delta_free": free.rate, "delta_free": free.power})
    rows.sort(key=lambda r: abs(r["lambda0"]))
    rates = [r["rate"] for r in rows]
    mono = all(b >= a for a, b in zip(rates, rates[1:]))
    sat = abs(rates[-1] - 1.0) <= C3_SATURATION_REL
    shallow = rates[0] <= C3_SHALLOW_MAX
    ok = all(r["bound"] for r in rows) and mono and sat and shallow
    txt = ", ".join(f"{r['lambda0']:.3f}->{r['rate']:.3f}" for r in rows)
    return _verdict(ok), f"(lambda0 -> rate, delta fixed at 2): {txt}", {"rows": rows}


def criterion_4():
    g = spectral.Grid1D(64.0, 2**14)
    win = (10.0, 30.0)
    out, ok = {}, True
    for name, prof in (("exp-delta0", Exponential(1.0, 1.0, 0.0)),
                       ("superexp-beta2", SuperExponential(1.0, 1.0, 2.0, 0.0))):
        m = LevyModel(profile=prof)
        res, phi = _ground(m, spectral.Well(0.5, 1.0), g)
        gr = decay.ratio_growth(phi, m, win, g)
        audit = params.jump_paring_audit(m)["verdict"]
        good = gr["monotone_increasing"] and gr["log_factor"] >= math.log(C4_GROWTH)
        ok &= good
        out[name] = {"lambda0": res.lambda0, "log10_growth": gr["log_factor"] / math.log(10),
                     "monotone": gr["monotone_increasing"], "audit": audit}
    txt = "; ".join(f"{k}: growth 10^{v['log10_growth']:.1f}, monotone={v['monotone']}, audit={v['audit']}"
                    for k, v in out.items())
    return _verdict(ok), txt, out


def criterion_5():
    poly = LevyModel.stable(1.0)
    k1s = [params.k1(poly, float(s)) for s in (1, 2, 4, 8)]
    vals = [e.value for e in k1s]
    mono = all(b <= a * (1 + C5_K1_RTOL) for a, b in zip(vals, vals[1:])) and all(e.stabilized for e in k1s)
    tails = [tail_mass(poly, s) / (2 * poly.c5**4) for s in (1, 2, 4, 8)]
    tail_ok = all(v >= t for v, t in zip(vals, tails))
    sub = LevyModel(profile=SubExponential(1.0, 1.0, 0.5, 0.0))
    prod = params.smallness_checks(sub, kappa1=4.0)["intr_killing"]["product"]
    dec = all(b < a for a, b in zip(prod, prod[1:]))
    ex = LevyModel(profile=Exponential(1.0, 1.0, 2.0))
    sharp = [params.k2(ex, s, 2 * s + 2) / math.exp(s) for s in (1, 2, 4)]
    bounded = min(sharp) > 0 and all(b >= a * (1 - C5_K1_RTOL) for a, b in zip(sharp, sharp[1:]))
    ok = mono and tail_ok and dec and bounded
    return _verdict(ok), (f"K1={['%.4f' % v for v in vals]} tail bounds={['%.4f' % t for t in tails]} "
                          f"subexp product={['%.3f' % p for p in prod]} K2/e^s={['%.3f' % r for r in sharp]}"), {
        "K1": vals, "tail_bounds": tails, "product": prod, "K2_over_exp": sharp,
        "checks": {"K1_monotone": mono, "tail_dom": tail_ok, "product_decreasing": dec, "sharp_bounded": bounded}}


def criterion_6():
    m = LevyModel.stable(1.0)
    reps = [mc.domination_check(m, 4.0, t, tol=C6_TOL) for t in (0.5, 1.0, 2.0)]
    ok = all(r.verdict == "pass" for r in reps)
    txt = "; ".join(f"t={r.t:g}: lower {r.lower_violation:.1e}, upper {r.upper_violation:.1e}" for r in reps)
    return _verdict(ok), f"|sigma|={reps[0].sigma_mass:.4f} sup sigma={reps[0].sigma_sup:.4f}; {txt}", {
        "reports": [asdict(r) for r in reps]}


def criterion_7():
    m = LevyModel.stable(1.0)
    g = spectral.Grid1D(32.0, 2**12)
    out, ok = {}, True
    for name, V in (("Well(2,1)", spectral.Well(2.0, 1.0)), ("PoschlTeller(3,1)", spectral.PoschlTeller(3.0, 1.0))):
        res = spectral.ground_state(m, V, g)
        tab = spectral.smallev_check(m, V, (1.0, 2.0, 4.0), g, lambda0=res.lambda0)
        rows = tab["rows"] if isinstance(tab, dict) else tab
        ok &= all(r["verdict"] == "pass" for r in rows)
        out[name] = {"lambda0": res.lambda0, "margins": [r["margin"] for r in rows]}
    txt = "; ".join(f"{k}: margins {['%.3f' % x for x in v['margins']]}" for k, v in out.items())
    return _verdict(ok), txt, out


C8_SEED = 2024


def criterion_8():
    m = LevyModel.stable(1.0)
    # (a) increment density at t = 1, bins of width 1/2 on [-5, 5]
    x = mc.sample_increments(m, mc.PathConfig(epsilon=0.05, dt=0.005, n_paths=10**6, seed=C8_SEED), 1.0)
    edges = np.arange(-5.0, 5.0 + 1e-9, 0.5)
    counts, _ = np.histogram(x, edges)
    emp = counts / x.size / 0.5
    fine = spectral.Grid1D(64.0, 2**13)
    dens = fourier_density(m, 1.0, fine.x)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * fine.h)])
    ref = np.diff(np.interp(edges, fine.x, cdf)) / 0.5
    dens_err = float(np.max(np.abs(emp / ref - 1)))
    ok_a = dens_err <= C8_DENSITY_REL
    # (b) Feynman-Kac eigen-relation
    g = spectral.Grid1D(32.0, 2**11)
    V = spectral.Well(2.0, 1.0)
    res = spectral.ground_state(m, V, g)
    fk = []
    for x0 in (0.0, 2.0):
        est = mc.fk_expectation(m, mc.PathConfig(epsilon=0.1, dt=0.005, n_paths=100_000, seed=C8_SEED), V, x0,
                                1.0, g.x, res.phi0)
        target = math.exp(-res.lambda0) * float(np.interp(x0, g.x, res.phi0))
        fk.append({"x": x0, "estimate": est.value, "target": target, "halfwidth": est.ci_halfwidth,
                   "in_band": abs(est.value - target) <= C8_FK_CIS * est.ci_halfwidth})
    ok_b = all(r["in_band"] for r in fk)
    # (c) hitting overlay
    ests = mc.laplace_hitting(m, mc.PathConfig(epsilon=0.1, dt=0.015, horizon=8.0, n_paths=40_000, seed=C8_SEED),
                              (8.0, 16.0, 32.0), 1.0, 1.0)
    ov = decay.hitting_overlay(ests, m, factor=C8_OVERLAY_FACTOR)
    ok_c = ov["stability"] == "stable"
    ok = ok_a and ok_b and ok_c
    return _verdict(ok), (f"(a) density sup rel err={dens_err:.4f}; (b) FK ratio "
                          f"{[round(r['estimate'] / r['target'], 4) for r in fk]}; (c) C(x)="
                          f"{[round(r['ratio'], 3) for r in ov['rows']]} spread={ov['spread']:.3f}"), {
        "density_sup_rel_err": dens_err, "fk": fk, "overlay": ov, "parts": {"a": ok_a, "b": ok_b, "c": ok_c}}


def criterion_9():
    m = LevyModel.stable(1.0)
    g = spectral.Grid1D(100.0, 2**15)
    V = spectral.ConfiningPower(1.0)
    res, phi = _ground(m, V, g)
    win = (10.0, 30.0)
    idx = decay.window_nodes(g, win, spectral.roundoff_profile(phi, g)[1])
    x = g.x[idx]
    band_vals = np.exp(decay.log_abs(phi[idx]) + np.log(V(x)) - m.log_nu_radial(x))
    band = float(band_vals.max() / band_vals.min())
    fit = decay.fit_decay(x, phi[idx], win, "power")
    ok = band <= C9_BAND and C9_POWER[0] <= fit.power <= C9_POWER[1]
    return _verdict(ok), f"lambda0={res.lambda0:.6f} band phi V/nu={band:.4f} power={fit.power:.4f}", {
        "lambda0": res.lambda0, "band": band, "power": fit.power}


def property_suite():
    """Quick in-process invariants; the pytest suite holds the full versions."""
    rng = np.random.default_rng(7)
    checks = {}
    m = LevyModel.stable(1.0)
    g = spectral.Grid1D(16.0, 256)
    V = spectral.Well(2.0, 1.0)
    worst = 0.0
    for _ in range(100):
        f, h = rng.standard_normal(g.N), rng.standard_normal(g.N)
        lhs = np.dot(spectral.apply_H(m, V, g, f), h)
        rhs = np.dot(f, spectral.apply_H(m, V, g, h))
        worst = max(worst, abs(lhs - rhs) / (np.linalg.norm(f) * np.linalg.norm(h)))
    checks["self_adjoint"] = worst <= C10_SELF_ADJ
    poly = LevyModel(profile=SubExponential(1.0, 1.0, 0.5, 0.0))
    rs = [0.25, 0.5, 1.0, 2.0, 4.0]
    Ps = [big_psi(poly, r) for r in rs]
    Hs = [pruitt_H(poly, r) for r in rs]
    checks["Psi_monotone"] = all(b >= a for a, b in zip(Ps, Ps[1:]))
    checks["H_monotone_doubling"] = all(b <= a for a, b in zip(Hs, Hs[1:])) and all(
        pruitt_H(poly, r) <= 4 * pruitt_H(poly, 2 * r) * (1 + 1e-12) for r in rs)
    checks["K2_at_least_1"] = all(params.k2(poly, s1, s2) >= 1 for s1, s2 in ((1, 2), (2, 5), (4, 9)))
    cfg = mc.PathConfig(epsilon=0.1, dt=0.01, horizon=2.0, n_paths=3000, seed=5, block=1000)
    a = mc.exit_time_ball(m, cfg, 1.0).mean
    old = os.environ.get(mc.WORKERS_ENV)
    os.environ[mc.WORKERS_ENV] = "3"
    try:
        b = mc.exit_time_ball(m, cfg, 1.0).mean
    finally:
        if old is None:
            os.environ.pop(mc.WORKERS_ENV, None)
        else:
            os.environ[mc.WORKERS_ENV] = old
    checks["seed_determinism"] = a == b
    gg = spectral.Grid1D(64.0, 1024)
    phi = 3.5 * m.nu_radial(np.maximum(np.abs(gg.x), gg.h))
    st = decay.tail_ratio(phi, m, (8.0, 30.0), gg, check_roundoff=False)
    checks["ratio_scale_equivariance"] = abs(st.min / 3.5 - 1) < 1e-12 and abs(st.max / 3.5 - 1) < 1e-12
    xs = np.linspace(5.0, 30.0, 200)
    fit = decay.fit_decay(xs, np.exp(-1.3 * xs) / xs, (5.0, 30.0), "exp")
    checks["fit_round_trip"] = abs(fit.rate - 1.3) < 1e-10 and abs(fit.power - 1.0) < 1e-9
    return checks


def criterion_10():
    checks = property_suite()
    bad = [k for k, v in checks.items() if not v]
    return _verdict(not bad), ("all invariants hold" if not bad else f"failed: {bad}"), {"checks": checks}


CRITERIA = {
    1: ("polynomial regime", criterion_1),
    2: ("sub-exponential regime", criterion_2),
    3: ("exponential phase transition", criterion_3),
    4: ("slower than nu outside jump-paring", criterion_4),
    5: ("parameter-function suite", criterion_5),
    6: ("domination sandwich", criterion_6),
    7: ("smallev bound", criterion_7),
    8: ("MC vs spectral consistency", criterion_8),
    9: ("confining potential", criterion_9),
    10: ("determinism and invariants", criterion_10),
}

PRESETS = {
    "all": tuple(range(1, 11)),
    "polynomial": (1, 5, 6, 7, 8, 9, 10),
    "subexponential": (2, 5),
    "exponential": (3, 4, 5),
    "quick": (5, 6, 7, 10),
}


def run_criterion(number: int) -> CriterionResult:
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    verdict, detail, measured = fn()
    return CriterionResult(number, title, verdict, detail, measured, time.perf_counter() - t0)


def run_suite(numbers=None, preset: str = "all", echo=print):
    numbers = PRESETS[preset] if numbers is None else numbers
    out = []
    for n in numbers:
        r = run_criterion(n)
        if echo:
            echo(r.line())
        out.append(r)
    return out
