"""Parameter functions K1, K2, K3 and the admissibility conditions built from them.

Everything here is a deterministic functional of a LevyModel.  Suprema over
unbounded sets are replaced by running sups on growing grids, and every such
estimate says whether it stabilised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .levy import (SPHERE_AREA, LevyModel, RadialLaw, _quad, _scalar_g, _scalar_log_g, _tail_mass_raw,
                   b2_constant, big_psi, nu_ball_moment, pruitt_comparability, tail_mass)
from .spectral import Grid1D, killed_matrix, killed_resolvent, killed_survival

STABLE_RTOL = 0.01  # running sup may move by this much per doubling and still count as settled


def ball_volume(d, r):
    return SPHERE_AREA[d] * r**d / d


def nu_at(model, r):
    """nu at radius r > 0 (radial value)."""
    return model.intensity * _scalar_g(model)(r)


@dataclass
class SupEstimate:
    """A supremum over an unbounded set, estimated on a growing grid."""

    value: float
    argmax: float
    stabilized: bool
    trace: list = field(default_factory=list)

    def __float__(self):
        return float(self.value)

    @property
    def verdict(self):
        return "ok" if self.stabilized else "inconclusive"


# ----------------------------------------------------------------------------
# double large jumps


def _logsub(f):
    """Integrand in v = log u for int f(u) du; zero once e^v overflows."""
    return lambda v: f(math.exp(v)) * math.exp(v) if v < 700 else 0.0


def _conv_ratio(model, x, s, use_profile=False):
    """int_{|x-y|>s, |y|>s} f(x-y) f(y) dy / f(x) for f = nu (or f = g), |x| = x >= s."""
    lg = _scalar_log_g(model)
    lc = 0.0 if use_profile else math.log(model.intensity)
    lx = lg(x)

    def pair(a, b):
        e = lg(a) + lg(b) + lc - lx
        if e > 700:
            raise _Diverged
        return math.exp(e) if e > -745 else 0.0

    try:
        return _conv_ratio_body(model, x, s, pair)
    except _Diverged:
        return math.inf


class _Diverged(ArithmeticError):
    pass


def _conv_ratio_body(model, x, s, pair):
    d = model.d
    if d == 1:
        # y < -s mirrors y > x + s; the middle piece is symmetric about x/2
        far = _quad(_logsub(lambda u: pair(u, x + u)), math.log(s), math.inf)
        mid = 0.0
        if x > 2 * s:
            mid = _quad(lambda v: pair(x - math.exp(v), math.exp(v)) * math.exp(v), math.log(s), math.log(x / 2))
        return 2 * far + 2 * mid
    if d == 3:
        # bipolar coordinates: dy = 2 pi rho w / x drho dw, w = |x - y| in [|x - rho|, x + rho]
        def inner(rho):
            lo = max(abs(x - rho), s)
            hi = x + rho
            if hi <= lo:
                return 0.0
            return _quad(lambda w: pair(rho, w) * w, lo, hi)

        tot = _quad(_logsub(lambda u: inner(u) * u), math.log(s), math.inf)
        return 2 * math.pi / x * tot

    def inner2(rho):
        def f(th):
            w = math.sqrt(max(x * x + rho * rho - 2 * x * rho * math.cos(th), 0.0))
            return pair(rho, w) if w > s else 0.0

        # w = s happens at one angle; pass it as a breakpoint
        c = (x * x + rho * rho - s * s) / (2 * x * rho)
        pts = [math.acos(c)] if -1 < c < 1 else None
        return 2 * _quad(f, 0.0, math.pi, points=pts)

    return _quad(_logsub(lambda u: inner2(u) * u), math.log(s), math.inf)


def _running_sup(fun, start, per_doubling=6, max_doublings=24, rtol=STABLE_RTOL, min_doublings=4):
    trace = []
    best, arg = -math.inf, start
    prev = None
    for k in range(max_doublings):
        for x in start * 2.0 ** (k + np.arange(per_doubling) / per_doubling):
            v = fun(float(x))
            if v > best:
                best, arg = v, float(x)
        trace.append((start * 2.0 ** (k + 1), best))
        if prev is not None and k >= min_doublings and abs(best - prev) <= rtol * abs(best):
            return SupEstimate(best, arg, True, trace)
        prev = best
    return SupEstimate(best, arg, False, trace)


@lru_cache(maxsize=512)
def k1(model: LevyModel, s: float) -> SupEstimate:
    """Rate of preference of single over double large jumps of size >= s."""
    if s < 1:
        raise ValueError("K1 is defined for s >= 1")
    return _running_sup(lambda x: _conv_ratio(model, x, s), s)


def k2(model: LevyModel, s1: float, s2: float, s3: float = math.inf) -> float:
    """Smallest C >= 1 with nu(x - y) <= C nu(x) for |y| <= s1, s2 <= |x| < s3."""
    if not (0 < s1 < s2 < s3):
        raise ValueError("need 0 < s1 < s2 < s3")
    lg = _scalar_log_g(model)
    if model.is_table:
        return _k2_grid(model, s1, s2, s3)
    # radial and non-increasing: the worst y points from x towards the origin
    def neg(r):
        return -(lg(r - s1) - lg(r))

    top = s3 if math.isfinite(s3) else s2 * 1e4
    rs = s2 + (top - s2) * np.concatenate([[0.0], np.geomspace(1e-9, 1.0, 400)])
    rs = rs[rs < s3]
    vals = np.array([-neg(float(r)) for r in rs])
    i = int(np.argmax(vals))
    best = vals[i]
    lo, hi = rs[max(i - 1, 0)], rs[min(i + 1, len(rs) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = max(best, -res.fun)
    return max(1.0, math.exp(best))


def _k2_grid(model, s1, s2, s3):
    """Brute 2-D search, for tabulated profiles whose monotonicity is only sampled."""
    lg = _scalar_log_g(model)
    top = s3 if math.isfinite(s3) else s2 * 1e3
    xs = s2 + (top - s2) * np.concatenate([[0.0], np.geomspace(1e-6, 1.0, 300)])
    xs = xs[xs < s3]
    ys = np.linspace(-s1, s1, 201)
    best = 0.0
    for x in xs:
        lx = lg(float(x))
        for y in ys:
            best = max(best, lg(float(abs(x - y))) - lx)
    return max(1.0, math.exp(best))


def c6_estimate(model: LevyModel, r_max: float = 1e3) -> float:
    """sup_{r >= 1} g(r) / g(r + 1) on a grid (inf when it keeps growing)."""
    lg = _scalar_log_g(model)
    rs = np.concatenate([np.linspace(1, 10, 91), np.geomspace(10, r_max, 60)])
    vals = np.array([lg(float(r)) - lg(float(r) + 1) for r in rs])
    if not np.all(np.isfinite(vals)):
        return math.inf
    if vals[-1] > vals[len(rs) // 2] + 1.0:
        return math.inf
    return float(math.exp(vals.max()))


# ----------------------------------------------------------------------------
# the smooth bump and C3


def _bump(u):
    """1 on [0, 1/2], 0 on [1, inf), C^2 quintic smoothstep between (u = |x|/s)."""
    t = min(max((u - 0.5) * 2.0, 0.0), 1.0)
    return 1.0 - t * t * t * (10 - 15 * t + 6 * t * t)


def _bump_dd(u):
    """Second derivative in u."""
    t = (u - 0.5) * 2.0
    if t <= 0 or t >= 1:
        return 0.0
    return -4.0 * (60 * t - 180 * t * t + 120 * t**3)


BUMP_SUP_DD = 4.0 * (60 * 0.21132486540518713 - 180 * 0.21132486540518713**2 + 120 * 0.21132486540518713**3)


def generator_on_bump(model: LevyModel, s: float, x: float, eps_frac: float = 1e-3) -> float:
    """L f_s(x) in the integro-differential form, d = 1."""
    g = _scalar_g(model)
    C = model.intensity

    def f(z):
        return _bump(abs(z) / s)

    fx = f(x)
    fdd = _bump_dd(abs(x) / s) / s**2
    eps = eps_frac * s
    out = model.a * fdd + fdd * nu_ball_moment(model, eps) / 2.0
    top = abs(x) + s
    brk = sorted({abs(x + sgn * k * s) for sgn in (-1, 1) for k in (0.5, 1.0)} | {abs(x)})
    brk = [b for b in brk if eps < b < top]
    edges = [eps] + brk + [top]
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            out += _quad(lambda y: (f(x + y) + f(x - y) - 2 * fx) * C * g(y), lo, hi)
    out -= fx * C * 2.0 * _tail_mass_raw(model, top) / SPHERE_AREA[1]
    return out


@lru_cache(maxsize=256)
def c3_bound(model: LevyModel, s: float, n: int = 241) -> float:
    """Upper estimate of C3(X, s) = inf_f ||L f_s||_inf using one fixed C^2 bump.

    d = 1 evaluates the generator on a grid in x; d > 1 uses the generic bound
    (2 v sup|f''|) H(s) which the bump satisfies.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if model.d != 1:
        from .levy import pruitt_H

        return max(2.0, BUMP_SUP_DD) * pruitt_H(model, s)
    xs = np.linspace(0.0, 1.6 * s, n)
    vals = np.array([abs(generator_on_bump(model, s, float(x))) for x in xs])
    i = int(np.argmax(vals))
    best = vals[i]
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    res = optimize.minimize_scalar(lambda x: -abs(generator_on_bump(model, s, x)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-6 * s})
    return float(max(best, -res.fun))


# ----------------------------------------------------------------------------
# exit times and K3


class ExitTimeSource:
    """Provides E^0[tau_B(0,r)] and P^0(tau_B(0,r) > t) as (value, halfwidth)."""

    name = "abstract"

    def mean(self, r):
        raise NotImplementedError

    def survival(self, r, t):
        raise NotImplementedError


class AnalyticExitBound(ExitTimeSource):
    """E^0[tau_r] <= C4 / Psi(1/r) with a user-supplied C4."""

    name = "analytic"

    def __init__(self, model, C4):
        self.model, self.C4 = model, float(C4)

    def mean(self, r):
        return self.C4 / big_psi(self.model, 1.0 / r), 0.0

    def survival(self, r, t):
        raise NotImplementedError("the analytic bound gives no survival probability; use a grid or MC source")


class GridExitTimes(ExitTimeSource):
    """Killed generator on a periodic grid (d = 1).

    The half-width reported is the larger change under halving the node count
    or doubling the box, a discretisation error estimate rather than a
    statistical one.
    """

    name = "grid"

    def __init__(self, model, nodes_per_radius: int = 400, box: float = 32.0):
        if model.d != 1:
            raise NotImplementedError("grid exit times are implemented for d = 1")
        self.model, self.n, self.box = model, nodes_per_radius, box

    def _center_values(self, r, fn):
        out = []
        for n, box in ((self.n, self.box), (self.n // 2, self.box), (self.n, 2 * self.box)):
            L = box * r
            g = Grid1D(L, int(2 ** math.ceil(math.log2(2 * L * n / r))))
            inside = np.abs(g.x) < r
            out.append(float(fn(g, inside)[np.argmin(np.abs(g.x[inside]))]))
        return out[0], max(abs(out[0] - out[1]), abs(out[0] - out[2]))

    @lru_cache(maxsize=64)
    def mean(self, r):
        return self._center_values(
            r, lambda g, inside: killed_resolvent(self.model, g, inside, np.ones(int(inside.sum()))))

    @lru_cache(maxsize=64)
    def survival(self, r, t):
        return self._center_values(r, lambda g, inside: killed_survival(self.model, g, inside, [t])[float(t)])


def k3_grid(model: LevyModel, s: float, nodes_per_radius: int = 300) -> float:
    """sup_{|x-y| >= s/8} G_B(0,s)(x, y) from the inverse killed operator (d = 1)."""
    if model.d != 1:
        raise NotImplementedError("k3_grid is implemented for d = 1")
    N = int(2 ** math.ceil(math.log2(64 * nodes_per_radius)))
    g = Grid1D(32.0 * s, N)
    inside = np.abs(g.x) < s
    G = np.linalg.inv(killed_matrix(model, g, inside)) / g.h
    x = g.x[inside]
    sep = np.abs(x[:, None] - x[None, :]) >= s / 8
    return float(G[sep].max())


def _doubling_constant(model, rs):
    return max(big_psi(model, 2 * r) / big_psi(model, r) for r in rs)


def k3_upper(model: LevyModel, s: float, constants: dict) -> float:
    """Three-term upper bound on K3(s) with Phi = Psi.

    ``constants`` needs C9, C10, C4 and may carry Theta (default 0), the doubling
    constant C of Psi and the Pruitt constants C1, C2 (all measured if absent).
    """
    missing = [k for k in ("C9", "C10", "C4") if k not in constants]
    if missing:
        raise ValueError("constants required: " + ", ".join(missing))
    if s < 1:
        raise ValueError("s must be >= 1")
    d = model.d
    theta = constants.get("Theta", 0.0)
    rs = np.geomspace(1e-2, 1e2, 9)
    C = constants.get("C") or _doubling_constant(model, rs)
    if "C1" in constants and "C2" in constants:
        C1, C2 = constants["C1"], constants["C2"]
    else:
        C1, C2 = pruitt_comparability(model, rs)
    P = big_psi(model, 1.0 / s)
    out = 8**d * math.e * C**3 * constants["C9"] / (P * s**d)
    if theta:
        out += math.e * constants["C9"] * theta / P**2
    out += 4 * C1 * C2 * constants["C4"] * constants["C10"] / (P * s**d)
    return float(out)


def green_bdd_diagnostic(model, s_set, k3: Callable):
    """K3(s) Psi(1/s) s^d over the sample and a bounded/growing verdict."""
    vals = [k3(s) * big_psi(model, 1.0 / s) * s**model.d for s in s_set]
    growth = vals[-1] / vals[0]
    mono_up = all(b > a for a, b in zip(vals, vals[1:]))
    verdict = "fail" if (mono_up and growth > 10) else ("pass" if max(vals) / min(vals) <= 10 else "inconclusive")
    return {"s": list(s_set), "values": vals, "verdict": verdict, "margin": 10 - max(vals) / min(vals)}


# ----------------------------------------------------------------------------
# h1, h2, eta0 and the sufficient condition cond1


@dataclass
class Assembled:
    value: float
    low: float
    high: float
    terms: dict

    def __float__(self):
        return float(self.value)


def _sup_nu_outside(model, r):
    return nu_at(model, r)  # non-increasing radial nu


def c13(model, s1, exit: ExitTimeSource, k3: Callable, side=0):
    m, hw = exit.mean(2 * s1)
    tau = m + side * hw
    return k3(s1) + tau / ball_volume(model.d, s1 / 4) * k2(model, s1 / 4, s1 / 2, s1) ** 2, tau


def h1(model: LevyModel, s1: float, s2: float, exit: ExitTimeSource, k3: Callable) -> Assembled:
    if s1 < 1 or s2 < 2 * s1:
        raise ValueError("need s1 >= 1 and s2 >= 2 s1")
    vals, terms = [], {}
    for side in (0, -1, 1):
        C13, tau = c13(model, s1, exit, k3, side)
        c3s = c3_bound(model, s1 / 16)
        K2 = k2(model, s1, s2)
        vals.append(K2 * (c3s * (C13 * ball_volume(model.d, s1) + tau) + 1.0))
        if side == 0:
            terms = {"K2(s1,s2,inf)": K2, "C3(s1/16)": c3s, "C13(s1)": C13, "E0[tau_B(0,2s1)]": tau,
                     "K3(s1)": k3(s1)}
    return Assembled(vals[0], min(vals), max(vals), terms)


def h2(model: LevyModel, s1: float, exit: ExitTimeSource, k3: Callable) -> Assembled:
    if s1 < 1:
        raise ValueError("need s1 >= 1")
    vals, terms = [], {}
    for side in (0, -1, 1):
        C13, tau = c13(model, s1, exit, k3, side)
        a, b = c3_bound(model, s1 / 16), c3_bound(model, s1)
        v = a * (b * C13 + tau * _sup_nu_outside(model, s1 / 4)) + _sup_nu_outside(model, s1 / 16)
        vals.append(v)
        if side == 0:
            terms = {"C3(s1/16)": a, "C3(s1)": b, "C13(s1)": C13, "E0[tau_B(0,2s1)]": tau}
    return Assembled(vals[0], min(vals), max(vals), terms)


def eta0(model: LevyModel, exit: ExitTimeSource, k3: Callable) -> Assembled:
    """Low-lying threshold: 2 C5^4 h1(1,2) K1(2) + h2(1) |B(0,2)| K2(2,3,inf)."""
    c5 = model.c5
    H1, H2 = h1(model, 1, 2, exit, k3), h2(model, 1, exit, k3)
    K1 = k1(model, 2.0)
    K2 = k2(model, 2, 3)
    B = ball_volume(model.d, 2)
    f = lambda a, b: 2 * c5**4 * a * K1.value + b * B * K2  # noqa: E731
    return Assembled(f(H1.value, H2.value), f(H1.low, H2.low), f(H1.high, H2.high),
                     {"h1(1,2)": H1.value, "h2(1)": H2.value, "K1(2)": K1.value, "K1_stabilized": K1.stabilized,
                      "K2(2,3,inf)": K2, "C5": c5})


def cond1_check(model: LevyModel, r1, r2, r3, eta, exit: ExitTimeSource, k3: Callable, r: float = 1.0):
    """Evaluate the sufficient condition cond1 (LHS < eta) at (r1, r2, r3, eta)."""
    if not (r1 >= 1 and r2 >= 2 * r1 and r3 > r2):
        raise ValueError("need r1 >= 1, r2 >= 2 r1, r3 > r2")
    out = {"r1": r1, "r2": r2, "r3": r3, "eta": eta}
    if eta <= 0:
        out.update(verdict="fail", margin=float(eta), lhs=None)
        return out
    H1, H2 = h1(model, r1, r2, exit, k3), h2(model, r1, exit, k3)
    K1 = k1(model, float(r2))
    K2 = k2(model, r2, r3)
    B = ball_volume(model.d, r2)
    c5 = model.c5

    def lhs(a, b):
        return 2 * c5**4 * a * K1.value + b * B * K2

    val, lo, hi = lhs(H1.value, H2.value), lhs(H1.low, H2.low), lhs(H1.high, H2.high)
    if not K1.stabilized:
        verdict = "inconclusive"
    elif hi < eta:
        verdict = "pass"
    elif lo >= eta:
        verdict = "fail"
    else:
        verdict = "inconclusive"
    out.update(lhs=val, lhs_low=lo, lhs_high=hi, margin=eta - val, verdict=verdict,
               terms={"h1": H1.value, "h2": H2.value, "K1(r2)": K1.value, "K2(r2,r3,inf)": K2})
    if verdict == "pass":
        out["C14"] = c14(model, r1, r2, r3, eta, H1.value, H2.value, K1.value, K2, r)
    return out


def c14(model, r1, r2, r3, eta, h1v, h2v, K1, K2, r=1.0):
    R = max(r + r1, r3)
    C6 = c6_estimate(model)
    C8 = b2_constant(model)[0] if model.d == 1 else math.nan
    den = eta - h1v * K1 - h2v * ball_volume(model.d, r2) * K2
    if den <= 0 or not math.isfinite(C6):
        return {"value": math.inf, "log_value": math.inf, "R": R, "C6": C6, "C8": C8}
    # C6^R overflows for large radii; keep the log
    log_val = (2 * math.log(model.c5) + math.ceil(R) * math.log(C6) + math.log1p(C8)
               + math.log(h1v + h2v / nu_at(model, r2)) + math.log(ball_volume(model.d, R)) - math.log(den))
    return {"value": math.exp(log_val) if log_val < 709 else math.inf, "log_value": log_val, "R": R, "C6": C6,
            "C8": C8}


# ----------------------------------------------------------------------------
# jump-paring and smallness


def jump_paring_audit(model: LevyModel, x_grid: Optional[Sequence[float]] = None):
    """Estimate C7 = sup_x int g(|x-y|) g(|y|) dy / g(|x|) and decide whether it is finite.

    The grid should double from point to point.  The running maximum must
    either settle (pass) or keep growing by non-shrinking increments (fail).
    """
    if x_grid is None:
        x_grid = [2.0**k for k in range(0, 11)]
    x_grid = [float(x) for x in x_grid]
    if min(x_grid) < 1:
        raise ValueError("x_grid must lie in |x| >= 1")
    vals = [_conv_ratio(model, x, 1.0, use_profile=True) for x in x_grid]
    run = np.maximum.accumulate(vals)
    with np.errstate(invalid="ignore"):
        inc = np.diff(run)
    out = {"x": x_grid, "ratio": vals, "C7": float(run[-1])}
    if not math.isfinite(run[-1]):
        # the ratio itself overflows double precision along the grid
        out.update(verdict="fail", C7_extrapolated=math.inf)
        return out
    if inc[-1] <= STABLE_RTOL * run[-1]:
        out.update(verdict="pass", C7_extrapolated=float(run[-1]))
        return out
    q = inc[-2:] / np.maximum(inc[-3:-1], 1e-300)
    if np.all(q < 0.9):
        qq = float(q[-1])
        out.update(verdict="pass", C7_extrapolated=float(run[-1] + inc[-1] * qq / (1 - qq)))
    elif np.all(q >= 0.95):
        out.update(verdict="fail", C7_extrapolated=math.inf)
    else:
        out.update(verdict="inconclusive", C7_extrapolated=math.nan)
    out["increment_ratios"] = q.tolist()
    return out


def smallness_checks(model: LevyModel, kappa1: float = 4.0, s_set=(2, 4, 8, 16), s1_set=(1, 2, 4, 8),
                     s_far=(16, 32, 64, 128), kappa2: Optional[float] = None):
    """Sampled-range verdicts for the two asymptotic smallness conditions."""
    if kappa1 < 2:
        raise ValueError("kappa1 must be >= 2")
    prod = [k1(model, kappa1 * s).value * k2(model, s, kappa1 * s) for s in s_set]
    diffs = np.diff(prod)
    if np.all(diffs < 0):
        kill = "pass"
    elif np.all(diffs > 0):
        kill = "fail"
    else:
        kill = "inconclusive"
    seqs = {s1: [k2(model, s1, s) for s in s_far if s > s1] for s1 in s1_set}
    lims = [seqs[s1][-1] for s1 in s1_set]
    growth = lims[-1] / lims[0]
    if kappa2 is not None:
        unif = "pass" if max(lims) <= kappa2 else "fail"
    elif growth > 10:
        unif = "fail"
    elif growth < 2 and all(seq[-1] <= seq[0] * (1 + STABLE_RTOL) for seq in seqs.values()):
        unif = "pass"
    else:
        unif = "inconclusive"
    return {
        "intr_killing": {"kappa1": kappa1, "s": list(s_set), "product": prod, "verdict": kill,
                         "margin": float(prod[0] - prod[-1])},
        "unif_bdd": {"s1": list(s1_set), "s": list(s_far), "sequences": {str(k): v for k, v in seqs.items()},
                     "limsup_estimates": lims, "kappa2": max(lims), "verdict": unif, "margin": float(2 - growth)},
    }


def nu_doubling_constant(model: LevyModel, r_max: float = 1e3):
    """C15 with nu(x - y) <= C15 nu(x) for |y| <= |x|/2, |x| >= 1 (sampled)."""
    lg = _scalar_log_g(model)
    rs = np.geomspace(1.0, r_max, 200)
    return float(math.exp(max(lg(r / 2) - lg(r) for r in rs)))


# ----------------------------------------------------------------------------
# subexponentiality of the big-jump law


def _log_q(law, u):
    """log P(J > u) for the symmetric law with |J| >= eps (d = 1)."""
    u = np.asarray(u, float)
    pos = np.log(0.5) + law.log_survival(np.maximum(np.abs(u), law.eps))
    neg = np.log1p(-0.5 * np.exp(law.log_survival(np.maximum(np.abs(u), law.eps))))
    return np.where(u >= 0, pos, neg)


# log-log slope of |ratio - 2| past which the ratio counts as heading to 2
PROBE_DECAY_SLOPE = -0.25


def subexponentiality_probe(model: LevyModel, r_set=(5, 10, 20, 50), n_samples: int = 200_000, seed: int = 0):
    """P(|J1 + J2| > r) / P(|J1| > r) for J1, J2 iid from nu restricted to |y| >= 1, normalised.

    Conditional on J2 the probability is explicit, so only J2 is sampled, from a
    mixture of its own law, a uniform law on [1, r + 1] (both signs) covering the
    region where comparable jumps meet, and its own law conditioned beyond r + 1.
    The last piece matters for light tails, where |J2| > r + 1 is rare but carries
    a fixed share of the ratio.  Everything is in log space.
    """
    if model.d != 1:
        raise NotImplementedError("the probe is implemented for d = 1")
    law = RadialLaw(model, 1.0)
    lg = _scalar_log_g(model)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
    out = []
    for r in r_set:
        n = n_samples
        # three proposals: own law, uniform on [1, r + 1], own law beyond r + 1
        comp = rng.integers(0, 3, n)
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        rad = np.where(comp == 0, law.sample_radius(rng, n), 1.0 + r * rng.random(n))
        rad = np.where(comp == 2, law.sample_radius(rng, n, above=r + 1.0), rad)
        j = sign * rad
        aj = np.abs(j)
        log_p = np.log(0.5) + np.array([lg(float(v)) for v in aj]) - law.log_total
        log_u = np.where(aj <= r + 1, -math.log(2 * r), -np.inf)
        log_c = np.where(aj > r + 1, log_p - float(law.log_survival(r + 1.0)), -np.inf)
        log_qmix = np.logaddexp.reduce([log_p, log_u, log_c], axis=0) - math.log(3.0)
        log_term = log_p - log_qmix + np.logaddexp(_log_q(law, r - j), _log_q(law, r + j))
        M = log_term.max()
        v = np.exp(log_term - M)
        mean, sd = v.mean(), v.std(ddof=1)
        lS = float(law.log_survival(r))
        ratio = mean * math.exp(M - lS)
        hw = 1.96 * sd / math.sqrt(n) * math.exp(M - lS)
        out.append({"r": float(r), "ratio": float(ratio), "ci_halfwidth": float(hw)})
    ratios = [o["ratio"] for o in out]
    last = out[-1]
    # convergence to 2 is algebraic in r for the heavy classes (r^(beta-1), r^-delta ...),
    # while a light tail levels off at a constant above 2
    dist = [abs(a - 2.0) for a in ratios]
    slope = None
    if len(out) >= 2 and dist[-1] > 0 and dist[-2] > 0:
        slope = math.log(dist[-1] / dist[-2]) / math.log(out[-1]["r"] / out[-2]["r"])
    if not all(math.isfinite(a) for a in ratios) or (
        len(ratios) >= 3 and all(b > 1.2 * a for a, b in zip(ratios[-3:], ratios[-2:]))
    ):
        cls = "divergent"
    elif dist[-1] <= max(3 * last["ci_halfwidth"], 0.02) or (slope is not None and slope <= PROBE_DECAY_SLOPE):
        cls = "subexponential"
    elif last["ratio"] > 2:
        cls = "bounded-above-2"
    else:
        cls = "inconclusive"
    return {"curve": out, "classification": cls, "approach_slope": slope}


def subexponential_ratio_quadrature(model: LevyModel, r: float) -> float:
    """Deterministic value of the probe's ratio (moderate r, d = 1)."""
    if model.d != 1:
        raise NotImplementedError
    total = _tail_mass_raw(model, 1.0)

    def S(u):
        return 1.0 if u <= 1 else _tail_mass_raw(model, u) / total

    def Q(u):
        return 0.5 * S(u) if u >= 0 else 1 - 0.5 * S(-u)

    g = _scalar_g(model)
    dens = lambda j: 2 * g(j) / total  # noqa: E731  density of |J|, both signs together
    f = lambda j: dens(j) * (Q(r - j) + Q(r + j))  # noqa: E731
    edges = [1.0, max(1.0, r - 1), r, r + 1, 2 * r + 2]
    val = sum(_quad(f, a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a)
    val += _quad(_logsub(f), math.log(2 * r + 2), math.inf)
    return val / S(r)


# ----------------------------------------------------------------------------
# report


@dataclass
class ConditionReport:
    k1_samples: list
    k2_samples: list
    k3_upper: list
    jump_paring_constant: dict
    h1_h2: dict
    eta0: dict
    verdicts: dict
    kappa: tuple

    def to_dict(self):
        return {
            "k1_samples": self.k1_samples,
            "k2_samples": self.k2_samples,
            "k3_upper": self.k3_upper,
            "jump_paring_constant": self.jump_paring_constant,
            "h1_h2": self.h1_h2,
            "eta0": self.eta0,
            "verdicts": self.verdicts,
            "kappa": list(self.kappa),
        }


def condition_report(model: LevyModel, exit: Optional[ExitTimeSource] = None, k3: Optional[Callable] = None,
                     constants: Optional[dict] = None, s_k1=(1, 2, 4, 8), kappa1=4.0,
                     lattice=((8, 16, 32), 1.0)) -> ConditionReport:
    """Evaluate every parameter function and condition on the default sample sets."""
    if exit is None:
        exit = GridExitTimes(model)
    if k3 is None:
        k3 = (lambda s: k3_upper(model, s, constants)) if constants else (lambda s: k3_grid(model, s))
    k1s = []
    for s in s_k1:
        e = k1(model, float(s))
        k1s.append({"s": s, "value": e.value, "stabilized": e.stabilized,
                    "tail_bound": tail_mass(model, s) / (2 * model.c5**4)})
    k2s = [{"s": (s, 2 * s + 2, "inf"), "value": k2(model, s, 2 * s + 2)} for s in (1, 2, 4, 8)]
    k3s = []
    if constants:
        k3s = [{"s": s, "bound": k3_upper(model, s, constants)} for s in (1, 2, 4, 8, 16)]
    audit = jump_paring_audit(model)
    small = smallness_checks(model, kappa1=kappa1)
    H1, H2 = h1(model, 1, 2, exit, k3), h2(model, 1, exit, k3)
    e0 = eta0(model, exit, k3)
    mono = all(b["value"] <= a["value"] * (1 + STABLE_RTOL) for a, b in zip(k1s, k1s[1:]))
    tail_ok = all(row["value"] >= row["tail_bound"] for row in k1s)
    verdicts = {
        "jump_paring": {"verdict": audit["verdict"], "margin": audit["C7"]},
        "K1_monotone": {"verdict": "pass" if mono else "fail",
                        "margin": min(a["value"] - b["value"] for a, b in zip(k1s, k1s[1:]))},
        "tail_domination": {"verdict": "pass" if tail_ok else "fail",
                            "margin": min(r["value"] - r["tail_bound"] for r in k1s)},
        "intr_killing": {k: small["intr_killing"][k] for k in ("verdict", "margin")},
        "unif_bdd": {k: small["unif_bdd"][k] for k in ("verdict", "margin")},
    }
    rs, eta = lattice
    rows = [cond1_check(model, r1, 2 * r1, 4 * r1, eta, exit, k3) for r1 in rs]
    passing = [row for row in rows if row["verdict"] == "pass"]
    verdicts["cond1"] = {"verdict": "pass" if passing else ("inconclusive" if any(
        row["verdict"] == "inconclusive" for row in rows) else "fail"),
        "margin": max(row["margin"] for row in rows), "rows": rows}
    if constants and model.d >= 1:
        gb = green_bdd_diagnostic(model, (1, 2, 4, 8, 16), k3)
        verdicts["Green_bdd"] = {"verdict": gb["verdict"], "margin": gb["margin"]}
    return ConditionReport(
        k1_samples=k1s, k2_samples=k2s, k3_upper=k3s,
        jump_paring_constant=audit,
        h1_h2={"h1(1,2)": {"value": H1.value, "terms": H1.terms}, "h2(1)": {"value": H2.value, "terms": H2.terms}},
        eta0={"value": e0.value, "interval": [e0.low, e0.high], "terms": e0.terms},
        verdicts=verdicts, kappa=(kappa1, small["unif_bdd"]["kappa2"]),
    )
