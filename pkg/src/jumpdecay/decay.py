"""Decay verdicts for eigenfunctions and hitting estimates.

Everything here works on the positive half-line of a periodic grid (fields
are symmetric for the radial models in the catalog).  Ratios against nu are
formed as exp(log phi - log nu) since nu of the light-tailed profiles
underflows long before the windows used in practice.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .levy import Exponential, LevyModel, Polynomial, SubExponential, SuperExponential, UserTable
from .params import c6_estimate
from .spectral import Grid1D, roundoff_profile

COMPARABILITY_CAP = 25.0
R2_MIN = 0.98
POWER_BAND = 0.075  # relative, p in [1.85, 2.15] for a p = 2 tail
RATE_BAND = 0.15
BETA_BAND = 0.1
FAMILIES = ("power", "stretched-exp", "exp")


class WindowError(ValueError):
    pass


class FitError(ValueError):
    pass


# ----------------------------------------------------------------------------
# windows and ratios


def grid_from_nodes(x) -> Grid1D:
    """Recover the periodic grid from its node list (as written by the spectrum command)."""
    x = np.asarray(x, float)
    h = x[1] - x[0]
    g = Grid1D(float(-x[0]), len(x))
    if not np.allclose(g.x, x, rtol=0, atol=1e-9 * max(1.0, abs(x[0]))) or abs(g.h - h) > 1e-9 * h:
        raise WindowError("nodes are not those of a periodic grid x_k = -L + k h")
    return g


def window_nodes(grid: Grid1D, window, resolved_radius: float = math.inf, near_guard: bool = True):
    """Indices of the nodes x in [lo, hi] on the positive side, after the wrap and roundoff guards.

    near_guard=False drops the lower edge 0.1 L (periodic images only spoil the far end).
    """
    lo, hi = map(float, window)
    if not 0 < lo < hi:
        raise WindowError("window must satisfy 0 < lo < hi")
    L = grid.L
    if (near_guard and lo < 0.1 * L - 1e-12) or hi > 0.5 * L + 1e-12:
        raise WindowError(f"window [{lo:g}, {hi:g}] leaves [0.1 L, 0.5 L] = [{0.1 * L:g}, {0.5 * L:g}]")
    if hi > resolved_radius:
        raise WindowError(f"window reaches {hi:g} but the field is round-off beyond |x| = {resolved_radius:.4g}")
    x = grid.x
    idx = np.flatnonzero((x >= lo) & (x <= hi))
    if idx.size < 3:
        raise WindowError("fewer than three nodes in the window")
    return idx


def log_abs(phi):
    phi = np.asarray(phi, float)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(phi))


@dataclass
class RatioStats:
    min: float
    max: float
    median: float
    spread: float
    verdict: str
    cap: float
    used_abs: bool = False

    def to_dict(self):
        return asdict(self)


def ratio_values(x, phi, log_nu):
    """phi / nu at the nodes x, through logs."""
    return np.exp(log_abs(phi) - np.asarray(log_nu(np.asarray(x, float)), float))


def tail_ratio(phi, model: LevyModel, window, grid: Grid1D, cap: float = COMPARABILITY_CAP,
               check_roundoff: bool = True, log_nu=None) -> RatioStats:
    """min / max / median of phi / nu over the window and the two-sided verdict max / min <= cap."""
    phi = np.asarray(phi, float)
    r_res = roundoff_profile(phi, grid)[1] if check_roundoff else math.inf
    idx = window_nodes(grid, window, r_res)
    log_nu = log_nu or model.log_nu_radial
    vals = phi[idx]
    used_abs = bool(np.any(vals <= 0))
    if used_abs and np.any(vals == 0):
        raise FitError("phi vanishes in the window")
    r = ratio_values(grid.x[idx], vals, log_nu)
    lo, hi = float(r.min()), float(r.max())
    spread = hi / lo
    return RatioStats(lo, hi, float(np.median(r)), spread, "pass" if spread <= cap else "fail", cap, used_abs)


def ratio_growth(phi, model: LevyModel, window, grid: Grid1D, log_nu=None):
    """End-to-end factor and monotonicity of phi / nu across the window (log domain)."""
    phi = np.asarray(phi, float)
    idx = window_nodes(grid, window, roundoff_profile(phi, grid)[1])
    log_nu = log_nu or model.log_nu_radial
    lr = log_abs(phi[idx]) - np.asarray(log_nu(grid.x[idx]), float)
    steps = np.diff(lr)
    return {"log_factor": float(lr[-1] - lr[0]), "factor": float(math.exp(min(lr[-1] - lr[0], 700.0))),
            "monotone_increasing": bool(np.all(steps > 0)), "min_step": float(steps.min())}


# ----------------------------------------------------------------------------
# fits


@dataclass
class Fit:
    family: str
    rate: Optional[float]
    power: Optional[float]
    beta: Optional[float]
    log_amplitude: float
    r2: float
    n: int
    window: tuple
    fixed: dict = field(default_factory=dict)

    def log_model(self, x):
        x = np.asarray(x, float)
        out = np.full(x.shape, self.log_amplitude)
        if self.family == "power":
            return out - self.power * np.log(x)
        b = 1.0 if self.family == "exp" else self.beta
        out = out - self.rate * x**b
        if self.power:
            out = out - self.power * np.log(x)
        return out

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def _wls(cols, y, w):
    A = np.column_stack(cols)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    resid = y - A @ coef
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    ss_res = float(np.sum(w * resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return coef, ss_res, r2


def fit_decay(x, phi, window, family: str, beta: Optional[float] = None, delta: Optional[float] = None,
              weights: Optional[str] = None) -> Fit:
    """Least squares of log phi on the family's log-form over x in window.

    power:          A - p log x
    exp:            A - c x - delta log x
    stretched-exp:  A - c x^beta - delta log x   (beta free unless given)
    ``delta`` fixes the logarithmic term.  Weights are uniform in log x for the
    power family and uniform in x otherwise (``weights`` = "log" / "uniform"
    overrides).
    """
    if family not in FAMILIES:
        raise FitError(f"family must be one of {FAMILIES}")
    x = np.asarray(x, float)
    phi = np.asarray(phi, float)
    lo, hi = window
    sel = (x >= lo) & (x <= hi)
    xx, pp = x[sel], phi[sel]
    if xx.size < 3:
        raise FitError("fewer than three points in the window")
    if np.any(pp <= 0):
        raise FitError("phi must be positive on the window")
    y = np.log(pp)
    mode = weights or ("log" if family == "power" else "uniform")
    w = 1.0 / xx if mode == "log" else np.ones_like(xx)
    one, lx = np.ones_like(xx), np.log(xx)
    fixed = {}
    if family == "power":
        coef, _, r2 = _wls([one, -lx], y, w)
        return Fit("power", None, float(coef[1]), None, float(coef[0]), r2, xx.size, (lo, hi))

    def solve(b):
        cols = [one, -(xx**b)]
        yy = y
        if delta is None:
            cols.append(-lx)
        else:
            yy = y + delta * lx
        return _wls(cols, yy, w)

    if family == "exp":
        b = 1.0
    elif beta is not None:
        b = float(beta)
        fixed["beta"] = b
    else:
        res = minimize_scalar(lambda bb: solve(bb)[1], bounds=(0.05, 3.0), method="bounded",
                              options={"xatol": 1e-8})
        b = float(res.x)
    coef, _, r2 = solve(b)
    if delta is not None:
        fixed["delta"] = float(delta)
    p = float(delta) if delta is not None else float(coef[2])
    return Fit(family, float(coef[1]), p, None if family == "exp" else b, float(coef[0]), r2, xx.size, (lo, hi),
               fixed)


# ----------------------------------------------------------------------------
# regimes


def nu_tail_shape(model: LevyModel):
    """The family and parameters of log nu at infinity, as the fits see them."""
    prof, d = model.profile, model.d
    if isinstance(prof, Polynomial):
        return {"family": "power", "power": d + prof.delta}
    if isinstance(prof, SubExponential):
        return {"family": "stretched-exp", "rate": prof.c, "beta": prof.beta, "power": prof.delta}
    if isinstance(prof, Exponential):
        return {"family": "exp", "rate": prof.c, "power": prof.delta}
    if isinstance(prof, SuperExponential):
        return {"family": "super-exp", "rate": prof.c, "beta": prof.beta, "power": prof.delta}
    if isinstance(prof, UserTable):
        return {"family": "table"}
    raise TypeError("unknown profile")


def matches_nu(model: LevyModel, fit: Fit) -> Optional[bool]:
    shape = nu_tail_shape(model)
    fam = shape["family"]
    if fam == "power" and fit.family == "power":
        return abs(fit.power - shape["power"]) <= POWER_BAND * shape["power"]
    if fam == "exp" and fit.family == "exp":
        return abs(fit.rate - shape["rate"]) <= RATE_BAND * shape["rate"]
    if fam == "stretched-exp" and fit.family == "stretched-exp":
        return (abs(fit.rate - shape["rate"]) <= RATE_BAND * shape["rate"]
                and abs(fit.beta - shape["beta"]) <= BETA_BAND)
    return None


def classify_regime(model: LevyModel, lambda0: float, fit: Fit, eta0: Optional[float] = None,
                    sweep: Optional[Sequence[tuple]] = None, audit_verdict: Optional[str] = None,
                    ratio_log_growth: Optional[float] = None, confining_band: Optional[float] = None):
    """Label the decay mechanism.

    sweep: (lambda0, fitted rate) pairs from a depth sweep (>= 3 needed for the
    lambda-driven label).  ratio_log_growth: log of the end-to-end growth of
    phi / nu over the window.  confining_band: max/min of phi V / nu when V is
    confining.
    """
    out = {"regime": "inconclusive", "candidates": [], "notes": []}
    if fit.r2 < R2_MIN:
        out["notes"].append(f"fit r2 = {fit.r2:.4f} < {R2_MIN}; no regime assigned")
        return out
    cands = []
    if confining_band is not None:
        if confining_band <= COMPARABILITY_CAP:
            cands.append("confining-nu-over-V")
    else:
        m = matches_nu(model, fit)
        if m:
            cands.append("nu-driven")
            if eta0 is not None and isinstance(model.profile, Exponential):
                side = "below" if lambda0 < -eta0 else "above"
                out["notes"].append(f"lambda0 = {lambda0:.4g} lies {side} -eta0 = {-eta0:.4g}")
        if (audit_verdict == "fail" and ratio_log_growth is not None
                and ratio_log_growth >= math.log(5.0)):
            cands.append("slower-than-nu")
        light = isinstance(model.profile, (Exponential, SuperExponential))
        if light and fit.family == "exp" and fit.rate < (1 - RATE_BAND) * model.profile.c:
            if sweep is not None and len(sweep) >= 3:
                srt = sorted(sweep, key=lambda p: abs(p[0]))
                rates = [p[1] for p in srt]
                if all(b >= a for a, b in zip(rates, rates[1:])):
                    cands.append("lambda-driven")
                else:
                    out["notes"].append("rates not monotone in |lambda0| over the sweep")
            else:
                out["notes"].append("rate below c but no depth sweep: only 'not nu-driven' can be said")
                cands.append("not-nu-driven")
        if m is False and not cands:
            cands.append("not-nu-driven")
    out["candidates"] = cands
    if len(cands) == 1:
        out["regime"] = cands[0]
    return out


# ----------------------------------------------------------------------------
# lower bound


def potential_radius(V, delta: float, r_max: float = 1e4, n: int = 200_001) -> float:
    """Smallest r >= 1 with sup_{|y| >= r} |V(y)| <= delta / 2 (on a dense sample up to r_max)."""
    if getattr(V, "confining", False):
        raise ValueError("confining potentials do not decay")
    y = np.concatenate([np.linspace(0.0, 100.0, n), np.geomspace(100.0, r_max, 2000)[1:]])
    v = np.abs(np.asarray(V(y), float))
    if v[-1] > delta / 2:
        raise ValueError("|V| is not below delta/2 at the end of the sampled range")
    # suffix sup from the right
    tail = np.maximum.accumulate(v[::-1])[::-1]
    bad = np.flatnonzero(tail > delta / 2)
    r = float(y[bad[-1] + 1]) if bad.size else 0.0
    return max(1.0, r)


@dataclass
class LowerBound:
    K: float
    r: float
    C5: float
    C6: float
    survival: float
    mass: float
    verdict: str
    worst_margin: float
    window: tuple

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def lower_bound_constant(model: LevyModel, lam: float, delta: float, r: float, survival: float, mass: float,
                         C6: Optional[float] = None):
    c5 = model.c5
    c6 = c6_estimate(model) if C6 is None else C6
    if not math.isfinite(c6):
        return 0.0, c6
    e = abs(lam) + delta
    return (1 - math.exp(-e)) / (c5**2 * c6 ** (math.ceil(r) + 1) * e) * survival * mass, c6


def lower_bound_certificate(model: LevyModel, phi, grid: Grid1D, lam: float, delta: float, V, survival: float,
                            window=None, C6: Optional[float] = None) -> LowerBound:
    """K from the eigenfunction's mass on B(0, r) and the exit survival P^0(tau_B(0,1) > 1); verdict phi >= K nu.

    survival is a number (e.g. from an exit-time source); K is assembled with
    it as given.
    """
    phi = np.asarray(phi, float)
    if np.any(phi <= 0):
        raise FitError("the certificate needs a strictly positive eigenfunction")
    r = potential_radius(V, delta)
    x = grid.x
    mass = float(phi[np.abs(x) < r].sum() * grid.h)
    K, c6 = lower_bound_constant(model, lam, delta, r, survival, mass, C6)
    if window is None:
        window = (r + 2.0, min(40.0, 0.5 * grid.L))
    idx = window_nodes(grid, window, roundoff_profile(phi, grid)[1], near_guard=False)
    if K <= 0:
        return LowerBound(K, r, model.c5, c6, survival, mass, "inconclusive", math.nan, tuple(window))
    margin = log_abs(phi[idx]) - (math.log(K) + np.asarray(model.log_nu_radial(x[idx]), float))
    worst = float(margin.min())
    return LowerBound(K, r, model.c5, c6, survival, mass, "pass" if worst >= 0 else "fail", worst, tuple(window))


# ----------------------------------------------------------------------------
# hitting estimates against nu


def hitting_overlay(estimates, model: LevyModel, factor: float = 2.0):
    """C = max_x value(x) / nu(x); stable when all the per-x ratios lie within ``factor``."""
    rows = []
    for e in estimates:
        x = float(e.x)
        ratio = float(e.value) / float(model.nu_radial(x))
        rows.append({"x": x, "value": float(e.value), "ci_halfwidth": float(e.ci_halfwidth),
                     "nu": float(model.nu_radial(x)), "ratio": ratio})
    if not rows:
        raise ValueError("no estimates")
    ratios = [r["ratio"] for r in rows]
    C = max(ratios)
    if len(rows) == 1:
        stability, spread = "n/a", 1.0
    else:
        spread = C / min(ratios) if min(ratios) > 0 else math.inf
        stability = "stable" if spread <= factor else "unstable"
    trend = None
    if len(rows) >= 2:
        xs = np.log([r["x"] for r in rows])
        trend = float(np.polyfit(xs, np.log(np.maximum(ratios, 1e-300)), 1)[0])
    return {"C": C, "rows": rows, "spread": spread, "stability": stability, "factor": factor,
            "log_ratio_slope": trend}


# ----------------------------------------------------------------------------
# report


@dataclass
class DecayReport:
    window: tuple
    ratio_stats: dict
    fit: dict
    regime: dict
    lower_K: Optional[dict] = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {"window": list(self.window), "ratio_stats": self.ratio_stats, "fit": self.fit,
                "regime": self.regime, "lower_K": self.lower_K, "notes": list(self.notes)}


def default_family(model: LevyModel) -> str:
    fam = nu_tail_shape(model)["family"]
    return {"power": "power", "stretched-exp": "stretched-exp"}.get(fam, "exp" if fam != "table" else "power")


def decay_report(phi, model: LevyModel, grid: Grid1D, window, lambda0: float, family: Optional[str] = None,
                 cap: float = COMPARABILITY_CAP, **classify_kw) -> DecayReport:
    phi = np.asarray(phi, float)
    if phi.sum() < 0:
        phi = -phi
    notes = []
    stats = tail_ratio(phi, model, window, grid, cap=cap)
    family = family or default_family(model)
    idx = window_nodes(grid, window, roundoff_profile(phi, grid)[1])
    fit = fit_decay(grid.x[idx], phi[idx], window, family)
    growth = ratio_growth(phi, model, window, grid)
    classify_kw.setdefault("ratio_log_growth", growth["log_factor"])
    regime = classify_regime(model, lambda0, fit, **classify_kw)
    if stats.used_abs:
        notes.append("phi changes sign in the window; |phi| used")
    return DecayReport(tuple(window), stats.to_dict(), fit.to_dict(), regime, None, notes)


def overlay_rows(phi, model: LevyModel, grid: Grid1D, window, fit: Optional[Fit] = None, C: float = 1.0):
    """(x, phi, C nu, ratio, fit) on the window nodes."""
    idx = window_nodes(grid, window) if window else np.array([], int)
    x = grid.x[idx]
    phi = np.asarray(phi, float)[idx]
    lnu = np.asarray(model.log_nu_radial(x), float)
    rows = []
    for i in range(x.size):
        fv = float(math.exp(fit.log_model(x[i]))) if fit is not None else math.nan
        rows.append((float(x[i]), float(phi[i]), C * math.exp(lnu[i]), math.exp(math.log(abs(phi[i])) - lnu[i]), fv))
    return rows


def write_overlay_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "phi", "nu", "ratio", "fit"])
        for r in rows:
            w.writerow([repr(v) for v in r])
