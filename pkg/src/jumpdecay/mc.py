"""Monte Carlo for symmetric Levy processes: paths, hitting and exit times,
Feynman-Kac functionals, and the flattened-intensity comparison model.

Small jumps (|y| < epsilon) are replaced by a Brownian motion with the same
second moment; big jumps are compound Poisson with the normalised law of |J|
inverted from a log-survival table.  Paths are advanced on a fixed step dt
with the Gaussian part first and the step's jumps applied one at a time after
it, so landing positions of jumps are exact.

Every ensemble is split into blocks of ``cfg.block`` paths.  Block b of a
request draws from ``SeedSequence([seed, *tag, b])``, so estimates do not depend
on how blocks are spread over workers (env var JUMPDECAY_WORKERS).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .levy import (
    SPHERE_AREA,
    LevyModel,
    RadialLaw,
    _GL_W,
    _GL_X,
    fourier_density,
    interval_nu_integral,
    nu_ball_moment,
    psi,
)
from .params import ExitTimeSource
from .spectral import Grid1D, killed_resolvent

WORKERS_ENV = "JUMPDECAY_WORKERS"
SAMPLERS = ("compound-poisson-gaussian", "exact-stable")
MULTI_JUMP_GUARD = 0.1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PathConfig:
    epsilon: float = 0.1
    dt: float = 0.01
    horizon: float = 10.0
    n_paths: int = 10_000
    seed: int = 0
    sampler: str = "compound-poisson-gaussian"
    block: int = 4096

    def validate(self, model: LevyModel):
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.dt <= 0 or self.horizon <= 0:
            raise ConfigError("dt and horizon must be positive")
        if self.n_paths < 2 or self.block < 1:
            raise ConfigError("need at least two paths and a positive block size")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"sampler must be one of {SAMPLERS}")
        if self.sampler == "exact-stable":
            cf = model.closed_form
            if cf is None or cf.kind != "stable":
                raise ConfigError("the exact sampler needs a stable model with a closed-form symbol")
        elif model.intensity > 0:
            rate = RadialLaw(model, self.epsilon).rate
            if self.dt * rate > MULTI_JUMP_GUARD:
                raise ConfigError(
                    f"dt * big-jump rate = {self.dt * rate:.3g} > {MULTI_JUMP_GUARD}; "
                    f"use dt <= {MULTI_JUMP_GUARD / rate:.3g} or a larger epsilon")
        return self

    def with_(self, **kw):
        return PathConfig(**{**asdict(self), **kw})


@dataclass
class HittingEstimate:
    x: float
    r: float
    eta: float
    value: float
    ci_halfwidth: float
    hit_fraction: float
    censored_fraction: float
    horizon: float
    n_paths: int

    def to_dict(self):
        return asdict(self)


@dataclass
class ExitEstimate:
    r: float
    mean: float
    ci_halfwidth: float
    survival: dict
    censored_fraction: float
    n_paths: int


@dataclass
class FKEstimate:
    x: float
    t: float
    value: float
    ci_halfwidth: float
    n_paths: int


# ----------------------------------------------------------------------------
# exact stable laws


def symmetric_stable(rng, alpha: float, n: int):
    """Chambers-Mallows-Stuck draw with E exp(i xi X) = exp(-|xi|^alpha)."""
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, n)
    w = rng.exponential(1.0, n)
    if alpha == 1.0:
        return np.tan(v)
    return (np.sin(alpha * v) / np.cos(v) ** (1 / alpha)
            * (np.cos((1 - alpha) * v) / w) ** ((1 - alpha) / alpha))


def positive_stable(rng, beta: float, n: int):
    """Kanter's draw with E exp(-s A) = exp(-s^beta), 0 < beta < 1."""
    u = rng.uniform(0.0, math.pi, n)
    e = rng.exponential(1.0, n)
    return (np.sin(beta * u) / np.sin(u) ** (1 / beta)) * (np.sin((1 - beta) * u) / e) ** ((1 - beta) / beta)


def isotropic_stable(rng, alpha: float, d: int, n: int):
    """Rotation-invariant stable vector with psi = |xi|^alpha (d = 1 gives shape (n, 1))."""
    if d == 1:
        return symmetric_stable(rng, alpha, n)[:, None]
    # sub-Gaussian representation: sqrt(2A) G with A positive (alpha/2)-stable
    a = positive_stable(rng, alpha / 2, n)
    return np.sqrt(2 * a)[:, None] * rng.standard_normal((n, d))


# ----------------------------------------------------------------------------
# stepping engine


class _Engine:
    def __init__(self, model: LevyModel, cfg: PathConfig):
        cfg.validate(model)
        self.model, self.cfg, self.d = model, cfg, model.d
        self.exact = cfg.sampler == "exact-stable"
        if self.exact:
            self.alpha = model.closed_form.alpha
            self.sig2 = 2 * model.a
            self.law, self.rate = None, 0.0
        else:
            self.sig2 = 2 * model.a + (nu_ball_moment(model, cfg.epsilon) / model.d if model.intensity > 0 else 0.0)
            if model.intensity > 0:
                self.law = RadialLaw(model, cfg.epsilon)
                self.rate = self.law.rate
            else:
                self.law, self.rate = None, 0.0

    def step(self, rng, n, dt):
        """Gaussian part (n, d), jump counts (n,), jumps (sum counts, d) ordered by owner."""
        d = self.d
        gauss = rng.standard_normal((n, d)) * math.sqrt(self.sig2 * dt) if self.sig2 > 0 else np.zeros((n, d))
        if self.exact:
            gauss = gauss + dt ** (1 / self.alpha) * isotropic_stable(rng, self.alpha, d, n)
            return gauss, np.zeros(n, int), np.zeros((0, d))
        if self.rate == 0:
            return gauss, np.zeros(n, int), np.zeros((0, d))
        k = rng.poisson(self.rate * dt, n)
        tot = int(k.sum())
        jumps = self.law.sample(rng, tot).reshape(tot, d) if tot else np.zeros((0, d))
        return gauss, k, jumps

    def increments(self, rng, n, t):
        """X_t - X_0 for n independent paths, without intermediate steps."""
        d = self.d
        out = rng.standard_normal((n, d)) * math.sqrt(self.sig2 * t) if self.sig2 > 0 else np.zeros((n, d))
        if self.exact:
            return out + t ** (1 / self.alpha) * isotropic_stable(rng, self.alpha, d, n)
        if self.rate > 0:
            k = rng.poisson(self.rate * t, n)
            tot = int(k.sum())
            if tot:
                jumps = self.law.sample(rng, tot).reshape(tot, d)
                owner = np.repeat(np.arange(n), k)
                for j in range(d):
                    out[:, j] += np.bincount(owner, weights=jumps[:, j], minlength=n)
        return out


def _layers(k):
    """Yield (rows, offsets) so that layer m applies the m-th jump of every row with k > m."""
    start = np.cumsum(k) - k
    for m in range(int(k.max()) if k.size else 0):
        rows = np.flatnonzero(k > m)
        yield rows, start[rows] + m


def _norm(p):
    return np.abs(p[:, 0]) if p.shape[1] == 1 else np.linalg.norm(p, axis=1)


def _bridge_prob(a, b, sig2dt):
    """P(Brownian bridge between distances a, b > 0 from a flat boundary touches it)."""
    with np.errstate(over="ignore"):
        return np.exp(-2.0 * a * b / sig2dt)


def _workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map_blocks(fn, cfg: PathConfig, tag: Sequence[int]):
    """Run fn(rng, n) over the blocks of an ensemble; results in block order."""
    sizes = [cfg.block] * (cfg.n_paths // cfg.block)
    if cfg.n_paths % cfg.block:
        sizes.append(cfg.n_paths % cfg.block)
    jobs = [(np.random.default_rng(np.random.SeedSequence([cfg.seed, *tag, b])), n) for b, n in enumerate(sizes)]
    w = _workers()
    if w == 1 or len(jobs) == 1:
        return [fn(rng, n) for rng, n in jobs]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(lambda job: fn(*job), jobs))


def _key(*vals):
    """Stable integer tag for a request (floats are hashed through their bits)."""
    out = []
    for v in vals:
        out.append(int(np.float64(v).view(np.uint64) % (2**63)))
    return out


# ----------------------------------------------------------------------------
# paths


def sample_increments(model: LevyModel, cfg: PathConfig, t: float, n: Optional[int] = None):
    """n draws of X_t - X_0 (shape (n,) for d = 1, else (n, d))."""
    eng = _Engine(model, cfg)
    cfg2 = cfg.with_(n_paths=n or cfg.n_paths)
    parts = _map_blocks(lambda rng, m: eng.increments(rng, m, t), cfg2, [11, *_key(t)])
    out = np.concatenate(parts)
    return out[:, 0] if model.d == 1 else out


def sample_path(model: LevyModel, cfg: PathConfig, x0=0.0, horizon: Optional[float] = None):
    """One skeleton: step times and positions, plus the big-jump times and sizes."""
    eng = _Engine(model, cfg)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 12]))
    T = cfg.horizon if horizon is None else horizon
    steps = int(math.ceil(T / cfg.dt - 1e-9))
    pos = np.atleast_1d(np.asarray(x0, float)).reshape(1, model.d).copy()
    times, path, jt, js = [0.0], [pos[0].copy()], [], []
    for i in range(steps):
        gauss, k, jumps = eng.step(rng, 1, cfg.dt)
        pos += gauss
        if k[0]:
            u = np.sort(rng.random(k[0]))
            for m in range(k[0]):
                jt.append((i + u[m]) * cfg.dt)
                js.append(jumps[m].copy())
            pos += jumps.sum(axis=0)
        times.append((i + 1) * cfg.dt)
        path.append(pos[0].copy())
    path = np.array(path)
    return {
        "times": np.array(times),
        "positions": path[:, 0] if model.d == 1 else path,
        "jump_times": np.array(jt),
        "jumps": np.array(js).reshape(len(js), model.d),
    }


def _hit_block(eng, rng, n, x0, r, horizon):
    """First time the path is in the closed ball B(0, r); inf if not before the horizon."""
    dt = eng.cfg.dt
    pos = np.tile(x0, (n, 1))
    tau = np.full(n, np.inf)
    alive = np.arange(n)
    inside = _norm(pos) <= r
    tau[inside] = 0.0
    alive = alive[~inside]
    t = 0.0
    while alive.size and t < horizon - 1e-12:
        gauss, k, jumps = eng.step(rng, alive.size, dt)
        p0 = pos[alive]
        p = p0 + gauss
        r0, r1 = _norm(p0), _norm(p)
        hit = r1 <= r
        if eng.sig2 > 0:
            if eng.d == 1:
                hit |= np.sign(p0[:, 0]) != np.sign(p[:, 0])
            out = ~hit
            pr = _bridge_prob(r0[out] - r, r1[out] - r, eng.sig2 * dt)
            hit[np.flatnonzero(out)[rng.random(pr.size) < pr]] = True
        for rows, off in _layers(k):
            p[rows] += jumps[off]
            hit[rows] |= _norm(p[rows]) <= r
        t += dt
        tau[alive[hit]] = t
        pos[alive] = p
        alive = alive[~hit]
    return tau


def _exit_block(eng, rng, n, center, radius, horizon, occupy=None, start=None):
    """Exit time of the open ball B(center, radius), exit positions, optional occupation time."""
    dt = eng.cfg.dt
    d = eng.d
    c = np.asarray(center, float).reshape(1, d)
    pos = np.tile(c if start is None else np.asarray(start, float).reshape(1, d), (n, 1))
    tau = np.full(n, np.inf)
    xout = np.full((n, d), np.nan)
    occ = np.zeros(n)
    alive = np.arange(n)
    t = 0.0
    while alive.size and t < horizon - 1e-12:
        gauss, k, jumps = eng.step(rng, alive.size, dt)
        p0 = pos[alive]
        p = p0 + gauss
        q0, q1 = p0 - c, p - c
        gone = _norm(q1) >= radius
        where = p.copy()
        if eng.sig2 > 0:
            stay = ~gone
            if d == 1:
                a0, a1 = q0[stay, 0], q1[stay, 0]
                pr = np.minimum(1.0, _bridge_prob(radius - a0, radius - a1, eng.sig2 * dt)
                                + _bridge_prob(radius + a0, radius + a1, eng.sig2 * dt))
                side = np.where(a0 + a1 >= 0, 1.0, -1.0)
            else:
                pr = _bridge_prob(radius - _norm(q0[stay]), radius - _norm(q1[stay]), eng.sig2 * dt)
            cross = rng.random(pr.size) < pr
            rows = np.flatnonzero(stay)[cross]
            gone[rows] = True
            # a continuous exit leaves through the boundary
            if d == 1:
                where[rows, 0] = c[0, 0] + side[cross] * radius
            else:
                u = q1[rows] / np.maximum(_norm(q1[rows]), 1e-300)[:, None]
                where[rows] = c + radius * u
        for rows, off in _layers(k):
            live = rows[~gone[rows]]
            offl = off[~gone[rows]]
            p[live] += jumps[offl]
            now = _norm(p[live] - c) >= radius
            gone[live[now]] = True
            where[live[now]] = p[live[now]]
        if occupy is not None:
            y, delta = occupy
            near = (~gone) & (_norm(p - np.asarray(y, float).reshape(1, d)) < delta)
            occ[alive[near]] += dt
        t += dt
        tau[alive[gone]] = t
        xout[alive[gone]] = where[gone]
        pos[alive] = p
        alive = alive[~gone]
    return tau, xout, occ


def _ci(v):
    v = np.asarray(v, float)
    return float(v.mean()), float(1.96 * v.std(ddof=1) / math.sqrt(v.size))


def first_hitting(model: LevyModel, cfg: PathConfig, x0, r: float):
    """tau samples for the closed ball B(0, r) started at x0 (inf = censored at the horizon)."""
    eng = _Engine(model, cfg)
    x = np.atleast_1d(np.asarray(x0, float)).reshape(1, model.d)
    parts = _map_blocks(lambda rng, n: _hit_block(eng, rng, n, x, r, cfg.horizon), cfg,
                        [21, *_key(*x.ravel(), r, cfg.horizon)])
    tau = np.concatenate(parts)
    return {"tau": tau, "hit_fraction": float(np.isfinite(tau).mean()),
            "censored_fraction": float(np.isinf(tau).mean())}


def laplace_hitting(model: LevyModel, cfg: PathConfig, x_set, r: float, eta, max_doublings: int = 6):
    """E^x[exp(-eta tau)] for tau the hitting time of the closed ball B(0, r).

    All eta share one path ensemble per x.  Censored paths contribute
    exp(-eta * horizon), an upper estimate; the horizon doubles until that
    contribution is below 10% of the CI half-width for the smallest eta.
    Returns a list (per x) of lists (per eta) when eta is a sequence.
    """
    etas = np.atleast_1d(np.asarray(eta, float))
    if np.any(etas <= 0):
        raise ValueError("eta must be positive")
    out = []
    for x in x_set:
        horizon = cfg.horizon
        for _ in range(max_doublings + 1):
            res = first_hitting(model, cfg.with_(horizon=horizon), x, r)
            tau = res["tau"]
            cens = np.isinf(tau)
            rows = []
            for e in etas:
                vals = np.where(cens, math.exp(-e * horizon), np.exp(-e * np.where(cens, 0.0, tau)))
                m, hw = _ci(vals)
                rows.append(HittingEstimate(float(np.linalg.norm(np.atleast_1d(x))), r, float(e), m, hw,
                                            res["hit_fraction"], res["censored_fraction"], horizon, tau.size))
            e0 = etas.min()
            worst = rows[int(np.argmin(etas))]
            if cens.mean() * math.exp(-e0 * horizon) < 0.1 * max(worst.ci_halfwidth, 1e-300):
                break
            horizon *= 2
        out.append(rows if np.ndim(eta) else rows[0])
    return out


def exit_time_ball(model: LevyModel, cfg: PathConfig, r: float, t_set=(1.0,)):
    """E^0[tau_B(0,r)] and P^0(tau_B(0,r) > t); censored paths count as the horizon."""
    if r <= 0:
        raise ValueError("r must be positive")
    eng = _Engine(model, cfg)
    zero = np.zeros(model.d)
    parts = _map_blocks(lambda rng, n: _exit_block(eng, rng, n, zero, r, cfg.horizon)[0], cfg,
                        [31, *_key(r, cfg.horizon)])
    tau = np.concatenate(parts)
    cens = np.isinf(tau)
    m, hw = _ci(np.where(cens, cfg.horizon, tau))
    surv = {}
    for t in t_set:
        if t > cfg.horizon:
            raise ValueError("survival time beyond the horizon")
        surv[float(t)] = _ci((tau > t).astype(float))
    return ExitEstimate(r, m, hw, surv, float(cens.mean()), tau.size)


class MCExitTimes(ExitTimeSource):
    """Exit-time source backed by simulation; half-widths are 95% CIs."""

    name = "mc"

    def __init__(self, model, cfg: PathConfig):
        self.model, self.cfg = model, cfg
        self._cache = {}

    def _run(self, r, t=()):
        key = (float(r), tuple(float(s) for s in t))
        if key not in self._cache:
            horizon = max(self.cfg.horizon, 2 * max(t, default=0.0))
            self._cache[key] = exit_time_ball(self.model, self.cfg.with_(horizon=horizon), r, t or (min(1.0, horizon),))
        return self._cache[key]

    def mean(self, r):
        e = self._run(r)
        return e.mean, e.ci_halfwidth

    def survival(self, r, t):
        return self._run(r, (t,)).survival[float(t)]


def fk_expectation(model: LevyModel, cfg: PathConfig, V, x: float, t: float, phi_x, phi_vals):
    """E^x[exp(-int_0^t V(X_s) ds) phi(X_t)] with phi interpolated from a grid (0 off the grid).

    The time integral is the trapezoid rule on the step skeleton.  d = 1.
    """
    if model.d != 1:
        raise NotImplementedError("fk_expectation is implemented for d = 1")
    eng = _Engine(model, cfg)
    steps = max(1, int(round(t / cfg.dt)))
    dt = t / steps
    phi_x = np.asarray(phi_x, float)
    phi_vals = np.asarray(phi_vals, float)

    def block(rng, n):
        p = np.full(n, float(x))
        v_prev = np.asarray(V(p), float)
        acc = np.zeros(n)
        for _ in range(steps):
            gauss, k, jumps = eng.step(rng, n, dt)
            p = p + gauss[:, 0]
            if jumps.size:
                p += np.bincount(np.repeat(np.arange(n), k), weights=jumps[:, 0], minlength=n)
            v_now = np.asarray(V(p), float)
            acc += 0.5 * dt * (v_prev + v_now)
            v_prev = v_now
        return np.exp(-acc) * np.interp(p, phi_x, phi_vals, left=0.0, right=0.0)

    vals = np.concatenate(_map_blocks(block, cfg, [41, *_key(x, t)]))
    m, hw = _ci(vals)
    return FKEstimate(float(x), float(t), m, hw, vals.size)


# ----------------------------------------------------------------------------
# flattened intensity nu^s and the comparison of the two processes


class ModifiedModel:
    """nu^s: nu replaced on s/4 <= |y| <= s by its sup there (nu(s/4) for radial monotone nu).

    sigma = nu^s - nu is a finite non-negative measure on the annulus.  Only the
    pieces the comparison needs are provided: the radial intensity, sigma, its
    mass and sup, and the symbol psi + psi_sigma (d = 1 for the symbol).
    """

    def __init__(self, base: LevyModel, s: float):
        if s < 4:
            raise ValueError("the flattened model needs s >= 4")
        self.base, self.s, self.d, self.a = base, float(s), base.d, base.a
        self.lo, self.hi = s / 4.0, float(s)
        self.top = float(base.nu_radial(self.lo))
        area = SPHERE_AREA[base.d]
        d = base.d
        self.sigma_mass = area * integrate.quad(
            lambda u: (self.top - float(base.nu_radial(u))) * u ** (d - 1), self.lo, self.hi,
            epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        self.sigma_sup = self.top - float(base.nu_radial(self.hi))

    def sigma(self, r):
        r = np.abs(np.asarray(r, float))
        on = (r >= self.lo) & (r <= self.hi)
        return np.where(on, self.top - self.base.nu_radial(np.where(on, r, self.lo)), 0.0)

    def nu_radial(self, r):
        return self.base.nu_radial(r) + self.sigma(r)

    def psi_sigma(self, xi):
        """int (1 - cos(xi y)) sigma(y) dy in d = 1, Gauss-Legendre panels."""
        if self.d != 1:
            raise NotImplementedError("psi_sigma is implemented for d = 1")
        xi = np.abs(np.asarray(xi, float))
        kmax = float(xi.max()) if xi.size else 0.0
        panels = int(math.ceil((self.hi - self.lo) * kmax / math.pi)) + 8
        edges = np.linspace(self.lo, self.hi, panels + 1)
        half = 0.5 * np.diff(edges)
        nodes = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * _GL_X[None, :]
        w = (half[:, None] * _GL_W[None, :]).ravel()
        u = nodes.ravel()
        sw = w * self.sigma(u)
        flat = xi.ravel()
        out = np.empty(flat.size)
        for i in range(0, flat.size, 2048):
            ch = flat[i:i + 2048]
            out[i:i + 2048] = 2.0 * (np.cos(np.outer(ch, u)) @ sw)
        return (self.sigma_mass - out).reshape(xi.shape)

    def symbol(self, xi):
        return np.asarray(psi(self.base, xi), float) + self.psi_sigma(xi)

    def to_dict(self):
        return {"base": self.base.to_dict(), "s": self.s, "sigma_mass": self.sigma_mass, "sigma_sup": self.sigma_sup}


def modified_model(model: LevyModel, s: float) -> ModifiedModel:
    return ModifiedModel(model, s)


@dataclass
class DominationReport:
    s: float
    t: float
    sigma_mass: float
    sigma_sup: float
    lower_violation: float
    upper_violation: float
    worst_x: float
    tol: float
    verdict: str
    notes: list = field(default_factory=list)


def domination_check(model: LevyModel, s: float, t: float, grid: Optional[Grid1D] = None,
                     x_max: float = 40.0, tol: float = 1e-8, pad: int = 4):
    """exp(-|sigma| t) p1 <= p2 <= exp(-|sigma| t) p1 + t sup sigma on |x| <= x_max.

    p1 is the density of the original process, p2 that of the flattened one,
    both by Fourier inversion on the same grid.
    """
    if model.d != 1:
        raise NotImplementedError("the sandwich check is implemented for d = 1")
    grid = grid or Grid1D(64.0, 2**12)
    mod = ModifiedModel(model, s)
    p1 = fourier_density(model, t, grid.x, pad=pad)
    p2 = fourier_density(model, t, grid.x, pad=pad, symbol=mod.symbol)
    sel = np.abs(grid.x) <= x_max
    damp = math.exp(-mod.sigma_mass * t)
    low = damp * p1 - p2
    up = p2 - damp * p1 - t * mod.sigma_sup
    worst = np.maximum(low, up)[sel]
    i = int(np.argmax(worst))
    ok = low[sel].max() <= tol and up[sel].max() <= tol
    return DominationReport(float(s), float(t), mod.sigma_mass, mod.sigma_sup, float(low[sel].max()),
                            float(up[sel].max()), float(grid.x[sel][i]), tol, "pass" if ok else "fail")


def potential_kernel(symbol, eta: float, grid: Grid1D):
    """G^eta(x) = int_0^inf exp(-eta t) p(t, x) dt on the grid, via 1/(eta + psi) (d = 1, periodised)."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    xi = 2 * math.pi * np.fft.fftfreq(grid.N, d=grid.h)
    g = np.fft.ifft(1.0 / (eta + symbol(xi))).real / grid.h
    return np.fft.fftshift(g)  # aligned with grid.x


def potential_kernel_quadrature(symbol, eta: float, x: float):
    """Same kernel at one x != 0 as (1/pi) int_0^inf cos(xi x) / (eta + psi(xi)) dxi (QAWF)."""
    if x == 0:
        raise ValueError("the kernel may be singular at 0")
    f = lambda k: 1.0 / (eta + float(np.asarray(symbol(np.array([k])))[0]))  # noqa: E731
    val, _ = integrate.quad(f, 0.0, np.inf, weight="cos", wvar=abs(x), limlst=200)
    return val / math.pi


def potential_kernel_ordering(model: LevyModel, s: float, eta: Optional[float] = None, x_set=(1, 2, 4, 8, 16),
                              grid: Optional[Grid1D] = None):
    """G^eta_1(x) <= G^(eta - |sigma|)_2(x) at sampled x; default eta = 2|sigma|."""
    mod = ModifiedModel(model, s)
    eta = 2 * mod.sigma_mass if eta is None else eta
    if eta <= mod.sigma_mass:
        raise ValueError("need eta > |sigma|")
    grid = grid or Grid1D(256.0, 2**14)
    g1 = potential_kernel(lambda k: np.asarray(psi(model, k), float), eta, grid)
    g2 = potential_kernel(mod.symbol, eta - mod.sigma_mass, grid)
    xs = grid.x
    rows = []
    for x in x_set:
        i = int(np.argmin(np.abs(xs - x)))
        rows.append({"x": float(xs[i]), "G1": float(g1[i]), "G2": float(g2[i]), "holds": bool(g1[i] <= g2[i])})
    return {"eta": float(eta), "sigma_mass": mod.sigma_mass, "rows": rows,
            "verdict": "pass" if all(r["holds"] for r in rows) else "fail"}


# ----------------------------------------------------------------------------
# exit distribution from a ball, two ways


def ikeda_watanabe_probe(model: LevyModel, cfg: PathConfig, x0: float = 0.0, radius: float = 1.0,
                         target=(3.0, 4.0), eta: float = 1.0, nodes_per_radius: int = 200, box: float = 16.0):
    """E^x0[exp(-eta tau_D) 1_target(X_tau_D)] for D = B(x0, radius) by simulation and by
    the killed resolvent applied to y -> nu(target - y).  d = 1."""
    if model.d != 1:
        raise NotImplementedError("the probe is implemented for d = 1")
    lo, hi = target
    if not (hi > lo and (lo > x0 + radius or hi < x0 - radius)):
        raise ValueError("target must be an interval disjoint from the closed ball")
    eng = _Engine(model, cfg)

    def block(rng, n):
        tau, xout, _ = _exit_block(eng, rng, n, [x0], radius, cfg.horizon)
        hit = np.isfinite(tau) & (xout[:, 0] >= lo) & (xout[:, 0] <= hi)
        return np.where(hit, np.exp(-eta * np.where(np.isfinite(tau), tau, 0.0)), 0.0), np.isinf(tau)

    parts = _map_blocks(block, cfg, [51, *_key(x0, radius, lo, hi, eta)])
    vals = np.concatenate([p[0] for p in parts])
    cens = float(np.concatenate([p[1] for p in parts]).mean())
    m, hw = _ci(vals)

    L = box * radius + abs(x0)
    N = int(2 ** math.ceil(math.log2(2 * L * nodes_per_radius / radius)))
    g = Grid1D(L, N)
    inside = np.abs(g.x - x0) < radius
    ys = g.x[inside]
    rhs = np.array([interval_nu_integral(model, lo - y, hi - y) for y in ys])
    u = killed_resolvent(model, g, inside, rhs, eta)
    quad_val = float(u[int(np.argmin(np.abs(ys - x0)))])
    return {"mc": m, "mc_halfwidth": hw, "quadrature": quad_val, "censored_fraction": cens,
            "relative_gap": abs(m - quad_val) / quad_val if quad_val > 0 else math.inf}


def mc_green(model: LevyModel, cfg: PathConfig, radius: float, x: float, y: float, delta: float):
    """Occupation estimate of the Green function of B(0, radius): E^x[time in B(y, delta) before exit] / |B(y, delta)|."""
    if model.d != 1:
        raise NotImplementedError("mc_green is implemented for d = 1")
    if abs(x) >= radius:
        raise ValueError("x must lie in the ball")
    eng = _Engine(model, cfg)
    parts = _map_blocks(
        lambda rng, n: _exit_block(eng, rng, n, [0.0], radius, cfg.horizon, occupy=([y], delta), start=[x])[2],
        cfg, [61, *_key(radius, x, y, delta)])
    occ = np.concatenate(parts) / (2 * delta)
    return _ci(occ)
