"""Periodic pseudo-spectral discretisation of H = psi(-i d/dx) + V in one dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .levy import LevyModel, psi


# ----------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class Well:
    """-a on the ball |b x| < 1."""

    a: float
    b: float = 1.0
    confining = False
    singular = False

    def __call__(self, x):
        return np.where(np.abs(self.b * np.asarray(x, float)) < 1.0, -self.a, 0.0)

    def cell_average(self, x, h):
        # exact average of the indicator over [x - h/2, x + h/2]
        R = 1.0 / self.b
        lo = np.maximum(np.asarray(x) - h / 2, -R)
        hi = np.minimum(np.asarray(x) + h / 2, R)
        return -self.a * np.clip(hi - lo, 0.0, None) / h

    @property
    def support_radius(self):
        return 1.0 / self.b


@dataclass(frozen=True)
class Coulomb:
    """-(a1 |x|^-b1  min  a2 |x|^-b2)."""

    a1: float
    a2: float
    beta1: float
    beta2: float
    confining = False
    singular = True

    def __call__(self, x):
        r = np.abs(np.asarray(x, float))
        with np.errstate(divide="ignore"):
            return -np.minimum(self.a1 * r ** (-self.beta1), self.a2 * r ** (-self.beta2))


@dataclass(frozen=True)
class Yukawa:
    a1: float
    a2: float
    beta1: float
    beta2: float
    b: float
    confining = False
    singular = True

    def __call__(self, x):
        r = np.abs(np.asarray(x, float))
        with np.errstate(divide="ignore", over="ignore"):
            return -np.minimum(self.a1 * r ** (-self.beta1), self.a2 * np.exp(-self.b * r) * r ** (-self.beta2))


@dataclass(frozen=True)
class PoschlTeller:
    a: float
    b: float = 1.0
    confining = False
    singular = False

    def __call__(self, x):
        # 1/cosh^2 written with exp(-2|bx|) so it cannot overflow
        e = np.exp(-2 * np.abs(self.b * np.asarray(x, float)))
        return -4 * self.a * e / (1 + e) ** 2


@dataclass(frozen=True)
class Morse:
    a: float
    b: float
    r0: float
    confining = False
    singular = False

    def __call__(self, x):
        r = np.abs(np.asarray(x, float))
        return self.a * ((1 - np.exp(-self.b * (r - self.r0))) ** 2 - 1)


@dataclass(frozen=True)
class ConfiningPower:
    """|x|^(2 beta)."""

    beta: float = 1.0
    confining = True
    singular = False

    def __call__(self, x):
        return np.abs(np.asarray(x, float)) ** (2 * self.beta)


@dataclass(frozen=True)
class TablePotential:
    x: tuple
    values: tuple
    confining: bool = False
    singular = False

    def __call__(self, x):
        return np.interp(np.abs(np.asarray(x, float)), self.x, self.values)


@dataclass(frozen=True)
class Zero:
    confining = False
    singular = False

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, float))


POTENTIALS = {
    "well": Well,
    "coulomb": Coulomb,
    "yukawa": Yukawa,
    "poschlteller": PoschlTeller,
    "morse": Morse,
    "confiningpower": ConfiningPower,
    "usertable": TablePotential,
    "zero": Zero,
}


def potential_from_dict(doc):
    doc = dict(doc)
    kind = doc.pop("kind").lower().replace("-", "").replace("_", "")
    if kind not in POTENTIALS:
        raise ValueError(f"unknown potential kind {kind!r}")
    if kind == "usertable":
        doc = {"x": tuple(doc["x"]), "values": tuple(doc["values"]), "confining": doc.get("confining", False)}
    return POTENTIALS[kind](**doc)


def potential_to_dict(V):
    name = {v: k for k, v in POTENTIALS.items()}[type(V)]
    out = {"kind": name}
    out.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in V.__dict__.items()})
    return out


# ----------------------------------------------------------------------------
# grid and operator


@dataclass(frozen=True)
class Grid1D:
    L: float
    N: int

    def __post_init__(self):
        if self.N % 2 or self.N < 4:
            raise ValueError("N must be even")

    @property
    def h(self):
        return 2 * self.L / self.N

    @property
    def x(self):
        return -self.L + self.h * np.arange(self.N)

    @property
    def xi(self):
        return 2 * math.pi * np.fft.fftfreq(self.N, d=self.h)

    @property
    def floor(self):
        """Smallest non-zero box frequency scale: psi at pi/L is the resolution floor."""
        return math.pi / self.L


@lru_cache(maxsize=16)
def grid_symbol(model: LevyModel, grid: Grid1D):
    out = np.asarray(psi(model, grid.xi), float)
    out.setflags(write=False)
    return out


def potential_on_grid(V, grid: Grid1D):
    """Samples V on the nodes; jump discontinuities of wells are cell-averaged and
    singular potentials are clipped at the grid scale (|x| < h -> V(h))."""
    if isinstance(V, np.ndarray):
        v = np.asarray(V, float)
    else:
        x = grid.x
        if hasattr(V, "cell_average"):
            v = V.cell_average(x, grid.h)
        else:
            xs = np.where(np.abs(x) < grid.h, grid.h, x) if getattr(V, "singular", False) else x
            v = np.asarray(V(xs), float)
    if v.shape != (grid.N,):
        raise ValueError("potential does not match the grid")
    if not np.all(np.isfinite(v)):
        raise ValueError("potential has non-finite values on the grid (unclipped singularity)")
    return v


def apply_H(model: LevyModel, V, grid: Grid1D, field):
    """F^-1[psi F phi] + V phi."""
    ps = grid_symbol(model, grid)
    v = potential_on_grid(V, grid) if not isinstance(V, np.ndarray) else V
    f = np.asarray(field)
    out = np.fft.ifft(ps * np.fft.fft(f))
    if np.isrealobj(f):
        out = out.real
    return out + v * f


def dense_hamiltonian(model: LevyModel, V, grid: Grid1D):
    """Dense matrix of the discrete operator (oracle for small N)."""
    if grid.N > 8192:
        raise ValueError("dense oracle limited to N <= 8192")
    ps = grid_symbol(model, grid)
    col = np.fft.ifft(ps).real
    idx = (np.arange(grid.N)[:, None] - np.arange(grid.N)[None, :]) % grid.N
    return col[idx] + np.diag(potential_on_grid(V, grid))


# ----------------------------------------------------------------------------
# eigenproblems


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray  # shape (k, N), each with sum(phi^2) h = 1
    residuals: np.ndarray
    grid: Grid1D
    discrete: bool = True
    flags: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    mu: dict = field(default_factory=dict)

    @property
    def lambda0(self):
        return float(self.eigenvalues[0])

    @property
    def phi0(self):
        return self.vectors[0]

    def to_dict(self):
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "residuals": [float(v) for v in self.residuals],
            "grid": {"L": self.grid.L, "N": self.grid.N},
            "discrete": self.discrete,
            "flags": list(self.flags),
            "mu": {str(k): float(v) for k, v in self.mu.items()},
            "meta": self.meta,
        }


def _norm(f, h):
    return math.sqrt(float(np.dot(f, f)) * h)


def split_step(ps, v, dt, f):
    """One symmetric imaginary-time splitting step e^{-dt V/2} F^-1 e^{-dt psi} F e^{-dt V/2}."""
    half = np.exp(-0.5 * dt * v)
    return half * np.fft.ifft(np.exp(-dt * ps) * np.fft.fft(half * f)).real


def imaginary_time(model, V, grid, dt=0.2, steps=400, f0=None, tol=1e-10):
    """Power iteration with the splitting propagator; returns (Rayleigh quotient, field)."""
    ps = grid_symbol(model, grid)
    v = potential_on_grid(V, grid)
    h = grid.h
    f = np.exp(-np.abs(grid.x)) if f0 is None else np.array(f0, float)
    f /= _norm(f, h)
    lam = np.inf
    for it in range(steps):
        f = split_step(ps, v, dt, f)
        f /= _norm(f, h)
        if it % 10 == 9:
            hf = apply_H(model, v, grid, f)
            new = float(np.dot(f, hf) * h)
            if abs(new - lam) < tol * max(1.0, abs(new)):
                lam = new
                break
            lam = new
    return lam, f


def _operator(model, v, grid):
    ps = grid_symbol(model, grid)

    def mv(f):
        f = np.ravel(f)
        return np.fft.ifft(ps * np.fft.fft(f)).real + v * f

    return LinearOperator((grid.N, grid.N), matvec=mv, dtype=float)


def _lowest_pairs(model, v, grid, k, v0, tol):
    op = _operator(model, v, grid)
    # a start vector that is already (nearly) an eigenvector gives a degenerate Krylov space
    v0 = np.asarray(v0, float)
    v0 = v0 + 1e-6 * np.linalg.norm(v0) / math.sqrt(v0.size) * np.random.default_rng(0).standard_normal(v0.size)
    ncv = min(grid.N - 1, max(2 * k + 1, 40))
    vals, vecs = eigsh(op, k=k, which="SA", v0=v0, tol=tol, ncv=ncv, maxiter=200000)
    order = np.argsort(vals)
    return vals[order], vecs[:, order].T


def ground_state(model: LevyModel, V, grid: Grid1D, tol: float = 1e-8, warm_steps: int = 200,
                 dt: float = 0.2) -> SpectrumResult:
    """Lowest eigenpair: splitting power iteration as warm start, Lanczos polish."""
    return excited_states(model, V, grid, k=1, tol=tol, warm_steps=warm_steps, dt=dt)


def excited_states(model: LevyModel, V, grid: Grid1D, k: int = 3, tol: float = 1e-8,
                   warm_steps: int = 200, dt: float = 0.2) -> SpectrumResult:
    if k < 1:
        raise ValueError("k must be >= 1")
    v = potential_on_grid(V, grid)
    h = grid.h
    lam_w, f0 = imaginary_time(model, v, grid, dt=dt, steps=warm_steps)
    vals, vecs = _lowest_pairs(model, v, grid, k, f0, tol=1e-14)
    vecs = vecs / np.sqrt(h)
    res = []
    for i in range(k):
        f = vecs[i]
        if f.sum() < 0:
            vecs[i] = f = -f
        r = apply_H(model, v, grid, f) - vals[i] * f
        res.append(_norm(r, h))
    res = np.array(res)
    # inverse-iteration polish if Lanczos stopped short of tol
    for i in range(k):
        if res[i] > tol:
            vals[i], vecs[i], res[i] = _polish(model, v, grid, vals[i], vecs[i])
    flags = []
    confining = getattr(V, "confining", False)
    floor = float(psi(model, grid.floor))
    discrete = confining or vals[0] < -floor
    n_disc = k if confining else int(np.sum(vals < -floor))
    if not discrete:
        flags.append("no discrete ground state detected at this resolution")
    elif n_disc < k:
        flags.append(f"only {n_disc} of {k} requested eigenvalues lie below the continuum floor")
    noise, r_res = roundoff_profile(vecs[0], grid)
    if discrete and noise > SIGN_TOL:
        flags.append("ground state not strictly positive on the grid")
    keep = k if (confining or not discrete) else max(n_disc, 1)
    if np.any(res[:keep] > tol):
        flags.append(f"residual above tolerance {tol:g}")
    return SpectrumResult(
        eigenvalues=vals[:keep],
        vectors=vecs[:keep],
        residuals=res[:keep],
        grid=grid,
        discrete=bool(discrete),
        flags=flags,
        meta={"warm_start_rayleigh": lam_w, "floor": floor, "requested": k, "tol": tol,
              "noise_level": noise, "resolved_radius": r_res},
    )


# a ground state has no sign changes; negative entries smaller than this
# (relative to the peak) are eigensolver round-off in the far tail
SIGN_TOL = 1e-9


def roundoff_profile(phi, grid: Grid1D):
    """(noise, radius): the largest negative excursion relative to the peak, and
    the smallest |x| at which phi falls below ten times that level.

    Values beyond the radius are indistinguishable from solver round-off and
    must not enter tail fits.  radius is inf when phi never gets that small.
    """
    phi = np.asarray(phi, float)
    top = float(np.max(np.abs(phi)))
    if phi.sum() < 0:
        phi = -phi
    noise = max(0.0, -float(phi.min())) / top
    floor = max(10 * noise, 1e-15)
    low = np.abs(grid.x)[phi / top < floor]
    return noise, float(low.min()) if low.size else math.inf


def _polish(model, v, grid, lam, f, iters=6):
    """A few steps of shifted inverse iteration solved by MINRES."""
    from scipy.sparse.linalg import minres

    h = grid.h
    op = _operator(model, v, grid)
    for _ in range(iters):
        shifted = LinearOperator(op.shape, matvec=lambda y: op.matvec(y) - (lam - 1e-9) * np.ravel(y), dtype=float)
        g, _info = minres(shifted, f, rtol=1e-12, maxiter=5000) if "rtol" in minres.__code__.co_varnames \
            else minres(shifted, f, tol=1e-12, maxiter=5000)
        f = g / _norm(g, h)
        if f.sum() < 0:
            f = -f
        hf = op.matvec(f)
        lam = float(np.dot(f, hf) * h)
        r = _norm(hf - lam * f, h)
    return lam, f, r


def dirichlet_mu(model: LevyModel, r: float, grid: Grid1D, dense: bool = False) -> float:
    """Principal eigenvalue of the free operator killed outside the open ball B(0, r)."""
    if r >= grid.L / 4:
        raise ValueError(f"r={r} too large for half-width L={grid.L} (need r < L/4)")
    inside = np.abs(grid.x) < r
    m = int(inside.sum())
    if m < 3:
        raise ValueError("ball contains too few grid nodes")
    ps = grid_symbol(model, grid)
    if dense:
        col = np.fft.ifft(ps).real
        idx = np.flatnonzero(inside)
        mat = col[(idx[:, None] - idx[None, :]) % grid.N]
        return float(np.linalg.eigvalsh(mat)[0])

    def mv(f):
        full = np.zeros(grid.N)
        full[inside] = np.ravel(f)
        return np.fft.ifft(ps * np.fft.fft(full)).real[inside]

    op = LinearOperator((m, m), matvec=mv, dtype=float)
    v0 = np.cos(0.5 * math.pi * grid.x[inside] / r)
    vals = eigsh(op, k=1, which="SA", v0=v0, tol=1e-13, ncv=min(m - 1, 40), maxiter=100000,
                 return_eigenvectors=False)
    return float(vals[0])


def killed_matrix(model: LevyModel, grid: Grid1D, inside):
    """Dense matrix of the free operator restricted to the nodes ``inside`` (killing outside)."""
    idx = np.flatnonzero(inside)
    if idx.size > 6000:
        raise ValueError("killed operator too large for the dense path; coarsen the grid")
    col = np.fft.ifft(grid_symbol(model, grid)).real
    return col[(idx[:, None] - idx[None, :]) % grid.N]


def killed_resolvent(model: LevyModel, grid: Grid1D, inside, rhs, eta: float = 0.0):
    """u = (eta + H0_D)^-1 rhs on the nodes of D; u(x) = int_D G^eta_D(x, y) rhs(y) dy."""
    mat = killed_matrix(model, grid, inside)
    mat[np.diag_indices_from(mat)] += eta
    return np.linalg.solve(mat, np.asarray(rhs, float))


def killed_survival(model: LevyModel, grid: Grid1D, inside, t_set):
    """P^x(tau_D > t) for every node of D and every t, by diagonalising the killed operator."""
    w, q = np.linalg.eigh(killed_matrix(model, grid, inside))
    proj = q.T @ np.ones(len(w))
    return {float(t): q @ (np.exp(-t * w) * proj) for t in t_set}


def smallev_check(model: LevyModel, V, r_set: Sequence[float], grid: Grid1D, lambda0: Optional[float] = None):
    """Upper bound for the bottom of the spectrum via the killed principal eigenvalue."""
    if lambda0 is None:
        lambda0 = ground_state(model, V, grid).lambda0
    v = potential_on_grid(V, grid)
    x = grid.x
    rows = []
    for r in r_set:
        ball = np.abs(x) <= 2 * r
        vp = np.maximum(v[ball], 0.0)
        vm = np.maximum(-v[ball], 0.0)
        mu = dirichlet_mu(model, r, grid)
        bound = float(vp.max() - vm.min() + mu)
        rows.append({"r": r, "mu": mu, "sup_Vplus": float(vp.max()), "inf_Vminus": float(vm.min()),
                     "bound": bound, "lambda0": lambda0, "margin": bound - lambda0,
                     "verdict": "pass" if lambda0 <= bound else "fail"})
    return rows


# ----------------------------------------------------------------------------
# Kato-class diagnostic


def occupation_kernel(model: LevyModel, t: float, grid: Grid1D):
    """k_t(z) = int_0^t p(s, z) ds on the grid, via the exact multiplier (1 - e^{-t psi}) / psi."""
    ps = np.asarray(psi(model, grid.xi), float)
    with np.errstate(divide="ignore", invalid="ignore"):
        mult = np.where(ps > 0, -np.expm1(-t * ps) / ps, t)
    k = np.fft.ifft(mult).real / grid.h
    return np.fft.fftshift(k)  # aligned with grid.x (x = 0 at index N/2)


def kato_diagnostic(model: LevyModel, V, t_set: Sequence[float], centers=None, pts_per_t: int = 512,
                    refine: int = 4):
    """sup_x int_0^t int_{B(x,t)} p(s, x-y) |V(y)| dy ds over t, at clip scale h and h/refine.

    The sup over x is taken over ``centers`` (default: the origin plus the maxima of |V|
    on a coarse grid).
    """
    if centers is None:
        xc = np.linspace(-20, 20, 4001)
        av = np.abs(np.asarray(V(np.where(xc == 0, 1e-9, xc)), float))
        centers = {0.0}
        top = np.argsort(av)[-4:]
        centers.update(float(abs(xc[i])) for i in top)
        centers = sorted(centers)
    curves = {}
    for level, npt in (("coarse", pts_per_t), ("fine", pts_per_t * refine)):
        vals = []
        for t in t_set:
            h = t / npt
            N = int(2 ** math.ceil(math.log2(16 * npt)))
            g = Grid1D(L=N * h / 2, N=N)
            ker = occupation_kernel(model, t, g)
            z = g.x
            win = np.abs(z) < t
            best = 0.0
            for c in centers:
                y = c - z[win]
                yy = np.where(np.abs(y) < h, h, y) if getattr(V, "singular", False) else y
                val = float(np.sum(ker[win] * np.abs(V(yy))) * h)
                best = max(best, val)
            vals.append(best)
        curves[level] = vals
    coarse, fine = np.array(curves["coarse"]), np.array(curves["fine"])
    clip_shift = float(np.max(np.abs(fine - coarse) / np.maximum(fine, 1e-300)))
    ts = np.asarray(t_set, float)
    order = np.argsort(ts)
    f_sorted = fine[order]
    slope = float(np.polyfit(np.log(ts[order]), np.log(f_sorted), 1)[0]) if np.all(f_sorted > 0) else float("nan")
    decreasing = bool(np.all(np.diff(f_sorted[::-1]) <= 1e-14 * f_sorted.max()))  # smaller t -> smaller value
    if clip_shift > 0.1:
        verdict = "inconclusive"
    elif decreasing and slope > 0.05:
        verdict = "pass"
    else:
        verdict = "fail"
    return {"t": list(map(float, t_set)), "curve": fine.tolist(), "coarse_curve": coarse.tolist(),
            "clip_sensitivity": clip_shift, "loglog_slope": slope, "verdict": verdict}
