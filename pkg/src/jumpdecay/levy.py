"""Radial Lévy models.

A model is a symmetric triplet ``(a*Id, nu)`` with ``nu(x) = scale * g(|x|)``.
The profile ``g`` equals ``r**(-d-gamma)`` on ``(0, 1]`` and a family-specific
formula beyond ``r = 1``, glued continuously at ``r = 1`` by a constant on the
large-r branch.  Unless ``scale`` is given explicitly it defaults to the
reciprocal of that constant, so that ``nu`` coincides with the plain large-r
formula for ``|x| >= 1``.

Everything here is vectorised over radii/frequencies where practical and uses
QUADPACK (``scipy.integrate.quad``) for the heavy-tailed integrals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-10
QUAD_LIMIT = 4000


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature does not reach its tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class DensityError(ValueError):
    pass


def _quad(f, lo, hi, **kw):
    """Thin wrapper around scipy's quad that turns silent warnings into errors."""
    kw.setdefault("epsabs", QUAD_ABS_TOL)
    kw.setdefault("epsrel", QUAD_REL_TOL)
    kw.setdefault("limit", QUAD_LIMIT)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, **kw)[:2]
    loose = 1e-6 * (1.0 + abs(val))
    if not np.isfinite(val) or err > loose:
        raise QuadratureError(
            f"quadrature on [{lo}, {hi}] reached only {err:.3g} (value {val:.6g})", achieved=err
        )
    return val


# ----------------------------------------------------------------------------
# profile families


@dataclass(frozen=True)
class Polynomial:
    gamma: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not self.delta > 0:
            raise ValueError("Polynomial tail exponent delta must be > 0")

    def log_large(self, r, d):
        return -(d + self.delta) * np.log(r)


@dataclass(frozen=True)
class SubExponential:
    gamma: float = 1.0
    c: float = 1.0
    beta: float = 0.5
    delta: float = 0.0

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not (self.c > 0 and 0 < self.beta < 1 and self.delta >= 0):
            raise ValueError("SubExponential needs c > 0, 0 < beta < 1, delta >= 0")

    def log_large(self, r, d):
        return -self.c * np.power(r, self.beta) - self.delta * np.log(r)


@dataclass(frozen=True)
class Exponential:
    gamma: float = 1.0
    c: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not (self.c > 0 and self.delta >= 0):
            raise ValueError("Exponential needs c > 0, delta >= 0")

    def log_large(self, r, d):
        return -self.c * r - self.delta * np.log(r)


@dataclass(frozen=True)
class SuperExponential:
    gamma: float = 1.0
    c: float = 1.0
    beta: float = 2.0
    delta: float = 0.0

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not (self.c > 0 and self.beta > 1 and self.delta >= 0):
            raise ValueError("SuperExponential needs c > 0, beta > 1, delta >= 0")

    def log_large(self, r, d):
        return -self.c * np.power(r, self.beta) - self.delta * np.log(r)


@dataclass(frozen=True)
class UserTable:
    """Tabulated profile, interpolated log-log, power-law extrapolated at both ends.

    ``values`` are taken as g itself (no matching constant is applied).
    """

    radii: tuple
    values: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, float)
        v = np.asarray(self.values, float)
        object.__setattr__(self, "radii", tuple(float(x) for x in r))
        object.__setattr__(self, "values", tuple(float(x) for x in v))
        if r.ndim != 1 or r.size < 3 or r.size != v.size:
            raise ValueError("UserTable needs matching 1-D radii/values with >= 3 entries")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("UserTable radii must be positive and strictly increasing")
        if np.any(v <= 0):
            raise ValueError("UserTable values must be strictly positive")
        if np.any(np.diff(v) > 0):
            raise ValueError("UserTable values must be non-increasing (monotone profile)")

    @property
    def slopes(self):
        lr, lv = np.log(self.radii), np.log(self.values)
        return (lv[1] - lv[0]) / (lr[1] - lr[0]), (lv[-1] - lv[-2]) / (lr[-1] - lr[-2])

    def log_g(self, r):
        lr = np.log(np.asarray(r, float))
        tr, tv = np.log(self.radii), np.log(self.values)
        s0, s1 = self.slopes
        out = np.interp(lr, tr, tv)
        out = np.where(lr < tr[0], tv[0] + s0 * (lr - tr[0]), out)
        out = np.where(lr > tr[-1], tv[-1] + s1 * (lr - tr[-1]), out)
        return out


def _check_gamma(gamma):
    if not 0 <= gamma < 2:
        raise ValueError("small-r exponent gamma must lie in [0, 2)")


FAMILIES = {
    "polynomial": Polynomial,
    "subexponential": SubExponential,
    "exponential": Exponential,
    "superexponential": SuperExponential,
    "usertable": UserTable,
}


@dataclass(frozen=True)
class ClosedForm:
    """Analytic symbol.  kind is 'stable' (|xi|^alpha) or 'relativistic'."""

    kind: str
    alpha: float = 1.0
    m: float = 0.0

    def __call__(self, xi):
        k = np.abs(np.asarray(xi, float))
        if self.kind == "stable":
            return k**self.alpha
        if self.kind == "relativistic":
            return (k**2 + self.m ** (2.0 / self.alpha)) ** (self.alpha / 2) - self.m
        raise ValueError(f"unknown closed form {self.kind!r}")


SPHERE_AREA = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}


@dataclass(frozen=True)
class LevyModel:
    d: int = 1
    a: float = 0.0
    profile: object = field(default_factory=Polynomial)
    scale: Optional[float] = None
    comparability: tuple = (1.0, 1.0)
    weak_scaling: Optional[tuple] = None
    closed_form: Optional[ClosedForm] = None

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("only d in {1, 2, 3} is supported")
        if self.a < 0:
            raise ValueError("diffusion coefficient must be >= 0")
        c26, c27 = self.comparability
        if not (0 < c26 <= 1 <= c27):
            raise ValueError("comparability needs 0 < C26 <= 1 <= C27")
        object.__setattr__(self, "comparability", (float(c26), float(c27)))
        if self.scale is not None and self.scale < 0:
            raise ValueError("scale must be >= 0")
        if self.weak_scaling is not None:
            object.__setattr__(self, "weak_scaling", tuple(self.weak_scaling))

    # -- profile ---------------------------------------------------------
    @property
    def is_table(self):
        return isinstance(self.profile, UserTable)

    @property
    def gamma(self):
        if self.is_table:
            return -self.profile.slopes[0] - self.d
        return self.profile.gamma

    @property
    def log_match(self):
        """log of the constant multiplying the large-r branch of g."""
        if self.is_table:
            return 0.0
        return -float(self.profile.log_large(1.0, self.d))

    @property
    def intensity(self):
        """C(model) in nu = C(model) * g."""
        if self.scale is not None:
            return float(self.scale)
        return math.exp(-self.log_match)

    @property
    def c5(self):
        c26, c27 = self.comparability
        return max(c27, 1.0 / c26)

    def log_g(self, r):
        r = np.asarray(r, float)
        if self.is_table:
            return self.profile.log_g(r)
        with np.errstate(divide="ignore"):
            small = -(self.d + self.profile.gamma) * np.log(r)
            large = self.profile.log_large(np.maximum(r, 1.0), self.d) + self.log_match
        return np.where(r <= 1.0, small, large)

    def g(self, r):
        return np.exp(self.log_g(r))

    def scalar_g(self):
        """Fast scalar g for use inside quadrature callbacks."""
        return _scalar_g(self)

    def log_nu_radial(self, r):
        c = self.intensity
        if c == 0:
            return np.full(np.shape(r), -np.inf)
        return self.log_g(r) + math.log(c)

    def nu_radial(self, r):
        return self.intensity * self.g(r)

    # pieces used by the quadratures: a pure power law A r^(-d-gamma) on (0, r_s]
    # followed by smooth segments
    def _split(self):
        if self.is_table:
            tr = self.profile.radii
            cuts = list(tr[::40]) + ([tr[-1]] if (len(tr) - 1) % 40 else [])
            return tr[0], float(self.profile.values[0]) * tr[0] ** (self.d + self.gamma), list(
                zip(cuts[:-1], cuts[1:])) + [(tr[-1], math.inf)]
        return 1.0, 1.0, [(1.0, math.inf)]

    def to_dict(self):
        prof = self.profile
        pd = {"family": type(prof).__name__.lower()}
        pd.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in prof.__dict__.items()})
        out = {
            "dimension": self.d,
            "diffusion": self.a,
            "profile": pd,
            "scale": self.scale,
            "comparability": list(self.comparability),
        }
        if self.weak_scaling is not None:
            out["weak_scaling"] = list(self.weak_scaling)
        if self.closed_form is not None:
            out["closed_form"] = {"kind": self.closed_form.kind, "alpha": self.closed_form.alpha,
                                  "m": self.closed_form.m}
        return out

    @classmethod
    def from_dict(cls, doc):
        prof = dict(doc.get("profile", {"family": "polynomial"}))
        fam = prof.pop("family").lower().replace("-", "").replace("_", "")
        if fam not in FAMILIES:
            raise ValueError(f"unknown profile family {fam!r}")
        if fam == "usertable":
            prof = {"radii": tuple(prof["radii"]), "values": tuple(prof["values"])}
        cf = doc.get("closed_form")
        return cls(
            d=int(doc.get("dimension", 1)),
            a=float(doc.get("diffusion", 0.0)),
            profile=FAMILIES[fam](**prof),
            scale=doc.get("scale"),
            comparability=tuple(doc.get("comparability", (1.0, 1.0))),
            weak_scaling=doc.get("weak_scaling"),
            closed_form=ClosedForm(**cf) if cf else None,
        )

    # -- convenience constructors ------------------------------------------
    @classmethod
    def stable(cls, alpha=1.0, d=1):
        """Isotropic alpha-stable model normalised so that psi = |xi|^alpha."""
        c = (alpha * 2 ** (alpha - 1) * special.gamma((d + alpha) / 2)
             / (math.pi ** (d / 2) * special.gamma(1 - alpha / 2)))
        return cls(d=d, a=0.0, profile=Polynomial(alpha, alpha), scale=float(c),
                   closed_form=ClosedForm("stable", alpha))

    @classmethod
    def relativistic(cls, m=1.0, d=1, n_table=1200):
        """Relativistic alpha=1 model; exact Bessel intensity, tabulated."""
        r = np.geomspace(1e-7, 400.0, n_table)
        nu = 2 * (m / (2 * math.pi)) ** ((d + 1) / 2) * special.kv((d + 1) / 2, m * r) / r ** ((d + 1) / 2)
        return cls(d=d, a=0.0, profile=UserTable(tuple(r), tuple(nu)), scale=1.0,
                   closed_form=ClosedForm("relativistic", 1.0, m))


@lru_cache(maxsize=256)
def _scalar_g(model):
    d, prof = model.d, model.profile
    if model.is_table:
        import bisect

        tr = [math.log(v) for v in prof.radii]
        tv = [math.log(v) for v in prof.values]
        s0, s1 = prof.slopes

        def gt(r):
            lr = math.log(r)
            if lr <= tr[0]:
                return math.exp(tv[0] + s0 * (lr - tr[0]))
            if lr >= tr[-1]:
                return math.exp(tv[-1] + s1 * (lr - tr[-1]))
            i = bisect.bisect_right(tr, lr) - 1
            w = (lr - tr[i]) / (tr[i + 1] - tr[i])
            return math.exp(tv[i] + w * (tv[i + 1] - tv[i]))

        return gt
    small = -(d + prof.gamma)
    lm = model.log_match
    if isinstance(prof, Polynomial):
        e = -(d + prof.delta)
        return lambda r: r**small if r <= 1.0 else r**e
    b = 1.0 if isinstance(prof, Exponential) else prof.beta
    c, de = prof.c, prof.delta

    def gx(r):
        if r <= 1.0:
            return r**small
        lr = math.log(r)
        if b * lr > 700.0:
            return 0.0
        e = lm - c * math.exp(b * lr) - de * lr
        return math.exp(e) if e > -745.0 else 0.0

    return gx


@lru_cache(maxsize=256)
def _scalar_log_g(model):
    d, prof = model.d, model.profile
    if model.is_table:
        tr = np.log(prof.radii)
        tv = np.log(prof.values)
        s0, s1 = prof.slopes

        def lgt(r):
            lr = math.log(r)
            if lr <= tr[0]:
                return tv[0] + s0 * (lr - tr[0])
            if lr >= tr[-1]:
                return tv[-1] + s1 * (lr - tr[-1])
            return float(np.interp(lr, tr, tv))

        return lgt
    small = -(d + prof.gamma)
    lm = model.log_match
    if isinstance(prof, Polynomial):
        e = -(d + prof.delta)
        return lambda r: small * math.log(r) if r <= 1.0 else e * math.log(r)
    b = 1.0 if isinstance(prof, Exponential) else prof.beta
    c, de = prof.c, prof.delta

    def lg(r):
        lr = math.log(r)
        if r <= 1.0:
            return small * lr
        if b * lr > 700.0:
            return -math.inf
        return lm - c * math.exp(b * lr) - de * lr

    return lg


def nu(model: LevyModel, x):
    """Lévy intensity at x (x may be an array of points in d=1 or of radii)."""
    x = np.asarray(x, float)
    r = np.abs(x) if model.d == 1 or x.ndim == 0 else np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise ValueError("nu is singular at the origin")
    return model.nu_radial(r)


# ----------------------------------------------------------------------------
# characteristic exponent


def _kernel_series(d, gamma, X):
    """int_0^X k_d(u) u^(-1-gamma) du by termwise integration, X <= 1."""
    X = np.asarray(X, float)
    out = np.zeros_like(X)
    for k in range(1, 20):
        if d == 1:
            ck = (-1) ** (k + 1) / math.factorial(2 * k)
        elif d == 3:
            ck = (-1) ** (k + 1) / math.factorial(2 * k + 1)
        else:
            ck = (-1) ** (k + 1) / (4**k * math.factorial(k) ** 2)
        out += ck * X ** (2 * k - gamma) / (2 * k - gamma)
    return out


def _kernel(d, u):
    if d == 1:
        return 2 * np.sin(u / 2) ** 2
    if d == 3:
        small = np.abs(u) < 1e-3
        us = np.where(small, 1.0, u)
        return np.where(small, u**2 / 6 - u**4 / 120, 1 - np.sin(us) / us)
    return 1 - special.j0(u)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def kernel_power_integral(d, gamma, X):
    """F(X) = int_0^X k_d(u) u^(-1-gamma) du with k_d the (unnormalised) spherical
    average of 1 - cos.  Vectorised over X via cumulative Gauss-Legendre panels."""
    X = np.atleast_1d(np.asarray(X, float))
    out = np.empty_like(X)
    lo = X <= 1.0
    out[lo] = _kernel_series(d, gamma, X[lo])
    if np.any(~lo):
        width = 0.25
        xmax = X[~lo].max()
        edges = np.arange(1.0, xmax + width, width)
        mids = 0.5 * (edges[1:] + edges[:-1])
        nodes = mids[:, None] + 0.5 * width * _GL_X[None, :]
        panel = 0.5 * width * (_kernel(d, nodes) * nodes ** (-1 - gamma)) @ _GL_W
        cum = _kernel_series(d, gamma, np.array([1.0]))[0] + np.concatenate([[0.0], np.cumsum(panel)])
        Xh = X[~lo]
        idx = np.minimum(((Xh - 1.0) / width).astype(int), len(edges) - 1)
        left = edges[idx]
        half = 0.5 * (Xh - left)
        pn = (left + half)[:, None] + half[:, None] * _GL_X[None, :]
        part = half * ((_kernel(d, pn) * pn ** (-1 - gamma)) @ _GL_W)
        out[~lo] = cum[idx] + part
    return out


def _segment_psi(model, xi, lo, hi):
    """Contribution of int_{lo<|z|<hi} (1-cos xi.z) g(|z|) dz (without intensity)."""
    d = model.d
    S = SPHERE_AREA[d]

    g = _scalar_g(model)

    if d == 1:
        if xi < 1.0:
            R = min(hi, lo + 40.0 / xi)
            # log substitution r = e^u keeps the long non-oscillatory stretch cheap
            val = _quad(lambda u: 2 * math.sin(xi * math.exp(u) / 2) ** 2 * g(math.exp(u)) * math.exp(u),
                        math.log(lo), math.log(R))
            if R < hi:
                val += _tail_mass_raw(model, R, hi) / S - _cos_transform(g, R, hi, xi)
            return S * val
        return S * (_tail_mass_raw(model, lo, hi) / S - _cos_transform(g, lo, hi, xi))
    if d == 3:
        if xi < 1.0:
            R = min(hi, lo + 40.0 / xi)
            val = _quad(lambda r: float(_kernel(3, xi * r)) * g(r) * r * r, lo, R)
            if R < hi:
                val += _tail_mass_raw(model, R, hi) / S - _sin_transform(lambda r: g(r) * r, R, hi, xi) / xi
            return S * val
        return S * (_tail_mass_raw(model, lo, hi) / S - _sin_transform(lambda r: g(r) * r, lo, hi, xi) / xi)
    # d == 2: Bessel kernel, plain quadrature then asymptotic tail
    R = min(hi, lo + 400.0 / xi)
    val = _quad(lambda r: float(1 - special.j0(xi * r)) * g(r) * r, lo, R, limit=4000)
    if R < hi:
        f = lambda r: g(r) * math.sqrt(r) * math.sqrt(2 / (math.pi * xi))
        f2 = lambda r: g(r) / math.sqrt(r) * math.sqrt(2 / (math.pi * xi)) / (8 * xi)
        c4, s4 = math.cos(math.pi / 4), math.sin(math.pi / 4)
        # cos(x - pi/4) = c4 cos x + s4 sin x ; sin(x - pi/4) = s4 sin x - c4 cos x
        jtail = (c4 * _cos_transform(f, R, hi, xi) + s4 * _sin_transform(f, R, hi, xi)
                 + s4 * _sin_transform(f2, R, hi, xi) - c4 * _cos_transform(f2, R, hi, xi))
        val += _tail_mass_raw(model, R, hi) / S - jtail
    return S * val


def _cos_transform(f, lo, hi, w):
    if math.isinf(hi):
        return _quad(f, lo, math.inf, weight="cos", wvar=w, limlst=200)
    return _quad(f, lo, hi, weight="cos", wvar=w, limit=4000)


def _sin_transform(f, lo, hi, w):
    if math.isinf(hi):
        return _quad(f, lo, math.inf, weight="sin", wvar=w, limlst=200)
    return _quad(f, lo, hi, weight="sin", wvar=w, limit=4000)


def _psi_quad_scalar(model, xi):
    xi = abs(float(xi))
    if xi == 0.0:
        return 0.0
    val = model.a * xi * xi
    C = model.intensity
    if C == 0:
        return val
    r_s, A, segs = model._split()
    gam = model.gamma
    small = A * SPHERE_AREA[model.d] * xi**gam * kernel_power_integral(model.d, gam, xi * r_s)[0]
    large = sum(_segment_psi(model, xi, lo, hi) for lo, hi in segs)
    return val + C * (small + large)


def psi(model: LevyModel, xi, method: str = "auto"):
    """Characteristic exponent psi(xi) (radial: xi may be a scalar, an array of
    frequencies in d=1, or of |xi| values)."""
    xi = np.asarray(xi, float)
    # vectors only when the last axis has length d; 1-D arrays are |xi| values
    is_vec = model.d > 1 and xi.ndim >= 2 and xi.shape[-1] == model.d
    k = np.linalg.norm(xi, axis=-1) if is_vec else np.abs(xi)
    if method == "closed" or (method == "auto" and model.closed_form is not None):
        if model.closed_form is None:
            raise ValueError("model has no closed-form symbol")
        return model.a * k**2 + model.closed_form(k)
    flat = np.ravel(k)
    uniq, inv = np.unique(flat, return_inverse=True)
    vals = np.array([_psi_cached(model, float(u)) for u in uniq])
    out = vals[inv].reshape(k.shape)
    return out if out.ndim else float(out)


@lru_cache(maxsize=200_000)
def _psi_cached(model, xi):
    return _psi_quad_scalar(model, xi)


def big_psi(model: LevyModel, r: float, n: int = 65):
    """Psi(r) = sup_{|xi| <= r} psi(xi), by dense sampling plus local refinement."""
    if r <= 0:
        raise ValueError("r must be positive")
    ks = np.linspace(0.0, r, n)
    vals = np.asarray(psi(model, ks), float)
    i = int(np.argmax(vals))
    best = vals[i]
    if 0 < i < n - 1:
        from scipy.optimize import minimize_scalar

        res = minimize_scalar(lambda k: -float(psi(model, k)), bounds=(ks[i - 1], ks[i + 1]),
                              method="bounded", options={"xatol": 1e-10 * r})
        best = max(best, -res.fun)
    return float(best)


@lru_cache(maxsize=4096)
def _tail_mass_raw(model, s, hi=math.inf):
    """|S^{d-1}| int_s^hi g(r) r^{d-1} dr (no intensity)."""
    d = model.d
    r_s, A, segs = model._split()
    gam = model.gamma
    total = 0.0
    if s < r_s:
        top = min(hi, r_s)
        if gam == 0:
            total += A * math.log(top / s)
        else:
            total += A * (s ** (-gam) - top ** (-gam)) / gam
    for lo, up in segs:
        lo2, up2 = max(lo, s), min(up, hi)
        if up2 <= lo2:
            continue
        g = _scalar_g(model)
        if math.isinf(up2):
            # r = e^u turns the heavy tail into an exponentially decaying integrand
            lg = _scalar_log_g(model)

            def f(u):
                if u >= 700:
                    return 0.0
                e = lg(math.exp(u)) + d * u
                return math.exp(e) if e > -745 else 0.0

            total += _quad(f, math.log(lo2), math.inf)
        else:
            total += _quad(lambda r: g(r) * r ** (d - 1), lo2, up2)
    return SPHERE_AREA[d] * total


def tail_mass(model: LevyModel, s: float):
    """nu(B(0,s)^c)."""
    if s <= 0:
        raise ValueError("s must be positive")
    return model.intensity * _tail_mass_raw(model, s)


def nu_ball_moment(model: LevyModel, eps: float):
    """int_{|y|<eps} |y|^2 nu(dy)."""
    d = model.d
    r_s, A, segs = model._split()
    gam = model.gamma
    top = min(eps, r_s)
    total = A * top ** (2 - gam) / (2 - gam)
    for lo, up in segs:
        up2 = min(up, eps)
        if up2 <= lo:
            continue
        g = _scalar_g(model)
        total += _quad(lambda r: g(r) * r ** (d + 1), lo, up2)
    return model.intensity * SPHERE_AREA[d] * total


def pruitt_H(model: LevyModel, r: float):
    """Pruitt's function H(r) = a/r^2 + int (1 ^ |y|^2/r^2) nu(dy)."""
    if r <= 0:
        raise ValueError("r must be positive")
    inner = nu_ball_moment(model, r) / r**2
    return model.a / r**2 + inner + tail_mass(model, r)


def pruitt_comparability(model: LevyModel, r_range: Sequence[float]):
    """Measured (C1, C2) with C1 H(1/r) <= Psi(r) <= C2 H(1/r) on the sample."""
    ratios = [big_psi(model, r) / pruitt_H(model, 1.0 / r) for r in r_range]
    return float(min(ratios)), float(max(ratios))


# ----------------------------------------------------------------------------
# transition densities


@dataclass
class DensitySlice:
    t: float
    x: np.ndarray
    values: np.ndarray
    mass: float
    min_raw: float

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.x, self.values]), delimiter=",",
                   header="x,value", comments="", fmt="%.17g")


def _grid_from(grid):
    x = np.asarray(getattr(grid, "x", grid), float)
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=0):
        raise ValueError("density grid must be uniform")
    return x, h


def _image_sum(model, t, x, period, k_max=400):
    """sum_{k != 0} t nu(x + k P): first-order periodic images of a heavy-tailed density."""
    k = np.concatenate([-np.arange(k_max, 0, -1), np.arange(1, k_max + 1)]).astype(float)
    out = np.zeros_like(x)
    for kk in k:
        out += model.nu_radial(np.abs(x + kk * period))
    # images beyond k_max, each side a Riemann sum of the tail integral
    out += tail_mass(model, (k_max + 0.5) * period) / period
    return t * out


def fourier_density(model, t, x, pad=4, symbol=None, images=True):
    """Periodised Fourier inversion of exp(-t psi) on a grid padded ``pad`` times.

    With ``images`` the periodic images are removed to first order using
    p(t, x) ~ t nu(x) in the tail (d = 1, model symbol only).
    """
    x, h = _grid_from(x)
    n = len(x)
    n_big = int(2 ** math.ceil(math.log2(pad * n)))
    xi = 2 * math.pi * np.fft.fftfreq(n_big, d=h)
    ps = psi(model, xi) if symbol is None else symbol(xi)
    ehat = np.exp(-t * ps)
    tail = ehat[n_big // 2]
    if tail > 1e-10:
        raise DensityError(
            f"exp(-t psi) = {tail:.3g} at the Nyquist frequency: not integrable on this grid at "
            f"t={t}; use a larger t (the density may exist only for larger times) or a finer grid"
        )
    # origin-centred grid of n_big points; a phase handles nodes off the lattice h Z
    k0 = int(math.floor(x[0] / h))
    frac = x[0] - k0 * h
    if abs(frac) > 1e-9 * h and abs(frac - h) > 1e-9 * h:
        ehat = ehat * np.exp(1j * xi * frac)
    else:
        k0 = int(round(x[0] / h))
    full = np.fft.ifft(ehat).real / h
    idx = (np.arange(n) + k0) % n_big
    out = full[idx]
    if images and symbol is None and model.d == 1 and model.scale != 0:
        out = out - _image_sum(model, t, x, n_big * h)
    return out


def transition_density(model: LevyModel, t: float, grid, pad: int = 4, clip: float = 1e-12):
    """p(t, x) on a uniform 1-D grid (d=1) or radial grid (d = 2, 3)."""
    if t <= 0:
        raise ValueError("t must be positive")
    if model.d == 1:
        x, h = _grid_from(grid)
        raw = fourier_density(model, t, x, pad=pad)
    else:
        x = np.asarray(getattr(grid, "x", grid), float)
        raw = _radial_density(model, t, np.abs(x))
        h = x[1] - x[0] if len(x) > 1 else 1.0
    min_raw = float(raw.min())
    vals = np.where((raw < 0) & (raw > -clip), 0.0, raw)
    if model.d == 1:
        mass = float(vals.sum() * h)
    else:
        mass = float(np.trapz(vals * SPHERE_AREA[model.d] * np.abs(x) ** (model.d - 1), x))
    return DensitySlice(t=t, x=x, values=vals, mass=mass, min_raw=min_raw)


def _radial_density(model, t, r):
    K = 1.0
    while math.exp(-t * float(psi(model, K))) > 1e-17:
        K *= 2
        if K > 1e7:
            raise DensityError("exp(-t psi) decays too slowly; use a larger t")
    ks = np.linspace(0, K, 4097)
    table = np.exp(-t * np.asarray(psi(model, ks), float))

    def ehat(k):
        return float(np.interp(k, ks, table))

    out = np.empty_like(r)
    for i, rr in enumerate(r):
        if model.d == 3:
            if rr == 0:
                out[i] = _quad(lambda k: k * k * ehat(k), 0, K, limit=2000) / (2 * math.pi**2)
            else:
                out[i] = _quad(lambda k: k * ehat(k), 0, K, weight="sin", wvar=rr) / (2 * math.pi**2 * rr)
        else:
            out[i] = _quad(lambda k: k * special.j0(k * rr) * ehat(k), 0, K, limit=4000) / (2 * math.pi)
    return out


def density_regularity_checks(model: LevyModel, t_set, r_set, R: float = 1.0, L: float = 200.0,
                              h: float = 0.05, floor: float = 1e-11):
    """Empirical constants for the density comparability and the sup bound.

    Returns C17 (sup of p(t,x)/p(t,y) over |x| >= |y| >= R, |x-y| <= 1) and
    C9 (sup over (t, r) of sup_{|x|>=r} p(t,x) / (t Psi(1/r) / r^d)).
    """
    from scipy.ndimage import minimum_filter1d

    n = int(2 ** math.ceil(math.log2(2 * L / h)))
    h = 2 * L / n
    x = -L + h * np.arange(n)
    c17_by_t, c9_rows = {}, []
    w = int(round(1.0 / h))
    for t in t_set:
        p = transition_density(model, t, x).values
        pos = x >= 0
        xp, pp = x[pos], p[pos]
        keep = pp > floor * pp[0]
        # y ranges over [x-1, x] intersected with [R, inf)
        mins = minimum_filter1d(pp, size=w + 1, origin=w // 2)
        ok = keep & (xp >= R + 1.0)
        c17_by_t[t] = float(np.max(pp[ok] / mins[ok])) if np.any(ok) else float("nan")
        for r in r_set:
            sup = float(pp[xp >= r].max())
            c9_rows.append((t, r, sup / (t * big_psi(model, 1.0 / r) / r**model.d)))
    c9 = max(v for _, _, v in c9_rows)
    c17 = max(c17_by_t.values())
    vals17 = [c17_by_t[t] for t in sorted(c17_by_t)]
    growth = len(vals17) > 2 and all(b > 1.5 * a for a, b in zip(vals17, vals17[1:]))
    return {"C17": c17, "C17_by_t": c17_by_t, "C9": c9, "C9_rows": c9_rows, "unbounded_growth": growth}


def b2_constant(model: LevyModel, r_set=(1, 2, 4), y_span: float = 60.0, n_y: int = 200):
    """Measured constant C8 in the annulus comparison inequality (d = 1)."""
    if model.d != 1:
        raise NotImplementedError("b2_constant is implemented for d = 1")
    out = {}
    for r in r_set:
        best = 0.0
        for y in r + 1 + np.concatenate([[0.0], np.geomspace(1e-3, y_span, n_y - 1)]):
            lhs = 0.0
            # z in (r, r+1] U [-r-1, -r) with |y - z| > 1/8
            for a_, b_ in ((r, r + 1), (-r - 1, -r)):
                for lo, hi in _minus_interval(a_, b_, y - 0.125, y + 0.125):
                    lhs += interval_nu_integral(model, y - hi, y - lo)
            rhs = sum(interval_nu_integral(model, y - b_, y - a_)
                      for a_, b_ in ((r - 1, r), (-r, -(r - 1))))
            best = max(best, lhs / rhs)
        out[r] = best
    return max(out.values()), out


def _minus_interval(a, b, c, e):
    parts = []
    if c > a:
        parts.append((a, min(b, c)))
    if e < b:
        parts.append((max(a, e), b))
    return [(lo, hi) for lo, hi in parts if hi > lo]


def interval_nu_integral(model: LevyModel, lo: float, hi: float):
    """int_lo^hi nu(u) du in d = 1 for an interval not containing 0."""
    if lo < 0 < hi:
        raise ValueError("interval must not contain the origin")
    if hi <= 0:
        lo, hi = -hi, -lo
    raw = (_tail_mass_raw(model, lo) - _tail_mass_raw(model, hi)) / 2.0
    return model.intensity * raw


# ----------------------------------------------------------------------------
# normalised big-jump law, used by the simulators and the subexponentiality probe


class RadialLaw:
    """Law of |J| for J ~ nu restricted to |y| >= eps, normalised.

    Keeps a table of log-survival values on a geometric grid; sampling and the
    survival function interpolate log S linearly in log r (exact for power laws).
    """

    def __init__(self, model: LevyModel, eps: float, ratio: float = 1.01, log_floor: float = -700.0):
        self.model, self.eps = model, eps
        d = model.d
        r_s, A, segs = model._split()
        gam = model.gamma
        edges = [eps]
        while True:
            nxt = edges[-1] * ratio
            edges.append(nxt)
            if nxt > 1e6:
                break
            lg = float(model.log_g(nxt)) + d * math.log(nxt)
            if lg < log_floor - 50:
                break
        edges = np.array(edges)
        lo, hi = edges[:-1], edges[1:]
        mid = 0.5 * (lo + hi)
        nodes = mid[:, None] + 0.5 * (hi - lo)[:, None] * _GL_X[None, :]
        logf = model.log_g(nodes) + (d - 1) * np.log(nodes)
        shift = logf.max(axis=1)
        seg = np.log(0.5 * (hi - lo)) + shift + np.log(np.exp(logf - shift[:, None]) @ _GL_W)
        # beyond the table g(r) r^d ~ r^(-k) with k the local log-slope
        R = edges[-1]
        lv = [float(model.log_g(v)) + d * math.log(v) for v in (R / ratio, R)]
        k = max((lv[0] - lv[1]) / math.log(ratio), 1e-3)
        tail_log = lv[1] - math.log(k)
        logs = np.append(seg, tail_log)
        # cumulative from the right, in log space
        logS = np.logaddexp.accumulate(logs[::-1])[::-1]
        self.log_total = float(logS[0])
        self.log_r = np.log(edges)
        self.logS = logS - logS[0]
        self.rate = model.intensity * SPHERE_AREA[d] * math.exp(self.log_total)

    def log_survival(self, r):
        """log P(|J| > r)."""
        lr = np.log(np.maximum(np.asarray(r, float), self.eps))
        lr0, lr1 = self.log_r[-2], self.log_r[-1]
        slope = (self.logS[-1] - self.logS[-2]) / (lr1 - lr0)
        out = np.interp(lr, self.log_r, self.logS)
        return np.where(lr > self.log_r[-1], self.logS[-1] + slope * (lr - self.log_r[-1]), out)

    def sample_radius(self, rng, n, above=None):
        """Radii from the law, or from the law conditioned on |J| > above."""
        u = rng.random(n)
        lu = np.log1p(-u)  # log of a uniform on (0,1]
        if above is not None:
            lu = lu + float(self.log_survival(above))
        # logS decreases from 0; invert by interpolation on the reversed table
        lr = np.interp(-lu, -self.logS, self.log_r)
        beyond = -lu > -self.logS[-1]
        if np.any(beyond):
            slope = (self.logS[-1] - self.logS[-2]) / (self.log_r[-1] - self.log_r[-2])
            lr = np.where(beyond, self.log_r[-1] + (lu - self.logS[-1]) / slope, lr)
        return np.exp(lr)

    def sample(self, rng, n):
        rad = self.sample_radius(rng, n)
        d = self.model.d
        if d == 1:
            return rad * np.where(rng.random(n) < 0.5, -1.0, 1.0)
        v = rng.standard_normal((n, d))
        return rad[:, None] * v / np.linalg.norm(v, axis=1, keepdims=True)
