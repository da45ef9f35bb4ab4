"""Interaction functions F(t, x) of the nonlocal energy.

Two built-in families are provided:

* ``pLaplacian``:   F(t, x) = |t|^p / (p |x|^(n+sp))
* ``meanCurvature``: F(t, x) = |x|^-(n+s-1) Gcal(t/|x|), where
  g(r) = (1 + r^2)^(-(n+s+1)/2), G' = g, Gcal' = G and G(0) = Gcal(0) = 0.

Custom kernels supply F and dF/dt as callables together with the structural
constants they claim; :func:`nlenergy.audit.audit_assumptions` checks them.

All evaluators are vectorised over numpy arrays. Displacements ``x`` carry the
spatial dimension in their last axis; for ``n == 1`` a bare scalar (or an array
whose last axis is not of length one) is read as a list of 1D displacements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .errors import DomainError, UsageError

FAMILIES = ("pLaplacian", "meanCurvature", "custom")
HELPER_TOL = 1e-10


@dataclass(frozen=True)
class KernelParams:
    family: str
    n: int
    s: float
    p: float
    c_star: float
    c_upper: float
    c1: float
    c2: float
    c3: float
    F_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    dF_dt_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    dF_dx_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    d2F_dx2_func: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown kernel family {self.family!r}")
        if self.n not in (1, 2):
            raise UsageError(f"dimension n must be 1 or 2, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise UsageError(f"s must lie in (0, 1), got {self.s}")
        if self.p < 1.0:
            raise UsageError(f"p must be >= 1, got {self.p}")
        if self.family == "meanCurvature" and self.p != 1.0:
            raise UsageError("the mean-curvature kernel requires p = 1")
        for name in ("c_star", "c_upper", "c1", "c2", "c3"):
            if not getattr(self, name) > 0.0:
                raise UsageError(f"{name} must be positive")
        if self.c_star > self.c_upper:
            raise UsageError("c_star must not exceed c_upper")
        if self.family == "custom" and (self.F_func is None or self.dF_dt_func is None):
            raise UsageError("custom kernels need F and dF/dt callables")

    @property
    def sp(self) -> float:
        return self.s * self.p

    @property
    def order(self) -> float:
        """Homogeneity exponent n + sp of the singular part."""
        return self.n + self.s * self.p

    @property
    def radial(self) -> bool:
        return self.family != "custom"

    # -- radial forms used by the built-in families --------------------------

    def F_r(self, t, r):
        """F as a function of t and r = |x| (built-in families only)."""
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        if self.family == "pLaplacian":
            return np.abs(t) ** self.p / (self.p * r ** self.order)
        if self.family == "meanCurvature":
            return Gcal_fast(t / r, self.n, self.s) / r ** (self.n + self.s - 1.0)
        raise UsageError("radial evaluation is not available for custom kernels")

    def dF_dt_r(self, t, r):
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        if self.family == "pLaplacian":
            a = np.abs(t)
            with np.errstate(divide="ignore", invalid="ignore"):
                mag = np.where(a > 0.0, a ** (self.p - 1.0), 0.0)
            return np.sign(t) * mag / r ** self.order
        if self.family == "meanCurvature":
            return G_fast(t / r, self.n, self.s) / r ** (self.n + self.s)
        raise UsageError("radial evaluation is not available for custom kernels")

    def d2F_dt2_r(self, t, r):
        """Second t-derivative; infinite at t = 0 for pLaplacian with p < 2."""
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        if self.family == "pLaplacian":
            with np.errstate(divide="ignore"):
                return (self.p - 1.0) * np.abs(t) ** (self.p - 2.0) / r ** self.order
        if self.family == "meanCurvature":
            return g_fast(t / r, self.n, self.s) / r ** (self.n + self.s + 1.0)
        raise UsageError("radial evaluation is not available for custom kernels")

    def dF_dr(self, t, r):
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        if self.family == "pLaplacian":
            return -self.order * self.F_r(t, r) / r
        b = self.n + self.s - 1.0
        tau = np.abs(t) / r
        H = b * Gcal_fast(tau, self.n, self.s) + tau * G_fast(tau, self.n, self.s)
        return -H / r ** (b + 1.0)

    def d2F_dr2(self, t, r):
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        if self.family == "pLaplacian":
            a = self.order
            return a * (a + 1.0) * self.F_r(t, r) / r ** 2
        b = self.n + self.s - 1.0
        tau = np.abs(t) / r
        Gc = Gcal_fast(tau, self.n, self.s)
        G = G_fast(tau, self.n, self.s)
        g = g_fast(tau, self.n, self.s)
        H = b * Gc + tau * G
        dH = (b + 1.0) * G + tau * g
        return ((b + 1.0) * H + tau * dH) / r ** (b + 2.0)

    # -- general forms --------------------------------------------------------

    def F(self, t, x):
        x = _as_points(x, self.n)
        if self.radial:
            return self.F_r(t, np.linalg.norm(x, axis=-1))
        return np.asarray(self.F_func(np.asarray(t, dtype=float), x), dtype=float)

    def dF_dt(self, t, x):
        x = _as_points(x, self.n)
        if self.radial:
            return self.dF_dt_r(t, np.linalg.norm(x, axis=-1))
        return np.asarray(self.dF_dt_func(np.asarray(t, dtype=float), x), dtype=float)

    def dF_dx(self, t, x):
        """Gradient in x, shape (..., n); finite differences for custom kernels."""
        x = _as_points(x, self.n)
        if self.radial:
            r = np.linalg.norm(x, axis=-1)
            return (self.dF_dr(t, r) / r)[..., None] * x
        if self.dF_dx_func is not None:
            return np.asarray(self.dF_dx_func(np.asarray(t, dtype=float), x), dtype=float)
        return _fd_dx(self.F, t, x, order=1)

    def d2F_dx2(self, t, x):
        """Diagonal second x-derivatives, shape (..., n)."""
        x = _as_points(x, self.n)
        if self.radial:
            r = np.linalg.norm(x, axis=-1)[..., None]
            Fr = self.dF_dr(t, r[..., 0])[..., None]
            Frr = self.d2F_dr2(t, r[..., 0])[..., None]
            q = (x / r) ** 2
            return Frr * q + Fr * (1.0 - q) / r
        if self.d2F_dx2_func is not None:
            return np.asarray(self.d2F_dx2_func(np.asarray(t, dtype=float), x), dtype=float)
        return _fd_dx(self.F, t, x, order=2)

    def envelope(self) -> "KernelParams":
        """Custom kernel equal to the upper bound c^* |t|^p / |x|^(n+sp)."""
        c, p, a = self.c_upper, self.p, self.order

        def F(t, x):
            return c * np.abs(t) ** p / np.linalg.norm(x, axis=-1) ** a

        def dF(t, x):
            mag = np.where(t != 0.0, np.abs(t) ** (p - 1.0), 0.0)
            return c * p * np.sign(t) * mag / np.linalg.norm(x, axis=-1) ** a

        return custom_kernel(self.n, self.s, self.p, F, dF, c_star=min(self.c_star, c),
                             c_upper=c, c1=a, c2=a * (a + 1.0), c3=c * p)


def p_laplacian(n: int = 1, s: float = 0.5, p: float = 2.0) -> KernelParams:
    a = n + s * p
    return KernelParams("pLaplacian", n, s, p, c_star=1.0 / p, c_upper=1.0 / p,
                        c1=a, c2=a * (a + 1.0), c3=1.0)


def mean_curvature(n: int = 1, s: float = 0.5) -> KernelParams:
    b = n + s - 1.0
    G_inf = G_infinity(n, s)
    rho = np.linspace(0.0, 1.0, 1000)
    c_star = float(np.min(g_fast(rho, n, s)))
    return KernelParams("meanCurvature", n, s, 1.0, c_star=c_star, c_upper=G_inf,
                        c1=b + 2.0, c2=(b + 1.0) * (b + 4.0) + 2.0, c3=G_inf)


def custom_kernel(n, s, p, F, dF_dt, *, c_star, c_upper, c1, c2, c3,
                  dF_dx=None, d2F_dx2=None) -> KernelParams:
    return KernelParams("custom", n, s, p, c_star, c_upper, c1, c2, c3,
                        F_func=F, dF_dt_func=dF_dt, dF_dx_func=dF_dx,
                        d2F_dx2_func=d2F_dx2)


def make_kernel(family: str, n: int, s: float, p: Optional[float] = None) -> KernelParams:
    if family == "pLaplacian":
        return p_laplacian(n, s, 2.0 if p is None else p)
    if family == "meanCurvature":
        if p not in (None, 1, 1.0):
            raise UsageError("the mean-curvature kernel requires p = 1")
        return mean_curvature(n, s)
    raise UsageError(f"cannot build kernel family {family!r} from parameters alone")


# -- the helper functions g, G, Gcal -----------------------------------------

def _exponent(n, s):
    return 0.5 * (n + s + 1.0)


def g_fast(rho, n, s):
    rho = np.asarray(rho, dtype=float)
    return (1.0 + rho * rho) ** (-_exponent(n, s))


def G_infinity(n, s) -> float:
    m = _exponent(n, s)
    return 0.5 * special.beta(0.5, m - 0.5)


def G_fast(tau, n, s):
    """G(tau) through the regularised incomplete beta function (odd in tau)."""
    tau = np.asarray(tau, dtype=float)
    m = _exponent(n, s)
    a = np.abs(tau)
    half_b = 0.5 * special.beta(0.5, m - 0.5)
    q = 1.0 / (1.0 + a * a)
    small = half_b * special.betainc(0.5, m - 0.5, a * a * q)
    large = half_b - half_b * special.betainc(m - 0.5, 0.5, q)
    return np.sign(tau) * np.where(a <= 1.0, small, large)


def Gcal_fast(t, n, s):
    """Gcal(t) = |t| G(|t|) - ((1+t^2)^(1-m) - 1) / (2(1-m)), m = (n+s+1)/2."""
    t = np.abs(np.asarray(t, dtype=float))
    m = _exponent(n, s)
    corr = np.expm1((1.0 - m) * np.log1p(t * t)) / (2.0 * (1.0 - m))
    return t * G_fast(t, n, s) - corr


# -- public operations ---------------------------------------------------------

def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != n:
        raise UsageError(f"displacement has dimension {x.shape[-1]}, expected {n}")
    return x


def _check_nonzero(x):
    if np.any(np.linalg.norm(x, axis=-1) == 0.0):
        raise DomainError("F is defined on R x (R^n minus the origin); got x = 0")


def _scalar_or_array(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def eval_F(k: KernelParams, t, x):
    x = _as_points(x, k.n)
    _check_nonzero(x)
    return _scalar_or_array(k.F(t, x))


def eval_dF_dt(k: KernelParams, t, x):
    """Partial derivative in t; returns 0 at t = 0 when the power is singular."""
    x = _as_points(x, k.n)
    _check_nonzero(x)
    return _scalar_or_array(k.dF_dt(t, x))


def eval_helpers(k: KernelParams, value: float, which: str) -> float:
    """Reference evaluation of g, G and Gcal by adaptive quadrature."""
    if k.family != "meanCurvature":
        raise UsageError("g, G and Gcal belong to the mean-curvature kernel")
    n, s = k.n, k.s
    value = float(value)

    def g(rho):
        return (1.0 + rho * rho) ** (-_exponent(n, s))

    if which == "g":
        return g(value)
    if which == "G":
        val, _ = integrate.quad(g, 0.0, value, epsabs=HELPER_TOL, epsrel=HELPER_TOL, limit=200)
        return val
    if which == "Gcal":
        # Gcal(t) = int_0^t (t - rho) g(rho) drho, which is even in t
        a = abs(value)
        val, _ = integrate.quad(lambda rho: (a - rho) * g(rho), 0.0, a,
                                epsabs=HELPER_TOL, epsrel=HELPER_TOL, limit=200)
        return val
    raise UsageError(f"unknown helper {which!r}; expected g, G or Gcal")


def _fd_dx(F, t, x, order):
    # Richardson-extrapolated central differences along each axis
    t = np.asarray(t, dtype=float)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    out = np.empty(np.broadcast_shapes(t.shape + (1,), x.shape))
    for i in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[i] = 1.0

        def diff(step):
            hv = step * r
            fp = F(t, x + hv * e)
            fm = F(t, x - hv * e)
            if order == 1:
                return (fp - fm) / (2.0 * hv[..., 0])
            return (fp - 2.0 * F(t, x) + fm) / hv[..., 0] ** 2

        h = 1e-3 if order == 1 else 1e-2
        d1, d2 = diff(h), diff(h / 2.0)
        out[..., i] = (4.0 * d2 - d1) / 3.0
    return out


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^(n-1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
