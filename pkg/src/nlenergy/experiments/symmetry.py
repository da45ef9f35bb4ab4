"""How far a 2D lattice function is from being one-dimensional, u(x) ~ u0(omega . x)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded
from scipy.optimize import minimize_scalar

from ..errors import UsageError
from ..grid import GridFunction

SCAN_DIRECTIONS = 360
REFINE_TOL = 1e-10
POLISH_STEP = 1e-7
RIDGE = 1e-13


@dataclass
class SymmetryResult:
    omega: np.ndarray
    angle: float            # radians in [0, pi)
    residual: float
    profile: np.ndarray     # rows (knot position, profile value)
    scan: np.ndarray        # rows (angle, residual) for the coarse scan


def direction(angle: float) -> np.ndarray:
    """Unit vector at ``angle``, built by exact quarter turns of a base angle in [0, pi/2)."""
    q, base = divmod(angle, 0.5 * math.pi)
    c, s = math.cos(base), math.sin(base)
    for _ in range(int(q) % 4):
        c, s = -s, c
    return np.array([c, s])


def profile_fit(points, values, omega, h):
    """Least-squares continuous piecewise-linear profile in omega . x, knots every h.

    Returns the RMS residual and the profile table (knot position, knot value).
    """
    t = (points @ omega) / h
    base = np.floor(t)
    k0 = int(base.min())
    j = (base - k0).astype(np.int64)
    b = t - base
    a = 1.0 - b
    m = int(j.max()) + 2
    diag = np.bincount(j, a * a, m) + np.bincount(j + 1, b * b, m)
    off = np.bincount(j, a * b, m)[:-1]
    rhs = np.bincount(j, a * values, m) + np.bincount(j + 1, b * values, m)
    # tiny ridge keeps knots without support (at most the end ones) well posed
    ab = np.zeros((2, m))
    ab[0, 1:] = off
    ab[1] = diag + RIDGE * float(diag.max())
    c = solveh_banded(ab, rhs)
    fitted = a * c[j] + b * c[j + 1]
    residual = math.sqrt(float(np.mean((values - fitted) ** 2)))
    return residual, np.column_stack([(np.arange(m) + k0) * h, c])


def _polish(residual, angle, r0):
    """Sharpen a V-shaped minimum by intersecting the two one-sided secant lines."""
    d = POLISH_STEP
    l1, l2, r1, r2 = (residual(angle + e) for e in (-2 * d, -d, d, 2 * d))
    sl, sr = (l2 - l1) / d, (r2 - r1) / d
    if not sl < 0.0 < sr:
        return angle, r0
    x = (r1 - l2 + sl * (angle - d) - sr * (angle + d)) / (sl - sr)
    if abs(x - angle) > 2 * d:
        return angle, r0
    rx = residual(x)
    return (x, rx) if rx < r0 else (angle, r0)


def symmetry_diagnostic(u: GridFunction, region: float | None = None,
                        directions: int = SCAN_DIRECTIONS) -> SymmetryResult:
    """Best direction, profile and RMS residual of ``u`` over B_R.

    Directions are scanned over [0, pi) only: omega and -omega give the same
    fit, hence the same residual.
    """
    dom = u.domain
    if dom.n != 2:
        raise UsageError("the symmetry diagnostic needs a 2D grid function")
    radius = dom.R_eff if region is None else region
    mask = dom.radii() < radius
    pts = dom.coords()[mask]
    vals = u.values[mask]
    h = dom.h

    def residual(angle):
        return profile_fit(pts, vals, direction(angle % math.pi), h)[0]

    step = math.pi / directions
    angles = np.arange(directions) * step
    res = np.array([residual(a) for a in angles])
    j = int(np.argmin(res))
    opt = minimize_scalar(residual, bounds=(angles[j] - step, angles[j] + step), method="bounded",
                          options={"xatol": REFINE_TOL})
    if opt.fun < res[j]:
        best, rbest = float(opt.x), float(opt.fun)
    else:
        best, rbest = float(angles[j]), float(res[j])
    best, _ = _polish(residual, best, rbest)
    best %= math.pi
    omega = direction(best)
    r, table = profile_fit(pts, vals, omega, h)
    return SymmetryResult(omega, best, r, table, np.column_stack([angles, res]))
