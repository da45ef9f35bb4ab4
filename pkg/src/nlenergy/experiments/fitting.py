"""Least-squares growth fits on log-log data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import UsageError

MIN_RADII = 4


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    stderr: float
    log_prefactor: float
    rss: float          # residual sum of squares in log E


@dataclass(frozen=True)
class LogCorrectedFit:
    exponent: float
    log_coefficient: float
    log_prefactor: float
    rss: float          # residual sum of squares in log E


@dataclass(frozen=True)
class LogModelFit:
    a: float
    c: float
    rss: float          # residual sum of squares in log E


def predicted_exponent(n: int, sp: float) -> tuple:
    """Growth exponent of the energy in B_R and the regime name."""
    if math.isclose(sp, 1.0, rel_tol=0.0, abs_tol=1e-12):
        return float(n - 1), "log"
    if sp > 1.0:
        return float(n - 1), "sp>1"
    return float(n - sp), "sp<1"


def check_radii(R_list) -> np.ndarray:
    R = np.asarray(R_list, dtype=float)
    if R.ndim != 1 or len(R) < MIN_RADII:
        raise UsageError(f"fit requires ≥ {MIN_RADII} radii")
    if np.any(R <= 0) or np.any(np.diff(R) <= 0):
        raise UsageError("radii must be positive and strictly increasing")
    return R


def fit_power(R, E) -> PowerFit:
    """log E = exponent * log R + log_prefactor."""
    x = np.log(np.asarray(R, dtype=float))
    y = np.log(np.asarray(E, dtype=float))
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    rss = float(resid @ resid)
    dof = len(x) - 2
    if dof > 0:
        sigma2 = rss / dof
        cov = sigma2 * np.linalg.inv(A.T @ A)
        stderr = math.sqrt(max(cov[0, 0], 0.0))
    else:
        stderr = 0.0
    return PowerFit(float(coef[0]), stderr, float(coef[1]), rss)


def fit_log_model(R, E, n: int) -> LogModelFit:
    """E = R^(n-1) (a + c log R), fitted linearly, residual measured in log E."""
    R = np.asarray(R, dtype=float)
    E = np.asarray(E, dtype=float)
    scaled = E / R ** (n - 1)
    A = np.column_stack([np.ones_like(R), np.log(R)])
    coef, *_ = np.linalg.lstsq(A, scaled, rcond=None)
    model = R ** (n - 1) * (A @ coef)
    if np.any(model <= 0.0):
        return LogModelFit(float(coef[0]), float(coef[1]), math.inf)
    resid = np.log(E) - np.log(model)
    return LogModelFit(float(coef[0]), float(coef[1]), float(resid @ resid))


def fit_log_corrected(R, E) -> LogCorrectedFit:
    """log E = exponent * log R + log_coefficient * log log R + log_prefactor (needs R > 1)."""
    x = np.log(np.asarray(R, dtype=float))
    if np.any(x <= 0.0):
        raise UsageError("the log-corrected fit needs every radius > 1")
    y = np.log(np.asarray(E, dtype=float))
    A = np.column_stack([x, np.log(x), np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return LogCorrectedFit(float(coef[0]), float(coef[1]), float(coef[2]), float(resid @ resid))
