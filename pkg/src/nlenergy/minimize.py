"""Box-constrained minimisation of the discrete energy over the interior nodes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .energy import EnergyBreakdown, EnergyModel, QuadratureConfig, total_energy
from .errors import InputError, UsageError
from .grid import GridFunction, min_max_combine
from .kernels import KernelParams
from .potentials import Potential

MAX_HALVINGS = 60


@dataclass(frozen=True)
class MinimizeConfig:
    max_iters: int = 5000
    grad_tol: Optional[float] = None      # default 1e-8 h^n
    step0: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    box_bounds: Optional[tuple] = (-1.0, 1.0)

    def __post_init__(self):
        if self.max_iters < 1:
            raise UsageError("max_iters must be >= 1")
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise UsageError("grad_tol must be positive")
        if not self.step0 > 0:
            raise UsageError("step0 must be positive")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise UsageError("backtrack_factor must lie in (0, 1)")
        if not 0.0 < self.armijo_c < 1.0:
            raise UsageError("armijo_c must lie in (0, 1)")
        if self.box_bounds is not None:
            lo, hi = self.box_bounds
            if not lo < hi:
                raise UsageError("box_bounds must satisfy lo < hi")


@dataclass(frozen=True)
class TraceRow:
    iter: int
    energy: float
    grad_norm: float
    step: float


@dataclass
class MinimizeResult:
    u: GridFunction
    trace: list
    status: str                     # converged | max_iters | stalled
    energy: EnergyBreakdown

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def trace_csv(self) -> str:
        lines = ["iter,energy,grad_norm,step"]
        lines += [f"{r.iter},{r.energy:.17g},{r.grad_norm:.17g},{r.step:.17g}" for r in self.trace]
        return "\n".join(lines) + "\n"


def projected_gradient(x, g, bounds):
    if bounds is None:
        return g
    lo, hi = bounds
    blocked = ((x <= lo) & (g > 0.0)) | ((x >= hi) & (g < 0.0))
    return np.where(blocked, 0.0, g)


def minimize(u0: GridFunction, k: KernelParams, pot: Potential,
             cfg: MinimizeConfig = MinimizeConfig(),
             q: QuadratureConfig = QuadratureConfig(), threads: int = 1,
             model: Optional[EnergyModel] = None) -> MinimizeResult:
    """Projected gradient descent with Armijo backtracking and Barzilai-Borwein trial steps.

    Steps are taken along -g / h^n so that step sizes do not depend on the cell
    volume. Only interior values move; exterior nodes keep the bits of ``u0``.
    """
    model = model or EnergyModel(u0, k, pot, q, threads)
    w = model.w
    bounds = cfg.box_bounds
    tol = cfg.grad_tol if cfg.grad_tol is not None else 1e-8 * w
    x = u0.values.ravel()[model.I].copy()
    if bounds is not None and (np.any(x < bounds[0]) or np.any(x > bounds[1])):
        raise InputError("initial interior values violate the box bounds")

    def clip(v):
        return v if bounds is None else np.clip(v, bounds[0], bounds[1])

    try:
        br, g = model.evaluate(x)
    except InputError:
        raise InputError("energy of the initial state is not finite") from None
    E = br.total
    pg = projected_gradient(x, g, bounds)
    gnorm = float(np.max(np.abs(pg))) if pg.size else 0.0
    trace = [TraceRow(0, E, gnorm, 0.0)]
    alpha = cfg.step0
    status = "max_iters"
    for it in range(1, cfg.max_iters + 1):
        if gnorm <= tol:
            status = "converged"
            break
        accepted = False
        a = alpha
        for _ in range(MAX_HALVINGS + 1):
            x_new = clip(x - a * g / w)
            dx = x_new - x
            decrease = float(np.dot(g, dx))
            if decrease >= 0.0:
                a *= cfg.backtrack_factor
                continue
            try:
                br_new, g_new = model.evaluate(x_new)
            except InputError:
                a *= cfg.backtrack_factor
                continue
            if br_new.total <= E + cfg.armijo_c * decrease:
                accepted = True
                break
            a *= cfg.backtrack_factor
        if not accepted:
            status = "stalled"
            break
        # Barzilai-Borwein estimate for the next trial step
        dg = g_new - g
        sy = float(np.dot(dx, dg))
        alpha = w * float(np.dot(dx, dx)) / sy if sy > 0.0 else 2.0 * a
        if not math.isfinite(alpha) or alpha <= 0.0:
            alpha = cfg.step0
        x, g, br, E = x_new, g_new, br_new, br_new.total
        pg = projected_gradient(x, g, bounds)
        gnorm = float(np.max(np.abs(pg)))
        trace.append(TraceRow(it, E, gnorm, a))
    else:
        if gnorm <= tol:
            status = "converged"
    return MinimizeResult(model.with_values(x), trace, status, br)


# -- probes built on the energy ------------------------------------------------------

def submodularity_gap(u: GridFunction, v: GridFunction, k: KernelParams, pot: Potential,
                      q: QuadratureConfig = QuadratureConfig()) -> float:
    """[E(min) + E(max)] - [E(u) + E(v)]."""
    m, M = min_max_combine(u, v)
    e = [total_energy(f, k, pot, q).total for f in (m, M, u, v)]
    return (e[0] + e[1]) - (e[2] + e[3])


@dataclass
class ComparisonReport:
    min_difference: float
    violation_measure: float
    tolerance: float
    status: tuple
    u1: GridFunction = field(repr=False)
    u2: GridFunction = field(repr=False)

    @property
    def ordered(self) -> bool:
        return self.violation_measure == 0.0


def ordered_data_comparison(phi1: GridFunction, phi2: GridFunction, k: KernelParams,
                            pot: Potential, cfg: MinimizeConfig = MinimizeConfig(),
                            q: QuadratureConfig = QuadratureConfig(),
                            tol: float = 1e-6) -> ComparisonReport:
    """Minimise from both data and measure where u1* < u2* - tol."""
    if phi1.domain != phi2.domain:
        raise UsageError("data live on different domains")
    if np.any(phi1.values < phi2.values):
        raise UsageError("ordered comparison needs phi1 >= phi2 at every node")
    r1 = minimize(phi1, k, pot, cfg, q)
    r2 = minimize(phi2, k, pot, cfg, q)
    diff = r1.u.values - r2.u.values
    bad = np.count_nonzero(diff < -tol)
    return ComparisonReport(float(np.min(diff)), bad * phi1.domain.cell_volume, tol,
                            (r1.status, r2.status), r1.u, r2.u)
