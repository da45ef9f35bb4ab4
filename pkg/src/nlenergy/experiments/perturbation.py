"""Second-order effect of the slowly varying shifts y -> y +- phi(y/R) e_1.

For a state u and a bump phi supported in B_1, let u_(R,+-)(x) = u(Psi_(R,+-)^-1(x))
with Psi_(R,+-)(y) = y +- phi(y/R) e_1. The first-order changes of the energy
cancel in E(u_+) + E(u_-) - 2 E(u), which should decay like R^-2 E(u).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from ..energy import QuadratureConfig, total_energy
from ..errors import PreconditionError, UsageError
from ..grid import Domain, FarField, GridFunction, Profile, custom, sample_profile
from ..kernels import KernelParams
from ..potentials import Potential
from .fitting import check_radii, fit_power
from .report import ExperimentReport

INVERSE_TOL = 1e-12
MAX_FIXED_POINT = 500


@dataclass(frozen=True)
class Bump:
    """amplitude * exp(-1 / (1 - |z|^2)) on |z| < 1, zero outside."""

    amplitude: float = 1.0

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        r2 = z * z if z.ndim == 1 else np.sum(z * z, axis=-1)
        out = np.zeros(r2.shape)
        inside = r2 < 1.0
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - r2[inside]))
        return out

    @property
    def c1_norm(self) -> float:
        """sup |phi| + sup |grad phi|, the latter by dense sampling of the radial profile."""
        if self.amplitude == 0.0:
            return 0.0
        r = np.linspace(0.0, 1.0, 200001)[:-1]
        f = np.exp(-1.0 / (1.0 - r * r))
        df = f * 2.0 * r / (1.0 - r * r) ** 2
        return abs(self.amplitude) * (float(f.max()) + float(df.max()))


@dataclass(frozen=True)
class PerturbationRecord:
    R: float
    energy_plus: float
    energy_minus: float
    energy_base: float
    delta: float
    ratio: float


def inverse_shift(points: np.ndarray, bump: Bump, R: float, sign: int) -> np.ndarray:
    """Solve y + sign * phi(y/R) e_1 = x for y, by fixed-point iteration in y_1."""
    if bump.amplitude == 0.0:
        return points.copy()
    y = points.copy()
    for _ in range(MAX_FIXED_POINT):
        y1 = points[:, 0] - sign * bump(y / R)
        step = float(np.max(np.abs(y1 - y[:, 0]))) if len(y1) else 0.0
        y[:, 0] = y1
        if step <= INVERSE_TOL:
            return y
    raise PreconditionError("fixed-point inversion did not converge; R is too small for this bump")


def _grid_sampler(base: GridFunction):
    """Values of a lattice function off-lattice along e_1, by linear interpolation."""
    dom = base.domain
    ax = dom.axis()

    def sample(points):
        out = np.empty(len(points))
        if dom.n == 1:
            rows = [(np.arange(len(points)), base.values)]
        else:
            j = np.clip(np.round((points[:, 1] + dom.R_box) / dom.h - 0.5).astype(int), 0, dom.N - 1)
            rows = [(np.flatnonzero(j == c), base.values[:, c]) for c in np.unique(j)]
        for idx, line in rows:
            out[idx] = np.interp(points[idx, 0], ax, line)
        outside = np.abs(points[:, 0]) > ax[-1]
        if np.any(outside):
            out[outside] = base.farfield(points[outside])
        return out

    return sample


def perturbed_pair(base: Union[Profile, GridFunction], dom: Domain, bump: Bump, R: float):
    """Base state and u_(R,+), u_(R,-) sampled on ``dom``."""
    if isinstance(base, GridFunction):
        sample = _grid_sampler(base)
        u = base
    else:
        u = sample_profile(dom, base)

        def sample(points):
            return base.evaluate(points)
    pts = dom.coords().reshape(-1, dom.n)
    moved = dom.radii().ravel() < R
    out = []
    for sign in (1, -1):
        vals = u.values.ravel().copy()
        pre = inverse_shift(pts[moved], bump, R, sign)
        vals[moved] = sample(pre)
        out.append(GridFunction(dom, vals.reshape(dom.shape), u.farfield))
    return u, out[0], out[1]


def tanh_layer(R: float, center_fraction: float = 0.5, width: float = 1.0, n: int = 1) -> Profile:
    """tanh((x_1 - c R) / width), a layer placed where the bump has nonzero slope."""
    c = center_fraction * R
    e1 = np.zeros(n)
    e1[0] = 1.0
    ff = FarField.profile1d(e1, "layer_tanh", params=(width,), offset=c)
    return custom(lambda P: np.tanh((P[..., 0] - c) / width), ff)


def perturbation_experiment(k: KernelParams, pot: Potential, R_list,
                            base: Callable = tanh_layer, bump: Bump = Bump(),
                            h: float = 1.0 / 16.0, box_factor: float = 2.0,
                            q: QuadratureConfig = QuadratureConfig(tail_policy="quadrature_1d"),
                            slope_window: tuple = (-2.3, -1.7),
                            slack: float = 1e-10) -> ExperimentReport:
    """``base(R)`` returns the state for radius R (a Profile or a GridFunction).

    The lattice spacing h is the same for every R, chosen so that h <= 4/R on
    the default radii. The slope of log(delta/E) against log R is fitted over all R.
    """
    R = check_radii(R_list)
    records = []
    for r in R:
        r = float(r)
        if not r > 2.0 * bump.c1_norm:
            raise PreconditionError(f"R = {r} must exceed 2 ||phi||_C1 = {2 * bump.c1_norm}")
        dom = Domain(k.n, r, box_factor * r, h)
        u, up, um = perturbed_pair(base(r), dom, bump, r)
        E = total_energy(u, k, pot, q).total
        Ep = total_energy(up, k, pot, q).total
        Em = total_energy(um, k, pot, q).total
        delta = (Ep + Em) - 2.0 * E
        records.append(PerturbationRecord(r, Ep, Em, E, delta, delta / E))
    ratios = np.array([rec.ratio for rec in records])
    nonneg = all(rec.delta >= -slack * abs(rec.energy_base) for rec in records)
    notes = [f"delta >= -{slack:g} E in every record: {nonneg}"]
    if np.all(ratios > 0.0):
        fit = fit_power(R, ratios)
        slope, err = fit.exponent, fit.stderr
        passed = slope_window[0] <= slope <= slope_window[1] and nonneg
    else:
        slope, err, passed = math.nan, math.nan, False
        notes.append("some ratios are not positive; no log fit")
    rows = [rec.__dict__ for rec in records]
    params = {"n": k.n, "s": k.s, "p": k.p, "kernel": k.family, "potential": pot.family,
              "h": h, "bump_amplitude": bump.amplitude}
    rep = ExperimentReport("perturbation", params, list(R), list(ratios), -2.0, slope, err,
                           passed, 0.5 * (slope_window[1] - slope_window[0]), rows, notes)
    rep.records = records
    return rep
