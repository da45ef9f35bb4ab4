"""Discrete nonlocal energy, seminorms and first variation.

Let I be the lattice nodes in B_R and E the remaining nodes of the box. With
w = h^n the cell volume, the discrete energy is

    ii  = sum_{i in I} sum_{j in I, j != i} F(u_i - u_j, x_i - x_j) w^2
    ie  = 2 sum_{i in I} sum_{j in E} F(u_i - u_j, x_i - x_j) w^2 + 2 sum_{i in I} T_i(u_i) w
    pot = sum_{i in I} W(u_i) w

where T_i is the tail integral beyond the box (see :mod:`nlenergy.tail`).
Pair sums are evaluated either directly (row blocks of the dense interaction
matrix) or, for the quadratic fractional kernel, by FFT convolution.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import InputError, UsageError
from .grid import GridFunction
from .kernels import KernelParams
from .potentials import Potential
from .tail import TailModel

SELF_PAIR = ("exclude", "midpoint_correction")
SUMMATION = ("fixed_order", "compensated")
BACKENDS = ("auto", "direct", "fft")
BLOCK = 1 << 20          # matrix entries per row block; independent of thread count
FFT_MIN_NODES = 4096


@dataclass(frozen=True)
class QuadratureConfig:
    self_pair_policy: str = "exclude"
    tail_policy: str = "analytic_constant"
    summation: str = "compensated"
    backend: str = "auto"
    tail_radial_nodes: int = 64
    tail_angular_nodes: int = 64

    def __post_init__(self):
        if self.self_pair_policy not in SELF_PAIR:
            raise UsageError(f"unknown self_pair_policy {self.self_pair_policy!r}")
        if self.summation not in SUMMATION:
            raise UsageError(f"unknown summation {self.summation!r}")
        if self.backend not in BACKENDS:
            raise UsageError(f"unknown backend {self.backend!r}")


@dataclass(frozen=True)
class EnergyBreakdown:
    R: float
    h: float
    interior_interior: float
    interior_exterior: float
    potential: float
    total: float
    tail: float = 0.0
    tail_is_envelope: bool = False

    @property
    def kinetic(self) -> float:
        return self.interior_interior + self.interior_exterior

    CSV_HEADER = "R,h,interior_interior,interior_exterior,potential,total"

    def csv_row(self) -> str:
        vals = (self.R, self.h, self.interior_interior, self.interior_exterior,
                self.potential, self.total)
        return ",".join(f"{v:.17g}" for v in vals)


def reduce_sum(values, summation: str = "compensated") -> float:
    values = np.asarray(values, dtype=float).ravel()
    if summation == "compensated":
        return math.fsum(values.tolist())
    acc = 0.0
    for v in values.tolist():
        acc += v
    return acc


class EnergyModel:
    """Energy of functions sharing the exterior data of ``datum``.

    Geometry, exterior convolutions and tail moments are computed once, so the
    model can be evaluated repeatedly on new interior values during minimisation.
    """

    def __init__(self, datum: GridFunction, k: KernelParams, pot: Potential,
                 q: QuadratureConfig = QuadratureConfig(), threads: int = 1):
        dom = datum.domain
        if k.n != dom.n:
            raise UsageError(f"kernel dimension {k.n} does not match domain dimension {dom.n}")
        if q.self_pair_policy == "midpoint_correction" and not (k.n == 1 and k.family == "pLaplacian"):
            raise UsageError("midpoint_correction is implemented for 1D pLaplacian kernels only")
        self.datum, self.domain, self.k, self.pot, self.q = datum, dom, k, pot, q
        self.threads = max(1, int(threads))
        self.w = dom.cell_volume
        self.mask = dom.interior_mask().ravel()
        self.I = np.flatnonzero(self.mask)
        self.E = np.flatnonzero(~self.mask)
        self.flat = datum.values.ravel().copy()
        self.lattice = np.indices(dom.shape).reshape(dom.n, -1).T
        self.points = dom.coords().reshape(-1, dom.n)
        self.tail = TailModel(k, datum.farfield, q.tail_policy, dom.R_box, self.points[self.I],
                              q.tail_radial_nodes, q.tail_angular_nodes)
        self.backend = self._choose_backend()
        if self.backend == "fft":
            self._fft_setup()
        else:
            self._direct_setup()

    # -- backend selection --------------------------------------------------------

    def _choose_backend(self):
        quadratic = self.k.family == "pLaplacian" and self.k.p == 2.0
        if self.q.backend == "fft":
            if not quadratic:
                raise UsageError("the fft backend requires the pLaplacian kernel with p = 2")
            return "fft"
        if self.q.backend == "auto" and quadratic and self.domain.size >= FFT_MIN_NODES:
            return "fft"
        return "direct"

    def full_values(self, interior: np.ndarray) -> np.ndarray:
        v = self.flat.copy()
        v[self.I] = interior
        return v

    # -- direct summation ------------------------------------------------------------

    def _direct_setup(self):
        dom = self.domain
        N = dom.N
        if self.k.radial:
            # |offset| * h for every lattice offset in (-(N-1) .. N-1)^n
            d = np.indices((2 * N - 1,) * dom.n).reshape(dom.n, -1).T - (N - 1)
            r = np.linalg.norm(d * dom.h, axis=-1)
            r[r == 0.0] = np.inf
            self.r_table = r.reshape((2 * N - 1,) * dom.n)
            if self.k.family == "pLaplacian":
                self.r_table = self.r_table ** -self.k.order
            # the row of node k is the window of the flipped table starting at N-1-k
            flipped = np.ascontiguousarray(self.r_table[(slice(None, None, -1),) * dom.n])
            self.windows = np.lib.stride_tricks.sliding_window_view(flipped, dom.shape)
        self.maskf = self.mask.astype(float)
        self.emaskf = 1.0 - self.maskf
        M = dom.size
        self.rows = max(1, BLOCK // M)
        self.blocks = [self.I[a:a + self.rows] for a in range(0, len(self.I), self.rows)]

    def _block_geometry(self, rows):
        N = self.domain.N
        if self.k.radial:
            start = N - 1 - self.lattice[rows]
            block = self.windows[tuple(start[:, i] for i in range(self.domain.n))]
            return block.reshape(len(rows), -1)
        off = self.lattice[rows][:, None, :] - self.lattice[None, :, :] + (N - 1)
        disp = (off - (N - 1)) * self.domain.h
        return disp

    def _block_terms(self, rows, u, want_energy, want_grad):
        """Per-row interior, exterior and gradient pair sums for one block."""
        k = self.k
        geo = self._block_geometry(rows)
        t = u[rows][:, None] - u[None, :]
        out = {}
        if k.family == "pLaplacian":
            # geo holds |x_i - x_j|^-(n+sp), zero on the diagonal
            if k.p == 2.0:
                if want_energy:
                    Fm = 0.5 * t * t * geo
                if want_grad:
                    dF = t * geo
            else:
                a = np.abs(t)
                ap = a ** (k.p - 1.0) * geo
                if want_energy:
                    Fm = a * ap / k.p
                if want_grad:
                    dF = np.sign(t) * ap
        elif k.radial:
            if want_energy:
                Fm = k.F_r(t, geo)
            if want_grad:
                dF = k.dF_dt_r(t, geo)
        else:
            self_pair = np.all(geo == 0.0, axis=-1)
            geo = np.where(self_pair[..., None], 1.0, geo)
            if want_energy:
                Fm = np.where(self_pair, 0.0, k.F(t, geo))
            if want_grad:
                dF = np.where(self_pair, 0.0, k.dF_dt(t, geo))
        if want_energy:
            out["ii"] = np.sum(Fm * self.maskf, axis=1)
            out["ie"] = np.sum(Fm * self.emaskf, axis=1)
        if want_grad:
            out["g"] = np.sum(dF, axis=1)
        return out

    def _direct_rows(self, u, want_energy, want_grad):
        if self.threads > 1 and len(self.blocks) > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                parts = list(ex.map(lambda b: self._block_terms(b, u, want_energy, want_grad),
                                    self.blocks))
        else:
            parts = [self._block_terms(b, u, want_energy, want_grad) for b in self.blocks]
        keys = parts[0].keys() if parts else []
        return {key: np.concatenate([p[key] for p in parts]) for key in keys}

    # -- FFT convolution (p = 2 pLaplacian) ------------------------------------

    def _fft_setup(self):
        dom = self.domain
        N, n = dom.N, dom.n
        L = 2 * N
        self.fft_shape = (L,) * n
        d = np.indices(self.fft_shape).reshape(n, -1).T
        d = np.where(d >= N, d - L, d)     # wrap-around offsets
        r = np.linalg.norm(d * dom.h, axis=-1).reshape(self.fft_shape)
        with np.errstate(divide="ignore"):
            K = np.where(r > 0.0, 1.0 / np.where(r > 0.0, r, 1.0) ** self.k.order, 0.0)
        # F = t^2 K / 2 and dF/dt = t K
        self.K_hat = sfft.rfftn(K)
        mI = self.mask.astype(float).reshape(dom.shape)
        mE = 1.0 - mI
        uE = (self.flat * ~self.mask).reshape(dom.shape)
        self.convI1 = self._conv(mI)
        self.convE = [self._conv(mE), self._conv(uE), self._conv(uE * uE)]

    def _conv(self, a):
        workers = self.threads
        pad = sfft.rfftn(a, s=self.fft_shape, workers=workers)
        full = sfft.irfftn(pad * self.K_hat, s=self.fft_shape, workers=workers)
        sl = tuple(slice(0, self.domain.N) for _ in range(self.domain.n))
        return full[sl].ravel()[self.I]

    def _fft_rows(self, u, want_energy, want_grad):
        dom = self.domain
        uI = u[self.I]
        field_u = np.zeros(dom.size)
        field_u[self.I] = uI
        cu = self._conv(field_u.reshape(dom.shape))
        cE1, cEu, cEu2 = self.convE
        out = {}
        if want_energy:
            field_u2 = np.zeros(dom.size)
            field_u2[self.I] = uI * uI
            cu2 = self._conv(field_u2.reshape(dom.shape))
            out["ii"] = 0.5 * (uI * uI * self.convI1 - 2.0 * uI * cu + cu2)
            out["ie"] = 0.5 * (uI * uI * cE1 - 2.0 * uI * cEu + cEu2)
        if want_grad:
            out["g"] = uI * (self.convI1 + cE1) - (cu + cEu)
        return out

    # -- midpoint self-cell correction (1D pLaplacian) --------------------------------

    def _self_cell(self, u):
        k, h = self.k, self.domain.h
        p, sp = k.p, k.sp
        coef = 2.0 * h ** (p + 1.0 - sp) / ((p - sp) * (p + 1.0 - sp)) / p
        N = self.domain.N
        i = self.I
        lo = np.clip(i - 1, 0, N - 1)
        hi = np.clip(i + 1, 0, N - 1)
        g = (u[hi] - u[lo]) / ((hi - lo) * h)
        corr = coef * np.abs(g) ** p
        # d corr_i / d g_i, scattered to the neighbours of i
        dg = coef * p * np.sign(g) * np.abs(g) ** (p - 1.0) / ((hi - lo) * h)
        grad = np.zeros(N)
        np.add.at(grad, hi, dg)
        np.add.at(grad, lo, -dg)
        return corr, grad[i]

    # -- public evaluators ------------------------------------------------------------

    def _rows(self, u, want_energy, want_grad):
        if self.backend == "fft":
            return self._fft_rows(u, want_energy, want_grad)
        return self._direct_rows(u, want_energy, want_grad)

    def energy(self, interior: np.ndarray) -> EnergyBreakdown:
        return self.evaluate(interior, gradient=False)[0]

    def gradient(self, interior: np.ndarray) -> np.ndarray:
        return self.evaluate(interior, energy=False)[1]

    def evaluate(self, interior: np.ndarray, energy: bool = True, gradient: bool = True):
        interior = np.asarray(interior, dtype=float)
        if interior.shape != self.I.shape:
            raise UsageError(f"expected {len(self.I)} interior values, got {interior.shape}")
        u = self.full_values(interior)
        rows = self._rows(u, energy, gradient)
        w = self.w
        red = self.q.summation
        br = g = None
        midpoint = self.q.self_pair_policy == "midpoint_correction"
        if midpoint:
            corr, dcorr = self._self_cell(u)
        if energy:
            ii_rows = rows["ii"] * w * w
            if midpoint:
                ii_rows = ii_rows + corr
            tail_rows = self.tail.value(interior) * w
            ii = reduce_sum(ii_rows, red)
            tail = 2.0 * reduce_sum(tail_rows, red)
            ie = 2.0 * reduce_sum(rows["ie"] * w * w, red) + tail
            potential = reduce_sum(self.pot.W(interior) * w, red)
            total = ii + ie + potential
            if not math.isfinite(total):
                raise InputError("energy is not finite")
            br = EnergyBreakdown(self.domain.R, self.domain.h, ii, ie, potential, total,
                                 tail, self.tail.envelope)
        if gradient:
            g = w * (2.0 * rows["g"] * w + 2.0 * self.tail.derivative(interior)
                     + self.pot.dW(interior))
            if midpoint:
                g = g + dcorr
        return br, g

    def kinetic_gradient(self, interior: np.ndarray) -> np.ndarray:
        u = self.full_values(np.asarray(interior, dtype=float))
        rows = self._rows(u, False, True)
        return self.w * (2.0 * rows["g"] * self.w + 2.0 * self.tail.derivative(interior))

    def with_values(self, interior: np.ndarray) -> GridFunction:
        return GridFunction(self.domain, self.full_values(interior).reshape(self.domain.shape),
                            self.datum.farfield, self.datum.bound)


def total_energy(u: GridFunction, k: KernelParams, pot: Potential,
                 q: QuadratureConfig = QuadratureConfig(), threads: int = 1) -> EnergyBreakdown:
    model = EnergyModel(u, k, pot, q, threads)
    return model.energy(u.values.ravel()[model.I])


def gradient(u: GridFunction, k: KernelParams, pot: Potential,
             q: QuadratureConfig = QuadratureConfig(), threads: int = 1) -> np.ndarray:
    """Gradient with respect to the interior nodal values, in row-major node order."""
    model = EnergyModel(u, k, pot, q, threads)
    return model.gradient(u.values.ravel()[model.I])


# -- seminorms -------------------------------------------------------------------

def _pair_sum(k: KernelParams, xa, ua, xb, ub, exclude_self):
    """sum_a sum_b |ua - ub|^p / |xa - xb|^(n+sp), row blocks, self pairs dropped."""
    rows = max(1, BLOCK // max(1, len(xb)))
    parts = []
    for a in range(0, len(xa), rows):
        r = np.linalg.norm(xa[a:a + rows, None, :] - xb[None, :, :], axis=-1)
        t = np.abs(ua[a:a + rows, None] - ub[None, :]) ** k.p
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(r > 0.0, t / np.where(r > 0.0, r, 1.0) ** k.order, 0.0)
        parts.append(np.sum(val, axis=1))
    return math.fsum(np.concatenate(parts).tolist()) if parts else 0.0


def gagliardo_seminorm(u: GridFunction, region: float, k: KernelParams) -> float:
    dom = u.domain
    if region > dom.R_box:
        raise UsageError("region radius exceeds the lattice box")
    mask = dom.radii().ravel() < region
    x = dom.coords().reshape(-1, dom.n)[mask]
    v = u.values.ravel()[mask]
    total = _pair_sum(k, x, v, x, v, True) * dom.cell_volume ** 2
    return total ** (1.0 / k.p)


def exterior_seminorm(u: GridFunction, k: KernelParams) -> float:
    """[u]_{R,phi}: pairs in B_R x (B_2R minus B_R), phi read from the exterior nodes."""
    dom = u.domain
    if dom.R_box < 2.0 * dom.R * (1.0 - 1e-12):
        raise UsageError("R_box must be at least 2R")
    r = dom.radii().ravel()
    inner = dom.interior_mask().ravel()
    ring = (~inner) & (r < 2.0 * dom.R_eff)
    x = dom.coords().reshape(-1, dom.n)
    v = u.values.ravel()
    total = _pair_sum(k, x[inner], v[inner], x[ring], v[ring], False) * dom.cell_volume ** 2
    return total ** (1.0 / k.p)
