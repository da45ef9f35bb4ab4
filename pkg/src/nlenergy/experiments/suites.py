"""Randomised property suites: convexity, min/max, first variation, appendix inequalities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..energy import EnergyModel, QuadratureConfig, _pair_sum, total_energy
from ..grid import Domain, FarField, GridFunction
from ..kernels import G_fast, G_infinity, Gcal_fast, KernelParams, g_fast
from ..minimize import submodularity_gap
from ..potentials import Potential


@dataclass
class SuiteResult:
    name: str
    checks: dict = field(default_factory=dict)      # check name -> (passed, worst margin, count)

    def add(self, check: str, margins) -> None:
        """Record margins rhs - lhs (already scaled); negative means violated."""
        margins = np.atleast_1d(np.asarray(margins, dtype=float))
        worst = float(np.min(margins)) if margins.size else 0.0
        prev = self.checks.get(check)
        if prev is not None:
            worst = min(worst, prev[1])
            count = prev[2] + margins.size
            ok = prev[0] and bool(np.all(margins >= 0.0))
        else:
            count = margins.size
            ok = bool(np.all(margins >= 0.0))
        self.checks[check] = (ok, worst, count)

    @property
    def passed(self) -> bool:
        return all(v[0] for v in self.checks.values())

    def to_text(self) -> str:
        lines = [f"suite: {self.name}"]
        for key, (ok, worst, count) in self.checks.items():
            lines.append(f"{key}: {'pass' if ok else 'fail'} samples={count} worst_margin={worst:.17g}")
        lines.append(f"verdict: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def _rel_margin(lhs, rhs, slack):
    """(rhs - lhs) / scale + slack, so that lhs <= rhs within relative slack gives >= 0."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    return (rhs - lhs) / scale + slack


# -- convexity and the helper-function bounds --------------------------------------

def convexity_suite(k: KernelParams, sample_count: int = 10_000, seed: int = 0,
                    slack: float = 1e-10) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult(f"convexity {k.family} n={k.n} s={k.s:g} p={k.p:g}")
    N = sample_count
    lam = rng.uniform(0.0, 1.0, N)
    t = rng.uniform(-4.0, 4.0, N)
    tau = rng.uniform(-4.0, 4.0, N)
    r = np.exp(rng.uniform(math.log(0.1), math.log(10.0), N))
    if k.n == 1:
        x = (r * rng.choice([-1.0, 1.0], N))[:, None]
    else:
        th = rng.uniform(0.0, 2.0 * math.pi, N)
        x = np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)
    lhs = k.F(lam * t + (1.0 - lam) * tau, x)
    rhs = lam * k.F(t, x) + (1.0 - lam) * k.F(tau, x)
    res.add("convexity in t", _rel_margin(lhs, rhs, slack))
    if k.family == "meanCurvature":
        n, s = k.n, k.s
        a = rng.uniform(0.0, 10.0, N)
        ga, Ga, Gca = g_fast(a, n, s), G_fast(a, n, s), Gcal_fast(a, n, s)
        res.add("a^2 g(a) <= a G(a)", _rel_margin(a * a * ga, a * Ga, slack))
        res.add("a G(a) <= 2 Gcal(a)", _rel_margin(a * Ga, 2.0 * Gca, slack))
        rho = rng.uniform(-10.0, 10.0, N)
        g = g_fast(rho, n, s)
        res.add("0 < g <= 1", np.minimum(g, _rel_margin(g, 1.0, slack)))
        Ginf = G_infinity(n, s)
        res.add("|G| < integral of g", _rel_margin(np.abs(G_fast(rho, n, s)), 2.0 * Ginf, 0.0))
        Gc = Gcal_fast(rho, n, s)
        res.add("0 <= Gcal <= G(inf) |t|", np.minimum(Gc + slack, _rel_margin(Gc, Ginf * np.abs(rho), slack)))
        res.add("Gcal(tau) >= c_*(|tau| - 1)", _rel_margin(k.c_star * (np.abs(rho) - 1.0), Gc, slack))
    return res


# -- min/max inequality ---------------------------------------------------------------

def random_pair(dom: Domain, rng, farfield: FarField = FarField.constant(0.0)):
    """Two random functions in [-1, 1] sharing the far field; exteriors differ."""
    u = GridFunction(dom, rng.uniform(-1.0, 1.0, dom.shape), farfield)
    v = GridFunction(dom, rng.uniform(-1.0, 1.0, dom.shape), farfield)
    return u, v


def submodularity_suite(k: KernelParams, pot: Potential, pairs: int = 100, seed: int = 0,
                        dom: Domain | None = None, slack: float = 1e-10,
                        q: QuadratureConfig = QuadratureConfig(tail_policy="quadrature_1d")) -> SuiteResult:
    rng = np.random.default_rng(seed)
    dom = dom or Domain(k.n, 2.0, 4.0, 0.25 if k.n == 1 else 0.5)
    res = SuiteResult(f"submodularity {k.family} n={k.n} s={k.s:g} p={k.p:g}")
    margins = []
    for _ in range(pairs):
        u, v = random_pair(dom, rng)
        gap = submodularity_gap(u, v, k, pot, q)
        scale = abs(total_energy(u, k, pot, q).total) + abs(total_energy(v, k, pot, q).total)
        margins.append(slack - gap / scale)
    res.add("E(min) + E(max) <= E(u) + E(v)", margins)
    return res


# -- first variation against finite differences ----------------------------------------

def gradient_check(k: KernelParams, pot: Potential, nodes: int = 20, seed: int = 0,
                   eps: float = 1e-6, tol: float = 1e-5, dom: Domain | None = None,
                   q: QuadratureConfig = QuadratureConfig(tail_policy="quadrature_1d")) -> SuiteResult:
    rng = np.random.default_rng(seed)
    dom = dom or Domain(k.n, 2.0, 4.0, 0.125 if k.n == 1 else 0.5)
    u = GridFunction(dom, rng.uniform(-0.9, 0.9, dom.shape), FarField.constant(0.3))
    model = EnergyModel(u, k, pot, q)
    x = u.values.ravel()[model.I]
    g = model.gradient(x)
    picks = rng.choice(len(x), size=min(nodes, len(x)), replace=False)
    res = SuiteResult(f"gradient {k.family} n={k.n} s={k.s:g} p={k.p:g}")
    margins = []
    for i in picks:
        xp, xm = x.copy(), x.copy()
        xp[i] += eps
        xm[i] -= eps
        fd = (model.energy(xp).total - model.energy(xm).total) / (2.0 * eps)
        rel = abs(fd - g[i]) / max(abs(g[i]), 1e-300)
        margins.append(tol - rel)
    res.add("central difference vs gradient", margins)
    return res


# -- appendix inequalities ---------------------------------------------------------------

def _lattice(n, radius, h):
    cells = int(math.ceil(radius / h))
    ax = (np.arange(-cells, cells) + 0.5) * h
    pts = ax[:, None] if n == 1 else np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
    return pts[np.linalg.norm(pts, axis=-1) < radius]


def appendix_inequality_suite(sample_count: int = 50, seed: int = 0, n: int = 1,
                              s: float = 0.5, p: float = 2.0, slack: float = 1e-9) -> SuiteResult:
    """Both sides of the L^p bound on nested balls and of the fractional Poincare inequality.

    Balls Omega = B_r1 inside O = B_r2 are sampled on a lattice; measures are
    node counts times h^n and diameters are 2 r.
    """
    from ..kernels import p_laplacian
    rng = np.random.default_rng(seed)
    k = p_laplacian(n, s, p)
    order = n + s * p
    res = SuiteResult(f"appendix n={n} s={s:g} p={p:g}")
    for trial in range(sample_count):
        h = 0.25 if n == 1 else 0.5
        r2 = float(rng.uniform(2.0, 4.0))
        r1 = float(rng.uniform(0.4, 0.8)) * r2
        pts = _lattice(n, r2, h)
        inner = np.linalg.norm(pts, axis=-1) < r1
        u = rng.uniform(-1.0, 1.0, len(pts)) * rng.uniform(0.1, 3.0)
        if trial % 5 == 0:
            u[~inner] = 0.0          # vanishing outside Omega
        w = h ** n
        vol_in = np.count_nonzero(inner) * w
        vol_ring = np.count_nonzero(~inner) * w
        ui, uo = u[inner], u[~inner]
        # L^p bound on Omega through the ring O minus Omega
        lhs_lp = math.fsum((np.abs(ui) ** p).tolist()) * w
        cross = _pair_sum(k, pts[inner], ui, pts[~inner], uo, False) * w * w
        ring_norm = math.fsum((np.abs(uo) ** p).tolist()) * w
        rhs_lp = 2.0 ** (p - 1.0) / vol_ring * ((2.0 * r2) ** order * cross + vol_in * ring_norm)
        res.add("L^p bound on Omega", _rel_margin(lhs_lp, rhs_lp, slack))
        # fractional Poincare inequality on Omega
        mean = math.fsum(ui.tolist()) / len(ui)
        lhs_pc = (math.fsum((np.abs(ui - mean) ** p).tolist()) * w) ** (1.0 / p)
        semi = (_pair_sum(k, pts[inner], ui, pts[inner], ui, True) * w * w) ** (1.0 / p)
        rhs_pc = ((2.0 * r1) ** order / vol_in) ** (1.0 / p) * semi
        res.add("fractional Poincare", _rel_margin(lhs_pc, rhs_pc, slack))
    return res
