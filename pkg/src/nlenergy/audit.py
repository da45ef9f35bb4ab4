"""Sampling auditor for the structural assumptions on the interaction function.

Each item is an inequality (or smoothness property) that F must satisfy for
every t in R and x in R^n minus the origin. The auditor draws deterministic
samples from bounded ranges and reports, per item, whether any sample violates
the property beyond a relative tolerance, together with the worst sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelParams

T_MAX = 4.0
X_MIN, X_MAX = 0.1, 10.0
REL_TOL = 1e-9
MIN_GAP = 1e-6

ITEMS = ("2.1", "2.2", "2.3", "2.4", "2.5", "2.6", "2.7", "2.8", "2.9", "2.10", "2.11", "4.14")
DESCRIPTIONS = {
    "2.1": "symmetry F(t,x) = F(-t,x) = F(-t,-x)",
    "2.2": "monotone in |t|",
    "2.3": "monotone decreasing in |x|",
    "2.4": "scaling F(t, a x) <= a^(-n-sp-1) F(t, x)",
    "2.5": "integrability sandwich with c_*, c^*",
    "2.6": "C^2 in x",
    "2.7": "|dF/dx_i| <= c1 F / |x|",
    "2.8": "|d2F/dx_i^2| <= c2 F / |x|^2",
    "2.9": "C^1 in t",
    "2.10": "|dF/dt| <= c3 |t|^(p-1) / |x|^(n+sp)",
    "2.11": "dF/dt strictly increasing in t",
    "4.14": "convexity in t",
}


@dataclass
class AuditItem:
    item: str
    passed: bool
    margin: float          # worst (rhs - lhs) / scale; negative means violated
    worst: dict = field(default_factory=dict)


@dataclass
class AuditReport:
    family: str
    n: int
    s: float
    p: float
    sample_count: int
    seed: int
    items: list

    @property
    def passed(self) -> bool:
        return all(it.passed for it in self.items)

    def assumption_items(self):
        return [it for it in self.items if it.item != "4.14"]

    def item(self, key: str) -> AuditItem:
        for it in self.items:
            if it.item == key:
                return it
        raise KeyError(key)

    def to_text(self) -> str:
        ok = sum(it.passed for it in self.assumption_items())
        total = len(self.assumption_items())
        lines = [f"audit family={self.family} n={self.n} s={self.s:.17g} p={self.p:.17g} "
                 f"samples={self.sample_count} seed={self.seed}"]
        for it in self.items:
            status = "PASS" if it.passed else "FAIL"
            lines.append(f"({it.item}) {status} margin={it.margin:.6e}  {DESCRIPTIONS[it.item]}")
        lines.append(f"assumption items passed: {ok}/{total}")
        conv = self.item("4.14")
        lines.append(f"convexity (4.14): {'PASS' if conv.passed else 'FAIL'}")
        lines.append("")
        lines.append("[results]")
        for it in self.items:
            worst = ";".join(f"{k}={_fmt(v)}" for k, v in it.worst.items())
            lines.append(f"item={it.item} status={'pass' if it.passed else 'fail'} "
                         f"margin={it.margin:.17g} worst={worst}")
        return "\n".join(lines) + "\n"


def _fmt(v):
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    return ",".join(f"{x:.17g}" for x in arr)


def _directions(rng, size, n):
    if n == 1:
        return rng.choice([-1.0, 1.0], size=size)[:, None]
    theta = rng.uniform(0.0, 2.0 * np.pi, size=size)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _points(rng, size, n):
    # log-uniform radii in [X_MIN, X_MAX]
    r = np.exp(rng.uniform(np.log(X_MIN), np.log(X_MAX), size=size))
    return r[:, None] * _directions(rng, size, n)


def _leq(lhs, rhs, rel_tol=REL_TOL):
    """Margins of lhs <= rhs, relative to the larger magnitude (>= tiny)."""
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
    margin = (rhs - lhs) / scale
    return margin, margin >= -rel_tol


def _item(key, margin, ok, samples):
    idx = int(np.argmin(margin))
    worst = {name: np.asarray(arr)[idx] for name, arr in samples.items()}
    return AuditItem(key, bool(np.all(ok)), float(margin[idx]), worst)


def audit_assumptions(k: KernelParams, sample_count: int = 10_000, seed: int = 0,
                      rel_tol: float = REL_TOL) -> AuditReport:
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    N, n = sample_count, k.n
    t = rng.uniform(-T_MAX, T_MAX, size=N)
    t2 = rng.uniform(-T_MAX, T_MAX, size=N)
    x = _points(rng, N, n)
    x2 = _points(rng, N, n)
    alpha = 1.0 - rng.uniform(0.0, 1.0, size=N)
    lam = rng.uniform(0.0, 1.0, size=N)
    items = []

    F = k.F(t, x)

    # (2.1) symmetry
    Fa, Fb = k.F(-t, x), k.F(-t, -x)
    diff = np.maximum(np.abs(F - Fa), np.abs(F - Fb)) / np.maximum(np.abs(F), 1e-300)
    items.append(_item("2.1", -diff, diff <= rel_tol, {"t": t, "x": x}))

    # (2.2) |t1| <= |t2|  =>  F(t1, x) <= F(t2, x)
    lo = np.where(np.abs(t) <= np.abs(t2), t, t2)
    hi = np.where(np.abs(t) <= np.abs(t2), t2, t)
    m, ok = _leq(k.F(lo, x), k.F(hi, x), rel_tol)
    items.append(_item("2.2", m, ok, {"t1": lo, "t2": hi, "x": x}))

    # (2.3) |x1| >= |x2|  =>  F(t, x1) <= F(t, x2)
    swap = (np.linalg.norm(x, axis=-1) < np.linalg.norm(x2, axis=-1))[:, None]
    far = np.where(swap, x2, x)
    near = np.where(swap, x, x2)
    m, ok = _leq(k.F(t, far), k.F(t, near), rel_tol)
    items.append(_item("2.3", m, ok, {"t": t, "x1": far, "x2": near}))

    # (2.4) scaling in x
    m, ok = _leq(k.F(t, alpha[:, None] * x), alpha ** (-k.order - 1.0) * F, rel_tol)
    items.append(_item("2.4", m, ok, {"t": t, "x": x, "alpha": alpha}))

    # (2.5) sandwich
    r = np.linalg.norm(x, axis=-1)
    pw = np.abs(t) ** k.p
    lower = k.c_star * (pw / r ** k.order - r ** -(k.order - k.p))
    upper = k.c_upper * pw / r ** k.order
    m1, ok1 = _leq(lower, F, rel_tol)
    m2, ok2 = _leq(F, upper, rel_tol)
    items.append(_item("2.5", np.minimum(m1, m2), ok1 & ok2, {"t": t, "x": x}))

    # (2.6) C^2 in x: second derivative matches the difference quotient of the
    # first derivative and stays finite
    d1 = k.dF_dx(t, x)
    d2 = k.d2F_dx2(t, x)
    hstep = 1e-5 * r[:, None]
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        fd = (k.dF_dx(t, x + hstep * e)[:, i] - k.dF_dx(t, x - hstep * e)[:, i]) / (2.0 * hstep[:, 0])
        scale = np.abs(d2[:, i]) + F / r ** 2 + 1e-300
        cols.append(-np.abs(fd - d2[:, i]) / scale)
    m = np.min(np.stack(cols, axis=-1), axis=-1)
    ok = np.isfinite(d2).all(axis=-1) & (m >= -1e-4)
    items.append(_item("2.6", m, ok, {"t": t, "x": x}))

    # (2.7), (2.8) derivative growth in x
    m7 = np.min(_leq(np.abs(d1), (k.c1 * F / r)[:, None], rel_tol)[0], axis=-1)
    items.append(_item("2.7", m7, m7 >= -rel_tol, {"t": t, "x": x}))
    m8 = np.min(_leq(np.abs(d2), (k.c2 * F / r ** 2)[:, None], rel_tol)[0], axis=-1)
    items.append(_item("2.8", m8, m8 >= -rel_tol, {"t": t, "x": x}))

    # (2.9) C^1 in t: derivative matches difference quotients away from 0, and
    # the jump of dF/dt across t = 0 decays as the probe approaches 0
    dt = k.dF_dt(t, x)
    step = 1e-5
    fd = (k.F(t + step, x) - k.F(t - step, x)) / (2.0 * step)
    away = np.abs(t) > 1e-2
    scale = np.abs(dt) + np.abs(F) + 1e-300
    m_fd = np.where(away, -np.abs(fd - dt) / scale, 0.0)

    def jump(eps):
        return np.abs(k.dF_dt(eps, x) - k.dF_dt(-eps, x)) * r ** k.order

    j_big, j_small = jump(1e-6), jump(1e-12)
    decays = (j_small <= 1e-6) | (j_small < 0.9 * j_big)
    m9 = np.where(decays, m_fd, -np.maximum(j_small, 1e-300))
    ok9 = np.isfinite(dt) & (m_fd >= -1e-5) & decays
    items.append(_item("2.9", m9, ok9, {"t": t, "x": x}))

    # (2.10) growth of dF/dt
    bound = k.c3 * np.abs(t) ** (k.p - 1.0) / r ** k.order
    m, ok = _leq(np.abs(dt), bound, rel_tol)
    items.append(_item("2.10", m, ok, {"t": t, "x": x}))

    # (2.11) strict monotonicity of dF/dt
    T = np.maximum(t, t2)
    tau = np.minimum(t, t2)
    tight = (T - tau) < MIN_GAP
    T = np.where(tight, tau + MIN_GAP, T)
    dT, dtau = k.dF_dt(T, x), k.dF_dt(tau, x)
    m = (dT - dtau) / np.maximum(np.maximum(np.abs(dT), np.abs(dtau)), 1e-300)
    items.append(_item("2.11", m, dT > dtau, {"T": T, "tau": tau, "x": x}))

    # (4.14) convexity in t
    mix = lam * t + (1.0 - lam) * t2
    m, ok = _leq(k.F(mix, x), lam * F + (1.0 - lam) * k.F(t2, x), rel_tol)
    items.append(_item("4.14", m, ok, {"t": t, "tau": t2, "lambda": lam, "x": x}))

    return AuditReport(k.family, k.n, k.s, k.p, sample_count, seed, items)
