"""Interaction of interior nodes with the region beyond the lattice box.

Two models are available. ``analytic_constant`` is the crude upper envelope
obtained from |x - y| >= |y|/2 for |x| <= R_box/2 < |y|; it only makes sense for a
constant far field. ``quadrature_1d`` integrates the true integrand over the
complement of the box with a tensor Gauss-Legendre rule in the variable
z = (rho_0/rho)^(sp), which maps the algebraic decay onto a bounded interval.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import UsageError
from .kernels import KernelParams, sphere_area

TAIL_POLICIES = ("analytic_constant", "quadrature_1d", "none")
CHUNK = 1 << 20


def exterior_rule(R_box: float, n: int, sp: float, radial_nodes: int = 48,
                  angular_nodes: int = 32):
    """Quadrature points and weights for the complement of [-R_box, R_box]^n."""
    z, wz = np.polynomial.legendre.leggauss(radial_nodes)
    z = 0.5 * (z + 1.0)
    wz = 0.5 * wz
    if n == 1:
        rho = R_box * z ** (-1.0 / sp)
        w = wz * R_box / sp * z ** (-1.0 / sp - 1.0)
        pts = np.concatenate([rho, -rho])[:, None]
        return pts, np.concatenate([w, w])
    # one sector per side of the square, angle measured from the side normal
    a, wa = np.polynomial.legendre.leggauss(angular_nodes)
    a = a * (math.pi / 4.0)
    wa = wa * (math.pi / 4.0)
    pts, wts = [], []
    for normal in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi):
        rho0 = R_box / np.cos(a)
        theta = normal + a
        rho = rho0[:, None] * z[None, :] ** (-1.0 / sp)
        w = (wa[:, None] * wz[None, :] * rho0[:, None] ** 2 / sp
             * z[None, :] ** (-2.0 / sp - 1.0))
        pts.append(np.stack([rho * np.cos(theta)[:, None], rho * np.sin(theta)[:, None]], axis=-1)
                   .reshape(-1, 2))
        wts.append(w.ravel())
    return np.concatenate(pts), np.concatenate(wts)


class TailModel:
    """Per-node tail integral T_i(u_i) = int_{beyond box} F(u_i - phi(y), x_i - y) dy."""

    def __init__(self, k: KernelParams, farfield, policy: str, R_box: float,
                 points: np.ndarray, radial_nodes: int = 48, angular_nodes: int = 32):
        if policy not in TAIL_POLICIES:
            raise UsageError(f"unknown tail policy {policy!r}")
        if policy != "none" and not farfield.evaluable:
            raise UsageError("far-field rule 'none' requires tail_policy = none")
        self.k = k
        self.policy = policy
        self.envelope = policy == "analytic_constant"
        self.points = points
        self.R_box = R_box
        self._sep = None
        if policy == "analytic_constant":
            if farfield.kind != "constant":
                raise UsageError("tail_policy analytic_constant needs a constant far field; "
                                 "use quadrature_1d for profile far fields")
            self.c = farfield.c
            self.coef = (k.c_upper * 2.0 ** k.order * sphere_area(k.n)
                         * R_box ** (-k.sp) / k.sp)
        elif policy == "quadrature_1d":
            self.y, self.w = exterior_rule(R_box, k.n, k.sp, radial_nodes, angular_nodes)
            self.phi = farfield(self.y)
            if k.family == "pLaplacian":
                self._sep = self._moments(farfield)

    def _moments(self, farfield):
        """Geometric moments for the pLaplacian, where F separates in t and x."""
        k = self.k
        constant = farfield.kind == "constant"
        m0 = np.empty(len(self.points))
        m1 = np.empty_like(m0)
        m2 = np.empty_like(m0)
        if k.n == 1 and constant:
            # closed form of int_{|y| > R_box} |x - y|^(-1-sp) dy
            x = self.points[:, 0]
            m0 = ((self.R_box - x) ** -k.sp + (self.R_box + x) ** -k.sp) / k.sp
            return ("constant", farfield.c, m0)
        step = max(1, CHUNK // len(self.y))
        for a in range(0, len(self.points), step):
            x = self.points[a:a + step]
            d = x[:, None, :] - self.y[None, :, :]
            r2 = np.einsum("ijk,ijk->ij", d, d)
            K = self.w[None, :] * r2 ** (-0.5 * k.order)
            m0[a:a + step] = K.sum(axis=1)
            if not constant and k.p == 2.0:
                m1[a:a + step] = K @ self.phi
                m2[a:a + step] = K @ (self.phi ** 2)
        if constant:
            return ("constant", farfield.c, m0)
        if k.p == 2.0:
            return ("quadratic", m0, m1, m2)
        return None

    def value(self, u: np.ndarray) -> np.ndarray:
        k = self.k
        if self.policy == "none":
            return np.zeros_like(u)
        if self.policy == "analytic_constant":
            return self.coef * np.abs(u - self.c) ** k.p
        if self._sep is not None:
            if self._sep[0] == "constant":
                _, c, m0 = self._sep
                return np.abs(u - c) ** k.p / k.p * m0
            _, m0, m1, m2 = self._sep
            return 0.5 * (u * u * m0 - 2.0 * u * m1 + m2)
        return self._generic(u, derivative=False)

    def derivative(self, u: np.ndarray) -> np.ndarray:
        k = self.k
        if self.policy == "none":
            return np.zeros_like(u)
        if self.policy == "analytic_constant":
            d = u - self.c
            return self.coef * k.p * np.sign(d) * np.abs(d) ** (k.p - 1.0)
        if self._sep is not None:
            if self._sep[0] == "constant":
                _, c, m0 = self._sep
                d = u - c
                mag = np.where(d != 0.0, np.abs(d) ** (k.p - 1.0), 0.0)
                return np.sign(d) * mag * m0
            _, m0, m1, _ = self._sep
            return u * m0 - m1
        return self._generic(u, derivative=True)

    def _generic(self, u, derivative):
        k = self.k
        out = np.empty(len(self.points))
        step = max(1, CHUNK // len(self.y))
        f = k.dF_dt if derivative else k.F
        for a in range(0, len(self.points), step):
            x = self.points[a:a + step]
            t = u[a:a + step, None] - self.phi[None, :]
            disp = x[:, None, :] - self.y[None, :, :]
            out[a:a + step] = (f(t, disp) * self.w[None, :]).sum(axis=1)
        return out
