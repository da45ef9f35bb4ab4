"""Acceptance gate: one test per criterion, each printing a single pass/fail line."""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from conftest import ACCEPTANCE_LINES
from nlenergy.audit import audit_assumptions
from nlenergy.energy import QuadratureConfig, total_energy
from nlenergy.experiments import (appendix_inequality_suite, direction, fit_power, gradient_check,
                                  perturbation_experiment, scaling_experiment, submodularity_suite,
                                  symmetry_diagnostic, tail_estimate_check)
from nlenergy.grid import Domain, custom, ramp, sample_profile
from nlenergy.kernels import mean_curvature, p_laplacian
from nlenergy.minimize import MinimizeConfig, minimize
from nlenergy.potentials import double_well

QUAD = QuadratureConfig(tail_policy="quadrature_1d")


def report(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_assumption_audit():
    kernels = [p_laplacian(1, 0.5, 2.0), p_laplacian(2, 0.5, 2.0), mean_curvature(1, 0.5), mean_curvature(2, 0.5)]
    details, ok = [], True
    for k in kernels:
        t = time.perf_counter()
        rep = audit_assumptions(k, sample_count=10_000, seed=0, rel_tol=1e-9)
        dt = time.perf_counter() - t
        passed = sum(it.passed for it in rep.assumption_items())
        ok &= rep.passed and passed == 11 and dt < 5.0
        details.append(f"{k.family} n={k.n}: {passed}/11 + 4.14={'ok' if rep.item('4.14').passed else 'no'} {dt:.2f}s")
    report(1, ok, "; ".join(details))


def test_criterion_2_tail_estimate():
    t = time.perf_counter()
    R = [4, 8, 16, 32, 64]
    details, ok = [], True
    for n in (1, 2):
        for s in (0.25, 0.5, 0.75):
            rep = tail_estimate_check(s, 2.0, n, R, tol=0.1)
            ok &= rep.verdict == "pass"
            if math.isclose(s * 2.0, 1.0):
                gain = [x for x in rep.notes if x.startswith("log-corrected residual")][0].split(":")[1].split()[0]
                details.append(f"n={n} sp=1 gain={float(gain):.3f}")
            else:
                details.append(f"n={n} sp={2 * s:g} fit={rep.fitted_exponent:.3f}/{rep.predicted_exponent:g}")
    dt = time.perf_counter() - t
    ok &= dt < 60.0
    report(2, ok, "; ".join(details) + f"; {dt:.1f}s")


def test_criterion_3_scaling():
    t = time.perf_counter()
    r1 = scaling_experiment(p_laplacian(1, 0.25, 2.0), double_well(), [4, 8, 16, 32], h_divisions=32, tol=0.15)
    # R = 2 is added only to satisfy the four-radii rule; the fit uses the three largest, {4, 8, 16}
    r2 = scaling_experiment(p_laplacian(2, 0.75, 2.0), double_well(), [2, 4, 8, 16], h_divisions=32, tol=0.15)
    dt = time.perf_counter() - t
    ok = r1.verdict == "pass" and r2.verdict == "pass" and dt < 1800.0
    all_r = fit_power(r1.R_list, r1.measured).exponent
    report(3, ok, f"n=1 s=0.25 fit={r1.fitted_exponent:.3f}/0.5 (all four radii {all_r:.3f}); n=2 s=0.75 fit={r2.fitted_exponent:.3f}/1; {dt:.1f}s")


def test_criterion_4_perturbation():
    t = time.perf_counter()
    rep = perturbation_experiment(p_laplacian(1, 0.75, 2.0), double_well(), [8, 16, 32, 64])
    dt = time.perf_counter() - t
    nonneg = all(r.delta >= -1e-10 * r.energy_base for r in rep.records)
    ok = -2.3 <= rep.fitted_exponent <= -1.7 and nonneg and dt < 600.0
    report(4, ok, f"slope={rep.fitted_exponent:.3f} delta>=-1e-10E: {nonneg}; {dt:.1f}s")


def test_criterion_5_submodularity():
    t = time.perf_counter()
    q = QuadratureConfig(tail_policy="quadrature_1d", backend="direct", summation="compensated")
    suites = [submodularity_suite(k, double_well(), pairs=100, seed=0, slack=1e-10, q=q)
              for k in (p_laplacian(1, 0.5, 1.5), p_laplacian(1, 0.5, 2.0), p_laplacian(1, 0.5, 3.0),
                        mean_curvature(1, 0.5))]
    dt = time.perf_counter() - t
    worst = min(v[1] for sv in suites for v in sv.checks.values())
    ok = all(sv.passed for sv in suites) and dt < 120.0
    report(5, ok, f"4 kernels x 100 pairs, worst margin {worst:.3e}; {dt:.1f}s")


def test_criterion_6_gradient():
    t = time.perf_counter()
    suites = [gradient_check(k, double_well(), nodes=20, seed=0, eps=1e-6, tol=1e-5)
              for k in (p_laplacian(1, 0.5, 2.0), mean_curvature(1, 0.5), p_laplacian(2, 0.5, 2.0),
                        mean_curvature(2, 0.5))]
    dt = time.perf_counter() - t
    worst = max(1e-5 - v[1] for sv in suites for v in sv.checks.values())
    ok = all(sv.passed for sv in suites) and dt < 60.0
    report(6, ok, f"max relative error {worst:.3e} over 4 kernel/dimension cases; {dt:.1f}s")


def test_criterion_7_appendix():
    t = time.perf_counter()
    suites = [appendix_inequality_suite(50, seed=0, n=n, slack=1e-9) for n in (1, 2)]
    dt = time.perf_counter() - t
    ok = all(sv.passed for sv in suites) and dt < 120.0
    report(7, ok, f"n=1 and n=2, 50 samples each, both inequalities; {dt:.1f}s")


def _radial_bump(P):
    r2 = np.sum(P * P, -1) / 16.0
    out = np.zeros(r2.shape)
    inside = r2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def test_criterion_8_symmetry():
    t = time.perf_counter()
    deg = 20.0
    dom = Domain(2, 8.0, 16.0, 0.125)
    u0 = sample_profile(dom, ramp(direction(math.radians(deg))))
    res = minimize(u0, p_laplacian(2, 0.5, 2.0), double_well(), MinimizeConfig(grad_tol=1e-6 * dom.h ** 2),
                   QuadratureConfig(tail_policy="quadrature_1d", backend="fft"))
    sym = symmetry_diagnostic(res.u)
    err = abs(math.degrees(sym.angle) - deg)
    radial = symmetry_diagnostic(sample_profile(Domain(2, 4.0, 8.0, 0.125), custom(_radial_bump))).residual
    dt = time.perf_counter() - t
    ok = res.converged and sym.residual < 0.02 and err <= 2.0 and radial > 0.05 and dt < 1200.0
    report(8, ok, f"minimizer residual={sym.residual:.4f} (<0.02) direction error={err:.3f}deg (<=2) "
                  f"radial residual={radial:.3f} (>0.05) status={res.status}; {dt:.1f}s")


def _ramp_oracle(R, s):
    """Adaptive quadrature of int int (r(x) - r(y))^2 / 2 / |x - y|^(1+2s) over (-R, R)^2, r = clip."""
    order = 1.0 + 2.0 * s

    def f(y, x):
        d = abs(x - y)
        return 0.0 if d == 0.0 else 0.5 * (np.clip(x, -1, 1) - np.clip(y, -1, 1)) ** 2 / d ** order

    cuts = sorted({-R, -1.0, 1.0, R})
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        for c, d in zip(cuts, cuts[1:]):
            if a == c:      # split diagonal squares along the diagonal
                total += integrate.dblquad(f, a, b, a, lambda x: x, epsabs=1e-13, epsrel=1e-11)[0]
                total += integrate.dblquad(f, a, b, lambda x: x, b, epsabs=1e-13, epsrel=1e-11)[0]
            else:
                total += integrate.dblquad(f, a, b, c, d, epsabs=1e-13, epsrel=1e-11)[0]
    return total


def test_criterion_9_quadrature_convergence():
    R, s = 2.0, 0.5
    oracle = _ramp_oracle(R, s)
    k = p_laplacian(1, s, 2.0)
    errs = []
    for div in (16, 32, 64):
        dom = Domain(1, R, 2 * R, R / div)
        e = total_energy(sample_profile(dom, ramp([1.0])), k, double_well(), QUAD)
        errs.append(abs(e.interior_interior - oracle) / oracle)
    ok = errs[2] < 0.02 and errs[0] > errs[1] > errs[2]
    report(9, ok, f"oracle={oracle:.10f} rel errors h=R/16,32,64: " + ", ".join(f"{x:.4%}" for x in errs))
