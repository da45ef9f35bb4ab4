import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nlenergy.energy import (EnergyModel, QuadratureConfig, exterior_seminorm, gagliardo_seminorm,
                             gradient, total_energy)
from nlenergy.errors import UsageError
from nlenergy.grid import Domain, FarField, GridFunction, constant, ramp, sample_profile
from nlenergy.kernels import mean_curvature, p_laplacian
from nlenergy.potentials import double_well, zero_potential
from nlenergy.tail import TailModel

QUAD = QuadratureConfig(tail_policy="quadrature_1d")


def random_state(dom, seed, ff=FarField.constant(0.2)):
    rng = np.random.default_rng(seed)
    return GridFunction(dom, rng.uniform(-1, 1, dom.shape), ff)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("tail", ["analytic_constant", "quadrature_1d", "none"])
def test_constant_state_zero_potential(n, tail):
    dom = Domain(n, 2.0, 4.0, 0.5)
    u = sample_profile(dom, constant(0.37))
    e = total_energy(u, p_laplacian(n, 0.5, 2.0), zero_potential(), QuadratureConfig(tail_policy=tail))
    assert e.total == 0.0


def test_constant_one_double_well():
    dom = Domain(2, 2.0, 4.0, 0.5)
    e = total_energy(sample_profile(dom, constant(1.0)), mean_curvature(2, 0.5), double_well())
    assert e.total == 0.0 and e.potential == 0.0


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10 ** 6), p=st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_breakdown_consistent(seed, p):
    dom = Domain(1, 2.0, 4.0, 0.25)
    e = total_energy(random_state(dom, seed), p_laplacian(1, 0.4, p), double_well(), QUAD)
    assert e.interior_interior >= 0 and e.interior_exterior >= 0 and e.potential >= 0
    assert e.total == e.interior_interior + e.interior_exterior + e.potential


def test_fft_matches_direct():
    dom = Domain(2, 4.0, 8.0, 0.5)
    u = random_state(dom, 3)
    k = p_laplacian(2, 0.5, 2.0)
    a = total_energy(u, k, double_well(), QuadratureConfig(backend="direct"))
    b = total_energy(u, k, double_well(), QuadratureConfig(backend="fft"))
    assert b.total == pytest.approx(a.total, rel=1e-12)
    ga = gradient(u, k, double_well(), QuadratureConfig(backend="direct"))
    gb = gradient(u, k, double_well(), QuadratureConfig(backend="fft"))
    np.testing.assert_allclose(gb, ga, rtol=1e-10, atol=1e-14)


def test_fft_needs_p2():
    dom = Domain(1, 2.0, 4.0, 0.5)
    with pytest.raises(UsageError):
        total_energy(random_state(dom, 0), p_laplacian(1, 0.5, 1.5), double_well(),
                     QuadratureConfig(backend="fft"))


def test_summation_modes_agree():
    dom = Domain(2, 2.0, 4.0, 0.25)
    u = random_state(dom, 5)
    k = p_laplacian(2, 0.3, 2.0)
    a = total_energy(u, k, double_well(), QuadratureConfig(summation="fixed_order"))
    b = total_energy(u, k, double_well(), QuadratureConfig(summation="compensated"))
    assert a.total == pytest.approx(b.total, rel=1e-12)


@pytest.mark.parametrize("k", [p_laplacian(1, 0.5, 2.0), mean_curvature(1, 0.5)])
def test_gradient_of_constant_state(k):
    c = 0.3
    dom = Domain(1, 2.0, 4.0, 0.25)
    u = sample_profile(dom, constant(c))
    g = gradient(u, k, double_well(), QUAD)
    np.testing.assert_allclose(g, dom.h * (c ** 3 - c), rtol=1e-13, atol=0)


@pytest.mark.parametrize("k", [p_laplacian(1, 0.5, 2.0), p_laplacian(1, 0.3, 3.0), mean_curvature(1, 0.4),
                               p_laplacian(2, 0.6, 2.0)])
def test_gradient_finite_differences(k):
    dom = Domain(k.n, 2.0, 4.0, 0.25 if k.n == 1 else 0.5)
    model = EnergyModel(random_state(dom, 11), k, double_well(), QUAD)
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.9, 0.9, len(model.I))
    g = model.gradient(x)
    eps = 1e-6
    for i in rng.choice(len(x), 8, replace=False):
        xp, xm = x.copy(), x.copy()
        xp[i] += eps
        xm[i] -= eps
        fd = (model.energy(xp).total - model.energy(xm).total) / (2 * eps)
        assert fd == pytest.approx(g[i], rel=1e-5)


def test_kinetic_gradient_linear_for_p2():
    dom = Domain(2, 2.0, 4.0, 0.5)
    zero = sample_profile(dom, constant(0.0))
    model = EnergyModel(zero, p_laplacian(2, 0.5, 2.0), double_well(), QUAD)
    x = np.random.default_rng(1).uniform(-1, 1, len(model.I))
    np.testing.assert_allclose(model.kinetic_gradient(2.5 * x), 2.5 * model.kinetic_gradient(x),
                               rtol=1e-12, atol=1e-15)


def test_gagliardo_closed_form():
    # ramp on B_1, n = 1, s = 1/4, p = 2: int int |x - y|^(1/2) over [-1, 1]^2 = 2^(5/2) * 8/15
    exact = 2.0 ** 2.5 * 8.0 / 15.0
    k = p_laplacian(1, 0.25, 2.0)
    dom = Domain(1, 1.0, 2.0, 1.0 / 64.0)
    u = sample_profile(dom, ramp([1.0]))
    assert gagliardo_seminorm(u, 1.0, k) ** 2 == pytest.approx(exact, rel=0.02)
    v = u.with_values(u.values + 0.4)
    assert gagliardo_seminorm(v, 1.0, k) == pytest.approx(gagliardo_seminorm(u, 1.0, k), rel=1e-12)
    assert gagliardo_seminorm(sample_profile(dom, constant(0.2)), 1.0, k) == 0.0


def test_exterior_seminorm_oracle():
    k = p_laplacian(1, 0.25, 2.0)
    f = lambda y, x: (x - np.sign(y)) ** 2 / abs(x - y) ** 1.5
    oracle = sum(integrate.dblquad(f, -1, 1, a, b, epsabs=1e-12)[0] for a, b in [(-2, -1), (1, 2)])
    dom = Domain(1, 1.0, 2.0, 1.0 / 64.0)
    u = sample_profile(dom, ramp([1.0]))
    assert exterior_seminorm(u, k) ** 2 == pytest.approx(oracle, rel=0.02)
    assert exterior_seminorm(sample_profile(dom, constant(0.5)), k) == 0.0


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10 ** 6), s=st.floats(0.05, 0.45))
def test_exterior_seminorm_finite_for_small_sp(seed, s):
    dom = Domain(1, 2.0, 4.0, 0.25)
    assert math.isfinite(exterior_seminorm(random_state(dom, seed), p_laplacian(1, s, 2.0)))


def test_tail_closed_form_1d():
    k = p_laplacian(1, 0.5, 2.0)
    L = 4.0
    x = np.array([[-1.0], [0.0], [2.5]])
    tm = TailModel(k, FarField.constant(1.0), "quadrature_1d", L, x, 64, 64)
    exact = 0.5 * ((L - x[:, 0]) ** -1.0 + (L + x[:, 0]) ** -1.0)     # sp = 1
    np.testing.assert_allclose(tm.value(np.zeros(3)), exact, rtol=1e-12)


def test_tail_quadrature_2d_against_adaptive():
    k = p_laplacian(2, 0.5, 2.0)
    L = 2.0
    x = np.array([[0.5, -0.3]])
    ff = FarField.profile1d([1.0, 0.0], "ramp")
    tm = TailModel(k, ff, "quadrature_1d", L, x, 64, 64)
    u = 0.2

    def f(y2, y1):
        return 0.5 * (u - np.clip(y1, -1, 1)) ** 2 / ((y1 - x[0, 0]) ** 2 + (y2 - x[0, 1]) ** 2) ** 1.5

    # complement of the box as six rectangles, split where the ramp has kinks
    total = sum(integrate.dblquad(f, a, b, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-10)[0]
                for a, b in [(L, np.inf), (-np.inf, -L)])
    total += sum(integrate.dblquad(f, a, b, c, d, epsabs=1e-12, epsrel=1e-10)[0]
                 for a, b in [(-L, -1), (-1, 1), (1, L)] for c, d in [(L, np.inf), (-np.inf, -L)])
    assert tm.value(np.array([u]))[0] == pytest.approx(total, rel=1e-3)


def test_analytic_tail_needs_constant_far_field():
    dom = Domain(1, 2.0, 4.0, 0.25)
    u = sample_profile(dom, ramp([1.0]))
    with pytest.raises(UsageError):
        total_energy(u, p_laplacian(1, 0.5, 2.0), double_well(), QuadratureConfig())


def test_analytic_tail_is_upper_envelope():
    dom = Domain(1, 2.0, 4.0, 0.25)
    u = random_state(dom, 4)
    k = p_laplacian(1, 0.5, 2.0)
    env = total_energy(u, k, double_well(), QuadratureConfig(tail_policy="analytic_constant"))
    quad = total_energy(u, k, double_well(), QUAD)
    assert env.total >= quad.total
