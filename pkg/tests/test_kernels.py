import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nlenergy.errors import UsageError
from nlenergy.kernels import (G_fast, G_infinity, Gcal_fast, custom_kernel, eval_dF_dt, eval_F,
                              eval_helpers, g_fast, make_kernel, mean_curvature, p_laplacian)

ts = st.floats(-4.0, 4.0, allow_nan=False)
rs = st.floats(0.1, 10.0)
ss = st.floats(0.05, 0.95)


def test_plaplacian_zero_jump():
    k = p_laplacian(2, 0.3, 1.7)
    assert eval_F(k, 0.0, np.array([0.4, -1.2])) == 0.0


def test_plaplacian_unit_values():
    k = p_laplacian(1, 0.5, 2.0)
    assert eval_F(k, 1.0, np.array([1.0])) == pytest.approx(0.5, rel=1e-15)
    assert eval_dF_dt(k, 1.0, np.array([1.0])) == pytest.approx(1.0, rel=1e-15)


def test_plaplacian_matches_formula():
    k = p_laplacian(2, 0.4, 3.0)
    x = np.array([0.3, 0.4])
    assert eval_F(k, -0.7, x) == pytest.approx(0.7 ** 3 / 3.0 / 0.5 ** (2 + 1.2), rel=1e-13)


def test_mean_curvature_dF_zero_jump():
    k = mean_curvature(2, 0.5)
    assert eval_dF_dt(k, 0.0, np.array([0.3, 1.0])) == 0.0


@settings(max_examples=60, deadline=None)
@given(t=ts, r=rs, th=st.floats(0, 2 * math.pi), s=ss, fam=st.sampled_from(["pLaplacian", "meanCurvature"]))
def test_symmetry_and_oddness(t, r, th, s, fam):
    k = make_kernel(fam, 2, s, 1.0 if fam == "meanCurvature" else 1.5)
    x = np.array([r * math.cos(th), r * math.sin(th)])
    assert eval_F(k, t, x) == pytest.approx(eval_F(k, -t, -x), rel=1e-12, abs=0.0)
    assert eval_dF_dt(k, t, x) == pytest.approx(-eval_dF_dt(k, -t, x), rel=1e-12, abs=1e-300)
    assert eval_F(k, t, x) >= 0.0


@settings(max_examples=40, deadline=None)
@given(t=ts, r=rs, s=ss)
def test_mean_curvature_dF_dt_matches_difference(t, r, s):
    k = mean_curvature(1, s)
    x = np.array([r])
    eps = 1e-6
    fd = (eval_F(k, t + eps, x) - eval_F(k, t - eps, x)) / (2 * eps)
    assert fd == pytest.approx(eval_dF_dt(k, t, x), rel=1e-6, abs=1e-10)


def test_helpers_at_zero():
    k = mean_curvature(1, 0.5)
    assert eval_helpers(k, 0.0, "g") == 1.0
    assert eval_helpers(k, 0.0, "Gcal") == 0.0
    assert eval_helpers(k, 1.3, "Gcal") == pytest.approx(eval_helpers(k, -1.3, "Gcal"), rel=1e-14)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 5.0])
def test_helper_chain_inequality(n, a):
    k = mean_curvature(n, 0.5)
    g, G, Gc = (eval_helpers(k, a, w) for w in ("g", "G", "Gcal"))
    assert a * a * g <= a * G <= 2.0 * Gc


@pytest.mark.parametrize("n,s", [(1, 0.3), (2, 0.5), (2, 0.9)])
def test_fast_helpers_match_quadrature(n, s):
    e = 0.5 * (n + s + 1.0)
    for tau in (-3.0, -0.2, 0.7, 4.0):
        G = integrate.quad(lambda r: (1 + r * r) ** -e, 0.0, tau)[0]
        Gc = integrate.quad(lambda u: integrate.quad(lambda r: (1 + r * r) ** -e, 0.0, u)[0], 0.0, tau)[0]
        assert float(G_fast(tau, n, s)) == pytest.approx(G, rel=1e-10)
        assert float(Gcal_fast(tau, n, s)) == pytest.approx(Gc, rel=1e-9)
    assert float(g_fast(1.0, n, s)) == pytest.approx(2.0 ** -e, rel=1e-15)
    assert G_infinity(n, s) == pytest.approx(integrate.quad(lambda r: (1 + r * r) ** -e, 0, np.inf)[0], rel=1e-10)


@pytest.mark.parametrize("kw", [dict(s=0.0), dict(s=1.0), dict(p=0.5), dict(n=3)])
def test_invalid_parameters(kw):
    args = dict(n=1, s=0.5, p=2.0)
    args.update(kw)
    with pytest.raises(UsageError):
        p_laplacian(**args)


def test_mean_curvature_requires_p1():
    with pytest.raises(UsageError):
        make_kernel("meanCurvature", 1, 0.5, 2.0)


def test_custom_kernel_needs_callables():
    with pytest.raises(UsageError):
        custom_kernel(1, 0.5, 1.0, None, None, c_star=1, c_upper=1, c1=1, c2=1, c3=1)
