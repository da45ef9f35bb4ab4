import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlenergy.errors import UsageError
from nlenergy.potentials import custom_potential, double_well, eval_dW, eval_W, make_potential, zero_potential

us = st.floats(-10.0, 10.0, allow_nan=False)


def test_double_well_values():
    W = double_well()
    assert eval_W(W, 1.0) == 0.0
    assert eval_W(W, -1.0) == 0.0
    assert eval_W(W, 0.0) == 0.25
    assert eval_dW(W, 0.0) == 0.0
    assert eval_dW(W, 1.0) == 0.0 and eval_dW(W, -1.0) == 0.0
    assert eval_dW(W, 2.0) == 6.0


@given(u=us)
def test_nonnegative_and_odd_derivative(u):
    W = double_well()
    assert eval_W(W, u) >= 0.0
    assert eval_dW(W, u) == -eval_dW(W, -u)


@given(u=us)
def test_derivative_matches_difference(u):
    W = double_well()
    eps = 1e-6
    fd = (eval_W(W, u + eps) - eval_W(W, u - eps)) / (2 * eps)
    assert fd == pytest.approx(eval_dW(W, u), rel=1e-6, abs=1e-6)


def test_zero_and_custom():
    assert eval_W(zero_potential(), 0.3) == 0.0
    P = custom_potential(lambda u: (u - 1) ** 2, lambda u: 2 * (u - 1))
    assert eval_W(P, 3.0) == 4.0 and eval_dW(P, 3.0) == 4.0


def test_unknown_family():
    assert make_potential("doubleWell").family == "doubleWell"
    with pytest.raises(UsageError):
        make_potential("quartic")
