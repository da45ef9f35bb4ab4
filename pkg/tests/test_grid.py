import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlenergy.errors import InputError, UsageError
from nlenergy.grid import (Domain, FarField, GridFunction, constant, dist_aux, layer_tanh,
                           min_max_combine, psi_aux, ramp, sample_profile, translate)


def test_domain_validation():
    with pytest.raises(UsageError):
        Domain(1, 4.0, 6.0, 0.25)          # R_box < 2R
    with pytest.raises(UsageError):
        Domain(1, 4.0, 8.0, 2.0)           # h > R/4
    with pytest.raises(UsageError):
        Domain(1, 4.0, 8.0, 0.3)           # 2 R_box / h not an integer
    d = Domain(2, 4.0, 8.0, 0.5)
    assert d.N == 32 and d.shape == (32, 32)
    assert d.cell_volume == 0.25


def test_cell_centres_symmetric():
    d = Domain(1, 2.0, 4.0, 0.5)
    ax = d.axis()
    assert ax[0] == -3.75 and ax[-1] == 3.75
    np.testing.assert_array_equal(ax, -ax[::-1])


def test_psi_and_dist_profiles():
    R = 3.0
    d = Domain(1, R, 8.0, 0.25)
    x = d.axis()
    psi = sample_profile(d, psi_aux(R)).values
    assert np.all(psi[np.abs(x) <= R + 1] == -1.0)
    assert np.all(psi[np.abs(x) >= R + 2] == 1.0)
    dist = dist_aux(R).evaluate(np.zeros((1, 1)))
    assert dist[0] == R + 1


def test_ramp_is_clipped_projection():
    d = Domain(2, 2.0, 4.0, 0.25)
    om = np.array([0.6, 0.8])
    u = sample_profile(d, ramp(om))
    np.testing.assert_allclose(u.values, np.clip(d.coords() @ om, -1, 1), rtol=0, atol=1e-15)


def test_declared_bound_enforced():
    d = Domain(1, 2.0, 4.0, 0.25)
    with pytest.raises(InputError):
        GridFunction(d, np.full(d.shape, 2.0), FarField.constant(0.0), bound=1.0)
    with pytest.raises(InputError):
        GridFunction(d, np.full(d.shape, np.nan), FarField.constant(0.0))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1))
def test_min_max_multiset(seed):
    rng = np.random.default_rng(seed)
    d = Domain(1, 2.0, 4.0, 0.25)
    u = GridFunction(d, rng.uniform(-1, 1, d.shape), FarField.constant(0.0))
    v = GridFunction(d, rng.uniform(-1, 1, d.shape), FarField.constant(0.5))
    m, M = min_max_combine(u, v)
    np.testing.assert_array_equal(np.sort(np.stack([m.values, M.values]), axis=0),
                                  np.sort(np.stack([u.values, v.values]), axis=0))
    assert m.farfield(np.array([[100.0]]))[0] == 0.0 and M.farfield(np.array([[100.0]]))[0] == 0.5


def test_min_max_ordered_and_idempotent():
    d = Domain(1, 2.0, 4.0, 0.25)
    u = sample_profile(d, constant(-0.5))
    v = sample_profile(d, constant(0.5))
    m, M = min_max_combine(u, v)
    assert np.array_equal(m.values, u.values) and np.array_equal(M.values, v.values)
    m, M = min_max_combine(u, u)
    assert np.array_equal(m.values, u.values) and np.array_equal(M.values, u.values)


def test_translate():
    d = Domain(1, 2.0, 4.0, 0.125)
    u = sample_profile(d, ramp([1.0]))
    assert translate(u, [0.0]) == u
    c = sample_profile(d, constant(0.3))
    assert np.array_equal(translate(c, [3 * d.h]).values, c.values)
    t = translate(u, [d.h])
    x = d.axis()
    core = np.abs(x) < 0.9
    np.testing.assert_allclose(t.values[core], u.values[core] - d.h, rtol=0, atol=1e-15)
    with pytest.raises(UsageError):
        translate(u, [0.3 * d.h])


def test_text_round_trip(tmp_path):
    d = Domain(2, 2.0, 4.0, 0.5)
    u = sample_profile(d, layer_tanh([0.6, 0.8], 0.7))
    path = tmp_path / "u.txt"
    u.save(path)
    v = GridFunction.load(path)
    assert np.array_equal(v.values, u.values)
    assert v.farfield.describe() == u.farfield.describe()
    pts = np.array([[10.0, -3.0], [-7.0, 9.0]])
    np.testing.assert_array_equal(v.farfield(pts), u.farfield(pts))


def test_values_read_only():
    d = Domain(1, 2.0, 4.0, 0.5)
    u = sample_profile(d, constant(0.0))
    with pytest.raises(ValueError):
        u.values[0] = 1.0
