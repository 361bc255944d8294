import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vaporimage import (
    ComplexField,
    DiffusionParams,
    OpticalParams,
    diffuse_spectral,
    energy,
    inner_product,
    make_grid,
    normalize,
    slit_pattern,
)
from vaporimage.field import GridMismatchError

from conftest import ALPHA, D_WEAK


def test_grid_convention():
    g = make_grid(1, 8, 4.0)
    assert g.spacing == (1.0,)
    x = g.axis()
    assert x[0] == -3.5 and x[7] == 3.5
    np.testing.assert_array_equal(x, -4.0 + (np.arange(8) + 0.5) * 1.0)


def test_grid_2d_spacing():
    g = make_grid(2, 512, 2.0e-3)
    assert g.spacing == pytest.approx((7.8125e-6, 7.8125e-6), rel=1e-15)
    assert g.shape == (512, 512)


@pytest.mark.parametrize("n, L", [(7, 1.0), (6, 1.0), (8, 0.0), (8, -1.0), (9, 2.0)])
def test_grid_rejects_bad_input(n, L):
    with pytest.raises(ValueError):
        make_grid(1, n, L)


def test_grid_is_bit_reproducible_and_mirror_symmetric():
    for n, L in [(4096, 40 * math.pi / ALPHA), (512, 256e-6), (10, 0.3)]:
        x = make_grid(1, n, L).axis()
        np.testing.assert_array_equal(x, make_grid(1, n, L).axis())
        np.testing.assert_array_equal(x[::-1], -x)
        assert not np.any(x == 0)


def test_nearest_index():
    g = make_grid(1, 8, 4.0)
    assert g.nearest_index((-3.9,)) == (0,)
    assert g.nearest_index((0.0,)) == (4,)
    assert g.nearest_index((4.0,)) == (7,)
    with pytest.raises(ValueError):
        g.nearest_index((4.5,))


def test_field_validation():
    g = make_grid(1, 8, 1.0)
    with pytest.raises(ValueError):
        ComplexField(g, np.ones(7))
    with pytest.raises(ValueError):
        ComplexField(g, np.full(8, np.nan))
    with pytest.raises(ValueError):
        ComplexField(g, np.ones(8), plane="pupil")
    f = ComplexField(g, np.ones(8))
    with pytest.raises(ValueError):
        f.values[0] = 2


def test_params_validation():
    with pytest.raises(ValueError):
        OpticalParams(0.25, 795e-9, 0.0, 1e-3)
    with pytest.raises(ValueError):
        DiffusionParams(-1.0)
    with pytest.raises(ValueError):
        DiffusionParams(1.0, omega13=0.0)
    assert OpticalParams(0.25, 795e-9, 100e-6, 1e-3).alpha == pytest.approx(ALPHA, rel=1e-15)


def test_inner_product_normalized_and_orthogonal():
    g = make_grid(2, 16, 1.0)
    x, y = g.mesh()
    a = normalize(ComplexField(g, np.exp(-(x**2 + y**2)) * np.exp(1j * x)))
    assert inner_product(a, a) == pytest.approx(1.0, abs=1e-12)
    left = ComplexField(g, (x < 0).astype(float))
    right = ComplexField(g, (x > 0).astype(float))
    assert inner_product(left, right) == 0


def test_inner_product_grid_mismatch():
    a = ComplexField(make_grid(1, 8, 1.0), np.ones(8))
    b = ComplexField(make_grid(1, 8, 2.0), np.ones(8))
    with pytest.raises(GridMismatchError):
        inner_product(a, b)


def test_inner_product_equals_explicit_sum_exactly():
    g = make_grid(2, 32, 1.5)
    rng = np.random.default_rng(3)
    v = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    a = ComplexField(g, v)
    assert inner_product(a, a).real == np.sum(np.conj(v) * v).real * g.cell_area
    assert energy(a) == inner_product(a, a).real


def test_inner_product_sinc_against_finer_grid():
    # oracle: the same overlap as a Riemann sum on a 4x denser grid
    t = 1.0 / (D_WEAK * ALPHA**2)
    vals = []
    for n in (4096, 4 * 4096):
        g = make_grid(1, n, 40 * math.pi / ALPHA)
        s = slit_pattern(ALPHA, 1.0, g)
        vals.append(inner_product(s, diffuse_spectral(s, D_WEAK, t)))
    # the truncated sinc has a kink at the window edge, limiting the sum to O(dx^2)
    assert abs(vals[0] - vals[1]) / abs(vals[1]) < 1e-8


def test_normalize_constant():
    g = make_grid(2, 16, (1.0, 2.0))
    area = 2.0 * 4.0
    out = normalize(ComplexField(g, np.full(g.shape, 2.0)))
    np.testing.assert_allclose(out.values, 1 / math.sqrt(area), rtol=1e-14)


def test_normalize_is_idempotent_and_scales_uniformly(h_object):
    n1 = normalize(h_object)
    n2 = normalize(n1)
    assert energy(n1) == pytest.approx(1.0, abs=1e-12)
    assert np.abs(n2.values - n1.values).max() <= 1e-12 * np.abs(n1.values).max()
    bright = h_object.values != 0
    ratio = n1.values[bright] / h_object.values[bright]
    assert ratio.real.min() > 0
    assert np.ptp(ratio.real) <= 1e-15 * ratio.real.max()
    assert np.all(n1.values[~bright] == 0)


def test_normalize_zero_field():
    with pytest.raises(ValueError):
        normalize(ComplexField(make_grid(1, 8, 1.0), np.zeros(8)))


_vals = arrays(
    np.complex128,
    (12,),
    elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
)


@settings(max_examples=200, deadline=None)
@given(_vals, _vals)
def test_cauchy_schwarz(u, v):
    g = make_grid(1, 12, 0.7)
    a, b = ComplexField(g, u), ComplexField(g, v)
    lhs = abs(inner_product(a, b)) ** 2
    rhs = energy(a) * energy(b)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


@settings(max_examples=100, deadline=None)
@given(_vals, _vals, st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_inner_product_sesquilinear(u, v, c):
    g = make_grid(1, 12, 0.7)
    a, b = ComplexField(g, u), ComplexField(g, v)
    scale = max(1.0, math.sqrt(energy(a) * energy(b))) * max(1.0, abs(c))
    assert abs(inner_product(a * c, b) - np.conj(c) * inner_product(a, b)) <= 1e-12 * scale
    assert abs(inner_product(a, b * c) - c * inner_product(a, b)) <= 1e-12 * scale
    assert abs(inner_product(a, a).imag) <= 1e-12 * max(1.0, energy(a))


@settings(max_examples=100, deadline=None)
@given(_vals.filter(lambda v: np.abs(v).max() > 1e-3))
def test_normalize_idempotent_property(u):
    a = normalize(ComplexField(make_grid(1, 12, 0.7), u))
    assert energy(a) == pytest.approx(1.0, abs=1e-12)
    b = normalize(a)
    assert np.abs(b.values - a.values).max() <= 1e-12 * np.abs(a.values).max()
