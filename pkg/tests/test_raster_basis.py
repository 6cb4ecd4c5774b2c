import numpy as np
import pytest
from hypothesis import given, strategies as st

from firefront.basis import (CovariateMatrix, default_range, exponential_basis,
                             exponential_correlation, leading_eigenbasis, speed_field)
from firefront.errors import DataError
from firefront.grid import GridSpec, ScalarField
from firefront.raster import bilinear_resample, slope_aspect, standardize


# -- resampling --------------------------------------------------------------------

def test_bilinear_exact_on_bilinear_function():
    src = ScalarField.from_function(GridSpec(6, 5, 0.0, 5.0, 0.0, 4.0), lambda x, y: 2 * x + 3 * y)
    dst = GridSpec(13, 9, 0.3, 4.7, 0.1, 3.9)
    out = bilinear_resample(src, dst)
    want = ScalarField.from_function(dst, lambda x, y: 2 * x + 3 * y).values
    assert np.max(np.abs(out.values - want)) <= 1e-12


def test_bilinear_identity_and_patch_midpoint():
    g = GridSpec(2, 2, 0.0, 1.0, 0.0, 1.0)
    src = ScalarField(g, [0.0, 1.0, 1.0, 2.0])
    assert np.array_equal(bilinear_resample(src, g).values, src.values)
    mid = bilinear_resample(src, GridSpec(2, 2, 0.5, 0.5 + 1e-9, 0.5, 0.5 + 1e-9))
    assert mid.values[0] == pytest.approx(1.0, abs=1e-8)


def test_bilinear_masked_source_cells_read_as_zero_and_flagged():
    g = GridSpec(3, 3, 0.0, 2.0, 0.0, 2.0)
    mask = np.ones(9, bool)
    mask[4] = False
    src = ScalarField(g, np.ones(9), mask)
    out = bilinear_resample(src, GridSpec(5, 5, 0.0, 2.0, 0.0, 2.0))
    centre = 12
    assert not out.observed[centre]
    assert out.observed[0] and out.values[0] == 1.0


def test_bilinear_extent_check():
    src = ScalarField(GridSpec(3, 3, 0.0, 1.0, 0.0, 1.0), np.zeros(9))
    with pytest.raises(DataError):
        bilinear_resample(src, GridSpec(3, 3, 0.0, 1.5, 0.0, 1.0))


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-2, 2))
def test_bilinear_reproduces_any_bilinear(a, b, c, d):
    f = lambda x, y: a + b * x + c * y + d * x * y  # noqa: E731
    src = ScalarField.from_function(GridSpec(4, 4, -1.0, 1.0, -1.0, 1.0), f)
    dst = GridSpec(7, 5, -0.9, 0.8, -1.0, 0.95)
    out = bilinear_resample(src, dst)
    assert np.allclose(out.values, ScalarField.from_function(dst, f).values, rtol=0, atol=1e-11)


# -- slope / aspect -------------------------------------------------------------------

def test_aspect_conventions():
    g = GridSpec(5, 5, 0.0, 4.0, 0.0, 4.0)
    inner = (slice(1, -1), slice(1, -1))
    # descends toward north: z decreases with y
    north = slope_aspect(ScalarField.from_function(g, lambda x, y: -y))[1].as_2d()[inner]
    assert np.allclose(north, 0.0)
    west = slope_aspect(ScalarField.from_function(g, lambda x, y: x))[1].as_2d()[inner]
    assert np.allclose(west, 270.0)
    east = slope_aspect(ScalarField.from_function(g, lambda x, y: -x))[1].as_2d()[inner]
    assert np.allclose(east, 90.0)
    south = slope_aspect(ScalarField.from_function(g, lambda x, y: y))[1].as_2d()[inner]
    assert np.allclose(south, 180.0)


def test_slope_of_plane_and_flat():
    g = GridSpec(5, 5, 0.0, 4.0, 0.0, 4.0)
    slope, _ = slope_aspect(ScalarField.from_function(g, lambda x, y: x))
    assert np.allclose(slope.as_2d()[1:-1, 1:-1], 45.0)
    s, a = slope_aspect(ScalarField(g, np.full(g.n, 7.0)))
    assert np.all(s.values == 0) and np.all(a.values == 0)


def test_slope_aspect_rejects_masked_dem():
    g = GridSpec(4, 4, 0.0, 1.0, 0.0, 1.0)
    m = np.ones(16, bool)
    m[0] = False
    with pytest.raises(DataError):
        slope_aspect(ScalarField(g, np.zeros(16), m))


# -- standardize ------------------------------------------------------------------

def test_standardize_examples():
    g = GridSpec(3, 2, 0.0, 1.0, 0.0, 1.0)
    out = standardize(ScalarField(g, [1, 2, 3, 1, 2, 3]))
    sd = np.std([1, 2, 3, 1, 2, 3], ddof=1)
    assert np.allclose(out.values, (np.array([1, 2, 3, 1, 2, 3]) - 2) / sd)
    with pytest.raises(DataError, match="constant covariate"):
        standardize(ScalarField(g, np.full(6, 4.0)))
    out = standardize(ScalarField(g, [1, 2, 3, 4, 5, 6], [1, 1, 0, 1, 1, 1]))
    assert out.values[2] == 0.0 and out.mask is None


@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6))
def test_standardize_moments(vals):
    if np.std(vals) < 1e-3:
        return
    g = GridSpec(3, 2, 0.0, 1.0, 0.0, 1.0)
    out = standardize(ScalarField(g, vals)).values
    assert abs(out.mean()) <= 1e-10 and abs(out.std(ddof=1) - 1) <= 1e-10


# -- basis --------------------------------------------------------------------------

def test_exponential_correlation_definition():
    g = GridSpec(4, 4, 0.0, 3.0, 0.0, 3.0)
    C = exponential_correlation(g, 2.0)
    assert np.all(np.diag(C) == 1.0)
    assert C[0, 2] == pytest.approx(np.exp(-1.0))
    assert np.array_equal(C, C.T)
    assert np.linalg.eigvalsh(C).min() > 0
    assert default_range(GridSpec(30, 30, -7, 7, -1, 7)) == pytest.approx(14 / 3)


def test_eigenbasis_two_by_two():
    rho = 0.4
    b = leading_eigenbasis(np.array([[1, rho], [rho, 1]]), 2)
    assert np.allclose(b.eigenvalues, [1 + rho, 1 - rho])
    assert np.allclose(b.columns[:, 0], np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(np.abs(b.columns[:, 1]), np.array([1, 1]) / np.sqrt(2))
    assert b.columns[:, 1] @ np.array([1, -1]) != 0


def test_eigenbasis_identity_and_errors():
    b = leading_eigenbasis(np.eye(3), 1)
    assert np.allclose(np.eye(3) @ b.columns[:, 0], b.columns[:, 0])
    with pytest.raises(DataError):
        leading_eigenbasis(np.eye(3), 4)


def test_basis_invariants_on_30x30_grid():
    g = GridSpec(30, 30, -7.0, 7.0, -1.0, 7.0)
    C = exponential_correlation(g)
    b = leading_eigenbasis(C, 8, g)
    assert np.allclose(b.columns.T @ b.columns, np.eye(8), atol=1e-8)
    assert np.all(np.diff(b.eigenvalues) <= 0)
    lam_max = b.eigenvalues[0]
    for k in range(8):
        u = b.columns[:, k]
        assert np.linalg.norm(C @ u - b.eigenvalues[k] * u) <= 1e-8 * lam_max
        assert u[np.argmax(np.abs(u))] > 0
    energy = np.cumsum(b.eigenvalues)
    assert np.all(np.diff(energy) >= 0) and energy[-1] <= np.trace(C)


def test_speed_field_linearity_and_errors():
    g = GridSpec(6, 5, 0.0, 1.0, 0.0, 1.0)
    ramp = standardize(ScalarField.from_function(g, lambda x, y: x))
    X = CovariateMatrix.from_fields([ramp], ["ramp"])
    B = exponential_basis(g, 3)
    assert np.all(speed_field(X, [0.0], B, np.zeros(3)).values == 0)
    assert np.allclose(speed_field(X, [2.0], B, np.zeros(3)).values, 2 * ramp.values)
    rng = np.random.default_rng(0)
    b1, b2, x1, x2 = rng.normal(size=1), rng.normal(size=1), rng.normal(size=3), rng.normal(size=3)
    lhs = speed_field(X, b1 + b2, B, x1 + x2).values
    rhs = speed_field(X, b1, B, x1).values + speed_field(X, b2, B, x2).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12
    with pytest.raises(DataError):
        speed_field(X, [1.0, 2.0], B, np.zeros(3))
