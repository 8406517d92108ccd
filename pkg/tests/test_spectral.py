import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.sparse import diags
from scipy.sparse.linalg import spsolve

from irsource import (
    BoundaryPoint,
    GridSpec,
    InvalidArgumentError,
    SpatialDomain,
    SpatialProfile,
    TruncationLimitError,
    eigen_modes,
    flux_coefficient,
    kernel_table,
    kernel_value,
    source_coefficient,
)
from irsource.spectral import boundary_normal_derivative, quadrature_coefficient


def test_eigenvalues_1d():
    modes = eigen_modes(SpatialDomain(1), 5)
    assert [m.index for m in modes] == [(1,), (2,), (3,), (4,), (5,)]
    np.testing.assert_allclose([m.eigenvalue for m in modes], np.pi**2 * np.arange(1, 6) ** 2)


def test_eigenvalues_2d_order_and_ties():
    modes = eigen_modes(SpatialDomain(2), 6)
    # (1,2) and (2,1) tie at 5 pi^2; lexicographic order breaks it
    assert [m.index for m in modes] == [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)]
    lams = np.array([m.eigenvalue for m in modes])
    assert np.all(np.diff(lams) >= 0)


def test_mode_count_must_be_positive():
    with pytest.raises(InvalidArgumentError):
        eigen_modes(SpatialDomain(1), 0)


@pytest.mark.parametrize("dim,count", [(1, 8), (2, 10)])
def test_eigen_relation_by_finite_differences(dim, count):
    # -Laplace(phi) = lambda phi, checked with a 4th-order stencil at interior points
    h = 1e-3
    rng = np.random.default_rng(1)
    for mode in eigen_modes(SpatialDomain(dim), count):
        p = rng.uniform(0.2, 0.8, size=(5, dim))
        x = p[:, 0]
        y = p[:, 1] if dim == 2 else None

        def d2(shift):
            sx = (x + shift[0] * h, None if y is None else y + shift[1] * h)
            return mode(*sx) if dim == 2 else mode(sx[0])

        lap = 0.0
        for axis in range(dim):
            e = np.eye(dim)[axis] if dim == 2 else np.array([1.0, 0.0])
            lap += (-d2(-2 * e) + 16 * d2(-e) - 30 * d2(0 * e) + 16 * d2(e) - d2(2 * e)) / (12 * h**2)
        val = mode(x, y) if dim == 2 else mode(x)
        np.testing.assert_allclose(-lap, mode.eigenvalue * val, atol=1e-4 * mode.eigenvalue)


def test_orthonormality_2d():
    modes = eigen_modes(SpatialDomain(2), 6)
    n = 256
    x = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    phi = np.array([m(X, Y).ravel() for m in modes])
    np.testing.assert_allclose(phi @ phi.T / n**2, np.eye(6), atol=1e-10)


@pytest.mark.parametrize(
    "point",
    [BoundaryPoint(0.0), BoundaryPoint(1.0), BoundaryPoint(0.0, 0.3), BoundaryPoint(1.0, 0.7),
     BoundaryPoint(0.4, 0.0), BoundaryPoint(0.55, 1.0)],
)
def test_normal_derivative_matches_one_sided_difference(point):
    # oracle: outward derivative by a one-sided second-order difference of the mode itself
    h = 1e-6
    inward = {"left": (1, 0), "right": (-1, 0), "x0": (1, 0), "x1": (-1, 0), "y0": (0, 1), "y1": (0, -1)}
    dx, dy = inward[point.side]
    for mode in eigen_modes(SpatialDomain(point.dim), 6):
        if point.dim == 1:
            vals = [mode(point.x + k * dx * h) for k in range(3)]
        else:
            vals = [mode(point.x + k * dx * h, point.y + k * dy * h) for k in range(3)]
        inward_derivative = (-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * h)
        assert boundary_normal_derivative(mode, point) == pytest.approx(-inward_derivative, rel=1e-4, abs=1e-6)


def test_flux_coefficients_first_modes():
    m1, m2 = eigen_modes(SpatialDomain(1), 2)
    z = BoundaryPoint(0.0)
    assert flux_coefficient(m1, z) == pytest.approx(np.sqrt(2) / np.pi, rel=1e-14)
    assert flux_coefficient(m2, z) == pytest.approx(np.sqrt(2) / (2 * np.pi), rel=1e-14)
    # at x=1 the odd modes keep their sign and the even ones flip
    assert flux_coefficient(m1, BoundaryPoint(1.0)) == pytest.approx(np.sqrt(2) / np.pi)
    assert flux_coefficient(m2, BoundaryPoint(1.0)) == pytest.approx(-np.sqrt(2) / (2 * np.pi))


def test_source_coefficients_quadratic():
    g = SpatialProfile.quadratic()
    m1, m2 = eigen_modes(SpatialDomain(1), 2)
    assert source_coefficient(g, m1) == pytest.approx(4 * np.sqrt(2) / np.pi**3, rel=1e-14)
    assert source_coefficient(g, m2) == 0.0
    # closed form agrees with quadrature and with an adaptive-integration oracle
    ref = quad(lambda x: x * (1 - x) * np.sqrt(2) * np.sin(np.pi * x), 0, 1)[0]
    assert quadrature_coefficient(g, m1) == pytest.approx(ref, abs=1e-10)


def test_source_coefficient_of_single_mode_profile():
    modes = eigen_modes(SpatialDomain(1), 4)
    g = SpatialProfile.mode((3,))
    coeffs = [source_coefficient(g, m) for m in modes]
    assert coeffs == [0.0, 0.0, 1.0, 0.0]
    assert quadrature_coefficient(g, modes[2]) == pytest.approx(1.0, abs=1e-10)


def test_biquadratic_coefficient_is_product():
    g = SpatialProfile.biquadratic()
    mode = eigen_modes(SpatialDomain(2), 1)[0]
    one_d = 4 * np.sqrt(2) / np.pi**3
    assert source_coefficient(g, mode) == pytest.approx(one_d**2, rel=1e-13)
    assert quadrature_coefficient(g, mode) == pytest.approx(one_d**2, rel=1e-8)


@pytest.mark.parametrize("m", [1, 2])
def test_kernel_vanishes_at_zero(m):
    assert kernel_value(BoundaryPoint(0.0), SpatialProfile.quadratic(), m, 0.0, 100) == 0.0


def test_kernel_rejects_negative_time():
    with pytest.raises(InvalidArgumentError):
        kernel_value(BoundaryPoint(0.0), SpatialProfile.quadratic(), 1, -0.1, 10)


def test_heat_kernel_steady_state():
    value = kernel_value(BoundaryPoint(0.0), SpatialProfile.quadratic(), 1, 5.0, 400)
    assert value == pytest.approx(1 / 12, abs=1e-8)


def test_wave_single_mode_kernel():
    # g = phi_1: G_0(t) = c_1 (1 - cos(pi t)) with c_1 = sqrt(2)/pi
    g = SpatialProfile.mode((1,))
    value = kernel_value(BoundaryPoint(0.0), g, 2, 1.0, 4)
    assert value == pytest.approx(2 * np.sqrt(2) / np.pi, rel=1e-14)


def test_2d_heat_steady_state_matches_poisson_solve():
    # oracle: -Laplace v = g on a fine 5-point grid, outward flux at (0, 0.5)
    n = 128
    h = 1.0 / n
    x = np.arange(1, n) * h
    X, Y = np.meshgrid(x, x, indexing="ij")
    g = SpatialProfile.biquadratic()
    d2 = diags([-1, 2, -1], [-1, 0, 1], shape=(n - 1, n - 1)) / h**2
    eye = diags([1], [0], shape=(n - 1, n - 1))
    from scipy.sparse import kron

    lap = kron(d2, eye) + kron(eye, d2)
    v = spsolve(lap.tocsc(), g(X, Y).ravel()).reshape(n - 1, n - 1)
    k = n // 2 - 1
    # flux = dv/dx at x=0, second-order one-sided
    brute = (4 * v[0, k] - v[1, k]) / (2 * h)
    series = kernel_value(BoundaryPoint(0.0, 0.5), g, 1, 20.0, 4000)
    assert series == pytest.approx(brute, rel=2e-3)


def test_weyl_decay_of_kernel_terms():
    # c_n g_n for the quadratic source decays like n^-4 on odd n
    from irsource.spectral import kernel_series

    lams, weights = kernel_series(BoundaryPoint(0.0), SpatialProfile.quadratic(), 41)
    odd = np.arange(1, 42, 2)
    np.testing.assert_allclose(weights[::2] * odd**4, weights[0], rtol=1e-12)
    np.testing.assert_allclose(lams, (np.pi * np.arange(1, 42)) ** 2)


def test_kernel_table_monotone_and_converged():
    grid = GridSpec.from_steps(2**-6, 2**-7)
    table = kernel_table(BoundaryPoint(0.0), SpatialProfile.quadratic(), 1, grid)
    assert table.values.shape == (grid.n_t,)
    assert np.all(np.diff(table.values) >= 0)
    assert table.h_t == pytest.approx(grid.h_t)
    ref = kernel_value(BoundaryPoint(0.0), SpatialProfile.quadratic(), 1, table.times, 4 * table.truncation)
    np.testing.assert_allclose(table.values, ref, atol=1e-8)


def test_kernel_table_truncation_cap():
    grid = GridSpec.from_steps(2**-6, 2**-7)
    with pytest.raises(TruncationLimitError):
        kernel_table(BoundaryPoint(0.0), SpatialProfile.quadratic(), 2, grid, tolerance=1e-14, max_modes=64)


@pytest.mark.parametrize("coords", [(0.0, 0.0), (1.0, 1.0), (0.5, 0.5), (0.3,)])
def test_invalid_boundary_points(coords):
    with pytest.raises(InvalidArgumentError):
        BoundaryPoint(*coords)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.sampled_from(["x0", "x1", "y0", "y1"]))
def test_boundary_point_parse_roundtrip(s, side):
    z = {"x0": (0.0, s), "x1": (1.0, s), "y0": (s, 0.0), "y1": (s, 1.0)}[side]
    point = BoundaryPoint(*z)
    assert point.side == side
    assert BoundaryPoint.parse(point.label()) == point
