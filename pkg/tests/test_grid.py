import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from liouville.grid import (
    ScalarField,
    VectorField,
    derivative,
    divergence,
    from_spectral,
    gradient,
    integrate,
    laplacian,
    leray_project,
    make_grid,
    nudft,
    read_lvf1,
    to_spectral,
    write_lvf1,
)

G16 = make_grid(2, 16, 4.0)


@pytest.mark.parametrize("N,n,L", [(4, 64, 1.0), (2, 100, 1.0), (2, 8, 1.0), (3, 32, 0.0)])
def test_make_grid_rejects(N, n, L):
    with pytest.raises(ValueError):
        make_grid(N, n, L)


def test_grid_geometry():
    g = make_grid(3, 32, 8.0)
    assert g.h == 0.25
    assert g.shape == (32, 32, 32)
    assert g.x[0] == -4.0 and g.x[-1] == 4.0 - 0.25
    assert g.radius[16, 16, 16] == 0.0


def test_integrate_gaussian(grid):
    r2 = grid.radius**2
    assert integrate(ScalarField(grid, np.exp(-r2))) == pytest.approx(np.pi, abs=1e-12)


def test_integrate_rejects_arrays(grid):
    with pytest.raises(TypeError):
        integrate(np.ones(grid.shape))


def test_spectral_matches_continuum_transform(grid):
    # FT of exp(-|x|^2) is pi exp(-|k|^2/4)
    F = to_spectral(ScalarField(grid, np.exp(-(grid.radius**2))))
    for m in [(0, 0), (1, 0), (3, -2), (-7, 5)]:
        k = 2 * np.pi * np.array(m) / grid.L
        assert F.at(m) == pytest.approx(np.pi * np.exp(-k @ k / 4), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (16, 16), elements=st.floats(-1e3, 1e3)))
def test_spectral_round_trip(values):
    f = ScalarField(G16, values)
    back = from_spectral(to_spectral(f)).values
    assert np.allclose(back, values, atol=1e-9 * (1 + np.abs(values).max()))


@settings(max_examples=20, deadline=None)
@given(st.integers(-7, 7), st.integers(-7, 7))
def test_nudft_agrees_with_fft_on_grid_modes(m1, m2):
    rng = np.random.default_rng(abs(m1 * 31 + m2))
    f = ScalarField(G16, rng.standard_normal(G16.shape))
    xi = 2 * np.pi * np.array([m1, m2]) / G16.L
    assert nudft(f, xi) == pytest.approx(to_spectral(f).at((m1, m2)), abs=1e-10)


def test_nudft_shape_check(grid):
    with pytest.raises(ValueError):
        nudft(ScalarField(grid, np.zeros(grid.shape)), [1.0, 2.0, 3.0])


def test_derivative_and_laplacian_of_gaussian(grid):
    x1, x2 = grid.coords
    G = np.exp(-(x1**2 + x2**2))
    f = ScalarField(grid, G)
    assert np.max(np.abs(derivative(f, 0).values + 2 * x1 * G)) < 1e-12
    assert np.max(np.abs(laplacian(f).values - (4 * (x1**2 + x2**2) - 4) * G)) < 1e-11


def test_gradient_is_curl_free_and_projected_away(grid):
    x1, x2 = grid.coords
    phi = ScalarField(grid, np.exp(-(x1**2 + 2 * x2**2)) * x1)
    grad = gradient(phi)
    assert leray_project(grad).max_abs() < 1e-12


def test_leray_projection_properties(small_grid):
    rng = np.random.default_rng(0)
    v = VectorField(small_grid, rng.standard_normal((2, *small_grid.shape)))
    P = leray_project(v)
    assert divergence(P).max_abs() < 1e-10
    assert np.allclose(leray_project(P).components, P.components, atol=1e-12)


def test_lvf1_round_trip(tmp_path, small_grid):
    data = np.arange(2 * 64 * 64, dtype=float).reshape(2, 64, 64)
    path = tmp_path / "f.lvf1"
    write_lvf1(path, small_grid, data)
    raw = path.read_bytes()
    assert raw[:4] == b"LVF1"
    assert struct.unpack_from("<IIdI", raw, 4) == (2, 64, 16.0, 2)
    g, back = read_lvf1(path)
    assert g == small_grid
    assert np.array_equal(back, data)


def test_lvf1_single_field_and_errors(tmp_path, small_grid):
    path = tmp_path / "s.lvf1"
    write_lvf1(path, small_grid, np.ones(small_grid.shape))
    assert read_lvf1(path)[1].shape == (1, 64, 64)
    with pytest.raises(ValueError):
        write_lvf1(path, small_grid, np.ones((3, 3)))
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(ValueError, match="not an LVF1"):
        read_lvf1(path)
    good = tmp_path / "t.lvf1"
    write_lvf1(good, small_grid, np.ones(small_grid.shape))
    good.write_bytes(good.read_bytes()[:-8])
    with pytest.raises(ValueError, match="truncated"):
        read_lvf1(good)


def test_field_shape_validation(small_grid):
    with pytest.raises(ValueError):
        ScalarField(small_grid, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        VectorField(small_grid, np.zeros((3, 64, 64)))
