import math

import numpy as np
import pytest

from stokeslab import (GridError, ParameterError, ShapeError, SpectralField,
                       make_grid, multiplier_h, random_field, single_mode_field,
                       to_physical, to_spectral, transform_h,
                       vertical_derivative, weight_vertical, zero_field)
from stokeslab.field import PHYSICAL, SPECTRAL


def test_grid_arithmetic():
    g = make_grid(64, 64, 2 * math.pi, 2 * math.pi, 129, -8.0, 8.0)
    assert g.dz == 0.125
    assert np.abs(g.kx).max() == 32
    assert np.abs(g.ky).max() == 32
    assert g.z[0] == -8.0 and g.z[-1] == 8.0
    assert np.isclose(g.cell_area, (2 * math.pi / 64) ** 2)
    assert np.isclose(g.z_weights.sum(), 16.0)


def test_grid_validation():
    with pytest.raises(GridError, match="nx not a power of two"):
        make_grid(3, 64, 2 * math.pi, 2 * math.pi, 129, -8.0, 8.0)
    with pytest.raises(GridError, match="ny not a power of two"):
        make_grid(64, 48, 2 * math.pi, 2 * math.pi, 129, -8.0, 8.0)
    with pytest.raises(GridError, match="nz < 3"):
        make_grid(64, 64, 2 * math.pi, 2 * math.pi, 2, -8.0, 8.0)
    with pytest.raises(GridError, match="Lx must be positive"):
        make_grid(64, 64, -1.0, 2 * math.pi, 129, -8.0, 8.0)
    with pytest.raises(GridError, match="z_min >= z_max"):
        make_grid(64, 64, 2 * math.pi, 2 * math.pi, 129, 8.0, -8.0)


def test_field_shape_checks(grid):
    with pytest.raises(ShapeError, match="ncomp"):
        SpectralField(grid, np.zeros((2, grid.nz, grid.nx, grid.ny), complex))
    with pytest.raises(ShapeError, match="does not match grid"):
        SpectralField(grid, np.zeros((1, grid.nz, grid.nx, 2), complex))
    # a 3d array is promoted to a single component
    f = SpectralField(grid, np.zeros((grid.nz, grid.nx, grid.ny), complex))
    assert f.ncomp == 1


def test_forward_zeroes_horizontal_mean(grid):
    data = np.ones((1, grid.nz, grid.nx, grid.ny), complex)
    f = transform_h(SpectralField(grid, data, PHYSICAL), "forward")
    assert np.abs(f.data).max() == 0.0


def test_transform_round_trip(grid, rng):
    f = random_field(grid, rng)
    back = to_spectral(to_physical(f))
    scale = np.abs(f.data).max()
    assert np.abs(back.data - f.data).max() <= 1e-12 * scale


def test_hermitian_symmetry(grid, rng):
    f = random_field(grid, rng)
    d = f.data[0]
    flipped = np.conj(d[:, (-np.arange(grid.nx)) % grid.nx][:, :, (-np.arange(grid.ny)) % grid.ny])
    assert np.abs(d - flipped).max() <= 1e-13 * np.abs(d).max()


def test_discrete_parseval(grid, rng):
    f = random_field(grid, rng)
    p = to_physical(f)
    phys_sum = np.sum(np.abs(p.data) ** 2) * grid.cell_area
    spec_sum = np.sum(np.abs(f.data) ** 2) * grid.Lx * grid.Ly
    assert np.isclose(phys_sum, spec_sum, rtol=1e-12)


def test_single_mode_coefficient_convention(grid):
    # cos(2 x1) has amplitude-1/2 coefficients at the +-(2,0) modes
    f = single_mode_field(grid, mode=(2, 0))
    assert np.isclose(f.data[0, 0, 2, 0], 0.5)
    assert np.isclose(f.data[0, 0, -2 % grid.nx, 0], 0.5)
    p = to_physical(f)
    assert np.allclose(p.data[0, 0].real, np.cos(2 * grid.x)[:, None], atol=1e-13)


def test_inv_modulus_on_eigenfunction(grid):
    f = single_mode_field(grid, mode=(2, 0))
    out = multiplier_h(f, "inv_modulus")
    assert np.abs(out.data - 0.5 * f.data).max() <= 1e-14


def test_exp_semigroup_on_eigenfunction(grid):
    f = single_mode_field(grid, mode=(2, 0))
    out = multiplier_h(f, "exp_semigroup", T=1.0)
    assert np.abs(out.data - math.exp(-2.0) * f.data).max() <= 1e-14


def test_inv_modulus_zero_mode_is_zero(grid):
    data = np.zeros((1, grid.nz, grid.nx, grid.ny), complex)
    data[0, :, 0, 0] = 1.0
    out = multiplier_h(SpectralField(grid, data, SPECTRAL), "inv_modulus")
    assert np.abs(out.data).max() == 0.0


def test_multiplier_validation(grid):
    f = single_mode_field(grid)
    with pytest.raises(ParameterError, match="unknown multiplier"):
        multiplier_h(f, "no_such_symbol")
    with pytest.raises(ParameterError, match="T >= 0"):
        multiplier_h(f, "exp_semigroup", T=-1.0)


def test_vertical_derivative_linear_profile(grid):
    data = np.zeros((1, grid.nz, grid.nx, grid.ny), complex)
    data[0, :, 1, 0] = grid.z
    d = vertical_derivative(SpectralField(grid, data, SPECTRAL), 1)
    assert np.abs(d.data[0, :, 1, 0] - 1.0).max() <= 1e-11


def test_vertical_derivative_constant_profile(grid):
    data = np.zeros((1, grid.nz, grid.nx, grid.ny), complex)
    data[0, :, 1, 0] = 1.0
    d = vertical_derivative(SpectralField(grid, data, SPECTRAL), 1)
    assert np.abs(d.data).max() <= 1e-12


def test_vertical_derivative_fourth_order():
    errs = {}
    for nz in (129, 257):
        g = make_grid(4, 4, 2 * math.pi, 2 * math.pi, nz, -8.0, 8.0)
        data = np.zeros((1, nz, 4, 4), complex)
        data[0, :, 1, 0] = np.sin(g.z)
        d2 = vertical_derivative(SpectralField(g, data, SPECTRAL), 2)
        errs[nz] = np.abs(d2.data[0, :, 1, 0] + np.sin(g.z)).max()
    assert errs[129] / errs[257] >= 2 ** 3.8


def test_vertical_derivative_validation():
    g = make_grid(4, 4, 2 * math.pi, 2 * math.pi, 4, -1.0, 1.0)
    f = zero_field(g)
    with pytest.raises(GridError, match="nz >= 5"):
        vertical_derivative(f, 1)
    g5 = make_grid(4, 4, 2 * math.pi, 2 * math.pi, 5, -1.0, 1.0)
    with pytest.raises(ParameterError, match="order"):
        vertical_derivative(zero_field(g5), 3)


def test_weight_vertical(grid, rng):
    f = random_field(grid, rng)
    w = weight_vertical(f, 0.5)
    p = to_physical(f)
    expected = p.data * ((1.0 + grid.z ** 2) ** 0.25)[None, :, None, None]
    assert np.abs(w.data - expected).max() <= 1e-13 * np.abs(expected).max()
    assert weight_vertical(f, 0.0) is f
