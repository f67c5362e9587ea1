import math

import numpy as np
import pytest

from stokeslab import (ForcingTensor, PreconditionError, ShapeError,
                       SpectralField, VelocityField, apply_D,
                       gaussian_profile, linear_bound_report, linear_residual,
                       make_grid, mixed_norm, single_mode_field, zero_field)
from stokeslab.field import SPECTRAL


def _tall_grid(nz=257):
    return make_grid(16, 16, 2 * math.pi, 2 * math.pi, nz, -8.0, 8.0)


def _single_mode_tensor(grid, comp=2, mode=(1, 0), width=1.5):
    data = np.zeros((9, grid.nz, grid.nx, grid.ny), complex)
    f = single_mode_field(grid, mode=mode, profile=gaussian_profile(grid, width))
    data[comp] = f.data[0]
    return ForcingTensor(SpectralField(grid, data, SPECTRAL))


def test_forcing_tensor_shape_check(grid):
    with pytest.raises(ShapeError, match="9 components"):
        ForcingTensor(zero_field(grid, ncomp=3))
    with pytest.raises(ShapeError, match="3 components"):
        VelocityField(field=zero_field(grid, ncomp=9))


def test_zero_forcing_gives_zero_velocity(grid):
    u = apply_D(ForcingTensor(zero_field(grid, ncomp=9)))
    assert np.abs(u.field.data).max() == 0.0
    assert np.abs(u.d3u3.data).max() == 0.0


def test_nonzero_mean_forcing_rejected(grid):
    data = np.zeros((9, grid.nz, grid.nx, grid.ny), complex)
    data[0, :, 0, 0] = 1.0
    with pytest.raises(PreconditionError, match="horizontal mean"):
        apply_D(ForcingTensor(SpectralField(grid, data, SPECTRAL)))


def test_gradient_forcing_annihilated():
    # F = phi * Identity: div F is a gradient, so the projection kills it
    g = _tall_grid(129)
    phi = single_mode_field(g, mode=(2, 1), profile=gaussian_profile(g, 1.5))
    data = np.zeros((9, g.nz, g.nx, g.ny), complex)
    for ell in range(3):
        data[4 * ell] = phi.data[0]
    u = apply_D(ForcingTensor(SpectralField(g, data, SPECTRAL)))
    out = mixed_norm(u.field, 2, 2)
    src = mixed_norm(phi, 2, 2)
    assert out <= 1e-8 * src


def test_apply_D_linearity(grid):
    f1 = _single_mode_tensor(grid, comp=1, mode=(1, 0))
    f2 = _single_mode_tensor(grid, comp=5, mode=(0, 2))
    both = ForcingTensor(SpectralField(grid, f1.field.data + f2.field.data,
                                       SPECTRAL))
    u1 = apply_D(f1)
    u2 = apply_D(f2)
    u12 = apply_D(both)
    total = u1.field.data + u2.field.data
    assert np.abs(u12.field.data - total).max() <= 1e-14


def test_single_mode_solve_passes_residual():
    g = _tall_grid(257)
    u = apply_D(_single_mode_tensor(g))
    rep = linear_residual(u, _single_mode_tensor(g))
    assert rep.rel_div <= 1e-8
    assert rep.rel_curl <= 2e-3
    assert rep.div_pass and rep.curl_pass


def test_residual_converges_with_resolution():
    curls = {}
    for nz in (257, 513):
        g = _tall_grid(nz)
        F = _single_mode_tensor(g)
        rep = linear_residual(apply_D(F), F)
        curls[nz] = rep.rel_curl
    assert curls[257] / curls[513] >= 3.8


def test_zero_velocity_zero_forcing_residual(grid):
    u = VelocityField(field=zero_field(grid, ncomp=3),
                      d3u3=zero_field(grid, ncomp=1))
    rep = linear_residual(u, ForcingTensor(zero_field(grid, ncomp=9)))
    assert rep.rel_div == 0.0
    assert rep.rel_curl == 0.0


def test_non_solution_flagged():
    # u = curl of a vertical vector potential: divergence free but it does
    # not solve the zero-forcing problem, so the curl check must fail
    g = _tall_grid(129)
    psi = single_mode_field(g, mode=(2, 1), profile=gaussian_profile(g, 1.5))
    dx = 1j * g.kx[:, None] * np.ones((1, g.ny))
    dy = np.ones((g.nx, 1)) * (1j * g.ky[None, :])
    data = np.zeros((3, g.nz, g.nx, g.ny), complex)
    data[0] = dy[None] * psi.data[0]
    data[1] = -dx[None] * psi.data[0]
    u = VelocityField(field=SpectralField(g, data, SPECTRAL),
                      d3u3=zero_field(g, ncomp=1))
    rep = linear_residual(u, ForcingTensor(zero_field(g, ncomp=9)))
    assert rep.rel_div <= 1e-10
    assert rep.rel_curl > 0.1
    assert not rep.curl_pass


def test_grid_mismatch_rejected(grid):
    other = make_grid(16, 16, 2 * math.pi, 2 * math.pi, 65, -8.0, 8.0)
    u = VelocityField(field=zero_field(grid, ncomp=3))
    with pytest.raises(ShapeError, match="different grids"):
        linear_residual(u, ForcingTensor(zero_field(other, ncomp=9)))


def test_linear_bound_report(grid, ladder):
    rep = linear_bound_report(grid, ladder, s=0.5, p=2.0, q=1.0, r=2.0,
                              trials=2, seed=6)
    assert len(rep.rows) == 2
    assert 0.0 < rep.max_ratio < np.inf
    empty = linear_bound_report(grid, ladder, s=0.5, p=2.0, q=1.0, r=2.0,
                                trials=0)
    assert empty.rows == []
    with pytest.raises(PreconditionError, match="exponent"):
        linear_bound_report(grid, ladder, s=0.5, p=0.5, q=1.0, r=2.0, trials=1)
