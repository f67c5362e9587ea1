"""Linear slab Stokes solve: velocity from a divergence-form forcing tensor.

The solution operator acts frequency-by-frequency: horizontal derivatives
are Fourier multipliers, the vertical direction is handled by the four
exponential-kernel operators from modelops.  The assembled velocity is
divergence free; its third component's vertical derivative is produced
from the kernel derivative identities rather than finite differences, so
the discrete divergence vanishes to round-off.
"""

import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import PreconditionError, ShapeError
from .field import (SPECTRAL, SpectralField, symbol_values, to_spectral,
                    vertical_derivative)
from .ladder import BesovIndex, besov_norm, mixed_norm
from .randomfields import gaussian_profile, random_field
from .utils import map_ordered
from .modelops import _apply_kind_data


@dataclass
class ForcingTensor:
    """Nine scalar coefficient fields F_jk on one grid, row-major component order."""

    field: SpectralField

    def __post_init__(self):
        if self.field.ncomp != 9:
            raise ShapeError(f"forcing tensor needs 9 components (got {self.field.ncomp})")

    @property
    def grid(self):
        return self.field.grid

    def component(self, j, k):
        """Scalar entry F_jk with j, k in {1, 2, 3}."""
        return SpectralField(self.grid, self.field.data[3 * (j - 1) + (k - 1)][None],
                             self.field.storage)


@dataclass
class VelocityField:
    """Three velocity components plus the exact vertical derivative of u3."""

    field: SpectralField
    d3u3: SpectralField = None

    def __post_init__(self):
        if self.field.ncomp != 3:
            raise ShapeError(f"velocity needs 3 components (got {self.field.ncomp})")

    @property
    def grid(self):
        return self.field.grid


def apply_D(F):
    """Solve the linear problem: velocity whose Laplacian matches the
    divergence-free part of div F.

    All kernel convolutions run in four batched sweeps: one first-stage
    sweep per kernel parity, then one second-stage sweep per parity for
    the iterated (tilde) operators.  The vertical derivative of u3 comes
    from the kernel derivative identities, not finite differences.
    """
    f = to_spectral(F.field)
    grid = f.grid
    d = f.data  # (9, nz, nx, ny)
    if np.abs(d[..., 0, 0]).max() > 0:
        raise PreconditionError("forcing carries a nonzero horizontal mean")

    dx = (symbol_values(grid, "partial_x1")[None],
          symbol_values(grid, "partial_x2")[None])
    lap_h = -(grid.kmag ** 2)[None]
    a2 = (grid.kmag ** 2)[None]

    def comp(j, k):
        return d[3 * j + k]

    A = sum(dx[j] * dx[k] * comp(j, k) for j in range(2) for k in range(2))
    B = sum(dx[j] * comp(j, 2) for j in range(2))
    Bp = sum(dx[j] * comp(2, j) for j in range(2))
    bb = B + Bp
    h = A - lap_h * comp(2, 2)
    g0 = [sum(dx[j] * comp(ell, j) for j in range(2)) - dx[ell] * comp(2, 2)
          for ell in range(2)]

    s0 = _apply_kind_data(
        np.stack([g0[0], g0[1], -B, h, -lap_h * bb, bb]), grid, "D0")
    d0_g0 = s0[:2]
    d0_mB, d0_h, d0_mlap, d0_bb = s0[2], s0[3], s0[4], s0[5]
    s1 = _apply_kind_data(np.stack([comp(0, 2), comp(1, 2), -B]), grid, "D1")
    d1_f = s1[:2]
    d1_mB = s1[2]
    t0 = _apply_kind_data(np.stack([d0_h, d0_mlap]), grid, "D0")
    dt0_h, dt0_mlap = t0[0], t0[1]
    t1 = _apply_kind_data(np.stack([d0_h, d0_mlap, d0_bb]), grid, "D1")
    dt1_h, dt1_mlap, dt1_bb = t1[0], t1[1], t1[2]

    u = np.zeros_like(d[:3])
    for ell in range(2):
        u[ell] = d0_g0[ell] + d1_f[ell] + dx[ell] * (dt0_h + dt1_bb)
    u[2] = d0_mB + dt0_mlap + dt1_h

    # d3 of u3 by the identities d3 D0 = D1, d3 Dt0 = Dt1,
    # d3 Dt1 = -D0 + a^2 Dt0
    d3u3 = d1_mB + dt1_mlap + (-d0_h + a2 * dt0_h)

    return VelocityField(field=SpectralField(grid, u, SPECTRAL),
                         d3u3=SpectralField(grid, d3u3[None], SPECTRAL))


def _scalar(grid, arr):
    return SpectralField(grid, arr[None], SPECTRAL)


def _l2(grid, arrs):
    """Mixed L2L2 norm of a stack of scalar coefficient arrays."""
    data = np.stack(arrs) if len(arrs) > 1 else np.asarray(arrs[0])[None]
    return mixed_norm(SpectralField(grid, data, SPECTRAL), 2, 2)


@dataclass
class LinearResidualReport:
    rel_div: float
    rel_curl: float
    div_pass: bool
    curl_pass: bool


def linear_residual(u, F, div_tol=1e-8, curl_tol=2e-3):
    """Check that u solves the linear problem for forcing F.

    rel_div measures the discrete divergence of u against its gradient.
    rel_curl measures the curl of R = -lap(u) - div F against R itself;
    R must be a pressure gradient, so a small curl certifies the solve
    without constructing the projection in the vertical direction.
    """
    uf = to_spectral(u.field)
    ff = to_spectral(F.field)
    grid = uf.grid
    if ff.grid != grid:
        raise ShapeError("velocity and forcing live on different grids")

    dx = (symbol_values(grid, "partial_x1")[None],
          symbol_values(grid, "partial_x2")[None])
    a2 = (grid.kmag ** 2)[None]

    du = np.empty((3, 3) + uf.data.shape[1:], dtype=np.complex128)
    for ell in range(3):
        comp = _scalar(grid, uf.data[ell])
        du[ell, 0] = dx[0] * uf.data[ell]
        du[ell, 1] = dx[1] * uf.data[ell]
        du[ell, 2] = vertical_derivative(comp, 1).data[0]
    if u.d3u3 is not None:
        du[2, 2] = to_spectral(u.d3u3).data[0]

    div_u = du[0, 0] + du[1, 1] + du[2, 2]
    grad_norm = _l2(grid, [du[ell, j] for ell in range(3) for j in range(3)])
    rel_div = _l2(grid, [div_u]) / grad_norm if grad_norm > 0 else 0.0

    R = np.empty_like(uf.data)
    for ell in range(3):
        comp = _scalar(grid, uf.data[ell])
        neg_lap = a2 * uf.data[ell] - vertical_derivative(comp, 2).data[0]
        div_f = (dx[0] * ff.data[3 * ell + 0] + dx[1] * ff.data[3 * ell + 1]
                 + vertical_derivative(_scalar(grid, ff.data[3 * ell + 2]), 1).data[0])
        R[ell] = neg_lap - div_f

    d3R = [vertical_derivative(_scalar(grid, R[ell]), 1).data[0] for ell in range(3)]
    curl = [dx[1] * R[2] - d3R[1],
            d3R[0] - dx[0] * R[2],
            dx[0] * R[1] - dx[1] * R[0]]
    r_norm = _l2(grid, [R[0], R[1], R[2]])
    rel_curl = _l2(grid, curl) / r_norm if r_norm > 0 else 0.0

    return LinearResidualReport(rel_div=float(rel_div), rel_curl=float(rel_curl),
                                div_pass=rel_div <= div_tol,
                                curl_pass=rel_curl <= curl_tol)


@dataclass
class LinearBoundReport:
    s: float
    p: float
    q: float
    r: float
    rows: list = dfield(default_factory=list)  # (trial, ratio)
    max_ratio: float = math.nan


def linear_bound_report(grid, ladder, s, p, q, r, trials, seed=0,
                        z_width=2.0, threads=1):
    """Empirical operator-norm ratios: output in smoothness s against input
    in smoothness s - 1, over random band-limited forcings."""
    for name, val in (("p", p), ("q", q), ("r", r)):
        if not (1 <= val):
            raise PreconditionError(f"exponent {name} must satisfy {name} >= 1 (got {val})")
    idx_out = BesovIndex(s=s, p=p, q=q, r=r)
    idx_in = BesovIndex(s=s - 1.0, p=p, q=q, r=r)

    def one(trial):
        rng = np.random.default_rng([seed, trial])
        env = gaussian_profile(grid, z_width)
        f9 = random_field(grid, rng, ncomp=9, envelope=env)
        u = apply_D(ForcingTensor(f9))
        num = besov_norm(u.field, idx_out, ladder)
        den = besov_norm(f9, idx_in, ladder)
        return (trial, num / den if den > 0 else 0.0)

    rows = map_ordered(one, range(trials), threads)
    rep = LinearBoundReport(s=s, p=p, q=q, r=r, rows=rows)
    if rows:
        rep.max_ratio = float(max(rr[1] for rr in rows))
    return rep
