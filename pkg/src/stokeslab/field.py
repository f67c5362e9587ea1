"""Field representation, horizontal transforms, multipliers, vertical derivatives.

A field lives on a SlabGrid and is stored either as physical samples or as
horizontal Fourier coefficients per vertical node.  Coefficients are mode
amplitudes: the forward transform divides by nx*ny, so a single mode
exp(i*k.x_h) has coefficient 1 at k.  The horizontal mean (xi_h = 0 mode)
is forced to zero by every forward transform; all model operators carry
1/|xi_h| singularities and the zero mode is meaningless in the homogeneous
setting.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridError, ParameterError, ShapeError
from .grid import SlabGrid

SPECTRAL = "spectral"
PHYSICAL = "physical"

BOUNDARY_DECAY_THRESHOLD = 1e-10


@dataclass
class SpectralField:
    """A scalar/vector/tensor field: complex data of shape (ncomp, nz, nx, ny)."""

    grid: SlabGrid
    data: np.ndarray
    storage: str = SPECTRAL

    def __post_init__(self):
        if self.data.ndim == 3:
            self.data = self.data[None, :, :, :]
        g = self.grid
        if self.data.shape[1:] != (g.nz, g.nx, g.ny):
            raise ShapeError(
                f"field data shape {self.data.shape} does not match grid "
                f"(nz, nx, ny) = ({g.nz}, {g.nx}, {g.ny})")
        if self.data.shape[0] not in (1, 3, 9):
            raise ShapeError(f"ncomp must be 1, 3 or 9 (got {self.data.shape[0]})")
        self.data = np.ascontiguousarray(self.data, dtype=np.complex128)

    @property
    def ncomp(self):
        return self.data.shape[0]

    def copy(self):
        return SpectralField(self.grid, self.data.copy(), self.storage)

    def __add__(self, other):
        _check_same(self, other)
        return SpectralField(self.grid, self.data + other.data, self.storage)

    def __sub__(self, other):
        _check_same(self, other)
        return SpectralField(self.grid, self.data - other.data, self.storage)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.data * scalar, self.storage)

    __rmul__ = __mul__


def _check_same(a, b):
    if a.grid != b.grid:
        raise ShapeError("fields live on different grids")
    if a.storage != b.storage or a.ncomp != b.ncomp:
        raise ShapeError("fields have mismatched storage or component count")


def zero_field(grid, ncomp=1, storage=SPECTRAL):
    return SpectralField(grid, np.zeros((ncomp, grid.nz, grid.nx, grid.ny),
                                        dtype=np.complex128), storage)


def transform_h(field, direction):
    """Horizontal Fourier transform (forward: physical -> spectral).

    Forward divides by nx*ny and zeroes the horizontal mean at every
    vertical node; inverse is the exact discrete inverse on mean-zero data.
    """
    g = field.grid
    if direction == "forward":
        if field.storage != PHYSICAL:
            raise ShapeError("forward transform expects physical storage")
        coef = np.fft.fft2(field.data, axes=(-2, -1)) / (g.nx * g.ny)
        coef[..., 0, 0] = 0.0
        return SpectralField(g, coef, SPECTRAL)
    if direction == "inverse":
        if field.storage != SPECTRAL:
            raise ShapeError("inverse transform expects spectral storage")
        phys = np.fft.ifft2(field.data * (g.nx * g.ny), axes=(-2, -1))
        return SpectralField(g, phys, PHYSICAL)
    raise ParameterError(f"unknown transform direction {direction!r}")


def to_spectral(field):
    return field if field.storage == SPECTRAL else transform_h(field, "forward")


def to_physical(field):
    return field if field.storage == PHYSICAL else transform_h(field, "inverse")


def symbol_values(grid, name, T=None, j=None, ladder=None):
    """Evaluate a named multiplier symbol on the (nx, ny) frequency lattice."""
    if name == "partial_x1":
        return (1j * grid.kx)[:, None] * np.ones((1, grid.ny))
    if name == "partial_x2":
        return np.ones((grid.nx, 1)) * (1j * grid.ky)[None, :]
    if name == "inv_modulus":
        k = grid.kmag
        with np.errstate(divide="ignore"):
            s = np.where(k > 0, 1.0 / np.where(k > 0, k, 1.0), 0.0)
        return s
    if name == "exp_semigroup":
        if T is None or T < 0:
            raise ParameterError(f"exp_semigroup requires T >= 0 (got {T})")
        return np.exp(-grid.kmag * T)
    if name == "block_weight":
        if ladder is None or j is None:
            raise ParameterError("block_weight requires a ladder and a block index j")
        return ladder.block_weight(j)
    raise ParameterError(f"unknown multiplier symbol {name!r}")


def multiplier_h(field, name, **kw):
    """Apply a named Fourier multiplier; singular symbols act as zero on the zero mode."""
    f = to_spectral(field)
    sym = symbol_values(f.grid, name, **kw)
    return SpectralField(f.grid, f.data * sym[None, None, :, :], SPECTRAL)


def _fornberg_weights(xi, x, m):
    """Finite-difference weights at xi for derivative order m on nodes x (Fornberg)."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - xi
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - xi
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def _diff_stencils(nz, dz, order):
    """Interior stencil plus one-sided boundary rows, all 4th-order accurate."""
    if order == 1:
        half = 2
        interior = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * dz)
        npts = min(5, nz)
    elif order == 2:
        half = 2
        interior = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * dz * dz)
        npts = min(6, nz)
    else:
        raise ParameterError(f"derivative order must be 1 or 2 (got {order})")
    nodes = np.arange(npts) * dz
    top = [ _fornberg_weights(i * dz, nodes, order) for i in range(half) ]
    bot = [ _fornberg_weights((nz - 1 - i) * dz, (nz - npts + np.arange(npts)) * dz, order)
            for i in range(half - 1, -1, -1) ]
    return interior, np.array(top), np.array(bot), half, npts


def vertical_derivative(field, order):
    """4th-order finite-difference d/dz or d2/dz2 along the vertical axis."""
    g = field.grid
    if g.nz < 5:
        raise GridError(f"nz >= 5 required for the 4th-order stencil (got {g.nz})")
    interior, top, bot, half, npts = _diff_stencils(g.nz, g.dz, order)
    u = field.data
    out = np.zeros_like(u)
    # interior: centered 5-point stencil
    for s, c in enumerate(interior):
        if c != 0.0:
            out[:, half:g.nz - half] += c * u[:, s:g.nz - 2 * half + s]
    # boundary bands: one-sided stencils on the first/last npts nodes
    for i in range(half):
        out[:, i] = np.tensordot(top[i], u[:, :npts], axes=(0, 1))
        out[:, g.nz - half + i] = np.tensordot(bot[i], u[:, g.nz - npts:], axes=(0, 1))
    return SpectralField(g, out, field.storage)


def boundary_magnitude(field):
    """Largest |value| on the two vertical boundary planes (physical samples)."""
    p = to_physical(field)
    return float(max(np.abs(p.data[:, 0]).max(), np.abs(p.data[:, -1]).max()))


def weight_vertical(field, sigma):
    """Multiply a physical-storage field pointwise by <z>^sigma = (1+z^2)^(sigma/2)."""
    if sigma == 0:
        return field
    p = to_physical(field)
    w = (1.0 + p.grid.z ** 2) ** (sigma / 2.0)
    return SpectralField(p.grid, p.data * w[None, :, None, None], PHYSICAL)
