"""Slab grid: periodic in the horizontal plane, bounded in the vertical."""

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError


def _is_pow2(n):
    return n >= 4 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SlabGrid:
    """Discretization of a horizontally periodic slab.

    The horizontal plane is a torus [0, Lx) x [0, Ly) sampled on nx x ny
    nodes; the vertical coordinate runs over [z_min, z_max] on nz equally
    spaced nodes (endpoints included).
    """

    nx: int
    ny: int
    Lx: float
    Ly: float
    nz: int
    z_min: float
    z_max: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dz(self):
        return (self.z_max - self.z_min) / (self.nz - 1)

    @property
    def cell_area(self):
        return (self.Lx / self.nx) * (self.Ly / self.ny)

    @property
    def z(self):
        """Vertical node coordinates, shape (nz,)."""
        if "z" not in self._cache:
            self._cache["z"] = np.linspace(self.z_min, self.z_max, self.nz)
        return self._cache["z"]

    @property
    def kx(self):
        """Horizontal wavenumbers along x1 in FFT order, shape (nx,)."""
        if "kx" not in self._cache:
            self._cache["kx"] = 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.Lx / self.nx)
        return self._cache["kx"]

    @property
    def ky(self):
        if "ky" not in self._cache:
            self._cache["ky"] = 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.Ly / self.ny)
        return self._cache["ky"]

    @property
    def kmag(self):
        """|xi_h| on the (nx, ny) frequency lattice."""
        if "kmag" not in self._cache:
            kx = self.kx[:, None]
            ky = self.ky[None, :]
            self._cache["kmag"] = np.sqrt(kx * kx + ky * ky)
        return self._cache["kmag"]

    @property
    def z_weights(self):
        """Trapezoidal quadrature weights over [z_min, z_max], shape (nz,)."""
        if "zw" not in self._cache:
            w = np.full(self.nz, self.dz)
            w[0] *= 0.5
            w[-1] *= 0.5
            self._cache["zw"] = w
        return self._cache["zw"]

    @property
    def x(self):
        if "x" not in self._cache:
            self._cache["x"] = np.arange(self.nx) * (self.Lx / self.nx)
        return self._cache["x"]

    @property
    def y(self):
        if "y" not in self._cache:
            self._cache["y"] = np.arange(self.ny) * (self.Ly / self.ny)
        return self._cache["y"]


def make_grid(nx, ny, Lx, Ly, nz, z_min, z_max):
    """Validate parameters and build a SlabGrid.

    nx, ny must be powers of two >= 4; nz >= 3; periods positive; z_min < z_max.
    """
    if not _is_pow2(nx):
        raise GridError(f"nx not a power of two >= 4 (got {nx})")
    if not _is_pow2(ny):
        raise GridError(f"ny not a power of two >= 4 (got {ny})")
    if Lx <= 0:
        raise GridError(f"Lx must be positive (got {Lx})")
    if Ly <= 0:
        raise GridError(f"Ly must be positive (got {Ly})")
    if nz < 3:
        raise GridError(f"nz < 3 (got {nz})")
    if not z_min < z_max:
        raise GridError(f"z_min >= z_max (got z_min={z_min}, z_max={z_max})")
    return SlabGrid(int(nx), int(ny), float(Lx), float(Ly), int(nz),
                    float(z_min), float(z_max))
