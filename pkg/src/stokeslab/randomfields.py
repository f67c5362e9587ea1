"""Seeded random test fields used by the verification reports and tests."""

import numpy as np

from .field import SPECTRAL, PHYSICAL, SpectralField, transform_h


def dealias_mask(grid, frac=2.0 / 3.0):
    """Boolean (nx, ny) mask keeping modes below frac * Nyquist in each direction."""
    mx = np.abs(np.fft.fftfreq(grid.nx) * grid.nx) <= frac * (grid.nx // 2)
    my = np.abs(np.fft.fftfreq(grid.ny) * grid.ny) <= frac * (grid.ny // 2)
    return mx[:, None] & my[None, :]


def gaussian_profile(grid, width, center=0.0):
    """exp(-((z - center)/width)^2) on the vertical nodes."""
    return np.exp(-(((grid.z - center) / width) ** 2))


def random_field(grid, rng, ncomp=1, band_limit=2.0 / 3.0, envelope=None):
    """Band-limited random real field with an optional vertical envelope.

    White noise is sampled in physical space (so Hermitian symmetry is
    exact), transformed, truncated above band_limit * Nyquist, and
    multiplied per vertical node by the envelope.  The horizontal mean is
    zero by the forward-transform convention.
    """
    phys = rng.standard_normal((ncomp, grid.nz, grid.nx, grid.ny))
    f = SpectralField(grid, phys.astype(np.complex128), PHYSICAL)
    f = transform_h(f, "forward")
    data = f.data
    if band_limit is not None:
        data = data * dealias_mask(grid, band_limit)[None, None]
    if envelope is not None:
        data = data * np.asarray(envelope)[None, :, None, None]
    return SpectralField(grid, data, SPECTRAL)


def block_random_field(grid, ladder, j, rng, z_width, ncomp=1):
    """Random field concentrated in dyadic block j with a Gaussian z-profile."""
    f = random_field(grid, rng, ncomp=ncomp, band_limit=None,
                     envelope=gaussian_profile(grid, z_width))
    data = f.data * ladder.block_weight(j)[None, None]
    return SpectralField(grid, data, SPECTRAL)


def single_mode_field(grid, mode=(1, 0), profile=None, amplitude=1.0):
    """Real field amplitude * cos(k . x_h) * profile(z) as a spectral field."""
    data = np.zeros((1, grid.nz, grid.nx, grid.ny), dtype=np.complex128)
    prof = np.ones(grid.nz) if profile is None else np.asarray(profile)
    m1, m2 = mode
    data[0, :, m1 % grid.nx, m2 % grid.ny] = 0.5 * amplitude * prof
    data[0, :, (-m1) % grid.nx, (-m2) % grid.ny] += 0.5 * amplitude * prof
    return SpectralField(grid, data, SPECTRAL)
