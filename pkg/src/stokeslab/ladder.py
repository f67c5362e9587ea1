"""Dyadic filter bank and the hybrid mixed/Besov norms.

Blocks select horizontal frequencies |xi_h| ~ 2^j through a smooth radial
bump supported in [3/4, 8/3] whose dilates sum to 1 on every nonzero
frequency of the grid.  Norms take L^p over the horizontal torus inside
L^r over the vertical interval, then l^q over blocks with weight 2^{js}.
"""

import math
import warnings
from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import LadderError, ParameterError
from .field import SPECTRAL, SpectralField, to_physical, to_spectral

INF = math.inf

SUPPORT_LO = 0.75
SUPPORT_HI = 8.0 / 3.0
_CHI_ONE = 0.75     # chi == 1 below this radius
_CHI_ZERO = 4.0 / 3.0  # chi == 0 above this radius


def _smoothstep(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def chi(t):
    """Smooth cutoff: 1 on [0, 3/4], 0 on [4/3, inf)."""
    t = np.asarray(t, dtype=np.float64)
    return _smoothstep((_CHI_ZERO - t) / (_CHI_ZERO - _CHI_ONE))


def bump(t):
    """Radial block profile phi(t) = chi(t/2) - chi(t), supported in [3/4, 8/3]."""
    t = np.asarray(t, dtype=np.float64)
    return chi(0.5 * t) - chi(t)


@dataclass
class DyadicLadder:
    grid: object
    j_min: int
    j_max: int
    _weights: dict = dfield(default_factory=dict, repr=False)

    @property
    def blocks(self):
        return range(self.j_min, self.j_max + 1)

    def block_weight(self, j):
        """phi(2^{-j} |xi_h|) on the (nx, ny) frequency lattice."""
        if j not in self._weights:
            self._weights[j] = bump(self.grid.kmag * 2.0 ** (-j))
        return self._weights[j]

    def lowpass_weight(self, j):
        """Symbol of sum_{j' <= j-1} Delta_{j'}, i.e. chi(2^{-j} |xi_h|)."""
        return chi(self.grid.kmag * 2.0 ** (-j))


def build_ladder(grid, bump_kind="smooth"):
    """Choose the block range covering every nonzero grid frequency exactly."""
    if bump_kind != "smooth":
        raise LadderError(f"unknown bump kind {bump_kind!r}")
    kmag = grid.kmag
    nonzero = kmag[kmag > 0]
    k_lo = float(nonzero.min())
    k_hi = float(nonzero.max())
    # chi(2^{-j_min} k) must vanish for every k >= k_lo: 2^{j_min} <= 3 k_lo / 4.
    j_min = math.floor(math.log2(_CHI_ONE * k_lo) + 1e-12)
    # chi(2^{-(j_max+1)} k) must equal 1 for every k <= k_hi: 2^{j_max+1} >= 4 k_hi / 3.
    j_max = math.ceil(math.log2(k_hi / _CHI_ONE) - 1e-12) - 1
    if j_max - j_min + 1 < 3:
        raise LadderError(
            f"grid too coarse: only {j_max - j_min + 1} dyadic blocks fit")
    ladder = DyadicLadder(grid, j_min, j_max)
    for j in ladder.blocks:
        ladder.block_weight(j)
    return ladder


def dyadic_block(field, j, ladder):
    """Apply the block filter Delta_j."""
    if j < ladder.j_min or j > ladder.j_max:
        raise IndexError(f"block {j} outside ladder range [{ladder.j_min}, {ladder.j_max}]")
    f = to_spectral(field)
    return SpectralField(f.grid, f.data * ladder.block_weight(j)[None, None], SPECTRAL)


def low_pass(field, j, ladder):
    """Apply the cumulative filter S_j = sum over blocks strictly below j."""
    f = to_spectral(field)
    return SpectralField(f.grid, f.data * ladder.lowpass_weight(j)[None, None], SPECTRAL)


@dataclass(frozen=True)
class BesovIndex:
    """Names a hybrid norm: l^q over blocks of 2^{js} L^r_z L^p_h, with options.

    part selects the block range relative to the split threshold N0:
    'low' keeps j <= N0, 'high' keeps j >= N0 - 1.  sigma > 0 weights the
    field by <z>^sigma before any norm is taken.
    """

    s: float
    p: float
    q: float
    r: float
    part: str = "full"
    N0: int = 0
    sigma: float = 0.0

    def __post_init__(self):
        for name in ("p", "q", "r"):
            v = getattr(self, name)
            if not (v == INF or 1 <= v < INF):
                raise ParameterError(f"{name} must be in [1, inf] (got {v})")
        if self.part not in ("full", "low", "high"):
            raise ParameterError(f"part must be full/low/high (got {self.part!r})")
        if self.sigma < 0:
            raise ParameterError(f"sigma must be >= 0 (got {self.sigma})")


def mixed_norm(field, p, r):
    """L^r over the vertical interval of L^p over the horizontal torus.

    Horizontal integrals are Riemann sums with the cell area (spectrally
    exact for band-limited data); vertical integrals use trapezoid weights.
    """
    for name, v in (("p", p), ("r", r)):
        if not (v == INF or 1 <= v < INF):
            raise ParameterError(f"{name} must be in [1, inf] (got {v})")
    g = field.grid
    if p == 2 and field.storage == SPECTRAL:
        # Parseval: the horizontal L2 integral straight from coefficients
        inner = np.sqrt(np.sum(np.abs(field.data) ** 2, axis=(0, 2, 3))
                        * g.Lx * g.Ly)
    else:
        ph = to_physical(field)
        mag = np.sqrt(np.sum(np.abs(ph.data) ** 2, axis=0))  # (nz, nx, ny)
        if p == INF:
            inner = mag.max(axis=(1, 2))
        else:
            inner = (np.sum(mag ** p, axis=(1, 2)) * g.cell_area) ** (1.0 / p)
    if r == INF:
        return float(inner.max())
    return float(np.sum(g.z_weights * inner ** r) ** (1.0 / r))


def _selected_blocks(index, ladder):
    if index.part == "full":
        return list(ladder.blocks)
    if index.part == "low":
        return [j for j in ladder.blocks if j <= index.N0]
    return [j for j in ladder.blocks if j >= index.N0 - 1]


def besov_norm(field, index, ladder):
    """The hybrid norm named by a BesovIndex, computed over the ladder's blocks."""
    f = to_spectral(field)
    if index.sigma > 0:
        w = (1.0 + f.grid.z ** 2) ** (index.sigma / 2.0)
        f = SpectralField(f.grid, f.data * w[None, :, None, None], SPECTRAL)
    js = _selected_blocks(index, ladder)
    if not js:
        warnings.warn("besov_norm: empty block range for this part/N0 selection")
        return 0.0
    terms = []
    for j in js:  # ascending j: fixed reduction order for determinism
        block = SpectralField(f.grid, f.data * ladder.block_weight(j)[None, None], SPECTRAL)
        terms.append(0.0 + 2.0 ** (j * index.s) * mixed_norm(block, index.p, index.r))
    terms = np.asarray(terms)
    if index.q == INF:
        return float(terms.max())
    return float(np.sum(terms ** index.q) ** (1.0 / index.q))
