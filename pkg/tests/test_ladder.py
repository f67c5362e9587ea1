import math

import numpy as np
import pytest

from stokeslab import (INF, BesovIndex, LadderError, ParameterError,
                       besov_norm, build_ladder, bump, chi,
                       dyadic_block, low_pass, make_grid, mixed_norm,
                       random_field, single_mode_field, to_physical)


def test_bump_support():
    t = np.array([0.0, 0.5, 0.74, 2.7, 10.0])
    assert np.all(bump(t) == 0.0)
    t_in = np.linspace(0.8, 2.6, 50)
    assert np.all(bump(t_in) >= 0.0)
    assert bump(1.0) > 0.0


def test_chi_plateaus():
    assert chi(0.0) == 1.0
    assert chi(0.75) == 1.0
    assert chi(4.0 / 3.0) == 0.0
    assert chi(100.0) == 0.0


def test_ladder_block_range():
    g = make_grid(64, 64, 2 * math.pi, 2 * math.pi, 9, -1.0, 1.0)
    lad = build_ladder(g)
    k = g.kmag[g.kmag > 0]
    assert np.isclose(k.min(), 1.0)
    assert np.isclose(k.max(), 32.0 * math.sqrt(2.0))
    assert len(list(lad.blocks)) >= 5
    # every nonzero frequency is fully covered, the zero mode weightless
    total = sum(lad.block_weight(j) for j in lad.blocks)
    assert np.abs(total[g.kmag > 0] - 1.0).max() <= 1e-12
    assert total[0, 0] == 0.0


def test_ladder_validation():
    with pytest.raises(LadderError, match="unknown bump kind"):
        build_ladder(make_grid(64, 64, 2 * math.pi, 2 * math.pi, 9, -1, 1),
                     bump_kind="sharp")


def test_partition_of_unity_scalar(ladder):
    t = np.linspace(0.75 * 2.0 ** (ladder.j_min + 1),
                    (8.0 / 3.0) * 2.0 ** (ladder.j_max - 1), 20001)
    total = sum(bump(t * 2.0 ** (-j)) for j in ladder.blocks)
    assert np.abs(total - 1.0).max() <= 1e-12


def test_at_most_two_consecutive_blocks(grid, ladder):
    js = np.array(list(ladder.blocks))
    active = np.stack([ladder.block_weight(j) > 0 for j in js])  # (nj, nx, ny)
    counts = active.sum(axis=0)
    assert counts[grid.kmag > 0].max() <= 2
    # the active blocks at each frequency are consecutive
    first = np.argmax(active, axis=0)
    last = len(js) - 1 - np.argmax(active[::-1], axis=0)
    spread = (last - first + 1)[grid.kmag > 0]
    assert np.all(spread[counts[grid.kmag > 0] == 2] == 2)


def test_block_sum_reconstructs(grid, ladder, rng):
    f = random_field(grid, rng)
    total = sum(dyadic_block(f, j, ladder).data for j in ladder.blocks)
    assert np.abs(total - f.data).max() <= 1e-12 * np.abs(f.data).max()


def test_single_mode_block_weights(grid, ladder):
    f = single_mode_field(grid, mode=(2, 0))
    weights = [ladder.block_weight(j)[2, 0] for j in ladder.blocks]
    nonzero = [w for w in weights if w > 0]
    assert 1 <= len(nonzero) <= 2
    assert np.isclose(sum(nonzero), 1.0)
    for j, w in zip(ladder.blocks, weights):
        blk = dyadic_block(f, j, ladder)
        assert np.abs(blk.data - w * f.data).max() <= 1e-15


def test_block_of_distant_lowpass_field_is_zero(grid, ladder, rng):
    j = ladder.j_max
    f = low_pass(random_field(grid, rng), j - 2, ladder)
    blk = dyadic_block(f, j, ladder)
    assert np.abs(blk.data).max() == 0.0


def test_block_index_out_of_range(grid, ladder, rng):
    f = random_field(grid, rng)
    with pytest.raises(IndexError):
        dyadic_block(f, ladder.j_max + 1, ladder)


def test_lowpass_telescopes(grid, ladder, rng):
    f = random_field(grid, rng)
    j = ladder.j_min + 2
    step = low_pass(f, j, ladder).data + dyadic_block(f, j, ladder).data
    direct = low_pass(f, j + 1, ladder).data
    assert np.abs(step - direct).max() <= 1e-13 * np.abs(f.data).max()


def test_mixed_norm_closed_form():
    g = make_grid(32, 32, 2 * math.pi, 2 * math.pi, 65, -8.0, 8.0)
    u = single_mode_field(g, mode=(1, 0))
    assert np.isclose(mixed_norm(u, 2, 2), 4.0 * math.pi * math.sqrt(2.0),
                      rtol=1e-12)
    assert np.isclose(mixed_norm(u, INF, INF), 1.0, rtol=1e-12)


def test_mixed_norm_against_quadrature_oracle(grid, rng):
    f = random_field(grid, rng)
    p = to_physical(f)
    mag = np.abs(p.data[0])
    inner = np.sqrt((mag ** 2).sum(axis=(1, 2)) * grid.cell_area)
    expected = np.sqrt(np.sum(grid.z_weights * inner ** 2))
    assert np.isclose(mixed_norm(f, 2, 2), expected, rtol=1e-10)
    expected3 = np.sum(grid.z_weights * ((mag ** 3).sum(axis=(1, 2))
                                         * grid.cell_area)) ** (1.0 / 3.0)
    assert np.isclose(mixed_norm(f, 3, 3), expected3, rtol=1e-10)


def test_mixed_norm_storage_independent(grid, rng):
    f = random_field(grid, rng)
    p = to_physical(f)
    for pp, r in ((2, 2), (2, INF), (4, 1), (INF, 2)):
        assert np.isclose(mixed_norm(f, pp, r), mixed_norm(p, pp, r),
                          rtol=1e-12)


def test_mixed_norm_validation(grid, rng):
    f = random_field(grid, rng)
    with pytest.raises(ParameterError):
        mixed_norm(f, 0.5, 2)
    with pytest.raises(ParameterError):
        mixed_norm(f, 2, 0)


def test_besov_norm_direct_sum_oracle(grid, ladder, rng):
    j0 = ladder.j_min + 3
    f = dyadic_block(random_field(grid, rng), j0, ladder)
    idx = BesovIndex(s=0.5, p=2.0, q=1.0, r=2.0)
    total = besov_norm(f, idx, ladder)
    direct = sum(2.0 ** (j * idx.s) * mixed_norm(dyadic_block(f, j, ladder), 2, 2)
                 for j in ladder.blocks)
    assert np.isclose(total, direct, rtol=1e-12)


def test_besov_norm_homogeneous(grid, ladder, rng):
    f = random_field(grid, rng)
    idx = BesovIndex(s=-0.5, p=4.0, q=2.0, r=INF)
    assert np.isclose(besov_norm(3.0 * f, idx, ladder),
                      3.0 * besov_norm(f, idx, ladder), rtol=1e-12)


def test_besov_norm_zero_weight_matches_unweighted(grid, ladder, rng):
    f = random_field(grid, rng)
    a = besov_norm(f, BesovIndex(s=0.5, p=2, q=1, r=2), ladder)
    b = besov_norm(f, BesovIndex(s=0.5, p=2, q=1, r=2, sigma=0.0), ladder)
    assert a == b


def test_besov_norm_part_split(grid, ladder, rng):
    n0 = ladder.j_min + 2
    f = dyadic_block(random_field(grid, rng), n0 + 3, ladder)
    idx_low = BesovIndex(s=0.0, p=2, q=1, r=2, part="low", N0=n0)
    assert besov_norm(f, idx_low, ladder) == 0.0
    idx_high = BesovIndex(s=0.0, p=2, q=1, r=2, part="high", N0=n0)
    idx_full = BesovIndex(s=0.0, p=2, q=1, r=2)
    assert np.isclose(besov_norm(f, idx_high, ladder),
                      besov_norm(f, idx_full, ladder), rtol=1e-12)


def test_besov_index_validation():
    with pytest.raises(ParameterError):
        BesovIndex(s=0.0, p=0.5, q=1, r=2)
    with pytest.raises(ParameterError):
        BesovIndex(s=0.0, p=2, q=1, r=2, part="middle")
    with pytest.raises(ParameterError):
        BesovIndex(s=0.0, p=2, q=1, r=2, sigma=-0.1)
