import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_radius_map, naive_radius_at
from rootextract.costmap import (
    EmptyLCCError,
    EmptySegmentationError,
    ExtractionConfig,
    cost_map_gap,
    cost_map_radius,
    cost_map_relative,
    cost_map_seg,
    dominance_count,
    radius_map,
    radius_map_lcc,
)
from rootextract.volume import Volume

CFG = ExtractionConfig()


def ball(n, r, c=None):
    c = (n // 2,) * 3 if c is None else c
    z, y, x = np.mgrid[:n, :n, :n]
    return ((x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2 <= r * r).astype(np.float32)


# -- config -----------------------------------------------------------------

def test_config_defaults():
    assert (CFG.w_rad, CFG.epsilon, CFG.beta, CFG.gap_penalty) == (0.5, 1e-6, 1.2, 10.0)
    assert (CFG.fill_ratio_seg, CFG.fill_ratio_lcc, CFG.quench_threshold) == (0.75, 0.9, 20)


@pytest.mark.parametrize("bad", [dict(gamma=1.5), dict(omega=0), dict(gap_len=-1), dict(gap_len=1.5),
                                 dict(w_rad=2), dict(epsilon=0), dict(beta=1.0), dict(beta=2.5),
                                 dict(delta=-1), dict(cut_z=-3), dict(fill_ratio_seg=0),
                                 dict(fill_ratio_lcc=1.2), dict(quench_threshold=27), dict(gap_penalty=0.5)])
def test_config_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        ExtractionConfig(**bad)


def test_config_with_copies():
    cfg = CFG.with_(gap_len=0)
    assert cfg.gap_len == 0 and CFG.gap_len != 0


# -- radius map -------------------------------------------------------------

def test_radius_all_zero():
    r = radius_map(Volume(np.zeros((6, 6, 6), np.float32)), 0.5, 0.75)
    assert not r.data.any()


def test_radius_all_ones_center_matches_enumeration():
    data = np.ones((21, 21, 21), np.float32)
    r = radius_map(Volume(data), 0.5, 0.75)
    assert r[(10, 10, 10)] == naive_radius_at(data, (10, 10, 10), 0.5, 0.75)
    assert r[(10, 10, 10)] > 5
    assert r[(0, 0, 0)] == naive_radius_at(data, (0, 0, 0), 0.5, 0.75)


@pytest.mark.parametrize("fill", [0.75, 0.9])
def test_radius_ball_center_dominates_surface(fill):
    data = ball(15, 5)
    r = radius_map(Volume(data), 0.5, fill)
    center = r[(7, 7, 7)]
    assert center == naive_radius_at(data, (7, 7, 7), 0.5, fill)
    assert center >= r[(12, 7, 7)]
    assert center >= r[(7, 2, 7)]


def test_radius_below_threshold_is_zero():
    data = ball(9, 3) * 0.4
    assert not radius_map(Volume(data), 0.5, 0.75).data.any()


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.75, 0.9]), st.floats(0.3, 1.0))
def test_radius_matches_convolution_oracle(seed, fill, density):
    rng = np.random.default_rng(seed)
    data = (rng.random((8, 9, 10)) < density).astype(np.float32)
    got = radius_map(Volume(data), 0.5, fill).data
    assert np.array_equal(got, brute_radius_map(data, 0.5, fill))


def test_radius_map_lcc_uses_lcc_fill():
    lcc = ball(15, 5).astype(np.uint8)
    got = radius_map_lcc(Volume(lcc), CFG).data
    assert np.array_equal(got, brute_radius_map(lcc, 1.0, 0.9))


# -- C_Iseg / C_gap ---------------------------------------------------------

def test_cost_seg_uniform_volume_is_epsilon():
    # a 1x1x5 line never passes the r=1 sphere test, so R is uniformly 0
    seg = Volume(np.full((5, 1, 1), 0.8, np.float32))
    c = cost_map_seg(seg, CFG).data
    assert np.allclose(c, CFG.epsilon, rtol=0, atol=1e-15)
    below = Volume(np.full((6, 6, 6), 0.3, np.float32))
    assert np.allclose(cost_map_seg(below, CFG).data, CFG.epsilon, rtol=0, atol=1e-15)


def test_cost_seg_single_voxel_hand_values():
    data = np.zeros((3, 3, 3), np.float32)
    data[1, 1, 1] = 1.0
    c = cost_map_seg(Volume(data), CFG).data
    # R is 0 everywhere (1 of 7 voxels filled at r=1), so C_inv = seg and max(C_inv) = 1
    assert c[1, 1, 1] == pytest.approx(CFG.epsilon, abs=1e-15)
    others = np.delete(c.reshape(-1), 13)
    assert np.allclose(others, 1.0 + CFG.epsilon)


def test_cost_seg_hand_values_with_radius():
    data = ball(11, 3)
    r = radius_map(Volume(data), 0.5, 0.75).data
    c = cost_map_seg(Volume(data), CFG).data
    c_inv = data + 0.5 * r / r.max()
    expect = 1.0 - c_inv / c_inv.max() + 1e-6
    assert np.allclose(c, expect, rtol=0, atol=1e-12)


def test_cost_seg_without_radius_term():
    rng = np.random.default_rng(3)
    data = rng.random((6, 7, 8)).astype(np.float32)
    c = cost_map_seg(Volume(data), CFG.with_(w_rad=0.0)).data
    d64 = data.astype(np.float64)
    assert np.allclose(c, 1.0 - d64 / d64.max() + 1e-6, rtol=0, atol=1e-12)


def test_cost_seg_empty_segmentation():
    with pytest.raises(EmptySegmentationError, match="empty segmentation"):
        cost_map_seg(Volume(np.zeros((4, 4, 4), np.float32)), CFG)


@given(st.integers(0, 2**32 - 1))
def test_cost_seg_strictly_positive_and_bounded(seed):
    rng = np.random.default_rng(seed)
    data = (rng.random((7, 7, 7)) * (rng.random((7, 7, 7)) < 0.8)).astype(np.float32)
    if not data.any():
        data[0, 0, 0] = 1.0
    c = cost_map_seg(Volume(data), CFG).data
    assert (c > 0).all() and (c <= 1.0 + CFG.epsilon + 1e-12).all()


@given(st.integers(0, 2**32 - 1))
def test_cost_seg_monotone_in_intensity(seed):
    rng = np.random.default_rng(seed)
    data = rng.random((6, 6, 6)).astype(np.float32) * 0.9
    data[0, 0, 0] = 1.0  # pins max(C_inv) where the edit cannot reach
    p = (3, 3, 3)
    lo = data.copy()
    hi = data.copy()
    hi[p[2], p[1], p[0]] = min(1.0, lo[p[2], p[1], p[0]] + 0.05)
    rad = radius_map(Volume(lo), 0.5, 0.75)
    # fixed radius map and the pinned maximum keep both normalisers identical
    c_lo = cost_map_seg(Volume(lo), CFG, radius=rad).data
    c_hi = cost_map_seg(Volume(hi), CFG, radius=rad).data
    assert c_hi[p[2], p[1], p[0]] <= c_lo[p[2], p[1], p[0]]


def test_cost_gap_examples():
    seg = Volume(np.array([[[0.3, 0.9]]], np.float32))
    c_seg = Volume(np.array([[[0.2, 0.2]]]))
    got = cost_map_gap(seg, c_seg, CFG).data
    assert got[0, 0, 0] == pytest.approx(2.0)
    assert got[0, 0, 1] == 0.2


@given(st.integers(0, 2**32 - 1))
def test_cost_gap_dominates_seg(seed):
    rng = np.random.default_rng(seed)
    data = rng.random((6, 6, 6)).astype(np.float32)
    seg = Volume(data)
    c_seg = cost_map_seg(seg, CFG)
    c_gap = cost_map_gap(seg, c_seg, CFG).data
    assert (c_gap >= c_seg.data).all()
    assert np.array_equal(c_gap == c_seg.data, data >= CFG.gamma)


def test_cost_gap_identity_when_all_above():
    seg = Volume(np.full((4, 4, 4), 0.9, np.float32))
    c_seg = cost_map_seg(seg, CFG)
    assert np.array_equal(cost_map_gap(seg, c_seg, CFG).data, c_seg.data)


# -- skeleton cost maps -----------------------------------------------------

def test_cost_radius_examples():
    r = Volume(np.array([[[4, 2, 0]]], dtype=np.int32))
    c = cost_map_radius(r).data
    assert c[0, 0, 0] == 0.0
    assert c[0, 0, 1] == 0.5
    assert np.isinf(c[0, 0, 2])


def test_cost_radius_mask_keeps_zero_radius_lcc_voxels():
    r = Volume(np.array([[[4, 2, 0, 0]]], dtype=np.int32))
    mask = Volume(np.array([[[1, 1, 1, 0]]], dtype=np.uint8))
    c = cost_map_radius(r, mask).data
    assert c[0, 0, 2] == 1.0 and np.isinf(c[0, 0, 3])


def test_cost_maps_empty_lcc():
    r = Volume(np.zeros((3, 3, 3), np.int32))
    with pytest.raises(EmptyLCCError):
        cost_map_radius(r)
    with pytest.raises(EmptyLCCError):
        cost_map_relative(r)


def test_cost_relative_examples():
    peak = np.ones((3, 3, 3), np.int32)
    peak[1, 1, 1] = 5
    assert cost_map_relative(Volume(peak)).data[1, 1, 1] == 0.0

    plateau = np.full((5, 5, 5), 2, np.int32)
    assert cost_map_relative(Volume(plateau)).data[2, 2, 2] == 1.0

    half = np.full((3, 3, 3), 3, np.int32)
    half[1, 1, 1] = 2
    flat = half.reshape(-1)
    lower = [i for i in range(27) if i != 13][:13]
    flat[lower] = 1
    assert dominance_count(Volume(half))[1, 1, 1] == 13
    assert cost_map_relative(Volume(half)).data[1, 1, 1] == 0.5


def test_cost_relative_out_of_bounds_counts_as_zero():
    r = Volume(np.full((1, 1, 1), 3, np.int32))
    assert dominance_count(r)[0, 0, 0] == 26
    assert cost_map_relative(r).data[0, 0, 0] == 0.0


@given(st.integers(0, 2**32 - 1))
def test_cost_relative_invariant_under_monotone_transform(seed):
    rng = np.random.default_rng(seed)
    r = rng.integers(0, 5, (6, 6, 6)).astype(np.int32)
    r[0, 0, 0] = 1
    transformed = (r.astype(np.int64) ** 3 + 7 * r).astype(np.int32)
    a = cost_map_relative(Volume(r)).data
    b = cost_map_relative(Volume(transformed)).data
    assert np.array_equal(a, b)


@given(st.integers(0, 2**32 - 1))
def test_cost_relative_range(seed):
    rng = np.random.default_rng(seed)
    r = rng.integers(0, 4, (5, 6, 7)).astype(np.int32)
    r[2, 2, 2] = 3
    c = cost_map_relative(Volume(r)).data
    finite = c[np.isfinite(c)]
    assert ((finite >= 0) & (finite <= 1)).all()
    assert np.array_equal(np.isfinite(c), r > 0)
