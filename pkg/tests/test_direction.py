import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.ndimage import gaussian_filter

from forgescan.direction import (DirectionParams, ProjectionProfile, detect_direction,
                                 directional_edges, feature_map, projections, std_edge_image)
from forgescan.imaging import ImageSizeError
from oracles import brute_std


def smooth_image(seed, shape):
    r = np.random.default_rng(seed)
    return np.clip(gaussian_filter(r.normal(128, 90, shape), r.uniform(0.7, 3)), 0, 255).astype(np.uint8)


def test_std_constant_is_exactly_zero():
    assert not std_edge_image(np.full((20, 30), 201, np.uint8)).any()


def test_std_single_spike():
    img = np.zeros((9, 15), np.uint8)
    img[4, 7] = 210
    # window of 20 zeros and one 210: mean 10, sum sq dev 42000, /20 = 2100
    assert std_edge_image(img)[4, 7] == pytest.approx(np.sqrt(2100), abs=1e-12)
    assert std_edge_image(img)[4, 7] == pytest.approx(45.83, abs=5e-3)


def test_std_matches_brute_force():
    for s in range(10):
        r = np.random.default_rng(s)
        img = r.integers(0, 256, tuple(int(v) for v in r.integers(7, 20, 2))).astype(np.uint8)
        fast = std_edge_image(img)
        rows = img.tolist()
        for y in range(img.shape[0]):
            for x in range(img.shape[1]):
                assert fast[y, x] == pytest.approx(brute_std(rows, 3, 7, y, x), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 150), st.integers(0, 4))
def test_std_shift_and_scale(seed, shift, k):
    img = np.random.default_rng(seed).integers(0, 26, (12, 17))
    base = std_edge_image(img.astype(np.uint8))
    assert np.array_equal(std_edge_image((img + shift).astype(np.uint8)), base)
    np.testing.assert_allclose(std_edge_image((img * k).astype(np.uint8)), k * base, rtol=1e-12, atol=1e-12)


def test_std_too_small():
    with pytest.raises(ImageSizeError):
        std_edge_image(np.zeros((2, 10), np.uint8))


def test_horizontal_step_goes_to_h_edges():
    img = np.full((64, 64), 50, np.uint8)
    img[32:] = 200
    h, v = directional_edges(img)
    assert not v.any()
    rows = np.nonzero(h.any(axis=1))[0]
    assert rows.min() >= 28 and rows.max() <= 35
    assert h[31:33].any(axis=0).all()


def test_transposed_step_swaps_channels():
    img = np.full((48, 64), 50, np.uint8)
    img[20:] = 200
    h, v = directional_edges(img)
    ht, vt = directional_edges(np.ascontiguousarray(img.T))
    assert np.array_equal(ht, v.T) and np.array_equal(vt, h.T)


def test_constant_image_has_no_edges():
    h, v = directional_edges(np.full((32, 32), 90, np.uint8))
    assert not h.any() and not v.any()
    fmap, regs = detect_direction(np.full((32, 32), 90, np.uint8))
    assert not fmap.any() and regs == []


def test_directional_edges_too_small():
    with pytest.raises(ImageSizeError):
        directional_edges(np.zeros((15, 40), np.uint8))


def test_projection_single_pixel():
    e = np.zeros((5, 7))
    e[2, 3] = 10
    p = projections(e)
    assert p.horizontal.tolist() == [0, 0, 10, 0, 0]
    assert p.vertical.tolist() == [0, 0, 0, 10, 0, 0, 0]
    assert p.h_threshold == pytest.approx(2.0) and p.v_threshold == pytest.approx(10 / 7)


def test_projection_zero():
    p = projections(np.zeros((4, 4)))
    assert not p.horizontal.any() and p.h_threshold == 0 and p.v_threshold == 0


def test_projection_matches_loops(rng):
    e = rng.random((13, 21))
    p = projections(e)
    for r in range(13):
        assert p.horizontal[r] == pytest.approx(sum(e[r, c] for c in range(21)), abs=1e-12)
    for c in range(21):
        assert p.vertical[c] == pytest.approx(sum(e[r, c] for r in range(13)), abs=1e-12)


def test_feature_map_row_threshold():
    h = np.zeros((6, 6))
    h[1, :] = 5.0
    h[4, 2] = 1.0
    v = np.zeros_like(h)
    fmap = feature_map(h, v, projections(h), projections(v), closing=0)
    assert fmap[1].all() and not fmap[4].any()


def test_feature_map_uniform_edges_empty():
    h = np.ones((10, 10))
    fmap = feature_map(h, h, projections(h), projections(h), closing=0)
    assert not fmap.any()


def test_feature_map_shape_mismatch():
    a, b = np.zeros((4, 4)), np.zeros((4, 5))
    with pytest.raises(ValueError):
        feature_map(a, b, projections(a), projections(b))


def test_closing_bridges_gaps_and_keeps_pixels():
    h = np.zeros((20, 20))
    h[10, 2:8] = 1
    h[10, 10:16] = 1
    h[3, 5] = 0.1
    v = np.zeros_like(h)
    raw = feature_map(h, v, projections(h), projections(v), closing=0)
    closed = feature_map(h, v, projections(h), projections(v), closing=5)
    assert not (raw & ~closed).any()
    assert closed[10, 2:16].all()


def test_feature_map_dims_random_sizes():
    for s in range(20):
        r = np.random.default_rng(s)
        shape = tuple(int(v) for v in r.integers(16, 200, 2))
        img = r.integers(0, 256, shape + (3,)).astype(np.uint8)
        fmap, _ = detect_direction(img)
        assert fmap.shape == shape


def test_detect_direction_transposition():
    for s in range(8):
        img = smooth_image(s, (60 + s, 80 - s))
        f, regs = detect_direction(img)
        ft, _ = detect_direction(np.ascontiguousarray(img.T))
        assert np.array_equal(ft, f.T)


def test_pasted_square_is_found():
    img = smooth_image(3, (128, 128)) // 4 + 60
    img[40:88, 30:90] = 230
    fmap, regs = detect_direction(img)
    assert regs
    top = regs[0]
    assert abs(top.x - 30) <= 3 and abs(top.y - 40) <= 3
    assert abs(top.w - 60) <= 6 and abs(top.h - 48) <= 6


def test_rgb_uses_v_channel():
    g = smooth_image(5, (64, 64))
    rgb = np.stack([g, g // 2, g // 3], axis=2)
    f1, _ = detect_direction(rgb)
    f2, _ = detect_direction(g)
    assert np.array_equal(f1, f2)


def test_params_are_overridable():
    img = smooth_image(9, (64, 64))
    a, _ = detect_direction(img, DirectionParams(closing=0))
    b, _ = detect_direction(img, DirectionParams(closing=5))
    assert not (a & ~b).any()
