import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wweuie.priors import (SubbandSet, WbGamma, fuse_wb, gray_world_gain, haar_dwt2, haar_idwt2,
                           load_subbands, save_subbands, sobel_magnitude, sobel_responses, white_balance)

EPS = 1e-6


def white_balance_straight_line(img):
    """Line-by-line white balance with explicit loops over pixels."""
    h, w, c = img.shape
    mu = [sum(img[i, j, k] for i in range(h) for j in range(w)) / (h * w) for k in range(c)]
    mu_g = sum(mu) / c
    gain = [mu_g / (m + EPS) for m in mu]
    logs = [[[math.log(img[i, j, k] * gain[k] + EPS) for k in range(c)] for j in range(w)] for i in range(h)]
    centre = [sum(logs[i][j][k] for i in range(h) for j in range(w)) / (h * w) for k in range(c)]
    ex = [[[math.exp(logs[i][j][k] - centre[k]) for k in range(c)] for j in range(w)] for i in range(h)]
    flat = [v for row in ex for px in row for v in px]
    lo, hi = min(flat), max(flat)
    return np.array([[[(v - lo) / (hi - lo + EPS) for v in px] for px in row] for row in ex])


def test_white_balance_matches_straight_line_oracle():
    toy = np.array([[[0.2, 0.5, 0.7], [0.1, 0.6, 0.8]],
                    [[0.3, 0.4, 0.9], [0.05, 0.55, 0.65]]])
    np.testing.assert_allclose(white_balance(toy), white_balance_straight_line(toy), atol=1e-6)


def test_white_balance_oracle_on_random_image(rng):
    img = rng.uniform(0, 1, size=(5, 4, 3))
    np.testing.assert_allclose(white_balance(img), white_balance_straight_line(img), atol=1e-9)


def test_white_balance_scale_invariance(rng):
    img = rng.uniform(0, 1, size=(16, 16, 3))
    k = np.array([2.0, 0.5, 1.5])
    assert np.max(np.abs(white_balance(img) - white_balance(img * k))) < 1e-4


def test_white_balance_constant_image_is_zero():
    out = white_balance(np.full((6, 5, 3), 0.4))
    np.testing.assert_allclose(out, 0.0, atol=1e-9)


def test_white_balance_output_range(rng):
    out = white_balance(rng.uniform(0, 1, size=(9, 7, 3)) * [0.2, 0.7, 0.9])
    assert out.min() >= 0.0 and out.max() <= 1.0
    assert out.min() == 0.0


def test_white_balance_errors():
    with pytest.raises(ValueError, match="3 channels"):
        white_balance(np.ones((4, 4, 1)))
    with pytest.raises(ValueError, match="nonnegative"):
        white_balance(-np.ones((4, 4, 3)))


def test_gain_equalizes_channel_means(rng):
    img = rng.uniform(0, 1, size=(32, 32, 3))
    means = gray_world_gain(img).mean(axis=(0, 1))
    assert np.ptp(means) < 1e-6


def test_gain_mean_spread_follows_eps_bound(rng):
    """With eps > 0 the post-gain means differ by mu_g * eps * |1/(mu_a+eps) - 1/(mu_b+eps)|."""
    img = rng.uniform(0, 1, size=(32, 32, 3)) * [0.1, 0.6, 0.9]
    mu = img.mean(axis=(0, 1))
    means = gray_world_gain(img).mean(axis=(0, 1))
    expected = mu.mean() * EPS * np.ptp(1 / (mu + EPS))
    np.testing.assert_allclose(np.ptp(means), expected, rtol=1e-6)


def test_fuse_endpoints_and_midpoint(rng):
    x = rng.uniform(size=(4, 4, 3))
    x_wb = rng.uniform(size=(4, 4, 3))
    np.testing.assert_array_equal(fuse_wb(x, x_wb, (0, 0, 0)), x)
    np.testing.assert_array_equal(fuse_wb(x, x_wb, (1, 1, 1)), x_wb)
    out = fuse_wb(np.full((3, 3, 3), 0.2), np.full((3, 3, 3), 0.6), WbGamma(0.5, 0.5, 0.5))
    np.testing.assert_allclose(out, 0.4, atol=1e-15)


def test_fuse_is_per_channel(rng):
    x = np.zeros((2, 2, 3))
    out = fuse_wb(x, np.ones((2, 2, 3)), (0.1, 0.5, 0.9))
    np.testing.assert_allclose(out[0, 0], [0.1, 0.5, 0.9])


def test_fuse_errors():
    with pytest.raises(ValueError, match="shape mismatch"):
        fuse_wb(np.zeros((2, 2, 3)), np.zeros((3, 2, 3)), (0.5, 0.5, 0.5))
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        fuse_wb(np.zeros((2, 2, 3)), np.zeros((2, 2, 3)), (1.2, 0.5, 0.5))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 3, 3), elements=st.floats(0, 1)),
       arrays(np.float64, (4, 3, 3), elements=st.floats(0, 1)),
       arrays(np.float64, (3,), elements=st.floats(0, 1)))
def test_fuse_stays_between_inputs(x, x_wb, gamma):
    out = fuse_wb(x, x_wb, gamma)
    assert np.all(out >= np.minimum(x, x_wb) - 1e-12)
    assert np.all(out <= np.maximum(x, x_wb) + 1e-12)


def test_haar_block_example():
    block = np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None]
    sb = haar_dwt2(block)
    assert (sb.ll.item(), sb.lh.item(), sb.hl.item(), sb.hh.item()) == (2.5, -1.0, -0.5, 0.0)
    back = haar_idwt2(SubbandSet(np.full((1, 1, 1), 2.5), np.full((1, 1, 1), -1.0),
                                 np.full((1, 1, 1), -0.5), np.zeros((1, 1, 1)), (2, 2)))
    np.testing.assert_array_equal(back[:, :, 0], [[1.0, 2.0], [3.0, 4.0]])


def test_haar_constant_image():
    sb = haar_dwt2(np.full((6, 8, 3), 0.37))
    np.testing.assert_allclose(sb.ll, 0.37, atol=1e-15)
    for band in (sb.lh, sb.hl, sb.hh):
        assert np.all(band == 0.0)
    dc = haar_idwt2(SubbandSet(np.full((3, 4, 3), 0.8), *(np.zeros((3, 4, 3)),) * 3, (6, 8)))
    np.testing.assert_array_equal(dc, 0.8)


def haar_matrix(h, w):
    """Dense analysis matrix mapping a flattened h x w plane to the four flattened bands."""
    h_vec = np.array([0.5, 0.5])
    g_vec = np.array([0.5, -0.5])
    kernels = [np.outer(h_vec, h_vec), np.outer(g_vec, h_vec), np.outer(h_vec, g_vec), np.outer(g_vec, g_vec)]
    rows = []
    for k in kernels:
        for bi in range(h // 2):
            for bj in range(w // 2):
                r = np.zeros((h, w))
                r[2 * bi:2 * bi + 2, 2 * bj:2 * bj + 2] = k
                rows.append(r.ravel())
    return np.array(rows)


def test_haar_matches_dense_matrix_and_energy(rng):
    x = rng.standard_normal((8, 8))
    coeffs = haar_matrix(8, 8) @ x.ravel()
    sb = haar_dwt2(x[:, :, None])
    ours = np.concatenate([b[:, :, 0].ravel() for b in (sb.ll, sb.lh, sb.hl, sb.hh)])
    np.testing.assert_allclose(ours, coeffs, atol=1e-14)
    np.testing.assert_allclose(np.sum((2 * ours) ** 2), np.sum(x ** 2), rtol=1e-12)


def test_haar_round_trip_16x16x3(rng):
    x = rng.uniform(size=(16, 16, 3))
    assert np.max(np.abs(haar_idwt2(haar_dwt2(x)) - x)) < 1e-6


def test_haar_odd_sizes_are_padded_and_cropped(rng):
    x = rng.uniform(size=(7, 5, 3))
    sb = haar_dwt2(x)
    assert sb.ll.shape == (4, 3, 3) and sb.padded
    np.testing.assert_allclose(haar_idwt2(sb), x, atol=1e-12)


def test_haar_errors():
    with pytest.raises(ValueError):
        haar_dwt2(np.zeros((1, 4, 3)))
    bad = SubbandSet(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)), np.zeros((2, 2, 3)), np.zeros((2, 2, 3)), (4, 4))
    with pytest.raises(ValueError, match="share"):
        haar_idwt2(bad)


def test_subband_files_round_trip(tmp_path, rng):
    x = rng.uniform(size=(8, 6, 3)).astype(np.float32).astype(np.float64)
    paths = save_subbands(haar_dwt2(x), tmp_path / "img")
    assert [p.rsplit(".", 2)[-2] for p in paths] == ["ll", "lh", "hl", "hh"]
    np.testing.assert_allclose(haar_idwt2(load_subbands(tmp_path / "img")), x, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.sampled_from([1, 3]), st.integers(0, 2 ** 32 - 1))
def test_perfect_reconstruction_property(hh, ww, c, seed):
    x = np.random.default_rng(seed).uniform(-1, 1, size=(2 * hh, 2 * ww, c))
    assert np.max(np.abs(haar_idwt2(haar_dwt2(x)) - x)) < 1e-6


def test_sobel_constant_and_ramp():
    np.testing.assert_array_equal(sobel_magnitude(np.full((5, 6, 3), 0.3)), 0.0)
    s = 0.05
    ramp = (np.arange(10) * s)[None, :, None] * np.ones((7, 1, 2))
    mag = sobel_magnitude(ramp)
    np.testing.assert_allclose(mag[1:-1, 1:-1], 8 * s, rtol=1e-12)


def test_sobel_rotation_symmetry(rng):
    x = rng.uniform(size=(9, 12, 3))
    mag = sobel_magnitude(x)
    rot = sobel_magnitude(np.rot90(x))
    np.testing.assert_allclose(rot[1:-1, 1:-1], np.rot90(mag)[1:-1, 1:-1], atol=1e-12)


def test_sobel_brute_force(rng):
    x = rng.uniform(size=(5, 6, 1))
    sx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=float)
    p = np.pad(x[:, :, 0], 1, mode="edge")
    expected = np.zeros((5, 6))
    for i, j in itertools.product(range(5), range(6)):
        win = p[i:i + 3, j:j + 3]
        expected[i, j] = math.hypot(np.sum(win * sx), np.sum(win * sx.T))
    np.testing.assert_allclose(sobel_magnitude(x)[:, :, 0], expected, atol=1e-12)


def test_sobel_too_small():
    with pytest.raises(ValueError):
        sobel_magnitude(np.zeros((2, 5, 3)))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 5, 2), elements=st.one_of(st.just(0.5), st.floats(-3, 3, width=32))))
def test_sobel_nonnegative_and_zero_iff_flat(x):
    mag = sobel_magnitude(x)
    assert np.all(mag >= 0)
    gx, gy = sobel_responses(np.moveaxis(x, -1, 0))
    both_zero = np.moveaxis((gx == 0) & (gy == 0), 0, -1)
    np.testing.assert_array_equal(mag == 0, both_zero)
