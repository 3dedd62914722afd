import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lulc.features.hog import (
    HogSpec,
    block_vectors,
    cell_histograms,
    gradient_magnitude_orientation,
    gradients,
    hog_descriptor,
)
from lulc.ingest import Image


def test_ramp_gradients():
    y, x = np.mgrid[0:6, 0:7].astype(float)
    lx, ly = gradients(x)
    assert np.all(lx[1:-1, 1:-1] == 2.0) and np.all(ly == 0.0)
    lx, ly = gradients(y)
    assert np.all(ly[1:-1, 1:-1] == 2.0) and np.all(lx == 0.0)


def test_constant_gradients_zero():
    lx, ly = gradients(np.full((5, 5), 9.0))
    assert not lx.any() and not ly.any()


@pytest.mark.parametrize(
    "gx, gy, mag, deg",
    [(2.0, 0.0, 2.0, 0.0), (0.0, 0.0, 0.0, 0.0), (1.0, 1.0, math.sqrt(2), 45.0), (-1.0, 0.0, 1.0, 0.0)],
)
def test_magnitude_orientation(gx, gy, mag, deg):
    m, t = gradient_magnitude_orientation(np.array([gx]), np.array([gy]))
    assert m[0] == pytest.approx(mag, abs=1e-15)
    assert t[0] == pytest.approx(deg, abs=1e-12)


def test_signed_orientation_range():
    m, t = gradient_magnitude_orientation(np.array([-1.0, 0.0]), np.array([0.0, -1.0]), signed=True)
    np.testing.assert_allclose(t, [180.0, 270.0])


def test_constant_image_descriptor_is_zero():
    d = hog_descriptor(Image(np.full((28, 28, 3), 77.0)))
    assert d.shape == (324,) and not d.any()


@pytest.mark.parametrize("h, w", [(28, 28), (21, 35), (14, 14)])
def test_descriptor_length(h, w):
    spec = HogSpec()
    cy, cx = h // 7, w // 7
    expected = (cy - 1) * (cx - 1) * 4 * 9
    rng = np.random.default_rng(0)
    assert hog_descriptor(rng.uniform(0, 255, (h, w)), spec).size == expected == spec.length(h, w)


def test_too_small_image():
    with pytest.raises(ValueError, match="HOG block"):
        hog_descriptor(np.zeros((10, 10)))


def test_vertical_step_edge_votes_zero_bin():
    u = np.zeros((28, 28))
    u[:, 14:] = 255.0
    hist = cell_histograms(u, HogSpec())
    # the centered difference fires at columns 13 and 14, i.e. cells 1 and 2
    assert np.all(hist[:, 1:3, 1:] == 0.0)
    assert np.all(hist[:, 1:3, 0] > 0.0)
    assert not hist[:, [0, 3], :].any()


def _hist_oracle(u, spec):
    cy, cx = u.shape[0] // spec.cell_size, u.shape[1] // spec.cell_size
    p = np.pad(u, 1, mode="edge")
    period = 360.0 if spec.signed else 180.0
    width = period / spec.bins
    hist = np.zeros((cy, cx, spec.bins))
    for r in range(cy * spec.cell_size):
        for c in range(cx * spec.cell_size):
            gx = p[r + 1, c + 2] - p[r + 1, c]
            gy = p[r + 2, c + 1] - p[r, c + 1]
            mag = math.hypot(gx, gy)
            ang = math.degrees(math.atan2(gy, gx)) % period
            if ang >= period:
                ang -= period
            b = math.floor(ang / width)
            f = ang / width - b
            cell = hist[r // spec.cell_size, c // spec.cell_size]
            cell[b % spec.bins] += mag * (1 - f)
            cell[(b + 1) % spec.bins] += mag * f
    return hist


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans(), st.integers(2, 12))
def test_cell_histograms_match_loop_oracle(seed, signed, bins):
    spec = HogSpec(cell_size=4, bins=bins, signed=signed)
    u = np.random.default_rng(seed).uniform(0, 255, (13, 10))
    np.testing.assert_allclose(cell_histograms(u, spec), _hist_oracle(u, spec), rtol=1e-12, atol=1e-9)


def test_block_normalization():
    rng = np.random.default_rng(2)
    u = rng.uniform(0, 255, (28, 28))
    spec = HogSpec()
    q = block_vectors(cell_histograms(u, spec), spec)
    d = hog_descriptor(u, spec).reshape(q.shape)
    np.testing.assert_allclose(d, q / np.sqrt((q**2).sum(axis=1, keepdims=True) + 1e-10))
    assert np.all(np.linalg.norm(d, axis=1) <= 1.0 + 1e-15)


def test_block_stride():
    spec = HogSpec(cell_size=4, block_size=2, block_stride=2)
    assert spec.grid(16, 24) == (4, 6, 2, 3)
    assert hog_descriptor(np.random.default_rng(0).random((16, 24)), spec).size == 6 * 4 * 9
