import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lulc.ingest import Image
from lulc.preprocess import (
    NormalizationSpec,
    equalize_histogram,
    normalize,
    normalize_min_max,
    normalize_sigmoid,
    preprocess,
    requantize_8bit,
)

UNIT = NormalizationSpec("min_max", 0.0, 1.0)
SIG_UNIT = NormalizationSpec("sigmoid", 0.0, 1.0, alpha=10.0, beta=100.0)


def test_min_max_linear_map():
    img = Image(np.array([[0.0, 128.0, 255.0]]))
    out = normalize_min_max(img, UNIT)
    assert out.data[0, 1, 0] == pytest.approx(128 / 255, abs=1e-12)
    assert out.value_range == (0.0, 1.0)


def test_min_max_identity():
    x = np.array([[0.0, 17.0], [200.0, 255.0]])
    out = normalize_min_max(Image(x), NormalizationSpec())
    np.testing.assert_allclose(out.data[:, :, 0], x, rtol=0, atol=1e-12)


def test_min_max_constant_channel():
    out = normalize_min_max(Image(np.full((3, 3), 7.0)), UNIT)
    assert np.all(out.data == 0.0)


def test_min_max_per_channel():
    x = np.stack([np.array([[0.0, 10.0]]), np.array([[100.0, 200.0]])], axis=-1)
    out = normalize_min_max(Image(x), UNIT)
    np.testing.assert_array_equal(out.data[0, :, 0], [0.0, 1.0])
    np.testing.assert_array_equal(out.data[0, :, 1], [0.0, 1.0])


def test_sigmoid_midpoint_and_unit_step():
    img = Image(np.array([[100.0, 110.0, 255.0]]))
    out = normalize_sigmoid(img, SIG_UNIT).data[0, :, 0]
    assert out[0] == pytest.approx(0.5, abs=1e-15)
    assert out[1] == pytest.approx(1 / (1 + math.exp(-1)), abs=1e-12)
    assert out[2] > 0.9999


def test_sigmoid_extreme_inputs_are_finite():
    spec = NormalizationSpec("sigmoid", 0.0, 1.0, alpha=1e-3, beta=0.0)
    out = normalize_sigmoid(Image(np.array([[0.0, 255.0]])), spec).data
    assert np.all(np.isfinite(out))
    assert out[0, 1, 0] == pytest.approx(1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        NormalizationSpec(new_min=1.0, new_max=1.0)
    with pytest.raises(ValueError):
        NormalizationSpec(mode="tanh")
    with pytest.raises(ValueError):
        NormalizationSpec(mode="sigmoid", alpha=0.0)


def test_equalize_constant_unchanged():
    x = np.full((4, 4, 2), 42.0)
    np.testing.assert_array_equal(equalize_histogram(Image(x)).data, x)


def test_equalize_two_pixel_full_range():
    out = equalize_histogram(Image(np.array([[0.0], [255.0]])))
    np.testing.assert_array_equal(out.data[:, 0, 0], [0.0, 255.0])


def test_equalize_three_bin_cdf():
    # histogram {0: 2, 1: 1, 2: 1} -> cdf (2, 3, 4), cdf_min = 2, N = 4
    # 0 -> 0, 1 -> 255 * 1/2 = 127.5 -> 128, 2 -> 255
    out = equalize_histogram(Image(np.array([[0.0, 0.0], [1.0, 2.0]])))
    np.testing.assert_array_equal(out.data[:, :, 0], [[0, 0], [128, 255]])


def test_equalize_rejects_other_ranges():
    with pytest.raises(ValueError):
        equalize_histogram(Image(np.zeros((2, 2)), (0.0, 1.0)))
    with pytest.raises(ValueError):
        equalize_histogram(Image(np.full((2, 2), 0.5)))


def test_requantize():
    img = Image(np.array([[0.0, 0.5, 1.0]]), (0.0, 1.0))
    np.testing.assert_array_equal(requantize_8bit(img).data[0, :, 0], [0, 128, 255])


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 8), st.integers(1, 8), st.integers(1, 3))))
def test_equalize_is_monotone_and_in_range(x):
    x = x.astype(np.float64)
    out = equalize_histogram(Image(x)).data
    assert out.min() >= 0 and out.max() <= 255
    assert np.all(out == np.round(out))
    for k in range(x.shape[2]):
        a, b = x[:, :, k].ravel(), out[:, :, k].ravel()
        order = np.argsort(a, kind="stable")
        assert np.all(np.diff(b[order]) >= 0)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(0, 255)),
    st.sampled_from(["min_max", "sigmoid"]),
)
def test_normalize_bounds_and_order(x, mode):
    spec = NormalizationSpec(mode, -1.0, 3.0)
    out = normalize(Image(x), spec).data[:, :, 0].ravel()
    assert out.min() >= -1.0 and out.max() <= 3.0
    order = np.argsort(x.ravel(), kind="stable")
    assert np.all(np.diff(out[order]) >= 0)


def test_preprocess_output_is_8bit():
    rng = np.random.default_rng(0)
    img = Image(rng.uniform(30, 90, (6, 6, 3)))
    out = preprocess(img)
    assert out.value_range == (0.0, 255.0)
    assert np.all(out.data == np.round(out.data))
    assert out.data.max() == 255.0
    assert preprocess(img, None, False) is img
