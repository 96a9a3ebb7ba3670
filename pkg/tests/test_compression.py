import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netfdr import oracles
from netfdr.compression import (
    ceil_log2,
    lossless_quantizer,
    normalize,
    quantize_magnitudes,
    sample_budget_L,
    sample_vr,
    signed_quantize,
)


@pytest.mark.parametrize(
    "stats, expected",
    [((2, -4, 1), (0.5, -1.0, 0.25)), ((0, 0), (0.0, 0.0)), ((-3,), (-1.0,))],
)
def test_normalize_examples(stats, expected):
    assert normalize(stats).tolist() == list(expected)


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=30), st.integers(-20, 20))
def test_normalize_scale_invariant_and_unit_max(values, e):
    n = normalize(values)
    # powers of two keep the division exact
    assert np.array_equal(normalize(np.array(values) * 2.0**e), n)
    if any(values):
        assert np.max(np.abs(n)) == 1.0
    else:
        assert not n.any()


@pytest.mark.parametrize("m, q, expected", [(0.5, 4, 0.5), (1.0, 4, 1.0), (0.01, 4, 0.25), (0.0, 4, 0.0)])
def test_quantize_magnitudes_examples(m, q, expected):
    assert quantize_magnitudes([m], q).tolist() == [expected]


def test_quantize_grid_sweep_matches_ceiling():
    # exact rational check of ceil(q m)/q on a dense grid of dyadic magnitudes
    from fractions import Fraction
    import math

    for q in (1, 3, 4, 16):
        mags = np.arange(0, 1025) / 1024
        got = quantize_magnitudes(mags, q)
        want = [math.ceil(Fraction(x) * q) / q for x in mags]
        assert got.tolist() == want


def test_quantize_magnitudes_rejects_out_of_range():
    with pytest.raises(ValueError):
        quantize_magnitudes([1.2], 4)
    with pytest.raises(ValueError):
        quantize_magnitudes([-0.1], 4)
    with pytest.raises(ValueError):
        quantize_magnitudes([0.5], 0)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.integers(1, 64))
def test_quantizer_monotone_conservative_within_one_level(mags, q):
    m = np.sort(np.array(mags))
    Q = quantize_magnitudes(m, q)
    assert np.all(np.diff(Q) >= 0)
    assert np.all(Q >= m)
    assert np.all(Q - m < 1 / q + 1e-15)
    assert np.all((Q == 0) == (m == 0))


@given(st.lists(finite, min_size=1, max_size=30), st.integers(1, 32))
def test_signed_reconstruction_keeps_signs(values, q):
    qv = signed_quantize(values, q)
    w = np.array(values)
    nz = (w != 0) & (qv.levels != 0)
    assert np.array_equal(np.sign(qv.values[nz]), np.sign(w[nz]))
    assert len(qv) == w.size


def test_lossless_quantizer_is_identity():
    x = np.array([0.0, 0.3, 1.0])
    assert np.array_equal(quantize_magnitudes(x, 1, lossless_quantizer), x)


@pytest.mark.parametrize(
    "n, L, v, r",
    [
        ((0.5, -1, 0.25, 0.9), 3, [1, 1, 0], [3, 1, 0]),
        ((1, 1), 2, [0, 0], [2, 0]),
        ((0, 0, 0), 2, [0, 0], [0, 0]),
    ],
)
def test_sample_vr_examples(n, L, v, r):
    c = sample_vr(n, L)
    assert (c.v_hat.tolist(), c.r.tolist()) == (v, r)
    assert c.grid[0] == 0.0 and c.grid[-1] == 1.0


def test_sample_vr_rejects_small_L():
    with pytest.raises(ValueError):
        sample_vr([0.5], 1)


def test_sample_vr_exhaustive_small():
    levels = [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0]
    for m in range(1, 5):
        for x in itertools.product(levels, repeat=m):
            for L in (2, 3, 5):
                c = sample_vr(x, L)
                assert (c.v_hat.tolist(), c.r.tolist()) == oracles.sample_counts(x, L)


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.integers(2, 20))
def test_sample_vr_count_invariants(x, L):
    c = sample_vr(x, L)
    assert np.all(np.diff(c.v_hat) <= 0) and np.all(np.diff(c.r) <= 0)
    assert np.all(c.v_hat + c.r <= len(x))
    assert c.v_hat[0] + c.r[0] + sum(1 for v in x if v == 0) == len(x)
    assert (c.v_hat.tolist(), c.r.tolist()) == oracles.sample_counts(x, L)


@pytest.mark.parametrize("n, q, L", [(50, 4, 12), (20, 4, 6), (4, 2, 2)])
def test_sample_budget_examples(n, q, L):
    assert sample_budget_L(n, q) == L


def test_sample_budget_rejects_small_n():
    with pytest.raises(ValueError):
        sample_budget_L(1, 4)


@given(st.integers(1, 10**6))
def test_ceil_log2_exact(x):
    c = ceil_log2(x)
    assert 2 ** c >= x and (c == 0 or 2 ** (c - 1) < x)
