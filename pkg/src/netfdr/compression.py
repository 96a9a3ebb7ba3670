"""Communication-reduction operators applied at the nodes.

A node either ships signed quantized magnitudes (O(m) bits), or samples the
counting processes behind the BC estimate of the FDP on a fixed grid of
thresholds (O(log m) bits).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .stats import ceil_to_grid

__all__ = [
    "QuantizedStatVector",
    "SampledCounts",
    "Quantizer",
    "normalize",
    "quantize_magnitudes",
    "ceiling_quantizer",
    "lossless_quantizer",
    "signed_quantize",
    "sample_grid",
    "sample_vr",
    "sample_vr_rows",
    "sample_budget_L",
    "ceil_log2",
]

#: A quantizer maps a vector of normalized magnitudes in [0, 1] to levels in [0, 1].
Quantizer = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuantizedStatVector:
    signs: np.ndarray
    levels: np.ndarray
    q: int

    @property
    def values(self) -> np.ndarray:
        """Signed reconstruction ``signs * levels``, as received by the center."""
        return self.signs * self.levels

    def __len__(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class SampledCounts:
    """Counts ``#{N_j < -t}`` and ``#{N_j > t}`` on the grid ``t_l = (l-1)/(L-1)``."""

    L: int
    v_hat: np.ndarray
    r: np.ndarray

    @property
    def grid(self) -> np.ndarray:
        return sample_grid(self.L)


def normalize(stats) -> np.ndarray:
    """Divide by the largest magnitude. An all-zero vector stays all-zero."""
    w = np.asarray(stats, dtype=float).ravel()
    if w.size == 0:
        return w.copy()
    scale = np.max(np.abs(w))
    if scale == 0.0:
        return np.zeros_like(w)
    return w / scale


def ceiling_quantizer(q: int) -> Quantizer:
    """Uniform ceiling grid: 0 stays 0 and (0, 1] maps onto {1/q, ..., 1}."""
    q = int(q)
    if q < 1:
        raise ValueError("q must be >= 1")

    def quant(mags: np.ndarray) -> np.ndarray:
        return ceil_to_grid(mags, q)

    return quant


def lossless_quantizer(mags: np.ndarray) -> np.ndarray:
    """Identity quantizer; stands in for the ``q -> inf`` limit."""
    return np.asarray(mags, dtype=float).copy()


def quantize_magnitudes(normalized_magnitudes, q: int, quantizer: Quantizer | None = None) -> np.ndarray:
    """Quantize normalized magnitudes in [0, 1].

    The default is :func:`ceiling_quantizer`. Any ``quantizer`` that depends
    only on the magnitude vector keeps the pooled BC procedure valid.
    """
    m = np.asarray(normalized_magnitudes, dtype=float).ravel()
    if np.any(~np.isfinite(m)) or np.any(m < 0.0) or np.any(m > 1.0):
        raise ValueError("normalized magnitudes must lie in [0, 1]")
    if quantizer is None:
        quantizer = ceiling_quantizer(q)
    return np.asarray(quantizer(m), dtype=float)


def signed_quantize(stats, q: int, quantizer: Quantizer | None = None) -> QuantizedStatVector:
    """Normalize, quantize the magnitudes and reattach the signs."""
    n = normalize(stats)
    levels = quantize_magnitudes(np.abs(n), q, quantizer)
    return QuantizedStatVector(np.sign(n), levels, int(q))


def sample_grid(L: int) -> np.ndarray:
    if L < 2:
        raise ValueError("L must be >= 2")
    return np.arange(L) / (L - 1)


def sample_vr_rows(X, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``(v_hat, r)`` count arrays of shape ``(B, L)`` for a 2-D input."""
    t = sample_grid(int(L))
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected a 2-D array")
    v_hat = np.empty((X.shape[0], t.size), dtype=np.int64)
    r = np.empty((X.shape[0], t.size), dtype=np.int64)
    for ell, tl in enumerate(t):
        v_hat[:, ell] = (X < -tl).sum(axis=1)
        r[:, ell] = (X > tl).sum(axis=1)
    return v_hat, r


def sample_vr(normalized, L: int) -> SampledCounts:
    """Sample the negative/positive tail counts with strict inequalities.

    Examples
    --------
    >>> c = sample_vr([0.5, -1, 0.25, 0.9], 3)
    >>> c.v_hat.tolist(), c.r.tolist()
    ([1, 1, 0], [3, 1, 0])
    """
    n = np.asarray(normalized, dtype=float).ravel()
    v_hat, r = sample_vr_rows(n[None, :], L)
    return SampledCounts(int(L), v_hat[0], r[0])


def sample_budget_L(n: int, q: int) -> int:
    """Grid size that matches the sampled-BC uplink to the q-BC uplink.

    ``floor(n * (ceil(log2 q) + 1) / (2 * ceil(log2 n)))``
    """
    n, q = int(n), int(q)
    if n < 2:
        raise ValueError("n must be >= 2")
    if q < 1:
        raise ValueError("q must be >= 1")
    bits_per_stat = ceil_log2(q) + 1
    return (n * bits_per_stat) // (2 * ceil_log2(n))


def ceil_log2(x: int) -> int:
    # exact for integers, unlike math.ceil(math.log2(x)) near powers of two
    if int(x) < 1:
        raise ValueError("ceil_log2 needs x >= 1")
    return (int(x) - 1).bit_length()
