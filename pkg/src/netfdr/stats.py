"""Classical inference primitives: sign test, Wilcoxon signed-rank test,
Barber-Candès (BC) selection, Benjamini-Hochberg (BH) selection, the Simes
global p-value and p-value quantization.

Everything here is a pure function of its arguments. The BC, BH and Simes
kernels are also exposed in row-batched form (``*_rows``) so that large
collections of small instances can be processed without a Python loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import rankdata

__all__ = [
    "SelectionResult",
    "sign_test_pvalue",
    "wilcoxon_statistic",
    "wilcoxon_pvalue",
    "normal_sf",
    "bc_select",
    "bc_threshold_rows",
    "bh_select",
    "bh_count_rows",
    "simes_pvalue",
    "simes_rows",
    "quantize_pvalue",
    "ceil_to_grid",
]


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a threshold-type selection rule.

    ``threshold`` is ``inf`` when nothing qualifies, in which case
    ``fdp_hat_at_threshold`` is ``None`` and ``rejected`` is empty.
    """

    threshold: float
    rejected: np.ndarray
    fdp_hat_at_threshold: float | None


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def _as_pvalues(pvalues) -> np.ndarray:
    p = np.asarray(pvalues, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.size == 0:
        raise ValueError("at least one p-value is required")
    if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("p-values must lie in [0, 1]")
    return p


# ---------------------------------------------------------------------------
# sign test


@lru_cache(maxsize=65536)
def _binom_half_cdf(x: int, n: int) -> float:
    if x >= n:
        return 1.0
    k = np.arange(x + 1, dtype=float)
    log_pmf = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0) - n * math.log(2.0)
    return float(min(1.0, math.exp(logsumexp(log_pmf))))


def sign_test_pvalue(num_negative: int, n: int) -> float:
    """One-sided sign-test p-value ``P(Bin(n, 1/2) <= num_negative)``.

    Small values are evidence for a positive location shift.
    """
    num_negative = int(num_negative)
    n = int(n)
    if n < 1:
        raise ValueError("sign test needs n >= 1")
    if not 0 <= num_negative <= n:
        raise ValueError(f"num_negative must lie in [0, {n}], got {num_negative}")
    return _binom_half_cdf(num_negative, n)


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank test


def wilcoxon_statistic(values) -> tuple[float, int]:
    """Signed-rank sum over the strictly positive entries of ``values``.

    Exact zeros are discarded before ranking and tied magnitudes share
    their average rank.

    Returns
    -------
    W : float
        Sum of the ranks of ``|values|`` carried by positive entries.
    n_eff : int
        Number of nonzero entries that entered the ranking.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("wilcoxon_statistic needs at least one value")
    x = x[x != 0.0]
    if x.size == 0:
        raise ValueError("all entries are zero; Wilcoxon statistic is degenerate")
    ranks = rankdata(np.abs(x), method="average")
    return float(ranks[x > 0].sum()), int(x.size)


def normal_sf(z: float) -> float:
    """Upper tail ``1 - Phi(z)`` of the standard normal, via ``erfc``."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def wilcoxon_pvalue(W: float, n: int) -> float:
    """Asymptotic one-sided p-value of the signed-rank statistic.

    Uses the plain normal approximation (no continuity correction); large
    ``W`` is evidence against symmetry about zero in the positive direction.
    """
    n = int(n)
    if n < 1:
        raise ValueError("wilcoxon_pvalue needs n >= 1")
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    return normal_sf((float(W) - mean) / math.sqrt(var))


# ---------------------------------------------------------------------------
# Barber-Candès selection


def bc_threshold_rows(W, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise BC thresholds for a 2-D array of statistics.

    For every row the candidate thresholds are its distinct nonzero
    magnitudes; the estimated FDP at ``t`` is
    ``(1 + #{W <= -t}) / max(#{W >= t}, 1)``.

    Returns
    -------
    threshold : ndarray of shape (B,)
        Smallest qualifying candidate, ``inf`` where none qualifies.
    fdp_hat : ndarray of shape (B,)
        Estimated FDP at the threshold, ``nan`` where it is infinite.
    """
    _check_alpha(alpha)
    W = np.asarray(W, dtype=float)
    if W.ndim != 2:
        raise ValueError("expected a 2-D array")
    B, m = W.shape
    if m == 0:
        return np.full(B, np.inf), np.full(B, np.nan)

    mag = np.abs(W)
    order = np.argsort(mag, axis=1, kind="stable")
    mag_s = np.take_along_axis(mag, order, axis=1)
    w_s = np.take_along_axis(W, order, axis=1)

    # suffix counts over ascending magnitudes: entries with |W| >= mag_s[k]
    pos = (w_s > 0).astype(np.int64)
    neg = (w_s < 0).astype(np.int64)
    r_suffix = np.cumsum(pos[:, ::-1], axis=1)[:, ::-1]
    v_suffix = np.cumsum(neg[:, ::-1], axis=1)[:, ::-1]

    # ties: every member of a run of equal magnitudes uses the run's first index
    idx = np.broadcast_to(np.arange(m), (B, m))
    new_run = np.ones((B, m), dtype=bool)
    new_run[:, 1:] = mag_s[:, 1:] != mag_s[:, :-1]
    start = np.maximum.accumulate(np.where(new_run, idx, 0), axis=1)
    r = np.take_along_axis(r_suffix, start, axis=1)
    v_hat = 1 + np.take_along_axis(v_suffix, start, axis=1)

    fdp = v_hat / np.maximum(r, 1)
    ok = (mag_s > 0) & (fdp <= alpha)
    has = ok.any(axis=1)
    first = np.argmax(ok, axis=1)
    rows = np.arange(B)
    threshold = np.where(has, mag_s[rows, first], np.inf)
    fdp_hat = np.where(has, fdp[rows, first], np.nan)
    return threshold, fdp_hat


def bc_select(values, alpha: float) -> SelectionResult:
    """Barber-Candès selection on one vector of signed statistics.

    Rejects ``{j : values[j] >= T}`` where ``T`` is the smallest nonzero
    magnitude whose estimated FDP is at most ``alpha``.

    Examples
    --------
    >>> res = bc_select([5, 4, 3, 2, 1, -1], 0.25)
    >>> res.threshold, res.rejected.tolist()
    (2.0, [0, 1, 2, 3])
    """
    w = np.asarray(values, dtype=float).ravel()
    t, f = bc_threshold_rows(w[None, :], alpha)
    threshold = float(t[0])
    if math.isinf(threshold):
        return SelectionResult(math.inf, np.empty(0, dtype=np.int64), None)
    return SelectionResult(threshold, np.flatnonzero(w >= threshold), float(f[0]))


# ---------------------------------------------------------------------------
# Benjamini-Hochberg and Simes


def bh_count_rows(P, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise BH rejection counts.

    Returns ``(k, order)`` where ``k[b]`` is the number of rejections in row
    ``b`` and ``order`` is the stable ascending argsort of each row; the
    rejected indices of row ``b`` are ``order[b, :k[b]]``.
    """
    _check_alpha(alpha)
    P = np.asarray(P, dtype=float)
    if P.ndim != 2:
        raise ValueError("expected a 2-D array")
    n = P.shape[1]
    order = np.argsort(P, axis=1, kind="stable")
    p_s = np.take_along_axis(P, order, axis=1)
    ranks = np.arange(1, n + 1)
    passing = p_s <= ranks * alpha / n
    # largest passing rank, 0 if none
    k = np.where(passing.any(axis=1), n - np.argmax(passing[:, ::-1], axis=1), 0)
    return k, order


def bh_select(pvalues, alpha: float) -> np.ndarray:
    """Indices rejected by the BH step-up procedure at level ``alpha``.

    Ties among p-values are ordered by original index. Returned indices are
    sorted ascending.
    """
    p = _as_pvalues(pvalues)
    k, order = bh_count_rows(p[None, :], alpha)
    return np.sort(order[0, : k[0]])


def simes_rows(P) -> np.ndarray:
    """Row-wise Simes p-values ``min_i P_(i) * n / i``, capped at 1."""
    P = np.asarray(P, dtype=float)
    n = P.shape[1]
    p_s = np.sort(P, axis=1)
    return np.minimum(1.0, (p_s * n / np.arange(1, n + 1)).min(axis=1))


def simes_pvalue(pvalues) -> float:
    """Simes combination of independent p-values into a global-null p-value."""
    p = _as_pvalues(pvalues)
    return float(simes_rows(p[None, :])[0])


def quantize_pvalue(p: float, k: int) -> float:
    """Round a p-value up to the grid ``{0, 1/k, ..., 1}``.

    The result is never smaller than ``p``, so superuniformity is preserved.
    """
    k = int(k)
    if k < 1:
        raise ValueError("number of quantization levels must be >= 1")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError("p-value must lie in [0, 1]")
    return float(ceil_to_grid(np.array([p]), k)[0])


def ceil_to_grid(x, k: int) -> np.ndarray:
    """Smallest grid point ``c / k`` (integer ``c``) that is ``>= x``.

    ``ceil(k * x)`` alone can land one level off when ``k * x`` rounds across
    an integer, so the level is corrected against the float comparison the
    caller will actually observe.
    """
    x = np.asarray(x, dtype=float)
    c = np.ceil(k * x)
    c = np.where(c / k < x, c + 1, c)
    c = np.where((c - 1) / k >= x, c - 1, c)
    return c / k
