"""Brute-force reference implementations.

Quadratic-time loops written straight from the definitions, with no
sorting tricks; used to cross-check the fast kernels in :mod:`netfdr.stats`
and :mod:`netfdr.compression`.
"""

from __future__ import annotations

import math


def bc_threshold(values, alpha):
    best = math.inf
    for t in {abs(w) for w in values if w != 0}:
        v_hat = 1 + sum(1 for w in values if w <= -t)
        r = sum(1 for w in values if w >= t)
        if v_hat / max(r, 1) <= alpha and t < best:
            best = t
    return best


def bc_rejected(values, alpha):
    t = bc_threshold(values, alpha)
    return [j for j, w in enumerate(values) if w >= t]


def bh_rejected(pvalues, alpha):
    n = len(pvalues)
    # p_(k) <= k alpha / n  <=>  at least k p-values are <= k alpha / n
    k_max = 0
    for k in range(1, n + 1):
        if sum(1 for p in pvalues if p <= k * alpha / n) >= k:
            k_max = k
    if k_max == 0:
        return []
    cut = k_max * alpha / n
    return [j for j, p in enumerate(pvalues) if p <= cut]


def simes(pvalues):
    n = len(pvalues)
    best = 1.0
    for p in pvalues:
        rank = sum(1 for x in pvalues if x <= p)
        best = min(best, p * n / rank)
    return best


def sample_counts(normalized, L):
    v, r = [], []
    for ell in range(1, L + 1):
        t = (ell - 1) / (L - 1)
        v.append(sum(1 for x in normalized if x < -t))
        r.append(sum(1 for x in normalized if x > t))
    return v, r
