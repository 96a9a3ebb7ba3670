"""Reproducible random streams for Monte Carlo trials.

One independent counter-based stream per ``(seed, trial, node)``: a Philox
4x64-10 bit generator keyed through ``numpy.random.SeedSequence(seed,
spawn_key=(trial, node))``. Given the same algorithm and seed, every trial
can be regenerated in isolation and in any order.

Normal variates use the inverse-CDF method on midpoint-shifted uniforms so
that draws depend only on the uniform stream.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

__all__ = ["ALGORITHM", "stream", "uniform", "standard_normal"]

ALGORITHM = "philox4x64-10 keyed by SeedSequence(seed, spawn_key=(trial, node))"

_HALF_ULP = 2.0 ** -54


def stream(seed: int, trial: int, node: int) -> np.random.Generator:
    """Generator for one (trial, node) pair."""
    if seed < 0 or trial < 0 or node < 0:
        raise ValueError("seed, trial and node must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(node)))))


def uniform(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1)."""
    # random() yields multiples of 2**-53 in [0, 1); shift to cell midpoints
    return rng.random(size) + _HALF_ULP


def standard_normal(rng: np.random.Generator, size) -> np.ndarray:
    return ndtri(uniform(rng, size))
