"""Paired significance testing and effect size."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def paired_bootstrap(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    resamples: int = 10_000,
    seed: int = 0,
) -> float:
    """Two-sided bootstrap p-value for a non-zero mean paired difference.

    Paired differences are centred to impose the null hypothesis, resampled
    with replacement, and the p-value is the add-one share of resampled means
    at least as extreme as the observed mean. It is never exactly 0, and
    equals 1 when every difference is zero.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired samples must be equal-length 1-D arrays, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise ValueError("need at least two paired observations")
    if resamples < 1:
        raise ValueError("resamples must be positive")
    d = a - b
    observed = abs(d.mean())
    centred = d - d.mean()
    rng = np.random.default_rng(seed)
    n = d.size
    hits = 0
    block = max(1, min(resamples, 2_000_000 // n))
    done = 0
    while done < resamples:
        m = min(block, resamples - done)
        idx = rng.integers(0, n, size=(m, n))
        means = centred[idx].mean(axis=1)
        # slack absorbs rounding in the centred means when observed is 0
        hits += int(np.count_nonzero(np.abs(means) >= observed - 1e-12))
        done += m
    return (hits + 1) / (resamples + 1)


def cliffs_delta(scores_a: Sequence[float], scores_b: Sequence[float]) -> float:
    """``(#{a > b} - #{a < b}) / (n_a * n_b)`` over all cross pairs."""
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    return float(np.sign(a[:, None] - b[None, :]).sum() / (a.size * b.size))
