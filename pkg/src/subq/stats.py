"""Distances between measured outcome distributions.

``ks_statistic`` is defined as the largest
elementwise gap ``max |p - q|`` between probability vectors, rather than the
usual gap between cumulative distributions.  Its p-value uses the asymptotic
two-sample Kolmogorov law with caller-supplied sample sizes.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np
from scipy.special import kolmogorov

from subq.errors import ValidationError


def _pair(p, q):
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise ValidationError(f"dimension mismatch: {p.size} vs {q.size}")
    return p, q


def as_probabilities(counts: Mapping[int, float], dim: int) -> np.ndarray:
    """Dense normalised vector from an index -> count mapping."""
    p = np.zeros(dim)
    for k, c in counts.items():
        if not 0 <= k < dim:
            raise ValidationError(f"outcome {k} outside 0..{dim - 1}")
        if c < 0:
            raise ValidationError("counts must be non-negative")
        p[k] += c
    total = p.sum()
    if total <= 0:
        raise ValidationError("no probability mass")
    return p / total


def cosine_similarity(p, q) -> float:
    """Cosine distance ``1 - p.q / (|p| |q|)``; 0 for identical directions.

    Evaluated as ``|p/|p| - q/|q||^2 / 2``, which is the same quantity without
    the cancellation in ``1 - cos`` for nearly parallel vectors.
    """
    p, q = _pair(p, q)
    np_, nq = np.linalg.norm(p), np.linalg.norm(q)
    if np_ == 0 or nq == 0:
        raise ValidationError("cosine similarity is undefined for a zero vector")
    diff = p / np_ - q / nq
    return float(0.5 * (diff @ diff))


def ks_statistic(p, q, n_p: int | None = None, n_q: int | None = None) -> tuple[float, float]:
    """``(D, p_value)`` with ``D = max |p - q|``; p-value is NaN without sample sizes."""
    p, q = _pair(p, q)
    d = float(np.abs(p - q).max(initial=0.0))
    if not n_p or not n_q:
        return d, math.nan
    en = math.sqrt(n_p * n_q / (n_p + n_q))
    return d, float(kolmogorov(en * d))


def total_variation(p, q) -> float:
    p, q = _pair(p, q)
    return float(0.5 * np.abs(p - q).sum())
