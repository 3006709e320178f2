"""Distance kernels for comparing non-negative feature templates.

Seven metrics are provided, selected by stable string name:

    city_block      sum |p_i - q_i|
    kulczynski_d    sum |p_i - q_i| / sum min(p_i, q_i)
    czekanowski     1 - 2 sum min(p_i, q_i) / sum (p_i + q_i)
    dice            1 - 2 sum p_i q_i / (sum p_i^2 + sum q_i^2)
    squared         sum (p_i - q_i)^2 / (p_i + q_i)
    squared_chord   sum (sqrt(p_i) - sqrt(q_i))^2
    jensen_shannon  0.5 [sum p_i ln(2 p_i / (p_i + q_i))
                         + sum q_i ln(2 q_i / (p_i + q_i))]

All kernels are symmetric, return 0 for identical inputs, and are defined
over finite non-negative vectors of equal dimension.  Degenerate terms use
the standard limit conventions: 0/0 terms contribute 0, and 0 * ln 0 = 0.
The single global division in kulczynski_d is the one place a ratio cannot
be patched termwise; a zero denominator with a nonzero numerator yields
INFINITE_DISTANCE (worse than every finite distance).
"""

from __future__ import annotations

import numpy as np

# Sentinel for "no finite distance exists" (kulczynski_d on disjoint
# supports).  Stored as an IEEE infinity so it sorts after every finite
# value; curve code must treat it explicitly, never threshold through it.
INFINITE_DISTANCE = float("inf")

METRIC_NAMES = (
    "city_block",
    "kulczynski_d",
    "czekanowski",
    "dice",
    "squared",
    "squared_chord",
    "jensen_shannon",
)


def _city_block(p, Q):
    return np.abs(Q - p).sum(axis=1)


def _kulczynski_d(p, Q):
    num = np.abs(Q - p).sum(axis=1)
    den = np.minimum(Q, p).sum(axis=1)
    out = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    # den == 0 means disjoint support; 0/0 (both vectors zero) stays 0
    out[(den == 0) & (num > 0)] = INFINITE_DISTANCE
    return out


def _czekanowski(p, Q):
    num = 2.0 * np.minimum(Q, p).sum(axis=1)
    den = p.sum() + Q.sum(axis=1)
    ratio = np.divide(num, den, out=np.ones_like(den), where=den > 0)
    return 1.0 - ratio


def _dice(p, Q):
    num = 2.0 * (Q * p).sum(axis=1)
    den = (p * p).sum() + (Q * Q).sum(axis=1)
    ratio = np.divide(num, den, out=np.ones_like(den), where=den > 0)
    return 1.0 - ratio


def _squared(p, Q):
    diff2 = (Q - p) ** 2
    s = Q + p
    terms = np.divide(diff2, s, out=np.zeros_like(diff2), where=s > 0)
    return terms.sum(axis=1)


def _squared_chord(p, Q):
    return ((np.sqrt(Q) - np.sqrt(p)) ** 2).sum(axis=1)


def _jensen_shannon(p, Q):
    s = Q + p
    # where p_i > 0 the pair sum is positive too, so the ratio is safe;
    # masked-out slots divide to 1 and log to 0
    ratio_p = np.divide(2.0 * p, s, out=np.ones_like(s), where=p > 0)
    ratio_q = np.divide(2.0 * Q, s, out=np.ones_like(s), where=Q > 0)
    term_p = np.where(p > 0, p * np.log(ratio_p), 0.0)
    term_q = np.where(Q > 0, Q * np.log(ratio_q), 0.0)
    return 0.5 * (term_p.sum(axis=1) + term_q.sum(axis=1))


_KERNELS = {
    "city_block": _city_block,
    "kulczynski_d": _kulczynski_d,
    "czekanowski": _czekanowski,
    "dice": _dice,
    "squared": _squared,
    "squared_chord": _squared_chord,
    "jensen_shannon": _jensen_shannon,
}


def distance_rows(metric: str, p: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Distances from one probe vector to every row of a gallery matrix.

    Inputs are assumed already validated (finite, non-negative, equal
    dimension); this is the hot path used by the matcher.  Tiny negative
    results from rounding are clamped to zero.
    """
    if metric not in _KERNELS:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRIC_NAMES}")
    out = _KERNELS[metric](p, Q)
    return np.maximum(out, 0.0)


def distance(metric: str, p, q) -> float:
    """Distance between two feature vectors under the named metric.

    Raises ValueError on unknown metric, dimension mismatch, or any
    negative / non-finite component.  Returns INFINITE_DISTANCE where the
    metric has no finite value (kulczynski_d over disjoint supports).
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.ndim != 1 or q.ndim != 1:
        raise ValueError("feature vectors must be one-dimensional")
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape[0]} vs {q.shape[0]}")
    if p.shape[0] < 1:
        raise ValueError("feature vectors must have dimension >= 1")
    for name, v in (("p", p), ("q", q)):
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{name} contains non-finite values")
        if np.any(v < 0):
            raise ValueError(f"{name} contains negative values")
    return float(distance_rows(metric, p, q[np.newaxis, :])[0])
