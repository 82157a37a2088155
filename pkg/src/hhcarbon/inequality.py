"""Lorenz curves, Gini coefficients and tail shares for nonnegative attributes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class EmptyInput(ValueError):
    """No observations supplied."""


class AllZero(ValueError):
    """Every value is zero, so shares are undefined."""


class InvalidQuantile(ValueError):
    """Quantile q must satisfy 0 < q < 1."""


def _as_values(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyInput("need a non-empty 1-d collection of values")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("values must be finite and non-negative")
    if not np.any(arr > 0):
        raise AllZero("all values are zero")
    return arr


def gini(values: Sequence[float]) -> float:
    """Gini coefficient via the sorted-rank formula, O(n log n).

    Equals the pairwise-difference definition
    sum_ij |x_i - x_j| / (2 n^2 mean).
    """
    arr = np.sort(_as_values(values))
    n = arr.size
    ranks = np.arange(1, n + 1)
    return float(2.0 * np.sum(ranks * arr) / (n * arr.sum()) - (n + 1) / n)


@dataclass(frozen=True)
class LorenzResult:
    """Sorted cumulative-share curve with its Gini coefficient.

    points[k] = (k/n, share of total held by the poorest k); starts at (0, 0)
    and ends at (1, 1).
    """

    points: tuple[tuple[float, float], ...]
    gini: float
    sorted_values: tuple[float, ...]

    def bottom_share(self, q: float) -> float:
        """Fraction of the total held by the poorest ceil(q*n) units."""
        return _tail(np.asarray(self.sorted_values), q, "bottom")

    def top_share(self, q: float) -> float:
        """Fraction of the total held by the richest ceil(q*n) units."""
        return _tail(np.asarray(self.sorted_values), q, "top")


def lorenz(values: Sequence[float]) -> LorenzResult:
    """Lorenz curve of a nonnegative attribute, plus its Gini coefficient."""
    arr = _as_values(values)
    order = np.argsort(arr, kind="stable")
    srt = arr[order]
    n = srt.size
    cum = np.cumsum(srt) / srt.sum()
    pts = [(0.0, 0.0)]
    pts += [((k + 1) / n, float(cum[k])) for k in range(n)]
    return LorenzResult(points=tuple(pts), gini=gini(arr),
                        sorted_values=tuple(float(v) for v in srt))


def _tail(sorted_ascending: np.ndarray, q: float, which: str) -> float:
    if not (0.0 < q < 1.0):
        raise InvalidQuantile(f"q must lie strictly between 0 and 1, got {q}")
    n = sorted_ascending.size
    k = math.ceil(q * n)
    total = sorted_ascending.sum()
    if which == "top":
        return float(sorted_ascending[n - k:].sum() / total)
    if which == "bottom":
        return float(sorted_ascending[:k].sum() / total)
    raise ValueError(f"which must be 'top' or 'bottom', got {which!r}")


def tail_share(values: Sequence[float], q: float, which: str = "top") -> float:
    """Share of the total held by the ceil(q*n) largest or smallest values.

    The cut is count-based after a stable ascending sort, so ties are broken
    deterministically by original input index.
    """
    arr = _as_values(values)
    order = np.argsort(arr, kind="stable")
    return _tail(arr[order], q, which)
