"""Change-point detectors and automatic thresholds on sorted positive W."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

METHOD_STATS = "stats"
METHOD_GAPS = "gaps"
METHOD_MANUAL = "manual"


class EmptySelection(Exception):
    """No strictly positive W statistic: nothing can be selected."""


@dataclass(frozen=True)
class SortedPositiveW:
    """Ascending strictly positive W values with their covariate indices."""

    values: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_statistics(cls, W: np.ndarray) -> "SortedPositiveW":
        W = np.asarray(W, dtype=float)
        pos = np.flatnonzero(W > 0)
        order = np.argsort(W[pos], kind="stable")
        return cls(values=W[pos][order], indices=pos[order])

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.values)


@dataclass(frozen=True)
class ThresholdResult:
    """Selection threshold s with its method tag and detector candidates.

    For automatic methods, candidates holds the (cusum, dp) per-detector
    thresholds and s is their minimum. degenerate marks the w < 3 fallback
    where every positive statistic is kept.
    """

    s: float
    method: str
    candidates: tuple[float, float] | None = None
    degenerate: bool = False


def cusum_breakpoint(x: np.ndarray) -> int:
    """Mean-shift breakpoint: argmax of |cumulative centered sum|, 1-based.

    Returns b splitting x into x[:b] and x[b:]; smallest index on ties.
    """
    x = np.asarray(x, dtype=float)
    m = len(x)
    if m < 2:
        raise ValueError("need at least 2 points")
    s = np.cumsum(x - x.mean())[:-1]
    return int(np.argmax(np.abs(s))) + 1


def dp_breakpoint(x: np.ndarray) -> int:
    """Optimal 2-segment least-squares split (exact, prefix sums), 1-based.

    Minimises SSE(x[:b]) + SSE(x[b:]); smallest index on ties.
    """
    x = np.asarray(x, dtype=float)
    m = len(x)
    if m < 2:
        raise ValueError("need at least 2 points")
    s1 = np.cumsum(x)
    s2 = np.cumsum(x**2)
    total1, total2 = s1[-1], s2[-1]
    b = np.arange(1, m)
    left = s2[:-1] - s1[:-1] ** 2 / b
    right = (total2 - s2[:-1]) - (total1 - s1[:-1]) ** 2 / (m - b)
    cost = left + right
    return int(np.argmin(cost)) + 1


def _threshold_from(sorted_w: SortedPositiveW, method: str) -> ThresholdResult | None:
    """Common small-w handling; returns a degenerate result or None."""
    w = sorted_w.count
    if w == 0:
        raise EmptySelection("no positive W statistics")
    if w < 3:
        return ThresholdResult(s=float(sorted_w.values[0]), method=method, degenerate=True)
    return None


def w_threshold(sorted_w: SortedPositiveW) -> ThresholdResult:
    """Detectors on the sorted statistics; s = min of the two candidates."""
    degenerate = _threshold_from(sorted_w, METHOD_STATS)
    if degenerate is not None:
        return degenerate
    v = sorted_w.values
    cands = (float(v[cusum_breakpoint(v)]), float(v[dp_breakpoint(v)]))
    return ThresholdResult(s=min(cands), method=METHOD_STATS, candidates=cands)


def gaps_threshold(sorted_w: SortedPositiveW) -> ThresholdResult:
    """Detectors on the gaps between sorted statistics; s = min candidate.

    A break at gap index b means e_{b+1} starts the upper segment, so the
    candidate threshold is the value just above that gap.
    """
    degenerate = _threshold_from(sorted_w, METHOD_GAPS)
    if degenerate is not None:
        return degenerate
    v = sorted_w.values
    g = sorted_w.gaps
    cands = (float(v[cusum_breakpoint(g) + 1]), float(v[dp_breakpoint(g) + 1]))
    return ThresholdResult(s=min(cands), method=METHOD_GAPS, candidates=cands)


def manual_threshold(s: float) -> ThresholdResult:
    if s <= 0:
        raise ValueError("manual threshold must be positive")
    return ThresholdResult(s=float(s), method=METHOD_MANUAL)
