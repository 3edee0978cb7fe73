"""Time-weighted trajectory statistics shared by both simulators.

A trajectory is piecewise constant, so the occupation measure weights each
visited configuration by its holding time.  ``OccupationStats`` accumulates
per-site value histograms, first and second moment integrals, boundary flux
totals, and a regularly spaced sample of the trajectory (used downstream to
estimate autocorrelation times).  Replica results merge by plain summation,
which makes R merged replicas identical to one run of the concatenated
duration for every reported moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["IntHistogram", "BinnedHistogram", "OccupationStats"]


class IntHistogram:
    """Holding-time weights per non-negative integer value."""

    __slots__ = ("weights",)

    def __init__(self) -> None:
        self.weights: list[float] = []

    def add(self, value: int, w: float) -> None:
        ws = self.weights
        if value >= len(ws):
            ws.extend([0.0] * (value + 1 - len(ws)))
        ws[value] += w

    def merge(self, other: "IntHistogram") -> None:
        if len(other.weights) > len(self.weights):
            self.weights.extend([0.0] * (len(other.weights) - len(self.weights)))
        for v, w in enumerate(other.weights):
            self.weights[v] += w

    def total(self) -> float:
        return float(sum(self.weights))

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.arange(len(self.weights)), np.asarray(self.weights)


class BinnedHistogram:
    """Log-spaced bins on (lo, hi] plus underflow and overflow slots.

    Exponential-tailed marginals put most mass across several decades, so
    uniform-in-log bins keep resolution where it matters; the bin index is
    arithmetic in log(value), no search needed.
    """

    __slots__ = ("lo", "hi", "n_bins", "_log_lo", "_dlog", "weights")

    def __init__(self, lo: float, hi: float, n_bins: int = 256) -> None:
        if not (0.0 < lo < hi):
            raise ValueError("need 0 < lo < hi")
        self.lo = lo
        self.hi = hi
        self.n_bins = n_bins
        self._log_lo = math.log(lo)
        self._dlog = (math.log(hi) - self._log_lo) / n_bins
        self.weights = [0.0] * (n_bins + 2)  # [under, bins..., over]

    def add(self, value: float, w: float) -> None:
        if value <= self.lo:
            self.weights[0] += w
        elif value > self.hi:
            self.weights[-1] += w
        else:
            idx = int((math.log(value) - self._log_lo) / self._dlog)
            self.weights[min(idx, self.n_bins - 1) + 1] += w

    def merge(self, other: "BinnedHistogram") -> None:
        if (other.lo, other.hi, other.n_bins) != (self.lo, self.hi, self.n_bins):
            raise ValueError("cannot merge histograms with different binning")
        for i, w in enumerate(other.weights):
            self.weights[i] += w

    def total(self) -> float:
        return float(sum(self.weights))

    def edges(self) -> np.ndarray:
        return np.exp(self._log_lo + self._dlog * np.arange(self.n_bins + 1))


@dataclass
class OccupationStats:
    """Mergeable time-weighted statistics of one or more trajectories."""

    n_sites: int
    model: str
    duration: float = 0.0
    event_count: int = 0
    mean_acc: np.ndarray = field(default_factory=lambda: np.zeros(0))
    second_acc: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    hists: list = field(default_factory=list)
    series: list[np.ndarray] = field(default_factory=list)
    series_dt: float = 0.0
    injected_a: float = 0.0
    extracted_a: float = 0.0
    injected_b: float = 0.0
    extracted_b: float = 0.0
    wall_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def mean(self) -> np.ndarray:
        return self.mean_acc / self.duration

    def cov(self) -> np.ndarray:
        mu = self.mean()
        return self.second_acc / self.duration - np.outer(mu, mu)

    def merge(self, other: "OccupationStats") -> "OccupationStats":
        """Sum accumulators of two independent runs (commutative, associative)."""
        if (self.n_sites, self.model) != (other.n_sites, other.model):
            raise ValueError("cannot merge stats from different chains")
        if self.series and other.series and self.series_dt != other.series_dt:
            raise ValueError("cannot merge stats with different series spacing")
        out = OccupationStats(
            n_sites=self.n_sites,
            model=self.model,
            duration=self.duration + other.duration,
            event_count=self.event_count + other.event_count,
            mean_acc=self.mean_acc + other.mean_acc,
            second_acc=self.second_acc + other.second_acc,
            hists=[_copy_hist(h) for h in self.hists],
            series=list(self.series) + list(other.series),
            series_dt=self.series_dt or other.series_dt,
            injected_a=self.injected_a + other.injected_a,
            extracted_a=self.extracted_a + other.extracted_a,
            injected_b=self.injected_b + other.injected_b,
            extracted_b=self.extracted_b + other.extracted_b,
            wall_seconds=self.wall_seconds + other.wall_seconds,
            extra=dict(self.extra),
        )
        for mine, theirs in zip(out.hists, other.hists):
            mine.merge(theirs)
        return out


def _copy_hist(h):
    if isinstance(h, IntHistogram):
        out = IntHistogram()
        out.weights = list(h.weights)
        return out
    out = BinnedHistogram(h.lo, h.hi, h.n_bins)
    out.weights = list(h.weights)
    return out
