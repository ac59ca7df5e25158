from __future__ import annotations

"""Post-run summaries of opinion vectors: histograms, gap clusters, moments,
and distances between binned distributions.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Sequence, Tuple

import numpy as np
import pandas as pd

from src.errors import ConfigurationError, FormatError, InputDomainError

__all__ = [
    "OpinionHistogram",
    "Cluster",
    "ClusterReport",
    "OpinionSummary",
    "HistogramDistance",
    "histogram",
    "detect_clusters",
    "summary_metrics",
    "histogram_distance",
    "normalized_entropy",
    "histogram_to_frame",
    "histogram_to_json",
    "read_histogram_csv",
    "counts_from_column",
    "clusters_to_frame",
    "clusters_to_json",
]

HISTOGRAM_COLUMNS = ["bin_index", "bin_lo", "bin_hi", "count"]


@dataclass(frozen=True, eq=False)
class OpinionHistogram:
    """Uniform bins on [lo, hi]; samples outside the range go to the overflow counters."""

    lo: float
    hi: float
    n_bins: int
    counts: np.ndarray
    out_of_range_low: int = 0
    out_of_range_high: int = 0
    total: int = field(init=False)

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        if counts.size != self.n_bins:
            raise ConfigurationError(f"{counts.size} counts for {self.n_bins} bins")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(
            self, "total", int(counts.sum()) + self.out_of_range_low + self.out_of_range_high
        )

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.n_bins

    @property
    def edges(self) -> np.ndarray:
        return self.lo + self.width * np.arange(self.n_bins + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.lo + self.width * (np.arange(self.n_bins) + 0.5)

    def same_binning(self, other: "OpinionHistogram") -> bool:
        return (self.lo, self.hi, self.n_bins) == (other.lo, other.hi, other.n_bins)


@dataclass(frozen=True)
class Cluster:
    member_indices: Tuple[int, ...]
    centroid: float
    width: float

    @property
    def size(self) -> int:
        return len(self.member_indices)


@dataclass(frozen=True)
class ClusterReport:
    clusters: List[Cluster]
    gap_threshold: float

    def __len__(self) -> int:
        return len(self.clusters)


@dataclass(frozen=True)
class OpinionSummary:
    mean: float
    variance: float
    min: float
    max: float
    spread: float


@dataclass(frozen=True)
class HistogramDistance:
    l1: float
    emd: float


def _as_finite_vector(opinions: Sequence[float]) -> np.ndarray:
    values = np.asarray(opinions, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(values)):
        raise InputDomainError("opinions must all be finite")
    return values


def histogram(opinions: Sequence[float], lo: float, hi: float, n_bins: int) -> OpinionHistogram:
    """Bin ``opinions`` into ``n_bins`` equal bins; ``x == hi`` lands in the last bin.

    >>> histogram([0.0, 0.5, 1.0], 0.0, 1.0, 2).counts.tolist()
    [1, 2]
    """

    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ConfigurationError(f"histogram range must satisfy lo < hi, got [{lo}, {hi}]")
    if n_bins < 1:
        raise ConfigurationError(f"n_bins must be positive, got {n_bins}")

    values = _as_finite_vector(opinions)
    below = values < lo
    above = values > hi
    inside = values[~below & ~above]

    # Scale before dividing: (0.3 - 0) * 10 / 1 is exactly 3, 0.3 / 0.1 is not.
    idx = np.floor((inside - lo) * n_bins / (hi - lo)).astype(np.int64)
    idx = np.clip(idx, 0, n_bins - 1)

    return OpinionHistogram(
        lo=float(lo),
        hi=float(hi),
        n_bins=int(n_bins),
        counts=np.bincount(idx, minlength=n_bins),
        out_of_range_low=int(below.sum()),
        out_of_range_high=int(above.sum()),
    )


def detect_clusters(opinions: Sequence[float], gap_threshold: float) -> ClusterReport:
    """Split the sorted opinions wherever consecutive values differ by more than ``gap_threshold``."""

    if not gap_threshold > 0:
        raise ConfigurationError(f"gap_threshold must be positive, got {gap_threshold}")

    values = _as_finite_vector(opinions)
    if values.size == 0:
        return ClusterReport(clusters=[], gap_threshold=gap_threshold)

    order = np.argsort(values, kind="stable")
    ordered = values[order]
    breaks = np.flatnonzero(np.diff(ordered) > gap_threshold) + 1

    clusters = []
    for members, vals in zip(np.split(order, breaks), np.split(ordered, breaks)):
        clusters.append(
            Cluster(
                member_indices=tuple(int(k) for k in members),
                centroid=float(np.mean(vals)),
                width=float(vals[-1] - vals[0]),
            )
        )
    return ClusterReport(clusters=clusters, gap_threshold=gap_threshold)


def summary_metrics(opinions: Sequence[float]) -> OpinionSummary:
    values = _as_finite_vector(opinions)
    if values.size == 0:
        raise InputDomainError("summary_metrics needs at least one opinion")
    lo, hi = float(values.min()), float(values.max())
    return OpinionSummary(
        mean=float(np.mean(values)),
        variance=float(np.var(values)),
        min=lo,
        max=hi,
        spread=hi - lo,
    )


def _normalized(hist: OpinionHistogram) -> np.ndarray:
    binned = int(hist.counts.sum())
    if binned == 0:
        raise InputDomainError("histogram has no binned samples to normalize")
    return hist.counts / binned


def histogram_distance(a: OpinionHistogram, b: OpinionHistogram) -> HistogramDistance:
    """L1 distance and 1-D earth mover's distance between two histograms on the same bins."""

    if not a.same_binning(b):
        raise ConfigurationError(
            f"histograms use different bins: [{a.lo}, {a.hi}]/{a.n_bins} vs [{b.lo}, {b.hi}]/{b.n_bins}"
        )
    p, q = _normalized(a), _normalized(b)
    l1 = float(np.sum(np.abs(p - q)))
    emd = float(np.sum(np.abs(np.cumsum(p) - np.cumsum(q))) * a.width)
    return HistogramDistance(l1=l1, emd=emd)


def normalized_entropy(hist: OpinionHistogram) -> float:
    """Shannon entropy of the binned mass divided by ``log(n_bins)``: 1 for flat, 0 for a single spike."""

    if hist.n_bins == 1:
        return 0.0
    p = _normalized(hist)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)) / math.log(hist.n_bins))


# ----------------------------------
# Serialization
# ----------------------------------


def histogram_to_frame(hist: OpinionHistogram) -> pd.DataFrame:
    edges = hist.edges
    edges[-1] = hist.hi
    return pd.DataFrame(
        {
            "bin_index": np.arange(hist.n_bins),
            "bin_lo": edges[:-1],
            "bin_hi": edges[1:],
            "count": hist.counts,
        }
    )


def histogram_to_json(hist: OpinionHistogram) -> dict[str, Any]:
    return {
        "lo": hist.lo,
        "hi": hist.hi,
        "n_bins": hist.n_bins,
        "counts": hist.counts.tolist(),
        "out_of_range_low": hist.out_of_range_low,
        "out_of_range_high": hist.out_of_range_high,
        "total": hist.total,
    }


def counts_from_column(column: pd.Series, path: str | Path) -> np.ndarray:
    values = pd.to_numeric(column, errors="coerce").to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(values)) or np.any(values != np.floor(values)):
        raise FormatError(f"{path}: count column must hold whole numbers")
    if np.any(values < 0):
        raise FormatError(f"{path}: count column has negative entries")
    return values.astype(np.int64)


def read_histogram_csv(path: str | Path) -> OpinionHistogram:
    """Read a histogram written from ``histogram_to_frame`` (overflow counters are not stored)."""

    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise FormatError(f"Could not read histogram {path}: {exc}") from exc
    if list(frame.columns) != HISTOGRAM_COLUMNS or frame.empty:
        raise FormatError(f"{path}: expected header {','.join(HISTOGRAM_COLUMNS)} and at least one bin")
    if frame["bin_index"].tolist() != list(range(len(frame))):
        raise FormatError(f"{path}: bin_index must run 0..{len(frame) - 1}")
    edges = pd.to_numeric(pd.concat([frame["bin_lo"], frame["bin_hi"]]), errors="coerce")
    if edges.isna().any():
        raise FormatError(f"{path}: bin_lo and bin_hi must be numbers")
    return OpinionHistogram(
        lo=float(frame["bin_lo"].iloc[0]),
        hi=float(frame["bin_hi"].iloc[-1]),
        n_bins=len(frame),
        counts=counts_from_column(frame["count"], path),
    )


def clusters_to_frame(report: ClusterReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "cluster": np.arange(len(report.clusters)),
            "size": [c.size for c in report.clusters],
            "centroid": [c.centroid for c in report.clusters],
            "width": [c.width for c in report.clusters],
            "members": [" ".join(map(str, c.member_indices)) for c in report.clusters],
        }
    )


def clusters_to_json(report: ClusterReport) -> dict[str, Any]:
    return {
        "gap_threshold": report.gap_threshold,
        "clusters": [
            {
                "member_indices": list(c.member_indices),
                "centroid": c.centroid,
                "width": c.width,
            }
            for c in report.clusters
        ],
    }
