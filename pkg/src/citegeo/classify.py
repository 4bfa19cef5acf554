"""Percentile ranks, color classes, and display radii for city clusters."""

from __future__ import annotations

import enum
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

from .agglomerate import CityCluster


class PercentileClass(enum.Enum):
    TOP1 = "top1"
    P95_99 = "p95_99"
    P90_95 = "p90_95"
    P75_90 = "p75_90"
    P50_75 = "p50_75"
    BOTTOM50 = "bottom50"

    @property
    def color_name(self) -> str:
        return _COLOR_NAMES[self]

    @property
    def color_hex(self) -> str:
        return _COLOR_HEX[self]

    @property
    def bounds_label(self) -> str:
        return _BOUNDS_LABELS[self]


# Rank order, best band first. Emitters keep legends in this order.
CLASS_ORDER = [
    PercentileClass.TOP1,
    PercentileClass.P95_99,
    PercentileClass.P90_95,
    PercentileClass.P75_90,
    PercentileClass.P50_75,
    PercentileClass.BOTTOM50,
]

_COLOR_NAMES = {
    PercentileClass.TOP1: "red",
    PercentileClass.P95_99: "fuchsia",
    PercentileClass.P90_95: "pink",
    PercentileClass.P75_90: "orange",
    PercentileClass.P50_75: "cyan",
    PercentileClass.BOTTOM50: "blue",
}

_COLOR_HEX = {
    PercentileClass.TOP1: "#FF0000",
    PercentileClass.P95_99: "#FF00FF",
    PercentileClass.P90_95: "#FFC0CB",
    PercentileClass.P75_90: "#FFA500",
    PercentileClass.P50_75: "#00FFFF",
    PercentileClass.BOTTOM50: "#0000FF",
}

_BOUNDS_LABELS = {
    PercentileClass.TOP1: "99th percentile and above",
    PercentileClass.P95_99: "95th to 99th percentile",
    PercentileClass.P90_95: "90th to 95th percentile",
    PercentileClass.P75_90: "75th to 90th percentile",
    PercentileClass.P50_75: "50th to 75th percentile",
    PercentileClass.BOTTOM50: "below the 50th percentile",
}


def percentile_ranks(counts: Sequence[int]) -> list[float]:
    """P_i = 100 * |{j : X_j < X_i}| / n, aligned with the input order.

    Ties share a percentile. A single city ranks at 0 (nothing below it).
    """
    if not counts:
        raise ValueError("empty count list")
    for c in counts:
        if c <= 0:
            raise ValueError(f"non-positive count: {c}")
    n = len(counts)
    ordered = sorted(counts)
    return [100.0 * bisect_left(ordered, c) / n for c in counts]


def classify_percentile(p: float) -> PercentileClass:
    """Map a percentile to its class; the bands partition [0, 100]."""
    if not (0.0 <= p <= 100.0):
        raise ValueError(f"percentile out of range [0, 100]: {p}")
    if p >= 99.0:
        return PercentileClass.TOP1
    if p >= 95.0:
        return PercentileClass.P95_99
    if p >= 90.0:
        return PercentileClass.P90_95
    if p >= 75.0:
        return PercentileClass.P75_90
    if p >= 50.0:
        return PercentileClass.P50_75
    return PercentileClass.BOTTOM50


def display_radius(count: int, base: float, *, log_base: float = 10.0) -> float:
    """radius = base * (1 + log(count)), so a count of 1 still renders."""
    if count < 1:
        raise ValueError(f"count must be at least 1: {count}")
    if base <= 0:
        raise ValueError(f"base must be positive: {base}")
    if log_base <= 1:
        raise ValueError(f"log base must exceed 1: {log_base}")
    # math.log(n, 10) accumulates float error (log(1000, 10) != 3.0);
    # the dedicated functions stay exact at powers of the base.
    if log_base == 10.0:
        scaled = math.log10(count)
    elif log_base == math.e:
        scaled = math.log(count)
    else:
        scaled = math.log(count, log_base)
    return base * (1.0 + scaled)


@dataclass(frozen=True)
class ClassifiedCircle:
    cluster: CityCluster
    percentile: float
    cls: PercentileClass
    display_radius: float

    @property
    def color_hex(self) -> str:
        return self.cls.color_hex


def build_circles(
    clusters: Sequence[CityCluster],
    *,
    radius_base: float = 4.0,
    log_base: float = 10.0,
) -> list[ClassifiedCircle]:
    """Classify every cluster against the count distribution of all clusters."""
    if not clusters:
        return []
    ranks = percentile_ranks([c.count for c in clusters])
    return [
        ClassifiedCircle(
            cluster=cluster,
            percentile=rank,
            cls=classify_percentile(rank),
            display_radius=display_radius(cluster.count, radius_base, log_base=log_base),
        )
        for cluster, rank in zip(clusters, ranks)
    ]
