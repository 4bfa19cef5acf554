"""Radius-based agglomeration of coordinated occurrences into city clusters.

Nearby points that carry the same or a near-variant name within one country
merge into a single cluster; the radius knob (degrees, Chebyshev metric)
controls how aggressively. Assignment is greedy and fully deterministic:

  1. occurrences collapse into proto-groups keyed by exact
     (normalized name, country, coordinate);
  2. groups are processed largest first, ties broken by
     (name, country, latitude, longitude);
  3. a group joins the first existing cluster with the same country whose
     anchor lies within the radius and whose founding name matches under
     variant folding, otherwise it founds a new cluster anchored at its own
     coordinate.

Joins are tested against the anchor only, so every member of a cluster is
within the radius of the anchor by construction, and permuting the input
cannot change the result.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .geocode import GeoPoint
from .ingest import CityOccurrence

OPTION_RADII = {1: 0.01, 2: 0.1, 3: 0.3}


@dataclass(frozen=True)
class MergeRadius:
    degrees: float
    option: int | None = None

    def __post_init__(self):
        if self.degrees <= 0:
            raise ValueError(f"merge radius must be positive: {self.degrees}")

    @classmethod
    def from_option(cls, option: int) -> "MergeRadius":
        if option not in OPTION_RADII:
            raise ValueError(f"unknown merge option {option}; expected one of {sorted(OPTION_RADII)}")
        return cls(degrees=OPTION_RADII[option], option=option)


DETAILED = MergeRadius.from_option(1)
INTERMEDIATE = MergeRadius.from_option(2)
METROPOLITAN = MergeRadius.from_option(3)


@dataclass(frozen=True)
class CityCluster:
    """An agglomerated city: count is the occurrence tally X_i."""

    canonical_name: str
    country: str
    anchor: GeoPoint
    count: int
    members: tuple[CityOccurrence, ...]


def chebyshev(a: GeoPoint, b: GeoPoint) -> float:
    return max(abs(a.latitude - b.latitude), abs(a.longitude - b.longitude))


# ---------------------------------------------------------------------------
# name-variant folding

def _one_edit_apart(a: str, b: str) -> bool:
    if a == b:
        return True
    la, lb = len(a), len(b)
    if abs(la - lb) > 1:
        return False
    if la > lb:
        a, b, la, lb = b, a, lb, la
    # a is the shorter (or equal-length) string; walk to the first mismatch,
    # then the tails must match after skipping one edit.
    i = 0
    while i < la and a[i] == b[i]:
        i += 1
    if la == lb:
        return a[i + 1 :] == b[i + 1 :]
    return a[i:] == b[i + 1 :]


_VOWELS = str.maketrans("", "", "aeiou")


def fold_name_variants(a: str, b: str) -> bool:
    """True when two normalized names are close enough to denote one city.

    Matches on equality, a single edit, or equality after removing vowels.
    The vowel rule catches names whose accented letters were dropped rather
    than folded upstream ("zurich" vs "zrich"); unrelated spellings such as
    "munich" vs "munchen" stay distinct.
    """
    if a == b:
        return True
    if _one_edit_apart(a, b):
        return True
    return a.translate(_VOWELS) == b.translate(_VOWELS)


# ---------------------------------------------------------------------------
# merging

class _Cluster:
    __slots__ = ("fold_name", "country", "anchor", "members")

    def __init__(self, fold_name: str, country: str, anchor: GeoPoint):
        self.fold_name = fold_name
        self.country = country
        self.anchor = anchor
        self.members: list[CityOccurrence] = []


def merge_occurrences(
    occurrences: Iterable[CityOccurrence],
    radius: MergeRadius | float,
) -> list[CityCluster]:
    """Merge coordinated occurrences into clusters at the given radius.

    Every occurrence must carry a coordinate; unresolved ones are dropped
    upstream. Returns clusters sorted by count descending (ties by name,
    country, anchor). Occurrence counts are conserved.
    """
    radius_deg = radius.degrees if isinstance(radius, MergeRadius) else float(radius)
    if radius_deg <= 0:
        raise ValueError(f"merge radius must be positive: {radius_deg}")

    groups: dict[tuple[str, str, float, float], list[CityOccurrence]] = {}
    for occ in occurrences:
        if occ.coordinate is None:
            raise ValueError(f"occurrence without coordinate: {occ.query!r}")
        key = (occ.city, occ.country, occ.coordinate.latitude, occ.coordinate.longitude)
        groups.setdefault(key, []).append(occ)

    ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    clusters: list[_Cluster] = []
    for (name, country, lat, lon), members in ordered:
        point = GeoPoint(lat, lon)
        target = None
        for cluster in clusters:
            if (
                cluster.country == country
                and chebyshev(cluster.anchor, point) <= radius_deg
                and fold_name_variants(name, cluster.fold_name)
            ):
                target = cluster
                break
        if target is None:
            target = _Cluster(name, country, point)
            clusters.append(target)
        target.members.extend(members)

    return sorted(
        (_finalize(c) for c in clusters),
        key=lambda c: (-c.count, c.canonical_name, c.country, c.anchor),
    )


def _finalize(cluster: _Cluster) -> CityCluster:
    name_counts = Counter(m.city for m in cluster.members)
    top = max(name_counts.values())
    canonical = min(n for n, c in name_counts.items() if c == top)
    members = tuple(
        sorted(cluster.members, key=lambda m: (m.paper_id, m.city, m.coordinate))
    )
    return CityCluster(
        canonical_name=canonical,
        country=cluster.country,
        anchor=cluster.anchor,
        count=len(members),
        members=members,
    )
