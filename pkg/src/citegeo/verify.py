"""Map verification: recount occurrences per cluster, check positions against
a reference table, and surface same-name collisions.

The count oracle recounts over the already-sliced corpus instead of
re-querying a vendor: for each cluster it counts distinct selected papers
with at least one address matching the cluster's name variants and country.
Mapped counts tally occurrences, so they may exceed the oracle by exactly
the number of duplicate same-city addresses, and must never undershoot it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .agglomerate import CityCluster, chebyshev, fold_name_variants
from .errors import IntegrityError
from .geocode import Gazetteer, GeoPoint
from .ingest import extract_occurrences
from .topslice import SliceResult

DEFAULT_POSITION_TOL = 0.5


@dataclass(frozen=True)
class CountCheck:
    cluster_name: str
    country: str
    mapped_count: int
    oracle_count: int
    allowance: int
    verdict: str  # pass | fail

    @property
    def surplus(self) -> int:
        return self.mapped_count - self.oracle_count


@dataclass(frozen=True)
class PositionCheck:
    cluster_name: str
    country: str
    reference: GeoPoint | None
    distance_deg: float | None
    verdict: str  # pass | fail | unchecked


@dataclass(frozen=True)
class NameCollision:
    name: str
    countries: tuple[str, ...]
    kind: str  # same_country | cross_country


@dataclass
class VerificationReport:
    count_checks: list[CountCheck]
    position_checks: list[PositionCheck]
    name_collisions: list[NameCollision]
    dropped_unresolved: int = 0
    unparseable_addresses: int = 0

    @property
    def failures(self) -> list[str]:
        out = [
            f"count check failed: {c.cluster_name}, {c.country} "
            f"(mapped {c.mapped_count}, oracle {c.oracle_count}, allowance {c.allowance})"
            for c in self.count_checks
            if c.verdict == "fail"
        ]
        out += [
            f"position check failed: {p.cluster_name}, {p.country} "
            f"(off by {p.distance_deg:.3f} deg)"
            for p in self.position_checks
            if p.verdict == "fail"
        ]
        return out

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_text(self) -> str:
        lines = ["verification report", "==================="]
        n_pass = sum(1 for c in self.count_checks if c.verdict == "pass")
        lines.append(f"count checks: {n_pass} pass, {len(self.count_checks) - n_pass} fail")
        for c in self.count_checks:
            lines.append(
                f"  {c.verdict.upper():5s} {c.cluster_name}, {c.country}: "
                f"mapped {c.mapped_count}, oracle {c.oracle_count}, "
                f"surplus {c.surplus} (allowance {c.allowance})"
            )
        n_pass = sum(1 for p in self.position_checks if p.verdict == "pass")
        n_unchecked = sum(1 for p in self.position_checks if p.verdict == "unchecked")
        n_fail = len(self.position_checks) - n_pass - n_unchecked
        lines.append(f"position checks: {n_pass} pass, {n_fail} fail, {n_unchecked} unchecked")
        for p in self.position_checks:
            if p.verdict == "unchecked":
                lines.append(f"  UNCHECKED {p.cluster_name}, {p.country}: no reference entry")
            else:
                lines.append(
                    f"  {p.verdict.upper():5s} {p.cluster_name}, {p.country}: "
                    f"{p.distance_deg:.4f} deg from reference"
                )
        lines.append(f"name collisions: {len(self.name_collisions)}")
        for col in self.name_collisions:
            lines.append(f"  {col.kind}: {col.name} ({', '.join(col.countries)})")
        lines.append(f"dropped unresolved occurrences: {self.dropped_unresolved}")
        lines.append(f"unparseable addresses: {self.unparseable_addresses}")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        rows: list[dict] = []
        for c in self.count_checks:
            rows.append(
                {
                    "kind": "count_check",
                    "cluster": c.cluster_name,
                    "country": c.country,
                    "mapped_count": c.mapped_count,
                    "oracle_count": c.oracle_count,
                    "allowance": c.allowance,
                    "verdict": c.verdict,
                }
            )
        for p in self.position_checks:
            rows.append(
                {
                    "kind": "position_check",
                    "cluster": p.cluster_name,
                    "country": p.country,
                    "reference": list(p.reference) if p.reference else None,
                    "distance_deg": p.distance_deg,
                    "verdict": p.verdict,
                }
            )
        for col in self.name_collisions:
            rows.append(
                {
                    "kind": "name_collision",
                    "name": col.name,
                    "countries": list(col.countries),
                    "collision": col.kind,
                }
            )
        rows.append(
            {
                "kind": "totals",
                "dropped_unresolved": self.dropped_unresolved,
                "unparseable_addresses": self.unparseable_addresses,
                "result": "pass" if self.passed else "fail",
            }
        )
        return "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows)


# ---------------------------------------------------------------------------
# checks

def check_counts(clusters: Sequence[CityCluster], corpus: SliceResult) -> list[CountCheck]:
    """Recount each cluster against the sliced corpus.

    oracle_count: distinct selected papers with at least one parsed address
    whose country equals the cluster's and whose city matches a member name
    or folds with the canonical name. allowance: occurrences minus distinct
    member papers, the room duplicate same-city addresses create.
    """
    corpus_ids = {r.paper_id for r in corpus.selected}
    for cluster in clusters:
        stray = [m.paper_id for m in cluster.members if m.paper_id not in corpus_ids]
        if stray:
            raise IntegrityError(
                f"cluster {cluster.canonical_name!r} references papers outside the corpus: {stray[:3]}"
            )

    occurrences, _ = extract_occurrences(corpus.selected)
    checks: list[CountCheck] = []
    for cluster in clusters:
        member_names = {m.city for m in cluster.members}
        papers = {
            occ.paper_id
            for occ in occurrences
            if occ.country == cluster.country
            and (occ.city in member_names or fold_name_variants(occ.city, cluster.canonical_name))
        }
        oracle = len(papers)
        mapped = cluster.count
        distinct_member_papers = len({m.paper_id for m in cluster.members})
        allowance = mapped - distinct_member_papers
        verdict = "pass" if (mapped >= oracle and mapped - oracle <= allowance) else "fail"
        checks.append(
            CountCheck(
                cluster_name=cluster.canonical_name,
                country=cluster.country,
                mapped_count=mapped,
                oracle_count=oracle,
                allowance=allowance,
                verdict=verdict,
            )
        )
    return checks


def check_positions(
    clusters: Sequence[CityCluster],
    gazetteer: Gazetteer,
    tolerance_deg: float = DEFAULT_POSITION_TOL,
) -> list[PositionCheck]:
    """Compare each cluster anchor with its reference coordinate, when one exists."""
    checks: list[PositionCheck] = []
    for cluster in clusters:
        reference = gazetteer.get(cluster.canonical_name, cluster.country)
        if reference is None:
            checks.append(PositionCheck(cluster.canonical_name, cluster.country, None, None, "unchecked"))
            continue
        distance = chebyshev(cluster.anchor, reference)
        verdict = "pass" if distance <= tolerance_deg else "fail"
        checks.append(PositionCheck(cluster.canonical_name, cluster.country, reference, distance, verdict))
    return checks


def check_name_collisions(clusters: Sequence[CityCluster]) -> list[NameCollision]:
    """Group clusters sharing a folded name; same-country groups rank first."""
    n = len(clusters)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if fold_name_variants(clusters[i].canonical_name, clusters[j].canonical_name):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    groups: dict[int, list[CityCluster]] = {}
    for i, cluster in enumerate(clusters):
        groups.setdefault(find(i), []).append(cluster)

    collisions: list[NameCollision] = []
    for members in groups.values():
        if len(members) < 2:
            continue
        countries = sorted(m.country for m in members)
        same_country = len(set(countries)) < len(countries)
        collisions.append(
            NameCollision(
                name=min(m.canonical_name for m in members),
                countries=tuple(countries),
                kind="same_country" if same_country else "cross_country",
            )
        )
    collisions.sort(key=lambda c: (0 if c.kind == "same_country" else 1, c.name))
    return collisions


def build_report(
    clusters: Sequence[CityCluster],
    corpus: SliceResult,
    gazetteer: Gazetteer | None,
    *,
    tolerance_deg: float = DEFAULT_POSITION_TOL,
    dropped_unresolved: int = 0,
    unparseable_addresses: int = 0,
) -> VerificationReport:
    position_checks = (
        check_positions(clusters, gazetteer, tolerance_deg) if gazetteer is not None else []
    )
    return VerificationReport(
        count_checks=check_counts(clusters, corpus),
        position_checks=position_checks,
        name_collisions=check_name_collisions(clusters),
        dropped_unresolved=dropped_unresolved,
        unparseable_addresses=unparseable_addresses,
    )
