"""Coordinate resolution for "city, country" queries.

Backends are pluggable: an offline gazetteer (TSV reference table) or a
remote HTTP adapter. Lookups are chunked into batches of at most 1000
queries, consult a persistent append-only cache first, and treat the exact
pair (0, 0) as the unresolved sentinel. Output order always equals input
order; downstream matching relies on it.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Callable, NamedTuple, Protocol

from .errors import AlignmentError, FormatError, SourceError, TransportError
from .fileio import write_text
from .ingest import CityOccurrence, normalize_place

logger = logging.getLogger(__name__)

BATCH_LIMIT = 1000
KEY_ENV_VAR = "CITEGEO_GEOCODER_KEY"


class GeoPoint(NamedTuple):
    latitude: float
    longitude: float


UNRESOLVED_SENTINEL = GeoPoint(0.0, 0.0)


def _validate_point(lat: float, lon: float, context: str) -> GeoPoint | None:
    """Bounds-check a backend coordinate; the (0,0) sentinel maps to None."""
    if lat == 0.0 and lon == 0.0:
        return None
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise SourceError(f"{context}: coordinate out of bounds ({lat}, {lon})")
    return GeoPoint(float(lat), float(lon))


@dataclass(frozen=True)
class GeocodeEntry:
    query: str
    point: GeoPoint | None
    source: str
    resolved_at: str = ""

    @property
    def resolved(self) -> bool:
        return self.point is not None


class Backend(Protocol):
    source_name: str

    def lookup_batch(self, queries: list[str]) -> list[GeoPoint | None]: ...


# ---------------------------------------------------------------------------
# offline gazetteer backend

class Gazetteer:
    """Reference table backend: TSV rows `name<TAB>country<TAB>lat<TAB>lon`.

    Matching is exact on the normalized "name, country" query string, so the
    same normalization used at extraction applies here. Names absent from
    the table resolve to nothing (unresolved).
    """

    source_name = "gazetteer"

    def __init__(self, table: dict[str, GeoPoint]):
        self._table = dict(table)

    @classmethod
    def load(cls, path: str | Path) -> "Gazetteer":
        table: dict[str, GeoPoint] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 4:
                    raise FormatError(f"gazetteer line {line_no}: expected 4 tab-separated fields")
                name, country, lat_text, lon_text = parts
                try:
                    lat, lon = float(lat_text), float(lon_text)
                except ValueError:
                    raise FormatError(f"gazetteer line {line_no}: non-numeric coordinate") from None
                point = _validate_point(lat, lon, f"gazetteer line {line_no}")
                if point is None:
                    raise FormatError(f"gazetteer line {line_no}: (0, 0) is reserved")
                key = f"{normalize_place(name)}, {normalize_place(country)}"
                table[key] = point
        return cls(table)

    def __len__(self) -> int:
        return len(self._table)

    def lookup_batch(self, queries: list[str]) -> list[GeoPoint | None]:
        return [self._table.get(q) for q in queries]

    def get(self, name: str, country: str) -> GeoPoint | None:
        return self._table.get(f"{normalize_place(name)}, {normalize_place(country)}")


# ---------------------------------------------------------------------------
# remote backend adapter

class RemoteBackend:
    """HTTP adapter, vendor-neutral.

    Wire contract: POST a JSON body ``{"queries": [...]}`` to the endpoint;
    the response is ``{"results": [[lat, lon] | null, ...]}`` aligned with
    the request. The API key comes from the constructor or the
    CITEGEO_GEOCODER_KEY environment variable and is sent as a bearer token.
    Transport failures are retried with backoff up to `retries` times, then
    raise TransportError. A `min_interval_s` gate rate-limits calls.
    """

    source_name = "remote"

    def __init__(
        self,
        endpoint: str,
        *,
        api_key: str | None = None,
        timeout_s: float = 10.0,
        retries: int = 2,
        backoff_s: float = 0.25,
        min_interval_s: float = 0.0,
        transport: Callable[[str, bytes, dict], bytes] | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None else os.environ.get(KEY_ENV_VAR, "")
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s
        self.min_interval_s = min_interval_s
        self._transport = transport or self._http_post
        self._sleep = sleep
        self._last_call = 0.0

    def _http_post(self, url: str, body: bytes, headers: dict) -> bytes:
        request = urllib.request.Request(url, data=body, headers=headers, method="POST")
        with urllib.request.urlopen(request, timeout=self.timeout_s) as response:
            return response.read()

    def lookup_batch(self, queries: list[str]) -> list[GeoPoint | None]:
        if self.min_interval_s > 0:
            elapsed = time.monotonic() - self._last_call
            if elapsed < self.min_interval_s:
                self._sleep(self.min_interval_s - elapsed)
        body = json.dumps({"queries": queries}).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                raw = self._transport(self.endpoint, body, headers)
                break
            except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
                last_error = exc
                if attempt < self.retries:
                    self._sleep(self.backoff_s * (attempt + 1))
        else:
            raise TransportError(f"backend unreachable after {self.retries + 1} attempts: {last_error}")
        self._last_call = time.monotonic()
        return self._parse_response(raw, len(queries))

    def _parse_response(self, raw: bytes, expected: int) -> list[GeoPoint | None]:
        try:
            payload = json.loads(raw.decode("utf-8"))
            results = payload["results"]
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise SourceError(f"malformed backend response: {exc}") from None
        if not isinstance(results, list) or len(results) != expected:
            raise SourceError(f"backend returned {len(results) if isinstance(results, list) else 'non-list'} results for {expected} queries")
        points: list[GeoPoint | None] = []
        for item in results:
            if item is None:
                points.append(None)
            elif isinstance(item, (list, tuple)) and len(item) == 2:
                points.append(_validate_point(float(item[0]), float(item[1]), "backend response"))
            else:
                raise SourceError(f"malformed result item: {item!r}")
        return points


# ---------------------------------------------------------------------------
# persistent cache

class GeoCache:
    """Append-only TSV journal keyed by (query, source); last entry wins.

    Rows: `query<TAB>source<TAB>lat<TAB>lon<TAB>resolved_at`. Unresolved
    lookups are journaled with the 0,0 sentinel so a warm rerun skips the
    backend for them too. Writes are serialized under a lock.
    """

    def __init__(self, path: str | Path | None):
        self._path = Path(path) if path else None
        self._entries: dict[tuple[str, str], GeocodeEntry] = {}
        self._lock = threading.Lock()
        if self._path is not None and self._path.exists():
            self._load()

    def _load(self) -> None:
        with open(self._path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 5:
                    logger.warning("cache %s line %d: malformed row ignored", self._path, line_no)
                    continue
                query, source, lat_text, lon_text, stamp = parts
                try:
                    lat, lon = float(lat_text), float(lon_text)
                except ValueError:
                    logger.warning("cache %s line %d: bad coordinate ignored", self._path, line_no)
                    continue
                point = None if (lat == 0.0 and lon == 0.0) else GeoPoint(lat, lon)
                self._entries[(query, source)] = GeocodeEntry(query, point, source, stamp)

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, query: str, source: str) -> GeocodeEntry | None:
        return self._entries.get((query, source))

    def put_many(self, entries: list[GeocodeEntry]) -> None:
        if not entries:
            return
        with self._lock:
            lines = []
            for entry in entries:
                self._entries[(entry.query, entry.source)] = entry
                point = entry.point or UNRESOLVED_SENTINEL
                lines.append(
                    f"{entry.query}\t{entry.source}\t{point.latitude:.6f}\t{point.longitude:.6f}\t{entry.resolved_at}\n"
                )
            if self._path is not None:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.writelines(lines)


# ---------------------------------------------------------------------------
# batch resolution

def geocode_batch(
    queries: list[str],
    backend: Backend,
    *,
    cache: GeoCache | None = None,
    batch_limit: int = BATCH_LIMIT,
    max_in_flight: int = 1,
    now: Callable[[], str] | None = None,
) -> list[GeocodeEntry]:
    """Resolve queries in order: cache first, then the backend in chunks.

    Returns one GeocodeEntry per input query, aligned with the input.
    Repeated queries are resolved once. Chunks may be fetched concurrently
    up to `max_in_flight`; assembly restores input order, so concurrency
    never changes the output.
    """
    source = backend.source_name
    stamp = now or (lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    resolved: dict[str, GeocodeEntry] = {}
    pending: list[str] = []
    for query in queries:
        if query in resolved or query in pending:
            continue
        hit = cache.get(query, source) if cache is not None else None
        if hit is not None:
            resolved[query] = hit
        else:
            pending.append(query)

    chunks = [pending[i : i + batch_limit] for i in range(0, len(pending), batch_limit)]

    def fetch(index_chunk: tuple[int, list[str]]) -> tuple[int, list[GeoPoint | None]]:
        index, chunk = index_chunk
        points = backend.lookup_batch(chunk)
        if not isinstance(points, list) or len(points) != len(chunk):
            raise SourceError(f"batch {index}: backend returned {len(points)} results for {len(chunk)} queries")
        return index, points

    if chunks:
        if max_in_flight > 1:
            with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
                results = list(pool.map(fetch, enumerate(chunks)))
        else:
            results = [fetch(pair) for pair in enumerate(chunks)]
        for index, points in sorted(results):
            fresh = []
            for query, point in zip(chunks[index], points):
                if point is not None and point == UNRESOLVED_SENTINEL:
                    point = None
                entry = GeocodeEntry(query, point, source, stamp())
                resolved[query] = entry
                fresh.append(entry)
            if cache is not None:
                cache.put_many(fresh)

    return [resolved[query] for query in queries]


# ---------------------------------------------------------------------------
# cross-source reconciliation

@dataclass(frozen=True)
class SourceComparison:
    query: str
    status: str  # agree | disagree | one_sided | both_unresolved
    adopted: GeoPoint | None


def reconcile_sources(
    a: list[GeocodeEntry],
    b: list[GeocodeEntry],
    tolerance_deg: float = 0.5,
) -> list[SourceComparison]:
    """Compare two aligned resolution lists query by query.

    agree: both resolved within tolerance (Chebyshev degrees, first source
    adopted). disagree: both resolved but farther apart. one_sided: exactly
    one resolved, which is adopted. both_unresolved otherwise.
    """
    if len(a) != len(b):
        raise AlignmentError(f"source lists differ in length: {len(a)} vs {len(b)}")
    out: list[SourceComparison] = []
    for ea, eb in zip(a, b):
        if ea.query != eb.query:
            raise AlignmentError(f"query mismatch: {ea.query!r} vs {eb.query!r}")
        if ea.resolved and eb.resolved:
            delta = max(
                abs(ea.point.latitude - eb.point.latitude),
                abs(ea.point.longitude - eb.point.longitude),
            )
            if delta <= tolerance_deg:
                out.append(SourceComparison(ea.query, "agree", ea.point))
            else:
                out.append(SourceComparison(ea.query, "disagree", None))
        elif ea.resolved or eb.resolved:
            adopted = ea.point if ea.resolved else eb.point
            out.append(SourceComparison(ea.query, "one_sided", adopted))
        else:
            out.append(SourceComparison(ea.query, "both_unresolved", None))
    return out


# ---------------------------------------------------------------------------
# coordinate attachment

@dataclass
class DropReport:
    dropped_queries: list[str]

    @property
    def count(self) -> int:
        return len(self.dropped_queries)


def attach_coordinates(
    occurrences: list[CityOccurrence],
    entries: list[GeocodeEntry],
) -> tuple[list[CityOccurrence], DropReport]:
    """Attach resolved points to occurrences; drop and tally unresolved ones.

    Entries must align with occurrences in order; order is the join key.
    """
    if len(occurrences) != len(entries):
        raise AlignmentError(f"{len(occurrences)} occurrences vs {len(entries)} geocode entries")
    kept: list[CityOccurrence] = []
    dropped: list[str] = []
    for occ, entry in zip(occurrences, entries):
        if entry.point is None:
            dropped.append(entry.query)
            continue
        lat, lon = entry.point
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0) or (lat == 0.0 and lon == 0.0):
            raise SourceError(f"invalid coordinate for {entry.query!r}: ({lat}, {lon})")
        kept.append(occ.with_coordinate(entry.point))
    return kept, DropReport(dropped)


# ---------------------------------------------------------------------------
# aligned coordinate file: `city, country<TAB>lat<TAB>lon`, one row per query

def write_geo_txt(entries: list[GeocodeEntry], path: str | Path) -> None:
    """Write coordinates in query order; unresolved rows keep the 0,0 sentinel
    so the file stays line-aligned with the occurrence list."""
    lines = []
    for entry in entries:
        point = entry.point or UNRESOLVED_SENTINEL
        lines.append(f"{entry.query}\t{point.latitude:.6f}\t{point.longitude:.6f}\n")
    write_text(path, "".join(lines))


def read_geo_txt(path: str | Path) -> list[GeocodeEntry]:
    entries: list[GeocodeEntry] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"geo file line {line_no}: expected 3 tab-separated fields")
            query, lat_text, lon_text = parts
            try:
                lat, lon = float(lat_text), float(lon_text)
            except ValueError:
                raise FormatError(f"geo file line {line_no}: non-numeric coordinate") from None
            point = None if (lat == 0.0 and lon == 0.0) else GeoPoint(lat, lon)
            entries.append(GeocodeEntry(query, point, "geo.txt"))
    return entries
