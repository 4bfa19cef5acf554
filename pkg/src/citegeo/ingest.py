"""Bibliographic export parsing and city-occurrence extraction.

Two input dialects are supported: a comma-separated export with the columns
``Title``, ``Year``, ``Cited by`` and ``Affiliations``, and a tagged
plain-text export using ``TI``/``PY``/``TC``/``C1`` fields with ``ER``
record terminators. Parsed records feed the slicing stage; occurrence
extraction then applies the counting rules: byte-identical addresses on one
paper collapse to a single occurrence, while distinct addresses each count,
even when they name the same city.
"""

from __future__ import annotations

import csv
import io
import logging
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, TYPE_CHECKING

from .errors import FormatError
from .fileio import write_text

if TYPE_CHECKING:
    from .geocode import GeoPoint

logger = logging.getLogger(__name__)

SCOPUS_COLUMNS = ("Title", "Year", "Cited by", "Affiliations")
FORMATS = ("scopus_csv", "wos_tagged")


@dataclass
class PaperRecord:
    """One bibliographic record.

    Attributes:
        paper_id: opaque, unique within a parsed corpus.
        citation_count: non-negative citation tally at export time.
        publication_year: year of publication (0 when the export left it blank).
        affiliations_raw: one raw address string per listed affiliation,
            input order preserved. May be empty; the record is still retained.
    """

    paper_id: str
    citation_count: int
    publication_year: int
    affiliations_raw: list[str] = field(default_factory=list)


@dataclass
class AddressRecord:
    """A single parsed affiliation address."""

    paper_id: str
    raw: str
    institution: str
    city: str
    country: str
    trailing_tokens: list[str] = field(default_factory=list)

    @property
    def parsed(self) -> bool:
        return bool(self.city and self.country)


@dataclass(frozen=True)
class CityOccurrence:
    """One (city, country) address instance on a selected paper."""

    paper_id: str
    city: str
    country: str
    coordinate: "GeoPoint | None" = None

    @property
    def query(self) -> str:
        return f"{self.city}, {self.country}"

    def with_coordinate(self, point: "GeoPoint") -> "CityOccurrence":
        return replace(self, coordinate=point)


@dataclass
class ExtractReport:
    """Counters from occurrence extraction; nothing is dropped silently."""

    raw_addresses: int = 0
    duplicates_collapsed: int = 0
    unparseable: int = 0
    unparseable_samples: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# normalization

def normalize_place(text: str) -> str:
    """Normalize a place name: trim, collapse whitespace, case-fold, strip diacritics.

    Idempotent: applying it twice changes nothing. "Zürich" -> "zurich",
    "München" -> "munchen".
    """
    text = " ".join(text.split())
    text = text.casefold()
    text = unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode("ascii")
    return " ".join(text.split())


def _postcode_like(field_text: str) -> bool:
    # Postal codes in address tails: digits present, alphanumeric once
    # spaces/hyphens are removed, and short. "61801", "MA 02139", "NL-1012 CX".
    compact = field_text.replace(" ", "").replace("-", "")
    if not compact or len(compact) > 10:
        return False
    return compact.isalnum() and any(ch.isdigit() for ch in compact)


def parse_address(paper_id: str, raw: str) -> AddressRecord:
    """Split one raw address into institution/city/country.

    The expected shape is ``institution, ..., city, country``. A postcode-like
    final field means the country is genuinely absent from the record: it is
    moved to trailing_tokens and the country stays empty, which marks the
    address unparseable. Postcode-like fields sitting in the city slot (state
    plus ZIP styles) are skipped over the same way.
    """
    fields = [f.strip() for f in raw.split(",")]
    fields = [f for f in fields if f]
    trailing: list[str] = []
    country = ""
    city = ""
    if len(fields) >= 2:
        if _postcode_like(fields[-1]):
            while fields and _postcode_like(fields[-1]):
                trailing.insert(0, fields.pop())
        else:
            country = fields.pop()
        while fields and _postcode_like(fields[-1]):
            trailing.insert(0, fields.pop())
        if fields:
            city = fields.pop()
    institution = fields[0] if fields else ""
    return AddressRecord(
        paper_id=paper_id,
        raw=raw,
        institution=normalize_place(institution),
        city=normalize_place(city),
        country=normalize_place(country),
        trailing_tokens=trailing,
    )


# ---------------------------------------------------------------------------
# corpus parsing

def parse_corpus(
    source: str | Path | IO,
    format: str,
    *,
    row_errors: list[str] | None = None,
) -> list[PaperRecord]:
    """Parse a bibliographic export into PaperRecords, input order preserved.

    Args:
        source: path or open stream (text or binary, UTF-8 with optional BOM).
        format: one of ``scopus_csv`` or ``wos_tagged``.
        row_errors: optional sink; unreadable rows are described here,
            skipped, and never raise. Malformed headers do raise FormatError.

    Returns:
        One PaperRecord per readable input record.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown corpus format: {format!r} (expected one of {FORMATS})")
    sink = row_errors if row_errors is not None else []
    with _as_text(source) as stream:
        if format == "scopus_csv":
            records = _parse_scopus_csv(stream, sink)
        else:
            records = _parse_wos_tagged(stream, sink)
    for message in sink:
        logger.warning("skipped row: %s", message)
    return records


def _as_text(source: str | Path | IO):
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8-sig", newline="")
    if isinstance(source, io.TextIOBase):
        return _NonClosing(source)
    # binary stream
    return _NonClosing(io.TextIOWrapper(source, encoding="utf-8-sig", newline=""))


class _NonClosing:
    """Context wrapper that leaves caller-owned streams open."""

    def __init__(self, stream):
        self._stream = stream

    def __enter__(self):
        return self._stream

    def __exit__(self, *exc):
        return False


def _parse_scopus_csv(stream, row_errors: list[str]) -> list[PaperRecord]:
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise FormatError("empty file: no header row")
    missing = [c for c in SCOPUS_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise FormatError(f"missing column: {', '.join(missing)}")
    records: list[PaperRecord] = []
    for row in reader:
        line_no = reader.line_num
        try:
            citations = _parse_int(row.get("Cited by"), "Cited by")
            year = _parse_int(row.get("Year"), "Year")
        except ValueError as exc:
            row_errors.append(f"line {line_no}: {exc}")
            continue
        if citations < 0:
            row_errors.append(f"line {line_no}: negative citation count")
            continue
        affil_cell = row.get("Affiliations") or ""
        affiliations = [a.strip() for a in affil_cell.split(";") if a.strip()]
        records.append(
            PaperRecord(
                paper_id=f"s{len(records) + 1}",
                citation_count=citations,
                publication_year=year,
                affiliations_raw=affiliations,
            )
        )
    return records


def _parse_int(cell: str | None, label: str) -> int:
    text = (cell or "").strip()
    if not text:
        return 0
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"non-integer {label}: {text!r}") from None


def _parse_wos_tagged(stream, row_errors: list[str]) -> list[PaperRecord]:
    records: list[PaperRecord] = []
    fields: dict[str, list[str]] = {}
    current_tag = ""
    record_start = 0

    def finalize(end_line: int) -> None:
        nonlocal fields, current_tag
        if not fields:
            return
        try:
            citations = _parse_int(_first(fields, "TC"), "TC")
            year = _parse_int(_first(fields, "PY"), "PY")
            if "TC" not in fields:
                raise ValueError("missing TC field")
            if "PY" not in fields:
                raise ValueError("missing PY field")
            if citations < 0:
                raise ValueError("negative citation count")
        except ValueError as exc:
            row_errors.append(f"line {record_start}: {exc}")
            fields, current_tag = {}, ""
            return
        addresses = [_clean_wos_address(a) for a in fields.get("C1", [])]
        addresses = [a for a in addresses if a]
        records.append(
            PaperRecord(
                paper_id=f"w{len(records) + 1}",
                citation_count=citations,
                publication_year=year,
                affiliations_raw=addresses,
            )
        )
        fields, current_tag = {}, ""

    for line_no, raw_line in enumerate(stream, 1):
        line = raw_line.rstrip("\r\n")
        stripped = line.strip()
        if not stripped:
            continue
        if stripped == "ER":
            finalize(line_no)
            continue
        if stripped == "EF":
            break
        if line.startswith("   ") and current_tag:
            values = fields.setdefault(current_tag, [])
            # A continuation starts a new value when it opens a fresh
            # author-bracketed address or the previous value already ended
            # with its terminating period; otherwise it continues a wrapped
            # value.
            if not values or stripped.startswith("[") or values[-1].endswith("."):
                values.append(stripped)
            else:
                values[-1] = f"{values[-1]} {stripped}"
            continue
        tag, _, value = line.partition(" ")
        if len(tag) == 2 and tag.isupper():
            if not fields:
                record_start = line_no
            current_tag = tag
            fields.setdefault(tag, []).append(value.strip())
        else:
            row_errors.append(f"line {line_no}: unrecognized line {stripped[:40]!r}")
    finalize(record_start)
    return records


def _first(fields: dict[str, list[str]], tag: str) -> str:
    values = fields.get(tag, [])
    return values[0] if values else ""


def _clean_wos_address(value: str) -> str:
    # C1 lines carry an optional "[Author, A.; Author, B.]" prefix and a
    # trailing period; neither is part of the address.
    value = value.strip()
    if value.startswith("[") and "]" in value:
        value = value.split("]", 1)[1]
    return value.strip().rstrip(".").strip()


# ---------------------------------------------------------------------------
# occurrence extraction

def extract_occurrences(records: list[PaperRecord]) -> tuple[list[CityOccurrence], ExtractReport]:
    """Extract city occurrences from parsed records.

    Per paper, byte-identical raw addresses are deduplicated to a single
    occurrence; non-identical addresses each contribute one, even for the
    same city. Unparseable addresses (fewer than two comma fields, or no
    usable country) are excluded and counted in the report.
    """
    occurrences: list[CityOccurrence] = []
    report = ExtractReport()
    for record in records:
        seen: set[str] = set()
        for raw in record.affiliations_raw:
            report.raw_addresses += 1
            if raw in seen:
                report.duplicates_collapsed += 1
                continue
            seen.add(raw)
            address = parse_address(record.paper_id, raw)
            if not address.parsed:
                report.unparseable += 1
                if len(report.unparseable_samples) < 20:
                    report.unparseable_samples.append(raw)
                logger.debug("unparseable address on %s: %r", record.paper_id, raw)
                continue
            occurrences.append(
                CityOccurrence(paper_id=record.paper_id, city=address.city, country=address.country)
            )
    return occurrences, report


# ---------------------------------------------------------------------------
# occurrence list file: one "city, country" line per occurrence, input order

def write_cities_txt(occurrences: list[CityOccurrence], path: str | Path) -> None:
    write_text(path, "".join(f"{occ.query}\n" for occ in occurrences))


def read_cities_txt(path: str | Path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]
