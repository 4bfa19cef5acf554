"""Corpus builders shared by the module and acceptance tests."""

from __future__ import annotations

from citegeo.ingest import PaperRecord


def build_slice_corpus(above: int, at: int, below: int, threshold: int) -> list[PaperRecord]:
    """A corpus with `above` records strictly over `threshold` (distinct
    counts), `at` records exactly at it, and `below` records under it."""
    records = []
    for i in range(above):
        records.append(PaperRecord(f"hi{i}", threshold + 1 + i, 2020, []))
    for i in range(at):
        records.append(PaperRecord(f"tie{i}", threshold, 2020, []))
    for i in range(below):
        records.append(PaperRecord(f"lo{i}", i % threshold if threshold > 1 else 0, 2020, []))
    return records
