"""Top-slice selection: the most-cited fraction of a corpus, ties included.

The nominal cut is k = ceil(fraction * corpus_size). The citation count of
the k-th record (sorted descending) becomes the threshold, and every record
at or above it is selected, so a tie block spanning the cut inflates the
slice beyond k.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from .ingest import PaperRecord

logger = logging.getLogger(__name__)

DEFAULT_MAX_SLICE_WARN = 2000


@dataclass
class SliceResult:
    fraction: float
    threshold_citations: int
    selected: list[PaperRecord]
    corpus_size: int
    nominal_k: int


def select_top_slice(
    records: list[PaperRecord],
    fraction: float,
    *,
    max_slice_warn: int = DEFAULT_MAX_SLICE_WARN,
) -> SliceResult:
    """Select the top `fraction` most-cited records with tie inclusion.

    Deterministic regardless of input order: the threshold depends only on
    the multiset of citation counts, and selection is by threshold.
    """
    if not records:
        raise ValueError("empty corpus: nothing to slice")
    if not (0 < fraction <= 1):
        raise ValueError(f"fraction out of range (0, 1]: {fraction}")
    ordered = sorted(records, key=lambda r: (-r.citation_count, r.paper_id))
    # Fraction-of-string sidesteps binary float dust on exact percentages
    # (0.01 * 300 must give k=3, not 4).
    k = math.ceil(Fraction(str(fraction)) * len(ordered))
    threshold = ordered[k - 1].citation_count
    selected = [r for r in ordered if r.citation_count >= threshold]
    if len(selected) > max_slice_warn:
        logger.warning(
            "selected %d records; vendor web exports often cap downloads at %d",
            len(selected),
            max_slice_warn,
        )
    return SliceResult(
        fraction=fraction,
        threshold_citations=threshold,
        selected=selected,
        corpus_size=len(ordered),
        nominal_k=k,
    )
