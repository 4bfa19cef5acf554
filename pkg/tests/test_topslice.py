import logging
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citegeo.ingest import PaperRecord
from citegeo.topslice import select_top_slice

from helpers import build_slice_corpus


def _corpus(counts: list[int]) -> list[PaperRecord]:
    return [PaperRecord(f"p{i}", c, 2020, []) for i, c in enumerate(counts)]


# ---------------------------------------------------------------------------
# frozen fixtures: the three corpus sizes with their expected slice outcomes

def test_slice_40082_corpus():
    # nominal k = ceil(400.82) = 401; the 401st record sits in a 7-way tie
    # block at 69, after 400 records strictly above it.
    corpus = build_slice_corpus(above=400, at=7, below=39_675, threshold=69)
    assert len(corpus) == 40_082
    result = select_top_slice(corpus, 0.01)
    assert result.nominal_k == 401
    assert result.threshold_citations == 69
    assert len(result.selected) == 407
    assert result.corpus_size == 40_082


def test_slice_146081_corpus():
    # nominal k = ceil(1460.81) = 1461; 1,460 above the cut, 41-way tie at 44.
    corpus = build_slice_corpus(above=1_460, at=41, below=144_580, threshold=44)
    assert len(corpus) == 146_081
    result = select_top_slice(corpus, 0.01)
    assert result.nominal_k == 1_461
    assert result.threshold_citations == 44
    assert len(result.selected) == 1_501


def test_slice_76534_corpus():
    # nominal k = ceil(765.34) = 766, so any tie-inclusive slice holds at
    # least 766 records; the documented outcome of 759 at threshold 27 is
    # arithmetically unreachable. The closest construction (700 above, a
    # 66-way tie at 27) gives threshold 27 and 766 selected. The assertion
    # below states the documented pair and is expected to fail; see the
    # README note on this fixture.
    corpus = build_slice_corpus(above=700, at=66, below=75_768, threshold=27)
    assert len(corpus) == 76_534
    result = select_top_slice(corpus, 0.01)
    assert result.threshold_citations == 27
    assert len(result.selected) == 759


def test_nominal_k_uses_exact_decimal_arithmetic():
    # 0.07 * 100 overshoots 7 in binary floating point; the cut must still
    # land at k = 7, not 8.
    corpus = _corpus(list(range(100, 0, -1)))
    result = select_top_slice(corpus, 0.07)
    assert result.nominal_k == 7
    assert result.threshold_citations == 94
    assert len(result.selected) == 7


def test_whole_corpus_at_fraction_one():
    corpus = _corpus([5, 3, 1])
    result = select_top_slice(corpus, 1.0)
    assert len(result.selected) == 3
    assert result.threshold_citations == 1


def test_all_tied_selects_everything():
    corpus = _corpus([7] * 50)
    result = select_top_slice(corpus, 0.02)
    assert len(result.selected) == 50


# ---------------------------------------------------------------------------
# validation and warnings

def test_empty_corpus_rejected():
    with pytest.raises(ValueError, match="empty"):
        select_top_slice([], 0.01)


@pytest.mark.parametrize("fraction", [0.0, -0.1, 1.5])
def test_bad_fraction_rejected(fraction):
    with pytest.raises(ValueError, match="fraction"):
        select_top_slice(_corpus([1, 2, 3]), fraction)


def test_oversized_slice_warns(caplog):
    corpus = _corpus([9] * 30)
    with caplog.at_level(logging.WARNING, logger="citegeo.topslice"):
        result = select_top_slice(corpus, 0.1, max_slice_warn=10)
    assert len(result.selected) == 30
    assert any("cap" in rec.message for rec in caplog.records)


def test_no_warning_under_limit(caplog):
    with caplog.at_level(logging.WARNING, logger="citegeo.topslice"):
        select_top_slice(_corpus([3, 2, 1]), 0.5, max_slice_warn=10)
    assert not caplog.records


# ---------------------------------------------------------------------------
# invariants

counts_lists = st.lists(st.integers(min_value=0, max_value=300), min_size=1, max_size=200)
fractions = st.sampled_from([0.01, 0.05, 0.1, 0.25, 0.5, 1.0])


@given(counts_lists, fractions)
def test_tie_inclusion_invariant(counts, fraction):
    result = select_top_slice(_corpus(counts), fraction)
    selected_ids = {p.paper_id for p in result.selected}
    for paper in _corpus(counts):
        assert (paper.citation_count >= result.threshold_citations) == (
            paper.paper_id in selected_ids
        )


@given(counts_lists, fractions)
def test_selected_at_least_nominal_k(counts, fraction):
    result = select_top_slice(_corpus(counts), fraction)
    assert len(result.selected) >= result.nominal_k


@given(counts_lists, fractions, st.randoms(use_true_random=False))
def test_permutation_invariance(counts, fraction, rng):
    corpus = _corpus(counts)
    shuffled = list(corpus)
    rng.shuffle(shuffled)
    a = select_top_slice(corpus, fraction)
    b = select_top_slice(shuffled, fraction)
    assert a.threshold_citations == b.threshold_citations
    assert {p.paper_id for p in a.selected} == {p.paper_id for p in b.selected}


@given(counts_lists)
def test_growing_fraction_grows_selection(counts):
    corpus = _corpus(counts)
    small = select_top_slice(corpus, 0.05)
    big = select_top_slice(corpus, 0.5)
    small_ids = {p.paper_id for p in small.selected}
    big_ids = {p.paper_id for p in big.selected}
    assert small_ids <= big_ids
    assert small.threshold_citations >= big.threshold_citations


@given(counts_lists, fractions)
def test_selection_ordered_by_citations_then_id(counts, fraction):
    result = select_top_slice(_corpus(counts), fraction)
    keys = [(-p.citation_count, p.paper_id) for p in result.selected]
    assert keys == sorted(keys)
