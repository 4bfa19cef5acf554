"""Acceptance criteria, one label per criterion.

Each test carries an ``acceptance("...")`` marker; the terminal summary
prints one PASS/FAIL line per label. Tolerances and time budgets are part
of the criteria and asserted here.
"""

import itertools
import json
import random
import re
import time
from xml.etree import ElementTree as ET

import numpy as np
import pytest

from citegeo.agglomerate import DETAILED, INTERMEDIATE, METROPOLITAN, merge_occurrences
from citegeo.classify import (
    CLASS_ORDER,
    PercentileClass,
    classify_percentile,
    percentile_ranks,
)
from citegeo.config import PipelineConfig
from citegeo.emit import GPS_TEXT_HEADER
from citegeo.geocode import Gazetteer, GeoCache, GeoPoint, attach_coordinates, geocode_batch, write_geo_txt
from citegeo.ingest import CityOccurrence, PaperRecord, extract_occurrences
from citegeo.pipeline import run_pipeline
from citegeo.topslice import select_top_slice
from citegeo.verify import check_counts

from helpers import build_slice_corpus

KML_NS = {"k": "http://www.opengis.net/kml/2.2"}


def _timed_slice(corpus, fraction):
    start = time.perf_counter()
    result = select_top_slice(corpus, fraction)
    elapsed = time.perf_counter() - start
    return result, elapsed


# ---------------------------------------------------------------------------
# criterion 1: tie-inclusive slicing arithmetic

@pytest.mark.acceptance("1 tie-inclusive slicing arithmetic")
def test_slicing_40082_records_select_407_at_69():
    corpus = build_slice_corpus(above=400, at=7, below=39_675, threshold=69)
    result, elapsed = _timed_slice(corpus, 0.01)
    assert len(result.selected) == 407
    assert result.threshold_citations == 69
    assert elapsed < 1.0


@pytest.mark.acceptance("1 tie-inclusive slicing arithmetic")
def test_slicing_146081_records_select_1501_at_44():
    corpus = build_slice_corpus(above=1_460, at=41, below=144_580, threshold=44)
    result, elapsed = _timed_slice(corpus, 0.01)
    assert len(result.selected) == 1_501
    assert result.threshold_citations == 44
    assert elapsed < 1.0


@pytest.mark.acceptance("1 tie-inclusive slicing arithmetic")
def test_slicing_76534_records_select_759_at_27():
    # Stated outcome: 759 records at threshold 27. The nominal cut is
    # ceil(0.01 * 76534) = 766, and a tie-inclusive slice can never hold
    # fewer records than the nominal cut, so 759 is unreachable; the closest
    # faithful construction below selects 766. The assertion keeps the
    # stated pair and fails; see README for the arithmetic.
    corpus = build_slice_corpus(above=700, at=66, below=75_768, threshold=27)
    result, elapsed = _timed_slice(corpus, 0.01)
    assert result.threshold_citations == 27
    assert elapsed < 1.0
    assert len(result.selected) == 759


# ---------------------------------------------------------------------------
# criterion 2: percentile oracle

@pytest.mark.acceptance("2 percentile ranks match O(n^2) oracle")
def test_percentiles_match_brute_force_on_1000_vectors():
    rng = random.Random(1207)
    for _ in range(1_000):
        n = rng.randint(1, 500)
        counts = [rng.randint(1, 1_000) for _ in range(n)]
        arr = np.asarray(counts)
        smaller = (arr[None, :] < arr[:, None]).sum(axis=1)
        expected = [100.0 * int(k) / n for k in smaller]
        assert percentile_ranks(counts) == expected


@pytest.mark.acceptance("2 percentile ranks match O(n^2) oracle")
def test_percentile_worked_case_is_exactly_90():
    counts = list(range(1, 91)) + [150] + [200] * 9
    assert percentile_ranks(counts)[90] == 90.0


# ---------------------------------------------------------------------------
# criterion 3: class partition

@pytest.mark.acceptance("3 percentile class partition")
def test_class_boundaries_and_totality():
    assert classify_percentile(99.0) is PercentileClass.TOP1
    assert classify_percentile(95.0) is PercentileClass.P95_99
    assert classify_percentile(90.0) is PercentileClass.P90_95
    assert classify_percentile(75.0) is PercentileClass.P75_90
    assert classify_percentile(50.0) is PercentileClass.P50_75
    assert classify_percentile(49.999) is PercentileClass.BOTTOM50
    assert classify_percentile(100.0) is PercentileClass.TOP1
    assert classify_percentile(0.0) is PercentileClass.BOTTOM50

    intervals = {
        PercentileClass.TOP1: (99.0, 100.0),
        PercentileClass.P95_99: (95.0, 99.0),
        PercentileClass.P90_95: (90.0, 95.0),
        PercentileClass.P75_90: (75.0, 90.0),
        PercentileClass.P50_75: (50.0, 75.0),
        PercentileClass.BOTTOM50: (0.0, 50.0),
    }
    for rank in np.linspace(0.0, 100.0, 100_001):
        rank = float(rank)
        cls = classify_percentile(rank)
        low, high = intervals[cls]
        assert low <= rank and (rank < high or (cls is PercentileClass.TOP1 and rank <= high))


# ---------------------------------------------------------------------------
# criterion 4: merge properties

FAMILY_NAMES = ["marseille", "kyoto", "lagos", "bogota", "helsinki", "auckland"]


def _random_occurrences(rng: random.Random) -> list[CityOccurrence]:
    occs = []
    pid = itertools.count(1)
    for fam in range(rng.randint(1, len(FAMILY_NAMES))):
        name = FAMILY_NAMES[fam]
        variant = name[:-2] + name[-1]
        country = f"country{fam % 3}"
        lat, lon = 10.0 + 2.0 * fam, 20.0 + 2.0 * fam
        for _ in range(rng.randint(1, 4)):
            occs.append(
                CityOccurrence(
                    f"p{next(pid)}", name, country,
                    GeoPoint(lat + rng.choice([-0.004, 0.0, 0.004]),
                             lon + rng.choice([-0.004, 0.0, 0.004])),
                )
            )
        offset = rng.choice([0.004, 0.03])
        for _ in range(rng.randint(0, 2)):
            occs.append(
                CityOccurrence(
                    f"p{next(pid)}", variant, country, GeoPoint(lat + offset, lon + offset)
                )
            )
    return occs


@pytest.mark.acceptance("4 merge conservation, monotonicity, permutation invariance")
def test_merge_properties_on_500_random_sets():
    rng = random.Random(4205)
    start = time.perf_counter()
    for _ in range(500):
        occs = _random_occurrences(rng)
        sizes = []
        for radius in (DETAILED, INTERMEDIATE, METROPOLITAN):
            clusters = merge_occurrences(occs, radius)
            assert sum(c.count for c in clusters) == len(occs)
            sizes.append(len(clusters))
        assert sizes[0] >= sizes[1] >= sizes[2]

        shuffled = list(occs)
        rng.shuffle(shuffled)
        assert merge_occurrences(shuffled, INTERMEDIATE) == merge_occurrences(occs, INTERMEDIATE)
    assert time.perf_counter() - start < 10.0


# ---------------------------------------------------------------------------
# criterion 5: counting rules

@pytest.mark.acceptance("5 occurrence counting rules")
def test_identical_addresses_collapse_distinct_addresses_count():
    twice_same = PaperRecord("p1", 50, 2020, ["Uni A, Vienna, Austria"] * 2)
    occs, report = extract_occurrences([twice_same])
    assert len(occs) == 1
    assert report.duplicates_collapsed == 1

    two_departments = PaperRecord(
        "p2", 50, 2020,
        ["Inst of Physics, Vienna, Austria", "Inst of Astronomy, Vienna, Austria"],
    )
    occs, report = extract_occurrences([two_departments])
    assert len(occs) == 2
    assert report.duplicates_collapsed == 0


@pytest.mark.acceptance("5 occurrence counting rules")
def test_verifier_surplus_equals_duplicate_same_city_addresses():
    papers = [
        PaperRecord("p1", 50, 2020, ["Uni A, Vienna, Austria"]),
        PaperRecord("p2", 50, 2020, ["Uni B, Vienna, Austria"]),
        PaperRecord(
            "p3", 50, 2020,
            ["Inst of Physics, Vienna, Austria", "Inst of Astronomy, Vienna, Austria"],
        ),
    ]
    from citegeo.topslice import SliceResult

    corpus = SliceResult(0.01, 10, papers, 300, 3)
    occurrences, _ = extract_occurrences(papers)
    located = [o.with_coordinate(GeoPoint(48.2, 16.4)) for o in occurrences]
    clusters = merge_occurrences(located, INTERMEDIATE)
    (check,) = check_counts(clusters, corpus)
    assert check.verdict == "pass"
    assert check.mapped_count >= check.oracle_count
    assert check.surplus == 1  # exactly the duplicate same-city address count


# ---------------------------------------------------------------------------
# criterion 6: geocode contracts

class _SpyGazetteer(Gazetteer):
    def __init__(self, table):
        super().__init__(table)
        self.calls: list[int] = []

    def lookup_batch(self, queries):
        self.calls.append(len(queries))
        return super().lookup_batch(queries)


@pytest.mark.acceptance("6 geocode batching, sentinel drops, warm cache")
def test_geocode_contracts(tmp_path):
    table = {f"city{i}, land": GeoPoint(10.0 + i * 0.01, 20.0) for i in range(1_490)}
    backend = _SpyGazetteer(table)
    queries = [f"city{i}, land" for i in range(1_500)]  # last 10 unresolved

    cache = GeoCache(tmp_path / "cache.tsv")
    entries = geocode_batch(queries, backend, cache=cache, now=lambda: "t0")
    assert backend.calls == [1_000, 500]

    geo_path = tmp_path / "geo.txt"
    write_geo_txt(entries, geo_path)
    first_bytes = geo_path.read_bytes()
    assert first_bytes.count(b"\t0.000000\t0.000000") == 10

    occurrences = [CityOccurrence(f"p{i}", f"city{i}", "land") for i in range(1_500)]
    kept, drops = attach_coordinates(occurrences, entries)
    assert len(kept) == 1_490
    assert drops.count == 10

    warm = GeoCache(tmp_path / "cache.tsv")
    entries2 = geocode_batch(queries, backend, cache=warm, now=lambda: "t1")
    assert backend.calls == [1_000, 500]  # unchanged: zero backend lookups
    write_geo_txt(entries2, geo_path)
    assert geo_path.read_bytes() == first_bytes


# ---------------------------------------------------------------------------
# criterion 7: emitter round-trip

def _run_config(sample_config, sample_corpus, sample_gazetteer, out_dir) -> PipelineConfig:
    config = PipelineConfig.from_file(sample_config)
    config.input = str(sample_corpus)
    config.gazetteer = str(sample_gazetteer)
    config.out_dir = str(out_dir)
    return config


@pytest.mark.acceptance("7 emitter round-trip and determinism")
def test_emitters_round_trip_and_are_deterministic(
    tmp_path, sample_config, sample_corpus, sample_gazetteer
):
    result_a = run_pipeline(
        _run_config(sample_config, sample_corpus, sample_gazetteer, tmp_path / "a")
    )
    run_pipeline(_run_config(sample_config, sample_corpus, sample_gazetteer, tmp_path / "b"))

    # GeoJSON parse recovers every circle property
    parsed = json.loads((tmp_path / "a" / "map.geojson").read_text(encoding="utf-8"))
    assert parsed["type"] == "FeatureCollection"
    circles = result_a.document.circles
    assert len(parsed["features"]) == len(circles)
    for feature, circle in zip(parsed["features"], circles):
        props = feature["properties"]
        assert props["name"] == circle.cluster.canonical_name
        assert props["country"] == circle.cluster.country
        assert props["count"] == circle.cluster.count
        assert props["percentile"] == round(circle.percentile, 6)
        assert props["class"] == circle.cls.value
        assert props["color"] == circle.color_hex
        assert props["display_radius"] == round(circle.display_radius, 6)
        lon, lat = feature["geometry"]["coordinates"]
        assert lat == round(circle.cluster.anchor.latitude, 6)
        assert lon == round(circle.cluster.anchor.longitude, 6)

    # GPS text validates line by line
    gps_lines = (tmp_path / "a" / "ucities.txt").read_text(encoding="utf-8").splitlines()
    assert gps_lines[0] == GPS_TEXT_HEADER
    assert len(gps_lines) == len(circles) + 1
    for line in gps_lines[1:]:
        name, lat, lon, color, n = line.split("\t")
        assert -90.0 <= float(lat) <= 90.0
        assert -180.0 <= float(lon) <= 180.0
        assert float(n) > 0
        assert re.fullmatch(r"#[0-9A-F]{6}", color)

    # KML parses and carries one placemark per circle plus the class styles
    root = ET.fromstring((tmp_path / "a" / "map.kml").read_bytes())
    document = root.find("k:Document", KML_NS)
    placemarks = document.findall("k:Placemark", KML_NS)
    assert len(placemarks) == len(circles)
    style_ids = [s.get("id") for s in document.findall("k:Style", KML_NS)]
    assert style_ids == [f"cls-{cls.value}" for cls in CLASS_ORDER]

    # identical config, byte-identical outputs
    for name in ("ucities.txt", "map.geojson", "map.kml", "map.html"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


# ---------------------------------------------------------------------------
# criterion 8: end-to-end smoke

@pytest.mark.acceptance("8 end-to-end run on bundled corpus")
def test_full_pipeline_under_five_seconds_with_clean_report(
    tmp_path, sample_config, sample_corpus, sample_gazetteer
):
    config = _run_config(sample_config, sample_corpus, sample_gazetteer, tmp_path / "run")
    start = time.perf_counter()
    result = run_pipeline(config)
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    assert result.report is not None
    assert result.report.passed
    assert result.report.failures == []
    assert len(result.document.circles) == 7
    for name in ("ucities.txt", "map.geojson", "map.kml", "map.html", "map.png", "verify.txt"):
        assert (tmp_path / "run" / name).exists(), name
