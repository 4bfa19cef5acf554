#!/usr/bin/env python3
"""Regenerate sample_data/ deterministically.

The corpus is 200 records with a citation tie block crossing the top-decile
cut, so the tie-inclusive slice selects 23 papers at threshold 80. The
selected papers exercise the interesting paths: a name-variant pair
(Torino/Turin), the same city name in two countries (Cambridge), one paper
with two distinct addresses in one city, one paper listing the identical
address twice, one address ending in a bare postcode (unparseable), and one
city missing from the gazetteer (unresolved, dropped).
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "sample_data"
SEED = 20260817

# (citations, affiliations) for the 23 papers above the cut. 18 papers at
# 100..83, then a five-way tie at 80 straddling the nominal k=20 cut.
SELECTED = [
    (100, "Politecnico di Torino, Torino, Italy"),
    (99, "Università degli Studi di Torino, Torino, Italy"),
    (98, "INFN Sezione di Torino, Torino, Italy"),
    (97, "University of Turin, Turin, Italy"),
    (96, "Turin Polytechnic Institute, Turin, Italy"),
    (95, "University of Cambridge, Cambridge, United Kingdom"),
    (94, "MRC Laboratory of Molecular Biology, Cambridge, United Kingdom"),
    (93, "Cavendish Laboratory, Cambridge, United Kingdom"),
    (92, "MIT, Cambridge, MA 02139, United States"),
    (91, "Harvard University, Cambridge, United States"),
    (90, "Universität Wien, Vienna, Austria"),
    (89, "Medical University of Vienna, Vienna, Austria"),
    (88, "TU Wien, Vienna, Austria"),
    (
        87,
        "Institute of Physics, University of Vienna, Vienna, Austria; "
        "Institute of Astronomy, University of Vienna, Vienna, Austria",
    ),
    (86, "Boston University, Boston, United States"),
    (85, "Massachusetts General Hospital, Boston, United States"),
    (84, "National University of Singapore, Singapore, Singapore"),
    (83, "Nanyang Technological University, Singapore, Singapore"),
    (80, "Institute of Marine Myth, Atlantis, Greece"),
    (80, "Ecole Polytechnique Federale de Lausanne, Lausanne, 1015"),
    (
        80,
        "University of Vienna, Vienna, Austria; "
        "University of Vienna, Vienna, Austria",
    ),
    (80, "CERN, Geneva, Switzerland"),
    (80, "University of Geneva, Geneva, Switzerland"),
]

# name, country, lat, lon; Torino/Turin sit 0.03 degrees apart so they stay
# separate at the 0.01-degree merge radius and join at 0.1.
GAZETTEER_CORE = [
    ("Torino", "Italy", 45.0703, 7.6869),
    ("Turin", "Italy", 45.1000, 7.7000),
    ("Cambridge", "United Kingdom", 52.2053, 0.1218),
    ("Cambridge", "United States", 42.3736, -71.1097),
    ("Vienna", "Austria", 48.2082, 16.3738),
    ("Boston", "United States", 42.3601, -71.0589),
    ("Singapore", "Singapore", 1.3521, 103.8198),
    ("Geneva", "Switzerland", 46.2044, 6.1432),
]

GAZETTEER_EXTRA = [
    ("London", "United Kingdom", 51.5074, -0.1278),
    ("Paris", "France", 48.8566, 2.3522),
    ("Berlin", "Germany", 52.5200, 13.4050),
    ("Madrid", "Spain", 40.4168, -3.7038),
    ("Rome", "Italy", 41.9028, 12.4964),
    ("Amsterdam", "Netherlands", 52.3676, 4.9041),
    ("Brussels", "Belgium", 50.8503, 4.3517),
    ("Copenhagen", "Denmark", 55.6761, 12.5683),
    ("Stockholm", "Sweden", 59.3293, 18.0686),
    ("Oslo", "Norway", 59.9139, 10.7522),
    ("Helsinki", "Finland", 60.1699, 24.9384),
    ("Warsaw", "Poland", 52.2297, 21.0122),
    ("Prague", "Czechia", 50.0755, 14.4378),
    ("Budapest", "Hungary", 47.4979, 19.0402),
    ("Lisbon", "Portugal", 38.7223, -9.1393),
    ("Dublin", "Ireland", 53.3498, -6.2603),
    ("Athens", "Greece", 37.9838, 23.7275),
    ("Zurich", "Switzerland", 47.3769, 8.5417),
    ("Munich", "Germany", 48.1351, 11.5820),
    ("Milan", "Italy", 45.4642, 9.1900),
    ("Barcelona", "Spain", 41.3874, 2.1686),
    ("Moscow", "Russia", 55.7558, 37.6173),
    ("Istanbul", "Turkey", 41.0082, 28.9784),
    ("Cairo", "Egypt", 30.0444, 31.2357),
    ("Nairobi", "Kenya", -1.2921, 36.8219),
    ("Cape Town", "South Africa", -33.9249, 18.4241),
    ("Tel Aviv", "Israel", 32.0853, 34.7818),
    ("Mumbai", "India", 19.0760, 72.8777),
    ("Delhi", "India", 28.7041, 77.1025),
    ("Beijing", "China", 39.9042, 116.4074),
    ("Shanghai", "China", 31.2304, 121.4737),
    ("Tokyo", "Japan", 35.6762, 139.6503),
    ("Seoul", "South Korea", 37.5665, 126.9780),
    ("Sydney", "Australia", -33.8688, 151.2093),
    ("Melbourne", "Australia", -37.8136, 144.9631),
    ("Auckland", "New Zealand", -36.8509, 174.7645),
    ("Toronto", "Canada", 43.6532, -79.3832),
    ("Vancouver", "Canada", 49.2827, -123.1207),
    ("New York", "United States", 40.7128, -74.0060),
    ("Chicago", "United States", 41.8781, -87.6298),
    ("Sao Paulo", "Brazil", -23.5505, -46.6333),
    ("Buenos Aires", "Argentina", -34.6037, -58.3816),
]

TITLE_HEADS = [
    "Structural analysis of", "Longitudinal trends in", "A framework for",
    "Empirical evidence on", "Robust estimation of", "Network effects in",
    "Spatial patterns of", "Predictive modeling for", "Dynamics of",
    "Comparative study of",
]
TITLE_TAILS = [
    "urban mobility systems", "protein folding pathways", "citation networks",
    "climate feedback loops", "semiconductor defects", "microbial communities",
    "financial contagion", "language acquisition", "galaxy formation",
    "soil carbon storage", "neural plasticity", "supply chain resilience",
]


def make_title(rng: random.Random) -> str:
    return f"{rng.choice(TITLE_HEADS)} {rng.choice(TITLE_TAILS)}"


def make_filler_affiliation(rng: random.Random) -> str:
    name, country, _, _ = rng.choice(GAZETTEER_EXTRA)
    dept = rng.choice(["Dept of Physics", "School of Medicine", "Inst of Chemistry",
                       "Faculty of Engineering", "Centre for Data Science"])
    return f"{dept}, University of {name.split()[0]}, {name}, {country}"


def main() -> None:
    rng = random.Random(SEED)
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    rows = []
    for citations, affiliations in SELECTED:
        rows.append((make_title(rng), rng.randint(1998, 2023), citations, affiliations))
    for _ in range(200 - len(SELECTED)):
        citations = rng.randint(0, 79)
        n_affil = rng.choice([0, 1, 1, 1, 2])
        affiliations = "; ".join(make_filler_affiliation(rng) for _ in range(n_affil))
        rows.append((make_title(rng), rng.randint(1998, 2023), citations, affiliations))
    rng.shuffle(rows)

    with open(OUT_DIR / "corpus.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Title", "Year", "Cited by", "Affiliations"])
        writer.writerows(rows)

    entries = GAZETTEER_CORE + GAZETTEER_EXTRA
    assert len(entries) == 50, len(entries)
    with open(OUT_DIR / "gazetteer.tsv", "w", encoding="utf-8") as fh:
        fh.write("# name\tcountry\tlatitude\tlongitude\n")
        for name, country, lat, lon in entries:
            fh.write(f"{name}\t{country}\t{lat:.4f}\t{lon:.4f}\n")

    (OUT_DIR / "run.cfg").write_text(
        "# sample run: offline gazetteer, top decile\n"
        "input=sample_data/corpus.csv\n"
        "format=scopus_csv\n"
        "top_fraction=0.1\n"
        "geocoder=gazetteer\n"
        "gazetteer=sample_data/gazetteer.tsv\n"
        "merge=2\n"
        "radius_base=4.0\n"
        "log_base=10\n"
        "formats=gps,geojson,kml,html,png\n"
        "out_dir=out\n"
        "title=sample corpus city map\n",
        encoding="utf-8",
    )
    print(f"wrote {OUT_DIR}/corpus.csv ({len(rows)} records), gazetteer.tsv (50 places), run.cfg")


if __name__ == "__main__":
    main()
