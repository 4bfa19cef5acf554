"""Serializers for classified circles: GPS text, GeoJSON, KML, and HTML.

All emitters are deterministic: the same document yields byte-identical
output. Timestamps appear only when the caller supplies one. Coordinates
are printed with 6 decimal places so goldens diff cleanly.
"""

from __future__ import annotations

import html
import json
import math
from dataclasses import dataclass, field
from typing import Any
from xml.etree import ElementTree as ET

from .classify import CLASS_ORDER, ClassifiedCircle

GPS_TEXT_HEADER = "name\tlatitude\tlongitude\tcolor\tn"


@dataclass
class MapDocument:
    """Emission-ready bundle: circles plus run provenance.

    Circles are kept sorted by count descending (ties by name, then country)
    for stable output diffs.
    """

    circles: list[ClassifiedCircle]
    title: str = "city map"
    generated_at: str | None = None
    parameters: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.circles = sorted(
            self.circles,
            key=lambda c: (-c.cluster.count, c.cluster.canonical_name, c.cluster.country),
        )


def _fmt6(value: float) -> str:
    return f"{value:.6f}"


def _fmtg(value: float) -> str:
    return f"{value:.6g}"


def _display_name(circle: ClassifiedCircle) -> str:
    return f"{circle.cluster.canonical_name}, {circle.cluster.country}"


def _circle_properties(circle: ClassifiedCircle) -> dict[str, Any]:
    return {
        "name": circle.cluster.canonical_name,
        "country": circle.cluster.country,
        "count": circle.cluster.count,
        "percentile": round(circle.percentile, 6),
        "class": circle.cls.value,
        "color": circle.color_hex,
        "display_radius": round(circle.display_radius, 6),
    }


# ---------------------------------------------------------------------------
# GPS-upload text (tab separated, the resize column drives marker size)

def emit_gps_text(doc: MapDocument) -> bytes:
    lines = [GPS_TEXT_HEADER]
    for circle in doc.circles:
        anchor = circle.cluster.anchor
        lines.append(
            "\t".join(
                (
                    _display_name(circle),
                    _fmt6(anchor.latitude),
                    _fmt6(anchor.longitude),
                    circle.color_hex,
                    _fmtg(circle.display_radius),
                )
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# GeoJSON

def emit_geojson(doc: MapDocument) -> bytes:
    features = []
    for circle in doc.circles:
        anchor = circle.cluster.anchor
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [round(anchor.longitude, 6), round(anchor.latitude, 6)],
                },
                "properties": _circle_properties(circle),
            }
        )
    collection: dict[str, Any] = {
        "type": "FeatureCollection",
        "title": doc.title,
        "parameters": doc.parameters,
        "features": features,
    }
    if doc.generated_at:
        collection["generated_at"] = doc.generated_at
    return (json.dumps(collection, indent=2) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# KML

def _kml_color(hex_color: str) -> str:
    # KML wants aabbggrr; the input is #RRGGBB.
    r, g, b = hex_color[1:3], hex_color[3:5], hex_color[5:7]
    return f"ff{b}{g}{r}".lower()


def emit_kml(doc: MapDocument) -> bytes:
    root = ET.Element("kml", xmlns="http://www.opengis.net/kml/2.2")
    document = ET.SubElement(root, "Document")
    ET.SubElement(document, "name").text = doc.title
    description = [f"{k}={v}" for k, v in doc.parameters.items()]
    if doc.generated_at:
        description.append(f"generated_at={doc.generated_at}")
    if description:
        ET.SubElement(document, "description").text = "; ".join(description)

    base = float(doc.parameters.get("radius_base", 4.0) or 4.0)
    for cls in CLASS_ORDER:
        style = ET.SubElement(document, "Style", id=f"cls-{cls.value}")
        icon_style = ET.SubElement(style, "IconStyle")
        ET.SubElement(icon_style, "color").text = _kml_color(cls.color_hex)

    for circle in doc.circles:
        placemark = ET.SubElement(document, "Placemark")
        ET.SubElement(placemark, "name").text = _display_name(circle)
        ET.SubElement(placemark, "styleUrl").text = f"#cls-{circle.cls.value}"
        ET.SubElement(placemark, "description").text = (
            f"count={circle.cluster.count}; percentile={_fmtg(circle.percentile)}; "
            f"class={circle.cls.value}"
        )
        # per-placemark scale keeps icon size proportional to the display radius
        style = ET.SubElement(placemark, "Style")
        icon_style = ET.SubElement(style, "IconStyle")
        ET.SubElement(icon_style, "color").text = _kml_color(circle.color_hex)
        ET.SubElement(icon_style, "scale").text = _fmtg(circle.display_radius / base)
        point = ET.SubElement(placemark, "Point")
        anchor = circle.cluster.anchor
        ET.SubElement(point, "coordinates").text = f"{_fmt6(anchor.longitude)},{_fmt6(anchor.latitude)}"

    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


# ---------------------------------------------------------------------------
# self-contained HTML map

_TILE_SIZE = 256
_MAX_GRID = 6  # tiles per axis


def _mercator(lat: float, lon: float, zoom: int) -> tuple[float, float]:
    n = 2.0**zoom
    x = (lon + 180.0) / 360.0 * n
    y = (1.0 - math.asinh(math.tan(math.radians(lat))) / math.pi) / 2.0 * n
    return x, y


def _pick_zoom(lat_span: float, lon_span: float) -> int:
    span = max(lat_span, lon_span, 0.05)
    zoom = int(math.log2(360.0 / span))
    return max(1, min(zoom, 11))


def emit_html(doc: MapDocument) -> bytes:
    """One self-contained page: circles over a public tile layer.

    Positions are precomputed, so the page needs no scripts and no server;
    tiles load lazily when the viewer is online, the overlay renders either
    way.
    """
    circles = doc.circles
    if circles:
        lats = [c.cluster.anchor.latitude for c in circles]
        lons = [c.cluster.anchor.longitude for c in circles]
        center_lat = (min(lats) + max(lats)) / 2
        center_lon = (min(lons) + max(lons)) / 2
        zoom = _pick_zoom(max(lats) - min(lats), max(lons) - min(lons))
    else:
        center_lat, center_lon, zoom = 20.0, 0.0, 1

    cx, cy = _mercator(center_lat, center_lon, zoom)
    half = _MAX_GRID / 2
    n_tiles = 2**zoom
    x0 = max(0, min(int(cx - half), n_tiles - _MAX_GRID))
    y0 = max(0, min(int(cy - half), n_tiles - _MAX_GRID))
    grid_w = min(_MAX_GRID, n_tiles - x0)
    grid_h = min(_MAX_GRID, n_tiles - y0)
    width_px = grid_w * _TILE_SIZE
    height_px = grid_h * _TILE_SIZE

    tiles = []
    for ty in range(y0, y0 + grid_h):
        for tx in range(x0, x0 + grid_w):
            left = (tx - x0) * _TILE_SIZE
            top = (ty - y0) * _TILE_SIZE
            tiles.append(
                f'<img src="https://tile.openstreetmap.org/{zoom}/{tx}/{ty}.png" '
                f'alt="" loading="lazy" style="position:absolute;left:{left}px;top:{top}px;'
                f'width:{_TILE_SIZE}px;height:{_TILE_SIZE}px;">'
            )

    shapes = []
    for circle in circles:
        anchor = circle.cluster.anchor
        mx, my = _mercator(anchor.latitude, anchor.longitude, zoom)
        px = (mx - x0) * _TILE_SIZE
        py = (my - y0) * _TILE_SIZE
        if not (0 <= px <= width_px and 0 <= py <= height_px):
            continue
        radius_px = max(2.0, circle.display_radius * 1.5)
        label = html.escape(f"{_display_name(circle)} (n={circle.cluster.count})")
        shapes.append(
            f'<circle cx="{px:.1f}" cy="{py:.1f}" r="{radius_px:.1f}" '
            f'fill="{circle.color_hex}" fill-opacity="0.55" stroke="#333" stroke-width="1">'
            f"<title>{label}</title></circle>"
        )

    legend_items = "".join(
        f'<li><span class="swatch" style="background:{cls.color_hex}"></span>'
        f"{cls.color_name}: {cls.bounds_label}</li>"
        for cls in CLASS_ORDER
    )
    data_rows = [
        dict(
            _circle_properties(c),
            latitude=round(c.cluster.anchor.latitude, 6),
            longitude=round(c.cluster.anchor.longitude, 6),
        )
        for c in circles
    ]
    parameter_rows = "".join(
        f"<dt>{html.escape(str(k))}</dt><dd>{html.escape(str(v))}</dd>"
        for k, v in doc.parameters.items()
    )
    generated = (
        f'<p class="stamp">generated {html.escape(doc.generated_at)}</p>' if doc.generated_at else ""
    )

    page = f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{html.escape(doc.title)}</title>
<style>
body {{ font-family: sans-serif; margin: 1rem; background: #fafafa; color: #222; }}
.map {{ position: relative; width: {width_px}px; height: {height_px}px;
        border: 1px solid #999; background: #dde8f0; overflow: hidden; }}
.map svg {{ position: absolute; left: 0; top: 0; }}
.legend ul {{ list-style: none; padding: 0; }}
.legend li {{ margin: 0.15rem 0; }}
.swatch {{ display: inline-block; width: 1em; height: 1em; margin-right: 0.5em;
           border: 1px solid #555; vertical-align: -0.15em; }}
.stamp {{ color: #666; font-size: 0.85em; }}
dl {{ font-size: 0.85em; color: #444; }}
dt {{ font-weight: bold; display: inline; }}
dd {{ display: inline; margin: 0 0.75em 0 0.25em; }}
</style>
</head>
<body>
<h1>{html.escape(doc.title)}</h1>
<div class="map">
{"".join(tiles)}
<svg width="{width_px}" height="{height_px}" viewBox="0 0 {width_px} {height_px}">
{"".join(shapes)}
</svg>
</div>
<div class="legend">
<h2>circle classes</h2>
<ul>
{legend_items}
</ul>
</div>
<dl>{parameter_rows}</dl>
{generated}
<script type="application/json" id="circle-data">
{json.dumps(data_rows, indent=2)}
</script>
</body>
</html>
"""
    return page.encode("utf-8")
