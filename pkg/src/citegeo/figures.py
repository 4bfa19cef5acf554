"""Static map figures rendered with matplotlib (Agg, no display needed)."""

from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .classify import CLASS_ORDER
from .emit import MapDocument


def render_png(doc: MapDocument, *, dpi: int = 150) -> bytes:
    """Render circles on a lat/lon scatter, one series per color class."""
    fig, ax = plt.subplots(figsize=(9, 6), dpi=dpi)
    by_class = {cls: [] for cls in CLASS_ORDER}
    for circle in doc.circles:
        by_class[circle.cls].append(circle)

    for cls in CLASS_ORDER:
        circles = by_class[cls]
        if not circles:
            continue
        xs = [c.cluster.anchor.longitude for c in circles]
        ys = [c.cluster.anchor.latitude for c in circles]
        sizes = [(c.display_radius * 2.2) ** 2 for c in circles]
        ax.scatter(
            xs,
            ys,
            s=sizes,
            c=cls.color_hex,
            alpha=0.6,
            edgecolors="#333333",
            linewidths=0.5,
            label=f"{cls.color_name} ({cls.bounds_label})",
        )

    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title(doc.title)
    ax.grid(True, linewidth=0.3, alpha=0.5)
    if doc.circles:
        mean_lat = sum(c.cluster.anchor.latitude for c in doc.circles) / len(doc.circles)
        # keep degrees roughly isometric at the map's latitude
        ax.set_aspect(1.0 / max(0.2, math.cos(math.radians(mean_lat))))
    if doc.circles:
        ax.legend(loc="best", fontsize="small", framealpha=0.9)
    fig.tight_layout()

    buffer = io.BytesIO()
    fig.savefig(buffer, format="png")
    plt.close(fig)
    return buffer.getvalue()
