import io

import matplotlib.pyplot as plt

from citegeo.agglomerate import CityCluster
from citegeo.classify import ClassifiedCircle, PercentileClass
from citegeo.emit import MapDocument
from citegeo.figures import render_png
from citegeo.geocode import GeoPoint

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _circle(name, lat, lon, count, percentile, cls):
    cluster = CityCluster(
        canonical_name=name, country="x", anchor=GeoPoint(lat, lon), count=count, members=()
    )
    return ClassifiedCircle(cluster=cluster, percentile=percentile, cls=cls, display_radius=6.0)


def test_png_renders_and_decodes():
    doc = MapDocument(
        circles=[
            _circle("alpha", 48.2, 16.4, 10, 80.0, PercentileClass.P75_90),
            _circle("beta", 45.1, 7.7, 3, 20.0, PercentileClass.BOTTOM50),
        ],
        title="figure test",
    )
    data = render_png(doc)
    assert data.startswith(PNG_MAGIC)
    image = plt.imread(io.BytesIO(data))
    assert image.ndim == 3
    assert image.shape[0] > 100 and image.shape[1] > 100


def test_png_empty_document():
    data = render_png(MapDocument(circles=[]))
    assert data.startswith(PNG_MAGIC)
