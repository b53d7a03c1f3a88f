"""Geo-tagged media store: moving points, sensor series, photos and videos.

Documents may be passed as JSON text or as dicts. Functions that produce
documents or GeoJSON return dicts.
"""

import json as _json

from . import _geocms
from ._geocms import GeocmsError, format_datetime, parse_datetime

__all__ = [
    "GeocmsError",
    "Store",
    "fov_polygon",
    "format_datetime",
    "media_type",
    "normalize",
    "parse_datetime",
    "position_at",
    "trajectory_similarity",
    "visible_intervals",
]


def _text(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def media_type(doc):
    return _geocms.media_type(_text(doc))


def normalize(doc, time="epoch"):
    return _json.loads(_geocms.normalize(_text(doc), time))


def position_at(doc, at):
    """(lon, lat, alt) at an ISO time; alt is None for 2-D tracks."""
    return _geocms.position_at(_text(doc), at)


def fov_polygon(doc, at=None):
    return _json.loads(_geocms.fov_polygon(_text(doc), at))


def visible_intervals(doc, lon, lat, step_ms=100):
    return _geocms.visible_intervals(_text(doc), lon, lat, step_ms)


def trajectory_similarity(a, b):
    return _geocms.trajectory_similarity(_text(a), _text(b))


class Store(_geocms.Store):
    """In-memory store; open() binds it to a directory so writes persist."""

    def put_feature(self, collection, fid, document):
        super().put_feature(collection, fid, _text(document))

    def get_feature(self, collection, fid, time="epoch"):
        return _json.loads(super().get_feature(collection, fid, time))

    def put_annotation(self, collection, fid, annotation):
        return _json.loads(super().put_annotation(collection, fid, _text(annotation)))

    def annotations(self, collection, fid):
        return [_json.loads(a) for a in super().annotations(collection, fid)]
