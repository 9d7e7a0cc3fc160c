"""File ingestion and dataset serialization.

Footprints, land-use, and urbanization layers arrive as GeoJSON-style
feature collections in a projected metric CRS. Graph datasets are
written as line-delimited JSON with a leading manifest record carrying
the generation parameters and a feature-order checksum.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import schema
from .errors import DataError, InvalidConfigError, InvalidGeometryError
from .feature import BuildingRecord, NormalizationStats
from .geom import Polygon, point_in_polygon, polygon
from .graphgen import GraphDataset, LocalizedSubgraph
from .spatial import SpatialIndex

DATASET_VERSION = 1
STORE_VERSION = 1
REJECT_HARD_LIMIT = 0.5

NOT_ASSIGNED = "not_assigned"
_CLASS_IDS = {name: i for i, name in enumerate(schema.CLASS_NAMES)}


@dataclass
class MappingTables:
    """OSM tag -> class id, and (source, land-cover code) -> land-use id."""

    tag_to_class: dict[str, int | None]
    landuse_to_class: dict[tuple[str, int], int]

    @classmethod
    def load(cls, tag_path=None, landuse_path=None) -> "MappingTables":
        data_dir = resources.files("buildingclf") / "data"
        tag_path = Path(tag_path) if tag_path else data_dir / "tag_classes.csv"
        landuse_path = Path(landuse_path) if landuse_path \
            else data_dir / "landuse_classes.csv"
        tags: dict[str, int | None] = {}
        with open(tag_path, newline="") as f:
            for row in csv.DictReader(f):
                cls_name = row["class"]
                if cls_name == NOT_ASSIGNED:
                    tags[row["tag"]] = None
                elif cls_name in _CLASS_IDS:
                    tags[row["tag"]] = _CLASS_IDS[cls_name]
                else:
                    raise DataError(f"unknown class {cls_name!r} in {tag_path}")
        landuse: dict[tuple[str, int], int] = {}
        lu_ids = {name: i for i, name in enumerate(schema.LAND_USE_NAMES)}
        with open(landuse_path, newline="") as f:
            for row in csv.DictReader(f):
                if row["class"] not in lu_ids:
                    raise DataError(
                        f"unknown land-use class {row['class']!r} in {landuse_path}")
                landuse[(row["source"], int(row["code"]))] = lu_ids[row["class"]]
        tables = cls(tags, landuse)
        tables.validate()
        return tables

    def validate(self):
        """Totality assertions over the enumerated tags and codes."""
        required_tags = ["apartments", "detached", "semidetached_house",
                         "terrace", "industrial", "commercial", "public",
                         "barn", "garage", "residential", "cabin"]
        for t in required_tags:
            if t not in self.tag_to_class:
                raise DataError(f"tag table is missing {t!r}")
        required_codes = [("clc", 111), ("clc", 112), ("clc", 121),
                          ("clc", 523), ("ua", 11100), ("ua", 12100),
                          ("ua", 50000)]
        for key in required_codes:
            if key not in self.landuse_to_class:
                raise DataError(f"land-use table is missing {key}")

    def class_for_tags(self, building_tag: str | None,
                       house_tag: str | None = None) -> int | None:
        """Map the building tag (refined by the house subtype) to a class."""
        if building_tag is None:
            return None
        if building_tag == "house" and house_tag in ("terraced", "terrace"):
            return _CLASS_IDS["terraced"]
        return self.tag_to_class.get(building_tag)


@dataclass
class IngestConfig:
    footprints: str
    landuse: list[str] = field(default_factory=list)
    degurba: str | None = None
    country_property: str = "country"
    country_file: str | None = None
    tag_table: str | None = None
    landuse_table: str | None = None
    crs: str = "EPSG:3035"

    def __post_init__(self):
        # geographic (degree-based) systems are not usable for metric work
        if self.crs.upper() in ("EPSG:4326", "WGS84", "CRS84"):
            raise InvalidConfigError(
                f"{self.crs} is geographic; a projected metric CRS is required")


@dataclass
class RejectLog:
    entries: list[tuple[str, str]] = field(default_factory=list)

    def add(self, feature_id: str, reason: str):
        self.entries.append((feature_id, reason))


def _read_feature_collection(path) -> list[dict]:
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}")
    if doc.get("type") != "FeatureCollection" or "features" not in doc:
        raise DataError(f"{path} is not a FeatureCollection")
    return doc["features"]


def _polygon_from_geometry(geometry: dict) -> Polygon:
    if geometry is None:
        raise InvalidGeometryError("feature has no geometry")
    gtype = geometry.get("type")
    if gtype != "Polygon":
        raise InvalidGeometryError(f"unsupported geometry type {gtype!r}")
    rings = geometry["coordinates"]
    if not rings:
        raise InvalidGeometryError("empty polygon coordinates")
    return polygon(rings[0], holes=rings[1:])


class _PolygonLayer:
    """Point-in-polygon lookup over an attribute-carrying polygon layer."""

    def __init__(self, polys: list[Polygon], attrs: list[dict]):
        self.polys = polys
        self.attrs = attrs
        self.index = SpatialIndex(polys) if polys else None

    @classmethod
    def from_files(cls, paths) -> "_PolygonLayer":
        polys, attrs = [], []
        for path in paths:
            for i, feat in enumerate(_read_feature_collection(path)):
                try:
                    polys.append(_polygon_from_geometry(feat.get("geometry")))
                except InvalidGeometryError:
                    continue
                attrs.append(feat.get("properties") or {})
        return cls(polys, attrs)

    def containing(self, pt) -> list[dict]:
        if self.index is None:
            return []
        hits = self.index.query_rect(pt[0], pt[1], pt[0], pt[1])
        return [self.attrs[i] for i in hits
                if point_in_polygon(pt, self.polys[i])]


def ingest_footprints(config: IngestConfig,
                      tables: MappingTables | None = None
                      ) -> tuple[list[BuildingRecord], RejectLog]:
    """Parse, validate, and attribute building footprints.

    Land use joins by centroid containment with urban-atlas precedence
    over the land-cover backup; rejected features go to the log and the
    pipeline continues unless more than half the input is unusable.
    Output is sorted by id, so ingestion is input-order independent.
    """
    tables = tables or MappingTables.load(config.tag_table, config.landuse_table)
    features = _read_feature_collection(config.footprints)
    landuse = _PolygonLayer.from_files(config.landuse) if config.landuse \
        else _PolygonLayer([], [])
    degurba = _PolygonLayer.from_files([config.degurba]) if config.degurba \
        else _PolygonLayer([], [])
    countries = _PolygonLayer.from_files([config.country_file]) \
        if config.country_file else _PolygonLayer([], [])

    rejects = RejectLog()
    records: list[BuildingRecord] = []
    for i, feat in enumerate(features):
        props = feat.get("properties") or {}
        fid = str(props.get("id", f"feature_{i}"))
        try:
            poly = _polygon_from_geometry(feat.get("geometry"))
        except InvalidGeometryError as exc:
            rejects.add(fid, str(exc))
            continue
        centroid = poly.centroid()
        label = tables.class_for_tags(props.get("building"), props.get("house"))

        lu_id, covered = None, False
        containing = landuse.containing(centroid)
        ua_hits = [a for a in containing if a.get("source") == "ua"]
        clc_hits = [a for a in containing if a.get("source") == "clc"]
        if ua_hits:
            lu_id = tables.landuse_to_class.get(("ua", int(ua_hits[0]["code"])))
            covered = True
        elif clc_hits:
            lu_id = tables.landuse_to_class.get(("clc", int(clc_hits[0]["code"])))

        deg = None
        deg_hits = degurba.containing(centroid)
        if deg_hits:
            code = int(deg_hits[0].get("degurba", 0))
            deg = schema.DEGURBA_CODES.get(code)

        country = props.get(config.country_property, "")
        if not country and config.country_file:
            c_hits = countries.containing(centroid)
            if c_hits:
                country = c_hits[0].get("country", "")

        records.append(BuildingRecord(
            id=fid, polygon=poly, centroid=centroid,
            raw_class=props.get("building"), class_label=label,
            country=str(country).lower(), land_use=lu_id,
            urban_atlas_covered=covered, degurba=deg))

    if features and len(rejects.entries) > REJECT_HARD_LIMIT * len(features):
        raise DataError(
            f"{len(rejects.entries)} of {len(features)} features rejected")
    records.sort(key=lambda r: r.id)
    return records, rejects


# ---------------------------------------------------------------------------
# Building store (intermediate artifact between ingest and build)
# ---------------------------------------------------------------------------

def save_buildings(records: list[BuildingRecord], path) -> None:
    with open(path, "w") as f:
        f.write(json.dumps({"kind": "store", "version": STORE_VERSION,
                            "count": len(records)}) + "\n")
        for r in records:
            rec = {
                "id": r.id,
                "exterior": r.polygon.exterior.tolist(),
                "holes": [h.tolist() for h in r.polygon.holes],
                "raw_class": r.raw_class,
                "class_label": r.class_label,
                "country": r.country,
                "land_use": r.land_use,
                "urban_atlas_covered": r.urban_atlas_covered,
                "degurba": r.degurba,
            }
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")


def load_buildings(path) -> list[BuildingRecord]:
    records = []
    with open(path) as f:
        header = json.loads(f.readline())
        if header.get("kind") != "store" or header.get("version") != STORE_VERSION:
            raise DataError(f"{path} is not a building store file")
        for line_no, line in enumerate(f, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_no}: {exc}")
            poly = Polygon(np.asarray(rec["exterior"], dtype=float),
                           tuple(np.asarray(h, dtype=float)
                                 for h in rec["holes"]))
            records.append(BuildingRecord(
                id=rec["id"], polygon=poly, centroid=poly.centroid(),
                raw_class=rec["raw_class"], class_label=rec["class_label"],
                country=rec["country"], land_use=rec["land_use"],
                urban_atlas_covered=rec["urban_atlas_covered"],
                degurba=rec["degurba"]))
    if len(records) != header["count"]:
        raise DataError(f"{path}: expected {header['count']} records, "
                        f"found {len(records)} (truncated?)")
    return records


# ---------------------------------------------------------------------------
# Graph dataset files
# ---------------------------------------------------------------------------

def save_dataset(dataset: GraphDataset, path) -> None:
    """Line-delimited records: manifest first, then one subgraph per line."""
    with open(path, "w") as f:
        manifest = {
            "kind": "manifest",
            "version": DATASET_VERSION,
            "manifest": dataset.manifest,
            "task": dataset.task,
            "label_policy": dataset.label_policy,
            "norm": dataset.norm_stats.to_dict() if dataset.norm_stats else None,
            "feature_checksum": schema.feature_checksum(),
            "n_subgraphs": len(dataset.subgraphs),
        }
        f.write(json.dumps(manifest, separators=(",", ":"), sort_keys=True) + "\n")
        for sg in dataset.subgraphs:
            rec = {
                "kind": "subgraph",
                "center": sg.center_id,
                "center_index": sg.center_index,
                "split": sg.split,
                "nodes": sg.node_ids,
                "x": sg.node_features.tolist(),
                "y": sg.labels.tolist(),
                "flags": sg.split_flags.tolist(),
                "edges": [[int(i), int(j), float(l)]
                          for (i, j), l in zip(sg.edges, sg.edge_len)],
            }
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")


def load_dataset(path) -> GraphDataset:
    with open(path) as f:
        first = f.readline()
        if not first:
            raise DataError(f"{path}: empty dataset file")
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:1: {exc}")
        if header.get("kind") != "manifest":
            raise DataError(f"{path}: first record is not a manifest")
        if header.get("version") != DATASET_VERSION:
            raise DataError(
                f"{path}: unsupported dataset version {header.get('version')}")
        if header.get("feature_checksum") != schema.feature_checksum():
            raise DataError(f"{path}: feature-order checksum mismatch; "
                            "refusing to load")
        subgraphs = []
        for line_no, line in enumerate(f, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_no}: {exc}")
            if rec.get("kind") != "subgraph":
                raise DataError(f"{path}:{line_no}: unexpected record kind")
            edges = np.array([[e[0], e[1]] for e in rec["edges"]],
                             dtype=np.int64).reshape(-1, 2)
            lens = np.array([e[2] for e in rec["edges"]], dtype=float)
            subgraphs.append(LocalizedSubgraph(
                center_id=rec["center"],
                node_ids=list(rec["nodes"]),
                node_features=np.asarray(rec["x"], dtype=float),
                edges=edges, edge_len=lens,
                labels=np.asarray(rec["y"], dtype=np.int64),
                split_flags=np.asarray(rec["flags"], dtype=np.int8),
                center_index=rec["center_index"],
                split=rec["split"]))
    if len(subgraphs) != header["n_subgraphs"]:
        raise DataError(f"{path}: expected {header['n_subgraphs']} subgraphs, "
                        f"found {len(subgraphs)} (truncated?)")
    norm = NormalizationStats.from_dict(header["norm"]) \
        if header.get("norm") else None
    return GraphDataset(subgraphs, header["manifest"], norm,
                        header["task"], header["label_policy"])
