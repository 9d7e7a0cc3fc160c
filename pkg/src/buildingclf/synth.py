"""Synthetic town generator for desk-scale experiments.

The town is a grid of zoned districts (detached, semi-detached,
terraced, apartment, commercial, industrial, agricultural) arranged in
urbanization rings. Class depends on both shape and neighborhood: some
building forms are deliberately ambiguous (apartment slabs vs commercial
slabs, industrial halls vs commercial big boxes, public buildings shaped
like slabs inside residential districts) and only the surrounding
district resolves them. Land-use polygons cover only part of the town,
so zone information is sometimes missing from the features entirely.

Output is GeoJSON matching the ingestion contract, byte-identical for a
given parameter set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidConfigError

CELL = 200.0  # district cell side, m

DISTRICT_TYPES = ("detached", "semi", "terraced", "apartment",
                  "commercial", "industrial", "agricultural")

DEFAULT_MIX = {
    "detached": 0.14, "semi": 0.10, "terraced": 0.12, "apartment": 0.16,
    "commercial": 0.16, "industrial": 0.15, "agricultural": 0.13,
}

RING_ALLOWED = {
    1: ("apartment", "commercial", "terraced"),                      # city
    2: ("detached", "semi", "terraced", "apartment", "commercial",
        "industrial"),                                               # suburb
    3: ("agricultural", "detached", "industrial"),                   # rural
}

# urban-atlas land-use codes per district type (covered districts)
UA_CODE = {
    "detached": 11230, "semi": 11210, "terraced": 11220,
    "apartment": 11100, "commercial": 12100, "industrial": 12100,
}
CLC_CODE_AGRI = 211

TAGS = {
    "apartments": ["apartments"],
    "detached": ["detached", "farm"],
    "semi_detached": ["semidetached_house"],
    "terraced": ["terrace", "house"],
    "industrial": ["industrial", "warehouse"],
    "commercial": ["retail", "commercial", "supermarket"],
    "public": ["school", "civic", "church"],
    "agricultural": ["barn", "cowshed"],
    "other": ["garage", "shed"],
}
CLASS_ORDER = ["apartments", "detached", "semi_detached", "terraced",
               "industrial", "commercial", "public", "agricultural", "other"]
UNLABELED_TAG = "residential"


@dataclass
class TownParams:
    seed: int = 0
    n_buildings: int = 50000
    class_mix: dict | None = None      # district-type weights
    noise: float = 0.05                # label corruption rate
    label_coverage: float = 0.5        # share of buildings carrying a tag
    landuse_coverage: float = 0.5      # share of urban districts with land use
    countries: tuple = ("de", "fr", "pl", "es")

    def __post_init__(self):
        if self.n_buildings < 20:
            raise InvalidConfigError("n_buildings must be >= 20")
        if not 0 <= self.noise < 1:
            raise InvalidConfigError("noise must be in [0, 1)")
        mix = self.class_mix or DEFAULT_MIX
        unknown = set(mix) - set(DISTRICT_TYPES)
        if unknown:
            raise InvalidConfigError(f"unknown district types {sorted(unknown)}")
        weights = {t: float(mix.get(t, 0.0)) for t in DISTRICT_TYPES}
        if min(weights.values()) < 0 or sum(weights.values()) <= 0:
            raise InvalidConfigError("class_mix weights must be >= 0, sum > 0")
        self.class_mix = weights


@dataclass
class _Building:
    ring: list            # exterior, local floats
    cls: str              # key into TAGS
    district: int


def _rect(x0, y0, w, h):
    return [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)]


def _row_of_units(x0, y0, widths, depth):
    """Attached units sharing party walls exactly (cumulative offsets)."""
    xs = [x0]
    for w in widths:
        xs.append(xs[-1] + w)
    return [[(xs[i], y0), (xs[i + 1], y0), (xs[i + 1], y0 + depth),
             (xs[i], y0 + depth)] for i in range(len(widths))]


def _l_shape(x0, y0, w, h, cut_w, cut_h):
    return [(x0, y0), (x0 + w, y0), (x0 + w, y0 + h - cut_h),
            (x0 + w - cut_w, y0 + h - cut_h), (x0 + w - cut_w, y0 + h),
            (x0, y0 + h)]


def _slab(rng, x, y):
    """Slab footprint shared by apartment and commercial districts."""
    w = rng.uniform(14, 18)
    h = rng.uniform(28, 40)
    if rng.random() < 0.5:
        w, h = h, w
    return _rect(x, y, w, h)


def _big_box(rng, x, y):
    """Large hall shared by industrial and commercial districts."""
    w = rng.uniform(22, 30)
    h = rng.uniform(34, 44)
    if rng.random() < 0.5:
        w, h = h, w
    return _rect(x, y, w, h)


def _gen_detached(rng, d):
    out = []
    for gy in range(4):
        for gx in range(4):
            x = 20 + gx * 42 + rng.uniform(-3, 3)
            y = 20 + gy * 42 + rng.uniform(-3, 3)
            w = rng.uniform(8, 11)
            h = rng.uniform(9, 12)
            out.append(_Building(_rect(x, y, w, h), "detached", d))
    return out


def _gen_semi(rng, d):
    out = []
    for gy in range(4):
        for gx in range(3):
            x = 16 + gx * 60 + rng.uniform(-2, 2)
            y = 16 + gy * 44 + rng.uniform(-2, 2)
            w1, w2 = rng.uniform(6, 8, 2)
            depth = rng.uniform(9, 11)
            for ring in _row_of_units(x, y, [w1, w2], depth):
                out.append(_Building(ring, "semi_detached", d))
    return out


def _gen_terraced(rng, d):
    out = []
    for row in range(4):
        n_units = int(rng.integers(4, 8))
        widths = rng.uniform(5, 7, n_units)
        depth = rng.uniform(9, 12)
        x = 12 + rng.uniform(0, 8)
        y = 16 + row * 44 + rng.uniform(-2, 2)
        for ring in _row_of_units(x, y, list(widths), depth):
            out.append(_Building(ring, "terraced", d))
    return out


def _gen_apartment(rng, d):
    out = []
    for gy in range(2):
        for gx in range(4):
            x = 10 + gx * 48 + rng.uniform(-3, 3)
            y = 14 + gy * 70 + rng.uniform(-3, 3)
            out.append(_Building(_slab(rng, x, y), "apartments", d))
    # garage rows serving the estate
    for k in range(int(rng.integers(2, 4))):
        n = int(rng.integers(4, 7))
        widths = [3.0 + rng.uniform(0, 0.4) for _ in range(n)]
        x = 12 + rng.uniform(0, 90) + 45 * k
        y = 186 + rng.uniform(0, 6)
        for ring in _row_of_units(x, y, widths, 6.0):
            out.append(_Building(ring, "other", d))
    return out


def _gen_commercial(rng, d):
    # alternating slabs and big boxes: the slabs match apartment slabs,
    # the boxes match industrial halls; only the neighborhood tells
    out = []
    for gy in range(4):
        for gx in range(4):
            x = 6 + gx * 48 + rng.uniform(-3, 3)
            y = 6 + gy * 48 + rng.uniform(-3, 3)
            if (gx + gy) % 2 == 0:
                out.append(_Building(_slab(rng, x, y), "commercial", d))
            else:
                out.append(_Building(_big_box(rng, x, y), "commercial", d))
    return out


def _gen_industrial(rng, d):
    out = []
    for gy in range(4):
        for gx in range(3):
            x = 8 + gx * 62 + rng.uniform(-3, 3)
            y = 6 + gy * 48 + rng.uniform(-3, 3)
            out.append(_Building(_big_box(rng, x, y), "industrial", d))
    for _ in range(int(rng.integers(1, 3))):
        x, y = rng.uniform(8, 180, 2)
        out.append(_Building(_rect(x, y, rng.uniform(4, 6), rng.uniform(7, 9)),
                             "other", d))
    return out


def _gen_agricultural(rng, d):
    out = []
    for k in range(int(rng.integers(3, 5))):
        x = rng.uniform(10, 140)
        y = 10 + k * 48 + rng.uniform(0, 10)
        w = rng.uniform(15, 22)
        h = rng.uniform(28, 45)
        if rng.random() < 0.5:
            w, h = h, w
        out.append(_Building(_rect(x, y, w, h), "agricultural", d))
        if rng.random() < 0.7:
            out.append(_Building(
                _rect(x + w + rng.uniform(8, 15), y + rng.uniform(0, 10),
                      rng.uniform(8, 11), rng.uniform(9, 12)),
                "detached", d))
    return out


_GENERATORS = {
    "detached": _gen_detached, "semi": _gen_semi, "terraced": _gen_terraced,
    "apartment": _gen_apartment, "commercial": _gen_commercial,
    "industrial": _gen_industrial, "agricultural": _gen_agricultural,
}

_RESIDENTIAL_DISTRICTS = ("detached", "semi", "terraced", "apartment")


def _add_public(rng, d, buildings):
    """Occasional public building inside a residential district; most are
    slab-shaped, so only the neighborhood identifies them."""
    if rng.random() < 0.8:
        x, y = rng.uniform(60, 130, 2)
        if rng.random() < 0.6:
            ring = _slab(rng, x, y)
        else:
            ring = _l_shape(x, y, rng.uniform(20, 30), rng.uniform(20, 30),
                            rng.uniform(8, 14), rng.uniform(8, 14))
        buildings.append(_Building(ring, "public", d))


def _rotate(ring, angle_deg, cx, cy):
    t = math.radians(angle_deg)
    c, s = math.cos(t), math.sin(t)
    return [(cx + (x - cx) * c - (y - cy) * s,
             cy + (x - cx) * s + (y - cy) * c) for x, y in ring]


@dataclass
class Town:
    buildings: list[dict]
    landuse: list[dict]
    degurba: list[dict]
    true_class: dict[str, int]  # id -> noiseless class id (generator truth)


def synth_town(params: TownParams) -> Town:
    rng = np.random.default_rng(params.seed)
    avg_yield = 16.0  # mean buildings per district across the default mix
    n_districts = max(1, int(math.ceil(params.n_buildings / avg_yield)))
    g = int(math.ceil(math.sqrt(n_districts)))

    mix = params.class_mix
    features: list[dict] = []
    landuse_feats: list[dict] = []
    degurba_feats: list[dict] = []
    true_class: dict[str, int] = {}
    count = 0
    bid = 0

    for row in range(g):
        if count >= params.n_buildings:
            break
        for col in range(g):
            if count >= params.n_buildings:
                break
            d = row * g + col
            # ring by normalized distance from the town center
            r = math.hypot(row - (g - 1) / 2, col - (g - 1) / 2) / max(g / 2, 1)
            ring_code = 1 if r < 0.45 else (2 if r < 0.8 else 3)
            allowed = [t for t in RING_ALLOWED[ring_code] if mix[t] > 0]
            if ring_code < 3 and len(allowed) > 1:
                # checkerboard work/living split inside urban rings: deep
                # graph neighborhoods always straddle both kinds
                work = (row + col) % 2 == 0
                pool = [t for t in allowed
                        if (t in ("commercial", "industrial")) == work]
                if pool:
                    allowed = pool
            if not allowed:
                allowed = [t for t in DISTRICT_TYPES if mix[t] > 0]
            w = np.array([mix[t] for t in allowed])
            dtype = allowed[int(rng.choice(len(allowed), p=w / w.sum()))]

            bs = _GENERATORS[dtype](rng, d)
            if dtype in _RESIDENTIAL_DISTRICTS:
                _add_public(rng, d, bs)

            ox, oy = col * CELL, row * CELL
            angle = float(rng.uniform(-10, 10)) if rng.random() < 0.5 else 0.0
            quadrant = (0 if col < g / 2 else 1) + (0 if row < g / 2 else 2)
            country = params.countries[quadrant % len(params.countries)]

            for b in bs:
                ring = b.ring
                if angle:
                    ring = _rotate(ring, angle, CELL / 2, CELL / 2)
                ring = [(round(ox + x, 6), round(oy + y, 6)) for x, y in ring]
                cls_id = CLASS_ORDER.index(b.cls)
                name = f"b{bid:06d}"
                bid += 1
                count += 1
                true_class[name] = cls_id
                # tag assignment: coverage, then noise
                if rng.random() < params.label_coverage:
                    if params.noise > 0 and rng.random() < params.noise:
                        wrong = [c for c in CLASS_ORDER if c != b.cls]
                        cls_for_tag = wrong[int(rng.integers(len(wrong)))]
                    else:
                        cls_for_tag = b.cls
                    tags = TAGS[cls_for_tag]
                    tag = tags[int(rng.integers(len(tags)))]
                else:
                    tag = UNLABELED_TAG
                props = {"id": name, "building": tag, "country": country}
                if tag == "house":
                    props["house"] = "terraced"
                features.append({
                    "type": "Feature",
                    "geometry": {"type": "Polygon",
                                 "coordinates": [[list(p) for p in ring]]},
                    "properties": props,
                })

            cell_ring = [[ox, oy], [ox + CELL, oy], [ox + CELL, oy + CELL],
                         [ox, oy + CELL]]
            degurba_feats.append({
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [cell_ring]},
                "properties": {"degurba": ring_code},
            })
            if dtype == "agricultural":
                # rural districts only appear in the land-cover backup
                landuse_feats.append({
                    "type": "Feature",
                    "geometry": {"type": "Polygon", "coordinates": [cell_ring]},
                    "properties": {"source": "clc", "code": CLC_CODE_AGRI},
                })
            elif rng.random() < params.landuse_coverage:
                # mixed-use city centers: commercial blocks inside the
                # continuous fabric share the residential land-use class
                code = 11100 if (dtype == "commercial" and ring_code == 1) \
                    else UA_CODE[dtype]
                landuse_feats.append({
                    "type": "Feature",
                    "geometry": {"type": "Polygon", "coordinates": [cell_ring]},
                    "properties": {"source": "ua", "code": code},
                })
                if rng.random() < 0.3:
                    # an underlying land-cover polygon the atlas must win over
                    landuse_feats.append({
                        "type": "Feature",
                        "geometry": {"type": "Polygon",
                                     "coordinates": [cell_ring]},
                        "properties": {"source": "clc", "code": 112},
                    })
    return Town(features, landuse_feats, degurba_feats, true_class)


def write_town(params: TownParams, outdir) -> dict[str, Path]:
    """Write buildings/landuse/degurba GeoJSON plus the truth table."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    town = synth_town(params)
    paths = {}

    def dump(name, feats):
        path = outdir / f"{name}.geojson"
        doc = {"type": "FeatureCollection", "features": feats}
        with open(path, "w") as f:
            json.dump(doc, f, separators=(",", ":"), sort_keys=True)
        paths[name] = path

    dump("buildings", town.buildings)
    dump("landuse", town.landuse)
    dump("degurba", town.degurba)
    truth_path = outdir / "truth.json"
    with open(truth_path, "w") as f:
        json.dump(town.true_class, f, separators=(",", ":"), sort_keys=True)
    paths["truth"] = truth_path
    return paths
