"""Node feature assembly: building-level and block-level shape
indicators plus land-use, urbanization, and country indicators.

The 69-column layout is fixed by schema.FEATURE_NAMES. Missing
categorical attributes encode as all-zero one-hot groups so the vector
length never varies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geom, schema
from .errors import InvalidConfigError, InvalidInputError, InvalidStateError
from .spatial import SpatialIndex

# Buildings whose bounding boxes come this close are adjacency candidates.
ADJACENCY_RANGE_M = 0.5


@dataclass
class BuildingRecord:
    id: str
    polygon: geom.Polygon
    centroid: tuple[float, float]
    raw_class: str | None = None
    class_label: int | None = None
    country: str = ""
    land_use: int | None = None
    urban_atlas_covered: bool = False
    degurba: str | None = None

    def __post_init__(self):
        if self.class_label is not None and not 0 <= self.class_label < schema.N_CLASSES:
            raise InvalidInputError(
                f"building {self.id}: class_label {self.class_label} outside 0..8")
        x0, y0, x1, y1 = self.polygon.bounds
        cx, cy = self.centroid
        if not (x0 - 1e-6 <= cx <= x1 + 1e-6 and y0 - 1e-6 <= cy <= y1 + 1e-6):
            raise InvalidInputError(
                f"building {self.id}: centroid outside polygon bounds")


def make_record(id, polygon, **kwargs) -> BuildingRecord:
    return BuildingRecord(id=id, polygon=polygon,
                          centroid=polygon.centroid(), **kwargs)


@dataclass
class Block:
    """Connected component of buildings under the shares-a-wall relation."""

    member_ids: frozenset
    outline_parts: list[geom.Polygon] = field(default_factory=list)


def adjacency_candidates(b: BuildingRecord, index: SpatialIndex,
                         buildings: list[BuildingRecord]) -> list[BuildingRecord]:
    """Buildings whose bounding boxes are within the adjacency range of b."""
    x0, y0, x1, y1 = b.polygon.bounds
    r = ADJACENCY_RANGE_M
    hits = index.query_rect(x0 - r, y0 - r, x1 + r, y1 + r)
    return [buildings[i] for i in hits if buildings[i].id != b.id]


def build_blocks(buildings: list[BuildingRecord],
                 index: SpatialIndex | None = None) -> list[Block]:
    """Partition buildings into wall-sharing connected components.

    Returns blocks in order of their smallest member position; the
    merged outline is the boundary-cancellation union of the members.
    """
    if index is None:
        index = SpatialIndex([b.polygon for b in buildings])
    parent = list(range(len(buildings)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pos = {b.id: i for i, b in enumerate(buildings)}
    for i, b in enumerate(buildings):
        for cand in adjacency_candidates(b, index, buildings):
            j = pos[cand.id]
            if j < i:
                continue  # pair already tested from the other side
            count, _ = geom.adjacency_stats(b.polygon, [cand.polygon])
            if count:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj

    groups: dict[int, list[int]] = {}
    for i in range(len(buildings)):
        groups.setdefault(find(i), []).append(i)

    blocks = []
    for root in sorted(groups, key=lambda r: min(groups[r])):
        members = groups[root]
        if len(members) == 1:
            b = buildings[members[0]]
            blocks.append(Block(frozenset([b.id]), [b.polygon]))
        else:
            polys = [buildings[i].polygon for i in members]
            ids = [buildings[i].id for i in members]
            parts = geom.merge_wall_sharing(polys, ids=ids)
            blocks.append(Block(frozenset(ids), parts))
    return blocks


def _block_outline_vertices(block: Block) -> np.ndarray:
    return np.vstack([p.exterior for p in block.outline_parts])


def block_features(block: Block, member_areas: list[float]) -> np.ndarray:
    """The 10 block-level columns; outline-based ones span all parts."""
    areas = np.asarray(member_areas, dtype=float)
    verts = _block_outline_vertices(block)
    hull = geom.convex_hull(verts)
    total_area = float(sum(geom.footprint_area(p) for p in block.outline_parts))
    perim = float(sum(geom.perimeter(p) for p in block.outline_parts))
    corners = int(sum(geom.count_corners(p) for p in block.outline_parts))
    circ = geom.min_enclosing_circle(verts)
    hull_poly = geom.polygon(hull) if len(hull) >= 3 else None
    if hull_poly is None:
        raise InvalidInputError("degenerate block outline")
    bb = geom.min_area_bounding_box(hull_poly)
    lo, hi = sorted((bb.side_a, bb.side_b))
    p1, p2, _, p4 = bb.corners
    ref = p2 if bb.side_a >= bb.side_b else p4
    az = geom.azimuth(p1, ref)
    orient = abs(((az + 45.0) % 90.0) - 45.0)
    conv = total_area / geom.ring_signed_area(hull)
    return np.array([
        len(areas),
        float(areas.mean()),
        float(areas.std()),  # population convention
        total_area,
        perim,
        2.0 * circ.radius,
        lo / hi,
        conv,
        orient,
        corners,
    ])


def building_features(b: BuildingRecord,
                      neighbors: list[BuildingRecord]) -> np.ndarray:
    """The 10 building-level columns."""
    p = b.polygon
    adj_count, shared = geom.adjacency_stats(p, [n.polygon for n in neighbors])
    return np.array([
        geom.footprint_area(p),
        geom.perimeter(p),
        geom.count_corners(p),
        geom.anisotropy_index(p),
        geom.longest_axis_length(p),
        geom.elongation(p),
        geom.convexity(p),
        geom.orientation(p),
        adj_count,
        shared,
    ])


def categorical_features(b: BuildingRecord,
                         countries: list[str] | None = None) -> np.ndarray:
    countries = countries if countries is not None else schema.COUNTRIES
    land_use = np.zeros(schema.N_LAND_USE + 1)
    if b.land_use is not None:
        if not 0 <= b.land_use < schema.N_LAND_USE:
            raise InvalidInputError(f"land_use id {b.land_use} outside 0..14")
        land_use[b.land_use] = 1.0
    land_use[schema.N_LAND_USE] = 1.0 if b.urban_atlas_covered else 0.0
    degurba = np.zeros(3)
    if b.degurba is not None:
        degurba[schema.DEGURBA_NAMES.index(b.degurba)] = 1.0
    country = np.zeros(len(countries))
    if b.country in countries:
        country[countries.index(b.country)] = 1.0
    return np.concatenate([land_use, degurba, country])


def node_features(b: BuildingRecord, block: Block,
                  neighbors: list[BuildingRecord],
                  block_cols: np.ndarray | None = None) -> np.ndarray:
    """Assemble the full 69-column vector for one building."""
    if b.id not in block.member_ids:
        raise InvalidInputError(f"building {b.id} not a member of its block")
    if block_cols is None:
        member_areas = [geom.footprint_area(b.polygon)] * len(block.member_ids)
        block_cols = block_features(block, member_areas)
    vec = np.concatenate([
        building_features(b, neighbors),
        block_cols,
        categorical_features(b),
    ])
    if vec.shape != (schema.N_FEATURES,) or not np.isfinite(vec).all():
        raise InvalidInputError(f"bad feature vector for building {b.id}")
    return vec


def compute_feature_matrix(buildings: list[BuildingRecord],
                           index: SpatialIndex | None = None,
                           blocks: list[Block] | None = None) -> np.ndarray:
    """(n, 69) matrix over a building store, block columns shared per block."""
    if index is None:
        index = SpatialIndex([b.polygon for b in buildings])
    if blocks is None:
        blocks = build_blocks(buildings, index)
    area_by_id = {b.id: geom.footprint_area(b.polygon) for b in buildings}
    block_of: dict[str, tuple[Block, np.ndarray]] = {}
    for blk in blocks:
        cols = block_features(blk, [area_by_id[i] for i in sorted(blk.member_ids)])
        for bid in blk.member_ids:
            block_of[bid] = (blk, cols)
    out = np.empty((len(buildings), schema.N_FEATURES))
    for i, b in enumerate(buildings):
        blk, cols = block_of[b.id]
        nbrs = adjacency_candidates(b, index, buildings)
        out[i] = node_features(b, blk, nbrs, block_cols=cols)
    return out


def scale_edge_feature(len_m: float, xi: float) -> float:
    """Inverse min-max scaling of an edge length: 1 at zero distance,
    0 at and beyond the threshold."""
    if xi <= 0:
        raise InvalidConfigError(f"edge scaling threshold must be > 0, got {xi}")
    if len_m < 0:
        raise InvalidInputError(f"negative edge length {len_m}")
    if len_m > xi:
        return 0.0
    return 1.0 - (len_m / xi)


@dataclass
class NormalizationStats:
    """Per-column z-score parameters for the 20 numerical features."""

    mean: np.ndarray
    std: np.ndarray

    @property
    def constant_columns(self) -> np.ndarray:
        return self.std == 0.0

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationStats":
        return cls(np.asarray(d["mean"], dtype=float),
                   np.asarray(d["std"], dtype=float))


def fit_normalization(features: np.ndarray,
                      train_mask: np.ndarray) -> NormalizationStats:
    """Fit z-score stats on training rows; numerical columns only."""
    rows = features[np.asarray(train_mask, dtype=bool)]
    if len(rows) < 2:
        raise InvalidStateError("normalization needs >= 2 training rows")
    num = rows[:, :schema.N_NUMERICAL]
    return NormalizationStats(num.mean(axis=0), num.std(axis=0))


def apply_normalization(features: np.ndarray,
                        stats: NormalizationStats) -> np.ndarray:
    """Z-score the numerical columns; constant columns map to zero."""
    out = np.array(features, dtype=float, copy=True)
    num = out[..., :schema.N_NUMERICAL]
    safe_std = np.where(stats.std == 0.0, 1.0, stats.std)
    num -= stats.mean
    num /= safe_std
    num[..., stats.constant_columns] = 0.0
    out[..., :schema.N_NUMERICAL] = num
    return out
