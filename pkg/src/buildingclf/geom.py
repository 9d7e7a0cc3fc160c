"""2D polygon kernels for building-footprint shape indicators.

All inputs live in a projected metric CRS (meters). Exterior rings are
stored counter-clockwise without a closing duplicate vertex; holes are
stored clockwise. Exact integer predicates (coordinates snapped to a
fixed grid) back every topological decision so that results are
deterministic and free of float-tie ambiguity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGeometryError, InvalidInputError

# Snap grid for wall-sharing tests and outline merging: 1 mm. GIS data
# carries sub-mm jitter; anything below this is noise.
SNAP_GRID_M = 1e-3
# Shared-wall pieces shorter than this are ignored.
MIN_WALL_OVERLAP_M = 0.01
# Vertices closer than this (after snapping) collapse to one point.
_MEC_EPS = 1e-9


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with optional holes, in meters.

    exterior: (n, 2) float array, CCW, open ring (first point != last).
    holes: list of (m, 2) float arrays, CW, open rings.
    """

    exterior: np.ndarray
    holes: tuple[np.ndarray, ...] = field(default_factory=tuple)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        xs, ys = self.exterior[:, 0], self.exterior[:, 1]
        return float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max())

    def centroid(self) -> tuple[float, float]:
        """Area centroid of the exterior minus holes."""
        ax, cx, cy = 0.0, 0.0, 0.0
        for ring, sign in [(self.exterior, 1.0)] + [(h, 1.0) for h in self.holes]:
            # hole rings are CW so their shoelace terms subtract naturally
            x, y = ring[:, 0], ring[:, 1]
            xn, yn = np.roll(x, -1), np.roll(y, -1)
            cross = x * yn - xn * y
            ax += sign * cross.sum()
            cx += sign * ((x + xn) * cross).sum()
            cy += sign * ((y + yn) * cross).sum()
        if abs(ax) < 1e-18:
            raise InvalidGeometryError("zero-area polygon has no centroid")
        return cx / (3.0 * ax), cy / (3.0 * ax)


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float


def _ring_array(points) -> np.ndarray:
    a = np.asarray(points, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise InvalidGeometryError("ring must be a sequence of 2D points")
    return a


def ring_signed_area(ring: np.ndarray) -> float:
    """Shoelace signed area; positive for CCW rings."""
    x, y = ring[:, 0], ring[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float((x * yn - xn * y).sum())


def ring_length(ring: np.ndarray) -> float:
    d = np.roll(ring, -1, axis=0) - ring
    return float(np.hypot(d[:, 0], d[:, 1]).sum())


def _dedupe_ring(a: np.ndarray) -> np.ndarray:
    """Drop the closing duplicate and consecutive duplicate vertices."""
    if len(a) > 1 and np.allclose(a[0], a[-1], atol=1e-12):
        a = a[:-1]
    if len(a) < 2:
        return a
    keep = [0]
    for i in range(1, len(a)):
        if not (a[i] == a[keep[-1]]).all():
            keep.append(i)
    return a[keep]


def _segments_properly_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return int(v > 0) - int(v < 0)

    def on_seg(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_seg(p1, p2, p3):
        return True
    if o2 == 0 and on_seg(p1, p2, p4):
        return True
    if o3 == 0 and on_seg(p3, p4, p1):
        return True
    if o4 == 0 and on_seg(p3, p4, p2):
        return True
    return False


def ring_is_simple(ring: np.ndarray) -> bool:
    """No two non-adjacent edges intersect or touch."""
    n = len(ring)
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = ring[j], ring[(j + 1) % n]
            if _segments_properly_cross(tuple(a), tuple(b), tuple(c), tuple(d)):
                return False
    return True


def polygon(exterior, holes=()) -> Polygon:
    """Build a validated Polygon, normalizing ring orientation.

    Raises InvalidGeometryError for rings with < 3 distinct points,
    self-intersections, or zero area.
    """
    ext = _dedupe_ring(_ring_array(exterior))
    if len(ext) < 3:
        raise InvalidGeometryError("exterior ring needs >= 3 distinct points")
    area = ring_signed_area(ext)
    if abs(area) < 1e-12:
        raise InvalidGeometryError("degenerate exterior ring (collinear points)")
    if area < 0:
        ext = ext[::-1].copy()
    if not ring_is_simple(ext):
        raise InvalidGeometryError("exterior ring is self-intersecting")
    norm_holes = []
    for h in holes:
        hr = _dedupe_ring(_ring_array(h))
        if len(hr) < 3:
            raise InvalidGeometryError("hole ring needs >= 3 distinct points")
        ha = ring_signed_area(hr)
        if abs(ha) < 1e-12:
            raise InvalidGeometryError("degenerate hole ring")
        if ha > 0:
            hr = hr[::-1].copy()
        if not ring_is_simple(hr):
            raise InvalidGeometryError("hole ring is self-intersecting")
        norm_holes.append(hr)
    return Polygon(ext, tuple(norm_holes))


def box(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    """Axis-aligned rectangle; convenience for tests and the generator."""
    return polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


# ---------------------------------------------------------------------------
# Shape indicators
# ---------------------------------------------------------------------------

def footprint_area(p: Polygon) -> float:
    """Area of the exterior minus hole areas, in m²."""
    area = ring_signed_area(p.exterior)
    for h in p.holes:
        area += ring_signed_area(h)  # holes are CW -> negative contribution
    if area <= 0:
        raise InvalidGeometryError("non-positive footprint area")
    return area


def perimeter(p: Polygon) -> float:
    """Length of the exterior ring (building outline), in m."""
    return ring_length(p.exterior)


def count_corners(p: Polygon) -> int:
    """Vertices whose interior angle deviates >= 10 degrees from straight.

    Near-straight vertices (interior angle strictly between 170 and 190
    degrees) do not count.
    """
    ring = p.exterior
    n = len(ring)
    count = 0
    for i in range(n):
        a, b, c = ring[i - 1], ring[i], ring[(i + 1) % n]
        v1, v2 = b - a, c - b
        turn = math.degrees(math.atan2(
            v1[0] * v2[1] - v1[1] * v2[0], v1[0] * v2[0] + v1[1] * v2[1]))
        if abs(turn) >= 10.0:
            count += 1
    return count


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, CCW, collinear points dropped."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) == 1:
        return pts
    # np.unique sorts lexicographically already
    def chain(seq):
        out = []
        for pt in seq:
            while len(out) >= 2:
                o = (out[-1][0] - out[-2][0]) * (pt[1] - out[-2][1]) - \
                    (out[-1][1] - out[-2][1]) * (pt[0] - out[-2][0])
                if o <= 0:
                    out.pop()
                else:
                    break
            out.append(tuple(pt))
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        hull = lower
    return np.asarray(hull, dtype=float)


def min_enclosing_circle(points) -> Circle:
    """Smallest circle containing every point (Welzl, deterministic order)."""
    pts = [tuple(map(float, q)) for q in np.asarray(points, dtype=float).reshape(-1, 2)]
    if not pts:
        raise InvalidInputError("min_enclosing_circle of empty point set")

    def dist2(a, b):
        return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2

    def inside(c, q):
        return dist2(c.center, q) <= (c.radius + _MEC_EPS * (1.0 + c.radius)) ** 2

    def circle2(a, b):
        cx, cy = (a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0
        return Circle((cx, cy), math.sqrt(dist2((cx, cy), a)))

    def circle3(a, b, c):
        d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if abs(d) < 1e-14:
            # collinear: span the farthest pair
            cands = [circle2(a, b), circle2(a, c), circle2(b, c)]
            return max(cands, key=lambda s: s.radius)
        ux = ((a[0] ** 2 + a[1] ** 2) * (b[1] - c[1])
              + (b[0] ** 2 + b[1] ** 2) * (c[1] - a[1])
              + (c[0] ** 2 + c[1] ** 2) * (a[1] - b[1])) / d
        uy = ((a[0] ** 2 + a[1] ** 2) * (c[0] - b[0])
              + (b[0] ** 2 + b[1] ** 2) * (a[0] - c[0])
              + (c[0] ** 2 + c[1] ** 2) * (b[0] - a[0])) / d
        center = (ux, uy)
        r = max(math.sqrt(dist2(center, q)) for q in (a, b, c))
        return Circle(center, r)

    c = Circle(pts[0], 0.0)
    for i, p in enumerate(pts[1:], start=1):
        if inside(c, p):
            continue
        c = Circle(p, 0.0)
        for j, q in enumerate(pts[:i]):
            if inside(c, q):
                continue
            c = circle2(p, q)
            for r in pts[:j]:
                if not inside(c, r):
                    c = circle3(p, q, r)
    return c


def anisotropy_index(p: Polygon) -> float:
    """Footprint area over the area of its minimal circumscribed circle."""
    circ = min_enclosing_circle(p.exterior)
    return footprint_area(p) / (math.pi * circ.radius ** 2)


def longest_axis_length(p: Polygon) -> float:
    """Diameter of the minimal circumscribed circle, in m."""
    return 2.0 * min_enclosing_circle(p.exterior).radius


@dataclass(frozen=True)
class BoundingBox:
    """Minimum-area oriented rectangle.

    corners p1..p4 are in CCW ring order; side_a connects p1-p2 and
    side_b connects p1-p4 (the side incident to p1 perpendicular to a).
    """

    corners: tuple[tuple[float, float], ...]
    side_a: float
    side_b: float

    @property
    def area(self) -> float:
        return self.side_a * self.side_b


def min_area_bounding_box(p: Polygon) -> BoundingBox:
    """Rotating-calipers minimum-area rectangle over the convex hull."""
    hull = convex_hull(p.exterior)
    if len(hull) < 2:
        raise InvalidGeometryError("bounding box of a single point")
    best = None
    n = len(hull)
    for i in range(n):
        e = hull[(i + 1) % n] - hull[i]
        norm = math.hypot(e[0], e[1])
        if norm < 1e-15:
            continue
        u = e / norm
        v = np.array([-u[1], u[0]])
        pu = hull @ u
        pv = hull @ v
        a = float(pu.max() - pu.min())
        b = float(pv.max() - pv.min())
        if best is None or a * b < best[0] - 1e-15:
            c1 = pu.min() * u + pv.min() * v
            c2 = pu.max() * u + pv.min() * v
            c3 = pu.max() * u + pv.max() * v
            c4 = pu.min() * u + pv.max() * v
            best = (a * b, (tuple(c1), tuple(c2), tuple(c3), tuple(c4)), a, b)
    if best is None:
        raise InvalidGeometryError("degenerate hull for bounding box")
    _, corners, a, b = best
    return BoundingBox(corners, a, b)


def elongation(p: Polygon) -> float:
    """Short over long side of the minimum-area bounding box, in (0, 1]."""
    bb = min_area_bounding_box(p)
    lo, hi = sorted((bb.side_a, bb.side_b))
    if hi <= 0:
        raise InvalidGeometryError("degenerate bounding box")
    return lo / hi


def convexity(p: Polygon) -> float:
    """Footprint area over convex-hull area, in (0, 1]."""
    hull = convex_hull(p.exterior)
    hull_area = ring_signed_area(hull)
    if hull_area <= 0:
        raise InvalidGeometryError("degenerate convex hull")
    return footprint_area(p) / hull_area


def azimuth(x, y) -> float:
    """Clockwise angle in degrees from north (+y) to the vector y - x."""
    dx, dy = y[0] - x[0], y[1] - x[1]
    if dx == 0 and dy == 0:
        raise InvalidInputError("azimuth of coincident points")
    return math.degrees(math.atan2(dx, dy)) % 360.0


def orientation(p: Polygon) -> float:
    """Deviation of the bounding box from cardinal alignment, 0..45 degrees.

    Measured on the longer bounding-box side; exact ties take the p1-p2
    side.
    """
    bb = min_area_bounding_box(p)
    p1, p2, _, p4 = bb.corners
    ref = p2 if bb.side_a >= bb.side_b else p4
    az = azimuth(p1, ref)
    return abs(((az + 45.0) % 90.0) - 45.0)


# ---------------------------------------------------------------------------
# Exact integer helpers (shared with outline merging and triangulation)
# ---------------------------------------------------------------------------

def snap_ring(ring: np.ndarray, grid: float = SNAP_GRID_M) -> list[tuple[int, int]]:
    """Snap ring vertices to an integer grid, dropping collapsed duplicates."""
    snapped = [(int(round(x / grid)), int(round(y / grid))) for x, y in ring]
    out = []
    for pt in snapped:
        if not out or pt != out[-1]:
            out.append(pt)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def _collinear_overlap(a1, a2, b1, b2) -> float:
    """Overlap length (grid units) of two collinear integer segments; 0 if
    the segments are not collinear or do not overlap in more than a point."""
    dax, day = a2[0] - a1[0], a2[1] - a1[1]
    # b endpoints must lie on line(a)
    if dax * (b1[1] - a1[1]) - day * (b1[0] - a1[0]) != 0:
        return 0.0
    if dax * (b2[1] - a1[1]) - day * (b2[0] - a1[0]) != 0:
        return 0.0
    la2 = dax * dax + day * day
    if la2 == 0:
        return 0.0
    ta1, ta2 = 0, la2
    tb1 = dax * (b1[0] - a1[0]) + day * (b1[1] - a1[1])
    tb2 = dax * (b2[0] - a1[0]) + day * (b2[1] - a1[1])
    lo = max(min(ta1, ta2), min(tb1, tb2))
    hi = min(max(ta1, ta2), max(tb1, tb2))
    if hi <= lo:
        return 0.0
    return (hi - lo) / math.sqrt(la2)


def adjacency_stats(p: Polygon, candidates) -> tuple[int, float]:
    """Count of wall-sharing neighbors and total shared-wall length in m.

    Boundaries are snapped to a 1 mm grid before the overlap test;
    shared pieces shorter than MIN_WALL_OVERLAP_M are ignored.
    """
    mine = snap_ring(p.exterior)
    n = len(mine)
    my_segs = [(mine[i], mine[(i + 1) % n]) for i in range(n)]
    count = 0
    total = 0.0
    for cand in candidates:
        ring = snap_ring(cand.exterior)
        m = len(ring)
        shared = 0.0
        for s1 in my_segs:
            for j in range(m):
                piece = _collinear_overlap(s1[0], s1[1], ring[j], ring[(j + 1) % m])
                piece_m = piece * SNAP_GRID_M
                if piece_m >= MIN_WALL_OVERLAP_M:
                    shared += piece_m
        if shared > 0.0:
            count += 1
            total += shared
    return count, total


# ---------------------------------------------------------------------------
# Outline merging for building blocks
# ---------------------------------------------------------------------------

def _split_edges_at_vertices(edges, vertices):
    """Split directed integer edges at other vertices lying exactly on them."""
    out = []
    for a, b in edges:
        dx, dy = b[0] - a[0], b[1] - a[1]
        xs = [v for v in vertices
              if v != a and v != b
              and min(a[0], b[0]) <= v[0] <= max(a[0], b[0])
              and min(a[1], b[1]) <= v[1] <= max(a[1], b[1])
              and dx * (v[1] - a[1]) - dy * (v[0] - a[0]) == 0]
        if not xs:
            out.append((a, b))
            continue
        xs.sort(key=lambda v: dx * (v[0] - a[0]) + dy * (v[1] - a[1]))
        prev = a
        for v in xs:
            out.append((prev, v))
            prev = v
        out.append((prev, b))
    return out


def merge_wall_sharing(polys, ids=None) -> list[Polygon]:
    """Union of wall-sharing polygons via boundary-segment cancellation.

    Works on the 1 mm snap grid: interior walls are traversed once in each
    direction and cancel; the surviving segments stitch into the merged
    outline(s). Holes (courtyards) come out as CW rings and are attached
    to the shell that contains them. Raises InvalidGeometryError when the
    boundary does not cancel cleanly (overlapping interiors).
    """
    if ids is None:
        ids = list(range(len(polys)))
    edges = []
    vertices = set()
    for p in polys:
        for ring in (p.exterior, *p.holes):
            snapped = snap_ring(ring)
            if len(snapped) < 3:
                raise InvalidGeometryError(f"degenerate ring after snapping in {ids}")
            vertices.update(snapped)
            for i in range(len(snapped)):
                edges.append((snapped[i], snapped[(i + 1) % len(snapped)]))
    edges = _split_edges_at_vertices(edges, vertices)

    counts: dict[tuple, int] = {}
    for e in edges:
        counts[e] = counts.get(e, 0) + 1
    boundary = []
    for (a, b), c in sorted(counts.items()):
        back = counts.get((b, a), 0)
        net = c - back
        if net > 1:
            raise InvalidGeometryError(
                f"overlapping boundaries while merging buildings {ids}")
        if net == 1:
            boundary.append((a, b))

    out_edges: dict[tuple, list[tuple]] = {}
    for a, b in boundary:
        out_edges.setdefault(a, []).append(b)
    for v in out_edges:
        out_edges[v].sort()

    rings = []
    used = set()
    for start in sorted(out_edges):
        for first in out_edges[start]:
            if (start, first) in used:
                continue
            ring = [start]
            prev, cur = start, first
            used.add((start, first))
            while cur != start:
                ring.append(cur)
                nxts = [b for b in out_edges.get(cur, []) if (cur, b) not in used]
                if not nxts:
                    raise InvalidGeometryError(
                        f"open boundary while merging buildings {ids}")
                if len(nxts) == 1:
                    nxt = nxts[0]
                else:
                    # pinch vertex: continue with the sharpest left turn so
                    # each stitched ring stays simple
                    ax, ay = cur[0] - prev[0], cur[1] - prev[1]
                    def turn(b):
                        bx, by = b[0] - cur[0], b[1] - cur[1]
                        return math.atan2(ax * by - ay * bx, ax * bx + ay * by)
                    nxt = max(nxts, key=turn)
                used.add((cur, nxt))
                prev, cur = cur, nxt
            rings.append(ring)

    shells, holes = [], []
    for ring in rings:
        arr = np.asarray(ring, dtype=float) * SNAP_GRID_M
        if ring_signed_area(arr) > 0:
            shells.append(arr)
        else:
            holes.append(arr)
    if not shells:
        raise InvalidGeometryError(f"no outline produced merging buildings {ids}")

    parts = []
    for shell in shells:
        own = [h for h in holes
               if point_in_ring((h[0][0], h[0][1]), shell) != 0]
        parts.append(Polygon(shell, tuple(own)))
    return parts


# ---------------------------------------------------------------------------
# Point / circle containment utilities
# ---------------------------------------------------------------------------

def point_in_ring(pt, ring: np.ndarray) -> int:
    """1 if pt is strictly inside the ring, 0 outside, 2 on the boundary."""
    x, y = pt
    inside = False
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        # boundary check
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if cross == 0 and min(x1, x2) <= x <= max(x1, x2) and min(y1, y2) <= y <= max(y1, y2):
            return 2
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
    return 1 if inside else 0


def point_in_polygon(pt, p: Polygon) -> bool:
    """True if pt lies inside the exterior and outside every hole
    (boundary points count as inside)."""
    w = point_in_ring(pt, p.exterior)
    if w == 0:
        return False
    if w == 2:
        return True
    for h in p.holes:
        if point_in_ring(pt, h) == 1:
            return False
    return True


def _point_segment_dist(px, py, x1, y1, x2, y2) -> float:
    dx, dy = x2 - x1, y2 - y1
    l2 = dx * dx + dy * dy
    if l2 == 0:
        return math.hypot(px - x1, py - y1)
    t = max(0.0, min(1.0, ((px - x1) * dx + (py - y1) * dy) / l2))
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


def polygon_circle_intersects(p: Polygon, center, radius: float) -> bool:
    """True if the polygon and the closed disc share at least one point."""
    cx, cy = center
    x0, y0, x1, y1 = p.bounds
    if cx < x0 - radius or cx > x1 + radius or cy < y0 - radius or cy > y1 + radius:
        return False
    if point_in_polygon(center, p):
        return True
    for ring in (p.exterior, *p.holes):
        n = len(ring)
        for i in range(n):
            a, b = ring[i], ring[(i + 1) % n]
            if _point_segment_dist(cx, cy, a[0], a[1], b[0], b[1]) <= radius:
                return True
    return False
