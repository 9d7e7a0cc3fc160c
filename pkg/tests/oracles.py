"""Independent brute-force oracles used by the test suite.

Everything here is deliberately naive: enumeration, rejection sampling,
and direct formula evaluation. None of it shares code with the package
paths it checks.
"""

from __future__ import annotations

import math

import numpy as np


def shoelace(ring) -> float:
    a = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        a += x1 * y2 - x2 * y1
    return a / 2.0


def mc_area(ring, n_samples: int, seed: int) -> float:
    """Monte-Carlo rejection estimate of a simple polygon's area."""
    rng = np.random.default_rng(seed)
    pts = np.asarray(ring, dtype=float)
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    xs = rng.uniform(x0, x1, n_samples)
    ys = rng.uniform(y0, y1, n_samples)
    crossings = np.zeros(n_samples, dtype=np.int64)
    for i in range(len(pts)):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % len(pts)]
        straddles = (ay > ys) != (by > ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = ax + (ys - ay) * (bx - ax) / (by - ay)
        crossings += straddles & (xs < xi)
    hits = int((crossings % 2 == 1).sum())
    return hits / n_samples * (x1 - x0) * (y1 - y0)


def corner_count_oracle(ring) -> int:
    """Count corners by direct interior-angle enumeration."""
    n = len(ring)
    corners = 0
    for i in range(n):
        ax, ay = ring[i - 1]
        bx, by = ring[i]
        cx, cy = ring[(i + 1) % n]
        u = (bx - ax, by - ay)
        v = (cx - bx, cy - by)
        cross = u[0] * v[1] - u[1] * v[0]
        dot = u[0] * v[0] + u[1] * v[1]
        turn_deg = math.degrees(math.atan2(cross, dot))
        interior = 180.0 - turn_deg
        if interior <= 170.0 or interior >= 190.0:
            corners += 1
    return corners


def mec_brute_force(points) -> tuple[tuple[float, float], float]:
    """O(n^3) minimal enclosing circle: try every 2- and 3-point circle."""
    pts = [tuple(map(float, p)) for p in points]

    def covers(c, r):
        r_chk = r + 1e-9 * (1.0 + r)
        return all((p[0] - c[0]) ** 2 + (p[1] - c[1]) ** 2 <= r_chk * r_chk
                   for p in pts)

    best = None
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            cx = (pts[i][0] + pts[j][0]) / 2
            cy = (pts[i][1] + pts[j][1]) / 2
            r = math.dist((cx, cy), pts[i])
            if covers((cx, cy), r) and (best is None or r < best[1]):
                best = ((cx, cy), r)
            for k in range(j + 1, n):
                ax, ay = pts[i]
                bx, by = pts[j]
                ex, ey = pts[k]
                d = 2 * (ax * (by - ey) + bx * (ey - ay) + ex * (ay - by))
                if abs(d) < 1e-12:
                    continue
                ux = ((ax * ax + ay * ay) * (by - ey) + (bx * bx + by * by) * (ey - ay)
                      + (ex * ex + ey * ey) * (ay - by)) / d
                uy = ((ax * ax + ay * ay) * (ex - bx) + (bx * bx + by * by) * (ax - ex)
                      + (ex * ex + ey * ey) * (bx - ax)) / d
                r = max(math.dist((ux, uy), pts[i]),
                        math.dist((ux, uy), pts[j]),
                        math.dist((ux, uy), pts[k]))
                if covers((ux, uy), r) and (best is None or r < best[1]):
                    best = ((ux, uy), r)
    if best is None:  # single point
        best = (pts[0], 0.0)
    return best


# --- Delaunay oracle -------------------------------------------------------

_GRID = 1e-6


def _snap(points):
    return [(int(round(x / _GRID)), int(round(y / _GRID)))
            for x, y in np.asarray(points, dtype=float)]


def _orient_i(a, b, c):
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def _incircle_i(a, b, c, d):
    # requires (a, b, c) CCW
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    v = (adx * (bdy * cd - bd * cdy)
         - ady * (bdx * cd - bd * cdx)
         + ad * (bdx * cdy - bdy * cdx))
    return (v > 0) - (v < 0)


def _hull_ring(idx, pts):
    """Convex-hull ring (indices, CCW) of distinct points, no 3 collinear."""
    order = sorted(idx, key=lambda i: pts[i])

    def chain(seq):
        out = []
        for i in seq:
            while len(out) >= 2 and _orient_i(pts[out[-2]], pts[out[-1]], pts[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(order[::-1])
    return lower[:-1] + upper[:-1]


def delaunay_oracle(points) -> set[tuple[int, int]]:
    """Delaunay edge set via exhaustive empty-circumcircle triples.

    Cocircular facets are completed canonically: facet ring edges plus a
    fan from the lexicographically smallest facet vertex — the same rule
    the implementation documents.
    """
    pts = _snap(points)
    n = len(pts)
    assert len(set(pts)) == n
    order = sorted(range(n), key=lambda i: pts[i])
    if n == 2:
        return {(0, 1)}
    if all(_orient_i(pts[order[0]], pts[order[1]], pts[order[i]]) == 0
           for i in range(2, n)):
        return {tuple(sorted((order[i], order[i + 1]))) for i in range(n - 1)}

    edges: set[tuple[int, int]] = set()
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a, b, c = pts[i], pts[j], pts[k]
                o = _orient_i(a, b, c)
                if o == 0:
                    continue
                if o < 0:
                    a, b = b, a
                on_circle = [i, j, k]
                empty = True
                for l in range(n):
                    if l in (i, j, k):
                        continue
                    s = _incircle_i(a, b, c, pts[l])
                    if s > 0:
                        empty = False
                        break
                    if s == 0:
                        on_circle.append(l)
                if not empty:
                    continue
                ring = _hull_ring(on_circle, pts)
                for t in range(len(ring)):
                    u, v = ring[t], ring[(t + 1) % len(ring)]
                    edges.add((u, v) if u < v else (v, u))
                m = min(on_circle, key=lambda q: pts[q])
                for w in on_circle:
                    if w != m:
                        edges.add((m, w) if m < w else (w, m))
    return edges


def bfs_hops(adj: dict[int, set[int]], start: int, max_hops: int) -> set[int]:
    """Plain breadth-first search, returning nodes within max_hops."""
    seen = {start}
    frontier = [start]
    for _ in range(max_hops):
        nxt = []
        for u in frontier:
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


def random_simple_polygon(rng: np.random.Generator, n: int, radius: float = 10.0):
    """Star-shaped simple polygon: jittered angles (every gap < pi),
    random radii."""
    base = np.arange(n) * (2 * math.pi / n)
    angles = base + rng.uniform(0.02, 0.98, n) * (2 * math.pi / n)
    radii = rng.uniform(0.2 * radius, radius, n)
    cx, cy = rng.uniform(-5, 5, 2)
    return [(cx + r * math.cos(a), cy + r * math.sin(a))
            for r, a in zip(radii, angles)]
