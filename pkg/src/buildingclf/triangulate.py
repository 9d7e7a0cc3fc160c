"""Delaunay triangulation with exact integer predicates.

Input coordinates (meters) are snapped to a 1 micrometer grid; all
orientation and in-circle tests then run in exact integer arithmetic, so
the edge set is fully deterministic. Cocircular ties are resolved by a
canonical rule: every maximal cocircular facet is triangulated as a fan
from its lexicographically smallest vertex. Degenerate inputs (two
points, or all points collinear) yield the path that connects
consecutive points in lexicographic order.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

# 1 unit = 1e-6 m; callers deduplicate coincident points on this grid.
POINT_GRID_M = 1e-6


def snap_points(points) -> list[tuple[int, int]]:
    """Snap float coordinates (m) to the integer micrometer grid."""
    arr = np.asarray(points, dtype=float)
    return [(int(round(x / POINT_GRID_M)), int(round(y / POINT_GRID_M)))
            for x, y in arr]


def _orient(a, b, c) -> int:
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def _incircle(a, b, c, d) -> int:
    """Sign of the in-circle determinant; (a, b, c) must be CCW.

    > 0: d strictly inside the circumcircle, 0: cocircular, < 0: outside.
    """
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


class _Triangulation:
    """Incremental construction over lexicographically sorted points."""

    def __init__(self, pts: list[tuple[int, int]]):
        self.pts = pts
        self.tris: dict[int, tuple[int, int, int]] = {}
        self.edge_tri: dict[tuple[int, int], set[int]] = {}
        self.next_tid = 0

    def _key(self, u, v):
        return (u, v) if u < v else (v, u)

    def add_tri(self, a, b, c) -> int:
        o = _orient(self.pts[a], self.pts[b], self.pts[c])
        if o == 0:
            raise InvalidInputError("degenerate triangle during construction")
        if o < 0:
            a, b = b, a
        tid = self.next_tid
        self.next_tid += 1
        self.tris[tid] = (a, b, c)
        for u, v in ((a, b), (b, c), (c, a)):
            self.edge_tri.setdefault(self._key(u, v), set()).add(tid)
        return tid

    def remove_tri(self, tid):
        a, b, c = self.tris.pop(tid)
        for u, v in ((a, b), (b, c), (c, a)):
            k = self._key(u, v)
            self.edge_tri[k].discard(tid)
            if not self.edge_tri[k]:
                del self.edge_tri[k]

    def legalize(self, seed_edges):
        stack = list(seed_edges)
        while stack:
            key = stack.pop()
            tids = self.edge_tri.get(key)
            if tids is None or len(tids) != 2:
                continue
            t1, t2 = sorted(tids)
            u, v = key
            c = next(x for x in self.tris[t1] if x not in key)
            d = next(x for x in self.tris[t2] if x not in key)
            a1, b1, c1 = self.tris[t1]
            # flip only on a strict violation; cocircular stays put and is
            # canonicalized afterwards
            if _incircle(self.pts[a1], self.pts[b1], self.pts[c1], self.pts[d]) > 0:
                self.remove_tri(t1)
                self.remove_tri(t2)
                self.add_tri(c, d, u)
                self.add_tri(c, d, v)
                for e in ((u, c), (u, d), (v, c), (v, d)):
                    stack.append(self._key(*e))


def _build_triangulation(pts: list[tuple[int, int]], order: list[int]) -> _Triangulation:
    """pts must be distinct; order is the lex ordering of indices."""
    tri = _Triangulation(pts)
    # leading collinear run
    k = 2
    while k < len(order) and _orient(pts[order[0]], pts[order[1]], pts[order[k]]) == 0:
        k += 1
    chain = [order[i] for i in range(k)]
    p = order[k]
    side = _orient(pts[chain[0]], pts[chain[-1]], pts[p])
    for i in range(len(chain) - 1):
        tri.add_tri(chain[i], chain[i + 1], p)
    if side > 0:
        hull = chain + [p]
    else:
        hull = [chain[0], p] + chain[:0:-1]

    # hull as a circular doubly-linked list, CCW
    nxt = {hull[i]: hull[(i + 1) % len(hull)] for i in range(len(hull))}
    prv = {v: u for u, v in nxt.items()}
    last = p

    for idx in order[k + 1:]:
        q = pts[idx]
        # locate one visible hull edge, scanning from the last insertion
        start = last
        while _orient(pts[start], pts[nxt[start]], q) >= 0:
            start = nxt[start]
            if start == last:
                raise InvalidInputError("point inside hull during sweep")
        # back up to the start of the contiguous visible arc
        while _orient(pts[prv[start]], pts[start], q) < 0:
            start = prv[start]
        seeds = []
        end = start
        while True:
            after = nxt[end]
            if _orient(pts[end], pts[after], q) >= 0:
                break
            tri.add_tri(end, after, idx)
            seeds.append(tri._key(end, after))
            end = after
        # relink hull: start -> idx -> end, dropping interior arc vertices
        w = nxt[start]
        while w != end:
            w2 = nxt[w]
            del nxt[w], prv[w]
            w = w2
        nxt[start] = idx
        prv[idx] = start
        nxt[idx] = end
        prv[end] = idx
        tri.legalize(seeds)
        last = idx
    return tri


def _canonical_edges(tri: _Triangulation) -> set[tuple[int, int]]:
    """Edge set with cocircular facets re-fanned from their lex-min vertex."""
    pts = tri.pts
    tie_edges = []
    for key, tids in tri.edge_tri.items():
        if len(tids) != 2:
            continue
        t1, t2 = sorted(tids)
        a1, b1, c1 = tri.tris[t1]
        d = next(x for x in tri.tris[t2] if x not in key)
        if _incircle(pts[a1], pts[b1], pts[c1], pts[d]) == 0:
            tie_edges.append((key, t1, t2))

    parent = {tid: tid for tid in tri.tris}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, t1, t2 in tie_edges:
        r1, r2 = find(t1), find(t2)
        if r1 != r2:
            parent[r1] = r2

    tie_keys = {key for key, _, _ in tie_edges}
    components: dict[int, list[int]] = {}
    for tid in tri.tris:
        components.setdefault(find(tid), []).append(tid)

    edges: set[tuple[int, int]] = set()
    for key in tri.edge_tri:
        if key not in tie_keys:
            edges.add(key)
    for members in components.values():
        if len(members) < 2:
            continue  # strict triangle, not a cocircular facet
        verts = sorted({v for tid in members for v in tri.tris[tid]},
                       key=lambda i: pts[i])
        m = verts[0]
        for w in verts[1:]:
            edges.add((m, w) if m < w else (w, m))
    return edges


def delaunay_edges(points) -> list[tuple[int, int]]:
    """Delaunay edge set over 2D points, as sorted index pairs (i < j).

    Points closer than the micrometer grid must be deduplicated by the
    caller; coincident snapped points raise InvalidInputError, as do
    inputs with fewer than two distinct points.
    """
    pts = snap_points(points)
    if len(pts) < 2:
        raise InvalidInputError("triangulation needs >= 2 points")
    if len(set(pts)) != len(pts):
        raise InvalidInputError("coincident points; deduplicate before triangulating")
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    if len(pts) == 2:
        return [(0, 1)]
    collinear = all(
        _orient(pts[order[0]], pts[order[1]], pts[order[i]]) == 0
        for i in range(2, len(order)))
    if collinear:
        return sorted(tuple(sorted((order[i], order[i + 1])))
                      for i in range(len(order) - 1))
    tri = _build_triangulation(pts, order)
    return sorted(_canonical_edges(tri))
