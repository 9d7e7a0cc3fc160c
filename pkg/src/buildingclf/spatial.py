"""Bulk-loaded rectangle tree over building bounding boxes.

Candidate hits from the tree are refined with exact polygon tests, so a
circle query returns exactly the buildings whose polygon intersects the
closed disc.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidStateError
from .geom import Polygon, polygon_circle_intersects

_LEAF_SIZE = 16


class _Node:
    __slots__ = ("bounds", "children", "items")

    def __init__(self, bounds, children=None, items=None):
        self.bounds = bounds
        self.children = children
        self.items = items


def _union_bounds(bounds_list):
    arr = np.asarray(bounds_list, dtype=float)
    return (arr[:, 0].min(), arr[:, 1].min(), arr[:, 2].max(), arr[:, 3].max())


class SpatialIndex:
    """STR-packed R-tree keyed by integer positions into a building list."""

    def __init__(self, polygons: list[Polygon]):
        self._polygons = list(polygons)
        if not self._polygons:
            self._root = None
            return
        entries = [(p.bounds, i) for i, p in enumerate(self._polygons)]
        self._root = self._pack(entries)

    def __len__(self) -> int:
        return len(self._polygons)

    def _pack(self, entries) -> _Node:
        if len(entries) <= _LEAF_SIZE:
            return _Node(_union_bounds([b for b, _ in entries]),
                         items=[i for _, i in entries])
        # Sort-Tile-Recursive: slice by x, then pack slices by y
        entries = sorted(entries, key=lambda e: (e[0][0] + e[0][2]))
        n_leaves = -(-len(entries) // _LEAF_SIZE)
        n_slices = max(1, int(np.ceil(np.sqrt(n_leaves))))
        per_slice = -(-len(entries) // n_slices)
        children = []
        for s in range(0, len(entries), per_slice):
            sl = sorted(entries[s:s + per_slice],
                        key=lambda e: (e[0][1] + e[0][3]))
            for t in range(0, len(sl), _LEAF_SIZE):
                chunk = sl[t:t + _LEAF_SIZE]
                children.append(_Node(_union_bounds([b for b, _ in chunk]),
                                      items=[i for _, i in chunk]))
        while len(children) > _LEAF_SIZE:
            children = self._group(children)
        return _Node(_union_bounds([c.bounds for c in children]),
                     children=children)

    def _group(self, nodes):
        nodes = sorted(nodes, key=lambda n: (n.bounds[0] + n.bounds[2]))
        n_groups = -(-len(nodes) // _LEAF_SIZE)
        n_slices = max(1, int(np.ceil(np.sqrt(n_groups))))
        per_slice = -(-len(nodes) // n_slices)
        out = []
        for s in range(0, len(nodes), per_slice):
            sl = sorted(nodes[s:s + per_slice],
                        key=lambda n: (n.bounds[1] + n.bounds[3]))
            for t in range(0, len(sl), _LEAF_SIZE):
                chunk = sl[t:t + _LEAF_SIZE]
                out.append(_Node(_union_bounds([c.bounds for c in chunk]),
                                 children=chunk))
        return out

    def _query_rect(self, x0, y0, x1, y1) -> list[int]:
        if self._root is None:
            return []
        hits = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            bx0, by0, bx1, by1 = node.bounds
            if bx0 > x1 or bx1 < x0 or by0 > y1 or by1 < y0:
                continue
            if node.items is not None:
                for i in node.items:
                    px0, py0, px1, py1 = self._polygons[i].bounds
                    if px0 <= x1 and px1 >= x0 and py0 <= y1 and py1 >= y0:
                        hits.append(i)
            else:
                stack.extend(node.children)
        return hits

    def query_rect(self, x0: float, y0: float, x1: float, y1: float) -> list[int]:
        """Indices of buildings whose bounding box intersects the rectangle."""
        return sorted(self._query_rect(x0, y0, x1, y1))

    def query_circle(self, center, radius: float) -> list[int]:
        """Indices of buildings whose polygon intersects the closed disc."""
        if self._root is None:
            raise InvalidStateError("query on an empty spatial index")
        cx, cy = center
        cands = self._query_rect(cx - radius, cy - radius, cx + radius, cy + radius)
        return sorted(i for i in cands
                      if polygon_circle_intersects(self._polygons[i], center, radius))

    def count_circle(self, center, radius: float) -> int:
        return len(self.query_circle(center, radius))
