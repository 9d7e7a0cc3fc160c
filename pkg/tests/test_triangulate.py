import numpy as np
import pytest

from buildingclf.errors import InvalidInputError
from buildingclf.triangulate import delaunay_edges

from oracles import delaunay_oracle


def test_two_points():
    assert delaunay_edges([(0, 0), (5, 3)]) == [(0, 1)]


def test_single_triangle():
    edges = delaunay_edges([(0, 0), (4, 0), (1, 3)])
    assert edges == [(0, 1), (0, 2), (1, 2)]


def test_unit_square_five_edges():
    # cocircular quadruple: 4 sides plus exactly one diagonal
    edges = delaunay_edges([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert len(edges) == 5
    # canonical rule: diagonal is incident to the lex-smallest point (0,0)
    assert (0, 2) in edges
    assert edges == sorted(delaunay_oracle([(0, 0), (1, 0), (1, 1), (0, 1)]))


def test_collinear_points_form_path():
    pts = [(3, 3), (0, 0), (2, 2), (1, 1)]
    edges = delaunay_edges(pts)
    assert edges == sorted([(0, 2), (1, 3), (2, 3)])


def test_coincident_points_rejected():
    with pytest.raises(InvalidInputError):
        delaunay_edges([(0, 0), (0, 0), (1, 1)])


def test_fewer_than_two_points_rejected():
    with pytest.raises(InvalidInputError):
        delaunay_edges([(0, 0)])


def test_matches_oracle_on_random_sets():
    rng = np.random.default_rng(101)
    for _ in range(120):
        n = int(rng.integers(3, 13))
        pts = rng.uniform(0, 100, size=(n, 2)).round(3)
        while len({(round(x, 6), round(y, 6)) for x, y in pts}) != n:
            pts = rng.uniform(0, 100, size=(n, 2)).round(3)
        edges = set(delaunay_edges(pts))
        assert edges == delaunay_oracle(pts), pts


def test_matches_oracle_on_grids():
    rng = np.random.default_rng(202)
    for _ in range(60):
        # integer grids maximize cocircular ties
        w = int(rng.integers(2, 5))
        h = int(rng.integers(2, 4))
        pts = [(float(x), float(y)) for x in range(w) for y in range(h)]
        keep = rng.random(len(pts)) < 0.85
        pts = [p for p, k in zip(pts, keep) if k]
        if len(pts) < 3:
            continue
        assert set(delaunay_edges(pts)) == delaunay_oracle(pts), pts


def test_planarity_bound():
    rng = np.random.default_rng(303)
    for _ in range(40):
        n = int(rng.integers(3, 60))
        pts = rng.uniform(0, 500, size=(n, 2))
        edges = delaunay_edges(pts)
        assert len(edges) <= 3 * n - 6 or n < 3


def test_connected_output():
    rng = np.random.default_rng(404)
    for _ in range(20):
        n = int(rng.integers(2, 40))
        pts = rng.uniform(0, 200, size=(n, 2))
        edges = delaunay_edges(pts)
        adj = {i: set() for i in range(n)}
        for i, j in edges:
            adj[i].add(j)
            adj[j].add(i)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        assert len(seen) == n


def test_deterministic_under_input_order():
    rng = np.random.default_rng(505)
    pts = [(float(x), float(y)) for x in range(4) for y in range(3)]
    base = {frozenset((tuple(pts[i]), tuple(pts[j])))
            for i, j in delaunay_edges(pts)}
    for _ in range(5):
        perm = rng.permutation(len(pts))
        shuffled = [pts[i] for i in perm]
        got = {frozenset((tuple(shuffled[i]), tuple(shuffled[j])))
               for i, j in delaunay_edges(shuffled)}
        assert got == base


def test_empty_circumcircle_property():
    rng = np.random.default_rng(606)
    for _ in range(20):
        n = int(rng.integers(4, 15))
        pts = rng.uniform(0, 50, size=(n, 2))
        edges = set(delaunay_edges(pts))
        oracle = delaunay_oracle(pts)
        assert edges == oracle


def test_large_set_runs():
    rng = np.random.default_rng(707)
    pts = rng.uniform(0, 2000, size=(2000, 2))
    edges = delaunay_edges(pts)
    assert len(edges) <= 3 * 2000 - 6
    assert len(edges) >= 2000  # dense planar graph
