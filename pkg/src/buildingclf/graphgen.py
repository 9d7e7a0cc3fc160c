"""Localized-subgraph dataset generation.

Centers are sampled from labeled buildings; a circular buffer grows in
10 m steps until it intersects at least n_sub buildings; edges come from
the Delaunay triangulation of the member centroids and carry raw metric
lengths. Split masks keep train/val/test label sets disjoint across
overlapping subgraphs, with subgraph centers exempt.
"""

from __future__ import annotations

import multiprocessing as mp
from dataclasses import dataclass

import numpy as np

from . import schema
from .errors import (
    DataError,
    InvalidConfigError,
    InvalidInputError,
    InvalidStateError,
    UndefinedValueError,
)
from .feature import BuildingRecord, NormalizationStats, scale_edge_feature
from .spatial import SpatialIndex
from .triangulate import POINT_GRID_M, delaunay_edges

BUFFER_START_M = 10.0
BUFFER_STEP_M = 10.0
DEFAULT_N_SUB = 20
# raw length assigned to edges between buildings with coincident centroids
EPSILON_EDGE_M = 1e-6

FLAG_NONE, FLAG_TRAIN, FLAG_VAL, FLAG_TEST = 0, 1, 2, 3

MODE_DISTANCE = "distance"
MODE_TWO_HOP = "two_hop"
MODE_UNCONSTRAINED = "unconstrained"
MODES = (MODE_DISTANCE, MODE_TWO_HOP, MODE_UNCONSTRAINED)


@dataclass
class LocalizedSubgraph:
    """One training unit: a small graph around a labeled center building."""

    center_id: str
    node_ids: list[str]
    node_features: np.ndarray  # (n, 69)
    edges: np.ndarray          # (m, 2) local indices, i < j
    edge_len: np.ndarray       # (m,) raw centroid distances, m
    labels: np.ndarray         # (n,) class ids, -1 where unlabeled
    split_flags: np.ndarray    # (n,) FLAG_* codes
    center_index: int
    split: int = FLAG_NONE     # subgraph-level assignment

    def scaled_edge_features(self, xi: float) -> np.ndarray:
        return np.array([scale_edge_feature(float(l), xi) for l in self.edge_len])

    def edge_tuples(self, xi: float) -> list[tuple[int, int, float, float]]:
        feats = self.scaled_edge_features(xi)
        return [(int(i), int(j), float(l), float(c))
                for (i, j), l, c in zip(self.edges, self.edge_len, feats)]

    def n_nodes(self) -> int:
        return len(self.node_ids)


@dataclass
class GraphDataset:
    subgraphs: list[LocalizedSubgraph]
    manifest: dict
    norm_stats: NormalizationStats | None = None
    task: str = schema.TASK_COMBINED
    label_policy: str = "all"

    def num_classes(self) -> int:
        return schema.task_num_classes(self.task)


def grow_buffer(center: BuildingRecord, index: SpatialIndex,
                n_sub: int) -> tuple[float, list[int]]:
    """Smallest 10 m radius multiple whose buffer intersects >= n_sub
    buildings (or every indexed building when the region is smaller)."""
    if n_sub < 1:
        raise InvalidConfigError("n_sub must be >= 1")
    if len(index) == 0:
        raise InvalidStateError("empty spatial index")
    radius = BUFFER_START_M
    while True:
        ids = index.query_circle(center.centroid, radius)
        if len(ids) >= n_sub or len(ids) == len(index):
            return radius, ids
        radius += BUFFER_STEP_M


def _dedupe_centroids(centroids: np.ndarray) -> tuple[list[int], dict[int, int]]:
    """Group coincident centroids on the micrometer grid.

    Returns representative local indices plus a map duplicate -> rep.
    """
    cells: dict[tuple[int, int], int] = {}
    reps: list[int] = []
    dup_of: dict[int, int] = {}
    for i, (x, y) in enumerate(centroids):
        cell = (int(round(x / POINT_GRID_M)), int(round(y / POINT_GRID_M)))
        if cell in cells:
            dup_of[i] = cells[cell]
        else:
            cells[cell] = i
            reps.append(i)
    return reps, dup_of


def _edges_from_centroids(centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Delaunay edges over centroids with coincident-point handling."""
    n = len(centroids)
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64), np.zeros(0)
    reps, dup_of = _dedupe_centroids(centroids)
    pairs: set[tuple[int, int]] = set()
    if len(reps) >= 2:
        rep_pts = centroids[reps]
        for a, b in delaunay_edges(rep_pts):
            i, j = reps[a], reps[b]
            pairs.add((i, j) if i < j else (j, i))
    for dup, rep in dup_of.items():
        pairs.add((rep, dup) if rep < dup else (dup, rep))
        # the duplicate inherits its representative's adjacencies
    edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    lens = np.hypot(*(centroids[edges[:, 0]] - centroids[edges[:, 1]]).T) \
        if len(edges) else np.zeros(0)
    lens = np.where(lens <= 0.0, EPSILON_EDGE_M, lens)
    return edges, lens


def build_subgraph(center: BuildingRecord, index: SpatialIndex,
                   buildings: list[BuildingRecord], n_sub: int,
                   features: np.ndarray | None = None) -> LocalizedSubgraph:
    """Distance-based localized subgraph around a labeled center."""
    if center.class_label is None:
        raise InvalidInputError(f"center {center.id} has no label")
    _, member_idx = grow_buffer(center, index, n_sub)
    centroids = np.array([buildings[i].centroid for i in member_idx])
    edges, lens = _edges_from_centroids(centroids)
    ids = [buildings[i].id for i in member_idx]
    labels = np.array(
        [-1 if buildings[i].class_label is None else buildings[i].class_label
         for i in member_idx], dtype=np.int64)
    if features is None:
        feats = np.zeros((len(member_idx), schema.N_FEATURES))
    else:
        feats = features[member_idx]
    try:
        center_local = ids.index(center.id)
    except ValueError:
        raise InvalidStateError(f"center {center.id} missing from its own buffer")
    return LocalizedSubgraph(
        center_id=center.id, node_ids=ids, node_features=feats,
        edges=edges, edge_len=lens, labels=labels,
        split_flags=np.zeros(len(ids), dtype=np.int8),
        center_index=center_local)


@dataclass
class GlobalGraph:
    """Delaunay graph over every building centroid in a region."""

    node_ids: list[str]
    adjacency: dict[int, list[int]]
    edge_len: dict[tuple[int, int], float]

    @classmethod
    def build(cls, buildings: list[BuildingRecord]) -> "GlobalGraph":
        centroids = np.array([b.centroid for b in buildings])
        edges, lens = _edges_from_centroids(centroids)
        adj: dict[int, list[int]] = {i: [] for i in range(len(buildings))}
        lengths: dict[tuple[int, int], float] = {}
        for (i, j), l in zip(edges, lens):
            i, j = int(i), int(j)
            adj[i].append(j)
            adj[j].append(i)
            lengths[(i, j)] = float(l)
        for i in adj:
            adj[i].sort()
        return cls([b.id for b in buildings], adj, lengths)


def k_hop_subgraph(center_idx: int, graph: GlobalGraph,
                   buildings: list[BuildingRecord], hops: int,
                   features: np.ndarray | None = None) -> LocalizedSubgraph:
    """Induced subgraph on nodes within `hops` of the center."""
    if center_idx not in graph.adjacency:
        raise InvalidInputError(f"center index {center_idx} not in global graph")
    center = buildings[center_idx]
    if center.class_label is None:
        raise InvalidInputError(f"center {center.id} has no label")
    seen = {center_idx}
    frontier = [center_idx]
    for _ in range(hops):
        nxt = []
        for u in frontier:
            for v in graph.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    members = sorted(seen)
    local = {g: l for l, g in enumerate(members)}
    edges, lens = [], []
    for g in members:
        for v in graph.adjacency[g]:
            if v in local and g < v:
                edges.append((local[g], local[v]))
                lens.append(graph.edge_len[(g, v)])
    order = np.argsort(np.array([e[0] * len(members) + e[1] for e in edges])) \
        if edges else []
    edges = np.array(edges, dtype=np.int64).reshape(-1, 2)[order] \
        if len(edges) else np.zeros((0, 2), dtype=np.int64)
    lens = np.array(lens)[order] if len(lens) else np.zeros(0)
    labels = np.array(
        [-1 if buildings[g].class_label is None else buildings[g].class_label
         for g in members], dtype=np.int64)
    feats = features[members] if features is not None \
        else np.zeros((len(members), schema.N_FEATURES))
    return LocalizedSubgraph(
        center_id=center.id,
        node_ids=[buildings[g].id for g in members],
        node_features=feats, edges=edges, edge_len=lens, labels=labels,
        split_flags=np.zeros(len(members), dtype=np.int8),
        center_index=local[center_idx])


def two_hop_subgraph(center_idx: int, graph: GlobalGraph,
                     buildings: list[BuildingRecord],
                     features: np.ndarray | None = None) -> LocalizedSubgraph:
    return k_hop_subgraph(center_idx, graph, buildings, hops=2, features=features)


def _neighbor_lists(sg: LocalizedSubgraph):
    """Cached per-node sorted neighbor lists with edge lengths."""
    cache = getattr(sg, "_nbr_cache", None)
    if cache is not None:
        return cache
    adj: list[list[int]] = [[] for _ in range(sg.n_nodes())]
    lens: dict[tuple[int, int], float] = {}
    for (i, j), l in zip(sg.edges, sg.edge_len):
        i, j = int(i), int(j)
        adj[i].append(j)
        adj[j].append(i)
        lens[(i, j)] = float(l)
    for nbrs in adj:
        nbrs.sort()
    sg._nbr_cache = (adj, lens)
    return sg._nbr_cache


def sample_neighbors(sg: LocalizedSubgraph, fanouts: list[int],
                     seed: int) -> LocalizedSubgraph:
    """GraphSAGE-style fanout sampling rooted at the center node.

    At hop h every frontier node keeps at most fanouts[h] randomly chosen
    neighbors; the result is the subgraph induced by the kept edges.
    """
    rng = np.random.default_rng(seed)
    adj, lens = _neighbor_lists(sg)

    kept_edges: set[tuple[int, int]] = set()
    visited = {sg.center_index}
    frontier = [sg.center_index]
    for fanout in fanouts:
        nxt = []
        for u in frontier:
            nbrs = adj[u]
            if len(nbrs) > fanout:
                chosen = sorted(nbrs[k] for k in
                                rng.permutation(len(nbrs))[:fanout])
            else:
                chosen = nbrs
            for v in chosen:
                kept_edges.add((u, v) if u < v else (v, u))
                if v not in visited:
                    visited.add(v)
                    nxt.append(v)
        frontier = sorted(nxt)

    members = sorted(visited)
    local = {g: l for l, g in enumerate(members)}
    new_edges = sorted((local[a], local[b]) for a, b in kept_edges)
    return LocalizedSubgraph(
        center_id=sg.center_id,
        node_ids=[sg.node_ids[g] for g in members],
        node_features=sg.node_features[members],
        edges=np.array(new_edges, dtype=np.int64).reshape(-1, 2),
        edge_len=np.array([lens[(members[a], members[b])]
                           if (members[a], members[b]) in lens
                           else lens[(members[b], members[a])]
                           for a, b in new_edges]),
        labels=sg.labels[members],
        split_flags=sg.split_flags[members],
        center_index=local[sg.center_index],
        split=sg.split)


def assign_splits(subgraphs: list[LocalizedSubgraph], ratios, seed: int) -> None:
    """Randomly split subgraphs and set per-node flags with overlap
    deduplication: a non-center label may carry at most one flag across
    the whole dataset; centers always keep their subgraph's split."""
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9 or min(ratios) < 0:
        raise InvalidConfigError(f"split ratios must be 3 non-negatives summing to 1, got {ratios}")
    for sg in subgraphs:
        if sg.labels[sg.center_index] < 0:
            raise InvalidInputError(f"subgraph center {sg.center_id} is unlabeled")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(subgraphs))
    n = len(subgraphs)
    n_train = int(round(ratios[0] * n))
    n_val = int(round(ratios[1] * n))
    split_of = np.full(n, FLAG_TEST, dtype=np.int8)
    split_of[order[:n_train]] = FLAG_TRAIN
    split_of[order[n_train:n_train + n_val]] = FLAG_VAL

    train_ids: set[str] = set()
    val_ids: set[str] = set()
    for sg, s in zip(subgraphs, split_of):
        if s == FLAG_TRAIN:
            train_ids.update(nid for nid, l in zip(sg.node_ids, sg.labels) if l >= 0)
        elif s == FLAG_VAL:
            val_ids.update(nid for nid, l in zip(sg.node_ids, sg.labels) if l >= 0)

    for sg, s in zip(subgraphs, split_of):
        sg.split = int(s)
        flags = np.zeros(sg.n_nodes(), dtype=np.int8)
        for i, (nid, lab) in enumerate(zip(sg.node_ids, sg.labels)):
            if lab < 0:
                continue
            if s == FLAG_TRAIN:
                flags[i] = FLAG_TRAIN
            elif s == FLAG_VAL:
                if nid not in train_ids or i == sg.center_index:
                    flags[i] = FLAG_VAL
            else:
                if (nid not in train_ids and nid not in val_ids) \
                        or i == sg.center_index:
                    flags[i] = FLAG_TEST
        sg.split_flags = flags


def remap_task(dataset: GraphDataset, task: str) -> GraphDataset:
    """Project combined9 labels into a coarser task's label space."""
    if task not in schema.TASKS:
        raise InvalidConfigError(f"unknown task {task!r}")
    if dataset.task != schema.TASK_COMBINED:
        raise InvalidInputError("remap_task expects labels in combined9 space")
    new_subgraphs = []
    for sg in dataset.subgraphs:
        bad = sg.labels[(sg.labels >= schema.N_CLASSES)]
        if len(bad):
            raise DataError(f"label id {int(bad[0])} outside combined9 space")
        labels = np.array([
            -1 if l < 0 else schema.remap_label(int(l), task)
            for l in sg.labels], dtype=np.int64)
        new_subgraphs.append(LocalizedSubgraph(
            center_id=sg.center_id, node_ids=sg.node_ids,
            node_features=sg.node_features, edges=sg.edges,
            edge_len=sg.edge_len, labels=labels,
            split_flags=sg.split_flags, center_index=sg.center_index,
            split=sg.split))
    manifest = dict(dataset.manifest)
    manifest["task"] = task
    return GraphDataset(new_subgraphs, manifest, dataset.norm_stats,
                        task, dataset.label_policy)


def homophily_ratio(dataset: GraphDataset) -> float:
    """Share of edges whose endpoints carry the same label."""
    same = total = 0
    for sg in dataset.subgraphs:
        for i, j in sg.edges:
            li, lj = sg.labels[int(i)], sg.labels[int(j)]
            if li >= 0 and lj >= 0:
                total += 1
                same += int(li == lj)
    if total == 0:
        raise UndefinedValueError("no edge has two labeled endpoints")
    return same / total


# worker-process state for parallel subgraph construction (fork start
# method: children inherit these by copy-on-write)
_POOL_STATE: dict = {}


def _pool_init(buildings, index, n_sub, features):
    _POOL_STATE.update(buildings=buildings, index=index, n_sub=n_sub,
                       features=features)


def _pool_build(center_idx: int) -> LocalizedSubgraph:
    s = _POOL_STATE
    return build_subgraph(s["buildings"][center_idx], s["index"],
                          s["buildings"], s["n_sub"], features=s["features"])


def _parallel_subgraphs(centers, buildings, index, n_sub, features,
                        workers: int) -> list[LocalizedSubgraph]:
    """Ordered parallel map; output order equals center sampling order."""
    ctx = mp.get_context("fork")
    with ctx.Pool(workers, initializer=_pool_init,
                  initargs=(buildings, index, n_sub, features)) as pool:
        return pool.map(_pool_build, centers, chunksize=64)


def generate_dataset(buildings: list[BuildingRecord], features: np.ndarray,
                     n_graphs: int, seed: int,
                     n_sub: int = DEFAULT_N_SUB,
                     mode: str = MODE_DISTANCE,
                     hops: int = 4,
                     ratios=(0.7, 0.15, 0.15),
                     label_policy: str = "all",
                     workers: int = 1) -> GraphDataset:
    """End-to-end dataset builder; deterministic given the manifest."""
    if mode not in MODES:
        raise InvalidConfigError(f"unknown mode {mode!r}")
    if label_policy not in ("all", "center"):
        raise InvalidConfigError(f"unknown label policy {label_policy!r}")
    labeled = [i for i, b in enumerate(buildings) if b.class_label is not None]
    if not labeled:
        raise InvalidStateError("no labeled buildings to sample centers from")
    rng = np.random.default_rng(seed)
    n_take = min(n_graphs, len(labeled))
    centers = [labeled[k] for k in rng.permutation(len(labeled))[:n_take]]

    if mode == MODE_DISTANCE:
        index = SpatialIndex([b.polygon for b in buildings])
        if workers > 1:
            subgraphs = _parallel_subgraphs(centers, buildings, index, n_sub,
                                            features, workers)
        else:
            subgraphs = [build_subgraph(buildings[c], index, buildings, n_sub,
                                        features=features)
                         for c in centers]
    else:
        graph = GlobalGraph.build(buildings)
        depth = 2 if mode == MODE_TWO_HOP else hops
        subgraphs = [k_hop_subgraph(c, graph, buildings, depth,
                                    features=features)
                     for c in centers]

    assign_splits(subgraphs, ratios, seed=seed + 1)
    manifest = {
        "n_graphs": n_take,
        "n_sub": n_sub,
        "seed": seed,
        "mode": mode,
        "hops": hops if mode == MODE_UNCONSTRAINED else (2 if mode == MODE_TWO_HOP else None),
        "ratios": list(ratios),
        "label_policy": label_policy,
        "task": schema.TASK_COMBINED,
        "feature_checksum": schema.feature_checksum(),
    }
    return GraphDataset(subgraphs, manifest, None, schema.TASK_COMBINED,
                        label_policy)
