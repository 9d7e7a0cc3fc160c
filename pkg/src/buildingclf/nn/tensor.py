"""Minimal reverse-mode autodiff over float64 numpy arrays.

Only the operations the classifiers need are implemented. Graph
message-passing ops (gather/scatter along edges, segment reductions)
take a precomputed GraphPlan so both directions run as contiguous
reduceat calls instead of per-element scatter.
"""

from __future__ import annotations

import numpy as np

from ..errors import TrainingDivergedError


class Tensor:
    """Array node in the autodiff graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, parents=(), backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() expects a scalar loss")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is None:
                continue
            grads = node._backward(node.grad)
            for p, g in zip(node._parents, grads):
                if g is None or not p.requires_grad:
                    continue
                if p.grad is None:
                    p.grad = g.astype(np.float64, copy=True)
                else:
                    p.grad += g

    # -- elementwise / linear algebra ----------------------------------

    def __add__(self, other):
        other = _as_tensor(other)

        def bwd(g):
            return (_unbroadcast(g, self.data.shape),
                    _unbroadcast(g, other.data.shape))
        return Tensor(self.data + other.data, parents=(self, other), backward=bwd)

    def __sub__(self, other):
        other = _as_tensor(other)

        def bwd(g):
            return (_unbroadcast(g, self.data.shape),
                    _unbroadcast(-g, other.data.shape))
        return Tensor(self.data - other.data, parents=(self, other), backward=bwd)

    def __mul__(self, other):
        other = _as_tensor(other)

        def bwd(g):
            return (_unbroadcast(g * other.data, self.data.shape),
                    _unbroadcast(g * self.data, other.data.shape))
        return Tensor(self.data * other.data, parents=(self, other), backward=bwd)

    def __truediv__(self, other):
        other = _as_tensor(other)

        def bwd(g):
            ga = g / other.data
            gb = -g * self.data / (other.data * other.data)
            return (_unbroadcast(ga, self.data.shape),
                    _unbroadcast(gb, other.data.shape))
        return Tensor(self.data / other.data, parents=(self, other), backward=bwd)

    def __matmul__(self, other):

        def bwd(g):
            return g @ other.data.T, self.data.T @ g
        return Tensor(self.data @ other.data, parents=(self, other), backward=bwd)

    def relu(self):
        mask = self.data > 0

        def bwd(g):
            return (g * mask,)
        return Tensor(self.data * mask, parents=(self,), backward=bwd)

    def leaky_relu(self, slope: float):
        mask = self.data > 0
        scale = np.where(mask, 1.0, slope)

        def bwd(g):
            return (g * scale,)
        return Tensor(self.data * scale, parents=(self,), backward=bwd)

    def exp(self):
        out_data = np.exp(self.data)

        def bwd(g):
            return (g * out_data,)
        return Tensor(out_data, parents=(self,), backward=bwd)

    def log(self):

        def bwd(g):
            return (g / self.data,)
        return Tensor(np.log(self.data), parents=(self,), backward=bwd)

    def sum(self, axis=None, keepdims=False):
        out_data = self.data.sum(axis=axis, keepdims=keepdims)

        def bwd(g):
            if axis is None:
                return (np.broadcast_to(g, self.data.shape).copy(),)
            ge = g if keepdims else np.expand_dims(g, axis)
            return (np.broadcast_to(ge, self.data.shape).copy(),)
        return Tensor(out_data, parents=(self,), backward=bwd)

    def mean(self):
        n = self.data.size

        def bwd(g):
            return (np.broadcast_to(g / n, self.data.shape).copy(),)
        return Tensor(self.data.mean(), parents=(self,), backward=bwd)

    def take_rows(self, idx: np.ndarray):
        """Row gather by arbitrary indices; backward uses np.add.at."""
        idx = np.asarray(idx)

        def bwd(g):
            out = np.zeros_like(self.data)
            np.add.at(out, idx, g)
            return (out,)
        return Tensor(self.data[idx], parents=(self,), backward=bwd)

    def pick(self, rows: np.ndarray, cols: np.ndarray):
        """Elements at (rows[i], cols[i]); used by cross-entropy."""

        def bwd(g):
            out = np.zeros_like(self.data)
            np.add.at(out, (rows, cols), g)
            return (out,)
        return Tensor(self.data[rows, cols], parents=(self,), backward=bwd)

    def block_colsum(self, heads: int):
        """(r, heads*d) -> (r, heads): sum within each head's column block."""
        r, cols = self.data.shape
        d = cols // heads

        def bwd(g):
            return (np.repeat(g, d, axis=1),)
        return Tensor(self.data.reshape(r, heads, d).sum(axis=2),
                      parents=(self,), backward=bwd)

    def block_colexpand(self, d: int):
        """(r, heads) -> (r, heads*d): repeat each column d times."""

        def bwd(g):
            r, cols = g.shape
            return (g.reshape(r, cols // d, d).sum(axis=2),)
        return Tensor(np.repeat(self.data, d, axis=1),
                      parents=(self,), backward=bwd)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Reduce a gradient back to the shape it was broadcast from."""
    if g.shape == tuple(shape):
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def constant(data) -> Tensor:
    return Tensor(data)


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


# -- graph message-passing plan --------------------------------------------

class GraphPlan:
    """Directed edge arrays sorted by destination, with reduceat offsets
    for both edge->dst-node and edge->src-node reductions."""

    def __init__(self, n: int, src: np.ndarray, dst: np.ndarray,
                 efeat: np.ndarray):
        order = np.lexsort((src, dst))
        self.n = n
        self.src = np.ascontiguousarray(src[order])
        self.dst = np.ascontiguousarray(dst[order])
        self.efeat = np.ascontiguousarray(efeat[order])
        self.n_edges = len(self.src)
        self.dst_counts = np.bincount(self.dst, minlength=n)
        self._dst_nonempty = np.flatnonzero(self.dst_counts > 0)
        self._dst_starts = np.concatenate(
            [[0], np.cumsum(self.dst_counts[self._dst_nonempty])[:-1]]) \
            if len(self._dst_nonempty) else np.zeros(0, dtype=np.int64)
        # src-sorted view for the reverse direction
        self._src_perm = np.argsort(self.src, kind="stable")
        src_sorted = self.src[self._src_perm]
        self.src_counts = np.bincount(src_sorted, minlength=n)
        self._src_nonempty = np.flatnonzero(self.src_counts > 0)
        self._src_starts = np.concatenate(
            [[0], np.cumsum(self.src_counts[self._src_nonempty])[:-1]]) \
            if len(self._src_nonempty) else np.zeros(0, dtype=np.int64)

    # numpy-level helpers (also used for constant coefficient math)

    def sum_by_dst_np(self, edge_vals: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n,) + edge_vals.shape[1:], dtype=np.float64)
        if self.n_edges:
            out[self._dst_nonempty] = np.add.reduceat(
                edge_vals, self._dst_starts, axis=0)
        return out

    def sum_by_src_np(self, edge_vals: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n,) + edge_vals.shape[1:], dtype=np.float64)
        if self.n_edges:
            out[self._src_nonempty] = np.add.reduceat(
                edge_vals[self._src_perm], self._src_starts, axis=0)
        return out

    def max_by_dst_np(self, edge_vals: np.ndarray) -> np.ndarray:
        """Per-dst max; rows without in-edges stay at zero."""
        out = np.zeros((self.n,) + edge_vals.shape[1:], dtype=np.float64)
        if self.n_edges:
            out[self._dst_nonempty] = np.maximum.reduceat(
                edge_vals, self._dst_starts, axis=0)
        return out

    def repeat_dst_np(self, node_vals: np.ndarray) -> np.ndarray:
        return np.repeat(node_vals, self.dst_counts, axis=0)


def gather_src(t: Tensor, plan: GraphPlan) -> Tensor:
    """Node -> edge copy along the source endpoint."""

    def bwd(g):
        return (plan.sum_by_src_np(g),)
    return Tensor(t.data[plan.src], parents=(t,), backward=bwd)


def gather_dst(t: Tensor, plan: GraphPlan) -> Tensor:
    """Node -> edge copy along the destination endpoint (run repeat)."""

    def bwd(g):
        return (plan.sum_by_dst_np(g),)
    return Tensor(plan.repeat_dst_np(t.data), parents=(t,), backward=bwd)


def segment_sum_dst(t: Tensor, plan: GraphPlan) -> Tensor:
    """Edge -> node sum over each destination's in-edges."""

    def bwd(g):
        return (plan.repeat_dst_np(g),)
    return Tensor(plan.sum_by_dst_np(t.data), parents=(t,), backward=bwd)


def segment_max_dst(t: Tensor, plan: GraphPlan) -> Tensor:
    """Edge -> node max; empty segments yield zeros.

    The subgradient splits equally across edges that attain the segment
    maximum (deterministic; ties are measure-zero for real data).
    """
    out_data = plan.max_by_dst_np(t.data)

    def bwd(g):
        if not plan.n_edges:
            return (np.zeros_like(t.data),)
        hit = t.data == plan.repeat_dst_np(out_data)
        counts = np.zeros((plan.n, t.data.shape[1]))
        counts[plan._dst_nonempty] = np.add.reduceat(
            hit, plan._dst_starts, axis=0)
        share = g / np.maximum(counts, 1)
        return (plan.repeat_dst_np(share) * hit,)
    return Tensor(out_data, parents=(t,), backward=bwd)


def segment_softmax_dst(score: Tensor, plan: GraphPlan) -> Tensor:
    """Softmax of edge scores over each destination's in-neighborhood."""
    shift = constant(plan.repeat_dst_np(plan.max_by_dst_np(score.data)))
    e = (score - shift).exp()
    den = segment_sum_dst(e, plan)
    return e / gather_dst(den, plan)


def check_finite(t: Tensor, what: str, epoch: int | None = None):
    if not np.isfinite(t.data).all():
        raise TrainingDivergedError(f"non-finite {what}", epoch=epoch)
