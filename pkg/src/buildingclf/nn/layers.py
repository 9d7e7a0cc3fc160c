"""Classifier layers on the autodiff core: dense, graph convolution,
sample-and-aggregate with max pooling, attention, and transformer-style
attention, all with optional scaled edge features.

Graph layers consume a GraphBatch: a block-diagonal merge of whole
subgraphs with precomputed message-passing plans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..feature import scale_edge_feature
from . import tensor as T
from .specs import ModelSpec

SELF_LOOP_FEATURE = 1.0  # an edge of zero length scales to 1


@dataclass
class GraphBatch:
    """Concatenation of whole subgraphs with message-passing plans."""

    x: np.ndarray                # (N, d) feature rows
    labels: np.ndarray           # (N,)
    loss_mask: np.ndarray        # (N,) bool
    plan_self: T.GraphPlan       # both directions + self loops
    plan_nbr: T.GraphPlan        # both directions, no self loops
    n_graphs: int


def collate(subgraphs, xi: float | None, label_policy: str = "all",
            loss_flag: int | None = None,
            transform=None) -> GraphBatch:
    """Merge subgraphs into one block-diagonal batch.

    loss_flag selects which split flag enters the loss mask; under the
    "center" policy only center nodes qualify. `transform` maps raw
    feature rows (normalization).
    """
    xs, labels, mask = [], [], []
    src, dst, feat = [], [], []
    offset = 0
    xi_eff = xi if xi is not None else 50.0
    for sg in subgraphs:
        n = sg.n_nodes()
        xs.append(sg.node_features)
        labels.append(sg.labels)
        m = np.zeros(n, dtype=bool)
        if loss_flag is not None:
            if label_policy == "center":
                m[sg.center_index] = sg.split_flags[sg.center_index] == loss_flag
            else:
                m = sg.split_flags == loss_flag
        mask.append(m)
        if len(sg.edges):
            e = sg.edges + offset
            # vectorized form of scale_edge_feature over the length array
            c = np.maximum(0.0, 1.0 - sg.edge_len / xi_eff)
            src.append(e[:, 0])
            dst.append(e[:, 1])
            feat.append(c)
        offset += n
    x = np.vstack(xs)
    if transform is not None:
        x = transform(x)
    if src:
        s = np.concatenate(src)
        d = np.concatenate(dst)
        c = np.concatenate(feat)
    else:
        s = d = np.zeros(0, dtype=np.int64)
        c = np.zeros(0)
    n_total = offset
    # undirected edges become two directed edges
    nbr_src = np.concatenate([s, d])
    nbr_dst = np.concatenate([d, s])
    nbr_feat = np.concatenate([c, c])
    plan_nbr = T.GraphPlan(n_total, nbr_src, nbr_dst, nbr_feat)
    loop = np.arange(n_total)
    plan_self = T.GraphPlan(
        n_total,
        np.concatenate([nbr_src, loop]),
        np.concatenate([nbr_dst, loop]),
        np.concatenate([nbr_feat, np.full(n_total, SELF_LOOP_FEATURE)]))
    return GraphBatch(x=x, labels=np.concatenate(labels),
                      loss_mask=np.concatenate(mask),
                      plan_self=plan_self, plan_nbr=plan_nbr,
                      n_graphs=len(subgraphs))


def _init_weight(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def _init_bias(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=fan_out)


def _dropout(t: T.Tensor, rate: float, train: bool,
             rng: np.random.Generator | None) -> T.Tensor:
    if not train or rate <= 0.0:
        return t
    mask = (rng.random(t.data.shape) >= rate) / (1.0 - rate)
    return t * T.constant(mask)


class Dense:
    def __init__(self, rng, d_in, d_out):
        self.W = T.parameter(_init_weight(rng, d_in, d_out))
        self.b = T.parameter(_init_bias(rng, d_in, d_out))

    def params(self):
        return [self.W, self.b]

    def __call__(self, x: T.Tensor) -> T.Tensor:
        return x @ self.W + self.b


class GCNLayer:
    """Symmetric-normalized convolution with edge weights and self loops."""

    def __init__(self, rng, d_in, d_out):
        self.W = T.parameter(_init_weight(rng, d_in, d_out))
        self.b = T.parameter(_init_bias(rng, d_in, d_out))

    def params(self):
        return [self.W, self.b]

    def __call__(self, h: T.Tensor, batch: GraphBatch) -> T.Tensor:
        plan = batch.plan_self
        if (plan.efeat < 0).any():
            raise InvalidInputError("negative edge weights in convolution")
        deg = plan.sum_by_dst_np(plan.efeat)  # weighted degree incl. self loop
        inv_sqrt = 1.0 / np.sqrt(deg)
        coef = inv_sqrt[plan.dst] * plan.efeat * inv_sqrt[plan.src]
        z = h @ self.W
        msg = T.gather_src(z, plan) * T.constant(coef[:, None])
        return T.segment_sum_dst(msg, plan) + self.b


class SAGELayer:
    """Separate root weights plus element-wise max neighbor aggregation."""

    def __init__(self, rng, d_in, d_out):
        self.W_self = T.parameter(_init_weight(rng, d_in, d_out))
        self.W_neigh = T.parameter(_init_weight(rng, d_in, d_out))
        self.b = T.parameter(_init_bias(rng, d_in, d_out))

    def params(self):
        return [self.W_self, self.W_neigh, self.b]

    def __call__(self, h: T.Tensor, batch: GraphBatch) -> T.Tensor:
        plan = batch.plan_nbr
        agg = T.segment_max_dst(T.gather_src(h, plan), plan)
        return h @ self.W_self + agg @ self.W_neigh + self.b


class GATLayer:
    """Multi-head attention with the edge feature inside the score input."""

    def __init__(self, rng, d_in, d_out, heads, leaky_slope, attn_dropout):
        if d_out % heads:
            raise InvalidInputError(f"{d_out} channels not divisible by {heads} heads")
        self.heads = heads
        self.dh = d_out // heads
        self.slope = leaky_slope
        self.attn_dropout = attn_dropout
        self.W_dst = T.parameter(_init_weight(rng, d_in, d_out))
        self.W_src = T.parameter(_init_weight(rng, d_in, d_out))
        self.W_edge = T.parameter(_init_weight(rng, 1, d_out))
        self.att = T.parameter(_init_weight(rng, 1, d_out))
        self.b = T.parameter(_init_bias(rng, d_in, d_out))

    def params(self):
        return [self.W_dst, self.W_src, self.W_edge, self.att, self.b]

    def attention(self, h: T.Tensor, batch: GraphBatch) -> T.Tensor:
        plan = batch.plan_self
        z_dst = T.gather_dst(h @ self.W_dst, plan)
        z_src = T.gather_src(h @ self.W_src, plan)
        e_in = T.constant(plan.efeat[:, None]) @ self.W_edge
        s = (z_dst + z_src + e_in).leaky_relu(self.slope)
        score = (s * self.att).block_colsum(self.heads)
        return T.segment_softmax_dst(score, plan)

    def __call__(self, h: T.Tensor, batch: GraphBatch, train=False,
                 rng=None) -> T.Tensor:
        plan = batch.plan_self
        alpha = self.attention(h, batch)
        alpha = _dropout(alpha, self.attn_dropout, train, rng)
        values = T.gather_src(h @ self.W_src, plan)
        msg = alpha.block_colexpand(self.dh) * values
        return T.segment_sum_dst(msg, plan) + self.b


class TransformerLayer:
    """Scaled dot-product graph attention; edge feature feeds the key and
    value paths; no residual connections."""

    def __init__(self, rng, d_in, d_out, heads, attn_dropout):
        if d_out % heads:
            raise InvalidInputError(f"{d_out} channels not divisible by {heads} heads")
        self.heads = heads
        self.dh = d_out // heads
        self.attn_dropout = attn_dropout
        self.W_q = T.parameter(_init_weight(rng, d_in, d_out))
        self.W_k = T.parameter(_init_weight(rng, d_in, d_out))
        self.W_v = T.parameter(_init_weight(rng, d_in, d_out))
        self.W_ek = T.parameter(_init_weight(rng, 1, d_out))
        self.W_ev = T.parameter(_init_weight(rng, 1, d_out))
        self.b = T.parameter(_init_bias(rng, d_in, d_out))

    def params(self):
        return [self.W_q, self.W_k, self.W_v, self.W_ek, self.W_ev, self.b]

    def attention(self, h: T.Tensor, batch: GraphBatch) -> T.Tensor:
        plan = batch.plan_self
        q = T.gather_dst(h @ self.W_q, plan)
        ef = T.constant(plan.efeat[:, None])
        k = T.gather_src(h @ self.W_k, plan) + ef @ self.W_ek
        score = (q * k).block_colsum(self.heads) * T.constant(1.0 / math.sqrt(self.dh))
        return T.segment_softmax_dst(score, plan)

    def __call__(self, h: T.Tensor, batch: GraphBatch, train=False,
                 rng=None) -> T.Tensor:
        plan = batch.plan_self
        alpha = self.attention(h, batch)
        alpha = _dropout(alpha, self.attn_dropout, train, rng)
        ef = T.constant(plan.efeat[:, None])
        v = T.gather_src(h @ self.W_v, plan) + ef @ self.W_ev
        msg = alpha.block_colexpand(self.dh) * v
        return T.segment_sum_dst(msg, plan) + self.b


class Model:
    """GNN stack (optional) followed by fully connected head layers."""

    def __init__(self, spec: ModelSpec, seed: int):
        rng = np.random.default_rng(seed)
        self.spec = spec
        self.seed = seed
        self.gnn_layers = []
        d = spec.n_features
        for _ in range(spec.n_gnn_layers):
            if spec.arch == "gcn":
                layer = GCNLayer(rng, d, spec.hidden)
            elif spec.arch == "sage":
                layer = SAGELayer(rng, d, spec.hidden)
            elif spec.arch == "gat":
                layer = GATLayer(rng, d, spec.hidden, spec.heads,
                                 spec.leaky_slope, spec.attn_dropout)
            elif spec.arch == "transformer":
                layer = TransformerLayer(rng, d, spec.hidden, spec.heads,
                                         spec.attn_dropout)
            else:
                raise InvalidInputError(f"{spec.arch} has no GNN layers")
            self.gnn_layers.append(layer)
            d = spec.hidden
        self.std_layers = []
        for i in range(spec.n_std_layers):
            d_out = spec.n_classes if i == spec.n_std_layers - 1 else spec.hidden
            self.std_layers.append(Dense(rng, d, d_out))
            d = d_out

    def params(self) -> list[T.Tensor]:
        out = []
        for layer in self.gnn_layers + self.std_layers:
            out.extend(layer.params())
        return out

    def param_values(self) -> list[np.ndarray]:
        return [p.data.copy() for p in self.params()]

    def set_param_values(self, values: list[np.ndarray]):
        for p, v in zip(self.params(), values):
            p.data = v.copy()

    def forward(self, batch: GraphBatch, train: bool = False,
                rng: np.random.Generator | None = None) -> T.Tensor:
        h = T.constant(batch.x)
        for layer in self.gnn_layers:
            if isinstance(layer, (GATLayer, TransformerLayer)):
                h = layer(h, batch, train=train, rng=rng)
            else:
                h = layer(h, batch)
            h = h.relu()
            h = _dropout(h, self.spec.dropout, train, rng)
        for i, layer in enumerate(self.std_layers):
            h = layer(h)
            if i < len(self.std_layers) - 1:
                h = h.relu()
                h = _dropout(h, self.spec.dropout, train, rng)
        return h


def mlp_forward(x: np.ndarray, model: Model) -> np.ndarray:
    """Eval-mode forward for flat feature matrices."""
    if x.shape[1] != model.spec.n_features:
        raise InvalidInputError(
            f"expected {model.spec.n_features} columns, got {x.shape[1]}")
    batch = GraphBatch(x=np.asarray(x, dtype=float),
                       labels=np.zeros(len(x), dtype=np.int64),
                       loss_mask=np.zeros(len(x), dtype=bool),
                       plan_self=T.GraphPlan(len(x), np.zeros(0, dtype=np.int64),
                                             np.zeros(0, dtype=np.int64), np.zeros(0)),
                       plan_nbr=T.GraphPlan(len(x), np.zeros(0, dtype=np.int64),
                                            np.zeros(0, dtype=np.int64), np.zeros(0)),
                       n_graphs=0)
    return model.forward(batch, train=False).data
