"""Training loop: Adam, cross-entropy over masked nodes, early stopping,
and bit-exact model checkpoints."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    DataError,
    InvalidStateError,
    TrainingDivergedError,
)
from ..feature import NormalizationStats, apply_normalization, fit_normalization
from ..graphgen import FLAG_TRAIN, FLAG_VAL, FLAG_TEST, GraphDataset
from ..schema import N_NUMERICAL
from . import tensor as T
from .layers import GraphBatch, Model, collate
from .specs import ModelSpec

CHECKPOINT_VERSION = 1


def cross_entropy(logits: T.Tensor, labels: np.ndarray,
                  mask: np.ndarray) -> T.Tensor:
    """Mean negative log-softmax over the masked rows."""
    rows = np.flatnonzero(mask)
    if len(rows) == 0:
        raise InvalidStateError("cross_entropy over an empty mask")
    shift = T.constant(logits.data.max(axis=1, keepdims=True))
    z = logits - shift
    logsumexp = z.exp().sum(axis=1, keepdims=True).log()
    log_softmax = z - logsumexp
    picked = log_softmax.pick(rows, labels[rows])
    return picked.mean() * T.constant(-1.0)


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: dict,
              lr: float, beta1: float = 0.9, beta2: float = 0.999,
              weight_decay: float = 0.0, eps: float = 1e-8) -> None:
    """One bias-corrected Adam update, in place.

    Plain L2 decay is added to the gradient when weight_decay > 0.
    """
    if "m" not in state:
        state["m"] = [np.zeros_like(p) for p in params]
        state["v"] = [np.zeros_like(p) for p in params]
        state["t"] = 0
    state["t"] += 1
    t = state["t"]
    for p, g, m, v in zip(params, grads, state["m"], state["v"]):
        if not np.isfinite(g).all():
            raise TrainingDivergedError("non-finite gradient")
        if weight_decay > 0.0:
            g = g + weight_decay * p
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)


@dataclass
class TrainReport:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    seed: int = 0
    loss_terms_per_epoch: int = 0

    def to_dict(self) -> dict:
        return {
            "train_losses": self.train_losses,
            "val_losses": self.val_losses,
            "stopped_epoch": self.stopped_epoch,
            "best_epoch": self.best_epoch,
            "seed": self.seed,
            "loss_terms_per_epoch": self.loss_terms_per_epoch,
        }


def ensure_norm_stats(dataset: GraphDataset) -> NormalizationStats:
    if dataset.norm_stats is not None:
        return dataset.norm_stats
    rows = [sg.node_features[sg.split_flags == FLAG_TRAIN]
            for sg in dataset.subgraphs if sg.split == FLAG_TRAIN]
    rows = [r for r in rows if len(r)]
    if not rows:
        raise InvalidStateError("no training rows to fit normalization")
    X = np.vstack(rows)
    stats = fit_normalization(X, np.ones(len(X), dtype=bool))
    dataset.norm_stats = stats
    return stats


def _batches(items, size):
    for i in range(0, len(items), size):
        yield items[i:i + size]


def _sample_seed(base: int, epoch: int, k: int) -> int:
    return (base * 1000003 + epoch * 10007 + k) % (2 ** 31 - 1)


def train(dataset: GraphDataset, spec: ModelSpec, seed: int,
          fanouts: list[int] | None = None,
          log=None) -> tuple[Model, TrainReport]:
    """Train a neural classifier on the dataset's train/val splits.

    Mini-batches are whole subgraphs for graph architectures and flat
    node rows for the fully connected network. Returns the parameters
    from the best-validation epoch.
    """
    from ..graphgen import sample_neighbors  # local import to avoid cycle

    stats = ensure_norm_stats(dataset)
    norm = lambda x: apply_normalization(x, stats)
    if dataset.label_policy == "center" and spec.is_gnn:
        # exact by locality: nodes beyond the receptive field of the center
        # cannot influence its logits, so drop them before batching
        dataset = _pruned_to_receptive_field(dataset, spec.n_gnn_layers)
    train_sgs = [sg for sg in dataset.subgraphs if sg.split == FLAG_TRAIN]
    val_sgs = [sg for sg in dataset.subgraphs if sg.split == FLAG_VAL]
    if not train_sgs or not val_sgs:
        raise InvalidStateError("dataset needs non-empty train and val splits")

    rng = np.random.default_rng(seed)
    model = Model(spec, seed=int(rng.integers(2 ** 31)))
    state: dict = {}
    report = TrainReport(seed=seed)

    policy = dataset.label_policy
    val_batch = collate(val_sgs, spec.xi, policy, loss_flag=FLAG_VAL,
                        transform=norm)
    if not val_batch.loss_mask.any():
        raise InvalidStateError("validation split carries no usable labels")

    if spec.arch == "mlp":
        flat_x, flat_y = _flatten_nodes(train_sgs, FLAG_TRAIN, policy)
        flat_x = norm(flat_x)

    best_val = np.inf
    best_params = model.param_values()
    bad_epochs = 0
    n_loss_terms = 0
    for epoch in range(1, spec.max_epochs + 1):
        order = rng.permutation(len(train_sgs))
        epoch_loss = 0.0
        epoch_terms = 0
        if spec.arch == "mlp":
            row_order = rng.permutation(len(flat_x))
            for rows in _batches(row_order, spec.batch_size):
                x = T.constant(flat_x[rows])
                logits = _mlp_logits(model, x, train=True, rng=rng)
                loss = cross_entropy(logits, flat_y[rows],
                                     np.ones(len(rows), dtype=bool))
                T.check_finite(loss, "loss", epoch)
                epoch_loss += float(loss.data) * len(rows)
                epoch_terms += len(rows)
                _step(model, loss, state, spec)
        else:
            for k, idx in enumerate(_batches(order, spec.batch_size)):
                sgs = [train_sgs[i] for i in idx]
                if fanouts:
                    sgs = [sample_neighbors(sg, fanouts,
                                            _sample_seed(seed, epoch, int(i)))
                           for sg, i in zip(sgs, idx)]
                batch = collate(sgs, spec.xi, policy, loss_flag=FLAG_TRAIN,
                                transform=norm)
                if not batch.loss_mask.any():
                    continue
                logits = model.forward(batch, train=True, rng=rng)
                loss = cross_entropy(logits, batch.labels, batch.loss_mask)
                T.check_finite(loss, "loss", epoch)
                n_terms = int(batch.loss_mask.sum())
                epoch_loss += float(loss.data) * n_terms
                epoch_terms += n_terms
                _step(model, loss, state, spec)

        report.train_losses.append(epoch_loss / max(epoch_terms, 1))
        n_loss_terms = epoch_terms
        val_loss = _eval_loss(model, val_batch, spec)
        report.val_losses.append(val_loss)
        if log:
            log(f"epoch {epoch}: train {report.train_losses[-1]:.4f} "
                f"val {val_loss:.4f}")
        if val_loss < best_val - 1e-12:
            best_val = val_loss
            best_params = model.param_values()
            report.best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= spec.patience:
                report.stopped_epoch = epoch
                break
    else:
        report.stopped_epoch = spec.max_epochs

    report.loss_terms_per_epoch = n_loss_terms
    model.set_param_values(best_params)
    return model, report


def _step(model: Model, loss: T.Tensor, state: dict, spec: ModelSpec):
    params = model.params()
    for p in params:
        p.grad = None
    loss.backward()
    grads = [p.grad if p.grad is not None else np.zeros_like(p.data)
             for p in params]
    adam_step([p.data for p in params], grads, state, spec.lr,
              spec.beta1, spec.beta2, spec.weight_decay)


def _mlp_logits(model: Model, x: T.Tensor, train: bool,
                rng: np.random.Generator | None) -> T.Tensor:
    h = x
    for i, layer in enumerate(model.std_layers):
        h = layer(h)
        if i < len(model.std_layers) - 1:
            h = h.relu()
            from .layers import _dropout
            h = _dropout(h, model.spec.dropout, train, rng)
    return h


def _pruned_to_receptive_field(dataset: GraphDataset, hops: int) -> GraphDataset:
    """Center-policy view of the dataset trimmed to the center's k-hop ball."""
    from ..graphgen import LocalizedSubgraph

    pruned = []
    for sg in dataset.subgraphs:
        adj: dict[int, list[int]] = {i: [] for i in range(sg.n_nodes())}
        for i, j in sg.edges:
            adj[int(i)].append(int(j))
            adj[int(j)].append(int(i))
        seen = {sg.center_index}
        frontier = [sg.center_index]
        for _ in range(hops):
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        if len(seen) == sg.n_nodes():
            pruned.append(sg)
            continue
        members = sorted(seen)
        local = {g: l for l, g in enumerate(members)}
        keep = [(local[int(i)], local[int(j)])
                for i, j in sg.edges if int(i) in local and int(j) in local]
        order = np.argsort([a * len(members) + b for a, b in keep]) \
            if keep else []
        lens = np.array([l for (i, j), l in zip(sg.edges, sg.edge_len)
                         if int(i) in local and int(j) in local])
        pruned.append(LocalizedSubgraph(
            center_id=sg.center_id,
            node_ids=[sg.node_ids[g] for g in members],
            node_features=sg.node_features[members],
            edges=np.array(keep, dtype=np.int64).reshape(-1, 2)[order]
            if len(keep) else np.zeros((0, 2), dtype=np.int64),
            edge_len=lens[order] if len(keep) else np.zeros(0),
            labels=sg.labels[members],
            split_flags=sg.split_flags[members],
            center_index=local[sg.center_index],
            split=sg.split))
    return GraphDataset(pruned, dataset.manifest, dataset.norm_stats,
                        dataset.task, dataset.label_policy)


def _flatten_nodes(subgraphs, flag, policy):
    xs, ys = [], []
    for sg in subgraphs:
        if policy == "center":
            if sg.split_flags[sg.center_index] == flag:
                xs.append(sg.node_features[sg.center_index][None])
                ys.append(sg.labels[sg.center_index:sg.center_index + 1])
        else:
            sel = sg.split_flags == flag
            if sel.any():
                xs.append(sg.node_features[sel])
                ys.append(sg.labels[sel])
    if not xs:
        raise InvalidStateError("no nodes carry the requested flag")
    return np.vstack(xs), np.concatenate(ys)


def _eval_loss(model: Model, batch: GraphBatch, spec: ModelSpec) -> float:
    if spec.arch == "mlp":
        x = T.constant(batch.x[batch.loss_mask])
        logits = _mlp_logits(model, x, train=False, rng=None)
        loss = cross_entropy(logits, batch.labels[batch.loss_mask],
                             np.ones(int(batch.loss_mask.sum()), dtype=bool))
    else:
        logits = model.forward(batch, train=False)
        loss = cross_entropy(logits, batch.labels, batch.loss_mask)
    return float(loss.data)


def predict(model: Model, dataset: GraphDataset, flag: int = FLAG_TEST,
            batch_size: int = 512) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Predictions for every node carrying `flag` (policy-aware).

    Returns (y_true, y_pred, node_ids) in deterministic dataset order.
    """
    stats = ensure_norm_stats(dataset)
    norm = lambda x: apply_normalization(x, stats)
    policy = dataset.label_policy
    sgs = [sg for sg in dataset.subgraphs if sg.split == flag]
    y_true, y_pred, ids = [], [], []
    for chunk in _batches(sgs, batch_size):
        batch = collate(chunk, model.spec.xi, policy, loss_flag=flag,
                        transform=norm)
        if not batch.loss_mask.any():
            continue
        if model.spec.arch == "mlp":
            logits = _mlp_logits(model, T.constant(batch.x[batch.loss_mask]),
                                 train=False, rng=None).data
            rows = np.flatnonzero(batch.loss_mask)
        else:
            logits = model.forward(batch, train=False).data[batch.loss_mask]
            rows = np.flatnonzero(batch.loss_mask)
        y_pred.append(logits.argmax(axis=1))
        y_true.append(batch.labels[rows])
        node_ids = []
        for sg in chunk:
            node_ids.extend(sg.node_ids)
        ids.extend([node_ids[r] for r in rows])
    if not y_true:
        raise InvalidStateError(f"no nodes carry flag {flag}")
    return np.concatenate(y_true), np.concatenate(y_pred), ids


def save_model(path, model: Model, stats: NormalizationStats | None,
               seed: int) -> None:
    """Bit-exact checkpoint: spec + parameters + normalization + seed."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "spec": model.spec.to_dict(),
        "seed": seed,
        "norm": stats.to_dict() if stats is not None else None,
    }
    arrays = {f"param_{i}": p.data for i, p in enumerate(model.params())}
    np.savez(path, meta=np.frombuffer(
        json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8),
        **arrays)


def load_model(path) -> tuple[Model, NormalizationStats | None, int]:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(bytes(z["meta"]).decode("utf-8"))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise DataError(f"unsupported checkpoint version {meta.get('version')}")
        spec = ModelSpec.from_dict(meta["spec"])
        model = Model(spec, seed=0)
        values = [z[f"param_{i}"] for i in range(len(model.params()))]
        model.set_param_values(values)
        stats = NormalizationStats.from_dict(meta["norm"]) \
            if meta["norm"] is not None else None
    return model, stats, meta["seed"]
