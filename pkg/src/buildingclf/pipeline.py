"""High-level orchestration shared by the CLI and the acceptance suite:
train any of the seven classifiers on a graph dataset, predict, and
evaluate with breakdowns."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import eval as ev
from . import schema
from .errors import DataError, InvalidConfigError, InvalidStateError
from .feature import NormalizationStats
from .graphgen import FLAG_TEST, FLAG_TRAIN, GraphDataset, remap_task
from .nn.layers import Model
from .nn.specs import ModelSpec, model_spec
from .nn.train import load_model, predict, save_model, train
from .nn.trees import DecisionTree, RandomForest, forest_fit, tree_fit

CHECKPOINT_VERSION = 1


def with_label_policy(dataset: GraphDataset, policy: str) -> GraphDataset:
    """Same subgraphs and masks, different loss-label policy."""
    if policy == dataset.label_policy:
        return dataset
    return GraphDataset(dataset.subgraphs, dict(dataset.manifest),
                        dataset.norm_stats, dataset.task, policy)


def remap_for_task(dataset: GraphDataset, task: str) -> GraphDataset:
    if task == dataset.task:
        return dataset
    return remap_task(dataset, task)


def flat_flagged(dataset: GraphDataset, flag: int
                 ) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Feature rows, labels, and ids of flagged nodes, dataset order.

    Under the center policy only subgraph centers qualify.
    """
    xs, ys, ids = [], [], []
    for sg in dataset.subgraphs:
        if sg.split != flag:
            continue
        if dataset.label_policy == "center":
            sel = np.zeros(sg.n_nodes(), dtype=bool)
            sel[sg.center_index] = sg.split_flags[sg.center_index] == flag
        else:
            sel = sg.split_flags == flag
        if not sel.any():
            continue
        xs.append(sg.node_features[sel])
        ys.append(sg.labels[sel])
        ids.extend(np.asarray(sg.node_ids)[sel])
    if not xs:
        raise InvalidStateError(f"no nodes carry flag {flag}")
    return np.vstack(xs), np.concatenate(ys), ids


def train_any(dataset: GraphDataset, arch: str, seed: int,
              overrides: dict | None = None,
              fanouts: list[int] | None = None, log=None):
    """Train one classifier; returns (model, train_report_or_None, spec)."""
    overrides = dict(overrides or {})
    spec = model_spec(arch, n_classes=dataset.num_classes(), **overrides)
    if spec.is_tree:
        X, y, _ = flat_flagged(dataset, FLAG_TRAIN)
        if arch == "tree":
            model = tree_fit(X, y, spec)
        else:
            model = forest_fit(X, y, spec, seed=seed)
        return model, None, spec
    model, report = train(dataset, spec, seed, fanouts=fanouts, log=log)
    return model, report, spec


def predict_any(model, dataset: GraphDataset, flag: int = FLAG_TEST
                ) -> tuple[np.ndarray, np.ndarray, list[str]]:
    if isinstance(model, (DecisionTree, RandomForest)):
        X, y, ids = flat_flagged(dataset, flag)
        return y, model.predict(X), ids
    return predict(model, dataset, flag)


def evaluate_model(model, dataset: GraphDataset,
                   attrs_by_id: dict | None = None,
                   flag: int = FLAG_TEST) -> ev.EvalReport:
    """Test-set metric bundle; country/degurba breakdowns when building
    attributes are supplied."""
    y_true, y_pred, ids = predict_any(model, dataset, flag)
    groups = None
    if attrs_by_id:
        groups = {
            "country": [attrs_by_id.get(i, {}).get("country", "") for i in ids],
            "degurba": [str(attrs_by_id.get(i, {}).get("degurba")) for i in ids],
        }
    return ev.evaluate(y_true, y_pred, dataset.task, groups=groups)


def importance_for_model(model, dataset: GraphDataset, seed: int,
                         flag: int = FLAG_TEST) -> ev.ImportanceReport:
    """Permutation importance over the test split; for graph models the
    shuffled columns flow through message passing."""
    if isinstance(model, (DecisionTree, RandomForest)):
        X, y, _ = flat_flagged(dataset, flag)
        report = ev.permutation_importance(model.predict, X, y, seed)
        if isinstance(model, RandomForest):
            report.impurity = model.importances_.tolist()
        elif isinstance(model, DecisionTree):
            report.impurity = model.normalized_importances().tolist()
        return report

    sgs = [sg for sg in dataset.subgraphs if sg.split == flag]
    if not sgs:
        raise InvalidStateError("no test subgraphs for importance analysis")
    sizes = [sg.n_nodes() for sg in sgs]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    base_stack = np.vstack([sg.node_features for sg in sgs])
    y_true, _, _ = predict(model, dataset, flag)

    originals = [sg.node_features for sg in sgs]

    def predict_fn(features):
        for sg, a, b in zip(sgs, offsets[:-1], offsets[1:]):
            sg.node_features = features[a:b]
        try:
            _, y_pred, _ = predict(model, dataset, flag)
        finally:
            for sg, orig in zip(sgs, originals):
                sg.node_features = orig
        return y_pred

    return ev.permutation_importance(predict_fn, base_stack, y_true, seed)


# ---------------------------------------------------------------------------
# Checkpoints for all seven classifiers
# ---------------------------------------------------------------------------

def _tree_arrays(tree: DecisionTree, prefix: str) -> dict:
    return {
        f"{prefix}feature": np.asarray(tree.feature, dtype=np.int64),
        f"{prefix}threshold": np.asarray(tree.threshold, dtype=np.float64),
        f"{prefix}left": np.asarray(tree.left, dtype=np.int64),
        f"{prefix}right": np.asarray(tree.right, dtype=np.int64),
        f"{prefix}prediction": np.asarray(tree.prediction, dtype=np.int64),
        f"{prefix}importances": tree.importances_,
    }


def _tree_from_arrays(z, prefix: str, max_depth: int, n_classes: int,
                      max_features) -> DecisionTree:
    tree = DecisionTree(max_depth, n_classes, max_features)
    tree.feature = z[f"{prefix}feature"].tolist()
    tree.threshold = z[f"{prefix}threshold"].tolist()
    tree.left = z[f"{prefix}left"].tolist()
    tree.right = z[f"{prefix}right"].tolist()
    tree.prediction = z[f"{prefix}prediction"].tolist()
    tree.importances_ = z[f"{prefix}importances"]
    return tree


def save_checkpoint(path, model, spec: ModelSpec,
                    stats: NormalizationStats | None, seed: int) -> None:
    if isinstance(model, Model):
        save_model(path, model, stats, seed)
        return
    meta = {
        "version": CHECKPOINT_VERSION,
        "kind": "forest" if isinstance(model, RandomForest) else "tree",
        "spec": spec.to_dict(),
        "seed": seed,
        "norm": stats.to_dict() if stats is not None else None,
    }
    arrays = {}
    if isinstance(model, RandomForest):
        for i, tree in enumerate(model.trees):
            arrays.update(_tree_arrays(tree, f"t{i}_"))
        arrays["importances"] = model.importances_
        meta["n_trees"] = len(model.trees)
    else:
        arrays.update(_tree_arrays(model, "t0_"))
    np.savez(path, meta=np.frombuffer(
        json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8),
        **arrays)


def load_checkpoint(path):
    """Returns (model, spec, norm_stats, seed) for any classifier kind."""
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(bytes(z["meta"]).decode("utf-8"))
        if "kind" not in meta:
            raise DataError(f"{path}: not a classifier checkpoint")
        spec = ModelSpec.from_dict(meta["spec"])
        stats = NormalizationStats.from_dict(meta["norm"]) \
            if meta.get("norm") else None
        if meta["kind"] == "tree":
            model = _tree_from_arrays(z, "t0_", spec.max_depth,
                                      spec.n_classes, spec.max_features)
        else:
            model = RandomForest(meta["n_trees"], spec.max_depth,
                                 spec.n_classes, spec.max_features)
            model.trees = [
                _tree_from_arrays(z, f"t{i}_", spec.max_depth, spec.n_classes,
                                  spec.max_features)
                for i in range(meta["n_trees"])]
            model.importances_ = z["importances"]
        return model, spec, stats, meta["seed"]


def load_any_checkpoint(path):
    """Dispatch between neural and tree checkpoints."""
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(bytes(z["meta"]).decode("utf-8"))
    if "kind" in meta:
        return load_checkpoint(path)
    model, stats, seed = load_model(path)
    return model, model.spec, stats, seed
