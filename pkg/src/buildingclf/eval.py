"""Metrics and analyses: overall accuracy, chance-corrected agreement,
per-class F1, confusion matrices, grouped breakdowns, cross-validation
aggregation, and permutation feature importance."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import schema
from .errors import InvalidInputError, UndefinedValueError

REPORT_VERSION = 1
LOW_SUPPORT_THRESHOLD = 50


def _check_vectors(pred, truth):
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise InvalidInputError("prediction/truth vectors must match in length")
    if len(pred) == 0:
        raise InvalidInputError("empty label vectors")
    return pred, truth


def overall_accuracy(pred, truth) -> float:
    """Share of correct labels."""
    pred, truth = _check_vectors(pred, truth)
    return float((pred == truth).mean())


def cohens_kappa(pred, truth) -> float:
    """Chance-corrected agreement: (OA - p_e) / (1 - p_e)."""
    pred, truth = _check_vectors(pred, truth)
    n = len(pred)
    k = int(max(pred.max(), truth.max())) + 1
    n_hat = np.bincount(pred, minlength=k)
    n_true = np.bincount(truth, minlength=k)
    p_e = float(n_hat @ n_true) / (n * n)
    if p_e >= 1.0:
        raise UndefinedValueError("kappa undefined: both vectors constant")
    oa = float((pred == truth).mean())
    return (oa - p_e) / (1.0 - p_e)


def confusion_matrix(pred, truth, k: int) -> np.ndarray:
    """(k, k) counts; rows are ground truth, columns predictions."""
    pred, truth = _check_vectors(pred, truth)
    out = np.zeros((k, k), dtype=np.int64)
    np.add.at(out, (truth, pred), 1)
    return out


@dataclass
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int
    present: bool
    precision_defined: bool


@dataclass
class F1Report:
    per_class: list[ClassScores]
    macro_f1: float
    f1_range: tuple[float, float]


def f1_scores(pred, truth, k: int) -> F1Report:
    """One-vs-rest precision/recall/F1 per class.

    Classes absent from the truth are excluded from the macro mean and
    the range; a class never predicted gets precision 0 (flagged).
    """
    if k < 2:
        raise InvalidInputError("f1_scores needs k >= 2 classes")
    cm = confusion_matrix(pred, truth, k)
    per_class = []
    for c in range(k):
        tp = cm[c, c]
        pred_c = cm[:, c].sum()
        true_c = cm[c, :].sum()
        precision_defined = pred_c > 0
        precision = tp / pred_c if pred_c else 0.0
        recall = tp / true_c if true_c else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall > 0 else 0.0)
        per_class.append(ClassScores(float(precision), float(recall),
                                     float(f1), int(true_c), bool(true_c > 0),
                                     bool(precision_defined)))
    present = [s.f1 for s in per_class if s.present]
    macro = float(np.mean(present)) if present else 0.0
    rng = (min(present), max(present)) if present else (0.0, 0.0)
    return F1Report(per_class, macro, rng)


def breakdown(pred, truth, groups) -> dict[str, dict]:
    """Per-group overall accuracy with supports; small groups flagged."""
    pred, truth = _check_vectors(pred, truth)
    groups = list(groups)
    if len(groups) != len(pred):
        raise InvalidInputError("one group key per test node required")
    out: dict[str, dict] = {}
    for g in sorted(set(groups)):
        sel = np.array([x == g for x in groups])
        n = int(sel.sum())
        out[str(g)] = {
            "oa": float((pred[sel] == truth[sel]).mean()),
            "n": n,
            "low_support": n < LOW_SUPPORT_THRESHOLD,
        }
    return out


@dataclass
class EvalReport:
    task: str
    n_test: int
    oa: float
    kappa: float
    macro_f1: float
    f1_range: tuple[float, float]
    per_class: list[dict]
    confusion: list[list[int]]
    breakdowns: dict[str, dict] = field(default_factory=dict)
    # dispersion across runs, when aggregated
    oa_std: float = 0.0
    kappa_std: float = 0.0
    macro_f1_std: float = 0.0
    n_runs: int = 1
    failed_runs: list[str] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "task": self.task,
            "n_test": self.n_test,
            "oa": self.oa,
            "oa_std": self.oa_std,
            "kappa": self.kappa,
            "kappa_std": self.kappa_std,
            "macro_f1": self.macro_f1,
            "macro_f1_std": self.macro_f1_std,
            "f1_range": list(self.f1_range),
            "per_class": self.per_class,
            "confusion": self.confusion,
            "breakdowns": self.breakdowns,
            "n_runs": self.n_runs,
            "failed_runs": self.failed_runs,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        d = json.loads(text)
        if d.get("version") != REPORT_VERSION:
            raise InvalidInputError(
                f"unsupported report version {d.get('version')}")
        return cls(
            task=d["task"], n_test=d["n_test"], oa=d["oa"], kappa=d["kappa"],
            macro_f1=d["macro_f1"], f1_range=tuple(d["f1_range"]),
            per_class=d["per_class"], confusion=d["confusion"],
            breakdowns=d.get("breakdowns", {}), oa_std=d.get("oa_std", 0.0),
            kappa_std=d.get("kappa_std", 0.0),
            macro_f1_std=d.get("macro_f1_std", 0.0),
            n_runs=d.get("n_runs", 1), failed_runs=d.get("failed_runs", []),
            notes=d.get("notes", {}))


def evaluate(pred, truth, task: str, groups: dict | None = None) -> EvalReport:
    """Full metric bundle for one run.

    groups maps a breakdown name (country, degurba) to one key per node.
    """
    pred, truth = _check_vectors(pred, truth)
    k = schema.task_num_classes(task)
    f1 = f1_scores(pred, truth, k)
    names = schema.task_class_names(task)
    per_class = [{
        "class": names[c],
        "precision": s.precision,
        "recall": s.recall,
        "f1": s.f1,
        "support": s.support,
        "present": s.present,
        "precision_defined": s.precision_defined,
    } for c, s in enumerate(f1.per_class)]
    breakdowns = {}
    if groups:
        for name, keys in groups.items():
            breakdowns[name] = breakdown(pred, truth, keys)
    try:
        kappa = cohens_kappa(pred, truth)
    except UndefinedValueError:
        kappa = float("nan")
    return EvalReport(
        task=task, n_test=len(pred), oa=overall_accuracy(pred, truth),
        kappa=kappa, macro_f1=f1.macro_f1, f1_range=f1.f1_range,
        per_class=per_class,
        confusion=confusion_matrix(pred, truth, k).tolist(),
        breakdowns=breakdowns)


def aggregate_reports(reports: list[EvalReport],
                      failed: list[str] | None = None) -> EvalReport:
    """Mean and sample standard deviation across runs."""
    if not reports:
        raise InvalidInputError("no successful runs to aggregate")
    oas = np.array([r.oa for r in reports])
    kappas = np.array([r.kappa for r in reports])
    macros = np.array([r.macro_f1 for r in reports])
    lo = float(np.mean([r.f1_range[0] for r in reports]))
    hi = float(np.mean([r.f1_range[1] for r in reports]))

    def std(x):
        return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0

    base = reports[0]
    confusion = np.sum([np.asarray(r.confusion) for r in reports], axis=0)
    return EvalReport(
        task=base.task, n_test=int(np.mean([r.n_test for r in reports])),
        oa=float(oas.mean()), kappa=float(kappas.mean()),
        macro_f1=float(macros.mean()), f1_range=(lo, hi),
        per_class=base.per_class, confusion=confusion.tolist(),
        breakdowns=base.breakdowns,
        oa_std=std(oas), kappa_std=std(kappas), macro_f1_std=std(macros),
        n_runs=len(reports), failed_runs=list(failed or []))


def cross_validate(run, n_splits: int, n_seeds: int,
                   log=None) -> EvalReport:
    """Aggregate run(split, seed) -> EvalReport over the full grid.

    Diverged runs are recorded in failed_runs and excluded, never
    silently dropped.
    """
    if n_splits < 1 or n_seeds < 1:
        raise InvalidInputError("n_splits and n_seeds must be >= 1")
    reports, failed = [], []
    for split in range(n_splits):
        for seed in range(n_seeds):
            try:
                reports.append(run(split, seed))
                if log:
                    log(f"split {split} seed {seed}: "
                        f"kappa {reports[-1].kappa:.4f}")
            except Exception as exc:  # noqa: BLE001 - recorded, not silenced
                failed.append(f"split={split} seed={seed}: {exc}")
                if log:
                    log(f"split {split} seed {seed} FAILED: {exc}")
    return aggregate_reports(reports, failed)


@dataclass
class ImportanceReport:
    base_kappa: float
    per_feature: list[float]        # kappa drop per shuffled column
    per_group: dict[str, float]     # kappa drop per shuffled group
    impurity: list[float] | None = None  # forest importances, sum 1

    def to_dict(self) -> dict:
        return {
            "version": REPORT_VERSION,
            "base_kappa": self.base_kappa,
            "per_feature": self.per_feature,
            "feature_names": list(schema.FEATURE_NAMES),
            "per_group": self.per_group,
            "impurity": self.impurity,
        }


def permutation_importance(predict_fn, features: np.ndarray,
                           truth: np.ndarray, seed: int,
                           groups: dict | None = None) -> ImportanceReport:
    """Kappa drop when a feature column (or a whole group) is shuffled.

    predict_fn maps a feature matrix to predicted labels; for graph
    models the caller wraps prediction so permuted rows flow through the
    message passing.
    """
    groups = groups if groups is not None else schema.GROUP_SLICES
    base = cohens_kappa(predict_fn(features), truth)
    rng = np.random.default_rng(seed)
    n = len(features)
    per_feature = []
    for col in range(features.shape[1]):
        perm = rng.permutation(n)
        shuffled = features.copy()
        shuffled[:, col] = shuffled[perm, col]
        per_feature.append(base - cohens_kappa(predict_fn(shuffled), truth))
    per_group = {}
    for name, sl in groups.items():
        perm = rng.permutation(n)
        shuffled = features.copy()
        shuffled[:, sl] = shuffled[perm, sl]
        per_group[name] = base - cohens_kappa(predict_fn(shuffled), truth)
    return ImportanceReport(base, per_feature, per_group)
