"""Command-line pipeline: synth | ingest | build | train | eval |
importance | report | compare-settings.

Config precedence is flags > --config file > built-in defaults; every
command persists its resolved config beside its outputs. Timestamps go
only to the sidecar .log file so artifact bytes are reproducible.

Exit codes: 0 success, 2 usage/config, 3 data, 4 training divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import eval as ev
from . import gisio, graphgen, pipeline, report as rpt, schema, synth
from .errors import (
    BuildingClfError,
    DataError,
    InvalidConfigError,
    InvalidGeometryError,
    InvalidInputError,
    InvalidStateError,
    TrainingDivergedError,
    UndefinedValueError,
)
from .feature import compute_feature_matrix
from .graphgen import FLAG_TEST, FLAG_TRAIN, FLAG_VAL
from .nn.specs import ARCHITECTURES

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 2, 3, 4

SETTING_COLUMNS = ["4-hop (center)", "2-hop (center)",
                   "distance (center)", "distance (all)"]


class _Log:
    """Timestamped sidecar log; stdout mirrors without timestamps."""

    def __init__(self, path: Path | None, quiet=False):
        self.path = path
        self.quiet = quiet
        if path:
            path.parent.mkdir(parents=True, exist_ok=True)
            self._f = open(path, "a")
        else:
            self._f = None

    def __call__(self, msg: str):
        if self._f:
            stamp = time.strftime("%Y-%m-%d %H:%M:%S")
            self._f.write(f"[{stamp}] {msg}\n")
            self._f.flush()
        if not self.quiet:
            print(msg)

    def close(self):
        if self._f:
            self._f.close()


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """flags > config file > defaults."""
    cfg = dict(defaults)
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfigError(f"cannot read config {args.config}: {exc}")
    for key in defaults:
        if key in file_cfg:
            cfg[key] = file_cfg[key]
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            cfg[key] = cli_val
    return cfg


def _persist_config(cfg: dict, out_path: Path, command: str):
    side = out_path.parent / (out_path.name + ".config.json")
    side.parent.mkdir(parents=True, exist_ok=True)
    side.write_text(json.dumps({"command": command, **cfg}, indent=2,
                               sort_keys=True) + "\n")


def _parse_ratios(text: str) -> tuple:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise InvalidConfigError(f"expected three ratios, got {text!r}")
    return tuple(parts)


def _parse_fanouts(text: str | None):
    if not text:
        return None
    return [int(x) for x in text.split(",")]


def _parse_mix(text: str | None):
    if not text:
        return None
    mix = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        mix[key.strip()] = float(val)
    return mix


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    defaults = dict(seed=0, n=50000, noise=0.05, label_coverage=0.5,
                    landuse_coverage=0.55, mix=None, out="town")
    cfg = _resolve(args, defaults)
    outdir = Path(cfg["out"])
    log = _Log(outdir / "synth.log")
    params = synth.TownParams(
        seed=cfg["seed"], n_buildings=cfg["n"], noise=cfg["noise"],
        label_coverage=cfg["label_coverage"],
        landuse_coverage=cfg["landuse_coverage"],
        class_mix=_parse_mix(cfg["mix"]))
    paths = synth.write_town(params, outdir)
    _persist_config(cfg, outdir / "town", "synth")
    log(f"wrote {', '.join(str(p) for p in paths.values())}")
    log.close()
    return EXIT_OK


def cmd_ingest(args) -> int:
    defaults = dict(footprints=None, landuse=[], degurba=None, out=None,
                    country_property="country", country_file=None,
                    tag_table=None, landuse_table=None, crs="EPSG:3035")
    cfg = _resolve(args, defaults)
    if not cfg["footprints"] or not cfg["out"]:
        raise InvalidConfigError("ingest requires --footprints and --out")
    out = Path(cfg["out"])
    log = _Log(out.parent / (out.name + ".log"))
    config = gisio.IngestConfig(
        footprints=cfg["footprints"], landuse=list(cfg["landuse"]),
        degurba=cfg["degurba"], country_property=cfg["country_property"],
        country_file=cfg["country_file"], tag_table=cfg["tag_table"],
        landuse_table=cfg["landuse_table"], crs=cfg["crs"])
    records, rejects = gisio.ingest_footprints(config)
    out.parent.mkdir(parents=True, exist_ok=True)
    gisio.save_buildings(records, out)
    if rejects.entries:
        reject_path = out.parent / (out.name + ".rejects.csv")
        with open(reject_path, "w") as f:
            for fid, reason in rejects.entries:
                f.write(f"{fid},{reason}\n")
        log(f"{len(rejects.entries)} features rejected "
            f"(see {reject_path.name})")
    labeled = sum(r.class_label is not None for r in records)
    log(f"ingested {len(records)} buildings ({labeled} labeled) -> {out}")
    _persist_config(cfg, out, "ingest")
    log.close()
    return EXIT_OK


def cmd_build(args) -> int:
    defaults = dict(store=None, out=None, n_graphs=5000,
                    n_sub=graphgen.DEFAULT_N_SUB, seed=0, mode="distance",
                    hops=4, ratios="0.7,0.15,0.15", label_policy="all",
                    workers=1)
    cfg = _resolve(args, defaults)
    if not cfg["store"] or not cfg["out"]:
        raise InvalidConfigError("build requires --store and --out")
    out = Path(cfg["out"])
    log = _Log(out.parent / (out.name + ".log"))
    buildings = gisio.load_buildings(cfg["store"])
    log(f"loaded {len(buildings)} buildings; computing features")
    features = compute_feature_matrix(buildings)
    log("generating subgraphs")
    dataset = graphgen.generate_dataset(
        buildings, features, n_graphs=cfg["n_graphs"], seed=cfg["seed"],
        n_sub=cfg["n_sub"], mode=cfg["mode"], hops=cfg["hops"],
        ratios=_parse_ratios(cfg["ratios"]), label_policy=cfg["label_policy"],
        workers=cfg["workers"])
    from .nn.train import ensure_norm_stats
    ensure_norm_stats(dataset)
    out.parent.mkdir(parents=True, exist_ok=True)
    gisio.save_dataset(dataset, out)
    log(f"wrote {len(dataset.subgraphs)} subgraphs -> {out}")
    _persist_config(cfg, out, "build")
    log.close()
    return EXIT_OK


def cmd_train(args) -> int:
    defaults = dict(data=None, out=None, arch="transformer",
                    task=schema.TASK_COMBINED, seed=0, fanouts=None,
                    label_policy=None, hidden=None, epochs=None,
                    patience=None, batch_size=None, lr=None, dropout=None)
    cfg = _resolve(args, defaults)
    if not cfg["data"] or not cfg["out"]:
        raise InvalidConfigError("train requires --data and --out")
    if cfg["arch"] not in ARCHITECTURES:
        raise InvalidConfigError(f"unknown architecture {cfg['arch']!r}")
    out = Path(cfg["out"])
    log = _Log(out.parent / (out.name + ".log"))
    dataset = gisio.load_dataset(cfg["data"])
    dataset = pipeline.remap_for_task(dataset, cfg["task"])
    if cfg["label_policy"]:
        dataset = pipeline.with_label_policy(dataset, cfg["label_policy"])
    overrides = {k: cfg[v] for k, v in
                 [("hidden", "hidden"), ("max_epochs", "epochs"),
                  ("patience", "patience"), ("batch_size", "batch_size"),
                  ("lr", "lr"), ("dropout", "dropout")] if cfg[v] is not None}
    fanouts = _parse_fanouts(cfg["fanouts"])
    from .nn.specs import model_spec as _make_spec
    probe = _make_spec(cfg["arch"], n_classes=dataset.num_classes(), **overrides)
    if fanouts is not None and probe.is_gnn \
            and len(fanouts) != probe.n_gnn_layers:
        raise InvalidConfigError(
            f"fanouts length {len(fanouts)} != {probe.n_gnn_layers} GNN layers")
    model, train_report, spec = pipeline.train_any(
        dataset, cfg["arch"], cfg["seed"], overrides, fanouts=fanouts,
        log=log)
    out.parent.mkdir(parents=True, exist_ok=True)
    pipeline.save_checkpoint(out, model, spec, dataset.norm_stats, cfg["seed"])
    if train_report:
        side = out.parent / (out.name + ".train.json")
        side.write_text(json.dumps(train_report.to_dict(), indent=2,
                                   sort_keys=True) + "\n")
        log(f"stopped at epoch {train_report.stopped_epoch} "
            f"(best {train_report.best_epoch}); "
            f"{train_report.loss_terms_per_epoch} loss terms per epoch")
    log(f"saved checkpoint -> {out}")
    _persist_config(cfg, out, "train")
    log.close()
    return EXIT_OK


def _attrs_map(store_path) -> dict:
    if not store_path:
        return {}
    return {r.id: {"country": r.country, "degurba": r.degurba}
            for r in gisio.load_buildings(store_path)}


def cmd_eval(args) -> int:
    defaults = dict(data=None, model=None, out=None, store=None)
    cfg = _resolve(args, defaults)
    if not cfg["data"] or not cfg["model"] or not cfg["out"]:
        raise InvalidConfigError("eval requires --data, --model, and --out")
    out = Path(cfg["out"])
    log = _Log(out.parent / (out.name + ".log"))
    dataset = gisio.load_dataset(cfg["data"])
    model, spec, stats, _seed = pipeline.load_any_checkpoint(cfg["model"])
    task = {9: schema.TASK_COMBINED, 5: schema.TASK_TYPOLOGY,
            2: schema.TASK_BINARY}[spec.n_classes]
    dataset = pipeline.remap_for_task(dataset, task)
    if stats is not None:
        dataset.norm_stats = stats
    report = pipeline.evaluate_model(model, dataset,
                                     attrs_by_id=_attrs_map(cfg["store"]))
    try:
        report.notes["homophily_ratio"] = graphgen.homophily_ratio(dataset)
    except UndefinedValueError:
        pass
    report.notes["macro_f1_excludes_absent_classes"] = True
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json() + "\n")
    log(f"task {task}: OA {report.oa:.4f} kappa {report.kappa:.4f} "
        f"macro-F1 {report.macro_f1:.4f} (n={report.n_test})")
    _persist_config(cfg, out, "eval")
    log.close()
    return EXIT_OK


def cmd_importance(args) -> int:
    defaults = dict(data=None, model=None, out=None, seed=0)
    cfg = _resolve(args, defaults)
    if not cfg["data"] or not cfg["model"] or not cfg["out"]:
        raise InvalidConfigError(
            "importance requires --data, --model, and --out")
    out = Path(cfg["out"])
    log = _Log(out.parent / (out.name + ".log"))
    dataset = gisio.load_dataset(cfg["data"])
    model, spec, stats, _ = pipeline.load_any_checkpoint(cfg["model"])
    task = {9: schema.TASK_COMBINED, 5: schema.TASK_TYPOLOGY,
            2: schema.TASK_BINARY}[spec.n_classes]
    dataset = pipeline.remap_for_task(dataset, task)
    if stats is not None:
        dataset.norm_stats = stats
    imp = pipeline.importance_for_model(model, dataset, seed=cfg["seed"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(imp.to_dict(), indent=2, sort_keys=True) + "\n")
    top = int(np.argmax(imp.per_feature))
    log(f"base kappa {imp.base_kappa:.4f}; "
        f"top feature {schema.FEATURE_NAMES[top]}")
    _persist_config(cfg, out, "importance")
    log.close()
    return EXIT_OK


def cmd_report(args) -> int:
    defaults = dict(reports=[], importance=None, outdir="report")
    cfg = _resolve(args, defaults)
    if not cfg["reports"]:
        raise InvalidConfigError("report requires at least one --reports file")
    outdir = Path(cfg["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    log = _Log(outdir / "report.log")
    loaded: dict[str, ev.EvalReport] = {}
    for path in cfg["reports"]:
        rep = ev.EvalReport.from_json(Path(path).read_text())
        loaded[rep.task] = rep
    rpt.metrics_csv(loaded, outdir / "metrics.csv")
    for task, rep in loaded.items():
        rpt.per_class_csv(rep, outdir / f"per_class_{task}.csv")
        rpt.confusion_svg(rep, outdir / f"confusion_{task}.svg")
        rpt.f1_bars_svg(rep, outdir / f"f1_{task}.svg")
        for name in rep.breakdowns:
            rpt.breakdown_csv(rep, name,
                              outdir / f"breakdown_{name}_{task}.csv")
    if cfg["importance"]:
        d = json.loads(Path(cfg["importance"]).read_text())
        imp = ev.ImportanceReport(
            base_kappa=d["base_kappa"], per_feature=d["per_feature"],
            per_group=d["per_group"], impurity=d.get("impurity"))
        rpt.importance_svg(imp, outdir / "importance_top.svg",
                           outdir / "importance_groups.svg")
    log(f"wrote report tables and figures -> {outdir}")
    _persist_config(cfg, outdir / "report", "report")
    log.close()
    return EXIT_OK


def cmd_compare_settings(args) -> int:
    defaults = dict(store=None, outdir="compare", n_graphs=5000,
                    n_sub=graphgen.DEFAULT_N_SUB, seed=0, splits=2, seeds=5,
                    arch="transformer", tasks=",".join(schema.TASKS),
                    hidden=None, epochs=None, patience=None, lr=None,
                    batch_size=None, workers=1)
    cfg = _resolve(args, defaults)
    if not cfg["store"]:
        raise InvalidConfigError("compare-settings requires --store")
    outdir = Path(cfg["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    log = _Log(outdir / "compare.log")
    overrides = {k: cfg[v] for k, v in
                 [("hidden", "hidden"), ("max_epochs", "epochs"),
                  ("patience", "patience"), ("lr", "lr"),
                  ("batch_size", "batch_size")] if cfg[v] is not None}
    tasks = [t.strip() for t in str(cfg["tasks"]).split(",") if t.strip()]
    table, raw = compare_settings(
        store_path=cfg["store"], n_graphs=cfg["n_graphs"],
        n_sub=cfg["n_sub"], seed=cfg["seed"], n_splits=cfg["splits"],
        n_seeds=cfg["seeds"], arch=cfg["arch"], tasks=tasks,
        overrides=overrides, workers=cfg["workers"], log=log)
    rpt.compare_settings_csv(table, SETTING_COLUMNS,
                             outdir / "compare_settings.csv")
    (outdir / "compare_settings.json").write_text(
        json.dumps(raw, indent=2, sort_keys=True) + "\n")
    log(f"wrote {outdir / 'compare_settings.csv'}")
    _persist_config(cfg, outdir / "compare", "compare-settings")
    log.close()
    return EXIT_OK


def compare_settings(store_path, n_graphs, n_sub, seed, n_splits, n_seeds,
                     arch, tasks, overrides, workers=1, log=None):
    """Kappa table over subgraph-generation settings and label policies."""
    buildings = gisio.load_buildings(store_path)
    if log:
        log(f"{len(buildings)} buildings; computing features")
    features = compute_feature_matrix(buildings)
    datasets = {}
    for mode in graphgen.MODES:
        if log:
            log(f"building {mode} dataset")
        datasets[mode] = graphgen.generate_dataset(
            buildings, features, n_graphs=n_graphs, seed=seed, n_sub=n_sub,
            mode=mode, hops=4, label_policy="all", workers=workers)

    settings = [
        ("4-hop (center)", graphgen.MODE_UNCONSTRAINED, "center", False),
        ("2-hop (center)", graphgen.MODE_TWO_HOP, "center", False),
        ("distance (center)", graphgen.MODE_DISTANCE, "center", True),
        ("distance (all)", graphgen.MODE_DISTANCE, "all", True),
    ]
    table: dict[str, dict[str, str]] = {}
    raw: dict[str, dict[str, list[float]]] = {}
    for task in tasks:
        table[task] = {}
        raw[task] = {}
        for col, mode, policy, sample in settings:
            base = pipeline.remap_for_task(datasets[mode], task)
            ds = pipeline.with_label_policy(base, policy)
            from .nn.specs import model_spec as _ms
            spec_probe = _ms(arch, n_classes=schema.task_num_classes(task),
                             **overrides)
            fanouts = [3, 3, 2, 2][:spec_probe.n_gnn_layers] \
                if (sample and spec_probe.is_gnn) else None

            def run(split, seed_idx, ds=ds, fanouts=fanouts):
                graphgen.assign_splits(ds.subgraphs, (0.7, 0.15, 0.15),
                                       seed=seed + 1000 * (split + 1))
                ds.norm_stats = None
                model, _, spec = pipeline.train_any(
                    ds, arch, seed=seed + 7919 * seed_idx + split,
                    overrides=dict(overrides), fanouts=fanouts)
                y_true, y_pred, _ = pipeline.predict_any(model, ds, FLAG_TEST)
                return ev.evaluate(y_true, y_pred, task)

            agg = ev.cross_validate(run, n_splits, n_seeds, log=log)
            table[task][col] = f"{agg.kappa:.4f} ± {agg.kappa_std:.4f}"
            raw[task][col] = {"kappa": agg.kappa, "kappa_std": agg.kappa_std,
                              "failed": agg.failed_runs}
            if log:
                log(f"{task} / {col}: {table[task][col]}")
    return table, raw


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="buildingclf",
        description="Building type/function classification pipeline")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(fn=fn)
        sp.add_argument("--config", help="JSON config file (flags override)")
        return sp

    sp = add("synth", cmd_synth, "generate a synthetic town")
    sp.add_argument("--seed", type=int, help="generator seed (default 0)")
    sp.add_argument("--n", type=int, help="target building count (default 50000)")
    sp.add_argument("--noise", type=float, help="label noise rate (default 0.05)")
    sp.add_argument("--label-coverage", dest="label_coverage", type=float,
                    help="share of buildings carrying a tag (default 0.5)")
    sp.add_argument("--landuse-coverage", dest="landuse_coverage", type=float,
                    help="share of urban districts with land use (default 0.55)")
    sp.add_argument("--mix", help="district mix, e.g. detached=0.3,semi=0.2")
    sp.add_argument("--out", help="output directory (default town)")

    sp = add("ingest", cmd_ingest, "ingest GeoJSON layers into a store")
    sp.add_argument("--footprints", help="buildings FeatureCollection")
    sp.add_argument("--landuse", nargs="*", help="land-use layers (ua/clc)")
    sp.add_argument("--degurba", help="degree-of-urbanization layer")
    sp.add_argument("--country-property", dest="country_property",
                    help="feature property holding the country code")
    sp.add_argument("--country-file", dest="country_file",
                    help="country polygons layer")
    sp.add_argument("--tag-table", dest="tag_table",
                    help="override tag mapping CSV")
    sp.add_argument("--landuse-table", dest="landuse_table",
                    help="override land-use mapping CSV")
    sp.add_argument("--crs", help="declared CRS, must be metric")
    sp.add_argument("--out", help="output building store (.jsonl)")

    sp = add("build", cmd_build, "build a localized-subgraph dataset")
    sp.add_argument("--store", help="building store from ingest")
    sp.add_argument("--n-graphs", dest="n_graphs", type=int,
                    help="number of subgraphs (default 5000)")
    sp.add_argument("--n-sub", dest="n_sub", type=int,
                    help="minimum buildings per subgraph (default 20)")
    sp.add_argument("--seed", type=int, help="sampling seed (default 0)")
    sp.add_argument("--mode", choices=graphgen.MODES,
                    help="subgraph construction mode (default distance)")
    sp.add_argument("--hops", type=int,
                    help="hop depth for unconstrained mode (default 4)")
    sp.add_argument("--ratios", help="train,val,test (default 0.7,0.15,0.15)")
    sp.add_argument("--label-policy", dest="label_policy",
                    choices=["all", "center"],
                    help="loss-label policy recorded in the dataset")
    sp.add_argument("--workers", type=int, help="parallel workers (default 1)")
    sp.add_argument("--out", help="output dataset (.jsonl)")

    sp = add("train", cmd_train, "train a classifier")
    sp.add_argument("--data", help="dataset from build")
    sp.add_argument("--arch", choices=ARCHITECTURES,
                    help="architecture (default transformer)")
    sp.add_argument("--task", choices=schema.TASKS,
                    help="label space (default combined9)")
    sp.add_argument("--seed", type=int, help="training seed (default 0)")
    sp.add_argument("--fanouts", help="neighbor fanouts, e.g. 3,3,2,2")
    sp.add_argument("--label-policy", dest="label_policy",
                    choices=["all", "center"], help="override dataset policy")
    sp.add_argument("--hidden", type=int, help="hidden width override")
    sp.add_argument("--epochs", type=int, help="max epochs override")
    sp.add_argument("--patience", type=int, help="early-stop patience override")
    sp.add_argument("--batch-size", dest="batch_size", type=int,
                    help="batch size override")
    sp.add_argument("--lr", type=float, help="learning rate override")
    sp.add_argument("--dropout", type=float, help="dropout override")
    sp.add_argument("--out", help="output checkpoint (.npz)")

    sp = add("eval", cmd_eval, "evaluate a checkpoint on the test split")
    sp.add_argument("--data", help="dataset from build")
    sp.add_argument("--model", help="checkpoint from train")
    sp.add_argument("--store", help="building store for breakdowns")
    sp.add_argument("--out", help="output report (.json)")

    sp = add("importance", cmd_importance, "feature importance analysis")
    sp.add_argument("--data", help="dataset from build")
    sp.add_argument("--model", help="checkpoint from train")
    sp.add_argument("--seed", type=int, help="shuffle seed (default 0)")
    sp.add_argument("--out", help="output importance file (.json)")

    sp = add("report", cmd_report, "emit CSV/SVG tables and figures")
    sp.add_argument("--reports", nargs="*", help="eval report files")
    sp.add_argument("--importance", help="importance file from importance")
    sp.add_argument("--outdir", help="output directory (default report)")

    sp = add("compare-settings", cmd_compare_settings,
             "kappa table across subgraph-generation settings")
    sp.add_argument("--store", help="building store from ingest/synth")
    sp.add_argument("--outdir", help="output directory (default compare)")
    sp.add_argument("--n-graphs", dest="n_graphs", type=int,
                    help="subgraphs per dataset (default 5000)")
    sp.add_argument("--n-sub", dest="n_sub", type=int,
                    help="minimum buildings per subgraph (default 20)")
    sp.add_argument("--seed", type=int, help="base seed (default 0)")
    sp.add_argument("--splits", type=int, help="cross-validation splits (default 2)")
    sp.add_argument("--seeds", type=int, help="random seeds per split (default 5)")
    sp.add_argument("--arch", choices=ARCHITECTURES,
                    help="classifier (default transformer)")
    sp.add_argument("--tasks", help="comma-separated task list (default all)")
    sp.add_argument("--hidden", type=int, help="hidden width override")
    sp.add_argument("--epochs", type=int, help="max epochs override")
    sp.add_argument("--patience", type=int, help="patience override")
    sp.add_argument("--lr", type=float, help="learning rate override")
    sp.add_argument("--batch-size", dest="batch_size", type=int,
                    help="batch size override")
    sp.add_argument("--workers", type=int, help="parallel workers (default 1)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InvalidConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDivergedError as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (DataError, InvalidGeometryError, InvalidInputError,
            InvalidStateError, UndefinedValueError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BuildingClfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
