import json
from pathlib import Path

import pytest

from buildingclf.cli import main


def run(argv):
    return main(argv)


@pytest.fixture(scope="module")
def town_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("town")
    code = run(["synth", "--seed", "7", "--n", "900", "--out", str(d),
                "--label-coverage", "0.8"])
    assert code == 0
    return d


@pytest.fixture(scope="module")
def store_path(town_dir, tmp_path_factory):
    d = tmp_path_factory.mktemp("store")
    out = d / "store.jsonl"
    code = run(["ingest",
                "--footprints", str(town_dir / "buildings.geojson"),
                "--landuse", str(town_dir / "landuse.geojson"),
                "--degurba", str(town_dir / "degurba.geojson"),
                "--out", str(out)])
    assert code == 0
    return out


@pytest.fixture(scope="module")
def dataset_path(store_path, tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    out = d / "data.jsonl"
    code = run(["build", "--store", str(store_path), "--out", str(out),
                "--n-graphs", "60", "--n-sub", "8", "--seed", "3"])
    assert code == 0
    return out


class TestPipeline:
    def test_synth_outputs_exist(self, town_dir):
        for name in ("buildings.geojson", "landuse.geojson",
                     "degurba.geojson", "truth.json"):
            assert (town_dir / name).exists()
        assert (town_dir / "town.config.json").exists()

    def test_full_chain_transformer(self, dataset_path, store_path, tmp_path):
        model = tmp_path / "model.npz"
        code = run(["train", "--data", str(dataset_path), "--arch",
                    "transformer", "--out", str(model), "--hidden", "16",
                    "--epochs", "2", "--batch-size", "16", "--seed", "1"])
        assert code == 0
        assert model.exists()
        report = tmp_path / "report.json"
        code = run(["eval", "--data", str(dataset_path), "--model",
                    str(model), "--store", str(store_path),
                    "--out", str(report)])
        assert code == 0
        doc = json.loads(report.read_text())
        assert 0 <= doc["oa"] <= 1
        assert "country" in doc["breakdowns"]
        # resolved config persisted
        assert (tmp_path / "report.json.config.json").exists()

    def test_tree_and_forest_chain(self, dataset_path, tmp_path):
        for arch in ("tree", "forest"):
            model = tmp_path / f"{arch}.npz"
            assert run(["train", "--data", str(dataset_path), "--arch", arch,
                        "--out", str(model)]) == 0
            report = tmp_path / f"{arch}_report.json"
            assert run(["eval", "--data", str(dataset_path), "--model",
                        str(model), "--out", str(report)]) == 0

    def test_task_remap_binary(self, dataset_path, tmp_path):
        model = tmp_path / "binary.npz"
        assert run(["train", "--data", str(dataset_path), "--arch", "mlp",
                    "--task", "binary2", "--out", str(model), "--hidden",
                    "16", "--epochs", "2"]) == 0
        report = tmp_path / "rep.json"
        assert run(["eval", "--data", str(dataset_path), "--model",
                    str(model), "--out", str(report)]) == 0
        doc = json.loads(report.read_text())
        assert doc["task"] == "binary2"
        assert len(doc["confusion"]) == 2

    def test_label_policy_center_fewer_terms(self, dataset_path, tmp_path):
        logs = {}
        for policy in ("all", "center"):
            model = tmp_path / f"m_{policy}.npz"
            assert run(["train", "--data", str(dataset_path), "--arch",
                        "sage", "--label-policy", policy, "--out", str(model),
                        "--hidden", "16", "--epochs", "2",
                        "--batch-size", "16"]) == 0
            side = json.loads((tmp_path / f"m_{policy}.npz.train.json"
                               ).read_text())
            logs[policy] = side["loss_terms_per_epoch"]
        assert logs["center"] < logs["all"]

    def test_report_command(self, dataset_path, tmp_path):
        model = tmp_path / "m.npz"
        assert run(["train", "--data", str(dataset_path), "--arch", "tree",
                    "--out", str(model)]) == 0
        rep = tmp_path / "r.json"
        assert run(["eval", "--data", str(dataset_path), "--model",
                    str(model), "--out", str(rep)]) == 0
        imp = tmp_path / "imp.json"
        assert run(["importance", "--data", str(dataset_path), "--model",
                    str(model), "--out", str(imp)]) == 0
        outdir = tmp_path / "figures"
        assert run(["report", "--reports", str(rep), "--importance",
                    str(imp), "--outdir", str(outdir)]) == 0
        metrics = (outdir / "metrics.csv").read_text()
        for row in ("Overall accuracy", "Cohen's kappa", "Range of F1-scores",
                    "Macro F1-score"):
            assert row in metrics
        assert (outdir / "confusion_combined9.svg").exists()
        assert (outdir / "importance_top.svg").exists()

    def test_missing_input_usage_error(self, tmp_path):
        assert run(["train", "--arch", "mlp"]) == 2
        assert run(["build", "--store", "nope.jsonl",
                    "--out", str(tmp_path / "x")]) == 3

    def test_help_documents_every_flag(self, capsys):
        from buildingclf.cli import build_parser
        parser = build_parser()
        sub_actions = next(a for a in parser._actions
                           if hasattr(a, "choices") and a.choices)
        for name, sp in sub_actions.choices.items():
            text = sp.format_help()
            for action in sp._actions:
                for opt in action.option_strings:
                    if opt.startswith("--"):
                        assert opt in text, f"{name}: {opt} missing from help"
                assert action.help, f"{name}: {action.option_strings} lacks help"

    def test_bad_fanouts_config_error(self, dataset_path, tmp_path):
        code = run(["train", "--data", str(dataset_path), "--arch", "sage",
                    "--fanouts", "3,3,2,2,2", "--out",
                    str(tmp_path / "m.npz"), "--hidden", "16"])
        assert code == 2

    def test_config_file_precedence(self, dataset_path, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"arch": "tree", "out": str(tmp_path / "c.npz")}))
        assert run(["train", "--data", str(dataset_path), "--config",
                    str(cfg)]) == 0
        resolved = json.loads((tmp_path / "c.npz.config.json").read_text())
        assert resolved["arch"] == "tree"

    def test_build_determinism_byte_identical(self, store_path, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            assert run(["build", "--store", str(store_path), "--out",
                        str(out), "--n-graphs", "25", "--n-sub", "6",
                        "--seed", "11"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_compare_settings_smoke(self, store_path, tmp_path):
        outdir = tmp_path / "cmp"
        code = run(["compare-settings", "--store", str(store_path),
                    "--outdir", str(outdir), "--n-graphs", "24",
                    "--n-sub", "6", "--splits", "1", "--seeds", "1",
                    "--arch", "sage", "--hidden", "16", "--epochs", "2",
                    "--batch-size", "16", "--tasks", "combined9"])
        assert code == 0
        table = (outdir / "compare_settings.csv").read_text()
        assert "4-hop (center)" in table
        assert "distance (all)" in table
        assert "combined9" in table
