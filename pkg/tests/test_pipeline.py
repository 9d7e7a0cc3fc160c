import numpy as np
import pytest

from buildingclf import graphgen, pipeline, schema
from buildingclf.nn.specs import model_spec

from nn_helpers import random_subgraph


def small_dataset(rng, n=24, labels_range=3):
    sgs = []
    for _ in range(n):
        sg = random_subgraph(rng, 7, labels_range=labels_range)
        sg.node_features[:, :labels_range] = \
            np.eye(labels_range)[sg.labels] * 2.0
        sgs.append(sg)
    graphgen.assign_splits(sgs, (0.5, 0.25, 0.25), seed=3)
    return graphgen.GraphDataset(sgs, {"task": schema.TASK_COMBINED})


class TestTrainAnyAndCheckpoints:
    def test_tree_checkpoint_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        ds = small_dataset(rng)
        model, rep, spec = pipeline.train_any(ds, "tree", seed=1)
        assert rep is None
        path = tmp_path / "tree.npz"
        pipeline.save_checkpoint(path, model, spec, ds.norm_stats, seed=1)
        loaded, lspec, _, seed = pipeline.load_any_checkpoint(path)
        assert seed == 1
        assert lspec.arch == "tree"
        X, y, _ = pipeline.flat_flagged(ds, graphgen.FLAG_TEST)
        assert np.array_equal(model.predict(X), loaded.predict(X))

    def test_forest_checkpoint_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        ds = small_dataset(rng)
        model, _, spec = pipeline.train_any(
            ds, "forest", seed=2, overrides=dict(n_trees=4, max_depth=5))
        path = tmp_path / "forest.npz"
        pipeline.save_checkpoint(path, model, spec, None, seed=2)
        loaded, _, _, _ = pipeline.load_any_checkpoint(path)
        X, y, _ = pipeline.flat_flagged(ds, graphgen.FLAG_TEST)
        assert np.array_equal(model.predict(X), loaded.predict(X))
        assert np.array_equal(model.importances_, loaded.importances_)

    def test_nn_checkpoint_through_dispatch(self, tmp_path):
        rng = np.random.default_rng(2)
        ds = small_dataset(rng)
        model, rep, spec = pipeline.train_any(
            ds, "gcn", seed=3,
            overrides=dict(hidden=8, max_epochs=2, batch_size=8, dropout=0.0))
        assert rep is not None
        path = tmp_path / "gcn.npz"
        pipeline.save_checkpoint(path, model, spec, ds.norm_stats, seed=3)
        loaded, lspec, stats, _ = pipeline.load_any_checkpoint(path)
        assert lspec.arch == "gcn"
        for a, b in zip(model.params(), loaded.params()):
            assert np.array_equal(a.data, b.data)

    def test_flat_flagged_center_policy(self):
        rng = np.random.default_rng(3)
        ds = small_dataset(rng)
        X_all, y_all, _ = pipeline.flat_flagged(ds, graphgen.FLAG_TRAIN)
        ds_center = pipeline.with_label_policy(ds, "center")
        X_c, y_c, _ = pipeline.flat_flagged(ds_center, graphgen.FLAG_TRAIN)
        assert len(X_c) < len(X_all)
        n_train_sgs = sum(sg.split == graphgen.FLAG_TRAIN for sg in ds.subgraphs)
        assert len(X_c) == n_train_sgs  # exactly the centers

    def test_evaluate_model_with_breakdowns(self):
        rng = np.random.default_rng(4)
        ds = small_dataset(rng)
        model, _, _ = pipeline.train_any(ds, "tree", seed=5)
        attrs = {f"n{i}": {"country": "de" if i % 2 else "fr",
                           "degurba": "city"} for i in range(10)}
        rep = pipeline.evaluate_model(model, ds, attrs_by_id=attrs)
        assert "country" in rep.breakdowns
        assert rep.n_test > 0

    def test_gnn_permutation_importance_runs(self):
        rng = np.random.default_rng(5)
        ds = small_dataset(rng, n=16)
        model, _, _ = pipeline.train_any(
            ds, "sage", seed=6,
            overrides=dict(hidden=8, max_epochs=2, batch_size=8, dropout=0.0))
        imp = pipeline.importance_for_model(model, ds, seed=1)
        assert len(imp.per_feature) == schema.N_FEATURES
        assert set(imp.per_group) == set(schema.GROUP_SLICES)
        # features must be restored after shuffling
        for sg in ds.subgraphs:
            assert np.isfinite(sg.node_features).all()

    def test_remap_binary_consistency(self):
        rng = np.random.default_rng(6)
        ds = small_dataset(rng, labels_range=9)
        b = pipeline.remap_for_task(ds, schema.TASK_BINARY)
        assert b.num_classes() == 2
        for sg9, sg2 in zip(ds.subgraphs, b.subgraphs):
            for l9, l2 in zip(sg9.labels, sg2.labels):
                if l9 >= 0:
                    assert l2 == schema.remap_label(int(l9), schema.TASK_BINARY)
