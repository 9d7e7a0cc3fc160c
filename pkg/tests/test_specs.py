import pytest

from buildingclf.errors import InvalidConfigError
from buildingclf.nn.specs import ARCHITECTURES, model_spec


class TestTunedDefaults:
    """The per-architecture defaults are part of the contract."""

    def test_mlp(self):
        s = model_spec("mlp", n_classes=9)
        assert (s.lr, s.batch_size, s.dropout, s.weight_decay) == \
            (1e-4, 1024, 0.35, 1e-5)
        assert (s.n_std_layers, s.n_gnn_layers, s.hidden) == (3, 0, 1024)

    def test_gcn(self):
        s = model_spec("gcn", n_classes=9)
        assert (s.lr, s.batch_size, s.dropout, s.weight_decay) == \
            (5e-4, 256, 0.25, 0.0)
        assert (s.n_std_layers, s.n_gnn_layers, s.hidden) == (2, 2, 512)
        assert s.xi == 500.0

    def test_sage(self):
        s = model_spec("sage", n_classes=9)
        assert (s.lr, s.batch_size, s.dropout) == (1e-4, 256, 0.25)
        assert (s.n_std_layers, s.n_gnn_layers, s.hidden) == (2, 3, 1024)
        assert s.aggregation == "max"
        assert s.xi is None  # edge features unused

    def test_gat(self):
        s = model_spec("gat", n_classes=9)
        assert (s.lr, s.batch_size, s.dropout, s.attn_dropout) == \
            (1e-4, 256, 0.25, 0.0)
        assert (s.n_std_layers, s.n_gnn_layers, s.hidden, s.heads) == \
            (2, 3, 512, 8)
        assert s.leaky_slope == 0.2
        assert s.xi == 50.0

    def test_transformer(self):
        s = model_spec("transformer", n_classes=9)
        assert (s.lr, s.batch_size, s.dropout, s.attn_dropout) == \
            (5e-4, 256, 0.35, 0.0)
        assert (s.n_std_layers, s.n_gnn_layers, s.hidden, s.heads) == \
            (2, 4, 512, 8)
        assert s.residual is False
        assert s.xi == 50.0

    def test_shared_training_defaults(self):
        for arch in ("mlp", "gcn", "sage", "gat", "transformer"):
            s = model_spec(arch, n_classes=9)
            assert (s.beta1, s.beta2) == (0.9, 0.999)
            assert s.max_epochs == 200
            assert s.patience == 5

    def test_trees(self):
        t = model_spec("tree", n_classes=9)
        assert t.max_depth == 19
        f = model_spec("forest", n_classes=9)
        assert (f.max_depth, f.n_trees, f.max_features) == (30, 30, 9)

    def test_overrides_and_validation(self):
        s = model_spec("transformer", n_classes=5, hidden=32, max_epochs=10)
        assert s.hidden == 32 and s.max_epochs == 10
        with pytest.raises(InvalidConfigError):
            model_spec("gat", n_classes=9, hidden=30, heads=8)
        with pytest.raises(InvalidConfigError):
            model_spec("resnet", n_classes=9)

    def test_round_trip(self):
        from buildingclf.nn.specs import ModelSpec
        for arch in ARCHITECTURES:
            s = model_spec(arch, n_classes=9)
            assert ModelSpec.from_dict(s.to_dict()) == s
