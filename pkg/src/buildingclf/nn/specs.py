"""Classifier specs with the tuned hyperparameter defaults per architecture."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

from ..errors import InvalidConfigError

ARCHITECTURES = ("mlp", "gcn", "sage", "gat", "transformer", "tree", "forest")

# Tuned defaults per architecture. Values not applicable to an
# architecture are absent and fall back to the dataclass defaults.
_DEFAULTS = {
    "mlp": dict(lr=1e-4, batch_size=1024, dropout=0.35, weight_decay=1e-5,
                n_std_layers=3, n_gnn_layers=0, hidden=1024, xi=None),
    "gcn": dict(lr=5e-4, batch_size=256, dropout=0.25, weight_decay=0.0,
                n_std_layers=2, n_gnn_layers=2, hidden=512, xi=500.0),
    "sage": dict(lr=1e-4, batch_size=256, dropout=0.25, weight_decay=0.0,
                 n_std_layers=2, n_gnn_layers=3, hidden=1024,
                 aggregation="max", xi=None),
    "gat": dict(lr=1e-4, batch_size=256, dropout=0.25, weight_decay=0.0,
                n_std_layers=2, n_gnn_layers=3, hidden=512, heads=8,
                attn_dropout=0.0, leaky_slope=0.2, xi=50.0),
    "transformer": dict(lr=5e-4, batch_size=256, dropout=0.35,
                        weight_decay=0.0, n_std_layers=2, n_gnn_layers=4,
                        hidden=512, heads=8, attn_dropout=0.0, xi=50.0,
                        residual=False),
    "tree": dict(max_depth=19),
    "forest": dict(max_depth=30, n_trees=30, max_features=9),
}


@dataclass
class ModelSpec:
    arch: str
    n_classes: int
    n_features: int = 69
    hidden: int = 512
    n_gnn_layers: int = 0
    n_std_layers: int = 2
    heads: int = 1
    dropout: float = 0.0
    attn_dropout: float = 0.0
    leaky_slope: float = 0.2
    aggregation: str = "max"
    residual: bool = False
    xi: float | None = None
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    batch_size: int = 256
    weight_decay: float = 0.0
    max_epochs: int = 200
    patience: int = 5
    # tree/forest
    max_depth: int = 19
    n_trees: int = 30
    max_features: int | None = None

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise InvalidConfigError(f"unknown architecture {self.arch!r}")
        if self.arch in ("gat", "transformer") and self.hidden % max(self.heads, 1):
            raise InvalidConfigError(
                f"hidden size {self.hidden} not divisible by {self.heads} heads")

    @property
    def is_gnn(self) -> bool:
        return self.arch in ("gcn", "sage", "gat", "transformer")

    @property
    def is_tree(self) -> bool:
        return self.arch in ("tree", "forest")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(**d)


def model_spec(arch: str, n_classes: int, **overrides) -> ModelSpec:
    """Spec with the per-architecture defaults, plus explicit overrides."""
    if arch not in ARCHITECTURES:
        raise InvalidConfigError(f"unknown architecture {arch!r}")
    kwargs = dict(_DEFAULTS[arch])
    kwargs.update(overrides)
    return ModelSpec(arch=arch, n_classes=n_classes, **kwargs)
