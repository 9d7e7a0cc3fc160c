import numpy as np
import pytest

from buildingclf import feature, geom, schema
from buildingclf.errors import (
    InvalidConfigError,
    InvalidInputError,
    InvalidStateError,
)


def square_record(bid, x, y, size=1.0, **kwargs):
    return feature.make_record(
        bid, geom.box(x, y, x + size, y + size), **kwargs)


class TestBuildBlocks:
    def test_detached_squares_are_singletons(self):
        bs = [square_record("a", 0, 0), square_record("b", 5, 0),
              square_record("c", 10, 0)]
        blocks = feature.build_blocks(bs)
        assert len(blocks) == 3
        assert all(len(blk.member_ids) == 1 for blk in blocks)

    def test_row_of_four_merges(self):
        bs = [square_record(f"r{i}", float(i), 0) for i in range(4)]
        blocks = feature.build_blocks(bs)
        assert len(blocks) == 1
        blk = blocks[0]
        assert blk.member_ids == frozenset(["r0", "r1", "r2", "r3"])
        assert len(blk.outline_parts) == 1
        merged = blk.outline_parts[0]
        assert geom.footprint_area(merged) == pytest.approx(4.0)
        assert geom.perimeter(merged) == pytest.approx(10.0)

    def test_two_pairs_far_apart(self):
        bs = [square_record("a", 0, 0), square_record("b", 1, 0),
              square_record("c", 100, 0), square_record("d", 101, 0)]
        blocks = feature.build_blocks(bs)
        # oracle: union-find over explicit pairwise adjacency
        adj = {}
        for i, u in enumerate(bs):
            for j, v in enumerate(bs):
                if i < j and geom.adjacency_stats(u.polygon, [v.polygon])[0]:
                    adj.setdefault(u.id, set()).add(v.id)
                    adj.setdefault(v.id, set()).add(u.id)
        assert sorted(sorted(blk.member_ids) for blk in blocks) == \
            [["a", "b"], ["c", "d"]]
        assert adj == {"a": {"b"}, "b": {"a"}, "c": {"d"}, "d": {"c"}}


class TestNodeFeatures:
    def test_detached_square_with_full_attributes(self):
        b = square_record("x", 0, 0, land_use=0, urban_atlas_covered=True,
                          degurba="city", country="de")
        blocks = feature.build_blocks([b])
        v = feature.node_features(b, blocks[0], [])
        assert v.shape == (69,)
        assert v[0] == pytest.approx(1.0)  # area
        onehots = v[schema.GROUP_SLICES["land_use"]][:15]
        assert onehots.sum() == 1.0
        assert v[schema.FEATURE_NAMES.index("lu_urban_atlas_covered")] == 1.0
        assert v[schema.GROUP_SLICES["degurba"]].sum() == 1.0
        assert v[schema.GROUP_SLICES["country"]].sum() == 1.0
        assert v[schema.FEATURE_NAMES.index("ctry_de")] == 1.0

    def test_middle_of_row(self):
        bs = [square_record(f"r{i}", float(i), 0) for i in range(3)]
        blocks = feature.build_blocks(bs)
        X = feature.compute_feature_matrix(bs, blocks=blocks)
        mid = X[1]
        names = schema.FEATURE_NAMES
        assert mid[names.index("bld_adjacent_count")] == 2
        assert mid[names.index("bld_shared_wall_len")] == pytest.approx(2.0)
        assert mid[names.index("blk_num_footprints")] == 3
        assert mid[names.index("blk_total_area")] == pytest.approx(3.0)

    def test_missing_attributes_encode_as_zero(self):
        b = square_record("x", 0, 0, country="zz")
        blocks = feature.build_blocks([b])
        v = feature.node_features(b, blocks[0], [])
        assert v[schema.GROUP_SLICES["land_use"]].sum() == 0.0
        assert v[schema.GROUP_SLICES["degurba"]].sum() == 0.0
        assert v[schema.GROUP_SLICES["country"]].sum() == 0.0
        assert v.shape == (69,)

    def test_block_columns_identical_across_members(self):
        bs = [square_record(f"r{i}", float(i), 0) for i in range(4)]
        X = feature.compute_feature_matrix(bs)
        blk = X[:, schema.GROUP_SLICES["block_level"]]
        assert np.allclose(blk, blk[0])


class TestScaleEdgeFeature:
    def test_boundaries_exact(self):
        assert feature.scale_edge_feature(0.0, 50.0) == 1.0
        assert feature.scale_edge_feature(50.0, 50.0) == 0.0
        assert feature.scale_edge_feature(500.0, 50.0) == 0.0

    def test_monotone_and_continuous(self):
        xs = np.linspace(0, 120, 500)
        vals = [feature.scale_edge_feature(float(x), 60.0) for x in xs]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        just_below = feature.scale_edge_feature(60.0 - 1e-12, 60.0)
        assert just_below == pytest.approx(0.0, abs=1e-12)

    def test_vectorized_batch_path_matches_scalar(self):
        # the batch collator scales edge lengths with numpy; it must agree
        # with the scalar contract bit for bit
        rng = np.random.default_rng(8)
        lens = np.concatenate([rng.uniform(0, 120, 500), [0.0, 60.0, 120.0]])
        vec = np.maximum(0.0, 1.0 - lens / 60.0)
        ref = np.array([feature.scale_edge_feature(float(l), 60.0)
                        for l in lens])
        assert np.array_equal(vec, ref)

    def test_bad_threshold(self):
        with pytest.raises(InvalidConfigError):
            feature.scale_edge_feature(1.0, 0.0)

    def test_negative_length(self):
        with pytest.raises(InvalidInputError):
            feature.scale_edge_feature(-1.0, 10.0)


class TestNormalization:
    def test_constant_column_maps_to_zero(self):
        X = np.zeros((4, 69))
        X[:, 0] = 7.0
        stats = feature.fit_normalization(X, np.ones(4, dtype=bool))
        out = feature.apply_normalization(X, stats)
        assert np.all(out[:, 0] == 0.0)

    def test_two_point_zscore(self):
        X = np.zeros((2, 69))
        X[:, 3] = [0.0, 2.0]
        stats = feature.fit_normalization(X, np.ones(2, dtype=bool))
        out = feature.apply_normalization(X, stats)
        assert out[:, 3] == pytest.approx([-1.0, 1.0])

    def test_random_column_moments(self):
        rng = np.random.default_rng(2)
        X = np.zeros((200, 69))
        X[:, :20] = rng.normal(5, 3, size=(200, 20))
        X[:, 20:] = rng.integers(0, 2, size=(200, 49))
        mask = np.zeros(200, dtype=bool)
        mask[:120] = True
        stats = feature.fit_normalization(X, mask)
        out = feature.apply_normalization(X, stats)
        assert np.abs(out[mask, :20].mean(axis=0)).max() < 1e-9
        assert np.abs(out[mask, :20].std(axis=0) - 1.0).max() < 1e-9
        # one-hot columns untouched
        assert np.array_equal(out[:, 20:], X[:, 20:])

    def test_empty_training_set_rejected(self):
        with pytest.raises(InvalidStateError):
            feature.fit_normalization(np.zeros((5, 69)), np.zeros(5, dtype=bool))
