import json

import numpy as np
import pytest

from buildingclf import gisio, graphgen, schema
from buildingclf.errors import DataError, InvalidConfigError
from buildingclf.feature import NormalizationStats

from nn_helpers import random_subgraph


def fc(features):
    return {"type": "FeatureCollection", "features": features}


def square_feature(fid, x, y, size=10.0, **props):
    ring = [[x, y], [x + size, y], [x + size, y + size], [x, y + size], [x, y]]
    return {"type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {"id": fid, **props}}


def zone(x0, y0, x1, y1, **props):
    ring = [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]
    return {"type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": props}


class TestMappingTables:
    def test_default_tables_load_and_validate(self):
        t = gisio.MappingTables.load()
        assert t.class_for_tags("semidetached_house") == \
            schema.CLASS_NAMES.index("semi_detached")
        assert t.class_for_tags("cabin") is None
        assert t.class_for_tags("apartments") == 0
        assert t.class_for_tags("farm") == schema.CLASS_NAMES.index("detached")

    def test_house_compound_rule(self):
        t = gisio.MappingTables.load()
        assert t.class_for_tags("house") is None
        assert t.class_for_tags("house", "terraced") == \
            schema.CLASS_NAMES.index("terraced")
        assert t.class_for_tags("house", "terrace") == \
            schema.CLASS_NAMES.index("terraced")

    def test_unknown_tag_unlabeled(self):
        t = gisio.MappingTables.load()
        assert t.class_for_tags("definitely_not_a_tag") is None
        assert t.class_for_tags(None) is None

    def test_landuse_codes(self):
        t = gisio.MappingTables.load()
        cuf = schema.LAND_USE_NAMES.index("continuous_urban_fabric")
        assert t.landuse_to_class[("ua", 11100)] == cuf
        assert t.landuse_to_class[("clc", 111)] == cuf
        assert t.landuse_to_class[("clc", 112)] == \
            schema.LAND_USE_NAMES.index("dense_medium_urban_fabric")
        agri = schema.LAND_USE_NAMES.index("agricultural")
        for code in (211, 244, 231):
            assert t.landuse_to_class[("clc", code)] == agri


class TestIngest:
    def test_basic_ingest_with_joins(self, tmp_path):
        buildings = fc([
            square_feature("a", 0, 0, building="semidetached_house",
                           country="DE"),
            square_feature("b", 100, 0, building="cabin", country="fr"),
            square_feature("c", 200, 0, building="house", house="terraced",
                           country="fr"),
        ])
        landuse = fc([
            zone(-10, -10, 50, 50, source="ua", code=11100),
            zone(-10, -10, 50, 50, source="clc", code=112),
            zone(90, -10, 150, 50, source="clc", code=312),
        ])
        degurba = fc([zone(-10, -10, 300, 50, degurba=1)])
        bp, lp, dp = tmp_path / "b.geojson", tmp_path / "l.geojson", \
            tmp_path / "d.geojson"
        bp.write_text(json.dumps(buildings))
        lp.write_text(json.dumps(landuse))
        dp.write_text(json.dumps(degurba))
        cfg = gisio.IngestConfig(footprints=str(bp), landuse=[str(lp)],
                                 degurba=str(dp))
        records, rejects = gisio.ingest_footprints(cfg)
        assert [r.id for r in records] == ["a", "b", "c"]
        a, b, c = records
        assert a.class_label == schema.CLASS_NAMES.index("semi_detached")
        assert a.country == "de"
        # urban atlas beats the land-cover backup
        assert a.land_use == schema.LAND_USE_NAMES.index("continuous_urban_fabric")
        assert a.urban_atlas_covered
        assert a.degurba == "city"
        # cabin is explicitly not assigned
        assert b.class_label is None
        assert b.land_use == schema.LAND_USE_NAMES.index("forests")
        assert not b.urban_atlas_covered
        # compound house=terraced rule
        assert c.class_label == schema.CLASS_NAMES.index("terraced")
        assert c.land_use is None
        assert not rejects.entries

    def test_order_independence(self, tmp_path):
        feats = [square_feature(f"x{i}", 20.0 * i, 0, building="detached",
                                country="at") for i in range(6)]
        p1, p2 = tmp_path / "f1.geojson", tmp_path / "f2.geojson"
        p1.write_text(json.dumps(fc(feats)))
        p2.write_text(json.dumps(fc(feats[::-1])))
        r1, _ = gisio.ingest_footprints(gisio.IngestConfig(footprints=str(p1)))
        r2, _ = gisio.ingest_footprints(gisio.IngestConfig(footprints=str(p2)))
        assert [r.id for r in r1] == [r.id for r in r2]
        assert all(np.array_equal(x.polygon.exterior, y.polygon.exterior)
                   for x, y in zip(r1, r2))

    def test_broken_polygon_rejected_pipeline_continues(self, tmp_path):
        bad = {"type": "Feature",
               "geometry": {"type": "Polygon",
                            "coordinates": [[[0, 0], [1, 1], [2, 2], [0, 0]]]},
               "properties": {"id": "bad", "building": "detached"}}
        good = square_feature("good", 50, 0, building="detached", country="de")
        p = tmp_path / "f.geojson"
        p.write_text(json.dumps(fc([bad, good, good | {}])))
        records, rejects = gisio.ingest_footprints(
            gisio.IngestConfig(footprints=str(p)))
        assert len(records) == 2
        assert rejects.entries[0][0] == "bad"

    def test_majority_rejects_hard_error(self, tmp_path):
        bad = {"type": "Feature", "geometry": None,
               "properties": {"id": "bad"}}
        good = square_feature("good", 0, 0, building="detached")
        p = tmp_path / "f.geojson"
        p.write_text(json.dumps(fc([bad, bad, good])))
        with pytest.raises(DataError):
            gisio.ingest_footprints(gisio.IngestConfig(footprints=str(p)))

    def test_geographic_crs_rejected(self):
        with pytest.raises(InvalidConfigError):
            gisio.IngestConfig(footprints="x", crs="EPSG:4326")

    def test_ua_coverage_flag_implies_ua_source(self, tmp_path):
        rng = np.random.default_rng(0)
        feats, zones = [], []
        for i in range(30):
            x = 50.0 * i
            feats.append(square_feature(f"b{i}", x, 0, building="detached",
                                        country="de"))
            if rng.random() < 0.5:
                zones.append(zone(x - 5, -5, x + 15, 15, source="ua",
                                  code=11230))
            else:
                zones.append(zone(x - 5, -5, x + 15, 15, source="clc",
                                  code=112))
        bp, lp = tmp_path / "b.geojson", tmp_path / "l.geojson"
        bp.write_text(json.dumps(fc(feats)))
        lp.write_text(json.dumps(fc(zones)))
        records, _ = gisio.ingest_footprints(
            gisio.IngestConfig(footprints=str(bp), landuse=[str(lp)]))
        low = schema.LAND_USE_NAMES.index("low_density_urban_fabric")
        for r in records:
            if r.urban_atlas_covered:
                assert r.land_use == low  # came from the ua polygon


class TestBuildingStore:
    def test_round_trip(self, tmp_path):
        feats = [square_feature(f"s{i}", 30.0 * i, 0, building="apartments",
                                country="pl") for i in range(4)]
        bp = tmp_path / "b.geojson"
        bp.write_text(json.dumps(fc(feats)))
        records, _ = gisio.ingest_footprints(
            gisio.IngestConfig(footprints=str(bp)))
        store = tmp_path / "store.jsonl"
        gisio.save_buildings(records, store)
        back = gisio.load_buildings(store)
        assert [r.id for r in back] == [r.id for r in records]
        for a, b in zip(records, back):
            assert np.array_equal(a.polygon.exterior, b.polygon.exterior)
            assert a.class_label == b.class_label


class TestDatasetFiles:
    def _dataset(self, n=20):
        rng = np.random.default_rng(5)
        sgs = [random_subgraph(rng, int(rng.integers(3, 9))) for _ in range(n)]
        graphgen.assign_splits(sgs, (0.6, 0.2, 0.2), seed=1)
        ds = graphgen.GraphDataset(
            sgs, {"n_graphs": n, "n_sub": 8, "seed": 1, "mode": "distance",
                  "hops": None, "ratios": [0.6, 0.2, 0.2],
                  "label_policy": "all", "task": schema.TASK_COMBINED,
                  "feature_checksum": schema.feature_checksum()})
        ds.norm_stats = NormalizationStats(np.zeros(20), np.ones(20))
        return ds

    def test_round_trip_bit_exact(self, tmp_path):
        ds = self._dataset(100)
        path = tmp_path / "data.jsonl"
        gisio.save_dataset(ds, path)
        back = gisio.load_dataset(path)
        assert len(back.subgraphs) == 100
        for a, b in zip(ds.subgraphs, back.subgraphs):
            assert a.node_ids == b.node_ids
            assert np.array_equal(a.node_features, b.node_features)
            assert np.array_equal(a.edges, b.edges)
            assert np.array_equal(a.edge_len, b.edge_len)
            assert np.array_equal(a.labels, b.labels)
            assert np.array_equal(a.split_flags, b.split_flags)
            assert a.split == b.split
        # resave produces identical bytes
        path2 = tmp_path / "data2.jsonl"
        gisio.save_dataset(back, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_truncated_file_reports_line(self, tmp_path):
        ds = self._dataset(10)
        path = tmp_path / "data.jsonl"
        gisio.save_dataset(ds, path)
        lines = path.read_text().splitlines()
        (tmp_path / "trunc.jsonl").write_text(
            "\n".join(lines[:5] + [lines[6][:40]]) + "\n")
        with pytest.raises(DataError, match=r":[0-9]+"):
            gisio.load_dataset(tmp_path / "trunc.jsonl")

    def test_missing_records_detected(self, tmp_path):
        ds = self._dataset(10)
        path = tmp_path / "data.jsonl"
        gisio.save_dataset(ds, path)
        lines = path.read_text().splitlines()
        (tmp_path / "short.jsonl").write_text("\n".join(lines[:5]) + "\n")
        with pytest.raises(DataError, match="truncated"):
            gisio.load_dataset(tmp_path / "short.jsonl")

    def test_checksum_mismatch_refused(self, tmp_path):
        ds = self._dataset(5)
        path = tmp_path / "data.jsonl"
        gisio.save_dataset(ds, path)
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        header["feature_checksum"] = "0badc0ffee"
        (tmp_path / "bad.jsonl").write_text(
            "\n".join([json.dumps(header)] + lines[1:]) + "\n")
        with pytest.raises(DataError, match="checksum"):
            gisio.load_dataset(tmp_path / "bad.jsonl")

    def test_version_mismatch_refused(self, tmp_path):
        ds = self._dataset(5)
        path = tmp_path / "data.jsonl"
        gisio.save_dataset(ds, path)
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        header["version"] = 999
        (tmp_path / "bad.jsonl").write_text(
            "\n".join([json.dumps(header)] + lines[1:]) + "\n")
        with pytest.raises(DataError, match="version"):
            gisio.load_dataset(tmp_path / "bad.jsonl")
