import numpy as np
import pytest

from cropknn.errors import ConfigError
from cropknn.experiments import run_suite
from cropknn.indices import build_features
from cropknn.preprocess import extract_field_series
from cropknn.synth import class_curve, make_bundle, make_feature_dataset


class TestClassCurve:
    def test_all_classes_defined(self):
        from cropknn.grids import CROP_CLASSES

        for c in CROP_CLASSES:
            curve = class_curve(c.name, 13)
            assert curve.shape == (13,)
            assert np.all(np.abs(curve) < 1.0)

    def test_identical_flag(self):
        np.testing.assert_array_equal(
            class_curve("cassava", 13, identical=True), class_curve("maize", 13)
        )


class TestMakeBundle:
    def test_valid_and_deterministic(self):
        s1, f1 = make_bundle(["maize", "cassava"], 5, noise=0.03, seed=7)
        s2, f2 = make_bundle(["maize", "cassava"], 5, noise=0.03, seed=7)
        assert len(f1.labels) == 10
        for a, b in zip(s1.scenes, s2.scenes):
            for band in a.bands:
                np.testing.assert_array_equal(a.bands[band], b.bands[band])
        np.testing.assert_array_equal(f1.field_mask, f2.field_mask)

    def test_separable_classes_reach_perfect_accuracy(self):
        stack, fields = make_bundle(["maize", "cassava"], 10, noise=0.0, seed=1)
        series, report = extract_field_series(stack, fields)
        assert not report.skipped
        ds, _ = build_features(series, fields)
        rep = run_suite(ds, seed=2, k_candidates=(1, 3, 5))[0]
        assert rep.overall_accuracy == 1.0

    def test_full_cloud_drops_everything(self):
        stack, fields = make_bundle(["maize", "cassava"], 4, cloud_fraction=1.0, seed=2)
        series, report = extract_field_series(stack, fields)
        assert series == []
        assert len(report.skipped) == len(fields.labels)

    def test_param_validation(self):
        with pytest.raises(ConfigError):
            make_bundle(["maize"], 0)
        with pytest.raises(ConfigError):
            make_bundle(["nope", "maize"], 2)
        with pytest.raises(ConfigError):
            make_bundle(["maize", "cassava"], 2, cloud_fraction=1.5)


class TestMakeFeatureDataset:
    def test_counts_respected(self):
        ds = make_feature_dataset({"maize": 7, "cassava": 3}, seed=0)
        counts = {c.name: n for c, n in ds.class_counts.items()}
        assert counts == {"maize": 7, "cassava": 3}

    def test_identical_classes_near_chance(self):
        hits = 0
        for seed in range(20):
            ds = make_feature_dataset(
                {"maize": 150, "cassava": 150}, noise=0.08, seed=seed, identical=True
            )
            rep = run_suite(ds, seed=seed, k_candidates=(9,))[0]
            if 0.40 <= rep.overall_accuracy <= 0.60:
                hits += 1
        assert hits >= 18
