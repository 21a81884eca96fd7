import numpy as np
import pytest

from cropknn.errors import ClassTooSmall, ConfigError
from cropknn.experiments import (
    cross_validate,
    run_experiment,
    run_suite,
    select_k,
    stratified_folds,
    undersample,
)
from cropknn.grids import CLASS_BY_ID, CROP_CLASSES
from cropknn.indices import FeatureDataset, FeatureVector
from cropknn.synth import make_feature_dataset
from oracles import brute_force_knn


def dataset_of(rows):
    features = [
        FeatureVector(field_id=fid, values=np.asarray(v, float), label=CLASS_BY_ID[cid])
        for fid, cid, v in rows
    ]
    return FeatureDataset(features=features, T=len(rows[0][2]))


def random_dataset(rng, counts, d=13):
    rows = []
    fid = 1
    for cid, n in counts.items():
        for _ in range(n):
            rows.append((fid, cid, rng.normal(size=d) + 2.0))
            fid += 1
    return dataset_of(rows)


class TestUndersample:
    def test_already_balanced_is_restriction(self):
        rng = np.random.default_rng(0)
        ds = random_dataset(rng, {0: 6, 1: 6, 2: 9})
        out = undersample(ds, [CLASS_BY_ID[0], CLASS_BY_ID[1]], seed=5)
        want = {fv.field_id for fv in ds.features if fv.label.id in (0, 1)}
        assert {fv.field_id for fv in out.features} == want

    def test_paper_two_class_counts(self):
        rng = np.random.default_rng(1)
        ds = random_dataset(rng, {0: 1462, 1: 829}, d=3)
        out = undersample(ds, [CLASS_BY_ID[0], CLASS_BY_ID[1]], seed=5)
        counts = {c.id: n for c, n in out.class_counts.items()}
        assert counts == {0: 829, 1: 829}

    def test_seven_class_counts(self):
        rng = np.random.default_rng(2)
        counts_in = {0: 1462, 1: 829, 2: 487, 3: 172, 4: 160, 5: 98, 6: 78}
        ds = random_dataset(rng, counts_in, d=3)
        out = undersample(ds, list(CROP_CLASSES), seed=5)
        assert all(n == 78 for n in out.class_counts.values())

    def test_deterministic_and_order_invariant(self):
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, {0: 20, 1: 8})
        sel1 = {fv.field_id for fv in undersample(ds, [CLASS_BY_ID[0], CLASS_BY_ID[1]], 9).features}
        shuffled_ds = FeatureDataset(
            features=[ds.features[i] for i in rng.permutation(len(ds))], T=ds.T
        )
        sel2 = {fv.field_id for fv in undersample(shuffled_ds, [CLASS_BY_ID[0], CLASS_BY_ID[1]], 9).features}
        assert sel1 == sel2

    def test_selection_nested_across_experiments(self):
        # same seed: the m chosen from a class shrinks to a subset as m drops
        rng = np.random.default_rng(4)
        ds = random_dataset(rng, {0: 50, 1: 20, 2: 10})
        two = undersample(ds, [CLASS_BY_ID[0], CLASS_BY_ID[1]], 7)
        three = undersample(ds, [CLASS_BY_ID[0], CLASS_BY_ID[1], CLASS_BY_ID[2]], 7)
        maize_two = {fv.field_id for fv in two.features if fv.label.id == 0}
        maize_three = {fv.field_id for fv in three.features if fv.label.id == 0}
        assert maize_three <= maize_two

    def test_class_too_small(self):
        rng = np.random.default_rng(5)
        ds = random_dataset(rng, {0: 10, 1: 3})
        with pytest.raises(ClassTooSmall):
            undersample(ds, [CLASS_BY_ID[0], CLASS_BY_ID[1]], 0, folds=5)


class TestStratifiedFolds:
    def test_exact_divisibility(self):
        rng = np.random.default_rng(0)
        ds = random_dataset(rng, {0: 5, 1: 5})
        fa = stratified_folds(ds, 5, seed=1)
        for f in range(5):
            members = [fid for fid, fold in fa.fold_of.items() if fold == f]
            labels = [fv.label.id for fv in ds.features if fv.field_id in members]
            assert sorted(labels) == [0, 1]

    def test_78_examples_5_folds(self):
        rng = np.random.default_rng(1)
        ds = random_dataset(rng, {0: 78}, d=3)
        fa = stratified_folds(ds, 5, seed=1)
        sizes = [sum(1 for f in fa.fold_of.values() if f == i) for i in range(5)]
        assert sorted(sizes) == [15, 15, 16, 16, 16]
        assert sum(sizes) == 78

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        ds = random_dataset(rng, {0: 13, 1: 9})
        assert stratified_folds(ds, 3, 4).fold_of == stratified_folds(ds, 3, 4).fold_of

    def test_class_too_small(self):
        rng = np.random.default_rng(3)
        ds = random_dataset(rng, {0: 10, 1: 2})
        with pytest.raises(ClassTooSmall):
            stratified_folds(ds, 5, 0)

    def test_per_fold_count_property(self):
        rng = np.random.default_rng(4)
        for counts in ({0: 17, 1: 23}, {0: 31, 1: 10, 2: 12}):
            ds = random_dataset(rng, counts, d=3)
            fa = stratified_folds(ds, 4, seed=9)
            for cid, n in counts.items():
                members = [fv.field_id for fv in ds.features if fv.label.id == cid]
                per_fold = [
                    sum(1 for fid in members if fa.fold_of[fid] == f) for f in range(4)
                ]
                assert max(per_fold) - min(per_fold) <= 1
                assert sum(per_fold) == n


class TestCrossValidate:
    def test_perfectly_separable(self):
        rows = [(i, 0, [1.0 + 0.001 * i, 0.0]) for i in range(1, 11)]
        rows += [(i, 1, [0.0, 1.0 + 0.001 * i]) for i in range(11, 21)]
        ds = dataset_of(rows)
        fa = stratified_folds(ds, 5, 0)
        cv = cross_validate(ds, fa, 3)
        assert cv.overall_accuracy == 1.0
        assert cv.confusion[0, 1] == 0 and cv.confusion[1, 0] == 0

    def test_shuffled_labels_near_chance(self):
        accs = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            ds = random_dataset(rng, {0: 75, 1: 75}, d=13)
            fa = stratified_folds(ds, 5, seed)
            accs.append(cross_validate(ds, fa, 9).overall_accuracy)
        assert abs(np.mean(accs) - 0.5) < 0.1

    def test_matches_fold_by_fold_oracle(self):
        # 30-example instance checked against an independently scripted CV
        rng = np.random.default_rng(11)
        ds = random_dataset(rng, {0: 10, 1: 10, 2: 10}, d=5)
        fa = stratified_folds(ds, 3, seed=2)
        k = 3
        cv = cross_validate(ds, fa, k)

        confusion = np.zeros((3, 3), dtype=int)
        for f in range(3):
            train = [(fv.field_id, list(fv.values), fv.label.id)
                     for fv in ds.features if fa.fold_of[fv.field_id] != f]
            oracle = brute_force_knn(train, k)
            for fv in ds.features:
                if fa.fold_of[fv.field_id] != f:
                    continue
                pred, _, _ = oracle(list(fv.values))
                confusion[fv.label.id, pred] += 1
        np.testing.assert_array_equal(cv.confusion, confusion)

    def test_every_example_evaluated_once(self):
        rng = np.random.default_rng(12)
        ds = random_dataset(rng, {0: 14, 1: 11})
        fa = stratified_folds(ds, 5, 0)
        cv = cross_validate(ds, fa, 5)
        assert int(cv.confusion.sum()) == len(ds)

    def test_report_invariants(self):
        rng = np.random.default_rng(13)
        ds = random_dataset(rng, {0: 20, 1: 20})
        fa = stratified_folds(ds, 5, 1)
        cv = cross_validate(ds, fa, 7)
        assert cv.overall_accuracy == pytest.approx(
            np.trace(cv.confusion) / cv.confusion.sum(), abs=1e-15
        )
        for i, cid in enumerate(cv.class_ids):
            assert cv.per_class_accuracy[cid] == pytest.approx(
                cv.confusion[i, i] / cv.confusion[i].sum(), abs=1e-15
            )


class TestSelectK:
    def test_single_candidate(self):
        rng = np.random.default_rng(0)
        ds = random_dataset(rng, {0: 10, 1: 10})
        fa = stratified_folds(ds, 5, 0)
        k, table = select_k(ds, fa, [7])
        assert k == 7 and set(table) == {7}

    def test_tie_goes_to_smaller_k(self):
        rows = [(i, 0, [1.0, 0.001 * i]) for i in range(1, 11)]
        rows += [(i, 1, [0.001 * i, 1.0]) for i in range(11, 21)]
        ds = dataset_of(rows)
        fa = stratified_folds(ds, 5, 0)
        k, table = select_k(ds, fa, [1, 3, 5])
        assert all(v == 1.0 for v in table.values())
        assert k == 1

    def test_matches_argmax_of_table(self):
        ds = make_feature_dataset({"maize": 30, "cassava": 30}, noise=0.15, seed=3)
        fa = stratified_folds(ds, 5, 1)
        k, table = select_k(ds, fa, [1, 3, 5, 7])
        best = max(table.values())
        assert table[k] == best
        assert k == min(kk for kk, v in table.items() if v == best)


class TestRunSuite:
    def test_paper_profile_m_values(self):
        ds = make_feature_dataset(
            {
                "maize": 146, "cassava": 82, "maize_common_bean": 48,
                "maize_cassava": 17, "maize_soybean": 16, "common_bean": 10,
                "cassava_common_bean": 8,
            },
            noise=0.05,
            seed=0,
        )
        reports = run_suite(ds, seed=1, k_candidates=(1, 3))
        assert [r.m for r in reports] == [82, 48, 17, 16, 10, 8]
        for rep in reports:
            n = len(rep.spec.included_classes)
            assert int(rep.confusion.sum()) == n * rep.m

    def test_deterministic(self):
        ds = make_feature_dataset({"maize": 20, "cassava": 15}, noise=0.1, seed=4)
        r1 = run_suite(ds, seed=3, k_candidates=(1, 3, 5))
        r2 = run_suite(ds, seed=3, k_candidates=(1, 3, 5))
        assert len(r1) == len(r2) == 1
        assert r1[0].selected_k == r2[0].selected_k
        np.testing.assert_array_equal(r1[0].confusion, r2[0].confusion)
        assert r1[0].fold_of == r2[0].fold_of

    def test_balanced_oa_equals_macro_average(self):
        ds = make_feature_dataset({"maize": 25, "cassava": 25, "common_bean": 25},
                                  noise=0.2, seed=5)
        rep = run_experiment(
            ds, [CLASS_BY_ID[0], CLASS_BY_ID[1], CLASS_BY_ID[5]], 5, (3,), seed=2
        )
        macro = np.mean(list(rep.per_class_accuracy.values()))
        assert rep.overall_accuracy == pytest.approx(macro, abs=1e-12)

    def test_needs_two_classes(self):
        ds = make_feature_dataset({"maize": 10}, seed=0)
        with pytest.raises(ConfigError):
            run_suite(ds, seed=0)
