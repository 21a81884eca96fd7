"""Balanced-undersampling stratified cross-validation experiment suite.

Protocol: starting from the two most frequent classes, each experiment
adds the next-most-frequent class, undersamples every class to the
minority size m, assigns stratified folds, sweeps odd k and reports
pooled-confusion accuracy at the best k.

All sampling uses SplitMix64 streams derived from the master seed per
(purpose, class), so the majority-class selection is identical across
experiments (same shuffled order, first m taken) and independent of
evaluation order or parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ClassTooSmall, ConfigError
from .grids import CropClass
from .indices import FeatureDataset, FeatureVector
from .knn import KnnModel, predict_batch, predicted_labels
from .rng import SplitMix64, derive_seed, shuffled

DEFAULT_K_CANDIDATES = tuple(range(1, 20, 2))


@dataclass
class ExperimentSpec:
    included_classes: list[CropClass]
    folds: int = 5
    k_candidates: tuple[int, ...] = DEFAULT_K_CANDIDATES
    seed: int = 0

    def validate(self):
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if len(self.included_classes) < 2:
            raise ConfigError("need at least 2 classes")
        if not self.k_candidates or any(k < 1 or k % 2 == 0 for k in self.k_candidates):
            raise ConfigError("k candidates must be odd positive integers")


@dataclass
class FoldAssignment:
    fold_of: dict[int, int]  # field_id -> fold index
    folds: int


@dataclass
class CvResult:
    class_ids: list[int]
    confusion: np.ndarray  # CxC, rows true, cols predicted
    overall_accuracy: float
    per_class_accuracy: dict[int, float]
    per_fold_accuracy: list[float]
    predictions: list = field(default_factory=list)  # (field_id, true_name, NeighborResult)


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    m: int
    selected_k: int
    k_table: dict[int, float]
    overall_accuracy: float
    per_class_accuracy: dict[int, float]
    confusion: np.ndarray
    per_fold_accuracy: list[float]
    fold_of: dict[int, int]
    field_ids: list[int] = field(default_factory=list)
    predictions: list = field(default_factory=list)


def _by_class(ds: FeatureDataset) -> dict[CropClass, list[FeatureVector]]:
    groups: dict[CropClass, list[FeatureVector]] = {}
    for fv in ds.features:
        groups.setdefault(fv.label, []).append(fv)
    return groups


def undersample(
    ds: FeatureDataset, classes: list[CropClass], seed: int, folds: int = 2
) -> FeatureDataset:
    """Downsample every class to the minority size without replacement.

    Selection order is a seeded shuffle of each class's field_ids sorted
    ascending; the stream depends only on (seed, class), so larger
    experiments reuse the same selections.
    """
    groups = _by_class(ds)
    for c in classes:
        if c not in groups:
            raise ConfigError(f"class {c.name} absent from dataset")
    m = min(len(groups[c]) for c in classes)
    if m < folds:
        raise ClassTooSmall(f"minority size {m} < folds {folds}")
    kept: list[FeatureVector] = []
    for c in classes:
        members = sorted(groups[c], key=lambda fv: fv.field_id)
        rng = SplitMix64(derive_seed(seed, "undersample", c.id))
        kept.extend(shuffled(members, rng)[:m])
    kept.sort(key=lambda fv: fv.field_id)
    return FeatureDataset(features=kept, T=ds.T)


def stratified_folds(ds: FeatureDataset, folds: int, seed: int) -> FoldAssignment:
    """Seeded shuffle within each class, then round-robin dealing to folds."""
    if folds < 2:
        raise ConfigError("folds must be >= 2")
    fold_of: dict[int, int] = {}
    for c, members in sorted(_by_class(ds).items(), key=lambda kv: kv[0].id):
        if len(members) < folds:
            raise ClassTooSmall(f"class {c.name} has {len(members)} < folds {folds}")
        ordered = sorted(members, key=lambda fv: fv.field_id)
        rng = SplitMix64(derive_seed(seed, "folds", c.id))
        for pos, fv in enumerate(shuffled(ordered, rng)):
            fold_of[fv.field_id] = pos % folds
    return FoldAssignment(fold_of=fold_of, folds=folds)


def cross_validate(ds: FeatureDataset, folds: FoldAssignment, k: int) -> CvResult:
    """Pooled confusion matrix over all folds; per-class accuracy is recall."""
    class_ids = sorted({fv.label.id for fv in ds.features})
    index_of = {cid: i for i, cid in enumerate(class_ids)}
    C = len(class_ids)
    confusion = np.zeros((C, C), dtype=np.int64)
    per_fold = []
    predictions = []
    for f in range(folds.folds):
        train = [fv for fv in ds.features if folds.fold_of[fv.field_id] != f]
        test = [fv for fv in ds.features if folds.fold_of[fv.field_id] == f]
        if not test:
            per_fold.append(float("nan"))
            continue
        model = KnnModel(FeatureDataset(features=train, T=ds.T), k)
        results = predict_batch(model, FeatureDataset(features=test, T=ds.T))
        preds = predicted_labels(results)
        trues = np.array([fv.label.id for fv in test])
        for fv, res, t, p in zip(test, results, trues, preds):
            confusion[index_of[int(t)], index_of[int(p)]] += 1
            predictions.append((fv.field_id, fv.label.name, res))
        per_fold.append(float(np.mean(preds == trues)))
    total = int(confusion.sum())
    overall = float(np.trace(confusion)) / total
    per_class = {
        cid: float(confusion[i, i]) / float(confusion[i].sum())
        for cid, i in index_of.items()
    }
    return CvResult(
        class_ids=class_ids,
        confusion=confusion,
        overall_accuracy=overall,
        per_class_accuracy=per_class,
        per_fold_accuracy=per_fold,
        predictions=predictions,
    )


def select_k(
    ds: FeatureDataset, folds: FoldAssignment, k_candidates
) -> tuple[int, dict[int, float]]:
    """Best overall-accuracy candidate; ties go to the smaller k."""
    if not k_candidates:
        raise ConfigError("empty k candidate list")
    table = {}
    for k in sorted(k_candidates):
        table[k] = cross_validate(ds, folds, k).overall_accuracy
    best = min(table, key=lambda k: (-table[k], k))
    return best, table


def run_experiment(
    ds: FeatureDataset, classes: list[CropClass], spec_folds: int, k_candidates, seed: int
) -> ExperimentReport:
    balanced = undersample(ds, classes, seed, folds=spec_folds)
    fa = stratified_folds(balanced, spec_folds, seed)
    m = len(balanced) // len(classes)
    best_k, table = select_k(balanced, fa, k_candidates)
    cv = cross_validate(balanced, fa, best_k)
    return ExperimentReport(
        spec=ExperimentSpec(
            included_classes=list(classes),
            folds=spec_folds,
            k_candidates=tuple(k_candidates),
            seed=seed,
        ),
        m=m,
        selected_k=best_k,
        k_table=table,
        overall_accuracy=cv.overall_accuracy,
        per_class_accuracy=cv.per_class_accuracy,
        confusion=cv.confusion,
        per_fold_accuracy=cv.per_fold_accuracy,
        fold_of=fa.fold_of,
        field_ids=[fv.field_id for fv in balanced.features],
        predictions=cv.predictions,
    )


def run_suite(
    ds: FeatureDataset,
    seed: int,
    folds: int = 5,
    k_candidates=DEFAULT_K_CANDIDATES,
) -> list[ExperimentReport]:
    """One experiment per class-count prefix of the frequency-ordered classes."""
    classes = sorted({fv.label for fv in ds.features}, key=lambda c: c.id)
    if len(classes) < 2:
        raise ConfigError("suite needs at least 2 classes in the dataset")
    reports = []
    for n in range(2, len(classes) + 1):
        reports.append(run_experiment(ds, classes[:n], folds, k_candidates, seed))
    return reports
