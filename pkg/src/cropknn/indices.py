"""Vegetation indices and per-field feature assembly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import DEFAULT_BAND_MAP
from .errors import DegenerateDenominator, EmptyClass, MissingBand
from .grids import CropClass, FieldSeries, FieldTable

PURE_CLASSES = ("maize", "cassava", "common_bean")


def ndvi(nir: float, red: float) -> float:
    """(NIR - Red) / (NIR + Red)."""
    denom = nir + red
    if denom == 0:
        raise DegenerateDenominator("NIR + Red is zero")
    return (nir - red) / denom


def gcvi(nir: float, green: float) -> float:
    """NIR / Green - 1."""
    if green == 0:
        raise DegenerateDenominator("Green is zero")
    return nir / green - 1.0


@dataclass
class FeatureVector:
    field_id: int
    values: np.ndarray  # length T, finite
    label: CropClass


@dataclass
class FeatureDataset:
    features: list[FeatureVector]
    T: int

    @property
    def class_counts(self) -> dict[CropClass, int]:
        counts: dict[CropClass, int] = {}
        for fv in self.features:
            counts[fv.label] = counts.get(fv.label, 0) + 1
        return counts

    def __len__(self):
        return len(self.features)

    def matrix(self) -> np.ndarray:
        return np.array([fv.values for fv in self.features], dtype=np.float64)

    def labels(self) -> np.ndarray:
        return np.array([fv.label.id for fv in self.features], dtype=np.int64)

    def field_ids(self) -> np.ndarray:
        return np.array([fv.field_id for fv in self.features], dtype=np.int64)


def _index_series(series: FieldSeries, index: str, band_map: dict[str, str]) -> np.ndarray:
    def band(key):
        name = band_map[key]
        if name not in series.band_series:
            raise MissingBand(f"field {series.field_id}: band {name} not present")
        return series.band_series[name]

    if index == "NDVI":
        nir_v, red_v = band("ndvi_nir"), band("ndvi_red")
        out = np.empty(nir_v.size)
        for t in range(nir_v.size):
            try:
                out[t] = ndvi(nir_v[t], red_v[t])
            except DegenerateDenominator:
                raise DegenerateDenominator(
                    f"NDVI undefined for field {series.field_id} at date index {t}"
                ) from None
        return out
    if index == "GCVI":
        nir_v, green_v = band("gcvi_nir"), band("gcvi_green")
        out = np.empty(nir_v.size)
        for t in range(nir_v.size):
            try:
                out[t] = gcvi(nir_v[t], green_v[t])
            except DegenerateDenominator:
                raise DegenerateDenominator(
                    f"GCVI undefined for field {series.field_id} at date index {t}"
                ) from None
        return out
    # otherwise a raw band name
    if index not in series.band_series:
        raise MissingBand(f"field {series.field_id}: band {index} not present")
    return series.band_series[index].copy()


def build_features(
    series: list[FieldSeries],
    fields: FieldTable,
    index: str = "NDVI",
    band_map: dict[str, str] | None = None,
) -> tuple[FeatureDataset, list[int]]:
    """One feature vector per field; returns (dataset, excluded field_ids)."""
    band_map = band_map or DEFAULT_BAND_MAP
    features = []
    excluded = []
    T = None
    for fs in sorted(series, key=lambda s: s.field_id):
        if fs.field_id not in fields.labels:
            excluded.append(fs.field_id)
            continue
        values = _index_series(fs, index, band_map)
        if T is None:
            T = values.size
        features.append(
            FeatureVector(field_id=fs.field_id, values=values, label=fields.labels[fs.field_id])
        )
    return FeatureDataset(features=features, T=T or 0), excluded


def class_separability_report(
    datasets: dict[str, FeatureDataset],
    classes: tuple[str, ...] = PURE_CLASSES,
) -> list[tuple[str, str, int, float, float]]:
    """Per-date mean and population std per pure class, per index/band.

    Returns rows (index, class_name, date_index, mean, std) ready for CSV.
    """
    rows = []
    for index in sorted(datasets):
        ds = datasets[index]
        for cname in classes:
            members = [fv.values for fv in ds.features if fv.label.name == cname]
            if not members:
                raise EmptyClass(f"no examples of class {cname} for index {index}")
            stackd = np.array(members)
            means = stackd.mean(axis=0)
            stds = stackd.std(axis=0)
            for t in range(stackd.shape[1]):
                rows.append((index, cname, t, float(means[t]), float(stds[t])))
    return rows
