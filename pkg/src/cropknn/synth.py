"""Synthetic test data: seasonal reflectance curves and raster bundles.

Each crop class gets a parameterized seasonal greenness trajectory
(single-peak with regrowth for maize-like classes, low dynamic range for
cassava, an early dip for common bean, blends for intercropped classes).
Reflectance pairs are reconstructed so the target greenness equals the
normalized difference of NIR and red at constant brightness.
"""

from __future__ import annotations

import datetime

import numpy as np

from .errors import ConfigError
from .grids import CROP_CLASSES, CLASS_BY_NAME, FieldTable, Scene, SceneStack
from .indices import FeatureDataset, FeatureVector


def _bump(t, center, width):
    return np.exp(-(((t - center) / width) ** 2))


_CURVES = {
    "maize": lambda t: 0.20 + 0.55 * _bump(t, 0.30, 0.14) + 0.25 * _bump(t, 0.80, 0.12),
    "cassava": lambda t: 0.45 + 0.06 * np.sin(2 * np.pi * t),
    "maize_common_bean": lambda t: 0.22 + 0.45 * _bump(t, 0.35, 0.16) + 0.18 * _bump(t, 0.82, 0.12),
    "maize_cassava": lambda t: 0.32 + 0.30 * _bump(t, 0.32, 0.15) + 0.12 * _bump(t, 0.80, 0.12),
    "maize_soybean": lambda t: 0.24 + 0.40 * _bump(t, 0.40, 0.18) + 0.15 * _bump(t, 0.78, 0.12),
    "common_bean": lambda t: 0.25 + 0.45 * _bump(t, 0.22, 0.10) + 0.20 * _bump(t, 0.65, 0.15),
    "cassava_common_bean": lambda t: 0.38 + 0.18 * _bump(t, 0.25, 0.12) + 0.05 * np.sin(2 * np.pi * t),
}


def class_curve(name: str, T: int, identical: bool = False) -> np.ndarray:
    """Greenness trajectory sampled at T evenly spaced season positions."""
    t = np.linspace(0.0, 1.0, T)
    key = "maize" if identical else name
    return _CURVES[key](t)


def make_feature_dataset(
    counts: dict[str, int],
    T: int = 13,
    noise: float = 0.05,
    seed: int = 0,
    identical: bool = False,
) -> FeatureDataset:
    """Feature vectors drawn around each class curve with Gaussian noise."""
    rng = np.random.default_rng(seed)
    features = []
    fid = 1
    for name in sorted(counts, key=lambda n: CLASS_BY_NAME[n].id):
        curve = class_curve(name, T, identical=identical)
        for _ in range(counts[name]):
            values = curve + rng.normal(0.0, noise, size=T)
            features.append(
                FeatureVector(field_id=fid, values=values, label=CLASS_BY_NAME[name])
            )
            fid += 1
    return FeatureDataset(features=features, T=T)


def make_bundle(
    class_names: list[str],
    fields_per_class: int,
    T: int = 13,
    field_size: int = 2,
    noise: float = 0.0,
    cloud_fraction: float = 0.0,
    seed: int = 0,
    identical: bool = False,
    region_id: str = "synth",
) -> tuple[SceneStack, FieldTable]:
    """Build a raster bundle of square fields with class-specific curves.

    Cloud cover hits whole fields at random dates with the given
    probability; noise perturbs per-pixel reflectance.
    """
    if T < 2:
        raise ConfigError("T must be >= 2")
    if fields_per_class < 1 or field_size < 1:
        raise ConfigError("fields_per_class and field_size must be >= 1")
    if not 0.0 <= cloud_fraction <= 1.0:
        raise ConfigError("cloud_fraction must be in [0, 1]")
    for name in class_names:
        if name not in CLASS_BY_NAME:
            raise ConfigError(f"unknown class name {name!r}")

    n_fields = len(class_names) * fields_per_class
    per_row = int(np.ceil(np.sqrt(n_fields)))
    height = width = per_row * field_size
    rng = np.random.default_rng(seed)

    mask = np.zeros((height, width), dtype=np.int32)
    labels = {}
    curves = {}
    fid = 0
    for name in class_names:
        for _ in range(fields_per_class):
            fid += 1
            r = (fid - 1) // per_row
            c = (fid - 1) % per_row
            mask[
                r * field_size : (r + 1) * field_size,
                c * field_size : (c + 1) * field_size,
            ] = fid
            labels[fid] = CLASS_BY_NAME[name]
            curves[fid] = class_curve(name, T, identical=identical)

    cloudy = rng.random((n_fields, T)) < cloud_fraction

    dates = [datetime.date(2019, 6, 6) + datetime.timedelta(days=11 * t) for t in range(T)]
    scenes = []
    brightness = 0.6  # NIR + red, constant
    for t, date in enumerate(dates):
        nir = np.full((height, width), 0.3, dtype=np.float64)
        red = np.full((height, width), 0.3, dtype=np.float64)
        green = np.full((height, width), 0.3, dtype=np.float64)
        cld = np.zeros((height, width), dtype=np.float64)
        for f, curve in curves.items():
            where = mask == f
            g = np.clip(curve[t] + rng.normal(0.0, noise, size=int(where.sum())), -0.95, 0.95)
            nir[where] = brightness * (1.0 + g) / 2.0
            red[where] = brightness * (1.0 - g) / 2.0
            green[where] = np.maximum(brightness * (1.0 - 0.8 * g) / 2.0, 1e-3)
            if cloudy[f - 1, t]:
                cld[where] = 100.0
        scenes.append(
            Scene(
                date=date,
                bands={
                    "B03": green.astype(np.float32),
                    "B04": red.astype(np.float32),
                    "B08": nir.astype(np.float32),
                },
                cloud_prob=cld.astype(np.float32),
            )
        )

    stack = SceneStack(region_id=region_id, scenes=scenes, pixel_size_m=10.0)
    fields = FieldTable(field_mask=mask, labels=labels)
    stack.validate()
    fields.validate()
    return stack, fields


def paper_profile_dataset(seed: int = 0, T: int = 13, noise: float = 0.05) -> FeatureDataset:
    """Dataset with the reference per-class frequencies (1462 maize, ...)."""
    from .grids import REFERENCE_CLASS_COUNTS

    return make_feature_dataset(dict(REFERENCE_CLASS_COUNTS), T=T, noise=noise, seed=seed)
