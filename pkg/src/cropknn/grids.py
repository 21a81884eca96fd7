"""Core raster and label data structures.

Grids are numpy arrays (float32 for reflectance and cloud probability,
int32 for the field mask). Missing pixels are NaN.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidBundle

CLOUD_BAND = "CLD"


@dataclass(frozen=True)
class CropClass:
    id: int
    name: str


# Fixed class ordering: ids assigned in descending training-set frequency.
CROP_CLASSES = (
    CropClass(0, "maize"),
    CropClass(1, "cassava"),
    CropClass(2, "maize_common_bean"),
    CropClass(3, "maize_cassava"),
    CropClass(4, "maize_soybean"),
    CropClass(5, "common_bean"),
    CropClass(6, "cassava_common_bean"),
)

CLASS_BY_NAME = {c.name: c for c in CROP_CLASSES}
CLASS_BY_ID = {c.id: c for c in CROP_CLASSES}

# reference frequencies of the western-Kenya training set, by class name
REFERENCE_CLASS_COUNTS = {
    "maize": 1462,
    "cassava": 829,
    "maize_common_bean": 487,
    "maize_cassava": 172,
    "maize_soybean": 160,
    "common_bean": 98,
    "cassava_common_bean": 78,
}


def crop_class(name: str) -> CropClass:
    try:
        return CLASS_BY_NAME[name]
    except KeyError:
        raise InvalidBundle(f"unknown crop class name: {name!r}") from None


@dataclass
class Scene:
    """All grids for one observation date."""

    date: datetime.date
    bands: dict[str, np.ndarray]  # band name -> HxW float32 reflectance
    cloud_prob: np.ndarray  # HxW float32, values in [0, 100] or NaN

    def validate(self):
        if not self.bands:
            raise InvalidBundle(f"scene {self.date}: no bands")
        shape = self.cloud_prob.shape
        for name, grid in self.bands.items():
            if not name:
                raise InvalidBundle("empty band name")
            if grid.shape != shape:
                raise DimensionMismatch(
                    f"scene {self.date}: band {name} shape {grid.shape} != {shape}"
                )
        cld = self.cloud_prob
        bad = cld[~np.isnan(cld)]
        if bad.size and (bad.min() < 0 or bad.max() > 100):
            raise InvalidBundle(f"scene {self.date}: cloud probability outside [0, 100]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.cloud_prob.shape


@dataclass
class SceneStack:
    region_id: str
    scenes: list[Scene]
    pixel_size_m: float

    def validate(self):
        if len(self.scenes) < 2:
            raise InvalidBundle("a scene stack needs at least 2 dates")
        dates = [s.date for s in self.scenes]
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise InvalidBundle("scene dates must be strictly increasing")
        shape = self.scenes[0].shape
        bands = set(self.scenes[0].bands)
        for scene in self.scenes:
            scene.validate()
            if scene.shape != shape:
                raise DimensionMismatch("scenes disagree on grid dimensions")
            if set(scene.bands) != bands:
                raise InvalidBundle("scenes disagree on band set")

    @property
    def dates(self) -> list[datetime.date]:
        return [s.date for s in self.scenes]

    @property
    def band_names(self) -> list[str]:
        return sorted(self.scenes[0].bands)

    def __len__(self):
        return len(self.scenes)


@dataclass
class FieldTable:
    field_mask: np.ndarray  # HxW int32, 0 = no field
    labels: dict[int, CropClass]

    def validate(self):
        if self.field_mask.min() < 0:
            raise InvalidBundle("field mask contains negative IDs")
        mask_ids = set(np.unique(self.field_mask).tolist()) - {0}
        from .errors import UnlabeledField

        unlabeled = mask_ids - set(self.labels)
        if unlabeled:
            raise UnlabeledField(f"mask IDs without labels: {sorted(unlabeled)}")
        for fid in self.labels:
            if fid <= 0:
                raise InvalidBundle(f"non-positive field ID in labels: {fid}")
        empty = set(self.labels) - mask_ids
        if empty:
            raise InvalidBundle(f"labeled fields with no pixels: {sorted(empty)}")

    def field_ids(self) -> list[int]:
        return sorted(self.labels)


@dataclass
class FieldSeries:
    """Per-field, per-band time series; NaN marks missing timesteps."""

    field_id: int
    band_series: dict[str, np.ndarray]  # band -> length-T float64
    dates: list[datetime.date] = field(default_factory=list)
