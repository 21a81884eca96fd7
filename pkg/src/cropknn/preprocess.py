"""Preprocessing of raw scenes into clean per-field time series.

Four stages, applied per field and per band:

1. cloud masking (pixels with cloud probability above threshold -> NaN)
2. median over the field's pixels, per date
3. percentile masking of outlier timesteps
4. gap filling + Savitzky-Golay smoothing

Stage 4 first fills NaN gaps by linear interpolation (nearest-value
extension at the boundaries) and then smooths with a least-squares
polynomial filter whose window is truncated and refit at the series ends,
so polynomials up to the fit degree are reproduced exactly everywhere.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AllMissing, ConfigError, TooFewPoints, UnknownField
from .grids import FieldSeries, FieldTable, Scene, SceneStack


@dataclass
class PreprocessConfig:
    cloud_prob_threshold: float = 0.0
    pct_low: float = 5.0
    pct_high: float = 95.0
    sg_window: int = 5
    sg_polyorder: int = 2
    min_valid_pixels: int = 1
    percentile_scope: str = "field"  # "field" or "region"

    def validate(self):
        if not 0 <= self.pct_low < self.pct_high <= 100:
            raise ConfigError("need 0 <= pct_low < pct_high <= 100")
        if self.sg_window < 3 or self.sg_window % 2 == 0:
            raise ConfigError("sg_window must be odd and >= 3")
        if not 1 <= self.sg_polyorder < self.sg_window:
            raise ConfigError("sg_polyorder must be in [1, sg_window)")
        if self.min_valid_pixels < 1:
            raise ConfigError("min_valid_pixels must be >= 1")
        if self.percentile_scope not in ("field", "region"):
            raise ConfigError("percentile_scope must be 'field' or 'region'")
        if self.cloud_prob_threshold < 0:
            raise ConfigError("cloud_prob_threshold must be >= 0")


def cloud_mask(scene: Scene, threshold: float = 0.0) -> Scene:
    """Set reflectance pixels to NaN where cloud probability exceeds threshold.

    Pixels whose cloud probability is itself NaN are masked too.
    """
    cld = scene.cloud_prob
    masked = (cld > threshold) | np.isnan(cld)
    bands = {}
    for name, grid in scene.bands.items():
        out = grid.copy()
        out[masked] = np.nan
        bands[name] = out
    return Scene(date=scene.date, bands=bands, cloud_prob=cld)


def field_median(
    scene: Scene,
    fields: FieldTable,
    field_id: int,
    band: str,
    min_valid_pixels: int = 1,
) -> float:
    """Median reflectance over the field's valid pixels; NaN if too few."""
    if field_id not in fields.labels:
        raise UnknownField(f"field {field_id} not in label table")
    values = scene.bands[band][fields.field_mask == field_id]
    values = values[~np.isnan(values)]
    if values.size < min_valid_pixels:
        return float("nan")
    return float(np.median(values.astype(np.float64)))


def percentile_bounds(values: np.ndarray, pct_low: float, pct_high: float):
    """Low/high percentile of the non-NaN entries (linear interpolation)."""
    valid = values[~np.isnan(values)]
    if valid.size == 0:
        raise AllMissing("no valid entries to compute percentiles")
    return (
        float(np.percentile(valid, pct_low)),
        float(np.percentile(valid, pct_high)),
    )


def percentile_mask(
    series: np.ndarray, pct_low: float, pct_high: float, bounds=None
) -> np.ndarray:
    """NaN out entries strictly outside the percentile bounds.

    Bounds are computed over this series' valid entries unless given
    explicitly (used for region-scope masking). Ties with a bound are kept.
    """
    series = np.asarray(series, dtype=np.float64)
    lo, hi = bounds if bounds is not None else percentile_bounds(series, pct_low, pct_high)
    out = series.copy()
    with np.errstate(invalid="ignore"):
        out[(series < lo) | (series > hi)] = np.nan
    return out


def _sg_coefficients(offsets: np.ndarray, eval_offset: int, polyorder: int) -> np.ndarray:
    # row of the least-squares smoother: pinv of the Vandermonde design
    # matrix evaluated at the requested in-window position
    design = np.vander(offsets.astype(np.float64), polyorder + 1, increasing=True)
    pinv = np.linalg.pinv(design)
    powers = np.array([float(eval_offset) ** p for p in range(polyorder + 1)])
    return powers @ pinv


def _linear_fill(series: np.ndarray) -> np.ndarray:
    valid = ~np.isnan(series)
    idx = np.arange(series.size)
    # np.interp extends with the nearest valid value beyond the ends
    return np.interp(idx, idx[valid], series[valid])


def savgol_fill(series: np.ndarray, window: int, polyorder: int) -> np.ndarray:
    """Gap-fill then Savitzky-Golay smooth; returns a fully finite vector."""
    series = np.asarray(series, dtype=np.float64)
    if window < 3 or window % 2 == 0:
        raise ConfigError("window must be odd and >= 3")
    if not 1 <= polyorder < window:
        raise ConfigError("polyorder must be in [1, window)")
    n_valid = int(np.count_nonzero(~np.isnan(series)))
    if n_valid < polyorder + 1:
        raise TooFewPoints(
            f"{n_valid} valid entries, need at least {polyorder + 1}"
        )
    filled = _linear_fill(series)
    T = filled.size
    half = window // 2
    out = np.empty(T)
    for i in range(T):
        lo = max(0, i - half)
        hi = min(T, i + half + 1)
        offsets = np.arange(lo, hi) - i
        coeffs = _sg_coefficients(offsets, 0, min(polyorder, hi - lo - 1))
        out[i] = coeffs @ filled[lo:hi]
    return out


@dataclass
class SkipReport:
    """Fields dropped during extraction, with reasons."""

    skipped: list[tuple[int, str]] = field(default_factory=list)

    def add(self, field_id: int, reason: str):
        self.skipped.append((field_id, reason))


def _extract_one(
    field_id: int,
    stack: SceneStack,
    fields: FieldTable,
    cfg: PreprocessConfig,
    masked_scenes: list[Scene],
    region_bounds: dict | None,
):
    bands = stack.band_names
    band_series = {}
    stages = []
    for band in bands:
        raw = np.array(
            [
                field_median(s, fields, field_id, band, cfg.min_valid_pixels)
                for s in masked_scenes
            ]
        )
        if np.all(np.isnan(raw)):
            return None, "all timesteps cloud-masked", stages
        bounds = region_bounds[band] if region_bounds is not None else None
        clipped = percentile_mask(raw, cfg.pct_low, cfg.pct_high, bounds=bounds)
        try:
            filled = savgol_fill(clipped, cfg.sg_window, cfg.sg_polyorder)
        except TooFewPoints as exc:
            return None, f"band {band}: {exc}", stages
        band_series[band] = filled
        stages.extend(
            [("median", band, raw), ("percentile", band, clipped), ("filled", band, filled)]
        )
    series = FieldSeries(field_id=field_id, band_series=band_series, dates=stack.dates)
    return series, None, stages


def extract_field_series(
    stack: SceneStack,
    fields: FieldTable,
    cfg: PreprocessConfig | None = None,
    threads: int = 1,
    debug_sink=None,
) -> tuple[list[FieldSeries], SkipReport]:
    """Run the full preprocessing pipeline for every labeled field.

    Output is ordered by ascending field_id regardless of thread count.
    ``debug_sink(stage, field_id, band, values)`` receives intermediate
    stage outputs when provided.
    """
    cfg = cfg or PreprocessConfig()
    cfg.validate()
    stack.validate()
    fields.validate()

    masked = [cloud_mask(s, cfg.cloud_prob_threshold) for s in stack.scenes]
    field_ids = fields.field_ids()

    region_bounds = None
    if cfg.percentile_scope == "region":
        region_bounds = {}
        for band in stack.band_names:
            pool = np.array(
                [
                    field_median(s, fields, fid, band, cfg.min_valid_pixels)
                    for fid in field_ids
                    for s in masked
                ]
            )
            region_bounds[band] = percentile_bounds(pool, cfg.pct_low, cfg.pct_high)

    def work(fid):
        return _extract_one(fid, stack, fields, cfg, masked, region_bounds)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, field_ids))
    else:
        results = [work(fid) for fid in field_ids]

    out = []
    report = SkipReport()
    for fid, (series, reason, stages) in zip(field_ids, results):
        if debug_sink is not None:
            for stage, band, values in stages:
                debug_sink(stage, fid, band, values)
        if series is None:
            report.add(fid, reason)
            continue
        out.append(series)
    return out, report
