"""Grid bundle directory format.

Layout::

    <bundle>/
      manifest.txt            key = value lines
      labels.csv              field_id,crop_name
      mask.i32                row-major little-endian int32 field IDs
      scenes/<date>/<band>.f32   row-major little-endian float32

The manifest carries region_id, width, height, pixel_size_m, the
reflectance band list and the date list. Cloud probability is stored as
band "CLD" alongside the reflectance bands. Optional keys ndvi_nir,
ndvi_red, gcvi_nir, gcvi_green override the default band-to-index
mapping.
"""

from __future__ import annotations

import csv
import datetime
import os

import numpy as np

from .errors import (
    BadDate,
    CorruptGrid,
    DimensionMismatch,
    InvalidBundle,
    IoFailure,
    MissingManifest,
)
from .grids import CLOUD_BAND, FieldTable, Scene, SceneStack, crop_class

DEFAULT_BAND_MAP = {
    "ndvi_nir": "B08",
    "ndvi_red": "B04",
    "gcvi_nir": "B08",
    "gcvi_green": "B03",
}
_BAND_MAP_KEYS = tuple(DEFAULT_BAND_MAP)


def _parse_manifest(path: str) -> dict[str, str]:
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidBundle(f"manifest line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    return entries


def _parse_date(text: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(text)
    except ValueError:
        raise BadDate(f"not an ISO-8601 date: {text!r}") from None


def _read_grid(path: str, shape: tuple[int, int], dtype) -> np.ndarray:
    expected = shape[0] * shape[1] * 4
    try:
        with open(path, "rb") as fh:
            payload = fh.read()
    except FileNotFoundError:
        raise CorruptGrid(f"missing grid file: {path}") from None
    if len(payload) != expected:
        raise CorruptGrid(f"{path}: expected {expected} bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy()


def read_bundle(path: str) -> tuple[SceneStack, FieldTable]:
    """Read and fully validate a grid bundle. Returns (stack, fields).

    The band-to-index mapping from the manifest is attached to the stack
    as ``stack.band_map``.
    """
    manifest_path = os.path.join(path, "manifest.txt")
    if not os.path.isfile(manifest_path):
        raise MissingManifest(f"no manifest.txt in {path}")
    entries = _parse_manifest(manifest_path)

    for key in ("region_id", "width", "height", "pixel_size_m", "bands", "dates"):
        if key not in entries:
            raise InvalidBundle(f"manifest missing key: {key}")
    try:
        width = int(entries["width"])
        height = int(entries["height"])
        pixel_size = float(entries["pixel_size_m"])
    except ValueError as exc:
        raise InvalidBundle(f"bad manifest numeric field: {exc}") from None
    shape = (height, width)

    bands = [b.strip() for b in entries["bands"].split(",") if b.strip()]
    if len(set(bands)) != len(bands):
        raise InvalidBundle("duplicate band names in manifest")
    dates = [_parse_date(d.strip()) for d in entries["dates"].split(",") if d.strip()]
    if any(b <= a for a, b in zip(dates, dates[1:])):
        raise BadDate("manifest dates must be strictly increasing")

    scenes = []
    for date in dates:
        scene_dir = os.path.join(path, "scenes", date.isoformat())
        band_grids = {
            b: _read_grid(os.path.join(scene_dir, f"{b}.f32"), shape, "<f4")
            for b in bands
        }
        cloud = _read_grid(os.path.join(scene_dir, f"{CLOUD_BAND}.f32"), shape, "<f4")
        scenes.append(Scene(date=date, bands=band_grids, cloud_prob=cloud))

    stack = SceneStack(
        region_id=entries["region_id"], scenes=scenes, pixel_size_m=pixel_size
    )
    stack.validate()
    stack.band_map = {
        k: entries.get(k, DEFAULT_BAND_MAP[k]) for k in _BAND_MAP_KEYS
    }

    mask = _read_grid(os.path.join(path, "mask.i32"), shape, "<i4")
    labels = {}
    labels_path = os.path.join(path, "labels.csv")
    if not os.path.isfile(labels_path):
        raise InvalidBundle(f"no labels.csv in {path}")
    with open(labels_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["field_id", "crop_name"]:
            raise InvalidBundle("labels.csv must have header field_id,crop_name")
        for row in reader:
            if len(row) != 2:
                raise InvalidBundle(f"labels.csv bad row: {row}")
            try:
                fid = int(row[0])
            except ValueError:
                raise InvalidBundle(f"labels.csv bad field_id: {row[0]!r}") from None
            if fid in labels:
                raise InvalidBundle(f"labels.csv duplicate field_id: {fid}")
            labels[fid] = crop_class(row[1])

    fields = FieldTable(field_mask=mask, labels=labels)
    fields.validate()
    return stack, fields


def _write_grid(path: str, grid: np.ndarray, dtype):
    np.ascontiguousarray(grid, dtype=dtype).tofile(path)


def write_bundle(stack: SceneStack, fields: FieldTable, path: str):
    """Write a validated bundle; read_bundle round-trips grid payloads bit-exactly."""
    stack.validate()
    fields.validate()
    height, width = stack.scenes[0].shape
    if fields.field_mask.shape != (height, width):
        raise DimensionMismatch("field mask dimensions differ from scene grids")

    try:
        os.makedirs(path, exist_ok=True)
        bands = stack.band_names
        with open(os.path.join(path, "manifest.txt"), "w", encoding="utf-8") as fh:
            fh.write(f"region_id = {stack.region_id}\n")
            fh.write(f"width = {width}\n")
            fh.write(f"height = {height}\n")
            fh.write(f"pixel_size_m = {stack.pixel_size_m}\n")
            fh.write(f"bands = {','.join(bands)}\n")
            fh.write(f"dates = {','.join(d.isoformat() for d in stack.dates)}\n")
            band_map = getattr(stack, "band_map", None)
            if band_map:
                for key in _BAND_MAP_KEYS:
                    if band_map.get(key, DEFAULT_BAND_MAP[key]) != DEFAULT_BAND_MAP[key]:
                        fh.write(f"{key} = {band_map[key]}\n")

        for scene in stack.scenes:
            scene_dir = os.path.join(path, "scenes", scene.date.isoformat())
            os.makedirs(scene_dir, exist_ok=True)
            for band in bands:
                _write_grid(os.path.join(scene_dir, f"{band}.f32"), scene.bands[band], "<f4")
            _write_grid(os.path.join(scene_dir, f"{CLOUD_BAND}.f32"), scene.cloud_prob, "<f4")

        _write_grid(os.path.join(path, "mask.i32"), fields.field_mask, "<i4")
        with open(os.path.join(path, "labels.csv"), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["field_id", "crop_name"])
            for fid in fields.field_ids():
                writer.writerow([fid, fields.labels[fid].name])
    except OSError as exc:
        raise IoFailure(f"failed to write bundle at {path}: {exc}") from exc
