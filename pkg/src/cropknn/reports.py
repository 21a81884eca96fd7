"""On-disk artifact schemas shared by the CLI and downstream plotting.

All writes are atomic (temp file in the destination directory, then
rename) so partially written artifacts are never observed.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np

from .errors import InvalidBundle
from .grids import CLASS_BY_ID, CROP_CLASSES, FieldSeries
from .knn import NeighborResult


def atomic_write_text(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_series_csv(path: str, series: list[FieldSeries]):
    """field_id,band,date,value with full float64 round-trip precision."""
    rows = []
    for fs in sorted(series, key=lambda s: s.field_id):
        for band in sorted(fs.band_series):
            for date, value in zip(fs.dates, fs.band_series[band]):
                rows.append((fs.field_id, band, date.isoformat(), repr(float(value))))
    atomic_write_text(path, _csv_text(["field_id", "band", "date", "value"], rows))


def read_series_csv(path: str) -> list[FieldSeries]:
    import datetime

    table: dict[int, dict[str, list[tuple[str, float]]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["field_id", "band", "date", "value"]:
            raise InvalidBundle(f"{path}: bad series CSV header {header}")
        for row in reader:
            fid, band, date, value = int(row[0]), row[1], row[2], float(row[3])
            table.setdefault(fid, {}).setdefault(band, []).append((date, value))
    out = []
    for fid in sorted(table):
        bands = {}
        dates = None
        for band, pairs in table[fid].items():
            pairs.sort()
            bands[band] = np.array([v for _, v in pairs])
            dates = [datetime.date.fromisoformat(d) for d, _ in pairs]
        out.append(FieldSeries(field_id=fid, band_series=bands, dates=dates))
    return out


def write_skip_report(path: str, skipped: list[tuple[int, str]]):
    atomic_write_text(path, _csv_text(["field_id", "reason"], skipped))


def write_separability_csv(path: str, rows):
    formatted = [(i, c, d, f"{m:.10g}", f"{s:.10g}") for i, c, d, m, s in rows]
    atomic_write_text(path, _csv_text(["index", "class", "date", "mean", "std"], formatted))


def write_predictions_csv(path: str, records):
    """records: (field_id, true_class_name, result: NeighborResult)."""
    rows = []
    for fid, true_name, result in records:
        rows.append(
            (
                fid,
                true_name,
                result.predicted.name,
                "|".join(str(n) for n in result.neighbor_ids),
                "|".join(f"{d:.12g}" for d in result.distances),
            )
        )
    atomic_write_text(
        path,
        _csv_text(
            ["field_id", "true_class", "predicted_class", "neighbor_ids", "neighbor_distances"],
            rows,
        ),
    )


def summary_rows(reports) -> list[list[str]]:
    header = ["experiment", "m", "k", "OA"] + [f"acc_{c.name}" for c in CROP_CLASSES]
    rows = [header]
    for rep in reports:
        n = len(rep.spec.included_classes)
        row = [f"{n}_crops", str(rep.m), str(rep.selected_k), f"{rep.overall_accuracy:.6f}"]
        for c in CROP_CLASSES:
            acc = rep.per_class_accuracy.get(c.id)
            row.append("" if acc is None else f"{acc:.6f}")
        rows.append(row)
    return rows


def write_summary_csv(path: str, reports):
    rows = summary_rows(reports)
    atomic_write_text(path, _csv_text(rows[0], rows[1:]))


def write_confusion_csv(path: str, report):
    class_ids = sorted(c.id for c in report.spec.included_classes)
    names = [CLASS_BY_ID[cid].name for cid in class_ids]
    rows = [
        [names[i]] + [str(int(v)) for v in report.confusion[i]]
        for i in range(len(names))
    ]
    atomic_write_text(path, _csv_text(["true_class"] + names, rows))


def report_to_json(report) -> dict:
    return {
        "included_classes": [c.name for c in report.spec.included_classes],
        "folds": report.spec.folds,
        "k_candidates": list(report.spec.k_candidates),
        "seed": report.spec.seed,
        "m": report.m,
        "selected_k": report.selected_k,
        "k_table": {str(k): v for k, v in sorted(report.k_table.items())},
        "overall_accuracy": report.overall_accuracy,
        "per_class_accuracy": {
            CLASS_BY_ID[cid].name: acc for cid, acc in sorted(report.per_class_accuracy.items())
        },
        "confusion": report.confusion.tolist(),
        "per_fold_accuracy": report.per_fold_accuracy,
        "fold_of": {str(fid): f for fid, f in sorted(report.fold_of.items())},
        "field_ids": list(report.field_ids),
    }


def write_report_json(path: str, report):
    atomic_write_text(path, json.dumps(report_to_json(report), indent=2) + "\n")
