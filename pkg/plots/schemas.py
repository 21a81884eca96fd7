"""Strict parsers for the pipeline's CSV/JSON artifact schemas.

Any deviation from the documented schema is a hard SchemaError; rows are
never silently skipped.
"""

import csv
import json


class SchemaError(Exception):
    pass


SEPARABILITY_HEADER = ["index", "class", "date", "mean", "std"]


def load_separability_csv(path):
    """Returns {index: {class: [(date, mean, std), ...]}}, date-sorted."""
    table = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SEPARABILITY_HEADER:
            raise SchemaError(f"{path}: bad header {header}, want {SEPARABILITY_HEADER}")
        count = 0
        for lineno, row in enumerate(reader, 2):
            if len(row) != 5:
                raise SchemaError(f"{path}:{lineno}: expected 5 columns")
            index, cls, date, mean, std = row
            try:
                entry = (int(date), float(mean), float(std))
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-numeric date/mean/std") from None
            if entry[2] < 0:
                raise SchemaError(f"{path}:{lineno}: negative std")
            table.setdefault(index, {}).setdefault(cls, []).append(entry)
            count += 1
    if count == 0:
        raise SchemaError(f"{path}: no data rows")
    for classes in table.values():
        for entries in classes.values():
            entries.sort()
    return table


REPORT_KEYS = (
    "included_classes",
    "selected_k",
    "overall_accuracy",
    "per_class_accuracy",
    "confusion",
)


def load_report_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from None
    for key in REPORT_KEYS:
        if key not in report:
            raise SchemaError(f"{path}: missing key {key!r}")
    classes = report["included_classes"]
    confusion = report["confusion"]
    n = len(classes)
    if n < 2:
        raise SchemaError(f"{path}: need at least 2 classes")
    if len(confusion) != n or any(len(row) != n for row in confusion):
        raise SchemaError(f"{path}: confusion matrix is not {n}x{n}")
    for row in confusion:
        for v in row:
            if not isinstance(v, int) or v < 0:
                raise SchemaError(f"{path}: confusion entries must be nonnegative ints")
    return report


SUMMARY_PREFIX = ["experiment", "m", "k", "OA"]


def load_summary_csv(path):
    """Returns (class_columns, rows); each row has n_classes, m, k, OA, accs."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:4] != SUMMARY_PREFIX:
            raise SchemaError(f"{path}: bad header {header}")
        class_cols = [h[len("acc_"):] for h in header[4:]]
        if any(not h.startswith("acc_") for h in header[4:]):
            raise SchemaError(f"{path}: accuracy columns must be acc_<class>")
        rows = []
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(header):
                raise SchemaError(f"{path}:{lineno}: column count mismatch")
            name = row[0]
            if not name.endswith("_crops"):
                raise SchemaError(f"{path}:{lineno}: experiment must be <n>_crops")
            try:
                n_classes = int(name[: -len("_crops")])
                m = int(row[1])
                k = int(row[2])
                oa = float(row[3])
                accs = {
                    cls: (float(v) if v else None)
                    for cls, v in zip(class_cols, row[4:])
                }
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-numeric value") from None
            rows.append({"n_classes": n_classes, "m": m, "k": k, "OA": oa, "acc": accs})
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return class_cols, rows
