"""Command-line entry point.

Subcommands: synth, preprocess, bands, experiment, predict. A config file
of `key = value` lines may supply any flag's value; command-line flags
win. Exit codes: 0 success, 1 configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import bundle as bundle_io
from . import reports
from .errors import ConfigError, CropKnnError, DataError
from .experiments import DEFAULT_K_CANDIDATES, run_suite
from .grids import CLASS_BY_NAME, CROP_CLASSES
from .indices import build_features, class_separability_report
from .knn import KnnModel, predict_batch
from .preprocess import PreprocessConfig, extract_field_series
from .synth import make_bundle


def _load_config(path: str) -> dict:
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _coerce(value: str):
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


def _parse_k_list(text: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(x) for x in str(text).split(",") if str(x).strip())
    except ValueError:
        raise ConfigError(f"bad k list: {text!r}") from None
    if not ks or any(k < 1 or k % 2 == 0 for k in ks):
        raise ConfigError(f"k candidates must be odd positive integers: {text!r}")
    return ks


def _preprocess_config(args) -> PreprocessConfig:
    cfg = PreprocessConfig(
        cloud_prob_threshold=float(args.cloud_threshold),
        pct_low=float(args.pct_low),
        pct_high=float(args.pct_high),
        sg_window=int(args.sg_window),
        sg_polyorder=int(args.sg_polyorder),
        min_valid_pixels=int(args.min_valid_pixels),
        percentile_scope=str(args.percentile_scope),
    )
    cfg.validate()
    return cfg


def _add_preprocess_flags(p):
    p.add_argument("--cloud-threshold", default=0.0, type=float)
    p.add_argument("--pct-low", default=5.0, type=float)
    p.add_argument("--pct-high", default=95.0, type=float)
    p.add_argument("--sg-window", default=5, type=int)
    p.add_argument("--sg-polyorder", default=2, type=int)
    p.add_argument("--min-valid-pixels", default=1, type=int)
    p.add_argument("--percentile-scope", default="field", choices=["field", "region"])


def _extract(args, stack, fields):
    cfg = _preprocess_config(args)
    debug_rows = []
    sink = None
    if getattr(args, "debug_dump", False):
        def sink(stage, fid, band, values):
            for date, v in zip(stack.dates, values):
                debug_rows.append((stage, fid, band, date.isoformat(), repr(float(v))))
    series, skips = extract_field_series(
        stack, fields, cfg, threads=int(args.threads), debug_sink=sink
    )
    if debug_rows:
        import csv as _csv
        import io as _io

        buf = _io.StringIO()
        w = _csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "field_id", "band", "date", "value"])
        w.writerows(debug_rows)
        reports.atomic_write_text(os.path.join(args.out, "debug_stages.csv"), buf.getvalue())
    return series, skips


def cmd_synth(args) -> int:
    names = [n.strip() for n in str(args.classes).split(",") if n.strip()]
    if len(names) < 2:
        raise ConfigError("need at least 2 class names")
    stack, fields = make_bundle(
        class_names=names,
        fields_per_class=int(args.fields_per_class),
        T=int(args.dates),
        field_size=int(args.field_size),
        noise=float(args.noise),
        cloud_fraction=float(args.cloud_fraction),
        seed=int(args.seed),
        identical=bool(args.identical),
    )
    bundle_io.write_bundle(stack, fields, args.out)
    print(f"wrote bundle with {len(fields.labels)} fields, T={len(stack)} to {args.out}")
    return 0


def cmd_preprocess(args) -> int:
    stack, fields = bundle_io.read_bundle(args.bundle)
    series, skips = _extract(args, stack, fields)
    reports.write_series_csv(os.path.join(args.out, "series.csv"), series)
    reports.write_skip_report(os.path.join(args.out, "skips.csv"), skips.skipped)
    print(f"wrote {len(series)} field series ({len(skips.skipped)} skipped) to {args.out}")
    return 0


def _load_series(args, stack, fields):
    if getattr(args, "series", None):
        return reports.read_series_csv(args.series)
    series, _ = _extract(args, stack, fields)
    return series


def cmd_bands(args) -> int:
    stack, fields = bundle_io.read_bundle(args.bundle)
    series = _load_series(args, stack, fields)
    band_map = getattr(stack, "band_map", bundle_io.DEFAULT_BAND_MAP)
    indices = [s.strip() for s in str(args.indices).split(",") if s.strip()]
    datasets = {}
    for index in indices:
        ds, _ = build_features(series, fields, index=index, band_map=band_map)
        datasets[index] = ds
    present = {c.name for c in datasets[indices[0]].class_counts}
    classes = tuple(n for n in ("maize", "cassava", "common_bean") if n in present)
    if not classes:
        raise DataError("no pure-crop classes present in dataset")
    rows = class_separability_report(datasets, classes=classes)
    reports.write_separability_csv(os.path.join(args.out, "separability.csv"), rows)
    print(f"wrote separability report for {indices} to {args.out}")
    return 0


def cmd_experiment(args) -> int:
    stack, fields = bundle_io.read_bundle(args.bundle)
    series = _load_series(args, stack, fields)
    band_map = getattr(stack, "band_map", bundle_io.DEFAULT_BAND_MAP)
    ds, _ = build_features(series, fields, index=str(args.index), band_map=band_map)
    k_candidates = _parse_k_list(args.k_candidates)
    suite = run_suite(ds, seed=int(args.seed), folds=int(args.folds), k_candidates=k_candidates)
    if args.classes:
        suite = [r for r in suite if len(r.spec.included_classes) <= int(args.classes)]
    reports.write_summary_csv(os.path.join(args.out, "summary.csv"), suite)
    for rep in suite:
        n = len(rep.spec.included_classes)
        reports.write_report_json(os.path.join(args.out, f"report_{n}crops.json"), rep)
        reports.write_confusion_csv(os.path.join(args.out, f"confusion_{n}crops.csv"), rep)
        reports.write_predictions_csv(
            os.path.join(args.out, f"predictions_{n}crops.csv"),
            sorted(rep.predictions, key=lambda r: r[0]),
        )
    print(f"wrote {len(suite)} experiment reports to {args.out}")
    return 0


def cmd_predict(args) -> int:
    train_stack, train_fields = bundle_io.read_bundle(args.train_bundle)
    query_stack, query_fields = bundle_io.read_bundle(args.query_bundle)
    band_map = getattr(train_stack, "band_map", bundle_io.DEFAULT_BAND_MAP)

    train_series, _ = _extract(args, train_stack, train_fields)
    query_series, _ = _extract(args, query_stack, query_fields)
    train_ds, _ = build_features(train_series, train_fields, index=str(args.index), band_map=band_map)
    query_ds, _ = build_features(query_series, query_fields, index=str(args.index), band_map=band_map)

    model = KnnModel(train_ds, int(args.k))
    results = predict_batch(model, query_ds)
    records = [
        (fv.field_id, fv.label.name, res)
        for fv, res in zip(query_ds.features, results)
    ]
    reports.write_predictions_csv(os.path.join(args.out, "predictions.csv"), records)
    correct = sum(1 for _, true, res in records if res.predicted.name == true)
    print(f"predicted {len(records)} fields, {correct} matching labels")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cropknn")
    parser.add_argument("--config", help="key = value config file; flags override")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", default=0, type=int)
        p.add_argument("--threads", default=1, type=int)
        p.add_argument("--debug-dump", action="store_true")

    p = sub.add_parser("synth", help="generate a synthetic grid bundle")
    common(p)
    p.add_argument("--classes", default="maize,cassava", help="comma-separated class names")
    p.add_argument("--fields-per-class", default=20, type=int)
    p.add_argument("--dates", default=13, type=int, help="number of observation dates")
    p.add_argument("--field-size", default=2, type=int, help="field side length in pixels")
    p.add_argument("--noise", default=0.0, type=float)
    p.add_argument("--cloud-fraction", default=0.0, type=float)
    p.add_argument("--identical", action="store_true", help="give every class the same curve")

    p = sub.add_parser("preprocess", help="bundle -> per-field series artifact")
    common(p)
    p.add_argument("--bundle", required=True)
    _add_preprocess_flags(p)

    p = sub.add_parser("bands", help="per-class separability report")
    common(p)
    p.add_argument("--bundle", required=True)
    p.add_argument("--series", help="prebuilt series.csv (skips preprocessing)")
    p.add_argument("--indices", default="NDVI,GCVI,B08,B04")
    _add_preprocess_flags(p)

    p = sub.add_parser("experiment", help="run the balanced-undersampling suite")
    common(p)
    p.add_argument("--bundle", required=True)
    p.add_argument("--series", help="prebuilt series.csv (skips preprocessing)")
    p.add_argument("--index", default="NDVI")
    p.add_argument("--folds", default=5, type=int)
    p.add_argument("--k-candidates", default=",".join(str(k) for k in DEFAULT_K_CANDIDATES))
    p.add_argument("--classes", type=int, help="cap on number of included classes")
    _add_preprocess_flags(p)

    p = sub.add_parser("predict", help="train on one bundle, predict another")
    common(p)
    p.add_argument("--train-bundle", required=True)
    p.add_argument("--query-bundle", required=True)
    p.add_argument("--k", default=9, type=int)
    p.add_argument("--index", default="NDVI")
    _add_preprocess_flags(p)

    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "bands": cmd_bands,
    "experiment": cmd_experiment,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # two-pass parse so a config file can supply defaults for any flag
    if "--config" in argv:
        cfg_path = argv[argv.index("--config") + 1]
        overrides = {k: _coerce(v) for k, v in _load_config(cfg_path).items()}
        parser.set_defaults(**overrides)
        for sp in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in overrides.items() if k in known})
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse reports usage errors via SystemExit
        return 0 if not exc.code else 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except CropKnnError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
