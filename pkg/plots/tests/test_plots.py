import json

import pytest

import plot_accuracy_curve
import plot_confusion
import plot_separability
from schemas import SchemaError, load_report_json, load_separability_csv, load_summary_csv


def image_ok(path):
    return path.exists() and path.stat().st_size > 1000


class TestSeparability:
    def test_renders_pipeline_output(self, artifacts, tmp_path):
        out = tmp_path / "sep.png"
        rc = plot_separability.main(
            ["--in", str(artifacts / "separability.csv"), "--out", str(out)]
        )
        assert rc == 0 and image_ok(out)

    def test_empty_csv_rejected(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("index,class,date,mean,std\n")
        assert plot_separability.main(["--in", str(bad), "--out", str(tmp_path / "x.png")]) == 1

    def test_bad_header_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(SchemaError):
            load_separability_csv(str(bad))

    def test_non_numeric_row_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("index,class,date,mean,std\nNDVI,maize,zero,0.5,0.1\n")
        with pytest.raises(SchemaError):
            load_separability_csv(str(bad))


class TestConfusion:
    def test_renders_pipeline_output(self, artifacts, tmp_path):
        out = tmp_path / "conf.png"
        rc = plot_confusion.main(
            ["--in", str(artifacts / "report_3crops.json"), "--out", str(out)]
        )
        assert rc == 0 and image_ok(out)

    def test_identity_matrix_renders(self, tmp_path):
        report = {
            "included_classes": ["maize", "cassava"],
            "selected_k": 1,
            "overall_accuracy": 1.0,
            "per_class_accuracy": {"maize": 1.0, "cassava": 1.0},
            "confusion": [[5, 0], [0, 5]],
        }
        src = tmp_path / "r.json"
        src.write_text(json.dumps(report))
        out = tmp_path / "ident.png"
        assert plot_confusion.main(["--in", str(src), "--out", str(out)]) == 0
        assert image_ok(out)

    def test_ragged_confusion_rejected(self, tmp_path):
        report = {
            "included_classes": ["maize", "cassava"],
            "selected_k": 1,
            "overall_accuracy": 1.0,
            "per_class_accuracy": {},
            "confusion": [[5, 0], [0]],
        }
        src = tmp_path / "r.json"
        src.write_text(json.dumps(report))
        assert plot_confusion.main(["--in", str(src), "--out", str(tmp_path / "x.png")]) == 1

    def test_invalid_json_rejected(self, tmp_path):
        src = tmp_path / "r.json"
        src.write_text("{not json")
        with pytest.raises(SchemaError):
            load_report_json(str(src))


class TestAccuracyCurve:
    def test_renders_pipeline_output(self, artifacts, tmp_path):
        out = tmp_path / "acc.png"
        rc = plot_accuracy_curve.main(
            ["--in", str(artifacts / "summary.csv"), "--out", str(out)]
        )
        assert rc == 0 and image_ok(out)

    def test_single_row_renders(self, tmp_path):
        src = tmp_path / "summary.csv"
        src.write_text(
            "experiment,m,k,OA,acc_maize,acc_cassava\n"
            "2_crops,10,3,0.900000,0.850000,0.950000\n"
        )
        out = tmp_path / "one.png"
        assert plot_accuracy_curve.main(["--in", str(src), "--out", str(out)]) == 0
        assert image_ok(out)

    def test_bad_experiment_name_rejected(self, tmp_path):
        src = tmp_path / "summary.csv"
        src.write_text("experiment,m,k,OA,acc_maize\nweird,10,3,0.9,0.8\n")
        with pytest.raises(SchemaError):
            load_summary_csv(str(src))

    def test_missing_file_exits_nonzero(self, tmp_path):
        assert plot_accuracy_curve.main(
            ["--in", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.png")]
        ) == 1
