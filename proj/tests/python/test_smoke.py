import json
from pathlib import Path

import numpy as np
import pytest

import mimiclearn as ml

DATA = Path(__file__).resolve().parents[2] / "data"


def blobs(n=200, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    x = rng.normal(size=(n, 3)) + 2.0 * y[:, None]
    return ml.dataset_from_arrays(x, y.tolist(), class_names=["neg", "pos"])


def test_breast_cancer_loads():
    d = ml.load_csv_with_schema(DATA / "breast-cancer-wisconsin.data", DATA / "schemas" / "breast-cancer.json")
    assert len(d) == 699
    assert d.features.shape == (699, 9)
    assert d.class_names == ["2", "4"]
    assert sum(d.labels) == 241


def test_pipeline_and_export(tmp_path):
    d = blobs()
    run = ml.run_pipeline(d, {"seed": 3, "cv_k": 5})
    report = run.report
    assert report["config"]["seed"] == 3
    assert run.teacher.origin == "teacher-private"
    student = run.shared_student
    assert student is not None and student.kind != "knn"

    path = tmp_path / "student.json"
    ml.export_model(student, path, source_id="blobs")
    back = ml.import_model(path)
    assert back == student
    x = d.features
    assert back.predict(x) == student.predict(x)
    assert json.loads(path.read_text())["origin"] == "student-shareable"

    with pytest.raises(ml.PrivacyError):
        ml.export_model(run.teacher, tmp_path / "teacher.json")
    assert not (tmp_path / "teacher.json").exists()


def test_pipeline_is_deterministic():
    d = blobs(seed=1)
    ml.set_thread_count(1)
    a = ml.run_pipeline(d, {"seed": 9, "cv_k": 3}).report
    ml.set_thread_count(4)
    b = ml.run_pipeline(d, {"seed": 9, "cv_k": 3}).report
    ml.set_thread_count(0)
    assert a == b


def test_metrics_and_roc():
    m = ml.metrics([1, 1, 0, 0], [1, 0, 0, 0])
    assert m["accuracy"] == pytest.approx(0.75)
    curve = ml.roc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    assert curve["auc"] == 1.0
    assert curve["points"][0][2] is None


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(ml.DataError):
        ml.load_csv(tmp_path / "missing.csv", label_column="y")
    with pytest.raises(ml.ConfigError):
        ml.run_pipeline(blobs(), {"cv_kk": 3})
    bad = tmp_path / "bad.json"
    bad.write_text('{"format_version": 999}')
    with pytest.raises(ml.FormatError):
        ml.import_model(bad)
    assert issubclass(ml.PrivacyError, ml.MimicError)


def test_split_sizes():
    d = blobs(100)
    private, public, test = ml.stratified_split(d, 0.5, 0.3, 0.2, seed=1)
    assert len(private) + len(public) + len(test) == 100
    assert public.labels is None
    assert set(private.row_ids).isdisjoint(test.row_ids)
