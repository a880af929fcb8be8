"""Mimic learning: a private teacher labels a public pool, a shareable student learns from it."""

import json

from ._core import (
    ConfigError,
    DataError,
    Dataset,
    FormatError,
    MimicError,
    PipelineError,
    PrivacyError,
    TrainedModel,
    dataset_from_arrays,
    export_model,
    fit,
    import_model,
    load_csv,
    load_csv_with_schema,
    make_synthetic_cardiovascular,
    serialize_model,
    set_thread_count,
    stratified_split,
    thread_count,
)
from . import _core

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "FormatError",
    "MimicError",
    "PipelineError",
    "PrivacyError",
    "TrainedModel",
    "dataset_from_arrays",
    "export_model",
    "fit",
    "import_model",
    "load_csv",
    "load_csv_with_schema",
    "make_synthetic_cardiovascular",
    "metrics",
    "roc",
    "run_pipeline",
    "serialize_model",
    "set_thread_count",
    "stratified_split",
    "thread_count",
]


def metrics(y_true, y_pred, class_count=2, positive=1):
    """Accuracy plus positive-class and macro precision/recall/F1 as a dict."""
    return json.loads(_core.metrics(list(y_true), list(y_pred), class_count, positive))


def roc(scores, y_true, positive=1):
    """ROC points as [fpr, tpr, threshold] (None for the +inf threshold) and the AUC."""
    return json.loads(_core.roc(list(scores), list(y_true), positive))


class PipelineResult:
    def __init__(self, run):
        self._run = run
        self.report = json.loads(run.report())

    @property
    def teacher(self):
        return self._run.teacher

    @property
    def student(self):
        return self._run.student

    @property
    def shared_student(self):
        return self._run.shared_student


def run_pipeline(dataset, config=None):
    """Runs split, teacher race, annotation, student race and fidelity evaluation."""
    return PipelineResult(_core.run_pipeline(dataset, json.dumps(config or {})))
