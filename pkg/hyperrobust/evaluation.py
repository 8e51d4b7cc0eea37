"""Test-set error reports and labelling-vs-prediction timing."""

from __future__ import annotations

import logging
import math
import time
from pathlib import Path
from typing import Sequence

import numpy as np
from pydantic import BaseModel, Field

from hyperrobust.dataset import SampleRecord, read_jsonl
from hyperrobust.errors import EmptyDataset
from hyperrobust.model import ModelParameters, load_model, predict
from hyperrobust.robustness import QuadratureConfig, label_hypergraph
from hyperrobust.tracing import PipelineTracer

logger = logging.getLogger(__name__)


class EvalReport(BaseModel):
    """Mean absolute error ± standard deviation over one test file."""

    count: int = Field(ge=0)
    mean_abs_error: float = Field(ge=0.0)
    std_abs_error: float = Field(ge=0.0)
    # error of always predicting the mean training (or test) label
    baseline_mae: float = Field(ge=0.0)
    baseline_mean: float
    prediction_seconds: float = Field(ge=0.0)
    labeling_seconds: float | None = None

    def summary(self) -> str:
        return (
            f"MAE {self.mean_abs_error:.5f} ± {self.std_abs_error:.5f} over {self.count} samples "
            f"(baseline {self.baseline_mae:.5f})"
        )


def error_summary(predictions: Sequence[float], labels: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation of ``|prediction - label|``.

    Sums are exact (``math.fsum``) so the result does not depend on sample order.
    """
    if len(predictions) != len(labels):
        raise ValueError(f"{len(predictions)} predictions for {len(labels)} labels")
    if not labels:
        raise EmptyDataset("no samples to evaluate")
    errors = [abs(p - y) for p, y in zip(predictions, labels)]
    mean = math.fsum(errors) / len(errors)
    variance = math.fsum((e - mean) ** 2 for e in errors) / len(errors)
    return mean, math.sqrt(max(variance, 0.0))


def evaluate_records(
    records: Sequence[SampleRecord],
    params: ModelParameters,
    baseline_mean: float | None = None,
) -> EvalReport:
    labels = [r.label_r for r in records]
    if not labels:
        raise EmptyDataset("no samples to evaluate")
    start = time.perf_counter()
    predictions = [predict(r.hypergraph(), r.failure_order, params) for r in records]
    elapsed = time.perf_counter() - start
    mean, std = error_summary(predictions, labels)
    if baseline_mean is None:
        baseline_mean = math.fsum(labels) / len(labels)
    baseline, _ = error_summary([baseline_mean] * len(labels), labels)
    return EvalReport(
        count=len(labels),
        mean_abs_error=mean,
        std_abs_error=std,
        baseline_mae=baseline,
        baseline_mean=baseline_mean,
        prediction_seconds=elapsed,
    )


def evaluate(
    model_path: str | Path, test_path: str | Path, train_path: str | Path | None = None
) -> EvalReport:
    """Score a saved model on a JSONL test file.

    With ``train_path`` the baseline predicts the mean training label,
    otherwise the mean test label.
    """
    params = load_model(model_path)
    records = read_jsonl(test_path)
    baseline_mean = None
    if train_path is not None:
        train_labels = [r.label_r for r in read_jsonl(train_path)]
        if train_labels:
            baseline_mean = math.fsum(train_labels) / len(train_labels)
    with PipelineTracer("evaluate").span("evaluate", {"samples": len(records)}):
        report = evaluate_records(records, params, baseline_mean)
    logger.info("%s: %s", test_path, report.summary())
    return report


class BenchReport(BaseModel):
    count: int = Field(ge=0)
    mean_labeling_seconds: float = Field(ge=0.0)
    mean_prediction_seconds: float = Field(ge=0.0)
    mean_eval_count: float = Field(ge=0.0)
    speedup: float = Field(ge=0.0)


def bench(
    records: Sequence[SampleRecord], params: ModelParameters, limit: int | None = None
) -> BenchReport:
    """Time adaptive-quadrature labelling against a surrogate prediction.

    Each record is relabelled with its stored attack, tolerance and depth cap.
    """
    chosen = list(records[:limit] if limit is not None else records)
    if not chosen:
        raise EmptyDataset("nothing to benchmark")
    labeling: list[float] = []
    prediction: list[float] = []
    evals: list[int] = []
    for record in chosen:
        h = record.hypergraph()
        quadrature = QuadratureConfig(epsilon=record.label_epsilon, d_max=record.label_d_max)
        start = time.perf_counter()
        _, count = label_hypergraph(h, record.attack_spec(), quadrature)
        labeling.append(time.perf_counter() - start)
        evals.append(count)
        start = time.perf_counter()
        predict(h, record.failure_order, params)
        prediction.append(time.perf_counter() - start)
    mean_label = float(np.mean(labeling))
    mean_predict = float(np.mean(prediction))
    report = BenchReport(
        count=len(chosen),
        mean_labeling_seconds=mean_label,
        mean_prediction_seconds=mean_predict,
        mean_eval_count=float(np.mean(evals)),
        speedup=mean_label / mean_predict if mean_predict > 0 else math.inf,
    )
    logger.info(
        "labelling %.4gs vs prediction %.4gs per sample (%.1fx)",
        mean_label,
        mean_predict,
        report.speedup,
    )
    return report
