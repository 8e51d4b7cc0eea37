"""
Tests for hyperrobust.evaluation module.
"""

import math

import pytest

from hyperrobust.cascade import AttackSpec
from hyperrobust.dataset import label_record, write_jsonl
from hyperrobust.errors import EmptyDataset
from hyperrobust.evaluation import bench, error_summary, evaluate, evaluate_records
from hyperrobust.model import ModelParameters, save_model
from hyperrobust.robustness import QuadratureConfig, label_hypergraph
from hyperrobust.tests.conftest import small_er


def _constant_model(value):
    """A model whose output is ``value`` for every input."""
    params = ModelParameters.initialize(num_layers=1, width=4)
    params.weights["head.w2"][:] = 0.0
    params.weights["head.b2"][0] = value
    return params


def _records(labels):
    records = []
    for seed, label in enumerate(labels):
        record = label_record(
            small_er(seed, num_nodes=10, p=0.3),
            "ER",
            seed,
            AttackSpec.static(),
            QuadratureConfig(d_max=5),
        )
        records.append(record.model_copy(update={"label_r": label}))
    return records


class TestErrorSummary:
    """Tests for MAE and its spread."""

    def test_perfect(self):
        assert error_summary([0.2, 0.8], [0.2, 0.8]) == (0.0, 0.0)

    def test_constant_offset(self):
        mean, std = error_summary([0.5, 0.5], [0.3, 0.7])
        assert mean == pytest.approx(0.2)
        assert std == pytest.approx(0.0, abs=1e-12)

    def test_spread(self):
        mean, std = error_summary([0.0, 0.0], [0.1, 0.3])
        assert mean == pytest.approx(0.2)
        assert std == pytest.approx(0.1)

    def test_order_independent(self):
        predictions = [0.1, 0.35, 0.9, 0.42, 0.77]
        labels = [0.2, 0.3, 0.5, 0.6, 0.1]
        forward = error_summary(predictions, labels)
        backward = error_summary(predictions[::-1], labels[::-1])
        assert forward == backward

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            error_summary([], [])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            error_summary([0.1], [0.1, 0.2])


class TestEvaluateRecords:
    """Tests for scoring a model on records."""

    def test_constant_model(self):
        report = evaluate_records(_records([0.3, 0.7]), _constant_model(0.5))
        assert report.count == 2
        assert report.mean_abs_error == pytest.approx(0.2)
        assert report.std_abs_error == pytest.approx(0.0, abs=1e-12)
        assert report.baseline_mean == pytest.approx(0.5)
        assert report.baseline_mae == pytest.approx(0.2)

    def test_exact_model(self):
        report = evaluate_records(_records([0.4, 0.4]), _constant_model(0.4))
        assert report.mean_abs_error == pytest.approx(0.0, abs=1e-12)

    def test_training_baseline(self):
        report = evaluate_records(_records([0.3, 0.7]), _constant_model(0.5), baseline_mean=0.3)
        assert report.baseline_mae == pytest.approx(0.2)
        assert report.baseline_mean == 0.3

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            evaluate_records([], _constant_model(0.5))

    def test_summary_text(self):
        report = evaluate_records(_records([0.3, 0.7]), _constant_model(0.5))
        assert "MAE 0.20000" in report.summary()


class TestEvaluateFiles:
    """Tests for scoring saved models on JSONL files."""

    def test_evaluate(self, tmp_path):
        model = tmp_path / "model.json"
        test = tmp_path / "test.jsonl"
        train = tmp_path / "train.jsonl"
        save_model(_constant_model(0.5), model)
        write_jsonl(test, _records([0.3, 0.7]))
        write_jsonl(train, _records([0.9, 0.9, 0.9]))
        report = evaluate(model, test, train)
        assert report.mean_abs_error == pytest.approx(0.2)
        assert report.baseline_mean == pytest.approx(0.9)
        assert report.baseline_mae == pytest.approx(0.4)


class TestBench:
    """Tests for labelling-vs-prediction timing."""

    def test_report(self):
        records = _records([0.5, 0.5, 0.5])
        report = bench(records, _constant_model(0.5))
        assert report.count == 3
        assert report.mean_labeling_seconds >= 0.0
        assert report.mean_prediction_seconds >= 0.0
        assert report.mean_eval_count >= 1.0
        assert report.speedup > 0.0 or math.isinf(report.speedup)

    def test_uses_stored_depth_cap(self):
        """Relabelling reproduces the evaluation count of the stored settings."""
        h = small_er(3, num_nodes=30, p=0.2)
        record = label_record(h, "ER", 3, AttackSpec.static(), QuadratureConfig(d_max=2))
        deeper = label_hypergraph(h, AttackSpec.static(), QuadratureConfig(d_max=10))[1]
        assert deeper > record.eval_count
        report = bench([record], _constant_model(0.5))
        assert report.mean_eval_count == record.eval_count

    def test_limit(self):
        report = bench(_records([0.5, 0.5, 0.5]), _constant_model(0.5), limit=1)
        assert report.count == 1

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            bench([], _constant_model(0.5))
