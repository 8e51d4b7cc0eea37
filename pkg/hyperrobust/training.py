"""Mini-batch training with AdamW and a cosine-annealed learning rate."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from hyperrobust.errors import EmptyDataset, InvalidConfig
from hyperrobust.generators import make_rng
from hyperrobust.model import (
    AggregationMode,
    ModelParameters,
    Readout,
    TrainingSample,
    ablate_features,
    calibrate,
    forward,
    loss_and_grad,
)
from hyperrobust.tracing import PipelineTracer

logger = logging.getLogger(__name__)

# training samples used to set the initial weight scales
CALIBRATION_SAMPLES = 32


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    eta_max: float = Field(default=1e-3, gt=0.0)
    eta_min: float = Field(default=1e-5, ge=0.0)
    t_max: int = Field(default=200, ge=1)
    epochs: int = Field(default=200, ge=1)
    batch_size: int = Field(default=32, ge=1)
    weight_decay: float = Field(default=0.01, ge=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    seed: int = 0
    num_layers: int = Field(default=3, ge=1)
    width: int = Field(default=64, ge=1)
    aggregation_mode: AggregationMode = AggregationMode.INJECTIVE_SUM
    schedule: Literal["cosine", "constant"] = "cosine"
    # share of the shuffled dataset held out for model selection
    validation_fraction: float = Field(default=0.0, ge=0.0, lt=1.0)
    feature_ablation: tuple[str, ...] = ()
    readout: Readout = Readout.DUAL
    # global gradient norm cap per step; None disables clipping
    max_grad_norm: float | None = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _rates_ordered(self) -> TrainConfig:
        if self.eta_min > self.eta_max:
            raise ValueError(f"eta_min ({self.eta_min}) exceeds eta_max ({self.eta_max})")
        return self


def cosine_lr(t_cur: int, cfg: TrainConfig) -> float:
    """``eta_min + (eta_max - eta_min) * (1 + cos(pi * t_cur / t_max)) / 2``."""
    if not 0 <= t_cur <= cfg.t_max:
        raise ValueError(f"t_cur must lie in 0..{cfg.t_max}, got {t_cur}")
    weight = 0.5 * (1.0 + math.cos(math.pi * t_cur / cfg.t_max))
    # convex combination keeps both endpoints exact
    return cfg.eta_max * weight + cfg.eta_min * (1.0 - weight)


def learning_rate(epoch: int, cfg: TrainConfig) -> float:
    if cfg.schedule == "constant":
        return cfg.eta_max
    return cosine_lr(epoch % cfg.t_max, cfg)


class AdamW:
    """Adam with decoupled weight decay, updating arrays in place."""

    def __init__(
        self,
        weights: dict[str, np.ndarray],
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ) -> None:
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.m = {k: np.zeros_like(v) for k, v in weights.items()}
        self.v = {k: np.zeros_like(v) for k, v in weights.items()}
        self.step_count = 0

    def step(
        self, weights: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float
    ) -> None:
        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count
        for name, w in weights.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            w *= 1.0 - lr * self.weight_decay
            w -= lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float | None) -> float:
    """Scale ``grads`` in place to a global norm of at most ``max_norm``.

    Returns the norm before clipping.
    """
    norm = math.sqrt(math.fsum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm is not None and norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    lr: float
    validation_loss: float | None = None


def mean_squared_error(samples: Sequence[TrainingSample], params: ModelParameters) -> float:
    errors = [forward(s.hypergraph, s.features, params)[0] - s.label for s in samples]
    return math.fsum(e * e for e in errors) / len(errors)


def train(
    dataset: Sequence[TrainingSample], cfg: TrainConfig
) -> tuple[ModelParameters, list[EpochRecord]]:
    """Fit a fresh model; returns the best-validation or the final parameters."""
    if not dataset:
        raise EmptyDataset("cannot train on an empty dataset")
    samples = [
        TrainingSample(s.hypergraph, ablate_features(s.features, cfg.feature_ablation), s.label)
        for s in dataset
    ]
    rng = make_rng(cfg.seed, attempt=2)
    train_idx = np.arange(len(samples))
    held_out: list[TrainingSample] = []
    if cfg.validation_fraction > 0.0:
        shuffled = rng.permutation(len(samples))
        n_val = max(1, int(math.floor(cfg.validation_fraction * len(samples) + 0.5)))
        if n_val >= len(samples):
            raise InvalidConfig(
                f"validation_fraction {cfg.validation_fraction} leaves no training samples"
            )
        held_out = [samples[i] for i in np.sort(shuffled[:n_val])]
        train_idx = np.sort(shuffled[n_val:])

    params = ModelParameters.initialize(
        cfg.num_layers,
        cfg.width,
        cfg.aggregation_mode,
        cfg.seed,
        cfg.feature_ablation,
        cfg.readout,
    )
    calibrate(params, [samples[i] for i in train_idx[:CALIBRATION_SAMPLES]])
    optimizer = AdamW(params.weights, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay)
    logger.info(
        "training %d parameters on %d samples (%d held out) for %d epochs",
        params.num_parameters,
        len(train_idx),
        len(held_out),
        cfg.epochs,
    )

    history: list[EpochRecord] = []
    best: ModelParameters | None = None
    best_loss = math.inf
    with PipelineTracer("train").span("train", {"samples": len(samples)}):
        for epoch in range(cfg.epochs):
            lr = learning_rate(epoch, cfg)
            order = rng.permutation(train_idx)
            weighted: list[float] = []
            for start in range(0, len(order), cfg.batch_size):
                batch = [samples[i] for i in order[start : start + cfg.batch_size]]
                loss, grads = loss_and_grad(batch, params)
                clip_gradients(grads, cfg.max_grad_norm)
                optimizer.step(params.weights, grads, lr)
                weighted.append(loss * len(batch))
            epoch_loss = math.fsum(weighted) / len(order)
            validation = mean_squared_error(held_out, params) if held_out else None
            history.append(EpochRecord(epoch, epoch_loss, lr, validation))
            if validation is not None and validation < best_loss:
                best_loss = validation
                best = params.copy()
            logger.debug(
                "epoch %d loss %.6g lr %.3g validation %s", epoch, epoch_loss, lr, validation
            )

    if best is not None:
        logger.info("selected parameters with validation loss %.6g", best_loss)
        return best, history
    return params, history
