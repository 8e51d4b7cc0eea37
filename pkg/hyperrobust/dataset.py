"""Labelled sample records, JSONL persistence and dataset generation.

One :class:`SampleRecord` per line. Labelling fans out over a process pool;
``Executor.map`` keeps results in submission order, so files do not depend
on the number of workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Sequence, TypeVar

from pydantic import BaseModel, Field, ValidationError, model_validator

from hyperrobust.cascade import AttackKind, AttackSpec, CascadeParams
from hyperrobust.config import PipelineConfig
from hyperrobust.errors import DataIoError, HyperRobustError, InvalidConfig, ParseError
from hyperrobust.generators import Family, generate
from hyperrobust.hypergraph import Hypergraph
from hyperrobust.model import TrainingSample, build_features
from hyperrobust.robustness import QuadratureConfig, attack_order, label_hypergraph
from hyperrobust.tracing import PipelineTracer

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

T = TypeVar("T")
R = TypeVar("R")


class SampleLogger:
    """Logger bound to one sample's identity.

    ``family``, ``seed`` and ``sample_index`` are added to every record's
    ``extra`` so handlers can surface them without interpolation.
    """

    def __init__(
        self, family: str, seed: int, sample_index: int, name: str = "hyperrobust.sample"
    ) -> None:
        self._base = logging.getLogger(name)
        self._extra: dict[str, Any] = {
            "family": family,
            "seed": seed,
            "sample_index": sample_index,
        }

    def _log(self, level: int, msg: str, *args: Any) -> None:
        self._base.log(level, msg, *args, extra=self._extra)

    def debug(self, msg: str, *args: Any) -> None:
        self._log(logging.DEBUG, msg, *args)

    def info(self, msg: str, *args: Any) -> None:
        self._log(logging.INFO, msg, *args)


class SampleRecord(BaseModel):
    """One labelled hypergraph."""

    schema_version: int = SCHEMA_VERSION
    family: str
    seed: int
    num_nodes: int = Field(ge=0)
    edges: list[list[int]]
    attack: AttackKind
    cascade: CascadeParams | None = None
    failure_order: list[int]
    label_r: float = Field(ge=0.0, le=1.0)
    eval_count: int = Field(ge=0)
    label_epsilon: float = Field(gt=0.0)
    label_d_max: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _consistent(self) -> SampleRecord:
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}")
        h = self.hypergraph()
        if [list(e) for e in h.edges] != self.edges:
            raise ValueError("edges must hold strictly ascending node ids")
        if sorted(self.failure_order) != list(range(self.num_nodes)):
            raise ValueError("failure_order must be a permutation of the node ids")
        if (self.attack is AttackKind.DYNAMIC) != (self.cascade is not None):
            raise ValueError("cascade parameters are required for, and only for, dynamic attacks")
        return self

    def hypergraph(self) -> Hypergraph:
        return Hypergraph.from_edge_list(self.num_nodes, self.edges)

    def attack_spec(self) -> AttackSpec:
        return AttackSpec(kind=self.attack, params=self.cascade)

    def training_sample(self) -> TrainingSample:
        h = self.hypergraph()
        return TrainingSample(h, build_features(h, self.failure_order), self.label_r)


def label_record(
    h: Hypergraph,
    family: str,
    seed: int,
    attack: AttackSpec,
    quadrature: QuadratureConfig,
) -> SampleRecord:
    label, eval_count = label_hypergraph(h, attack, quadrature)
    return SampleRecord(
        family=family,
        seed=seed,
        num_nodes=h.num_nodes,
        edges=[list(e) for e in h.edges],
        attack=attack.kind,
        cascade=attack.params,
        failure_order=attack_order(h, attack),
        # quadrature rounding can step outside [0, 1] by an ulp
        label_r=min(max(label, 0.0), 1.0),
        eval_count=eval_count,
        label_epsilon=quadrature.epsilon,
        label_d_max=quadrature.d_max,
    )


def write_jsonl(path: str | Path, records: Iterable[SampleRecord]) -> int:
    count = 0
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(record.model_dump_json())
                fh.write("\n")
                count += 1
    except OSError as e:
        raise DataIoError(f"cannot write {path}: {e}") from e
    return count


def iter_jsonl(path: str | Path) -> Iterator[SampleRecord]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not UTF-8 text: {e}") from e
    except OSError as e:
        raise DataIoError(f"cannot read {path}: {e}") from e
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield SampleRecord.model_validate_json(line)
        except ValidationError as e:
            raise ParseError(f"{path}:{number}: {e}") from e


def read_jsonl(path: str | Path) -> list[SampleRecord]:
    return list(iter_jsonl(path))


def parallel_map(fn: Callable[..., R], items: Sequence[T], threads: int, *args: Any) -> list[R]:
    """Ordered map over ``items``; ``threads > 1`` uses a process pool."""
    extra = [repeat(a) for a in args]
    if threads <= 1 or len(items) <= 1:
        return list(map(fn, items, *extra))
    chunksize = max(1, len(items) // (threads * 4))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, *extra, chunksize=chunksize))


@dataclass(frozen=True)
class SampleTask:
    sample_index: int
    family: Family
    seed: int


def build_sample(task: SampleTask, cfg: PipelineConfig) -> SampleRecord:
    log = SampleLogger(task.family.value, task.seed, task.sample_index)
    h = generate(cfg.generator_config(task.family, task.seed))
    record = label_record(
        h, task.family.value, task.seed, cfg.attack_spec(), cfg.quadrature_config()
    )
    log.debug(
        "labelled %d nodes / %d edges: R=%.6f after %d simulations",
        h.num_nodes,
        h.num_edges,
        record.label_r,
        record.eval_count,
    )
    return record


def plan_splits(cfg: PipelineConfig) -> dict[str, list[SampleTask]]:
    """Sample tasks per output file name.

    Sample ``i`` of a file uses seed ``cfg.seed + i``; test samples continue
    the index after the training ones so the splits never share a seed.
    """
    if not cfg.families:
        raise InvalidConfig("at least one family is required")
    train_count = cfg.resolved_train_count
    plan: dict[str, list[SampleTask]] = {}
    if cfg.mode == "mixed":
        families = list(cfg.families)
        train_total = train_count * len(families)
        plan["mixed_train"] = [
            SampleTask(i, families[i % len(families)], cfg.seed + i) for i in range(train_total)
        ]
        plan["mixed_test"] = [
            SampleTask(train_total + j, families[j % len(families)], cfg.seed + train_total + j)
            for j in range(cfg.test_count)
        ]
        return plan
    for family in cfg.families:
        name = family.value
        plan[f"{name}_train"] = [
            SampleTask(i, family, cfg.seed + i) for i in range(train_count)
        ]
        plan[f"{name}_test"] = [
            SampleTask(train_count + j, family, cfg.seed + train_count + j)
            for j in range(cfg.test_count)
        ]
    return plan


def dataset_generate(cfg: PipelineConfig, out_dir: str | Path) -> dict[str, Path]:
    """Generate, label and write every split; returns split name to path."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataIoError(f"cannot create {out}: {e}") from e
    tracer = PipelineTracer("dataset")
    written: dict[str, Path] = {}
    for split, tasks in plan_splits(cfg).items():
        with tracer.span("dataset.split", {"split": split, "samples": len(tasks)}):
            records = parallel_map(build_sample, tasks, cfg.threads, cfg)
        path = out / f"{split}.jsonl"
        write_jsonl(path, records)
        written[split] = path
        logger.info("wrote %d samples to %s", len(records), path)
    return written


def _relabel(record: SampleRecord, attack: AttackSpec, quadrature: QuadratureConfig) -> SampleRecord:
    return label_record(record.hypergraph(), record.family, record.seed, attack, quadrature)


def relabel(
    records: Sequence[SampleRecord],
    attack: AttackSpec,
    quadrature: QuadratureConfig,
    threads: int = 1,
) -> list[SampleRecord]:
    """Recompute failure orders and labels of existing structures."""
    with PipelineTracer("label").span("dataset.relabel", {"samples": len(records)}):
        return parallel_map(_relabel, records, threads, attack, quadrature)


def load_training_samples(path: str | Path) -> list[TrainingSample]:
    try:
        return [record.training_sample() for record in iter_jsonl(path)]
    except HyperRobustError:
        raise
    except (ValueError, TypeError) as e:
        raise ParseError(f"{path}: {e}") from e
