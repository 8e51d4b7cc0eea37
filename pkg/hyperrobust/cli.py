"""Command-line interface for hyperrobust.

Exit codes: 0 success, 1 usage error, 2 data error (bad input files,
invalid configuration, I/O failures).
"""

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click
from pydantic import BaseModel, TypeAdapter, ValidationError

from hyperrobust.cascade import AttackKind
from hyperrobust.config import load_config
from hyperrobust.dataset import (
    dataset_generate,
    load_training_samples,
    read_jsonl,
    relabel,
    write_jsonl,
)
from hyperrobust.errors import HyperRobustError, ParseError
from hyperrobust.evaluation import bench as run_bench
from hyperrobust.evaluation import evaluate
from hyperrobust.generators import Family
from hyperrobust.hwl import hwl_compare
from hyperrobust.hypergraph import Hypergraph
from hyperrobust.model import (
    MODEL_ABLATIONS,
    AggregationMode,
    Readout,
    load_model,
    save_model,
    split_ablation,
)
from hyperrobust.model import predict as predict_one
from hyperrobust.training import EpochRecord
from hyperrobust.training import train as run_training

logger = logging.getLogger(__name__)

SEED = click.IntRange(0, 2**64 - 1)

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


class DataError(click.ClickException):
    exit_code = 2


class CommandGroup(click.Group):
    """Group whose usage errors exit with status 1."""

    def make_context(self, info_name, args, parent=None, **extra):  # type: ignore[no-untyped-def]
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = 1
            raise

    def invoke(self, ctx):  # type: ignore[no-untyped-def]
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = 1
            raise


def data_errors(fn: Callable[..., Any]) -> Callable[..., Any]:
    """Report library, validation and OS errors as exit status 2."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except (HyperRobustError, ValidationError, OSError) as e:
            raise DataError(str(e)) from e

    return wrapper


def config_options(fn: Callable[..., Any]) -> Callable[..., Any]:
    """Flags shared by the commands that generate or label samples."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(dir_okay=False),
            help="hyperrobust.toml to load",
        ),
        click.option("--seed", type=SEED, help="Base seed"),
        click.option(
            "--attack",
            type=click.Choice([k.value for k in AttackKind]),
            help="Attack kind",
        ),
        click.option("--alpha", type=float, help="Capacity ratio of dynamic attacks"),
        click.option("--beta", type=float, help="Load index of dynamic attacks"),
        click.option("--epsilon", type=float, help="Quadrature tolerance"),
        click.option("--threads", type=click.IntRange(min=1), help="Worker processes"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


class HypergraphDocument(BaseModel):
    num_nodes: int
    edges: list[list[int]]


def load_hypergraph(path: str, index: int) -> Hypergraph:
    """A hypergraph from a ``.jsonl`` dataset (record ``index``) or a JSON document."""
    if path.endswith(".jsonl"):
        records = read_jsonl(path)
        if not 0 <= index < len(records):
            raise ParseError(f"{path} has {len(records)} records, no index {index}")
        return records[index].hypergraph()
    try:
        document = HypergraphDocument.model_validate_json(
            Path(path).read_text(encoding="utf-8")
        )
    except (ValidationError, UnicodeDecodeError) as e:
        raise ParseError(f"{path} is not a hypergraph document: {e}") from e
    return Hypergraph.from_edge_list(document.num_nodes, document.edges)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        click.echo(text)
    else:
        Path(out).write_text(text + "\n")


# ---------------------------------------------------------------------------
# Click CLI
# ---------------------------------------------------------------------------


@click.group(cls=CommandGroup)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="WARNING",
    show_default=True,
)
def cli(log_level: str) -> None:
    """hyperrobust - hypergraph robustness labels and surrogate models"""
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


# ---- Datasets ---------------------------------------------------------------


@cli.command("gen")
@config_options
@click.option(
    "--out",
    type=click.Path(file_okay=False),
    default=".",
    show_default=True,
    help="Output directory",
)
@click.option(
    "-f",
    "--family",
    "families",
    multiple=True,
    type=click.Choice([f.value for f in Family]),
)
@click.option("--mode", type=click.Choice(["homogeneous", "mixed"]))
@click.option("-n", "--num-nodes", type=click.IntRange(min=1))
@click.option("--train-count", type=click.IntRange(min=0))
@click.option("--test-count", type=click.IntRange(min=0))
@click.option("--connectivity", type=click.Choice(["retry", "bridge"]))
@data_errors
def gen(
    config_path,
    seed,
    attack,
    alpha,
    beta,
    epsilon,
    threads,
    out,
    families,
    mode,
    num_nodes,
    train_count,
    test_count,
    connectivity,
):
    """Generate and label train/test JSONL datasets."""
    cfg = load_config(
        config_path,
        seed=seed,
        attack=attack,
        alpha=alpha,
        beta=beta,
        epsilon=epsilon,
        threads=threads,
        families=list(families) or None,
        mode=mode,
        num_nodes=num_nodes,
        train_count=train_count,
        test_count=test_count,
        connectivity=connectivity,
    )
    written = dataset_generate(cfg, out)
    for split, path in written.items():
        click.echo(f"{split}: {path}")


@cli.command("label")
@config_options
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--out", type=click.Path(dir_okay=False), required=True, help="Relabelled JSONL"
)
@data_errors
def label(config_path, seed, attack, alpha, beta, epsilon, threads, dataset, out):
    """Recompute failure orders and labels of an existing dataset."""
    cfg = load_config(
        config_path,
        seed=seed,
        attack=attack,
        alpha=alpha,
        beta=beta,
        epsilon=epsilon,
        threads=threads,
    )
    records = relabel(
        read_jsonl(dataset), cfg.attack_spec(), cfg.quadrature_config(), cfg.threads
    )
    count = write_jsonl(out, records)
    click.echo(f"relabelled {count} samples: {out}")


# ---- Models -----------------------------------------------------------------


@cli.command("train")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--seed", type=SEED)
@click.option(
    "--out", type=click.Path(dir_okay=False), default="model.json", show_default=True
)
@click.option("--epochs", type=click.IntRange(min=1))
@click.option("--batch-size", type=click.IntRange(min=1))
@click.option("--layers", "num_layers", type=click.IntRange(min=1))
@click.option("--width", type=click.IntRange(min=1))
@click.option("--lr", "eta_max", type=float, help="Peak learning rate")
@click.option(
    "--aggregation",
    "aggregation_mode",
    type=click.Choice([m.value for m in AggregationMode]),
)
@click.option("--schedule", type=click.Choice(["cosine", "constant"]))
@click.option(
    "--validation-fraction", type=click.FloatRange(0.0, 1.0, max_open=True)
)
@click.option(
    "--ablate",
    multiple=True,
    type=click.Choice(sorted(MODEL_ABLATIONS)),
    help="Zero a feature or drop the edge readout channel",
)
@click.option(
    "--history", type=click.Path(dir_okay=False), help="Write per-epoch losses as JSON"
)
@data_errors
def train(
    dataset,
    config_path,
    seed,
    out,
    epochs,
    batch_size,
    num_layers,
    width,
    eta_max,
    aggregation_mode,
    schedule,
    validation_fraction,
    ablate,
    history,
):
    """Train a surrogate model on a labelled JSONL dataset."""
    features, readout = split_ablation(ablate)
    cfg = load_config(
        config_path,
        seed=seed,
        epochs=epochs,
        batch_size=batch_size,
        num_layers=num_layers,
        width=width,
        eta_max=eta_max,
        aggregation_mode=aggregation_mode,
        schedule=schedule,
        validation_fraction=validation_fraction,
        feature_ablation=list(features) or None,
        readout=None if readout is Readout.DUAL else readout.value,
    )
    params, records = run_training(load_training_samples(dataset), cfg.train_config())
    save_model(params, out)
    if history is not None:
        adapter = TypeAdapter(list[EpochRecord])
        Path(history).write_bytes(adapter.dump_json(records, indent=1))
    click.echo(f"final loss {records[-1].loss:.6g}; model: {out}")


@cli.command("predict")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--out", type=click.Path(dir_okay=False), help="Write predictions instead of printing"
)
@data_errors
def predict(model, dataset, out):
    """Predict the robustness of every hypergraph in a JSONL dataset."""
    params = load_model(model)
    lines = []
    for index, record in enumerate(read_jsonl(dataset)):
        value = predict_one(record.hypergraph(), record.failure_order, params)
        row = {
            "index": index,
            "family": record.family,
            "seed": record.seed,
            "prediction": value,
        }
        lines.append(json.dumps(row))
    _emit("\n".join(lines), out)


@cli.command("eval")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--train",
    "train_path",
    type=click.Path(exists=True, dir_okay=False),
    help="Training set for the mean-label baseline",
)
@click.option("--out", type=click.Path(dir_okay=False), help="Write the JSON report here")
@data_errors
def eval_command(model, dataset, train_path, out):
    """Mean absolute error ± std of a model on a test dataset."""
    report = evaluate(model, dataset, train_path)
    click.echo(report.summary(), err=out is None)
    _emit(report.model_dump_json(indent=2), out)


@cli.command("bench")
@click.argument("model", type=click.Path(exists=True, dir_okay=False))
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--limit", type=click.IntRange(min=1), help="Only time the first N samples")
@data_errors
def bench(model, dataset, limit):
    """Time labelling against surrogate prediction."""
    report = run_bench(read_jsonl(dataset), load_model(model), limit)
    click.echo(report.model_dump_json(indent=2))


# ---- Expressiveness -----------------------------------------------------------


@cli.command("wl")
@click.argument("first", type=click.Path(exists=True, dir_okay=False))
@click.argument("second", type=click.Path(exists=True, dir_okay=False))
@click.option("--index-a", default=0, show_default=True, help="Record of a JSONL FIRST")
@click.option("--index-b", default=0, show_default=True, help="Record of a JSONL SECOND")
@data_errors
def wl(first, second, index_a, index_b):
    """Compare two hypergraphs with Weisfeiler-Lehman refinement."""
    comparison = hwl_compare(
        load_hypergraph(first, index_a), load_hypergraph(second, index_b)
    )
    click.echo(f"verdict: {comparison.verdict.value}")
    click.echo(f"reason: {comparison.reason}")
    header = ("Iteration", "Nodes A", "Edges A", "Nodes B", "Edges B")
    click.echo(f"{header[0]:<10} " + " ".join(f"{h:>8}" for h in header[1:]))
    for iteration, ((na, ea), (nb, eb)) in enumerate(comparison.sizes, start=1):
        click.echo(f"{iteration:<10} {na:>8} {ea:>8} {nb:>8} {eb:>8}")


def main(argv: Optional[list[str]] = None) -> None:
    """Console-script entry point."""
    cli.main(args=argv, prog_name="hyperrobust")


if __name__ == "__main__":
    main(sys.argv[1:])
