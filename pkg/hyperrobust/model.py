"""Injective hypergraph isomorphism network surrogate.

Node and edge inputs are lifted by their own two-layer MLPs. Each layer then
updates every edge from its own state and the sum of its members' states,
and every node from its own state and the sum of its incident edges' *new*
states::

    h_e <- MLP_e((1 + eps_e) * h_e + sum(h_v for v in e))
    h_v <- MLP_v((1 + eps_v) * h_v + sum(h_e for e containing v))

The hypergraph embedding concatenates, for every layer, the sums of node
and edge states (node sums only with the node readout); a two-layer head maps
it to the robustness estimate.
``MeanAblation`` swaps both sums for means and pins the eps terms to zero.

Everything runs in float64 and gradients are accumulated by hand in reverse
order of the forward pass.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Literal, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from hyperrobust.cascade import check_order
from hyperrobust.errors import DataIoError, EmptyDataset, ParseError, ShapeMismatch
from hyperrobust.generators import make_rng
from hyperrobust.hypergraph import Hypergraph

logger = logging.getLogger(__name__)

NODE_FEATURES = ("hyperdegree", "cardinality", "failure_order")
EDGE_FEATURES = ("edge_cardinality",)
ABLATABLE = frozenset(NODE_FEATURES + EDGE_FEATURES + ("all",))
# drops the edge channel of the readout
READOUT_ABLATION = "edge_readout"
# edge input feature and edge readout channel together
HYPEREDGE_ABLATION = "hyperedge"
MODEL_ABLATIONS = ABLATABLE | {READOUT_ABLATION, HYPEREDGE_ABLATION}


class AggregationMode(str, Enum):
    INJECTIVE_SUM = "InjectiveSum"
    MEAN_ABLATION = "MeanAblation"


class Readout(str, Enum):
    DUAL = "dual"
    NODE = "node"


def split_ablation(names: Iterable[str]) -> tuple[tuple[str, ...], Readout]:
    """Feature names to zero and the readout left by a list of ablations."""
    features: set[str] = set()
    readout = Readout.DUAL
    for name in names:
        if name == READOUT_ABLATION:
            readout = Readout.NODE
        elif name == HYPEREDGE_ABLATION:
            readout = Readout.NODE
            features.add("edge_cardinality")
        else:
            features.add(name)
    _ablated_columns(features)
    return tuple(sorted(features)), readout


@dataclass
class FeatureSet:
    """Node rows ``[hyperdegree, cardinality, failure_order]``, edge rows ``[cardinality]``."""

    node_features: np.ndarray
    edge_features: np.ndarray

    @classmethod
    def constant(cls, h: Hypergraph, value: float = 1.0) -> FeatureSet:
        return cls(
            node_features=np.full((h.num_nodes, len(NODE_FEATURES)), value),
            edge_features=np.full((h.num_edges, len(EDGE_FEATURES)), value),
        )


def _ablated_columns(ablate: Iterable[str]) -> tuple[list[int], list[int]]:
    names = set(ablate)
    unknown = names - ABLATABLE
    if unknown:
        raise ValueError(f"unknown feature(s) to ablate: {sorted(unknown)}")
    if "all" in names:
        names = set(NODE_FEATURES + EDGE_FEATURES)
    node_cols = [i for i, name in enumerate(NODE_FEATURES) if name in names]
    edge_cols = [i for i, name in enumerate(EDGE_FEATURES) if name in names]
    return node_cols, edge_cols


def build_features(
    h: Hypergraph, order: Sequence[int], ablate: Iterable[str] = ()
) -> FeatureSet:
    """Normalized hyperdegree, mean incident cardinality and failure rank.

    Features named in ``ablate`` are zeroed.
    """
    order = check_order(h, order)
    n = h.num_nodes
    degrees = h.degrees.astype(np.float64)
    cards = h.cardinalities.astype(np.float64)
    max_degree = degrees.max(initial=0.0)
    max_card = cards.max(initial=0.0)

    k_tilde = degrees / max_degree if max_degree > 0 else np.zeros(n)
    c_tilde = np.zeros(n)
    if max_card > 0:
        incident = h.incidence @ cards
        has_edges = degrees > 0
        c_tilde[has_edges] = incident[has_edges] / degrees[has_edges] / max_card
    o_tilde = np.zeros(n)
    if n > 1:
        o_tilde[order] = np.arange(n, dtype=np.float64) / (n - 1)
    edge = (cards / max_card if max_card > 0 else cards)[:, None]

    node = np.column_stack([k_tilde, c_tilde, o_tilde])
    return ablate_features(FeatureSet(node_features=node, edge_features=edge), ablate)


def ablate_features(feats: FeatureSet, ablate: Iterable[str]) -> FeatureSet:
    """Copy of ``feats`` with the named feature columns zeroed."""
    node_cols, edge_cols = _ablated_columns(ablate)
    if not node_cols and not edge_cols:
        return feats
    node = feats.node_features.copy()
    edge = feats.edge_features.copy()
    node[:, node_cols] = 0.0
    edge[:, edge_cols] = 0.0
    return FeatureSet(node_features=node, edge_features=edge)


def _mlp_shapes(prefix: str, fan_in: int, hidden: int, fan_out: int) -> dict[str, tuple[int, ...]]:
    return {
        f"{prefix}.w1": (fan_in, hidden),
        f"{prefix}.b1": (hidden,),
        f"{prefix}.w2": (hidden, fan_out),
        f"{prefix}.b2": (fan_out,),
    }


def readout_width(num_layers: int, width: int, readout: Readout = Readout.DUAL) -> int:
    channels = 2 if Readout(readout) is Readout.DUAL else 1
    return channels * num_layers * width


def expected_shapes(
    num_layers: int,
    width: int,
    node_in: int = len(NODE_FEATURES),
    edge_in: int = len(EDGE_FEATURES),
    readout: Readout = Readout.DUAL,
) -> dict[str, tuple[int, ...]]:
    shapes = {
        **_mlp_shapes("init_node", node_in, width, width),
        **_mlp_shapes("init_edge", edge_in, width, width),
    }
    for layer in range(num_layers):
        shapes.update(_mlp_shapes(f"layer{layer}.edge", width, width, width))
        shapes.update(_mlp_shapes(f"layer{layer}.node", width, width, width))
        shapes[f"layer{layer}.eps_edge"] = ()
        shapes[f"layer{layer}.eps_node"] = ()
    shapes.update(_mlp_shapes("head", readout_width(num_layers, width, readout), width, 1))
    return shapes


@dataclass
class ModelParameters:
    """Weights keyed by name plus the architecture they belong to."""

    num_layers: int
    width: int
    aggregation_mode: AggregationMode
    seed: int
    weights: dict[str, np.ndarray]
    feature_ablation: tuple[str, ...] = ()
    readout: Readout = Readout.DUAL

    @classmethod
    def initialize(
        cls,
        num_layers: int = 3,
        width: int = 64,
        aggregation_mode: AggregationMode = AggregationMode.INJECTIVE_SUM,
        seed: int = 0,
        feature_ablation: Iterable[str] = (),
        readout: Readout = Readout.DUAL,
    ) -> ModelParameters:
        """He-normal weights, zero biases and zero eps scalars.

        The last head layer starts at zero, so an untrained model predicts
        ``head.b2`` whatever the hypergraph size. :func:`calibrate` sets the
        remaining scales from data.
        """
        if num_layers < 1 or width < 1:
            raise ValueError(f"need num_layers >= 1 and width >= 1, got {num_layers}, {width}")
        rng = make_rng(seed, attempt=1)
        weights: dict[str, np.ndarray] = {}
        shapes = expected_shapes(num_layers, width, readout=readout)
        for name, shape in shapes.items():
            if len(shape) == 2 and name != "head.w2":
                weights[name] = rng.normal(0.0, np.sqrt(2.0 / shape[0]), size=shape)
            else:
                weights[name] = np.zeros(shape, dtype=np.float64)
        ablation = tuple(sorted(set(feature_ablation)))
        _ablated_columns(ablation)
        return cls(
            num_layers,
            width,
            AggregationMode(aggregation_mode),
            seed,
            weights,
            ablation,
            Readout(readout),
        )

    @property
    def num_parameters(self) -> int:
        return int(sum(w.size for w in self.weights.values()))

    @property
    def embedding_size(self) -> int:
        return readout_width(self.num_layers, self.width, self.readout)

    def copy(self) -> ModelParameters:
        return ModelParameters(
            self.num_layers,
            self.width,
            self.aggregation_mode,
            self.seed,
            {k: v.copy() for k, v in self.weights.items()},
            self.feature_ablation,
            self.readout,
        )

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.weights.items()}

    def validate(self) -> None:
        expected = expected_shapes(self.num_layers, self.width, readout=self.readout)
        if expected.keys() != self.weights.keys():
            missing = sorted(expected.keys() - self.weights.keys())
            extra = sorted(self.weights.keys() - expected.keys())
            raise ShapeMismatch(f"weight names differ: missing={missing}, extra={extra}")
        for name, shape in expected.items():
            actual = self.weights[name].shape
            if actual != shape:
                raise ShapeMismatch(f"{name} has shape {actual}, expected {shape}")
            if not np.all(np.isfinite(self.weights[name])):
                raise ShapeMismatch(f"{name} holds non-finite values")


@dataclass
class _MlpCache:
    x: np.ndarray
    pre: np.ndarray
    hidden: np.ndarray


def _mlp(w: dict[str, np.ndarray], prefix: str, x: np.ndarray) -> tuple[np.ndarray, _MlpCache]:
    pre = x @ w[f"{prefix}.w1"] + w[f"{prefix}.b1"]
    hidden = np.maximum(pre, 0.0)
    return hidden @ w[f"{prefix}.w2"] + w[f"{prefix}.b2"], _MlpCache(x, pre, hidden)


def _mlp_backward(
    w: dict[str, np.ndarray],
    prefix: str,
    cache: _MlpCache,
    dy: np.ndarray,
    grads: dict[str, np.ndarray],
) -> np.ndarray:
    grads[f"{prefix}.w2"] += cache.hidden.T @ dy
    grads[f"{prefix}.b2"] += dy.sum(axis=0)
    dpre = (dy @ w[f"{prefix}.w2"].T) * (cache.pre > 0.0)
    grads[f"{prefix}.w1"] += cache.x.T @ dpre
    grads[f"{prefix}.b1"] += dpre.sum(axis=0)
    return dpre @ w[f"{prefix}.w1"].T


@dataclass
class _LayerCache:
    hv_in: np.ndarray
    he_in: np.ndarray
    eps_edge: float
    eps_node: float
    edge: _MlpCache
    node: _MlpCache


@dataclass
class ForwardCache:
    incidence: np.ndarray
    edge_scale: np.ndarray | None
    node_scale: np.ndarray | None
    init_node: _MlpCache
    init_edge: _MlpCache
    layers: list[_LayerCache] = field(default_factory=list)
    head: _MlpCache | None = None

    def mlp(self, prefix: str) -> _MlpCache:
        """Cache of the MLP named ``prefix`` (``init_node``, ``layer0.edge``, ``head``...)."""
        if prefix == "init_node":
            return self.init_node
        if prefix == "init_edge":
            return self.init_edge
        if prefix == "head" and self.head is not None:
            return self.head
        layer, _, side = prefix.partition(".")
        if layer.startswith("layer") and side in ("edge", "node"):
            index = int(layer[len("layer") :])
            if 0 <= index < len(self.layers):
                return getattr(self.layers[index], side)
        raise KeyError(prefix)

    def relu_pattern(self) -> np.ndarray:
        """Flattened rectifier on/off pattern, to spot kinks in gradient checks."""
        caches = [self.init_node, self.init_edge]
        for layer in self.layers:
            caches += [layer.edge, layer.node]
        if self.head is not None:
            caches.append(self.head)
        return np.concatenate([(c.pre > 0.0).ravel() for c in caches])


def aggregation_scales(
    h: Hypergraph, mode: AggregationMode
) -> tuple[np.ndarray | None, np.ndarray | None]:
    """Per-edge and per-node divisors turning sums into means, or None for sums."""
    if mode is AggregationMode.INJECTIVE_SUM:
        return None, None
    return (
        1.0 / np.maximum(h.cardinalities, 1)[:, None],
        1.0 / np.maximum(h.degrees, 1)[:, None],
    )


def node_to_edge_messages(
    h: Hypergraph, node_states: np.ndarray, mode: AggregationMode
) -> np.ndarray:
    """Sum (or mean) of member states for every edge."""
    messages = h.incidence.T @ node_states
    edge_scale, _ = aggregation_scales(h, mode)
    return messages if edge_scale is None else messages * edge_scale


def edge_to_node_messages(
    h: Hypergraph, edge_states: np.ndarray, mode: AggregationMode
) -> np.ndarray:
    """Sum (or mean) of incident edge states for every node."""
    messages = h.incidence @ edge_states
    _, node_scale = aggregation_scales(h, mode)
    return messages if node_scale is None else messages * node_scale


def _check_inputs(h: Hypergraph, feats: FeatureSet, params: ModelParameters) -> None:
    shapes = expected_shapes(params.num_layers, params.width)
    node_in = shapes["init_node.w1"][0]
    edge_in = shapes["init_edge.w1"][0]
    if feats.node_features.shape != (h.num_nodes, node_in):
        raise ShapeMismatch(
            f"node features have shape {feats.node_features.shape}, "
            f"expected {(h.num_nodes, node_in)}"
        )
    if feats.edge_features.shape != (h.num_edges, edge_in):
        raise ShapeMismatch(
            f"edge features have shape {feats.edge_features.shape}, "
            f"expected {(h.num_edges, edge_in)}"
        )


def forward_with_cache(
    h: Hypergraph, feats: FeatureSet, params: ModelParameters
) -> tuple[float, np.ndarray, ForwardCache]:
    _check_inputs(h, feats, params)
    w = params.weights
    incidence = h.incidence
    mean = params.aggregation_mode is AggregationMode.MEAN_ABLATION
    edge_scale, node_scale = aggregation_scales(h, params.aggregation_mode)

    hv, init_node = _mlp(w, "init_node", feats.node_features.astype(np.float64))
    he, init_edge = _mlp(w, "init_edge", feats.edge_features.astype(np.float64))
    cache = ForwardCache(incidence, edge_scale, node_scale, init_node, init_edge)
    readout: list[np.ndarray] = []
    for layer in range(params.num_layers):
        prefix = f"layer{layer}"
        eps_edge = 0.0 if mean else float(w[f"{prefix}.eps_edge"])
        eps_node = 0.0 if mean else float(w[f"{prefix}.eps_node"])

        to_edges = node_to_edge_messages(h, hv, params.aggregation_mode)
        he_new, edge_cache = _mlp(w, f"{prefix}.edge", (1.0 + eps_edge) * he + to_edges)

        to_nodes = edge_to_node_messages(h, he_new, params.aggregation_mode)
        hv_new, node_cache = _mlp(w, f"{prefix}.node", (1.0 + eps_node) * hv + to_nodes)

        cache.layers.append(_LayerCache(hv, he, eps_edge, eps_node, edge_cache, node_cache))
        hv, he = hv_new, he_new
        readout.append(hv.sum(axis=0))
        if params.readout is Readout.DUAL:
            readout.append(he.sum(axis=0))

    embedding = np.concatenate(readout)
    out, cache.head = _mlp(w, "head", embedding[None, :])
    return float(out[0, 0]), embedding, cache


def forward(
    h: Hypergraph, feats: FeatureSet, params: ModelParameters
) -> tuple[float, np.ndarray]:
    """Unclamped prediction and the jumping-knowledge embedding."""
    prediction, embedding, _ = forward_with_cache(h, feats, params)
    return prediction, embedding


def backward(
    params: ModelParameters,
    cache: ForwardCache,
    d_prediction: float,
    grads: dict[str, np.ndarray],
) -> None:
    """Accumulate ``d_prediction * d(prediction)/d(weights)`` into ``grads``."""
    w = params.weights
    width = params.width
    mean = params.aggregation_mode is AggregationMode.MEAN_ABLATION
    dual = params.readout is Readout.DUAL
    block = 2 * width if dual else width
    incidence = cache.incidence
    assert cache.head is not None
    d_embedding = _mlp_backward(w, "head", cache.head, np.array([[d_prediction]]), grads)[0]

    d_hv = np.zeros((incidence.shape[0], width))
    d_he = np.zeros((incidence.shape[1], width))
    for layer in reversed(range(params.num_layers)):
        lc = cache.layers[layer]
        prefix = f"layer{layer}"
        offset = layer * block
        d_hv_out = d_hv + d_embedding[offset : offset + width]
        d_he_out = (d_he + d_embedding[offset + width : offset + 2 * width]) if dual else d_he

        d_zv = _mlp_backward(w, f"{prefix}.node", lc.node, d_hv_out, grads)
        d_hv_in = (1.0 + lc.eps_node) * d_zv
        d_to_nodes = d_zv if cache.node_scale is None else d_zv * cache.node_scale
        d_he_out = d_he_out + incidence.T @ d_to_nodes

        d_ze = _mlp_backward(w, f"{prefix}.edge", lc.edge, d_he_out, grads)
        d_he_in = (1.0 + lc.eps_edge) * d_ze
        d_to_edges = d_ze if cache.edge_scale is None else d_ze * cache.edge_scale
        d_hv_in = d_hv_in + incidence @ d_to_edges

        if not mean:
            grads[f"{prefix}.eps_node"] += np.sum(d_zv * lc.hv_in)
            grads[f"{prefix}.eps_edge"] += np.sum(d_ze * lc.he_in)
        d_hv, d_he = d_hv_in, d_he_in

    _mlp_backward(w, "init_node", cache.init_node, d_hv, grads)
    _mlp_backward(w, "init_edge", cache.init_edge, d_he, grads)


@dataclass
class TrainingSample:
    hypergraph: Hypergraph
    features: FeatureSet
    label: float


def loss_and_grad(
    batch: Sequence[TrainingSample], params: ModelParameters
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean squared error of unclamped predictions and its gradient."""
    if not batch:
        raise EmptyDataset("loss_and_grad needs a non-empty batch")
    grads = params.zeros_like()
    squared = 0.0
    scale = 2.0 / len(batch)
    for sample in batch:
        prediction, _, cache = forward_with_cache(sample.hypergraph, sample.features, params)
        error = prediction - sample.label
        squared += error * error
        backward(params, cache, scale * error, grads)
    return squared / len(batch), grads


def predict(h: Hypergraph, order: Sequence[int], params: ModelParameters) -> float:
    """Robustness estimate clamped to ``[0, 1]``."""
    feats = build_features(h, order, params.feature_ablation)
    prediction, _ = forward(h, feats, params)
    return min(max(prediction, 0.0), 1.0)


def _mlp_caches(
    samples: Sequence[TrainingSample], params: ModelParameters, prefix: str
) -> list[_MlpCache]:
    caches = [forward_with_cache(s.hypergraph, s.features, params)[2] for s in samples]
    return [cache.mlp(prefix) for cache in caches]


def _rescale(weight: np.ndarray, values: np.ndarray, target: float) -> None:
    rms = float(np.sqrt(np.mean(values * values))) if values.size else 0.0
    if rms > 0.0 and np.isfinite(rms):
        weight *= target / rms


def calibrate(params: ModelParameters, samples: Sequence[TrainingSample]) -> None:
    """Set the scales of freshly initialized ``params`` from ``samples``, in place.

    Walking the MLPs in forward order, each first layer is scaled so the
    MLP's output rows have RMS ``1 / rows``, ``rows`` being the mean node or
    edge count of the samples. Summed readouts then start near unit scale for
    any hypergraph size. The head's first layer is scaled to unit RMS
    pre-activations and its output bias set to the mean label.
    """
    if not samples:
        return
    w = params.weights
    node_rows = float(np.mean([s.hypergraph.num_nodes for s in samples]))
    edge_rows = float(np.mean([s.hypergraph.num_edges for s in samples]))
    targets = [("init_node", node_rows), ("init_edge", edge_rows)]
    for layer in range(params.num_layers):
        targets += [(f"layer{layer}.edge", edge_rows), (f"layer{layer}.node", node_rows)]
    for prefix, rows in targets:
        if rows <= 0.0:
            continue
        outputs = [
            c.hidden @ w[f"{prefix}.w2"] + w[f"{prefix}.b2"]
            for c in _mlp_caches(samples, params, prefix)
        ]
        _rescale(w[f"{prefix}.w1"], np.concatenate(outputs), 1.0 / rows)
    pre = np.concatenate([c.pre for c in _mlp_caches(samples, params, "head")])
    _rescale(w["head.w1"], pre, 1.0)
    w["head.b2"][...] = float(np.mean([s.label for s in samples]))
    logger.debug("calibrated initial scales on %d samples", len(samples))


MODEL_FORMAT = "hyperrobust-model"


class ModelDocument(BaseModel):
    """On-disk JSON layout of :class:`ModelParameters`."""

    format: Literal["hyperrobust-model"] = MODEL_FORMAT
    format_version: int = 1
    num_layers: int
    width: int
    aggregation_mode: AggregationMode
    seed: int
    feature_ablation: list[str] = []
    readout: Readout = Readout.DUAL
    num_parameters: int
    weights: dict[str, Any]


def save_model(params: ModelParameters, path: str | Path) -> None:
    document = ModelDocument(
        num_layers=params.num_layers,
        width=params.width,
        aggregation_mode=params.aggregation_mode,
        seed=params.seed,
        feature_ablation=list(params.feature_ablation),
        readout=params.readout,
        num_parameters=params.num_parameters,
        weights={name: params.weights[name].tolist() for name in sorted(params.weights)},
    )
    try:
        Path(path).write_text(document.model_dump_json(indent=1) + "\n")
    except OSError as e:
        raise DataIoError(f"cannot write model to {path}: {e}") from e
    logger.info("saved model with %d parameters to %s", params.num_parameters, path)


def load_model(path: str | Path) -> ModelParameters:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not UTF-8 text: {e}") from e
    except OSError as e:
        raise DataIoError(f"cannot read model {path}: {e}") from e
    try:
        document = ModelDocument.model_validate_json(text)
    except ValidationError as e:
        raise ParseError(f"{path} is not a model document: {e}") from e
    try:
        weights = {
            name: np.asarray(value, dtype=np.float64)
            for name, value in document.weights.items()
        }
    except (TypeError, ValueError) as e:
        raise ShapeMismatch(f"{path} holds ragged or non-numeric weights: {e}") from e
    params = ModelParameters(
        num_layers=document.num_layers,
        width=document.width,
        aggregation_mode=document.aggregation_mode,
        seed=document.seed,
        weights=weights,
        feature_ablation=tuple(document.feature_ablation),
        readout=document.readout,
    )
    params.validate()
    return params
