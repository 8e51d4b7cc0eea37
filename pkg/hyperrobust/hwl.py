"""Hypergraph Weisfeiler-Lehman colour refinement.

Each iteration relabels every edge from its previous label and the sorted
multiset of its members' labels, then relabels every node from its previous
label and the sorted multiset of its incident edges' new labels. Signatures
are interned into a dictionary, so equal labels mean exactly equal
signatures. New signatures of an iteration are numbered in sorted order,
which makes labels independent of how nodes and edges are numbered.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Sequence

from hyperrobust.errors import OutOfRangeIteration
from hyperrobust.hypergraph import Hypergraph

logger = logging.getLogger(__name__)

Signature = tuple[Hashable, ...]


class Verdict(str, Enum):
    NON_ISOMORPHIC = "NonIsomorphic"
    POSSIBLY_ISOMORPHIC = "PossiblyIsomorphic"


class LabelInterner:
    """Injective map from signatures to consecutive integers.

    Label ``0`` is the constant initial label.
    """

    def __init__(self) -> None:
        self.table: dict[Signature, int] = {}

    def __len__(self) -> int:
        return len(self.table)

    def intern_all(self, signatures: Sequence[Signature]) -> list[int]:
        for signature in sorted(set(signatures) - self.table.keys(), key=repr):
            self.table[signature] = len(self.table) + 1
        return [self.table[s] for s in signatures]


@dataclass
class WLColoring:
    """Per-iteration node and edge labels of one refinement run."""

    node_labels: list[list[int]] = field(default_factory=list)
    edge_labels: list[list[int]] = field(default_factory=list)
    intern_table: dict[Signature, int] = field(default_factory=dict)
    stable: bool = False

    @property
    def num_iterations(self) -> int:
        return len(self.node_labels)


@dataclass(frozen=True)
class WLHistogram:
    """Sorted ``(label, count)`` pairs for nodes and for edges."""

    nodes: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...]

    def canonical_bytes(self) -> bytes:
        return json.dumps(
            {"nodes": self.nodes, "edges": self.edges}, separators=(",", ":")
        ).encode()

    @property
    def sizes(self) -> tuple[int, int]:
        return len(self.nodes), len(self.edges)


def _initial_labels(
    h: Hypergraph, interner: LabelInterner, initial: Sequence[Hashable] | None
) -> tuple[list[int], list[int]]:
    if initial is None:
        nodes = [0] * h.num_nodes
    else:
        if len(initial) != h.num_nodes:
            raise ValueError(
                f"expected {h.num_nodes} initial labels, got {len(initial)}"
            )
        nodes = interner.intern_all([("init", x) for x in initial])
    return nodes, [0] * h.num_edges


def _refine_step(
    graphs: Sequence[Hypergraph],
    states: Sequence[tuple[list[int], list[int]]],
    interner: LabelInterner,
) -> list[tuple[list[int], list[int]]]:
    """One edge-then-node update for several hypergraphs sharing ``interner``."""
    edge_sigs = [
        [
            ("e", edge_labels[e], tuple(sorted(node_labels[v] for v in edge)))
            for e, edge in enumerate(h.edges)
        ]
        for h, (node_labels, edge_labels) in zip(graphs, states)
    ]
    flat = interner.intern_all([s for sigs in edge_sigs for s in sigs])
    new_edges: list[list[int]] = []
    start = 0
    for h in graphs:
        new_edges.append(flat[start : start + h.num_edges])
        start += h.num_edges

    node_sigs = [
        [
            ("v", node_labels[v], tuple(sorted(edges_now[e] for e in h.node_edges[v])))
            for v in range(h.num_nodes)
        ]
        for h, (node_labels, _), edges_now in zip(graphs, states, new_edges)
    ]
    flat = interner.intern_all([s for sigs in node_sigs for s in sigs])
    result: list[tuple[list[int], list[int]]] = []
    start = 0
    for h, edges_now in zip(graphs, new_edges):
        result.append((flat[start : start + h.num_nodes], edges_now))
        start += h.num_nodes
    return result


def _class_count(states: Sequence[tuple[list[int], list[int]]]) -> tuple[int, int]:
    nodes = {x for node_labels, _ in states for x in node_labels}
    edges = {x for _, edge_labels in states for x in edge_labels}
    return len(nodes), len(edges)


def hwl_refine(
    h: Hypergraph,
    max_iters: int | None = None,
    initial_labels: Sequence[Hashable] | None = None,
) -> WLColoring:
    """Refine until the node/edge partition stops splitting or ``max_iters``."""
    limit = max(1, h.num_nodes + h.num_edges) if max_iters is None else max_iters
    if limit < 1:
        raise ValueError(f"max_iters must be >= 1, got {limit}")
    interner = LabelInterner()
    state = _initial_labels(h, interner, initial_labels)
    coloring = WLColoring(node_labels=[state[0]], edge_labels=[state[1]])
    classes = _class_count([state])
    for _ in range(limit):
        (state,) = _refine_step([h], [state], interner)
        coloring.node_labels.append(state[0])
        coloring.edge_labels.append(state[1])
        refined = _class_count([state])
        if refined == classes:
            coloring.stable = True
            break
        classes = refined
    coloring.intern_table = dict(interner.table)
    logger.debug(
        "refinement ran %d iterations (stable=%s)", coloring.num_iterations - 1, coloring.stable
    )
    return coloring


def _histogram(node_labels: Sequence[int], edge_labels: Sequence[int]) -> WLHistogram:
    return WLHistogram(
        nodes=tuple(sorted(Counter(node_labels).items())),
        edges=tuple(sorted(Counter(edge_labels).items())),
    )


def histogram(coloring: WLColoring, iteration: int) -> WLHistogram:
    if not 0 <= iteration < coloring.num_iterations:
        raise OutOfRangeIteration(
            f"iteration {iteration} not in 0..{coloring.num_iterations - 1}"
        )
    return _histogram(coloring.node_labels[iteration], coloring.edge_labels[iteration])


@dataclass
class WLComparison:
    verdict: Verdict
    iterations: int
    # per-iteration (node classes, edge classes) for each hypergraph
    sizes: list[tuple[tuple[int, int], tuple[int, int]]] = field(default_factory=list)
    reason: str = ""


def hwl_compare(h1: Hypergraph, h2: Hypergraph) -> WLComparison:
    """Lockstep refinement of both hypergraphs with one shared intern table."""
    if h1.num_nodes != h2.num_nodes:
        return WLComparison(Verdict.NON_ISOMORPHIC, 0, reason="node counts differ")
    if h1.num_edges != h2.num_edges:
        return WLComparison(Verdict.NON_ISOMORPHIC, 0, reason="edge counts differ")
    interner = LabelInterner()
    graphs = [h1, h2]
    states = [_initial_labels(h, interner, None) for h in graphs]
    comparison = WLComparison(Verdict.POSSIBLY_ISOMORPHIC, 0)
    classes = _class_count(states)
    for iteration in range(1, h1.num_nodes + h1.num_edges + 1):
        states = _refine_step(graphs, states, interner)
        first, second = (_histogram(*s) for s in states)
        comparison.iterations = iteration
        comparison.sizes.append((first.sizes, second.sizes))
        if first != second:
            comparison.verdict = Verdict.NON_ISOMORPHIC
            comparison.reason = f"histograms differ at iteration {iteration}"
            return comparison
        refined = _class_count(states)
        if refined == classes:
            break
        classes = refined
    comparison.reason = "partitions stabilised with equal histograms"
    return comparison


def hwl_distinguish(h1: Hypergraph, h2: Hypergraph) -> Verdict:
    return hwl_compare(h1, h2).verdict
