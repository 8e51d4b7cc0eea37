"""Hypergraph incidence structure, activity masks and connectivity.

A :class:`Hypergraph` is immutable: node ids are ``0..num_nodes-1`` and every
hyperedge is stored as a strictly ascending tuple of at least two ids. Edge
order is preserved and duplicate edges are allowed.

Connectivity runs through *alive* hyperedges only. An :class:`ActivityMask`
records which nodes and edges are alive; :func:`recompute_edge_liveness`
enforces the rule that an edge needs two alive members and
:func:`lcc_fraction` measures the largest connected component against the
original node count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from hyperrobust.errors import (
    EdgeTooSmall,
    NotABijection,
    OutOfRangeId,
    OutOfRangeIndex,
)


@dataclass(frozen=True)
class Hypergraph:
    """Immutable node/hyperedge incidence structure."""

    num_nodes: int
    edges: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edge_list(
        cls, num_nodes: int, raw_edges: Iterable[Iterable[int]]
    ) -> Hypergraph:
        """Validate and canonicalize a raw edge list.

        Ids inside an edge are deduplicated and sorted; the order of edges is
        kept as given.
        """
        if num_nodes < 0:
            raise ValueError(f"num_nodes must be >= 0, got {num_nodes}")
        edges: list[tuple[int, ...]] = []
        for index, raw in enumerate(raw_edges):
            members = sorted({int(v) for v in raw})
            for v in members:
                if v < 0 or v >= num_nodes:
                    raise OutOfRangeId(
                        f"edge {index} references node {v}, "
                        f"valid ids are 0..{num_nodes - 1}"
                    )
            if len(members) < 2:
                raise EdgeTooSmall(
                    f"edge {index} has {len(members)} distinct member(s), need >= 2"
                )
            edges.append(tuple(members))
        return cls(num_nodes=num_nodes, edges=tuple(edges))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Hyperdegree of every node (multiset semantics)."""
        counts = np.zeros(self.num_nodes, dtype=np.int64)
        for edge in self.edges:
            counts[list(edge)] += 1
        return counts

    @cached_property
    def cardinalities(self) -> np.ndarray:
        return np.array([len(e) for e in self.edges], dtype=np.int64)

    @cached_property
    def node_edges(self) -> tuple[tuple[int, ...], ...]:
        """Incident edge indices per node, ascending."""
        incident: list[list[int]] = [[] for _ in range(self.num_nodes)]
        for index, edge in enumerate(self.edges):
            for v in edge:
                incident[v].append(index)
        return tuple(tuple(x) for x in incident)

    @cached_property
    def incidence_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened incidence as parallel (node, edge) index arrays."""
        nodes = np.fromiter(
            (v for edge in self.edges for v in edge), dtype=np.int64
        )
        edge_ids = np.repeat(np.arange(self.num_edges, dtype=np.int64), self.cardinalities)
        return nodes, edge_ids

    @cached_property
    def incidence(self) -> np.ndarray:
        """Dense ``N x M`` incidence matrix in double precision."""
        matrix = np.zeros((self.num_nodes, self.num_edges), dtype=np.float64)
        nodes, edge_ids = self.incidence_pairs
        # duplicate node ids cannot occur inside one edge
        matrix[nodes, edge_ids] = 1.0
        return matrix

    def hyperdegree(self, v: int) -> int:
        if v < 0 or v >= self.num_nodes:
            raise OutOfRangeId(f"node {v} out of range 0..{self.num_nodes - 1}")
        return int(self.degrees[v])

    def cardinality(self, e: int) -> int:
        if e < 0 or e >= self.num_edges:
            raise OutOfRangeIndex(
                f"edge index {e} out of range 0..{self.num_edges - 1}"
            )
        return len(self.edges[e])

    def permute(self, perm: Sequence[int]) -> Hypergraph:
        """Relabel node ``v`` as ``perm[v]``; edge order is preserved."""
        mapping = check_bijection(perm, self.num_nodes)
        return Hypergraph(
            num_nodes=self.num_nodes,
            edges=tuple(tuple(sorted(mapping[v] for v in e)) for e in self.edges),
        )

    def intact_mask(self) -> ActivityMask:
        return ActivityMask.intact(self)

    def is_connected(self) -> bool:
        return lcc_fraction(self, self.intact_mask()) == 1.0


def from_edge_list(num_nodes: int, raw_edges: Iterable[Iterable[int]]) -> Hypergraph:
    return Hypergraph.from_edge_list(num_nodes, raw_edges)


def check_bijection(perm: Sequence[int], n: int) -> list[int]:
    mapping = [int(x) for x in perm]
    if len(mapping) != n or sorted(mapping) != list(range(n)):
        raise NotABijection(f"expected a permutation of 0..{n - 1}, got {mapping!r}")
    return mapping


@dataclass
class ActivityMask:
    """Alive flags for nodes and edges plus the latched-failure record.

    ``edge_latched`` marks edges a cascade has force-failed; they stay dead
    regardless of how many members remain alive.
    """

    node_alive: np.ndarray
    edge_alive: np.ndarray
    edge_latched: np.ndarray

    @classmethod
    def intact(cls, h: Hypergraph) -> ActivityMask:
        return cls(
            node_alive=np.ones(h.num_nodes, dtype=bool),
            edge_alive=np.ones(h.num_edges, dtype=bool),
            edge_latched=np.zeros(h.num_edges, dtype=bool),
        )

    @classmethod
    def with_dead_nodes(cls, h: Hypergraph, dead: Iterable[int]) -> ActivityMask:
        mask = cls.intact(h)
        dead_ids = list(dead)
        if dead_ids:
            mask.node_alive[dead_ids] = False
        return recompute_edge_liveness(h, mask)

    def copy(self) -> ActivityMask:
        return ActivityMask(
            node_alive=self.node_alive.copy(),
            edge_alive=self.edge_alive.copy(),
            edge_latched=self.edge_latched.copy(),
        )

    def check_shape(self, h: Hypergraph) -> None:
        if len(self.node_alive) != h.num_nodes:
            raise ValueError(
                f"node mask has length {len(self.node_alive)}, expected {h.num_nodes}"
            )
        if len(self.edge_alive) != h.num_edges or len(self.edge_latched) != h.num_edges:
            raise ValueError(f"edge masks must have length {h.num_edges}")


def alive_member_counts(h: Hypergraph, node_alive: np.ndarray) -> np.ndarray:
    nodes, edge_ids = h.incidence_pairs
    return np.bincount(
        edge_ids, weights=node_alive[nodes].astype(np.float64), minlength=h.num_edges
    ).astype(np.int64)


def recompute_edge_liveness(h: Hypergraph, mask: ActivityMask) -> ActivityMask:
    """Return a new mask whose edges are alive iff >= 2 members live and unlatched."""
    mask.check_shape(h)
    counts = alive_member_counts(h, mask.node_alive)
    return ActivityMask(
        node_alive=mask.node_alive.copy(),
        edge_alive=(counts >= 2) & ~mask.edge_latched,
        edge_latched=mask.edge_latched.copy(),
    )


def permute_mask(mask: ActivityMask, perm: Sequence[int]) -> ActivityMask:
    """Carry a mask through the same relabelling as :meth:`Hypergraph.permute`."""
    mapping = check_bijection(perm, len(mask.node_alive))
    node_alive = np.empty_like(mask.node_alive)
    node_alive[mapping] = mask.node_alive
    return ActivityMask(
        node_alive=node_alive,
        edge_alive=mask.edge_alive.copy(),
        edge_latched=mask.edge_latched.copy(),
    )


def component_labels(h: Hypergraph, mask: ActivityMask) -> np.ndarray:
    """Component label per node; dead nodes end up in singleton components."""
    nodes, edge_ids = h.incidence_pairs
    keep = mask.node_alive[nodes] & mask.edge_alive[edge_ids]
    size = h.num_nodes + h.num_edges
    # bipartite node/edge graph
    graph = coo_matrix(
        (np.ones(int(keep.sum())), (nodes[keep], h.num_nodes + edge_ids[keep])),
        shape=(size, size),
    )
    _, labels = connected_components(graph, directed=False)
    return labels[: h.num_nodes]


def lcc_fraction(h: Hypergraph, mask: ActivityMask) -> float:
    """Largest component of alive nodes through alive edges, over ``num_nodes``."""
    alive = mask.node_alive
    if h.num_nodes == 0 or not alive.any():
        return 0.0
    largest = np.bincount(component_labels(h, mask)[alive]).max()
    return float(largest) / h.num_nodes
