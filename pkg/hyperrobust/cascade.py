"""Static targeted attacks and the load-redistribution cascade.

Every node starts with load ``L = d ** beta`` and capacity ``R = (1 + alpha) L``.
When a node fails, its current load is split evenly over the incident edges
that still reach an alive member, and each edge splits its share evenly over
those alive members. A recipient whose load exceeds its capacity fails in
turn. Failures are processed first in, first out; attacked nodes are seeded in
ascending id order.

After a failed node has been processed, each of its edges with at most one
alive member is latched as failed. A failed node with no edge that reaches
an alive member drops its load.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hyperrobust.errors import InvalidOrder
from hyperrobust.hypergraph import (
    ActivityMask,
    Hypergraph,
    lcc_fraction,
    recompute_edge_liveness,
)

logger = logging.getLogger(__name__)


class CascadeParams(BaseModel):
    """Load index ``beta`` and capacity margin ``alpha``."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.5, gt=0.0)
    beta: float = 1.0

    @field_validator("alpha", "beta")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"must be finite, got {value}")
        return value


class AttackKind(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class AttackSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: AttackKind = AttackKind.STATIC
    params: CascadeParams | None = None

    @model_validator(mode="before")
    @classmethod
    def _default_params(cls, data: Any) -> Any:
        if (
            isinstance(data, dict)
            and data.get("kind") == AttackKind.DYNAMIC
            and data.get("params") is None
        ):
            return {**data, "params": CascadeParams()}
        return data

    @model_validator(mode="after")
    def _params_match_kind(self) -> AttackSpec:
        if self.kind is AttackKind.STATIC and self.params is not None:
            raise ValueError("static attacks take no cascade parameters")
        return self

    @classmethod
    def static(cls) -> AttackSpec:
        return cls(kind=AttackKind.STATIC)

    @classmethod
    def dynamic(cls, alpha: float = 0.5, beta: float = 1.0) -> AttackSpec:
        return cls(kind=AttackKind.DYNAMIC, params=CascadeParams(alpha=alpha, beta=beta))

    @property
    def cascade(self) -> CascadeParams:
        if self.params is None:
            raise ValueError("static attacks have no cascade parameters")
        return self.params


@dataclass
class CascadeState:
    """Mutable bookkeeping for one cascade.

    ``live_edge_count[i]`` counts unlatched edges containing ``i`` and
    ``live_member_count[e]`` counts alive members of ``e``. ``failure_log``
    lists failed nodes in the order they were marked.
    """

    mask: ActivityMask
    load: list[float]
    capacity: list[float]
    live_edge_count: list[int]
    live_member_count: list[int]
    pending: deque[int] = field(default_factory=deque)
    failure_log: list[int] = field(default_factory=list)

    @property
    def quiescent(self) -> bool:
        return not self.pending

    def mark_failed(self, h: Hypergraph, j: int) -> None:
        self.mask.node_alive[j] = False
        for e in h.node_edges[j]:
            self.live_member_count[e] -= 1
        self.pending.append(j)
        self.failure_log.append(j)


def static_attack_order(h: Hypergraph) -> list[int]:
    """Nodes by initial hyperdegree, highest first, ties by ascending id."""
    degrees = h.degrees.tolist()
    return sorted(range(h.num_nodes), key=lambda v: (-degrees[v], v))


def init_cascade(h: Hypergraph, params: CascadeParams) -> CascadeState:
    load = [
        float(d) ** params.beta if d > 0 else 0.0 for d in h.degrees.tolist()
    ]
    return CascadeState(
        mask=h.intact_mask(),
        load=load,
        capacity=[(1.0 + params.alpha) * x for x in load],
        live_edge_count=h.degrees.tolist(),
        live_member_count=h.cardinalities.tolist(),
    )


def fail_and_redistribute(state: CascadeState, i: int, h: Hypergraph) -> CascadeState:
    """Process the failed node ``i`` at the head of the queue."""
    if not state.pending or state.pending[0] != i:
        raise ValueError(f"node {i} is not at the head of the failure queue")
    state.pending.popleft()
    node_alive = state.mask.node_alive
    latched = state.mask.edge_latched
    channels = [
        e
        for e in h.node_edges[i]
        if not latched[e] and state.live_member_count[e] >= 1
    ]
    if channels:
        share = state.load[i] / len(channels)
        # recipients are fixed before any increment lands
        deliveries = [
            (share / state.live_member_count[e], [j for j in h.edges[e] if node_alive[j]])
            for e in channels
        ]
        for amount, recipients in deliveries:
            for j in recipients:
                state.load[j] += amount
                if node_alive[j] and state.load[j] > state.capacity[j]:
                    state.mark_failed(h, j)
    elif state.load[i] > 0.0:
        logger.debug("node %d has no live channel, dropping load %.6g", i, state.load[i])
    state.load[i] = 0.0

    for e in h.node_edges[i]:
        if not latched[e] and state.live_member_count[e] <= 1:
            latched[e] = True
            state.mask.edge_alive[e] = False
            for v in h.edges[e]:
                state.live_edge_count[v] -= 1
    return state


def drain(state: CascadeState, h: Hypergraph) -> CascadeState:
    while state.pending:
        fail_and_redistribute(state, state.pending[0], h)
    state.mask = recompute_edge_liveness(h, state.mask)
    return state


def run_cascade(
    h: Hypergraph, attacked: Iterable[int], params: CascadeParams
) -> CascadeState:
    """Fail ``attacked`` (ascending id) and propagate to quiescence."""
    state = init_cascade(h, params)
    for j in sorted(set(attacked)):
        state.mark_failed(h, j)
    return drain(state, h)


def check_order(h: Hypergraph, order: Sequence[int]) -> list[int]:
    values = [int(v) for v in order]
    if len(values) != h.num_nodes or sorted(values) != list(range(h.num_nodes)):
        raise InvalidOrder(
            f"attack order must be a permutation of 0..{h.num_nodes - 1}"
        )
    return values


def removal_count(rho: float, n: int) -> int:
    """``round(rho * n)`` rounded half-up and clamped to ``[0, n]``."""
    return min(max(int(math.floor(rho * n + 0.5)), 0), n)


def attacked_lcc(
    h: Hypergraph, attacked: Sequence[int], attack: AttackSpec
) -> float:
    """LCC fraction after removing ``attacked`` under the given attack kind."""
    if attack.kind is AttackKind.STATIC:
        mask = ActivityMask.with_dead_nodes(h, attacked)
    else:
        mask = run_cascade(h, attacked, attack.cascade).mask
    return lcc_fraction(h, mask)


def percolation_sample(
    h: Hypergraph, rho: float, attack: AttackSpec, order: Sequence[int]
) -> float:
    order = check_order(h, order)
    q = removal_count(rho, h.num_nodes)
    return attacked_lcc(h, order[:q], attack)


def _current_degrees(h: Hypergraph, mask: ActivityMask) -> np.ndarray:
    nodes, edge_ids = h.incidence_pairs
    live = mask.edge_alive[edge_ids]
    return np.bincount(nodes[live], minlength=h.num_nodes)


def dynamic_failure_order(h: Hypergraph, params: CascadeParams) -> list[int]:
    """Failure sequence under repeated highest-current-hyperdegree attacks.

    Each attack runs its cascade to quiescence on the accumulated state; the
    attacked node is recorded first, then the nodes it brought down.
    """
    state = init_cascade(h, params)
    while len(state.failure_log) < h.num_nodes:
        state.mask = recompute_edge_liveness(h, state.mask)
        degrees = np.where(state.mask.node_alive, _current_degrees(h, state.mask), -1)
        # argmax returns the lowest id among ties
        target = int(np.argmax(degrees))
        state.mark_failed(h, target)
        drain(state, h)
    return list(state.failure_log)
