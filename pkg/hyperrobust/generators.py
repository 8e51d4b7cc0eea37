"""Seeded synthetic hypergraph families.

Five families are supported: Erdos-Renyi (``ER``), Watts-Strogatz (``WS``),
scale-free preferential attachment (``SF``), stochastic block model
(``SBM``) and uniform cardinality (``UF``).

Edge counts for ER, SBM and UF match the clique-expansion density of a
pairwise graph with connection probability ``p``::

    M = round(p * C(n, 2) * 2 / (k * (k - 1)))

where ``k`` is the mean edge size. Rounding is half-up everywhere.

Randomness comes from numpy's Philox 4x64-10 counter-based bit generator,
keyed by ``SeedSequence(seed, spawn_key=(attempt,))`` so each connectivity
retry draws from an independent, reproducible stream.
"""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict

from hyperrobust.errors import DisconnectedRetryExceeded, InvalidConfig
from hyperrobust.hypergraph import ActivityMask, Hypergraph, component_labels

logger = logging.getLogger(__name__)

DEFAULT_EDGE_SIZES: tuple[int, ...] = (2, 3, 4, 5)
MAX_ATTEMPTS = 100
# draws per edge before giving up on finding one not already present
_DEDUP_TRIES = 1000

Edge = tuple[int, ...]


class Family(str, Enum):
    ER = "ER"
    WS = "WS"
    SF = "SF"
    SBM = "SBM"
    UF = "UF"


class GeneratorConfig(BaseModel):
    """Family choice, size, seed and the parameters of every family.

    Only the parameters of ``family`` are read. Call :meth:`check` (the
    generators do) to validate them.
    """

    model_config = ConfigDict(frozen=True)

    family: Family = Family.ER
    num_nodes: int = 200
    seed: int = 0
    # ER / SBM edge sizes, drawn uniformly
    edge_sizes: tuple[int, ...] = DEFAULT_EDGE_SIZES
    # ER / UF explicit edge count, overrides the density rule
    num_edges: int | None = None
    p: float = 0.05
    k_nn: int = 10
    p_rw: float = 0.5
    m: int = 5
    c: int = 5
    p_in: float = 0.1
    p_out: float = 0.01
    k: int = 5
    dedup: bool = True
    connectivity: Literal["retry", "bridge"] = "retry"
    max_attempts: int = MAX_ATTEMPTS

    def check(self) -> None:
        n = self.num_nodes
        if n < 1:
            raise InvalidConfig(f"num_nodes must be >= 1, got {n}")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.max_attempts < 1:
            raise InvalidConfig(f"max_attempts must be >= 1, got {self.max_attempts}")
        for name in ("p", "p_rw", "p_in", "p_out"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {value}")
        if not self.edge_sizes or min(self.edge_sizes) < 2:
            raise InvalidConfig(f"edge_sizes must be >= 2, got {self.edge_sizes}")
        if self.num_edges is not None and self.num_edges < 0:
            raise InvalidConfig(f"num_edges must be >= 0, got {self.num_edges}")
        family = self.family
        if family is Family.WS:
            if self.k_nn < 2 or self.k_nn % 2 or self.k_nn >= n:
                raise InvalidConfig(
                    f"k_nn must be even, >= 2 and < num_nodes ({n}), got {self.k_nn}"
                )
        elif family is Family.SF:
            if self.m < 1 or max(self.m, 2) > n:
                raise InvalidConfig(f"m must satisfy 1 <= max(m, 2) <= {n}, got {self.m}")
        elif family is Family.SBM:
            if not 1 <= self.c <= n:
                raise InvalidConfig(f"c must lie in 1..{n}, got {self.c}")
        elif family is Family.UF:
            if not 2 <= self.k <= n:
                raise InvalidConfig(f"k must lie in 2..{n}, got {self.k}")


def make_rng(seed: int, attempt: int = 0) -> np.random.Generator:
    sequence = np.random.SeedSequence(seed, spawn_key=(attempt,))
    return np.random.Generator(np.random.Philox(sequence))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def density_edge_count(p: float, pairs: int, mean_size: float) -> int:
    """Edge count whose clique expansion matches ``p`` over ``pairs`` node pairs."""
    if pairs == 0 or mean_size <= 1.0:
        return 0
    return round_half_up(p * pairs * 2.0 / (mean_size * (mean_size - 1.0)))


def _usable_sizes(sizes: tuple[int, ...], pool_size: int) -> list[int]:
    return [s for s in sizes if s <= pool_size]


def _sample_edges(
    rng: np.random.Generator,
    pool: np.ndarray,
    count: int,
    sizes: list[int],
    seen: set[Edge] | None,
) -> list[Edge]:
    """Draw ``count`` edges with members uniform over ``pool``."""
    if count == 0:
        return []
    if not sizes:
        raise InvalidConfig(f"no edge size fits a pool of {len(pool)} node(s)")
    if seen is not None:
        available = sum(math.comb(len(pool), s) for s in set(sizes))
        if count > available:
            raise InvalidConfig(
                f"cannot draw {count} distinct edges, only {available} exist"
            )
    edges: list[Edge] = []
    for _ in range(count):
        for _ in range(_DEDUP_TRIES):
            size = sizes[int(rng.integers(len(sizes)))]
            edge = tuple(sorted(rng.choice(pool, size=size, replace=False).tolist()))
            if seen is None or edge not in seen:
                break
        else:
            raise InvalidConfig(f"gave up drawing a new edge after {_DEDUP_TRIES} tries")
        if seen is not None:
            seen.add(edge)
        edges.append(edge)
    return edges


def _er_edges(cfg: GeneratorConfig, rng: np.random.Generator) -> list[Edge]:
    n = cfg.num_nodes
    sizes = _usable_sizes(cfg.edge_sizes, n)
    if cfg.num_edges is not None:
        count = cfg.num_edges
    else:
        count = density_edge_count(cfg.p, math.comb(n, 2), float(np.mean(sizes)) if sizes else 0.0)
    return _sample_edges(rng, np.arange(n), count, sizes, set() if cfg.dedup else None)


def _ws_edges(cfg: GeneratorConfig, rng: np.random.Generator) -> list[Edge]:
    n = cfg.num_nodes
    half = cfg.k_nn // 2
    edges: list[Edge] = []
    for anchor in range(n):
        ring = [(anchor + j) % n for j in range(1, half + 1)]
        rewire = rng.random(half) < cfg.p_rw
        kept = [v for v, redraw in zip(ring, rewire) if not redraw]
        drawn: list[int] = []
        n_redraw = int(rewire.sum())
        if n_redraw:
            taken = {anchor, *kept}
            candidates = np.array([v for v in range(n) if v not in taken])
            drawn = rng.choice(candidates, size=n_redraw, replace=False).tolist()
        edges.append(tuple(sorted([anchor, *kept, *drawn])))
    return edges


def _sf_edges(cfg: GeneratorConfig, rng: np.random.Generator) -> list[Edge]:
    n = cfg.num_nodes
    start = max(cfg.m, 2)
    edges: list[Edge] = [tuple(range(start))]
    seen: set[Edge] | None = set(edges) if cfg.dedup else None
    degree = np.zeros(n, dtype=np.float64)
    degree[:start] = 1.0
    for new in range(start, n):
        sizes = [s for s in DEFAULT_EDGE_SIZES if s - 1 <= new]
        for _ in range(cfg.m):
            weights = degree[:new] + 1.0
            for _ in range(_DEDUP_TRIES):
                size = sizes[int(rng.integers(len(sizes)))]
                picks = rng.choice(
                    new, size=size - 1, replace=False, p=weights / weights.sum()
                )
                edge = tuple(sorted([*picks.tolist(), new]))
                if seen is None or edge not in seen:
                    break
            else:
                raise InvalidConfig(
                    f"node {new} could not attach {cfg.m} distinct edges"
                )
            if seen is not None:
                seen.add(edge)
            edges.append(edge)
            degree[list(edge)] += 1.0
    return edges


def sbm_blocks(n: int, c: int) -> list[np.ndarray]:
    """Contiguous, near-equal community blocks."""
    return np.array_split(np.arange(n), c)


def _sbm_edges(cfg: GeneratorConfig, rng: np.random.Generator) -> list[Edge]:
    n = cfg.num_nodes
    blocks = sbm_blocks(n, cfg.c)
    seen: set[Edge] | None = set() if cfg.dedup else None
    edges: list[Edge] = []
    for block in blocks:
        sizes = _usable_sizes(cfg.edge_sizes, len(block))
        mean = float(np.mean(sizes)) if sizes else 0.0
        count = density_edge_count(cfg.p_in, math.comb(len(block), 2), mean)
        edges.extend(_sample_edges(rng, block, count, sizes, seen))

    block_sizes = [len(b) for b in blocks]
    cross_pairs = (n * n - sum(s * s for s in block_sizes)) // 2
    sizes = list(cfg.edge_sizes)
    count = density_edge_count(cfg.p_out, cross_pairs, float(np.mean(sizes)))
    for _ in range(count):
        for _ in range(_DEDUP_TRIES):
            a, b = sorted(rng.choice(cfg.c, size=2, replace=False).tolist())
            usable = [s for s in sizes if s <= block_sizes[a] + block_sizes[b]]
            size = usable[int(rng.integers(len(usable)))]
            low = max(1, size - block_sizes[b])
            high = min(size - 1, block_sizes[a])
            from_a = int(rng.integers(low, high + 1))
            members = [
                *rng.choice(blocks[a], size=from_a, replace=False).tolist(),
                *rng.choice(blocks[b], size=size - from_a, replace=False).tolist(),
            ]
            edge = tuple(sorted(members))
            if seen is None or edge not in seen:
                break
        else:
            raise InvalidConfig("gave up drawing a new inter-block edge")
        if seen is not None:
            seen.add(edge)
        edges.append(edge)
    return edges


def _uf_edges(cfg: GeneratorConfig, rng: np.random.Generator) -> list[Edge]:
    n = cfg.num_nodes
    if cfg.num_edges is not None:
        count = cfg.num_edges
    else:
        count = density_edge_count(cfg.p, math.comb(n, 2), float(cfg.k))
    return _sample_edges(rng, np.arange(n), count, [cfg.k], set() if cfg.dedup else None)


_BUILDERS: dict[Family, Callable[[GeneratorConfig, np.random.Generator], list[Edge]]] = {
    Family.ER: _er_edges,
    Family.WS: _ws_edges,
    Family.SF: _sf_edges,
    Family.SBM: _sbm_edges,
    Family.UF: _uf_edges,
}


def bridge_components(
    h: Hypergraph, rng: np.random.Generator
) -> Hypergraph:
    """Join components with pair edges, in order of their smallest node id."""
    labels = component_labels(h, ActivityMask.intact(h))
    groups: dict[int, list[int]] = {}
    for v, label in enumerate(labels.tolist()):
        groups.setdefault(label, []).append(v)
    components = sorted(groups.values(), key=lambda members: members[0])
    if len(components) <= 1:
        return h
    joined = list(components[0])
    bridges: list[Edge] = []
    for members in components[1:]:
        inside = int(rng.choice(members))
        outside = int(rng.choice(joined))
        bridges.append((min(inside, outside), max(inside, outside)))
        joined.extend(members)
    logger.debug("bridged %d components", len(components))
    return Hypergraph(num_nodes=h.num_nodes, edges=h.edges + tuple(bridges))


def generate(cfg: GeneratorConfig) -> Hypergraph:
    """Build a connected hypergraph for ``cfg.family``."""
    cfg.check()
    build = _BUILDERS[cfg.family]
    if cfg.connectivity == "bridge":
        rng = make_rng(cfg.seed)
        h = Hypergraph.from_edge_list(cfg.num_nodes, build(cfg, rng))
        return bridge_components(h, rng)
    for attempt in range(cfg.max_attempts):
        rng = make_rng(cfg.seed, attempt)
        h = Hypergraph.from_edge_list(cfg.num_nodes, build(cfg, rng))
        if h.is_connected():
            if attempt:
                logger.debug(
                    "%s seed %d connected after %d attempts",
                    cfg.family.value,
                    cfg.seed,
                    attempt + 1,
                )
            return h
    raise DisconnectedRetryExceeded(
        f"{cfg.family.value} (n={cfg.num_nodes}, seed={cfg.seed}) stayed "
        f"disconnected after {cfg.max_attempts} attempts"
    )


def _generate_family(family: Family) -> Callable[[GeneratorConfig], Hypergraph]:
    def gen(cfg: GeneratorConfig) -> Hypergraph:
        if cfg.family is not family:
            raise InvalidConfig(
                f"gen_{family.value.lower()} called with family {cfg.family.value}"
            )
        return generate(cfg)

    gen.__name__ = f"gen_{family.value.lower()}"
    gen.__doc__ = f"Generate a connected {family.value} hypergraph."
    return gen


gen_er = _generate_family(Family.ER)
gen_ws = _generate_family(Family.WS)
gen_sf = _generate_family(Family.SF)
gen_sbm = _generate_family(Family.SBM)
gen_uf = _generate_family(Family.UF)
