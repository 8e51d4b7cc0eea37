"""
Pytest configuration and shared fixtures for hyperrobust tests.
"""

import numpy as np
import pytest

from hyperrobust.cascade import CascadeParams
from hyperrobust.generators import Family, GeneratorConfig, generate
from hyperrobust.hypergraph import Hypergraph


def random_hypergraph(
    rng: np.random.Generator, num_nodes: int, num_edges: int, max_size: int = 4
) -> Hypergraph:
    """Uniform random edge list; may be disconnected or hold duplicate edges."""
    edges = []
    for _ in range(num_edges):
        size = int(rng.integers(2, min(max_size, num_nodes) + 1))
        edges.append(rng.choice(num_nodes, size=size, replace=False).tolist())
    return Hypergraph.from_edge_list(num_nodes, edges)


def small_er(seed: int, num_nodes: int = 20, p: float = 0.2) -> Hypergraph:
    """Connected ER hypergraph from the bridging generator."""
    return generate(
        GeneratorConfig(
            family=Family.ER, num_nodes=num_nodes, p=p, seed=seed, connectivity="bridge"
        )
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def single_edge() -> Hypergraph:
    """Three nodes sharing one hyperedge."""
    return Hypergraph.from_edge_list(3, [[0, 1, 2]])


@pytest.fixture
def triangle_pairs() -> Hypergraph:
    """Triangle built from three pair edges."""
    return Hypergraph.from_edge_list(3, [[0, 1], [1, 2], [0, 2]])


@pytest.fixture
def path4() -> Hypergraph:
    return Hypergraph.from_edge_list(4, [[0, 1], [1, 2], [2, 3]])


@pytest.fixture
def star4() -> Hypergraph:
    return Hypergraph.from_edge_list(4, [[0, 1], [0, 2], [0, 3]])


@pytest.fixture
def mixed_sizes() -> Hypergraph:
    """Node 0 sits in edges of cardinality 2 and 4."""
    return Hypergraph.from_edge_list(5, [[0, 1], [0, 2, 3, 4]])


@pytest.fixture
def equal_sizes() -> Hypergraph:
    """Node 0 sits in two edges of cardinality 3."""
    return Hypergraph.from_edge_list(5, [[0, 1, 2], [0, 3, 4]])


@pytest.fixture
def cascade_params() -> CascadeParams:
    return CascadeParams(alpha=0.5, beta=1.0)
