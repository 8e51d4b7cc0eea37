"""
Tests for hyperrobust.generators module.
"""

import math

import numpy as np
import pytest

from hyperrobust.errors import DisconnectedRetryExceeded, InvalidConfig
from hyperrobust.generators import (
    Family,
    GeneratorConfig,
    _er_edges,
    _sbm_edges,
    density_edge_count,
    gen_er,
    gen_sbm,
    gen_sf,
    gen_uf,
    gen_ws,
    generate,
    make_rng,
    round_half_up,
    sbm_blocks,
)


def _pair_density(edges, nodes_a, nodes_b=None):
    """Fraction of node pairs covered by the clique expansion of ``edges``."""
    covered = set()
    for edge in edges:
        for i, u in enumerate(edge):
            for v in edge[i + 1 :]:
                covered.add((u, v))
    a = set(nodes_a)
    if nodes_b is None:
        pairs = math.comb(len(a), 2)
        hits = sum(1 for u, v in covered if u in a and v in a)
    else:
        b = set(nodes_b)
        pairs = len(a) * len(b)
        hits = sum(1 for u, v in covered if (u in a and v in b) or (u in b and v in a))
    return hits / pairs


class TestHelpers:
    """Tests for rounding, edge counts and the PRNG."""

    def test_round_half_up(self):
        """Halves round away from zero for positive values."""
        assert round_half_up(2.5) == 3
        assert round_half_up(3.5) == 4
        assert round_half_up(2.49) == 2

    def test_density_edge_count_default_er(self):
        """n=200, p=0.05 with sizes 2..5 gives 227 edges."""
        assert density_edge_count(0.05, math.comb(200, 2), 3.5) == 227

    def test_density_edge_count_pairs(self):
        """Pair edges at p=1 cover every pair once."""
        assert density_edge_count(1.0, math.comb(5, 2), 2.0) == 10

    def test_make_rng_is_reproducible(self):
        """Equal seeds and attempts give equal streams."""
        assert make_rng(7, 3).random(5).tolist() == make_rng(7, 3).random(5).tolist()
        assert make_rng(7, 3).random(5).tolist() != make_rng(7, 4).random(5).tolist()

    def test_make_rng_uses_philox(self):
        """The counter-based bit generator is fixed."""
        assert isinstance(make_rng(0).bit_generator, np.random.Philox)

    def test_sbm_blocks(self):
        """Blocks are contiguous and near-equal."""
        blocks = sbm_blocks(11, 3)
        assert [len(b) for b in blocks] == [4, 4, 3]
        assert np.concatenate(blocks).tolist() == list(range(11))


class TestConfigValidation:
    """Tests for GeneratorConfig.check."""

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"family": Family.ER, "p": 1.5},
            {"family": Family.WS, "num_nodes": 10, "k_nn": 3},
            {"family": Family.WS, "num_nodes": 10, "k_nn": 10},
            {"family": Family.UF, "num_nodes": 4, "k": 5},
            {"family": Family.SBM, "num_nodes": 4, "c": 5},
            {"family": Family.SF, "num_nodes": 3, "m": 4},
            {"family": Family.ER, "num_nodes": 0},
            {"family": Family.ER, "edge_sizes": (1, 2)},
        ],
    )
    def test_invalid(self, kwargs):
        """Out-of-range parameters raise InvalidConfig."""
        with pytest.raises(InvalidConfig):
            generate(GeneratorConfig(**kwargs))

    def test_family_mismatch(self):
        """Per-family entry points check the family."""
        with pytest.raises(InvalidConfig):
            gen_ws(GeneratorConfig(family=Family.ER))


class TestErdosRenyi:
    """Tests for gen_er."""

    def test_default_edge_count(self):
        """The default configuration draws 227 edges of sizes 2..5."""
        cfg = GeneratorConfig(family=Family.ER, num_nodes=200, p=0.05, seed=7)
        edges = _er_edges(cfg, make_rng(cfg.seed))
        assert len(edges) == 227
        assert {len(e) for e in edges} <= {2, 3, 4, 5}

    def test_complete_pairs(self):
        """p=1 with pair edges produces every pair exactly once."""
        h = gen_er(
            GeneratorConfig(family=Family.ER, num_nodes=5, p=1.0, edge_sizes=(2,))
        )
        assert sorted(h.edges) == [(u, v) for u in range(5) for v in range(u + 1, 5)]

    def test_zero_probability_never_connects(self):
        """No edges means every retry stays disconnected."""
        with pytest.raises(DisconnectedRetryExceeded):
            gen_er(GeneratorConfig(family=Family.ER, num_nodes=3, p=0.0))

    def test_deterministic(self):
        """Equal configurations give identical edge lists."""
        cfg = GeneratorConfig(
            family=Family.ER, num_nodes=60, p=0.1, seed=3, connectivity="bridge"
        )
        assert gen_er(cfg).edges == gen_er(cfg).edges

    def test_seeds_differ(self):
        """Different seeds give different hypergraphs."""
        a = _er_edges(GeneratorConfig(family=Family.ER, num_nodes=60, p=0.1), make_rng(3))
        b = _er_edges(GeneratorConfig(family=Family.ER, num_nodes=60, p=0.1), make_rng(4))
        assert a != b

    def test_pair_density_close_to_p(self):
        """Clique-expansion density tracks p within 20% on average."""
        cfg = GeneratorConfig(family=Family.ER, num_nodes=200, p=0.05)
        densities = [
            _pair_density(_er_edges(cfg, make_rng(seed)), range(200)) for seed in range(20)
        ]
        assert abs(np.mean(densities) - 0.05) < 0.2 * 0.05

    def test_explicit_edge_count(self):
        """num_edges overrides the density rule."""
        cfg = GeneratorConfig(
            family=Family.ER, num_nodes=30, num_edges=12, connectivity="bridge"
        )
        h = gen_er(cfg)
        # bridges only ever add pair edges
        assert h.num_edges >= 12

    def test_no_duplicates_by_default(self):
        """Deduplication keeps every edge distinct."""
        cfg = GeneratorConfig(family=Family.ER, num_nodes=200, seed=1, connectivity="bridge")
        h = gen_er(cfg)
        assert len(set(h.edges)) == h.num_edges

    def test_too_many_distinct_edges(self):
        """Asking for more distinct edges than exist is rejected."""
        cfg = GeneratorConfig(family=Family.ER, num_nodes=3, num_edges=5, edge_sizes=(2,))
        with pytest.raises(InvalidConfig):
            gen_er(cfg)


class TestWattsStrogatz:
    """Tests for gen_ws."""

    def test_ring_lattice(self):
        """Without rewiring every node anchors a ring edge of k_nn/2 + 1 nodes."""
        h = gen_ws(GeneratorConfig(family=Family.WS, num_nodes=200, k_nn=10, p_rw=0.0))
        assert h.num_edges == 200
        assert set(h.cardinalities.tolist()) == {6}
        assert h.edges[0] == (0, 1, 2, 3, 4, 5)
        assert h.edges[198] == (0, 1, 2, 3, 198, 199)
        assert len(set(h.degrees.tolist())) == 1

    def test_cycle(self):
        """k_nn=2 gives a cycle."""
        h = gen_ws(GeneratorConfig(family=Family.WS, num_nodes=6, k_nn=2, p_rw=0.0))
        assert h.edges == ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5))

    def test_full_rewiring_keeps_anchor(self):
        """Anchors survive rewiring and sizes are unchanged."""
        cfg = GeneratorConfig(
            family=Family.WS, num_nodes=50, k_nn=4, p_rw=1.0, seed=2, connectivity="bridge"
        )
        h = gen_ws(cfg)
        for anchor in range(50):
            assert anchor in h.edges[anchor]
            assert len(h.edges[anchor]) == 3


class TestScaleFree:
    """Tests for gen_sf."""

    def test_edge_count(self):
        """One seed edge plus m edges per arriving node."""
        h = gen_sf(GeneratorConfig(family=Family.SF, num_nodes=200, m=5))
        assert h.num_edges == 1 + 195 * 5

    def test_small_trace(self):
        """With m=1 the seed edge is a pair and each new node gets its own edge."""
        h = gen_sf(GeneratorConfig(family=Family.SF, num_nodes=6, m=1, seed=4))
        assert h.num_edges == 5
        assert h.edges[0] == (0, 1)
        for offset, new in enumerate(range(2, 6), start=1):
            assert new in h.edges[offset]
            assert max(h.edges[offset]) == new

    def test_early_nodes_have_larger_degree(self):
        """Arrival order correlates with hyperdegree."""
        correlations = []
        for seed in range(20):
            h = gen_sf(GeneratorConfig(family=Family.SF, num_nodes=60, m=2, seed=seed))
            ranks = np.argsort(np.argsort(-h.degrees))
            correlations.append(np.corrcoef(np.arange(60), ranks)[0, 1])
        assert np.mean(correlations) > 0


class TestStochasticBlock:
    """Tests for gen_sbm."""

    def test_intra_denser_than_inter(self):
        """Within-block pairs are covered far more often than cross-block pairs."""
        ratios = []
        for seed in range(10):
            cfg = GeneratorConfig(
                family=Family.SBM, num_nodes=200, seed=seed, connectivity="bridge"
            )
            h = gen_sbm(cfg)
            blocks = sbm_blocks(200, 5)
            intra = np.mean([_pair_density(h.edges, b) for b in blocks])
            inter = _pair_density(h.edges, blocks[0], np.concatenate(blocks[1:]))
            ratios.append(intra / max(inter, 1e-12))
        assert np.mean(ratios) >= 5

    def test_single_block_matches_er(self):
        """c=1 is ER with p=p_in."""
        sbm = GeneratorConfig(
            family=Family.SBM, num_nodes=40, c=1, p_in=0.1, seed=5, connectivity="bridge"
        )
        er = GeneratorConfig(
            family=Family.ER, num_nodes=40, p=0.1, seed=5, connectivity="bridge"
        )
        assert gen_sbm(sbm).edges == gen_er(er).edges

    def test_no_cross_edges_without_p_out(self):
        """p_out=0 keeps every edge inside one block."""
        cfg = GeneratorConfig(family=Family.SBM, num_nodes=100, p_out=0.0, seed=1)
        blocks = sbm_blocks(100, 5)
        block_of = {int(v): i for i, b in enumerate(blocks) for v in b}
        for edge in _sbm_edges(cfg, make_rng(cfg.seed)):
            assert len({block_of[v] for v in edge}) == 1


class TestUniform:
    """Tests for gen_uf."""

    def test_fixed_cardinality(self):
        """Every edge has exactly k members."""
        cfg = GeneratorConfig(family=Family.UF, num_nodes=200, k=5, connectivity="bridge")
        h = gen_uf(cfg)
        original = h.cardinalities[: h.num_edges - (h.cardinalities == 2).sum()]
        assert set(original.tolist()) == {5}

    def test_single_full_edge(self):
        """n=k=5 with one edge gives the full edge."""
        h = gen_uf(GeneratorConfig(family=Family.UF, num_nodes=5, k=5, num_edges=1))
        assert h.edges == ((0, 1, 2, 3, 4),)

    def test_k_larger_than_n(self):
        """k above the node count is invalid."""
        with pytest.raises(InvalidConfig):
            gen_uf(GeneratorConfig(family=Family.UF, num_nodes=4, k=5))


class TestConnectivity:
    """Tests for retry and bridge connectivity."""

    @pytest.mark.parametrize("family", list(Family))
    def test_bridge_always_connected(self, family):
        """Bridging yields connected hypergraphs for every family."""
        for seed in range(3):
            cfg = GeneratorConfig(
                family=family, num_nodes=40, seed=seed, k_nn=4, m=2, connectivity="bridge"
            )
            h = generate(cfg)
            assert h.is_connected()
            assert min(h.cardinalities.tolist()) >= 2

    def test_bridge_edges_are_pairs(self):
        """Bridges are appended as pair edges after the drawn ones."""
        cfg = GeneratorConfig(
            family=Family.UF, num_nodes=60, k=4, seed=0, connectivity="bridge"
        )
        drawn = density_edge_count(cfg.p, math.comb(60, 2), 4.0)
        h = generate(cfg)
        assert all(len(e) == 2 for e in h.edges[drawn:])

    def test_retry_limit(self):
        """max_attempts bounds the retries."""
        cfg = GeneratorConfig(family=Family.UF, num_nodes=60, k=2, p=0.001, max_attempts=3)
        with pytest.raises(DisconnectedRetryExceeded):
            generate(cfg)
