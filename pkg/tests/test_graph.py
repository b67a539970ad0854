import numpy as np
import pytest

from heatprop import (
    IsolatedNodeError,
    ValidationError,
    build_graph,
    connected_components,
    directed_to_bipartite,
    transition_apply,
)
from conftest import dense_from_edges, path_graph, random_connected_graph


class TestBuildGraph:
    def test_single_edge_degrees(self):
        g = build_graph(2, [(0, 1, 1.0)])
        assert np.array_equal(g.degrees, [1.0, 1.0])
        assert g.num_edges == 1

    def test_path_degrees(self):
        g = build_graph(3, [(0, 1, 1.0), (1, 2, 1.0)])
        assert np.array_equal(g.degrees, [1.0, 2.0, 1.0])

    def test_duplicate_edges_summed_then_isolation_error(self):
        with pytest.raises(IsolatedNodeError, match="2"):
            build_graph(3, [(0, 1, 2.0), (0, 1, 3.0)])
        # same edges on a 2-node graph: duplicates merge to weight 5
        g = build_graph(2, [(0, 1, 2.0), (0, 1, 3.0)])
        assert g.dense_adjacency()[0, 1] == 5.0
        assert np.array_equal(g.degrees, [5.0, 5.0])

    def test_reversed_duplicates_merge(self):
        g = build_graph(2, [(0, 1, 2.0), (1, 0, 3.0)])
        assert g.dense_adjacency()[0, 1] == 5.0

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValidationError, match="weight"):
            build_graph(2, [(0, 1, 0.0)])
        with pytest.raises(ValidationError, match="weight"):
            build_graph(2, [(0, 1, -1.0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            build_graph(2, [(0, 2, 1.0)])

    def test_self_loop_counts_once_in_degree(self):
        g = build_graph(2, [(0, 0, 2.0), (0, 1, 1.0)])
        assert np.array_equal(g.degrees, [3.0, 1.0])
        assert g.num_edges == 2

    def test_adjacency_matches_independent_dense(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(2, 30))
            g = random_connected_graph(rng, n, extra_edges=n)
            # rebuild the same edge list independently
            src, dst, w = g.edges()
            dense = dense_from_edges(n, zip(src, dst, w))
            assert np.allclose(g.dense_adjacency(), dense)
            assert np.allclose(g.dense_adjacency(), g.dense_adjacency().T)

    def test_degree_sum_equals_twice_total_weight(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n = int(rng.integers(3, 40))
            edges = []
            total = 0.0
            for _ in range(n * 2):
                i, j = rng.choice(n, size=2, replace=False)
                w = float(rng.uniform(0.1, 2.0))
                edges.append((int(i), int(j), w))
                total += w
            try:
                g = build_graph(n, edges)
            except IsolatedNodeError:
                continue
            assert g.degrees.sum() == pytest.approx(2.0 * total, rel=1e-12)


class TestTransitionApply:
    def test_path_averaging(self):
        g = path_graph(3)
        assert np.allclose(transition_apply(g, [1.0, 0.0, 0.0]), [0.0, 0.5, 0.0])

    def test_row_stochastic_preserves_ones(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            g = random_connected_graph(rng, int(rng.integers(2, 50)), extra_edges=10)
            out = transition_apply(g, np.ones(g.n))
            assert np.array_equal(out, np.ones(g.n))

    def test_weighted_triangle_hand_computed(self):
        g = build_graph(3, [(0, 1, 2.0), (0, 2, 1.0), (1, 2, 1.0)])
        out = transition_apply(g, [1.0, 0.0, 0.0])
        assert np.allclose(out, [0.0, 2.0 / 3.0, 0.5], atol=1e-15)

    def test_matches_dense_operator(self):
        rng = np.random.default_rng(7)
        for _ in range(15):
            n = int(rng.integers(2, 200))
            g = random_connected_graph(rng, n, extra_edges=n // 2)
            dense = g.dense_adjacency() / g.degrees[:, None]
            v = rng.normal(size=n)
            assert np.abs(transition_apply(g, v) - dense @ v).max() < 1e-12

    def test_dimension_mismatch(self):
        g = path_graph(3)
        with pytest.raises(ValidationError):
            transition_apply(g, [1.0, 2.0])


class TestBipartiteLift:
    def test_single_arc_places_edge_but_leaves_dead_copies(self):
        # arc (0,1) alone would put its one edge at (0, 3) while leaving the
        # source copy of 1 and the destination copy of 0 with zero degree
        with pytest.raises(IsolatedNodeError) as exc:
            directed_to_bipartite(2, [(0, 1, 1.0)])
        assert "source copy of node 1" in str(exc.value)
        assert "destination copy of node 0" in str(exc.value)

    def test_two_cycle_edges(self):
        g = directed_to_bipartite(2, [(0, 1, 1.0), (1, 0, 1.0)])
        dense = g.dense_adjacency()
        assert dense[0, 3] == 1.0 and dense[1, 2] == 1.0
        assert dense.sum() == 4.0  # exactly two undirected edges

    def test_isolated_copies_detected(self):
        # src degrees [2,1,0], dst degrees [0,1,2]: two dead copies
        with pytest.raises(IsolatedNodeError) as exc:
            directed_to_bipartite(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
        assert "destination copy of node 0" in str(exc.value)
        assert "source copy of node 2" in str(exc.value)

    def test_output_is_bipartite(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            n = int(rng.integers(2, 20))
            arcs = [(i, (i + 1) % n, 1.0) for i in range(n)]  # directed cycle
            extra = int(rng.integers(0, 3 * n))
            for _ in range(extra):
                i, j = rng.choice(n, size=2, replace=False)
                arcs.append((int(i), int(j), float(rng.uniform(0.5, 2.0))))
            g = directed_to_bipartite(n, arcs)
            rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
            same_side = (rows < n) == (g.indices < n)
            assert not same_side.any()


class TestConnectedComponents:
    def test_path_single_component(self):
        comps = connected_components(path_graph(3))
        assert len(comps) == 1
        assert set(comps[0]) == {0, 1, 2}

    def test_two_disjoint_edges(self):
        g = build_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
        comps = connected_components(g)
        assert [set(c) for c in comps] == [{0, 1}, {2, 3}]

    def test_karate_is_one_component(self, karate):
        comps = connected_components(karate.graph)
        assert len(comps) == 1
        assert comps[0].size == 34
