"""Graph operator tests with BFS / pairwise-distance / eigensolver oracles."""

import itertools

import numpy as np
import pytest

from tensoranom.graphs import (
    SpatialGraph,
    build_operators,
    cyclic_diff_operator,
    diff_operator,
    grid_graph,
    k_hop_neighborhood,
    knn_graph,
    load_graph_csv,
    save_graph_csv,
)


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j, float(rng.uniform(0.2, 2.0))))
    return SpatialGraph(n_nodes=n, edges=tuple(edges))


def hop_distances_oracle(g: SpatialGraph) -> np.ndarray:
    """Floyd-Warshall all-pairs hop distances, independent of the BFS path."""
    n = g.n_nodes
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for i, j, _ in g.edges:
        d[i, j] = d[j, i] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


class TestSpatialGraph:
    def test_canonicalizes_edges(self):
        g = SpatialGraph(2, ((1, 0, 0.5),))
        assert g.edges == ((0, 1, 0.5),)

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            SpatialGraph(2, ((0, 0, 1.0),))

    def test_rejects_bad_weight(self):
        with pytest.raises(ValueError, match="weight"):
            SpatialGraph(2, ((0, 1, 0.0),))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SpatialGraph(2, ((0, 2, 1.0),))

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError, match="duplicate"):
            SpatialGraph(3, ((0, 1, 1.0), (1, 0, 2.0)))


class TestOperators:
    def test_path_laplacian(self):
        g = SpatialGraph(3, ((0, 1, 1.0), (1, 2, 1.0)))
        ops = build_operators(g)
        np.testing.assert_array_equal(
            ops.laplacian, np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]], dtype=float)
        )

    def test_two_node_normalized(self):
        g = SpatialGraph(2, ((0, 1, 1.0),))
        ops = build_operators(g)
        np.testing.assert_allclose(
            ops.normalized_laplacian, np.array([[1, -1], [-1, 1]], dtype=float), atol=1e-15
        )

    def test_isolated_node_row_is_identity(self):
        g = SpatialGraph(3, ((0, 1, 1.0),))
        ops = build_operators(g)
        np.testing.assert_array_equal(ops.normalized_laplacian[2], [0, 0, 1])

    def test_unit_weight_row_sums_exactly_zero(self):
        for g in (grid_graph(4, 6), SpatialGraph(3, ((0, 1, 1.0), (1, 2, 1.0)))):
            ops = build_operators(g)
            assert np.all(ops.laplacian.sum(axis=1) == 0.0)

    def test_random_graph_invariants(self):
        for seed in range(5):
            g = random_graph(10, 0.3, seed)
            ops = build_operators(g)
            np.testing.assert_array_equal(ops.adjacency, ops.adjacency.T)
            # float weights: cancellation only to machine precision
            np.testing.assert_allclose(ops.laplacian.sum(axis=1), 0.0, atol=1e-12)
            np.testing.assert_array_equal(
                ops.normalized_laplacian, ops.normalized_laplacian.T
            )
            eig = np.linalg.eigvalsh(ops.normalized_laplacian)
            assert eig.min() >= -1e-10
            assert eig.max() <= 2 + 1e-10


class TestDiffOperator:
    def test_n4_rows(self):
        expected = np.array([[1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1]], dtype=float)
        np.testing.assert_array_equal(diff_operator(4), expected)

    def test_annihilates_constants(self):
        d = diff_operator(6)
        np.testing.assert_array_equal(d @ np.ones(6), np.zeros(5))
        c = cyclic_diff_operator(6)
        np.testing.assert_array_equal(c @ np.ones(6), np.zeros(6))

    def test_gram_is_path_laplacian(self):
        n = 5
        d = diff_operator(n)
        path = SpatialGraph(n, tuple((i, i + 1, 1.0) for i in range(n - 1)))
        np.testing.assert_allclose(d.T @ d, build_operators(path).laplacian, atol=1e-15)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            diff_operator(1)

    def test_gram_plus_identity_positive_definite(self):
        for n in (2, 5, 9):
            d = diff_operator(n)
            eig = np.linalg.eigvalsh(d.T @ d + np.eye(n))
            assert eig.min() >= 1 - 1e-10
        g = random_graph(8, 0.4, 3)
        l_n = build_operators(g).normalized_laplacian
        eig = np.linalg.eigvalsh(l_n.T @ l_n + np.eye(8))
        assert eig.min() >= 1 - 1e-10


class TestGridGraph:
    def test_single_cell(self):
        assert grid_graph(1, 1).edges == ()

    def test_2x2(self):
        assert len(grid_graph(2, 2).edges) == 4

    def test_8x5_edge_count(self):
        g = grid_graph(8, 5)
        # lattice formula, cross-checked by enumeration
        assert len(g.edges) == 2 * 8 * 5 - 8 - 5 == 67
        count = 0
        for r, c in itertools.product(range(8), range(5)):
            if c + 1 < 5:
                count += 1
            if r + 1 < 8:
                count += 1
        assert count == len(g.edges)

    def test_node_indexing(self):
        g = grid_graph(2, 3)
        assert (0, 1, 1.0) in g.edges  # horizontal neighbor
        assert (0, 3, 1.0) in g.edges  # vertical neighbor: row stride = cols


class TestKHop:
    def test_zero_hops(self):
        g = grid_graph(3, 3)
        assert k_hop_neighborhood(g, 4, 0) == [4]

    def test_grid_center_one_hop(self):
        g = grid_graph(3, 3)
        hood = k_hop_neighborhood(g, 4, 1)
        assert hood[0] == 4
        assert sorted(hood) == [1, 3, 4, 5, 7]

    def test_matches_shortest_path_oracle(self):
        for seed in range(4):
            g = random_graph(12, 0.25, seed)
            dist = hop_distances_oracle(g)
            for s in range(12):
                for k in (0, 1, 2, 3):
                    hood = k_hop_neighborhood(g, s, k)
                    expected = {u for u in range(12) if dist[s, u] <= k}
                    assert set(hood) == expected
                    assert hood[0] == s
                    rest = hood[1:]
                    keys = [(dist[s, u], u) for u in rest]
                    assert keys == sorted(keys)

    def test_monotone_in_k(self):
        g = random_graph(15, 0.2, 9)
        for s in range(15):
            prev: set = set()
            for k in range(4):
                cur = set(k_hop_neighborhood(g, s, k))
                assert prev <= cur
                prev = cur

    def test_rejects_bad_node(self):
        with pytest.raises(ValueError):
            k_hop_neighborhood(grid_graph(2, 2), 4, 1)


class TestKnnGraph:
    def test_two_identical_rows(self):
        x = np.ones((2, 3))
        g = knn_graph(x, 1, k=1)
        assert g.edges == ((0, 1, 1.0),)

    def test_k_max_gives_complete_graph(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((5, 4))
        g = knn_graph(x, 1, k=4)
        assert len(g.edges) == 10

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((6, 7))
        k = 2
        g = knn_graph(x, 1, k=k, sigma2=0.8)
        # exhaustive oracle: all pairwise distances, OR symmetrization
        rows = x
        d2 = np.array(
            [[np.sum((rows[i] - rows[j]) ** 2) for j in range(6)] for i in range(6)]
        )
        expected = set()
        for s in range(6):
            nearest = sorted(range(6), key=lambda t: (d2[s, t], t))
            nearest = [t for t in nearest if t != s][:k]
            for t in nearest:
                expected.add((min(s, t), max(s, t)))
        assert {(i, j) for i, j, _ in g.edges} == expected
        for i, j, w in g.edges:
            assert w == pytest.approx(np.exp(-d2[i, j] / (2 * 0.8)))

    def test_binary_mode(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((6, 3))
        g = knn_graph(x, 1, k=2, binary=True)
        assert all(w == 1.0 for _, _, w in g.edges)

    def test_permutation_invariance_up_to_relabeling(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((7, 4))
        perm = rng.permutation(7)
        g1 = knn_graph(x, 1, k=2, sigma2=1.0)
        g2 = knn_graph(x[perm], 1, k=2, sigma2=1.0)
        relabeled = {
            (min(perm[i], perm[j]), max(perm[i], perm[j]), round(w, 12))
            for i, j, w in g2.edges
        }
        assert {(i, j, round(w, 12)) for i, j, w in g1.edges} == relabeled

    def test_rejects_bad_k(self):
        x = np.zeros((4, 2))
        with pytest.raises(ValueError):
            knn_graph(x, 1, k=0)
        with pytest.raises(ValueError):
            knn_graph(x, 1, k=4)
        with pytest.raises(ValueError):
            knn_graph(x, 1, k=1, sigma2=0.0)


def test_graph_csv_round_trip(tmp_path):
    g = random_graph(9, 0.3, 5)
    path = tmp_path / "g.csv"
    save_graph_csv(path, g)
    assert load_graph_csv(path) == g
    assert path.read_text().startswith("# nodes=9\n")


def test_graph_csv_requires_header(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("0,1,1.0\n")
    with pytest.raises(ValueError, match="nodes"):
        load_graph_csv(path)
