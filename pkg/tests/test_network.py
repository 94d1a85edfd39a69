"""Graphs and mixing matrices: closed-form weights on small graphs, an
eigenvalue oracle for the spectral gap, seeded ensemble properties, and the
text round trip."""

import numpy as np
import pytest

from prextra import (Graph, MixingMatrix, generate_er_graph, load_mixing,
                     metropolis_weights, save_mixing, spectral_gap)


def _gap_eig_oracle(w):
    """Largest |eigenvalue| after removing the consensus eigenpair."""
    vals = np.sort(np.abs(np.linalg.eigvalsh(w)))
    return float(vals[-2]) if len(vals) > 1 else 0.0


def test_path_graph_closed_form():
    g = Graph(3, ((0, 1), (1, 2)))
    m = metropolis_weights(g)
    want = np.array([
        [2 / 3, 1 / 3, 0.0],
        [1 / 3, 1 / 3, 1 / 3],
        [0.0, 1 / 3, 2 / 3],
    ])
    assert np.allclose(m.w, want, atol=1e-15)
    # eigenvalues are 1, 2/3, 0
    assert spectral_gap(m) == pytest.approx(2 / 3, abs=1e-12)
    assert np.allclose(m.w_tilde, 0.5 * (np.eye(3) + want), atol=1e-15)
    m.validate()


def test_complete_graph_closed_form():
    n = 5
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    m = metropolis_weights(Graph(n, edges))
    assert np.allclose(m.w, np.full((n, n), 1.0 / n), atol=1e-15)
    assert spectral_gap(m) <= 1e-15


def test_single_node_graph():
    g = generate_er_graph(1, 0.5, 0)
    assert g.is_connected()
    m = metropolis_weights(g)
    assert m.w.shape == (1, 1) and m.w[0, 0] == 1.0
    assert spectral_gap(m) == 0.0


def test_spectral_gap_matches_eigen_oracle():
    for seed in range(30):
        m = metropolis_weights(generate_er_graph(8, 0.6, seed))
        assert spectral_gap(m) == pytest.approx(_gap_eig_oracle(m.w), abs=1e-12)


def test_generated_matrices_validate():
    for seed in range(50):
        g = generate_er_graph(8, 0.6, seed)
        assert g.is_connected()
        m = metropolis_weights(g)
        m.validate()  # symmetric, doubly stochastic, contractive
        w = m.w
        assert np.abs(w - w.T).max() == 0.0
        assert np.abs(w.sum(axis=1) - 1.0).max() <= 1e-15
        assert spectral_gap(m) < 1.0


def test_generation_is_deterministic():
    a = generate_er_graph(8, 0.6, 123)
    b = generate_er_graph(8, 0.6, 123)
    assert a.edges == b.edges
    assert np.array_equal(metropolis_weights(a).w, metropolis_weights(b).w)


def test_sparse_graphs_get_resampled_until_connected():
    # p small enough that many draws are disconnected, yet a connected one
    # exists in the resample chain
    g = generate_er_graph(6, 0.25, 0)
    assert g.is_connected()


def test_impossible_graph_raises():
    with pytest.raises(ValueError):
        generate_er_graph(2, 0.0, 0)
    with pytest.raises(ValueError):
        generate_er_graph(0, 0.5, 0)
    with pytest.raises(ValueError):
        generate_er_graph(3, 1.5, 0)


def test_degree_accounting():
    g = Graph(4, ((0, 1), (1, 2), (2, 3), (0, 3)))  # 4-cycle
    assert g.degree_sequence().tolist() == [2, 2, 2, 2]
    assert g.average_degree() == 2.0
    assert g.neighbor_lists == [[1, 3], [0, 2], [1, 3], [2, 0]]


def test_validate_rejects_bad_matrices():
    ok = metropolis_weights(generate_er_graph(5, 0.8, 1))
    bad = ok.w.copy()
    bad[0, 1] += 1e-6  # breaks symmetry and row sums
    with pytest.raises(ValueError):
        MixingMatrix(bad).validate()
    neg = ok.w.copy()
    neg[0, 1], neg[1, 0] = -0.1, -0.1
    neg[0, 0] += 0.1
    neg[1, 1] += 0.1
    with pytest.raises(ValueError):
        MixingMatrix(neg).validate()


def test_text_round_trip_is_bitwise(tmp_path):
    for seed in range(10):
        m = metropolis_weights(generate_er_graph(8, 0.6, seed))
        path = tmp_path / f"w_{seed}.txt"
        save_mixing(m, path)
        back = load_mixing(path)
        assert np.array_equal(m.w, back.w)
        assert np.array_equal(m.w_tilde, back.w_tilde)


def test_mean_degree_of_default_ensemble():
    # ER(8, 0.6) conditioned on connectivity: expected degree near 4.2
    degs = [generate_er_graph(8, 0.6, seed).average_degree()
            for seed in range(200)]
    assert 3.7 <= float(np.mean(degs)) <= 5.3
