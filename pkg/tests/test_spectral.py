import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from conftest import er_graph
from orbalign.errors import DimensionError
from orbalign.orbits import count_orbits_fast
from orbalign.spectral import (normalized_laplacian, reinforce_laplacian, self_connection,
                               update_reinforcement)


def test_self_connection_uses_row_max():
    o = sp.csr_matrix(np.array([[0, 3, 5, 1], [3, 0, 0, 0], [5, 0, 0, 0], [1, 0, 0, 0]]))
    c = self_connection(o).toarray()
    assert c[0, 0] == 5
    assert np.count_nonzero(c - np.diag(np.diag(c))) == 0


def test_self_connection_isolated_node():
    o = sp.csr_matrix(np.array([[0, 2, 0], [2, 0, 0], [0, 0, 0]]))
    assert self_connection(o).toarray()[2, 2] == 1


def test_self_connection_binary_is_identity(rng):
    g = er_graph(15, 0.3, rng)
    np.testing.assert_array_equal(self_connection(g.adjacency()).toarray(), np.eye(15))


def test_single_isolated_node():
    lap = normalized_laplacian(sp.csr_matrix((1, 1), dtype=np.int64))
    np.testing.assert_array_equal(lap.toarray(), [[1.0]])


def test_two_nodes_with_weight_four():
    o = sp.csr_matrix(np.array([[0, 4], [4, 0]]))
    np.testing.assert_allclose(normalized_laplacian(o).toarray(), [[0.5, 0.5], [0.5, 0.5]],
                               rtol=0, atol=1e-15)


def test_orbit0_matches_gcn_propagation(rng):
    g = er_graph(30, 0.15, rng)
    a = g.adjacency().toarray().astype(float) + np.eye(30)
    d = a.sum(axis=1)
    expected = a / np.sqrt(np.outer(d, d))
    lap = normalized_laplacian(count_orbits_fast(g)[0])
    np.testing.assert_allclose(lap.toarray(), expected, rtol=0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 20), st.floats(0.1, 0.8), st.integers(0, 2**32 - 1))
def test_laplacians_symmetric_positive_diag_spectrum_bounded(n, p, seed):
    g = er_graph(n, p, np.random.default_rng(seed))
    for k, o in enumerate(count_orbits_fast(g)):
        lap = normalized_laplacian(o, orbit_id=k).toarray()
        np.testing.assert_array_equal(lap, lap.T)
        assert np.all(np.isfinite(lap)) and np.all(lap >= 0)
        assert np.all(np.diag(lap) > 0)
        eig = np.linalg.eigvalsh(lap)
        assert eig.min() >= -1 - 1e-12 and eig.max() <= 1 + 1e-12


def test_reinforce_identity(rng):
    lap = normalized_laplacian(er_graph(8, 0.4, rng).adjacency())
    out = reinforce_laplacian(lap, np.ones(8))
    np.testing.assert_array_equal(out.toarray(), lap.toarray())


def test_reinforce_single_node(rng):
    lap = normalized_laplacian(er_graph(8, 0.5, rng).adjacency())
    r = np.ones(8)
    r[3] = 1.1
    out = reinforce_laplacian(lap, r).toarray()
    base = lap.toarray()
    expected = base.copy()
    expected[3, :] *= 1.1
    expected[:, 3] *= 1.1
    np.testing.assert_allclose(out, expected, rtol=1e-15)
    assert out[3, 3] == pytest.approx(base[3, 3] * 1.21, rel=1e-15)
    np.testing.assert_array_equal(out, out.T)


def test_reinforce_twice_compounds():
    lap = normalized_laplacian(sp.csr_matrix(np.array([[0, 1], [1, 0]])))
    r = update_reinforcement(update_reinforcement(np.ones(2), [0], 1.1), [0], 1.1)
    out = reinforce_laplacian(lap, r).toarray()
    assert out[0, 1] == pytest.approx(lap.toarray()[0, 1] * 1.21, rel=1e-14)


def test_reinforce_length_mismatch():
    lap = normalized_laplacian(sp.csr_matrix(np.array([[0, 1], [1, 0]])))
    with pytest.raises(DimensionError):
        reinforce_laplacian(lap, np.ones(3))


def test_update_reinforcement():
    np.testing.assert_allclose(update_reinforcement(np.ones(3), {0}, 1.1), [1.1, 1, 1])
    np.testing.assert_array_equal(update_reinforcement(np.ones(3), set(), 1.1), np.ones(3))
    with pytest.raises(ValueError):
        update_reinforcement(np.ones(3), {0}, 0.9)
