"""Orbit-weighted propagation matrices.

Each orbit count matrix ``O`` gets a self-connection ``C`` whose diagonal is
the node's largest orbit weight (1 for nodes without orbit edges), and is then
symmetrically normalized: ``L = F^-1/2 (O + C) F^-1/2`` with ``F`` the row
sums of ``O + C``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError


@dataclass(frozen=True)
class OrbitLaplacian:
    matrix: sp.csr_matrix
    orbit_id: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def self_connection(orbit_matrix: sp.spmatrix) -> sp.dia_matrix:
    n = orbit_matrix.shape[0]
    if n == 0:
        return sp.diags(np.zeros(0))
    row_max = np.asarray(sp.csr_matrix(orbit_matrix).max(axis=1).todense()).ravel()
    diag = np.where(row_max > 0, row_max, 1).astype(np.float64)
    return sp.diags(diag)


def normalized_laplacian(orbit_matrix: sp.spmatrix, self_conn: sp.spmatrix | None = None,
                         orbit_id: int = 0) -> OrbitLaplacian:
    if self_conn is None:
        self_conn = self_connection(orbit_matrix)
    modified = (sp.csr_matrix(orbit_matrix, dtype=np.float64) + self_conn).tocoo()
    freq = np.asarray(modified.sum(axis=1)).ravel()
    # the product F_i * F_j is commutative, so the result is exactly symmetric
    data = modified.data / np.sqrt(freq[modified.row] * freq[modified.col])
    return OrbitLaplacian(_csr(data, modified.row, modified.col, modified.shape), orbit_id)


def _csr(data, row, col, shape) -> sp.csr_matrix:
    m = sp.csr_matrix((data, (row, col)), shape=shape)
    m.sort_indices()
    return m


def build_laplacians(orbit_matrices: Iterable[sp.spmatrix]) -> list[OrbitLaplacian]:
    return [normalized_laplacian(m, orbit_id=k) for k, m in enumerate(orbit_matrices)]


def reinforce_laplacian(lap: OrbitLaplacian, r: np.ndarray) -> OrbitLaplacian:
    """Scale entry (i, j) by ``r[i] * r[j]``; the result is deliberately not renormalized."""
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (lap.shape[0],):
        raise DimensionError(f"reinforcement vector has shape {r.shape}, "
                             f"expected ({lap.shape[0]},)")
    m = lap.matrix.tocoo()
    return OrbitLaplacian(_csr(m.data * (r[m.row] * r[m.col]), m.row, m.col, m.shape),
                          lap.orbit_id)


def update_reinforcement(r: np.ndarray, trusted_nodes, beta: float) -> np.ndarray:
    if not beta > 1:
        raise ValueError(f"reinforcement rate must exceed 1, got {beta}")
    out = np.array(r, dtype=np.float64, copy=True)
    idx = np.fromiter(trusted_nodes, dtype=np.int64)
    out[idx] *= beta
    return out
