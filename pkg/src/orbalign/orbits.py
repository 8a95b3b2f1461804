"""Edge-orbit counting for induced graphlets on 2 to 4 nodes.

Orbit numbering (graphlets ordered by node count, then edge count)::

    0   edge                         (G0)
    1   3-path                       (G1)
    2   triangle                     (G2)
    3   4-path, end edges            (G3)
    4   4-path, middle edge          (G3)
    5   claw                         (G4)
    6   4-cycle                      (G5)
    7   paw, pendant edge            (G6)
    8   paw, triangle edges touching the pendant's attachment node
    9   paw, triangle edge opposite the attachment node
    10  diamond, perimeter edges     (G7)
    11  diamond, chord               (G7)
    12  4-clique                     (G8)

``count_orbits_bruteforce`` enumerates every node subset and classifies its
induced subgraph; ``count_orbits_fast`` derives the same numbers per edge from
how the other nodes split into common / exclusive neighbours of the edge's
endpoints.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .graph import Graph

ORBIT_COUNT = 13


@dataclass(frozen=True)
class Graphlet:
    name: str
    node_count: int
    # canonical edges on nodes 0..node_count-1, each tagged with its edge orbit
    edges: tuple[tuple[int, int, int], ...]

    @property
    def orbits(self) -> tuple[int, ...]:
        return tuple(sorted({o for _, _, o in self.edges}))


GRAPHLETS: tuple[Graphlet, ...] = (
    Graphlet("edge", 2, ((0, 1, 0),)),
    Graphlet("path3", 3, ((0, 1, 1), (1, 2, 1))),
    Graphlet("triangle", 3, ((0, 1, 2), (1, 2, 2), (0, 2, 2))),
    Graphlet("path4", 4, ((0, 1, 3), (1, 2, 4), (2, 3, 3))),
    Graphlet("claw", 4, ((0, 1, 5), (0, 2, 5), (0, 3, 5))),
    Graphlet("cycle4", 4, ((0, 1, 6), (1, 2, 6), (2, 3, 6), (0, 3, 6))),
    Graphlet("paw", 4, ((2, 3, 7), (0, 2, 8), (1, 2, 8), (0, 1, 9))),
    Graphlet("diamond", 4, ((0, 2, 10), (0, 3, 10), (1, 2, 10), (1, 3, 10), (2, 3, 11))),
    Graphlet("clique4", 4, ((0, 1, 12), (0, 2, 12), (0, 3, 12), (1, 2, 12),
                            (1, 3, 12), (2, 3, 12))),
)

ORBIT_GRAPHLET: dict[int, str] = {o: g.name for g in GRAPHLETS for o in g.orbits}


@dataclass(frozen=True)
class OrbitMatrixSet:
    """Per-orbit symmetric sparse count matrices; ``matrices[k]`` is orbit ``k``."""

    matrices: tuple[sp.csr_matrix, ...]

    @property
    def orbit_count(self) -> int:
        return len(self.matrices)

    @property
    def node_count(self) -> int:
        return self.matrices[0].shape[0] if self.matrices else 0

    def __len__(self) -> int:
        return len(self.matrices)

    def __getitem__(self, k: int) -> sp.csr_matrix:
        return self.matrices[k]

    def __iter__(self):
        return iter(self.matrices)

    def equals(self, other: "OrbitMatrixSet") -> bool:
        if self.orbit_count != other.orbit_count:
            return False
        return all(a.shape == b.shape and (a != b).nnz == 0
                   for a, b in zip(self.matrices, other.matrices))

    def nonzero_counts(self) -> list[int]:
        """Number of edges with a non-zero count, per orbit."""
        return [m.nnz // 2 for m in self.matrices]

    def edge_table(self, graph: Graph) -> np.ndarray:
        """``(e, 2 + K)`` int64 table: endpoints followed by per-orbit counts."""
        i, j = graph.edges[:, 0], graph.edges[:, 1]
        cols = [np.asarray(m[i, j]).ravel() for m in self.matrices]
        return np.column_stack([i, j, *cols]).astype(np.int64) if len(i) else \
            np.zeros((0, 2 + self.orbit_count), dtype=np.int64)


def restrict_orbits(orbits: OrbitMatrixSet, first_k: int) -> OrbitMatrixSet:
    if not 1 <= first_k <= orbits.orbit_count:
        raise ValueError(f"first_k must lie in [1, {orbits.orbit_count}], got {first_k}")
    return OrbitMatrixSet(orbits.matrices[:first_k])


def _assemble(graph: Graph, counts: np.ndarray) -> OrbitMatrixSet:
    """Turn an ``(e, 13)`` per-edge count array into symmetric sparse matrices."""
    n = graph.node_count
    i, j = graph.edges[:, 0], graph.edges[:, 1]
    rows, cols = np.r_[i, j], np.r_[j, i]
    mats = []
    for k in range(ORBIT_COUNT):
        c = counts[:, k]
        m = sp.csr_matrix((np.r_[c, c].astype(np.int64), (rows, cols)), shape=(n, n))
        m.eliminate_zeros()
        m.sort_indices()
        mats.append(m)
    return OrbitMatrixSet(tuple(mats))


# -- exhaustive oracle -------------------------------------------------------

_PAIRS4 = np.array(list(itertools.combinations(range(4), 2)))


def _combination_batches(n: int, r: int, batch: int = 200_000) -> Iterator[np.ndarray]:
    it = itertools.combinations(range(n), r)
    while True:
        chunk = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, batch)),
                            dtype=np.int64)
        if not len(chunk):
            return
        yield chunk.reshape(-1, r)


def _classify4(present: np.ndarray, deg_a: np.ndarray, deg_b: np.ndarray,
               n_edges: np.ndarray, deg_max: np.ndarray) -> np.ndarray:
    """Orbit id of each of the 6 node pairs of each 4-subset (-1 = not an orbit edge)."""
    lo = np.minimum(deg_a, deg_b)
    hi = np.maximum(deg_a, deg_b)
    ne = n_edges[:, None]
    out = np.full(present.shape, -1, dtype=np.int64)
    path4 = (ne == 3) & (deg_max[:, None] == 2)
    claw = (ne == 3) & (deg_max[:, None] == 3)
    out = np.where(present & path4 & (lo == 1), 3, out)
    out = np.where(present & path4 & (lo == 2), 4, out)
    out = np.where(present & claw, 5, out)
    cycle = (ne == 4) & (deg_max[:, None] == 2)
    paw = (ne == 4) & (deg_max[:, None] == 3)
    out = np.where(present & cycle, 6, out)
    out = np.where(present & paw & (lo == 1), 7, out)
    out = np.where(present & paw & (lo == 2) & (hi == 3), 8, out)
    out = np.where(present & paw & (lo == 2) & (hi == 2), 9, out)
    diamond = ne == 5
    out = np.where(present & diamond & (lo == 3), 11, out)
    out = np.where(present & diamond & (lo == 2), 10, out)
    out = np.where(present & (ne == 6), 12, out)
    return out


def count_orbits_bruteforce(graph: Graph) -> OrbitMatrixSet:
    """Reference counter: classify the induced subgraph of every 3- and 4-subset.

    Cost grows as n^4, so this is meant for small graphs and for checking
    :func:`count_orbits_fast`.
    """
    n, e = graph.node_count, graph.edge_count
    counts = np.zeros((e, ORBIT_COUNT), dtype=np.int64)
    if e == 0:
        return _assemble(graph, counts)
    adj = graph.adjacency().toarray().astype(bool)
    eid = np.full((n, n), -1, dtype=np.int64)
    eid[graph.edges[:, 0], graph.edges[:, 1]] = np.arange(e)
    eid[graph.edges[:, 1], graph.edges[:, 0]] = np.arange(e)
    counts[:, 0] = 1

    for combo in _combination_batches(n, 3):
        a, b, c = combo[:, 0], combo[:, 1], combo[:, 2]
        pairs = [(a, b), (b, c), (a, c)]
        present = np.column_stack([adj[x, y] for x, y in pairs])
        ne = present.sum(axis=1)
        for p, (x, y) in enumerate(pairs):
            for edges_needed, orbit in ((2, 1), (3, 2)):
                sel = present[:, p] & (ne == edges_needed)
                np.add.at(counts, (eid[x[sel], y[sel]], orbit), 1)

    if n >= 4:
        for combo in _combination_batches(n, 4):
            x = combo[:, _PAIRS4[:, 0]]
            y = combo[:, _PAIRS4[:, 1]]
            present = adj[x, y]
            ne = present.sum(axis=1)
            keep = ne >= 3
            if not keep.any():
                continue
            combo, x, y, present, ne = combo[keep], x[keep], y[keep], present[keep], ne[keep]
            deg = np.zeros((len(combo), 4), dtype=np.int64)
            for p, (s, t) in enumerate(_PAIRS4):
                deg[:, s] += present[:, p]
                deg[:, t] += present[:, p]
            # three edges with an isolated node is a triangle, not a graphlet
            connected = deg.min(axis=1) > 0
            deg_a = deg[:, _PAIRS4[:, 0]]
            deg_b = deg[:, _PAIRS4[:, 1]]
            orbit = _classify4(present & connected[:, None], deg_a, deg_b, ne, deg.max(axis=1))
            sel = orbit >= 0
            np.add.at(counts, (eid[x[sel], y[sel]], orbit[sel]), 1)
    return _assemble(graph, counts)


# -- combinatorial counter ---------------------------------------------------

def _row_sum(m: sp.spmatrix) -> np.ndarray:
    return np.asarray(m.sum(axis=1)).ravel().astype(np.int64)


def _edge_stats(adj: sp.csr_matrix, deg: np.ndarray, us: np.ndarray, vs: np.ndarray):
    """Neighbourhood class statistics for the edges ``(us[r], vs[r])``.

    For an edge (u, v) the remaining nodes split into T (adjacent to both),
    Su / Sv (adjacent to u only / v only) and the rest. Every connected
    4-node set through (u, v) is fixed by which classes its two other nodes
    fall in and whether they are adjacent, so all counts follow from class
    sizes, edge counts within and between classes, and degree sums.
    """
    n = adj.shape[0]
    rows = np.arange(len(us))
    ev = sp.csr_matrix((np.ones(len(us), dtype=np.int64), (rows, vs)), shape=(len(us), n))
    eu = sp.csr_matrix((np.ones(len(us), dtype=np.int64), (rows, us)), shape=(len(us), n))
    nu = adj[us] - ev
    nv = adj[vs] - eu
    t_set = nu.multiply(nv).tocsr()
    su = (nu - t_set).tocsr()
    sv = (nv - t_set).tocsr()
    s_set = (su + sv).tocsr()

    t_adj = t_set @ adj
    su_adj = su @ adj
    sv_adj = sv @ adj
    stats = {
        "t": _row_sum(t_set),
        "a": _row_sum(su),
        "b": _row_sum(sv),
        "e_tt": _row_sum(t_adj.multiply(t_set)) // 2,
        "e_ts": _row_sum(t_adj.multiply(s_set)),
        "e_ss_same": (_row_sum(su_adj.multiply(su)) + _row_sum(sv_adj.multiply(sv))) // 2,
        "e_su_sv": _row_sum(su_adj.multiply(sv)),
        "deg_t": t_set @ deg,
        "deg_s": s_set @ deg,
    }
    return stats


def count_orbits_fast(graph: Graph, chunk_edges: int = 50_000) -> OrbitMatrixSet:
    """Count all 13 edge orbits in O(e * D^2) with sparse neighbourhood algebra."""
    e = graph.edge_count
    counts = np.zeros((e, ORBIT_COUNT), dtype=np.int64)
    if e == 0:
        return _assemble(graph, counts)
    adj = graph.adjacency()
    deg = graph.degrees().astype(np.int64)
    for start in range(0, e, chunk_edges):
        sl = slice(start, min(start + chunk_edges, e))
        st = _edge_stats(adj, deg, graph.edges[sl, 0], graph.edges[sl, 1])
        t, a, b = st["t"], st["a"], st["b"]
        c = counts[sl]
        c[:, 0] = 1
        c[:, 1] = a + b
        c[:, 2] = t
        # both extra nodes adjacent to u and v
        c[:, 12] = st["e_tt"]
        c[:, 11] = t * (t - 1) // 2 - st["e_tt"]
        # one common neighbour, one exclusive neighbour
        c[:, 10] = st["e_ts"]
        c[:, 8] = t * (a + b) - st["e_ts"]
        # two exclusive neighbours of the same endpoint
        c[:, 7] = st["e_ss_same"]
        c[:, 5] = a * (a - 1) // 2 + b * (b - 1) // 2 - st["e_ss_same"]
        # one exclusive neighbour of each endpoint
        c[:, 6] = st["e_su_sv"]
        c[:, 4] = a * b - st["e_su_sv"]
        # a neighbour of the edge plus a node two hops out
        c[:, 9] = st["deg_t"] - 2 * t - 2 * st["e_tt"] - st["e_ts"]
        c[:, 3] = (st["deg_s"] - (a + b) - st["e_ts"] - 2 * st["e_ss_same"]
                   - 2 * st["e_su_sv"])
    return _assemble(graph, counts)


def count_orbits(graph: Graph, oracle: bool = False) -> OrbitMatrixSet:
    return count_orbits_bruteforce(graph) if oracle else count_orbits_fast(graph)


def write_orbit_table(path: str | os.PathLike, graph: Graph, orbits: OrbitMatrixSet,
                      labels: list[str] | None = None) -> None:
    """Per-edge debug dump: two endpoint ids then one count column per orbit."""
    table = orbits.edge_table(graph)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(["source", "target"] + [f"orbit{k}" for k in
                                                   range(orbits.orbit_count)]) + "\n")
        for row in table:
            ids = [labels[row[0]], labels[row[1]]] if labels else [str(row[0]), str(row[1])]
            fh.write("\t".join(ids + [str(v) for v in row[2:]]) + "\n")
