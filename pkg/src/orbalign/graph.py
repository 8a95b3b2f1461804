"""Graph, attribute and ground-truth containers plus their text-file formats.

Edge lists are whitespace separated id pairs with ``#`` comments. Attribute
tables are comma or tab separated numbers with an optional header line.
Ground-truth files hold one ``source target`` id pair per line.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, ParseError, ValidationError

log = logging.getLogger(__name__)

IdPolicy = Literal["remap-dense", "require-dense"]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..node_count-1``.

    ``edges`` is an ``(e, 2)`` int64 array with ``edges[:, 0] < edges[:, 1]``,
    sorted lexicographically. Use :meth:`from_edges` to build one from
    arbitrary pairs.
    """

    node_count: int
    edges: np.ndarray
    node_labels: Mapping[str, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        e = self.edges
        if e.ndim != 2 or e.shape[1] != 2:
            raise DimensionError(f"edges must have shape (e, 2), got {e.shape}")
        if len(e):
            if e.min() < 0 or e.max() >= self.node_count:
                raise ValidationError("edge endpoint outside [0, node_count)")
            if np.any(e[:, 0] >= e[:, 1]):
                raise ValidationError("edges must be stored as (i, j) with i < j")
            if len(np.unique(e[:, 0] * self.node_count + e[:, 1])) != len(e):
                raise ValidationError("duplicate edges")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.node_count, self.edges.tobytes()))

    @classmethod
    def from_edges(cls, node_count: int, pairs: Iterable[tuple[int, int]] | np.ndarray,
                   node_labels: Mapping[str, int] | None = None) -> "Graph":
        """Symmetrize, drop self-loops and deduplicate ``pairs``."""
        arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                         dtype=np.int64).reshape(-1, 2)
        arr = arr[arr[:, 0] != arr[:, 1]]
        arr = np.sort(arr, axis=1)
        if len(arr):
            arr = np.unique(arr, axis=0)
        return cls(int(node_count), _frozen(np.ascontiguousarray(arr)), node_labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges}

    def adjacency(self, dtype=np.int64) -> sp.csr_matrix:
        n = self.node_count
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(i), dtype=dtype)
        a = sp.csr_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(n, n))
        a.sort_indices()
        return a

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.node_count)

    def relabel(self, perm: np.ndarray) -> "Graph":
        """Return the graph with node ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        return Graph.from_edges(self.node_count, perm[self.edges])


@dataclass(frozen=True)
class GroundTruth:
    """One-to-one anchor pairs ``(source_index, target_index)``."""

    source: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        if self.source.shape != self.target.shape:
            raise DimensionError("source and target index arrays differ in length")
        if len(np.unique(self.source)) != len(self.source):
            raise ValidationError("a source node appears in more than one pair")
        if len(np.unique(self.target)) != len(self.target):
            raise ValidationError("a target node appears in more than one pair")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "GroundTruth":
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(_frozen(arr[:, 0].copy()), _frozen(arr[:, 1].copy()))

    @property
    def pairs(self) -> set[tuple[int, int]]:
        return {(int(s), int(t)) for s, t in zip(self.source, self.target)}

    def __len__(self) -> int:
        return len(self.source)


@dataclass(frozen=True)
class Dataset:
    """A source/target pair of attributed graphs with optional anchors."""

    source: Graph
    target: Graph
    source_attrs: np.ndarray
    target_attrs: np.ndarray
    truth: GroundTruth | None = None

    def __post_init__(self):
        check_attributes(self.source_attrs, self.source)
        check_attributes(self.target_attrs, self.target)
        if self.source_attrs.shape[1] != self.target_attrs.shape[1]:
            raise DimensionError(
                f"attribute widths differ: {self.source_attrs.shape[1]} vs "
                f"{self.target_attrs.shape[1]}")


def check_attributes(values: np.ndarray, graph: Graph) -> None:
    if values.ndim != 2:
        raise DimensionError("attribute matrix must be 2-D")
    if values.shape[0] != graph.node_count:
        raise DimensionError(
            f"attribute matrix has {values.shape[0]} rows, graph has "
            f"{graph.node_count} nodes")


def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield line_no, line


def load_edge_list(path: str | os.PathLike, id_policy: IdPolicy = "require-dense",
                   num_nodes: int | None = None) -> Graph:
    """Read an undirected edge list.

    Under ``require-dense`` ids must be non-negative integers and the node
    count is ``max id + 1`` (or ``num_nodes`` if larger ids are absent).
    Under ``remap-dense`` ids are arbitrary tokens mapped to ``0..n-1`` in the
    order they first appear; the mapping is kept in ``node_labels``.
    """
    if id_policy not in ("remap-dense", "require-dense"):
        raise ValueError(f"unknown id policy {id_policy!r}")
    labels: dict[str, int] = {}
    pairs = []
    for line_no, line in _content_lines(path):
        parts = line.split()
        if len(parts) < 2:
            raise ParseError(path, line_no, f"expected two node ids, got {line!r}")
        a, b = parts[0], parts[1]
        if id_policy == "remap-dense":
            i = labels.setdefault(a, len(labels))
            j = labels.setdefault(b, len(labels))
        else:
            try:
                i, j = int(a), int(b)
            except ValueError:
                raise ParseError(path, line_no, f"non-integer node id in {line!r}") from None
            if i < 0 or j < 0:
                raise ParseError(path, line_no, "negative node id")
        if i == j:
            log.warning("%s:%d: dropping self-loop on node %s", path, line_no, a)
            continue
        pairs.append((i, j))
    if id_policy == "remap-dense":
        n = len(labels)
        if num_nodes is not None and num_nodes != n:
            raise DimensionError(f"edge list names {n} nodes, expected {num_nodes}")
        return Graph.from_edges(n, pairs, node_labels=labels)
    n = max((max(p) for p in pairs), default=-1) + 1
    if num_nodes is None:
        num_nodes = _node_count_hint(path)
    if num_nodes is not None:
        if num_nodes < n:
            raise DimensionError(f"edge list references node {n - 1} >= num_nodes={num_nodes}")
        n = num_nodes
    return Graph.from_edges(n, pairs)


def _node_count_hint(path) -> int | None:
    # write_edge_list records the node count so isolated nodes survive a round trip
    with open(path, encoding="utf-8") as fh:
        parts = fh.readline().split()
    if len(parts) == 3 and parts[:2] == ["#", "nodes"] and parts[2].isdigit():
        return int(parts[2])
    return None


def _split_row(line: str) -> list[str]:
    if "\t" in line:
        return [c.strip() for c in line.split("\t")]
    if "," in line:
        return [c.strip() for c in line.split(",")]
    return line.split()


def _is_numeric(cells: list[str]) -> bool:
    try:
        [float(c) for c in cells]
    except ValueError:
        return False
    return True


def load_attributes(path: str | os.PathLike, graph: Graph, id_column: bool = False,
                    normalize: bool = False) -> np.ndarray:
    """Read a dense attribute table for ``graph``.

    Rows are positional (row ``i`` belongs to node ``i``) unless
    ``id_column`` is set, in which case the first cell of each row is the
    node's external id and rows are placed through ``graph.node_labels``.
    A first line that does not parse as numbers is treated as a header.
    """
    rows: list[list[float]] = []
    ids: list[str] = []
    first = True
    for line_no, line in _content_lines(path):
        cells = _split_row(line)
        if id_column:
            node_id, cells = cells[0], cells[1:]
        if first:
            first = False
            if not _is_numeric(cells):
                continue
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ParseError(path, line_no, f"non-numeric cell in {line!r}") from None
        if id_column:
            ids.append(node_id)
        if len(rows[-1]) != len(rows[0]):
            raise ParseError(path, line_no,
                             f"expected {len(rows[0])} columns, got {len(rows[-1])}")
    if len(rows) != graph.node_count:
        raise DimensionError(
            f"{path}: {len(rows)} attribute rows for a graph with {graph.node_count} nodes")
    values = np.asarray(rows, dtype=np.float64).reshape(len(rows), -1)
    if id_column:
        order = np.empty(len(ids), dtype=np.int64)
        for r, node_id in enumerate(ids):
            if graph.node_labels is not None:
                if node_id not in graph.node_labels:
                    raise ValidationError(f"{path}: unknown node id {node_id!r}")
                order[r] = graph.node_labels[node_id]
            else:
                order[r] = int(node_id)
        if len(np.unique(order)) != len(order) or order.min(initial=0) < 0 \
                or order.max(initial=-1) >= graph.node_count:
            raise ValidationError(f"{path}: attribute ids do not cover the graph's nodes")
        placed = np.empty_like(values)
        placed[order] = values
        values = placed
    if normalize:
        values = normalize_rows(values)
    return _frozen(values)


def normalize_rows(values: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm; all-zero rows are left as zeros."""
    norms = np.linalg.norm(values, axis=1, keepdims=True)
    return values / np.where(norms > 0, norms, 1.0)


def load_groundtruth(path: str | os.PathLike, source_labels: Mapping[str, int] | None = None,
                     target_labels: Mapping[str, int] | None = None) -> GroundTruth:
    pairs = []
    for line_no, line in _content_lines(path):
        parts = line.split()
        if len(parts) < 2:
            raise ParseError(path, line_no, f"expected two ids, got {line!r}")
        try:
            s = source_labels[parts[0]] if source_labels is not None else int(parts[0])
            t = target_labels[parts[1]] if target_labels is not None else int(parts[1])
        except KeyError as exc:
            raise ParseError(path, line_no, f"unknown node id {exc.args[0]!r}") from None
        except ValueError:
            raise ParseError(path, line_no, f"non-integer id in {line!r}") from None
        pairs.append((s, t))
    try:
        return GroundTruth.from_pairs(pairs)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def write_edge_list(path: str | os.PathLike, graph: Graph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes {graph.node_count}\n")
        for i, j in graph.edges:
            fh.write(f"{i} {j}\n")


def write_attributes(path: str | os.PathLike, values: np.ndarray) -> None:
    np.savetxt(path, values, delimiter=",", fmt="%.17g")


def write_groundtruth(path: str | os.PathLike, truth: GroundTruth) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s, t in zip(truth.source, truth.target):
            fh.write(f"{s} {t}\n")
