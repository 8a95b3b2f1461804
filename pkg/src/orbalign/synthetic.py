"""Noisy copies of a graph and fully synthetic attributed graph pairs."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import (Dataset, Graph, GroundTruth, write_attributes, write_edge_list,
                    write_groundtruth)


@dataclass(frozen=True)
class NoiseSpec:
    removal_ratio: float = 0.0
    permute: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.removal_ratio < 1.0:
            raise ValueError(f"removal ratio must lie in [0, 1), got {self.removal_ratio}")


def make_noisy_copy(graph: Graph, attrs: np.ndarray, spec: NoiseSpec,
                    rng: np.random.Generator | None = None):
    """Drop ``floor(ratio * e)`` uniformly chosen edges, then optionally shuffle node ids.

    Returns ``(target_graph, target_attrs, truth)`` where truth maps each
    source node to its (possibly renamed) copy.
    """
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    e = graph.edge_count
    n_remove = int(np.floor(spec.removal_ratio * e))
    keep = np.ones(e, dtype=bool)
    if n_remove:
        keep[rng.choice(e, size=n_remove, replace=False)] = False
    edges = graph.edges[keep]
    n = graph.node_count
    perm = rng.permutation(n) if spec.permute else np.arange(n)
    target = Graph.from_edges(n, perm[edges])
    target_attrs = np.empty_like(attrs)
    target_attrs[perm] = attrs
    truth = GroundTruth(np.arange(n), perm.astype(np.int64))
    return target, target_attrs, truth


def random_graph(n: int, edge_prob: float, rng: np.random.Generator) -> Graph:
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < edge_prob
    return Graph.from_edges(n, np.column_stack([iu[keep], ju[keep]]))


def make_random_attributed_pair(n: int, edge_prob: float, attr_dim: int = 16,
                                spec: NoiseSpec = NoiseSpec(), levels: int = 0) -> Dataset:
    """Erdos-Renyi source graph with random attributes plus a noisy copy.

    Attributes are standard normal, or when ``levels > 0`` integers drawn
    uniformly from ``0..levels-1`` (coarse, non-identifying features).
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 0.0 < edge_prob < 1.0:
        raise ValueError("edge probability must lie in (0, 1)")
    rng = np.random.default_rng(spec.seed)
    source = random_graph(n, edge_prob, rng)
    if levels > 0:
        attrs = rng.integers(0, levels, size=(n, attr_dim)).astype(np.float64)
    else:
        attrs = rng.standard_normal((n, attr_dim))
    target, target_attrs, truth = make_noisy_copy(source, attrs, spec, rng)
    return Dataset(source, target, attrs, target_attrs, truth)


def write_dataset(directory: str | os.PathLike, data: Dataset) -> dict[str, Path]:
    """Write a dataset in the plain-text ingestion formats; returns the file paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {"source": d / "source.edges", "target": d / "target.edges",
             "attrs_source": d / "source_attrs.csv", "attrs_target": d / "target_attrs.csv",
             "truth": d / "truth.txt"}
    write_edge_list(paths["source"], data.source)
    write_edge_list(paths["target"], data.target)
    write_attributes(paths["attrs_source"], data.source_attrs)
    write_attributes(paths["attrs_target"], data.target_attrs)
    if data.truth is not None:
        write_groundtruth(paths["truth"], data.truth)
    return paths
