"""Cross-graph scoring, trusted-pair refinement and orbit integration."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .encoder import EncoderParams, embed
from .spectral import OrbitLaplacian, reinforce_laplacian, update_reinforcement

log = logging.getLogger(__name__)


def pearson_similarity(h_s: np.ndarray, h_t: np.ndarray) -> np.ndarray:
    """Row-wise Pearson correlation between every source and target embedding.

    Rows with zero variance correlate 0 with everything.
    """
    if h_s.shape[1] != h_t.shape[1]:
        raise ValueError(f"embedding widths differ: {h_s.shape[1]} vs {h_t.shape[1]}")
    if h_s.shape[1] < 2:
        raise ValueError("correlation needs embeddings of dimension >= 2")

    def standardize(h):
        c = h - h.mean(axis=1, keepdims=True)
        norm = np.linalg.norm(c, axis=1, keepdims=True)
        return np.divide(c, norm, out=np.zeros_like(c), where=norm > 0)

    corr = standardize(h_s) @ standardize(h_t).T
    return np.clip(corr, -1.0, 1.0)


def _top_m_mean(values: np.ndarray, m: int) -> np.ndarray:
    n = values.shape[1]
    if m == n:
        return values.mean(axis=1)
    top = np.partition(values, n - m, axis=1)[:, n - m:]
    return top.mean(axis=1)


def lisi(corr: np.ndarray, m: int) -> np.ndarray:
    """Hubness-corrected score ``2 corr - D_t(source) - D_s(target)``.

    ``D_t`` of a source node is its mean correlation with its ``m`` most
    correlated target nodes; ``D_s`` is the same from the target side.
    """
    n_s, n_t = corr.shape
    if not 1 <= m <= min(n_s, n_t):
        raise ValueError(f"neighbourhood size m={m} outside [1, {min(n_s, n_t)}]")
    d_t = _top_m_mean(corr, m)
    d_s = _top_m_mean(corr.T, m)
    return 2.0 * corr - d_t[:, None] - d_s[None, :]


def trusted_pairs(scores: np.ndarray) -> list[tuple[int, int]]:
    """Mutual unique argmax pairs. A tied maximum disqualifies the row or column."""
    if scores.size == 0:
        return []
    row_max = scores.max(axis=1)
    col_max = scores.max(axis=0)
    row_hits = scores == row_max[:, None]
    col_hits = scores == col_max[None, :]
    row_unique = row_hits.sum(axis=1) == 1
    col_unique = col_hits.sum(axis=0) == 1
    row_arg = scores.argmax(axis=1)
    pairs = []
    for i in np.flatnonzero(row_unique):
        j = row_arg[i]
        if col_unique[j] and col_hits[i, j]:
            pairs.append((int(i), int(j)))
    return pairs


@dataclass
class FineTuneResult:
    scores: np.ndarray
    trusted_count: int           # best count seen, the value used for orbit weighting
    initial_count: int           # count on the untouched embeddings
    iterations: int
    counts: list[int] = field(default_factory=list)
    trusted: list[tuple[int, int]] = field(default_factory=list)


def fine_tune(lap_s: OrbitLaplacian, lap_t: OrbitLaplacian, x_s: np.ndarray, x_t: np.ndarray,
              params: EncoderParams, beta: float = 1.1, m: int = 20,
              h_s: np.ndarray | None = None, h_t: np.ndarray | None = None) -> FineTuneResult:
    """Repeatedly boost the aggregation weight of trusted nodes while the
    number of trusted pairs keeps growing; weights stay frozen.

    Returns the score matrix of the iteration with the most trusted pairs.
    """
    if not beta > 1:
        raise ValueError(f"reinforcement rate must exceed 1, got {beta}")
    if h_s is None:
        h_s = embed(lap_s, x_s, params)
    if h_t is None:
        h_t = embed(lap_t, x_t, params)
    m = min(m, lap_s.shape[0], lap_t.shape[0])
    r_s = np.ones(lap_s.shape[0])
    r_t = np.ones(lap_t.shape[0])
    previous = 0
    counts: list[int] = []
    best = None
    while True:
        scores = lisi(pearson_similarity(h_s, h_t), m)
        pairs = trusted_pairs(scores)
        counts.append(len(pairs))
        if best is None or len(pairs) > len(best[1]):
            best = (scores, pairs)
        if len(pairs) <= previous:
            break
        previous = len(pairs)
        r_s = update_reinforcement(r_s, (i for i, _ in pairs), beta)
        r_t = update_reinforcement(r_t, (j for _, j in pairs), beta)
        h_s = embed(reinforce_laplacian(lap_s, r_s), x_s, params)
        h_t = embed(reinforce_laplacian(lap_t, r_t), x_t, params)
    return FineTuneResult(best[0], len(best[1]), counts[0], len(counts), counts, best[1])


def initial_scores(h_s: np.ndarray, h_t: np.ndarray, m: int = 20) -> FineTuneResult:
    """Scoring without refinement: raw correlation, trusted count from LISI."""
    corr = pearson_similarity(h_s, h_t)
    m = min(m, *corr.shape)
    count = len(trusted_pairs(lisi(corr, m)))
    return FineTuneResult(corr, count, count, 0, [count])


@dataclass
class AlignmentResult:
    orbit_scores: list[np.ndarray]
    trusted_counts: list[int]
    weights: np.ndarray
    final: np.ndarray
    details: list[FineTuneResult] = field(default_factory=list, repr=False)


def orbit_weights(trusted_counts: Sequence[int]) -> np.ndarray:
    counts = np.asarray(trusted_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return np.full(len(counts), 1.0 / len(counts))
    return counts / total


def integrate(results: Sequence[FineTuneResult]) -> AlignmentResult:
    if not results:
        raise ValueError("need at least one orbit result")
    counts = [r.trusted_count for r in results]
    gamma = orbit_weights(counts)
    final = np.zeros_like(results[0].scores)
    for g, r in zip(gamma, results):
        final += g * r.scores
    return AlignmentResult([r.scores for r in results], counts, gamma, final, list(results))


def ranking(scores: np.ndarray) -> np.ndarray:
    """Targets of each source row sorted by descending score, ties by ascending index."""
    return np.argsort(-scores, axis=1, kind="stable")


def predict(scores: np.ndarray, q: int) -> np.ndarray:
    if q < 1:
        raise ValueError("q must be >= 1")
    n_t = scores.shape[1]
    if q > n_t:
        log.warning("q=%d exceeds the %d target nodes; clamping", q, n_t)
        q = n_t
    return ranking(scores)[:, :q]
