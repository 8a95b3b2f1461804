"""Ranking metrics against ground-truth anchors and ablation runs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .graph import GroundTruth


# Published full-pipeline results on the real benchmark pairs, keyed by dataset.
# Printed next to local results when a user runs one of these datasets.
PUBLISHED_RESULTS: dict[str, dict[str, float]] = {
    "allmovie-imdb": {"p@1": 0.8436, "p@10": 0.9051, "MRR": 0.8574},
    "douban": {"p@1": 0.4651, "p@10": 0.8005, "MRR": 0.5766},
    "flickr-myspace": {"p@1": 0.0150, "p@10": 0.0487, "MRR": 0.0289},
    "econ-0.1": {"p@1": 0.9944},
    "bn-0.1": {"p@1": 0.9748},
}


def truth_ranks(scores: np.ndarray, truth: GroundTruth) -> np.ndarray:
    """1-based rank of each true target within its source row.

    Ties are resolved the way :func:`orbalign.aligner.predict` resolves them:
    equal scores are ordered by ascending target index.
    """
    if len(truth) == 0:
        raise ValueError("ground truth is empty")
    rows = scores[truth.source]
    true_scores = rows[np.arange(len(truth)), truth.target][:, None]
    idx = np.arange(scores.shape[1])[None, :]
    ahead = (rows > true_scores) | ((rows == true_scores) & (idx < truth.target[:, None]))
    return ahead.sum(axis=1) + 1


def precision_at_q(scores: np.ndarray, truth: GroundTruth, q: int) -> float:
    if q < 1:
        raise ValueError("q must be >= 1")
    return float(np.mean(truth_ranks(scores, truth) <= q))


def mrr(scores: np.ndarray, truth: GroundTruth) -> float:
    return float(np.mean(1.0 / truth_ranks(scores, truth)))


@dataclass
class MetricReport:
    precision_at: dict[int, float]
    mrr: float
    pair_count: int
    timings: dict[str, float] = field(default_factory=dict)
    variant: str = "HTC"

    @classmethod
    def from_scores(cls, scores: np.ndarray, truth: GroundTruth, qs: Sequence[int] = (1, 5, 10),
                    timings: dict[str, float] | None = None, variant: str = "HTC") -> "MetricReport":
        ranks = truth_ranks(scores, truth)
        return cls({int(q): float(np.mean(ranks <= q)) for q in sorted(qs)},
                   float(np.mean(1.0 / ranks)), len(truth), dict(timings or {}), variant)

    def to_json(self) -> str:
        d = asdict(self)
        d["precision_at"] = {str(k): v for k, v in self.precision_at.items()}
        return json.dumps(d, indent=2, sort_keys=True)

    def table(self, reference: dict[str, float] | None = None) -> str:
        """Human-readable table, optionally next to published reference numbers."""
        lines = [f"variant  {self.variant}", f"pairs    {self.pair_count}"]
        rows = [(f"p@{q}", v) for q, v in self.precision_at.items()] + [("MRR", self.mrr)]
        for name, value in rows:
            ref = reference.get(name) if reference else None
            tail = f"   (published {ref:.4f})" if ref is not None else ""
            lines.append(f"{name:<8} {value:.4f}{tail}")
        return "\n".join(lines)


def run_ablation(variant: str, dataset, cfg) -> MetricReport:
    """Run one ablation variant end to end and score it against ``dataset.truth``."""
    from .pipeline import align

    if dataset.truth is None or len(dataset.truth) == 0:
        raise ValueError("ablation runs need ground truth")
    out = align(dataset, cfg, variant=variant)
    return MetricReport.from_scores(out.result.final, dataset.truth, cfg.qs, out.timings, variant)
