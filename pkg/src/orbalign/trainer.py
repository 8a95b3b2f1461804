"""Multi-orbit training: one Adam step per epoch on the loss summed over all orbits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, TextIO

import numpy as np

from .encoder import Adam, EncoderParams, Embeddings, embed, objective
from .errors import DimensionError, TrainingError
from .spectral import OrbitLaplacian


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    hidden_dims: tuple[int, ...] = (200, 200)
    seed: int = 0
    activation: str = "tanh"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.hidden_dims or any(d < 1 for d in self.hidden_dims):
            raise ValueError("layer widths must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")


@dataclass
class TrainResult:
    params: EncoderParams
    embeddings: Embeddings
    history: list[float] = field(default_factory=list)  # total loss before each step
    rng: np.random.Generator | None = field(default=None, repr=False)


def train(laps_s: Sequence[OrbitLaplacian], laps_t: Sequence[OrbitLaplacian],
          x_s: np.ndarray, x_t: np.ndarray, cfg: TrainConfig,
          progress: TextIO | None = None,
          on_epoch: Callable[[int, EncoderParams, Embeddings], None] | None = None,
          executor=None) -> TrainResult:
    """Fit the shared encoder so each orbit's embeddings reconstruct its Laplacian.

    ``progress`` receives one JSON line per epoch (epoch, per-orbit loss,
    total). ``on_epoch`` is called with the embeddings produced by the
    parameters of that epoch, before they are updated.
    """
    k = len(laps_s)
    if k != len(laps_t) or not 1 <= k <= 13:
        raise DimensionError(f"need 1..13 orbit Laplacians per graph, got {k} and {len(laps_t)}")
    if x_s.shape[1] != x_t.shape[1]:
        raise DimensionError("source and target attribute widths differ")
    rng = np.random.default_rng(cfg.seed)
    params = EncoderParams.initialize((x_s.shape[1], *cfg.hidden_dims), cfg.activation, rng)
    opt = Adam(lr=cfg.learning_rate)
    history = []
    for epoch in range(cfg.epochs):
        obj = objective(params, laps_s, laps_t, x_s, x_t, executor=executor)
        if not math.isfinite(obj.total) or not all(np.all(np.isfinite(g)) for g in obj.grads):
            raise TrainingError(epoch)
        history.append(obj.total)
        if progress is not None:
            progress.write(json.dumps({"epoch": epoch, "orbit_loss": obj.per_orbit,
                                       "total": obj.total}) + "\n")
        if on_epoch is not None:
            on_epoch(epoch, params, obj.embeddings)
        opt.step(params.weights, obj.grads)
    emb = Embeddings([embed(l, x_s, params) for l in laps_s],
                     [embed(l, x_t, params) for l in laps_t])
    return TrainResult(params, emb, history, rng)
