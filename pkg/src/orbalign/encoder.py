"""Shared-weight orbit GCN encoder: forward pass, reconstruction loss, backprop, Adam.

One weight list is used for every orbit and for both graphs. Layer ``l``
computes ``H[l+1] = f(L @ H[l] @ W[l])`` with ``H[0] = X``; the decoder is the
inner product ``H H^T`` and each graph contributes ``||L - H H^T||_F`` to the
loss of an orbit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, NumericError
from .spectral import OrbitLaplacian

CHECKPOINT_VERSION = 1


def _tanh_grad(z, h):
    return 1.0 - h * h


def _relu(z):
    return np.maximum(z, 0.0)


ACTIVATIONS: dict[str, tuple[Callable, Callable]] = {
    # name -> (f(z), f'(z) expressed through (z, f(z)))
    "linear": (lambda z: z, lambda z, h: np.ones_like(z)),
    "tanh": (np.tanh, _tanh_grad),
    "relu": (_relu, lambda z, h: (z > 0).astype(z.dtype)),
}


@dataclass
class EncoderParams:
    weights: list[np.ndarray]
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; "
                             f"choose from {sorted(ACTIVATIONS)}")
        for a, b in zip(self.weights, self.weights[1:]):
            if a.shape[1] != b.shape[0]:
                raise DimensionError(f"weight shapes do not chain: {a.shape} -> {b.shape}")

    @classmethod
    def initialize(cls, dims: Sequence[int], activation: str = "tanh",
                   rng: np.random.Generator | int | None = None) -> "EncoderParams":
        """Glorot-uniform weights for the layer widths ``dims`` (input first)."""
        rng = np.random.default_rng(rng)
        weights = []
        for fan_in, fan_out in zip(dims, dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        return cls(weights, activation)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "EncoderParams":
        return EncoderParams([w.copy() for w in self.weights], self.activation)


@dataclass
class ForwardCache:
    propagated: list[np.ndarray]   # L @ H[l], the input to W[l]
    outputs: list[np.ndarray]      # H[l+1]
    preactivations: list[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.outputs[-1]


@dataclass
class Embeddings:
    """Final-layer embeddings per orbit for both graphs."""
    source: list[np.ndarray]
    target: list[np.ndarray]

    @property
    def orbit_count(self) -> int:
        return len(self.source)


def forward(lap: OrbitLaplacian, x: np.ndarray, params: EncoderParams) -> ForwardCache:
    if x.shape[0] != lap.shape[0]:
        raise DimensionError(f"{x.shape[0]} attribute rows for a {lap.shape[0]}-node Laplacian")
    if x.shape[1] != params.dims[0]:
        raise DimensionError(f"attribute width {x.shape[1]} != encoder input {params.dims[0]}")
    f, _ = ACTIVATIONS[params.activation]
    h = x
    cache = ForwardCache([], [], [])
    for w in params.weights:
        lh = np.asarray(lap.matrix @ h)
        z = lh @ w
        h = f(z)
        cache.propagated.append(lh)
        cache.preactivations.append(z)
        cache.outputs.append(h)
    if not np.all(np.isfinite(h)):
        raise NumericError("encoder produced non-finite embeddings")
    return cache


def embed(lap: OrbitLaplacian, x: np.ndarray, params: EncoderParams) -> np.ndarray:
    return forward(lap, x, params).output


def backward(lap: OrbitLaplacian, cache: ForwardCache, params: EncoderParams,
             grad_output: np.ndarray) -> list[np.ndarray]:
    """Gradients w.r.t. every weight matrix given d(loss)/d(final embeddings)."""
    _, fprime = ACTIVATIONS[params.activation]
    grads = [None] * len(params.weights)
    g = grad_output
    for l in range(len(params.weights) - 1, -1, -1):
        dz = g * fprime(cache.preactivations[l], cache.outputs[l])
        grads[l] = cache.propagated[l].T @ dz
        if l:
            # propagation matrices are symmetric, so L^T == L
            g = np.asarray(lap.matrix @ (dz @ params.weights[l].T))
    return grads


def reconstruction_loss(h_s: np.ndarray, h_t: np.ndarray, lap_s: OrbitLaplacian,
                        lap_t: OrbitLaplacian) -> float:
    """``||L_s - H_s H_s^T||_F + ||L_t - H_t H_t^T||_F`` on dense matrices."""
    return float(np.linalg.norm(lap_s.toarray() - h_s @ h_s.T)
                 + np.linalg.norm(lap_t.toarray() - h_t @ h_t.T))


def _frobenius_term(lap: OrbitLaplacian, lap_sq: float, h: np.ndarray,
                    lh: np.ndarray) -> tuple[float, np.ndarray]:
    """Value and H-gradient of ``||L - H H^T||_F`` without forming n x n matrices.

    ``||L - HH^T||^2 = ||L||^2 - 2 <H, L H> + ||H^T H||^2`` and the gradient is
    ``2 (H H^T - L) H / ||L - HH^T||``, where ``(H H^T) H = H (H^T H)``.
    """
    gram = h.T @ h
    sq = lap_sq - 2.0 * float(np.sum(h * lh)) + float(np.sum(gram * gram))
    value = float(np.sqrt(max(sq, 0.0)))
    if value == 0.0:
        return 0.0, np.zeros_like(h)
    return value, 2.0 * (h @ gram - lh) / value


@dataclass
class Objective:
    total: float
    per_orbit: list[float]
    grads: list[np.ndarray]
    embeddings: Embeddings = field(repr=False)


def _squared_norm(lap: OrbitLaplacian) -> float:
    d = lap.matrix.data
    return float(d @ d)


def _orbit_term(params, lap_s, lap_t, x_s, x_t):
    grads = [np.zeros_like(w) for w in params.weights]
    loss = 0.0
    outs = []
    for lap, x in ((lap_s, x_s), (lap_t, x_t)):
        cache = forward(lap, x, params)
        h = cache.output
        lh = np.asarray(lap.matrix @ h)
        value, dh = _frobenius_term(lap, _squared_norm(lap), h, lh)
        loss += value
        for g, gl in zip(grads, backward(lap, cache, params, dh)):
            g += gl
        outs.append(h)
    return loss, grads, outs


def objective(params: EncoderParams, laps_s: Sequence[OrbitLaplacian],
              laps_t: Sequence[OrbitLaplacian], x_s: np.ndarray, x_t: np.ndarray,
              executor=None) -> Objective:
    """Total loss summed over orbits, its weight gradients, and the embeddings.

    With an ``executor`` the per-orbit terms are computed concurrently; they
    are always reduced in orbit order, so the result does not depend on
    scheduling.
    """
    if len(laps_s) != len(laps_t):
        raise DimensionError(f"{len(laps_s)} source vs {len(laps_t)} target Laplacians")
    args = [(params, ls, lt, x_s, x_t) for ls, lt in zip(laps_s, laps_t)]
    if executor is None:
        terms = [_orbit_term(*a) for a in args]
    else:
        terms = list(executor.map(lambda a: _orbit_term(*a), args))
    grads = [np.zeros_like(w) for w in params.weights]
    per_orbit = []
    emb = Embeddings([], [])
    for loss, g_orbit, (h_s, h_t) in terms:
        per_orbit.append(loss)
        for g, gk in zip(grads, g_orbit):
            g += gk
        emb.source.append(h_s)
        emb.target.append(h_t)
    return Objective(float(sum(per_orbit)), per_orbit, grads, emb)


def loss_gradient(params: EncoderParams, laps_s, laps_t, x_s, x_t) -> list[np.ndarray]:
    return objective(params, laps_s, laps_t, x_s, x_t).grads


class Adam:
    """Bias-corrected Adam over a list of weight arrays, updated in place."""

    def __init__(self, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None
        self.t = 0

    def step(self, weights: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if self.m is None:
            self.m = [np.zeros_like(w) for w in weights]
            self.v = [np.zeros_like(w) for w in weights]
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for w, g, m, v in zip(weights, grads, self.m, self.v):
            if g.shape != w.shape:
                raise DimensionError(f"gradient shape {g.shape} != weight shape {w.shape}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            w -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def save_checkpoint(path: str | os.PathLike, params: EncoderParams,
                    rng: np.random.Generator | None = None) -> None:
    """Write weights (and optionally the RNG state) to a ``.npz`` archive.

    Layout: arrays ``w0 .. w{L-1}`` plus ``meta``, a JSON string holding the
    format version, activation name and the bit generator state.
    """
    meta = {"version": CHECKPOINT_VERSION, "activation": params.activation,
            "layers": len(params.weights),
            "rng": rng.bit_generator.state if rng is not None else None}
    arrays = {f"w{i}": w for i, w in enumerate(params.weights)}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), **arrays)


def load_checkpoint(path: str | os.PathLike) -> tuple[EncoderParams, np.random.Generator | None]:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        weights = [data[f"w{i}"].copy() for i in range(meta["layers"])]
    rng = None
    if meta["rng"] is not None:
        rng = np.random.default_rng()
        rng.bit_generator.state = meta["rng"]
    return EncoderParams(weights, meta["activation"]), rng
