"""End-to-end alignment: orbit counting, Laplacians, training, refinement, integration."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import ExitStack, contextmanager
from dataclasses import dataclass, field
from typing import TextIO

from threadpoolctl import threadpool_limits

from .aligner import AlignmentResult, fine_tune, initial_scores, integrate
from .graph import Dataset
from .orbits import ORBIT_COUNT, OrbitMatrixSet, count_orbits, restrict_orbits
from .spectral import build_laplacians
from .trainer import TrainConfig, TrainResult, train

# variant -> (orbit count override, run trusted-pair fine-tuning)
VARIANTS: dict[str, tuple[int | None, bool]] = {
    "HTC": (None, True),
    "HTC-H": (None, False),
    "HTC-LT": (1, True),
    "HTC-L": (1, False),
}

STAGES = ("orbit_counting", "laplacian", "training", "fine_tuning", "integration", "other")


@dataclass(frozen=True)
class AlignConfig:
    orbits: int = ORBIT_COUNT
    layers: int = 2
    dim: int = 200
    learning_rate: float = 0.01
    epochs: int = 200
    m: int = 20
    beta: float = 1.1
    qs: tuple[int, ...] = (1, 5, 10)
    seed: int = 0
    activation: str = "tanh"
    threads: int = 1
    oracle: bool = False

    def __post_init__(self):
        if not 1 <= self.orbits <= ORBIT_COUNT:
            raise ValueError(f"orbits must lie in [1, {ORBIT_COUNT}]")
        if self.layers < 1 or self.dim < 2:
            raise ValueError("need at least one layer and embedding dimension >= 2")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not self.beta > 1:
            raise ValueError("beta must exceed 1")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if not self.qs or any(q < 1 for q in self.qs):
            raise ValueError("q values must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.epochs, self.learning_rate, (self.dim,) * self.layers,
                           self.seed, self.activation)


@dataclass
class AlignOutput:
    result: AlignmentResult
    timings: dict[str, float]
    variant: str
    source_orbits: OrbitMatrixSet
    target_orbits: OrbitMatrixSet
    training: TrainResult = field(repr=False)


class _Timer:
    def __init__(self, carried: dict[str, float] | None = None):
        # ``carried`` holds stage times already spent on work shared with other variants
        self.timings = {s: 0.0 for s in STAGES}
        self._start = time.perf_counter()
        if carried:
            self.timings.update(carried)
            self._start -= sum(carried.values())

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] += time.perf_counter() - t0

    def finish(self) -> dict[str, float]:
        total = time.perf_counter() - self._start
        self.timings["other"] = max(0.0, total - sum(v for k, v in self.timings.items()
                                                     if k != "other"))
        return dict(self.timings)


def align(data: Dataset, cfg: AlignConfig = AlignConfig(), variant: str = "HTC",
          progress: TextIO | None = None) -> AlignOutput:
    return align_variants(data, cfg, (variant,), progress)[variant]


def align_variants(data: Dataset, cfg: AlignConfig = AlignConfig(),
                   variants=("HTC",), progress: TextIO | None = None) -> dict[str, AlignOutput]:
    """Run several variants, training once per distinct orbit count.

    Variants that differ only in whether refinement runs share orbit counts,
    Laplacians and the trained encoder, which are identical for a fixed seed.
    """
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unsupported variant {v!r}; choose from {sorted(VARIANTS)}")
    outputs = {}
    with ExitStack() as stack:
        stack.enter_context(threadpool_limits(limits=cfg.threads))
        pool = stack.enter_context(ThreadPoolExecutor(cfg.threads)) if cfg.threads > 1 else None
        mapper = pool.map if pool is not None else map
        by_k: dict[int, list[str]] = {}
        for v in variants:
            by_k.setdefault(VARIANTS[v][0] or cfg.orbits, []).append(v)
        for k, group in by_k.items():
            timer = _Timer()
            with timer.stage("orbit_counting"):
                orb_s = restrict_orbits(count_orbits(data.source, cfg.oracle), k)
                orb_t = restrict_orbits(count_orbits(data.target, cfg.oracle), k)
            with timer.stage("laplacian"):
                laps_s = build_laplacians(orb_s)
                laps_t = build_laplacians(orb_t)
            with timer.stage("training"):
                trained = train(laps_s, laps_t, data.source_attrs, data.target_attrs,
                                cfg.train_config(), progress=progress, executor=pool)
            shared = timer.finish()
            emb = trained.embeddings
            for v in group:
                refine = VARIANTS[v][1]

                def refine_orbit(i):
                    h_s, h_t = emb.source[i], emb.target[i]
                    if not refine:
                        return initial_scores(h_s, h_t, cfg.m)
                    return fine_tune(laps_s[i], laps_t[i], data.source_attrs,
                                     data.target_attrs, trained.params, cfg.beta, cfg.m,
                                     h_s, h_t)

                timer = _Timer(shared)
                with timer.stage("fine_tuning"):
                    per_orbit = list(mapper(refine_orbit, range(k)))
                with timer.stage("integration"):
                    result = integrate(per_orbit)
                outputs[v] = AlignOutput(result, timer.finish(), v, orb_s, orb_t, trained)
    return outputs
