"""Monte Carlo simulation of the physical detection process.

Each trial sends ``m`` photons at the detector and counts what it reports.
This never touches a POVM formula, so it serves as ground truth for the
closed forms and the quadrature in :mod:`bosonkit.detectors`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detectors import DeadTimeExp, DeadTimeMono, DetectorModel, IdealPNR, LossyPNR, OnOffArray
from .errors import ParameterError

RNG_NAME = "numpy.random.Philox"
_CHUNK = 250_000


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    trials: int

    def agrees_with(self, value: float, sigmas: float = 4.0) -> bool:
        # floor the error bar so exact 0/1 estimates still compare sensibly
        err = max(self.stderr, 1.0 / self.trials)
        return abs(self.estimate - value) <= sigmas * err


def shard_generators(seed: int, shards: int) -> list[np.random.Generator]:
    """Independent Philox streams derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(shards)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _arrival_times(model, rng, shape) -> np.ndarray:
    u = rng.random(shape)
    if isinstance(model, DeadTimeExp):
        g = model.gamma
        # inverse CDF of the normalized decay profile on [0, 1]
        return -np.log1p(u * np.expm1(-g)) / g
    return u


def simulate_counts(model: DetectorModel, m: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Reported counts for ``trials`` independent m-photon inputs."""
    if isinstance(model, IdealPNR):
        return np.full(trials, m, dtype=int)
    if m == 0:
        return np.zeros(trials, dtype=int)
    detected = rng.random((trials, m)) < model.eta
    if isinstance(model, LossyPNR):
        return detected.sum(axis=1)
    if isinstance(model, OnOffArray):
        bins = rng.integers(0, model.K, size=(trials, m))
        bins = np.where(detected, bins, -1)
        bins.sort(axis=1)
        fresh = np.ones_like(bins, dtype=bool)
        fresh[:, 1:] = bins[:, 1:] != bins[:, :-1]
        return (fresh & (bins >= 0)).sum(axis=1)
    if isinstance(model, (DeadTimeMono, DeadTimeExp)):
        t = np.where(detected, _arrival_times(model, rng, (trials, m)), np.inf)
        t.sort(axis=1)
        last = np.full(trials, -np.inf)
        counts = np.zeros(trials, dtype=int)
        for j in range(m):
            tj = t[:, j]
            # non-paralyzable: only registered pulses open a dead interval
            hit = np.isfinite(tj) & (tj - last >= model.ratio)
            last = np.where(hit, tj, last)
            counts += hit
        return counts
    raise TypeError(f"unknown detector model {model!r}")


def pkm_mc_oracle(
    model: DetectorModel, k: int, m: int, trials: int, seed: int, shards: int = 1
) -> MCEstimate:
    """Estimate P(k|m) by simulating photon arrivals.

    Trials are split evenly over ``shards`` independent streams; the result
    depends only on (seed, shards, trials).
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if shards < 1:
        raise ParameterError(f"shards must be >= 1, got {shards}")
    hits = 0
    per_shard = [trials // shards + (i < trials % shards) for i in range(shards)]
    for rng, n in zip(shard_generators(seed, shards), per_shard):
        while n > 0:
            batch = min(n, _CHUNK)
            hits += int(np.count_nonzero(simulate_counts(model, m, batch, rng) == k))
            n -= batch
    p = hits / trials
    return MCEstimate(p, math.sqrt(p * (1.0 - p) / trials), trials)
