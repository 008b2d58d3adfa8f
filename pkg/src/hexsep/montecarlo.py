"""
Seeded Monte Carlo symbol-error simulation with nearest-point detection.

Work is split into fixed-size batches.  Batch ``b`` draws from its own
Philox stream keyed by ``(seed, b)``, so the estimate depends only on
``(seed, n_symbols, batch_size)`` and not on how many worker threads ran the
batches.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError, InvalidConfig
from .lattice import Constellation

__all__ = ["Channel", "SimConfig", "SimEstimate", "simulate", "detect", "batch_rng",
           "default_workers"]

MIN_SYMBOLS = 10_000


class Channel(str, Enum):
    AWGN = "awgn"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class SimConfig:
    n_symbols: int = 1_000_000
    seed: int = 42
    channel: Channel = Channel.AWGN
    batch_size: int = 1 << 16

    def __post_init__(self):
        try:
            object.__setattr__(self, "channel", Channel(self.channel))
        except ValueError:
            raise InvalidConfig(f"unknown channel {self.channel!r}; use 'awgn' or 'rayleigh'") from None
        if int(self.n_symbols) != self.n_symbols or self.n_symbols < MIN_SYMBOLS:
            raise InvalidConfig(f"n_symbols must be an integer >= {MIN_SYMBOLS}")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise InvalidConfig("batch_size must be a positive integer")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidConfig("seed must fit in 64 unsigned bits")

    @property
    def n_batches(self) -> int:
        return -(-self.n_symbols // self.batch_size)


@dataclass(frozen=True)
class SimEstimate:
    sep_hat: float
    n_errors: int
    n_symbols: int
    ci95_halfwidth: float
    seed: int

    @classmethod
    def from_counts(cls, n_errors: int, n_symbols: int, seed: int) -> "SimEstimate":
        p = n_errors / n_symbols
        return cls(p, n_errors, n_symbols, 1.96 * math.sqrt(p * (1.0 - p) / n_symbols), seed)


def default_workers() -> int:
    """Worker cap from ``HEXSEP_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("HEXSEP_THREADS", "1")))
    except ValueError:
        return 1


def batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(batch_index,))))


def detect(received: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Index of the nearest constellation point; ties go to the lower index."""
    # argmin |r - s|^2 == argmin (|s|^2 - 2 r.s)
    metric = np.sum(points**2, axis=1) - 2.0 * received @ points.T
    return np.argmin(metric, axis=1)


def _run_batch(points, sigma, channel, seed, batch_index, size) -> int:
    rng = batch_rng(seed, batch_index)
    sent = rng.integers(0, len(points), size)
    noise = rng.standard_normal((size, 2)) * sigma
    if channel is Channel.AWGN:
        received = points[sent] + noise
    else:
        theta = np.sqrt(rng.standard_exponential(size))  # density 2t exp(-t^2)
        # coherent receiver scales by 1/theta before the decision
        received = points[sent] + noise / theta[:, None]
    return int(np.count_nonzero(detect(received, points) != sent))


def simulate(c: Constellation, snr, cfg: SimConfig = SimConfig(),
             workers: Optional[int] = None) -> SimEstimate:
    """Estimate the SEP of ``c`` at average symbol SNR ``snr`` (linear).

    Noise has variance ``avg_energy / (2 gamma_s)`` per dimension; under
    Rayleigh fading the symbol amplitude is scaled by theta with
    ``E[theta^2] = 1``, drawn independently per symbol.
    """
    gamma = float(getattr(snr, "gamma_s", snr))
    if not gamma > 0 or math.isinf(gamma):
        raise DomainError(f"SNR must be finite and > 0, got {gamma}")
    if not isinstance(cfg, SimConfig):
        raise InvalidConfig("cfg must be a SimConfig")
    points = np.ascontiguousarray(c.points)
    sigma = math.sqrt(c.avg_energy / (2.0 * gamma))
    sizes = [min(cfg.batch_size, cfg.n_symbols - b * cfg.batch_size) for b in range(cfg.n_batches)]
    workers = default_workers() if workers is None else max(1, int(workers))

    def job(b):
        return _run_batch(points, sigma, cfg.channel, cfg.seed, b, sizes[b])

    if workers == 1:
        counts = [job(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(job, range(len(sizes))))
    return SimEstimate.from_counts(sum(counts), cfg.n_symbols, cfg.seed)
