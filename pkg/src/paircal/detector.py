"""Lossy detection of photon pairs.

Loss in each arm is binomial thinning of the emitted pair number k.  The
coincidence count is a second thinning, by the arm-2 efficiency, of the arm-1
detections; it is drawn independently of the arm-2 singles count.  Background
counts are added to the singles only and never enter the coincidences.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import source
from .errors import ParameterError
from .rng import make_rng

#: records per independent RNG substream
BLOCK_SIZE = 1 << 16


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"efficiency must lie in [0, 1], got {eta}")
    return eta


@dataclass(frozen=True)
class DetectorChannel:
    """One detector arm: efficiency plus background.

    The background is Poisson with mean ``background_mean`` unless an explicit
    ``background_pmf`` table is supplied, in which case the mean is taken from it.
    """

    efficiency: float
    background_mean: float = 0.0
    background_pmf: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "efficiency", _check_eta(self.efficiency))
        if self.background_pmf is not None:
            bg = source.custom(self.background_pmf)
            object.__setattr__(self, "background_pmf", bg.pmf_table)
            object.__setattr__(self, "background_mean", bg.mean)
        lam = float(self.background_mean)
        if not math.isfinite(lam) or lam < 0:
            raise ParameterError(f"background mean must be finite and >= 0, got {self.background_mean}")
        object.__setattr__(self, "background_mean", lam)

    @property
    def background(self) -> source.PairDistribution:
        if self.background_pmf is not None:
            return source.custom(self.background_pmf)
        return source.poisson(self.background_mean)


class CountRecord(NamedTuple):
    """Measured counts of one sample window."""

    l_M: int
    m_M: int
    c: int | None = None


@dataclass(frozen=True)
class Counts:
    """Column storage for many count records."""

    l_M: np.ndarray
    m_M: np.ndarray
    c: np.ndarray | None = None

    def __post_init__(self):
        l = np.ascontiguousarray(self.l_M, dtype=np.int64)
        m = np.ascontiguousarray(self.m_M, dtype=np.int64)
        if l.shape != m.shape or l.ndim != 1:
            raise ParameterError("l_M and m_M must be 1-d arrays of equal length")
        object.__setattr__(self, "l_M", l)
        object.__setattr__(self, "m_M", m)
        if self.c is not None:
            c = np.ascontiguousarray(self.c, dtype=np.int64)
            if c.shape != l.shape:
                raise ParameterError("coincidence column has the wrong length")
            object.__setattr__(self, "c", c)

    def __len__(self) -> int:
        return self.l_M.size

    def __iter__(self) -> Iterator[CountRecord]:
        if self.c is None:
            for a, b in zip(self.l_M.tolist(), self.m_M.tolist()):
                yield CountRecord(a, b)
        else:
            for a, b, x in zip(self.l_M.tolist(), self.m_M.tolist(), self.c.tolist()):
                yield CountRecord(a, b, x)

    @classmethod
    def from_records(cls, records) -> "Counts":
        records = list(records)
        l = [r[0] for r in records]
        m = [r[1] for r in records]
        cs = [r[2] if len(r) > 2 else None for r in records]
        if records and all(x is not None for x in cs):
            return cls(l, m, cs)
        return cls(l, m)

    @classmethod
    def concat(cls, parts) -> "Counts":
        parts = list(parts)
        if not parts:
            return cls(np.zeros(0), np.zeros(0))
        c = None
        if all(p.c is not None for p in parts):
            c = np.concatenate([p.c for p in parts])
        return cls(np.concatenate([p.l_M for p in parts]), np.concatenate([p.m_M for p in parts]), c)


def thin(k, eta: float, rng: np.random.Generator):
    """Number of survivors when each of ``k`` photons is detected with probability ``eta``."""
    eta = _check_eta(eta)
    out = rng.binomial(k, eta)
    return int(out) if np.ndim(out) == 0 else out


def binomial_arm_moments(dist_moments: tuple[float, float], eta: float) -> tuple[float, float]:
    """First and second moment of the detected count in one arm."""
    mean_k, second_k = dist_moments
    return eta * mean_k, eta * mean_k - eta * eta * mean_k + eta * eta * second_k


def _draw_block(dist, ch1, ch2, n, rng, with_coincidence):
    k = source.sample_pairs(dist, rng, size=n)
    l = rng.binomial(k, ch1.efficiency)
    m = rng.binomial(k, ch2.efficiency)
    c = rng.binomial(l, ch2.efficiency) if with_coincidence else None
    l = l + source.sample_pairs(ch1.background, rng, size=n)
    m = m + source.sample_pairs(ch2.background, rng, size=n)
    return Counts(l, m, c)


def simulate_record(dist, ch1: DetectorChannel, ch2: DetectorChannel,
                    rng: np.random.Generator, with_coincidence: bool = False) -> CountRecord:
    """Simulate a single sample window."""
    block = _draw_block(dist, ch1, ch2, 1, rng, with_coincidence)
    return next(iter(block))


def simulate_counts(dist, ch1: DetectorChannel, ch2: DetectorChannel, n: int, seed: int,
                    with_coincidence: bool = False, workers: int = 1,
                    block_size: int = BLOCK_SIZE) -> Counts:
    """Simulate ``n`` independent sample windows.

    Records are generated in blocks of ``block_size``; block ``b`` draws from
    substream ``b`` of ``seed``.  The output is therefore identical for any
    number of ``workers``.
    """
    if n < 0:
        raise ParameterError(f"number of records must be >= 0, got {n}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    sizes = [min(block_size, n - start) for start in range(0, n, block_size)]

    def run(b):
        return _draw_block(dist, ch1, ch2, sizes[b], make_rng(seed, b), with_coincidence)

    if workers == 1 or len(sizes) <= 1:
        parts = [run(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    if not parts:
        empty = np.zeros(0, dtype=np.int64)
        return Counts(empty, empty, empty if with_coincidence else None)
    return Counts.concat(parts)
