"""Moment bookkeeping for count records.

Per-record statistics are tracked in the fixed order :data:`STATS`:
l, m, l^2, m^2, lm, (l-m)^2 and, when coincidences are recorded, c and c^2.
Sums and cross-sums are associative, so partial accumulations over record
chunks merge exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import _backend
from .detector import Counts
from .errors import InsufficientDataError, ParameterError

STATS = ("l", "m", "l2", "m2", "lm", "diff2", "c", "c2")
SINGLES_STATS = STATS[:6]

_MEAN_FIELDS = ("mean_l", "mean_m", "mean_l2", "mean_m2", "mean_lm", "mean_diff2", "mean_c", "mean_c2")


@dataclass(frozen=True, eq=False)
class MomentSet:
    """Sample (or exact) means of the tracked statistics.

    ``cov`` is the per-record covariance matrix of the statistics in
    :attr:`stats` order, normalised by 1/M.  The covariance of the sample
    means is ``cov / sample_size``.  It is ``None`` for derived moment sets
    (e.g. after background correction).
    """

    mean_l: float
    mean_m: float
    mean_l2: float
    mean_m2: float
    mean_lm: float
    mean_diff2: float
    mean_c: float | None = None
    mean_c2: float | None = None
    sample_size: int = 1
    cov: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.mean_c is None) != (self.mean_c2 is None):
            raise ParameterError("mean_c and mean_c2 must be given together")
        if self.sample_size < 1:
            raise ParameterError(f"sample size must be >= 1, got {self.sample_size}")
        if self.cov is not None:
            cov = np.asarray(self.cov, dtype=float)
            d = len(self.stats)
            if cov.shape != (d, d):
                raise ParameterError(f"covariance must be {d}x{d}, got {cov.shape}")
            object.__setattr__(self, "cov", cov)

    @property
    def has_coincidences(self) -> bool:
        return self.mean_c is not None

    @property
    def stats(self) -> tuple[str, ...]:
        return STATS if self.has_coincidences else SINGLES_STATS

    def mean_vector(self) -> np.ndarray:
        return np.array([getattr(self, "mean_" + s) for s in self.stats], dtype=float)

    def mean(self, stat: str) -> float:
        value = getattr(self, "mean_" + stat)
        if value is None:
            raise KeyError(stat)
        return value

    def cov_of_means(self) -> np.ndarray:
        """Covariance matrix of the sample means (sigma_<u><v>)."""
        if self.cov is None:
            raise ParameterError("moment set carries no covariance information")
        return self.cov / self.sample_size

    def with_sample_size(self, sample_size: int) -> "MomentSet":
        return replace(self, sample_size=int(sample_size))

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in _MEAN_FIELDS if getattr(self, name) is not None}
        out["sample_size"] = self.sample_size
        if self.cov is not None:
            out["stats"] = list(self.stats)
            out["cov"] = self.cov.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "MomentSet":
        kwargs = {f.name: data[f.name] for f in fields(cls) if f.name in data and f.name != "cov"}
        cov = data.get("cov")
        return cls(**kwargs, cov=None if cov is None else np.asarray(cov, dtype=float))


class MomentAccumulator:
    """Streaming sums over record chunks; ``merge`` combines partial results."""

    def __init__(self, with_coincidence: bool):
        d = 8 if with_coincidence else 6
        self.with_coincidence = with_coincidence
        self.count = 0
        self.sums = np.zeros(d)
        self.cross = np.zeros((d, d))

    def add(self, counts: Counts) -> "MomentAccumulator":
        c = counts.c if self.with_coincidence else None
        if self.with_coincidence and c is None:
            raise ParameterError("records carry no coincidence column")
        s, x = _backend.accumulate(counts.l_M, counts.m_M, c)
        self.count += len(counts)
        self.sums += s
        self.cross += x
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.with_coincidence != self.with_coincidence:
            raise ParameterError("cannot merge accumulators tracking different statistics")
        self.count += other.count
        self.sums += other.sums
        self.cross += other.cross
        return self

    def result(self) -> MomentSet:
        if self.count < 2:
            raise InsufficientDataError(f"need at least 2 records, got {self.count}")
        means = self.sums / self.count
        cov = self.cross / self.count - np.outer(means, means)
        cov = 0.5 * (cov + cov.T)
        values = dict(zip(_MEAN_FIELDS, means.tolist()))
        mom = MomentSet(**values, sample_size=self.count, cov=cov)
        _check_identity(mom)
        return mom


def _check_identity(mom: MomentSet) -> None:
    # <(l-m)^2> is accumulated directly; it must agree with the expansion
    rebuilt = mom.mean_l2 + mom.mean_m2 - 2.0 * mom.mean_lm
    scale = max(1.0, mom.mean_l2 + mom.mean_m2)
    if abs(rebuilt - mom.mean_diff2) > 1e-12 * scale:
        raise AssertionError(f"moment bookkeeping broken: {rebuilt!r} != {mom.mean_diff2!r}")


def sample_moments(records, with_coincidence: bool | None = None) -> MomentSet:
    """Sample moments of a record sequence (``Counts`` or iterable of ``CountRecord``)."""
    counts = records if isinstance(records, Counts) else Counts.from_records(records)
    if with_coincidence is None:
        with_coincidence = counts.c is not None
    return MomentAccumulator(with_coincidence).add(counts).result()
