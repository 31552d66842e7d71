"""Pair-number distributions G_N(k) for a down-conversion source.

Three families are supported:

* ``poisson``  -- G(k) = N^k e^{-N} / k!
* ``thermal``  -- Bose-Einstein / geometric law with mean N,
  G(k) = N^k / (1 + N)^{k + 1}
* ``custom``   -- an explicit finite PMF table indexed by k
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError, TruncationError

KINDS = ("poisson", "thermal", "custom")

#: tail mass tolerated by the default truncation cutoffs
DEFAULT_TAIL = 1e-12
#: normalisation slack accepted for custom tables
CUSTOM_NORM_TOL = 1e-9


@dataclass(frozen=True)
class PairDistribution:
    """Distribution of the number of photon pairs per sample window.

    Use the :func:`poisson`, :func:`thermal` and :func:`custom` constructors
    rather than building instances by hand.
    """

    kind: str
    mean: float
    pmf_table: tuple[float, ...] | None = None
    cutoff: int = field(default=-1)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "custom":
            table = self.pmf_table
            if not table:
                raise ParameterError("custom distribution needs a non-empty pmf table")
            arr = np.asarray(table, dtype=float)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ParameterError("pmf table entries must be finite and non-negative")
            if arr.sum() > 1.0 + CUSTOM_NORM_TOL:
                raise ParameterError(f"pmf table sums to {arr.sum():.12g} > 1")
            object.__setattr__(self, "pmf_table", tuple(float(p) for p in arr))
            ks = np.arange(arr.size)
            object.__setattr__(self, "mean", float(np.dot(ks, arr)))
            cutoff = arr.size - 1
        else:
            if self.pmf_table is not None:
                raise ParameterError(f"{self.kind} distribution takes no pmf table")
            mean = float(self.mean)
            if not math.isfinite(mean) or mean < 0:
                raise ParameterError(f"mean pair number must be finite and >= 0, got {self.mean!r}")
            object.__setattr__(self, "mean", mean)
            cutoff = default_cutoff(self.kind, mean)
        if self.cutoff < 0:
            object.__setattr__(self, "cutoff", cutoff)
        else:
            object.__setattr__(self, "cutoff", int(self.cutoff))

    def pmf(self, k: int) -> float:
        return pmf(self, k)

    def moments(self) -> tuple[float, float]:
        return moments(self)


def poisson(mean: float, cutoff: int = -1) -> PairDistribution:
    return PairDistribution("poisson", mean, cutoff=cutoff)


def thermal(mean: float, cutoff: int = -1) -> PairDistribution:
    return PairDistribution("thermal", mean, cutoff=cutoff)


def custom(table, cutoff: int = -1) -> PairDistribution:
    return PairDistribution("custom", 0.0, tuple(table), cutoff=cutoff)


def default_cutoff(kind: str, mean: float, tail: float = DEFAULT_TAIL) -> int:
    """Smallest convenient K_max whose tail mass is below ``tail``.

    The Poisson rule ``N + 12 sqrt(N) + 30`` is fixed; it is far tighter than
    1e-12 for every N, so ``tail`` only affects the thermal rule.
    """
    if mean == 0:
        return 0
    if kind == "poisson":
        return math.ceil(mean + 12.0 * math.sqrt(mean) + 30.0)
    if kind == "thermal":
        # geometric tail P(k > K) = q^(K+1) with q = N / (N + 1)
        return math.ceil(math.log(tail) / -math.log1p(1.0 / mean))
    raise ParameterError(f"no default cutoff for kind {kind!r}")


def pmf(dist: PairDistribution, k: int) -> float:
    """Probability G_N(k) of emitting exactly ``k`` pairs."""
    if k < 0:
        raise ParameterError(f"pair number must be >= 0, got {k}")
    return float(pmf_array(dist, max(k, 0))[k]) if dist.kind == "custom" else _pmf_scalar(dist, k)


def _pmf_scalar(dist: PairDistribution, k: int) -> float:
    n = dist.mean
    if n == 0:
        return 1.0 if k == 0 else 0.0
    if dist.kind == "poisson":
        return math.exp(k * math.log(n) - n - math.lgamma(k + 1))
    return math.exp(k * math.log(n / (1.0 + n)) - math.log1p(n))


def pmf_array(dist: PairDistribution, kmax: int | None = None) -> np.ndarray:
    """G_N(k) for k = 0..kmax (default: the distribution's cutoff)."""
    if kmax is None:
        kmax = dist.cutoff
    k = np.arange(kmax + 1, dtype=float)
    n = dist.mean
    if dist.kind == "custom":
        out = np.zeros(kmax + 1)
        table = np.asarray(dist.pmf_table)
        m = min(table.size, kmax + 1)
        out[:m] = table[:m]
        return out
    if n == 0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    if dist.kind == "poisson":
        return np.exp(k * math.log(n) - n - gammaln(k + 1))
    return np.exp(k * math.log(n / (1.0 + n)) - math.log1p(n))


def moments(dist: PairDistribution) -> tuple[float, float]:
    """Exact (<k>, <k^2>) of the pair-number distribution."""
    n = dist.mean
    if dist.kind == "poisson":
        return n, n + n * n
    if dist.kind == "thermal":
        return n, n + 2.0 * n * n
    p = _checked_table(dist)
    k = np.arange(p.size, dtype=float)
    return float(np.dot(k, p)), float(np.dot(k * k, p))


def factorial_moments(dist: PairDistribution, order: int = 4) -> np.ndarray:
    """Falling-factorial moments E[k (k-1) ... (k-r+1)] for r = 0..order."""
    n = dist.mean
    r = np.arange(order + 1)
    if dist.kind == "poisson":
        return n ** r.astype(float)
    if dist.kind == "thermal":
        return np.array([math.factorial(i) * n**i for i in r], dtype=float)
    p = _checked_table(dist)
    k = np.arange(p.size, dtype=float)
    out = np.empty(order + 1)
    falling = np.ones_like(k)
    for i in r:
        out[i] = float(np.dot(falling, p))
        falling = falling * (k - i)
    return out


def _checked_table(dist: PairDistribution) -> np.ndarray:
    p = pmf_array(dist, dist.cutoff)
    missing = 1.0 - float(p.sum())
    if missing > CUSTOM_NORM_TOL:
        raise TruncationError(
            f"custom pmf leaves tail mass {missing:.3g} beyond k={dist.cutoff}"
        )
    return p


def tail_mass(dist: PairDistribution, kmax: int | None = None) -> float:
    """Probability mass above ``kmax`` (default: the cutoff)."""
    if kmax is None:
        kmax = dist.cutoff
    n = dist.mean
    if n == 0:
        return 0.0
    if dist.kind == "thermal":
        return (n / (1.0 + n)) ** (kmax + 1)
    if dist.kind == "poisson":
        from scipy.stats import poisson as _poisson

        return float(_poisson.sf(kmax, n))
    return max(0.0, 1.0 - float(pmf_array(dist, kmax).sum()))


def sample_pairs(dist: PairDistribution, rng: np.random.Generator, size=None):
    """Draw pair numbers k ~ G_N. Returns an int, or an int64 array if ``size`` is given."""
    n = dist.mean
    if dist.kind == "custom":
        p = np.asarray(dist.pmf_table, dtype=float)
        out = rng.choice(p.size, size=size, p=p / p.sum())
    elif n == 0:
        out = np.zeros(size, dtype=np.int64) if size is not None else 0
    elif dist.kind == "poisson":
        out = rng.poisson(n, size=size)
    else:
        out = rng.geometric(1.0 / (1.0 + n), size=size) - 1
    if size is None:
        return int(out)
    return np.asarray(out, dtype=np.int64)


def load_pmf_file(path) -> PairDistribution:
    """Read a custom PMF file: one probability per line (line i is k = i), ``#`` comments."""
    values = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ParameterError(f"{path}:{lineno}: not a probability: {line!r}") from None
    return custom(values)
