"""Exact moments of the pair-detection model.

Two independent routes are provided:

* the default route expands every requested statistic into falling-factorial
  moments of the pair number (conditional on k the detected counts are
  multinomial), so each expectation costs O(1) once E[k^(r)] is known;
* ``brute=True`` enumerates the truncated sums over (k, l, m) literally, and
  :func:`exact_coincidence_moments` enumerates (k, l, c).

The two must agree; the test suite checks this across the parameter grid.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import comb, factorial

import numpy as np

from . import _backend, source
from .detector import binomial_arm_moments
from .errors import ParameterError
from .moments import SINGLES_STATS, STATS, MomentSet

#: tail mass left out of the literal sums unless a cutoff is given
ORACLE_TAIL = 1e-18

# statistics as polynomials in (l, m, c): {(a, b, d): coefficient}
_POLY = {
    "l": {(1, 0, 0): 1},
    "m": {(0, 1, 0): 1},
    "l2": {(2, 0, 0): 1},
    "m2": {(0, 2, 0): 1},
    "lm": {(1, 1, 0): 1},
    "diff2": {(2, 0, 0): 1, (1, 1, 0): -2, (0, 2, 0): 1},
    "c": {(0, 0, 1): 1},
    "c2": {(0, 0, 2): 1},
}


def _poly_mul(p, q):
    out: dict = {}
    for (e1, c1), (e2, c2) in product(p.items(), q.items()):
        e = tuple(x + y for x, y in zip(e1, e2))
        out[e] = out.get(e, 0) + c1 * c2
    return out


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


@lru_cache(maxsize=None)
def _monomial_terms(a: int, b: int, d: int):
    """E[l^a m^b c^d | k] as {(r, i, j, h): coef} meaning coef * E[k^(r) k^(h)] px^i py^j q^h.

    With x = c, y = l - c (multinomial over arm-1 outcomes, probabilities
    px = eta1 eta2 and py = eta1 (1 - eta2)) and m ~ Bin(k, eta2) independent
    of (x, y) given k.
    """
    terms: dict = {}
    # (x + y)^a x^d
    for s in range(a + 1):
        i_pow, j_pow = s + d, a - s
        coef = comb(a, s)
        for i in range(i_pow + 1):
            for j in range(j_pow + 1):
                cij = coef * _stirling2(i_pow, i) * _stirling2(j_pow, j)
                if not cij:
                    continue
                for h in range(b + 1):
                    c = cij * _stirling2(b, h)
                    if c:
                        key = (i + j, i, j, h)
                        terms[key] = terms.get(key, 0) + c
    return tuple(terms.items())


def _falling_product(fm: np.ndarray, r: int, h: int) -> float:
    """E[k^(r) k^(h)] from falling-factorial moments ``fm``."""
    return sum(comb(r, j) * comb(h, j) * factorial(j) * fm[r + h - j] for j in range(min(r, h) + 1))


def joint_moment(fm: np.ndarray, eta1: float, eta2: float, a: int, b: int, d: int) -> float:
    """E[l^a m^b c^d] given the pair-number falling-factorial moments ``fm``."""
    px, py = eta1 * eta2, eta1 * (1.0 - eta2)
    total = 0.0
    for (r, i, j, h), coef in _monomial_terms(a, b, d):
        total += coef * _falling_product(fm, r, h) * px**i * py**j * eta2**h
    return total


def _check(dist, eta1, eta2):
    for eta in (eta1, eta2):
        if not 0.0 <= eta <= 1.0:
            raise ParameterError(f"efficiency must lie in [0, 1], got {eta}")


def exact_moments(dist: source.PairDistribution, eta1: float, eta2: float, *,
                  coincidences: bool = True, sample_size: int = 1,
                  brute: bool = False, cutoff: int | None = None) -> MomentSet:
    """Exact means and per-record covariances of the tracked statistics.

    ``brute=True`` evaluates the literal truncated triple sum over (k, l, m)
    (singles statistics only, ``coincidences`` is ignored).
    """
    _check(dist, eta1, eta2)
    if brute:
        return _brute_moments(dist, eta1, eta2, sample_size, cutoff)
    stats = STATS if coincidences else SINGLES_STATS
    fm = source.factorial_moments(dist, 4)
    cache: dict = {}

    def expect(poly):
        total = 0.0
        for key, coef in poly.items():
            if key not in cache:
                cache[key] = joint_moment(fm, eta1, eta2, *key)
            total += coef * cache[key]
        return total

    means = np.array([expect(_POLY[s]) for s in stats])
    d = len(stats)
    cov = np.empty((d, d))
    for p in range(d):
        for q in range(p, d):
            second = expect(_poly_mul(_POLY[stats[p]], _POLY[stats[q]]))
            cov[p, q] = cov[q, p] = second - means[p] * means[q]
    values = {"mean_" + s: float(v) for s, v in zip(stats, means)}
    return MomentSet(**values, sample_size=sample_size, cov=cov)


def _sum_cutoff(dist, cutoff):
    if cutoff is not None:
        return int(cutoff)
    if dist.kind == "custom":
        return dist.cutoff
    return max(dist.cutoff, source.default_cutoff(dist.kind, dist.mean, tail=ORACLE_TAIL))


def _brute_moments(dist, eta1, eta2, sample_size, cutoff):
    g = source.pmf_array(dist, _sum_cutoff(dist, cutoff))
    e = _backend.triple_sum(g, float(eta1), float(eta2), 4)  # e[a, b] = E[l^a m^b]

    def expect(poly):
        return sum(coef * e[a, b] for (a, b, _), coef in poly.items())

    stats = SINGLES_STATS
    means = np.array([expect(_POLY[s]) for s in stats])
    cov = np.array([[expect(_poly_mul(_POLY[u], _POLY[v])) for v in stats] for u in stats])
    cov -= np.outer(means, means)
    values = {"mean_" + s: float(v) for s, v in zip(stats, means)}
    return MomentSet(**values, sample_size=sample_size, cov=cov)


def exact_coincidence_moments(dist: source.PairDistribution, eta1: float, eta2: float,
                              p: int = 1, cutoff: int | None = None) -> float:
    """<c^p> by enumerating the nested sum over k, l and c <= l."""
    _check(dist, eta1, eta2)
    if p < 0 or p > 8:
        raise ParameterError(f"coincidence moment order must be in 0..8, got {p}")
    g = source.pmf_array(dist, _sum_cutoff(dist, cutoff))
    return float(_backend.coincidence_sum(g, float(eta1), float(eta2), p)[p])


def exact_covariances(dist: source.PairDistribution, eta1: float, eta2: float, M: int = 1,
                      stats=None) -> dict[str, dict[str, float]]:
    """sigma_<u><v> = (<uv> - <u><v>) / M for every pair of requested statistics."""
    if M < 1:
        raise ParameterError(f"sample size must be >= 1, got {M}")
    stats = tuple(STATS if stats is None else stats)
    unknown = set(stats) - set(STATS)
    if unknown:
        raise ParameterError(f"unknown statistics {sorted(unknown)}")
    mom = exact_moments(dist, eta1, eta2, coincidences=any(s in ("c", "c2") for s in stats),
                        sample_size=M)
    cov = mom.cov_of_means()
    idx = {s: i for i, s in enumerate(mom.stats)}
    return {u: {v: float(cov[idx[u], idx[v]]) for v in stats} for u in stats}


def closed_form_moments(dist: source.PairDistribution, eta1: float, eta2: float) -> dict[str, float]:
    """Single-arm moments, <lm> = eta1 eta2 <k^2>, and <(l-m)^2> from the noise formula."""
    _check(dist, eta1, eta2)
    mk, mk2 = source.moments(dist)
    l, l2 = binomial_arm_moments((mk, mk2), eta1)
    m, m2 = binomial_arm_moments((mk, mk2), eta2)
    return {
        "l": l, "m": m, "l2": l2, "m2": m2,
        "lm": eta1 * eta2 * mk2,
        "diff2": difference_noise(l, m, l2, eta1, eta2, second_k=mk2),
        "c": eta1 * eta2 * mk,
    }


def difference_noise(mean_l: float, mean_m: float, mean_l2: float, eta1: float, eta2: float,
                     second_k: float | None = None) -> float:
    """<(l-m)^2> for a pair source, written in terms of arm-1 moments.

    The bracket (<l^2> - <l> + eta1 <l>) / eta1^2 equals <k^2>; ``second_k``
    supplies it directly when eta1 = 0.
    """
    if eta1 > 0:
        k2 = (mean_l2 - mean_l + eta1 * mean_l) / eta1**2
    elif second_k is not None:
        k2 = second_k
    else:
        raise ParameterError("eta1 = 0 needs second_k")
    return mean_l + mean_m - (eta1 * mean_l + eta2 * mean_m) + (eta1 - eta2) ** 2 * k2
