"""Statistical errors of the efficiency estimates.

Method letters follow the usual labelling: A = product, B = difference,
C = coincidence.  All variances are first-order (delta-method) variances of
eta1 built from the covariances of the sample means, and scale as 1/M.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle, source
from .estimators import corrected_estimate, delta_variance, estimate, get_method, method_inputs
from .errors import ParameterError
from .moments import MomentSet, sample_moments

METHOD_NAMES = {"A": "product", "B": "difference", "C": "coincidence"}


@dataclass(frozen=True)
class VarianceReport:
    method: str
    var_eta1: float
    source: str
    eta1: float | None = None
    eta2: float | None = None
    N: float | None = None
    M: int | None = None
    var_eta2: float | None = None


def _letter(method: str) -> str:
    key = method.upper() if len(method) == 1 else method
    if key in METHOD_NAMES:
        return key
    for letter, name in METHOD_NAMES.items():
        if name == method:
            return letter
    raise ParameterError(f"unknown method {method!r}; expected A, B or C")


def _check_m(M):
    if int(M) != M or M < 1:
        raise ParameterError(f"sample size M must be an integer >= 1, got {M}")


def poisson_variance(method: str, eta1: float, eta2: float, N: float) -> float:
    """Per-record (M = 1) variance of eta1 for a Poissonian source; N may be ``math.inf``."""
    method = _letter(method)
    if eta2 == 0 or N == 0:
        raise ParameterError("variance is singular for eta2 = 0 or N = 0")
    e1, e2 = eta1, eta2
    if math.isinf(N):
        if method == "A":
            return e1 / e2 + 2.0 + e1 * (e1 - 4.0)
        if method == "B":
            num = (2 * e1**4 * e2 + 2 * e1**3 * (1 + 2 * e2 * (e2 - 3))
                   + e1**2 * e2 * (5 - 2 * e2 * (e2 - 2)) - 4 * e1 * e2**2 + e2**3)
            return num / (2 * e1**2 * e2)
        return 0.0
    if method == "A":
        return (e1 * (1 + N - e1) + N * e2 * (2 + e1 * (e1 - 4))) / (N * e2)
    if method == "B":
        num = (2 * e1**4 * (N * e2 - 1) + 2 * e1**3 * (1 + N * (1 + 2 * e2 * (e2 - 3)))
               + N * e1**2 * e2 * (5 - 2 * e2 * (e2 - 2)) - 4 * N * e1 * e2**2 + N * e2**3)
        return num / (2 * N * e1**2 * e2)
    return e1 * (1 + e1 - 2 * e1 * e2) / (N * e2)


def analytic_variance_poisson(method: str, eta1: float, eta2: float, N: float, M: int) -> VarianceReport:
    """Closed-form variance of eta1 for a Poissonian pair source."""
    for eta in (eta1, eta2):
        if not 0.0 <= eta <= 1.0:
            raise ParameterError(f"efficiency must lie in (0, 1], got {eta}")
    if eta1 == 0:
        raise ParameterError("variance is singular for eta1 = 0")
    if not N >= 0:
        raise ParameterError(f"mean pair number must be > 0, got {N}")
    _check_m(M)
    var = poisson_variance(method, eta1, eta2, N) / M
    return VarianceReport(_letter(method), var, "ClosedFormPoisson", eta1, eta2, N, int(M))


def analytic_variance_equal_eta(dist_kind: str, eta: float, M: int) -> VarianceReport:
    """Large-N variance of the difference estimator for equal efficiencies.

    2 (1 - eta)^2 / M for a Poissonian source, 4 (1 - eta)^2 / M for a thermal
    one.  The Poissonian form is exact only as N grows; at finite N the
    exact value is (1 - eta) (2 (1 - eta) + 1/N) / M.
    """
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"efficiency must lie in [0, 1], got {eta}")
    _check_m(M)
    factor = {"poisson": 2.0, "thermal": 4.0}.get(dist_kind.lower())
    if factor is None:
        raise ParameterError(f"no equal-efficiency form for {dist_kind!r}")
    return VarianceReport("B", factor * (1.0 - eta) ** 2 / M, "ClosedFormEqualEta", eta, eta, math.inf, int(M))


def numeric_variance(method: str, dist: source.PairDistribution, eta1: float, eta2: float,
                     M: int) -> VarianceReport:
    """Delta-method variance of eta1 using exact moments and covariances."""
    _check_m(M)
    letter = _letter(method)
    meth = get_method(METHOD_NAMES[letter])
    mom = oracle.exact_moments(dist, eta1, eta2, coincidences=letter == "C", sample_size=int(M))
    g1, g2 = meth.grad(method_inputs(mom, meth))
    return VarianceReport(letter, delta_variance(g1, mom), "NumericExactMoments", eta1, eta2,
                          dist.mean, int(M), var_eta2=delta_variance(g2, mom))


def empirical_variance(records, method: str, background=None) -> VarianceReport:
    """Delta-method variance from sample covariances of the records.

    ``background`` (records or a :class:`MomentSet`) switches to the
    background-corrected estimator; its own sampling noise is included.
    """
    mom = records if isinstance(records, MomentSet) else sample_moments(records)
    name = METHOD_NAMES.get(method.upper(), method) if len(method) == 1 else method
    if background is None:
        est = estimate(mom, name)
    else:
        bg = background if isinstance(background, MomentSet) else sample_moments(background)
        est = corrected_estimate(mom, bg, name)
    letter = {v: k for k, v in METHOD_NAMES.items()}.get(est.method, est.method)
    return VarianceReport(letter, est.var_eta1, "EmpiricalDeltaMethod", est.eta1, est.eta2,
                          None, mom.sample_size, var_eta2=est.var_eta2)


def variance_curve(method: str, eta2_mode, N: float, M: int, eta1_grid) -> list[tuple[float, float]]:
    """(eta1, variance) pairs for a Poissonian source.

    ``eta2_mode`` is ``"equal"`` (eta2 = eta1) or a fixed eta2 value.
    ``N = math.inf`` evaluates the large-N limit analytically.
    """
    letter = _letter(method)
    if letter not in ("A", "B"):
        raise ParameterError("variance curves are defined for methods A and B")
    _check_m(M)
    out = []
    for eta1 in eta1_grid:
        eta1 = float(eta1)
        if not 0.0 < eta1 <= 1.0:
            raise ParameterError(f"grid values must lie in (0, 1], got {eta1}")
        eta2 = eta1 if eta2_mode in ("equal", "EqualToEta1") else float(eta2_mode)
        out.append((eta1, poisson_variance(letter, eta1, eta2, N) / M))
    return out


def default_grid(lo: float = 0.01, hi: float = 1.0, n: int = 100) -> np.ndarray:
    return np.linspace(lo, hi, n)
