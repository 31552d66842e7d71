"""Efficiency estimators built from singles (and optionally coincidence) moments.

Every estimator is a smooth function of a few sample means.  Each method
below carries its value and its hand-derived gradient with respect to those
means; the gradient drives the delta-method variances here and in
:mod:`paircal.error_model`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import BackgroundDominatesError, DegenerateMomentsError, MethodUnavailableError, ParameterError
from .moments import MomentSet

logger = logging.getLogger(__name__)

#: |<l> - <m>| above this many standard errors flags the equal-efficiency estimator
UNEQUAL_ARMS_SIGMAS = 5.0


@dataclass(frozen=True)
class EfficiencyEstimate:
    method: str
    eta1: float
    eta2: float
    var_eta1: float | None = None
    var_eta2: float | None = None
    background_corrected: bool = False
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "eta1": self.eta1,
            "eta2": self.eta2,
            "var_eta1": self.var_eta1,
            "var_eta2": self.var_eta2,
            "background_corrected": self.background_corrected,
            "flags": list(self.flags),
        }


# --- method cores: x maps statistic name -> mean -----------------------------

def _product_1(l, m, l2, lm):
    return lm / m - l2 / l + 1.0


def _product_1_grad(l, m, l2, lm):
    return {"l": l2 / l**2, "m": -lm / m**2, "l2": -1.0 / l, "lm": 1.0 / m}


def _difference_1(l, m, l2, d2):
    # divided through by m so that l == m, d2 == 0 gives exactly 1
    r = 1.0 - m / l
    return 0.5 * (3.0 - m / l + l2 * r * r / m - d2 / m)


def _difference_1_grad(l, m, l2, d2):
    r = 1.0 - m / l
    q = 3.0 * m - m * m / l + l2 * r * r - d2
    dq_dl = (m / l) ** 2 + 2.0 * l2 * r * m / l**2
    dq_dm = 3.0 - 2.0 * m / l - 2.0 * l2 * r / l
    return {
        "l": dq_dl / (2.0 * m),
        "m": dq_dm / (2.0 * m) - q / (2.0 * m * m),
        "l2": r * r / (2.0 * m),
        "diff2": -1.0 / (2.0 * m),
    }


def _product(x):
    return (_product_1(x["l"], x["m"], x["l2"], x["lm"]),
            _product_1(x["m"], x["l"], x["m2"], x["lm"]))


def _product_grad(x):
    g1 = _product_1_grad(x["l"], x["m"], x["l2"], x["lm"])
    g2 = _product_1_grad(x["m"], x["l"], x["m2"], x["lm"])
    return g1, {"m": g2["l"], "l": g2["m"], "m2": g2["l2"], "lm": g2["lm"]}


def _difference(x):
    return (_difference_1(x["l"], x["m"], x["l2"], x["diff2"]),
            _difference_1(x["m"], x["l"], x["m2"], x["diff2"]))


def _difference_grad(x):
    g1 = _difference_1_grad(x["l"], x["m"], x["l2"], x["diff2"])
    g2 = _difference_1_grad(x["m"], x["l"], x["m2"], x["diff2"])
    return g1, {"m": g2["l"], "l": g2["m"], "m2": g2["l2"], "diff2": g2["diff2"]}


def _equal_difference(x):
    eta = 1.0 - x["diff2"] / (x["l"] + x["m"])
    return eta, eta


def _equal_difference_grad(x):
    s2 = x["l"] + x["m"]
    g = {"l": x["diff2"] / s2**2, "m": x["diff2"] / s2**2, "diff2": -1.0 / s2}
    return g, dict(g)


def _coincidence(x):
    return x["c"] / x["m"], x["c"] / x["l"]


def _coincidence_grad(x):
    return ({"c": 1.0 / x["m"], "m": -x["c"] / x["m"] ** 2},
            {"c": 1.0 / x["l"], "l": -x["c"] / x["l"] ** 2})


class Method(NamedTuple):
    name: str
    inputs: tuple[str, ...]
    value: Callable
    grad: Callable


METHODS = {
    "product": Method("product", ("l", "m", "l2", "m2", "lm"), _product, _product_grad),
    "difference": Method("difference", ("l", "m", "l2", "m2", "diff2"), _difference, _difference_grad),
    "equal-difference": Method("equal-difference", ("l", "m", "diff2"), _equal_difference,
                               _equal_difference_grad),
    "coincidence": Method("coincidence", ("l", "m", "c"), _coincidence, _coincidence_grad),
}


def get_method(name: str) -> Method:
    try:
        return METHODS[name]
    except KeyError:
        raise ParameterError(f"unknown method {name!r}; choose from {sorted(METHODS)}") from None


def method_inputs(mom: MomentSet, method: Method) -> dict[str, float]:
    if "c" in method.inputs and not mom.has_coincidences:
        raise MethodUnavailableError(f"{method.name} method needs coincidence counts")
    x = {s: mom.mean(s) for s in method.inputs}
    for arm in ("l", "m"):
        if not x[arm] > 0:
            raise DegenerateMomentsError(
                f"{method.name} method: mean singles <{arm}> = {x[arm]!r} must be > 0"
            )
    return x


def gradient_vector(grad: dict[str, float], stats) -> np.ndarray:
    return np.array([grad.get(s, 0.0) for s in stats])


def delta_variance(grad: dict[str, float], mom: MomentSet) -> float:
    """g^T Sigma g with Sigma the covariance of the sample means."""
    g = gradient_vector(grad, mom.stats)
    return max(0.0, float(g @ mom.cov_of_means() @ g))


def estimate(mom: MomentSet, method: str) -> EfficiencyEstimate:
    """Apply a named method to a moment set.

    Variances are filled in when ``mom`` carries a covariance matrix.
    """
    meth = get_method(method)
    x = method_inputs(mom, meth)
    eta1, eta2 = meth.value(x)
    var1 = var2 = None
    if mom.cov is not None:
        g1, g2 = meth.grad(x)
        var1, var2 = delta_variance(g1, mom), delta_variance(g2, mom)
    flags = []
    for name, eta in (("eta1", eta1), ("eta2", eta2)):
        if not 0.0 <= eta <= 1.0:
            flags.append(f"{name}_out_of_range")
    if meth.name == "equal-difference" and _arms_differ(mom):
        flags.append("unequal_arms")
        logger.warning("equal-efficiency estimator used on arms with significantly different rates")
    return EfficiencyEstimate(meth.name, eta1, eta2, var1, var2, flags=tuple(flags))


def _arms_differ(mom: MomentSet) -> bool:
    delta = mom.mean_l - mom.mean_m
    var_diff = mom.mean_diff2 - delta * delta  # per-record Var(l - m)
    if var_diff <= 0:
        return delta != 0
    return abs(delta) > UNEQUAL_ARMS_SIGMAS * math.sqrt(var_diff / mom.sample_size)


def eta_product(mom: MomentSet) -> EfficiencyEstimate:
    """eta1 = <lm>/<m> - <l^2>/<l> + 1, and the mirror-image eta2."""
    return estimate(mom, "product")


def eta_difference(mom: MomentSet) -> EfficiencyEstimate:
    """Efficiencies from the variance of the singles difference, <(l - m)^2>."""
    return estimate(mom, "difference")


def eta_equal_difference(mom: MomentSet) -> EfficiencyEstimate:
    """eta = 1 - <(l-m)^2> / (2 <s>) with <s> = (<l> + <m>) / 2.

    Only valid for equal efficiencies; the estimate is flagged ``unequal_arms``
    when the two mean rates differ by more than five standard errors.
    """
    return estimate(mom, "equal-difference")


def eta_coincidence(mom: MomentSet) -> EfficiencyEstimate:
    """eta1 = <c>/<m>, eta2 = <c>/<l>."""
    return estimate(mom, "coincidence")


# --- background ---------------------------------------------------------------

CORRECTED = ("l", "m", "l2", "m2", "lm", "diff2")


def _corrected_values(r, b):
    dl_b = b["l"] - b["m"]
    return {
        "l": r["l"] - b["l"],
        "m": r["m"] - b["m"],
        "l2": r["l2"] - b["l2"] - 2.0 * r["l"] * b["l"] + 2.0 * b["l"] ** 2,
        "m2": r["m2"] - b["m2"] - 2.0 * r["m"] * b["m"] + 2.0 * b["m"] ** 2,
        "lm": r["lm"] - r["l"] * b["m"] - b["l"] * r["m"] + b["l"] * b["m"],
        "diff2": (r["diff2"] + 2.0 * dl_b**2 - 2.0 * (r["l"] - r["m"]) * dl_b
                  + 2.0 * b["l"] * b["m"] - b["l2"] - b["m2"]),
    }


def correction_jacobians(r: dict, b: dict) -> tuple[dict, dict]:
    """d(corrected)/d(raw means) and d(corrected)/d(background means).

    Each is ``{corrected_stat: {input_stat: derivative}}``.
    """
    dl_b = b["l"] - b["m"]
    dl_r = r["l"] - r["m"]
    j_raw = {
        "l": {"l": 1.0},
        "m": {"m": 1.0},
        "l2": {"l2": 1.0, "l": -2.0 * b["l"]},
        "m2": {"m2": 1.0, "m": -2.0 * b["m"]},
        "lm": {"lm": 1.0, "l": -b["m"], "m": -b["l"]},
        "diff2": {"diff2": 1.0, "l": -2.0 * dl_b, "m": 2.0 * dl_b},
    }
    j_bg = {
        "l": {"l": -1.0},
        "m": {"m": -1.0},
        "l2": {"l2": -1.0, "l": -2.0 * r["l"] + 4.0 * b["l"]},
        "m2": {"m2": -1.0, "m": -2.0 * r["m"] + 4.0 * b["m"]},
        "lm": {"l": -r["m"] + b["m"], "m": -r["l"] + b["l"]},
        "diff2": {"l": 4.0 * dl_b - 2.0 * dl_r + 2.0 * b["m"],
                  "m": -4.0 * dl_b + 2.0 * dl_r + 2.0 * b["l"],
                  "l2": -1.0, "m2": -1.0},
    }
    return j_raw, j_bg


def correct_background(raw: MomentSet, bg: MomentSet) -> MomentSet:
    """Signal-only moments from measured moments and a source-blocked background run.

    Assumes signal and background counts are statistically independent.
    Coincidence moments pass through unchanged since background never
    produces coincidences.
    """
    r = {s: raw.mean(s) for s in CORRECTED}
    b = {s: bg.mean(s) for s in CORRECTED}
    out = _corrected_values(r, b)
    for arm in ("l", "m"):
        if not out[arm] > 0:
            raise BackgroundDominatesError(
                f"background-corrected <{arm}> = {out[arm]:.6g} is not positive"
            )
    return MomentSet(**{"mean_" + s: v for s, v in out.items()},
                     mean_c=raw.mean_c, mean_c2=raw.mean_c2, sample_size=raw.sample_size)


def corrected_estimate(raw: MomentSet, bg: MomentSet, method: str) -> EfficiencyEstimate:
    """Background-corrected estimate with delta-method variances.

    Raw and background runs are independent samples, so their contributions
    to the variance add.  Needs covariance information in both moment sets.
    """
    meth = get_method(method)
    corrected = correct_background(raw, bg)
    x = method_inputs(corrected, meth)
    eta1, eta2 = meth.value(x)
    var1 = var2 = None
    if raw.cov is not None and bg.cov is not None:
        r = {s: raw.mean(s) for s in CORRECTED}
        b = {s: bg.mean(s) for s in CORRECTED}
        j_raw, j_bg = correction_jacobians(r, b)
        variances = []
        for g in meth.grad(x):
            g_raw = _chain(g, j_raw, passthrough=("c",))
            g_bg = _chain(g, j_bg, passthrough=())
            variances.append(delta_variance(g_raw, raw) + delta_variance(g_bg, bg))
        var1, var2 = variances
    flags = tuple(f"{n}_out_of_range" for n, e in (("eta1", eta1), ("eta2", eta2)) if not 0.0 <= e <= 1.0)
    return EfficiencyEstimate(meth.name, eta1, eta2, var1, var2, background_corrected=True, flags=flags)


def _chain(grad: dict, jac: dict, passthrough) -> dict:
    out: dict = {}
    for stat, g in grad.items():
        if stat in jac:
            for src, d in jac[stat].items():
                out[src] = out.get(src, 0.0) + g * d
        elif stat in passthrough:
            out[stat] = out.get(stat, 0.0) + g
    return out


def normalized_difference_variance(eta: float, N: float) -> float:
    """<(l-m)^2> / <s>^2 = (2/N)(1/eta - 1) for equal efficiencies."""
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"efficiency must lie in (0, 1], got {eta}")
    if eta == 0:
        raise ParameterError("normalized difference variance diverges at eta = 0")
    if not N > 0:
        raise ParameterError(f"mean pair number must be > 0, got {N}")
    return 2.0 / N * (1.0 / eta - 1.0)
