import math

import numpy as np
import pytest

from paircal import _kernels_py, source

ETA_GRID = [round(0.05 * i, 2) for i in range(1, 21)]
N_GRID = [0.5, 1.0, 5.0, 50.0]
DISTS = [source.poisson(n) for n in N_GRID] + [source.thermal(n) for n in N_GRID]


def dist_id(d):
    return f"{d.kind}-{d.mean:g}"


def compound_poisson_background(sig: dict, lam1: float, lam2: float) -> tuple[dict, dict]:
    """Measured and background means when independent Poisson backgrounds are added.

    Worked out directly from l_M = l + l_B, m_M = m + m_B with Poisson l_B, m_B.
    """
    l, m, l2, m2, lm = sig["l"], sig["m"], sig["l2"], sig["m2"], sig["lm"]
    raw = {
        "l": l + lam1,
        "m": m + lam2,
        "l2": l2 + 2 * l * lam1 + lam1 + lam1**2,
        "m2": m2 + 2 * m * lam2 + lam2 + lam2**2,
        "lm": lm + l * lam2 + lam1 * m + lam1 * lam2,
    }
    raw["diff2"] = raw["l2"] + raw["m2"] - 2 * raw["lm"]
    bg = {"l": lam1, "m": lam2, "l2": lam1 + lam1**2, "m2": lam2 + lam2**2, "lm": lam1 * lam2}
    bg["diff2"] = bg["l2"] + bg["m2"] - 2 * bg["lm"]
    return raw, bg


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.fixture(params=["compiled", "python"])
def kernels(request):
    if request.param == "python":
        return _kernels_py
    try:
        from paircal import _kernels
    except ImportError:
        pytest.skip("compiled kernels not built")
    return _kernels
