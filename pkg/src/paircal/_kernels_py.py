"""Pure NumPy versions of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import numpy as np
from scipy.stats import binom


def accumulate(l, m, c=None):
    l = np.asarray(l, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    cols = [l, m, l * l, m * m, l * m, (l - m) ** 2]
    if c is not None:
        c = np.asarray(c, dtype=np.float64)
        cols += [c, c * c]
    u = np.column_stack(cols) if l.size else np.zeros((0, len(cols)))
    return u.sum(axis=0), u.T @ u


def _row(k, eta):
    return binom.pmf(np.arange(k + 1), k, eta)


def triple_sum(g, eta1, eta2, order):
    g = np.asarray(g, dtype=np.float64)
    o = order + 1
    out = np.zeros((o, o))
    powers = np.arange(o)
    for k, gk in enumerate(g):
        if gk == 0.0:
            continue
        idx = np.arange(k + 1, dtype=np.float64)
        pl = idx[:, None] ** powers  # (k+1, o)
        w = gk * np.outer(_row(k, eta1), _row(k, eta2))  # every (l, m) term
        out += pl.T @ w @ pl
    return out


def coincidence_sum(g, eta1, eta2, order):
    g = np.asarray(g, dtype=np.float64)
    kmax = g.size - 1
    o = order + 1
    powers = np.arange(o)
    h = np.zeros((kmax + 1, o))
    for l in range(kmax + 1):
        c = np.arange(l + 1, dtype=np.float64)
        h[l] = _row(l, eta2) @ (c[:, None] ** powers)
    out = np.zeros(o)
    for k, gk in enumerate(g):
        if gk == 0.0:
            continue
        out += gk * (_row(k, eta1) @ h[: k + 1])
    return out
