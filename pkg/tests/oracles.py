"""Independent reference computations used by the tests.

Written against numpy/mpmath from the textbook formulas rather than by
calling into the package, so a bug in the package cannot hide in both.
"""

import math

import numpy as np


def poisson_gain(mu, eta, Y0, n_max=60):
    """Overall gain as an explicit sum over photon numbers."""
    total = []
    p = math.exp(-mu)
    for n in range(n_max + 1):
        if n:
            p *= mu / n
        total.append(p * (1.0 - (1.0 - Y0) * (1.0 - eta) ** n))
    return math.fsum(total)


def h2(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    return np.where((x <= 0) | (x >= 1), 0.0, out)


def rate_grid(mu, eta, Y0, e_d=0.01, f=1.22, q=1.0):
    """Unclamped key fraction per gate, vectorized over ``mu``."""
    mu = np.asarray(mu, dtype=float)
    signal = -np.expm1(-eta * mu)
    Q = 1 - (1 - Y0) * np.exp(-eta * mu)
    E = (0.5 * Y0 + e_d * signal) / Q
    Y1 = Y0 + eta - Y0 * eta
    e1 = (0.5 * Y0 + e_d * eta) / Y1
    Q1 = Y1 * mu * np.exp(-mu)
    return q * (Q1 * (1 - h2(e1)) - Q * f * h2(E))


def grid_argmax_mu(eta, Y0, lo=0.01, hi=2.0, n=2000, **kw):
    mus = np.linspace(lo, hi, n)
    r = rate_grid(mus, eta, Y0, **kw)
    k = int(np.argmax(r))
    return mus[k], r[k], mus[1] - mus[0]


def subset_sums(values):
    """Sum and size of every subset of ``values`` (2**n entries, bitmask order)."""
    sums = np.zeros(1)
    sizes = np.zeros(1, dtype=int)
    for v in values:
        sums = np.concatenate([sums, sums + v])
        sizes = np.concatenate([sizes, sizes + 1])
    return sums, sizes


def exhaustive_max_count(contribs, dark, mu, eta, min_rate_bps, rep_rate_hz, e_d=0.01):
    """Largest feasible subset size by enumerating every subset; -1 if none is feasible."""
    sums, sizes = subset_sums(contribs)
    r = rate_grid(mu, eta, dark + sums, e_d=e_d) * rep_rate_hz
    ok = (r > 0) & (r >= min_rate_bps)
    return int(sizes[ok].max()) if ok.any() else -1
