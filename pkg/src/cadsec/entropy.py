"""Entropy primitives in bits.

The rate formulas subtract quantities that are all close to 1 bit once the
block size grows, so most helpers here return *deficits* (distance from the
maximum) computed without cancellation instead of the entropies themselves.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NotPositiveSemidefinite, OutOfRange

LN2 = math.log(2.0)

# spectra coming out of a diagonalization may carry roundoff of this size
NEGATIVE_EIGENVALUE_TOL = 1e-12


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2(1-p), with 0 log 0 = 0."""
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise OutOfRange(f"binary_entropy: p={p!r} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    if p > 0.5:
        p = 1.0 - p
    return (-p * math.log(p) - (1.0 - p) * math.log1p(-p)) / LN2


def binary_entropy_array(p, one_minus_p=None):
    """Vectorised h(p).  Pass ``one_minus_p`` when 1-p is known more precisely."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p if one_minus_p is None else np.asarray(one_minus_p, dtype=float)
    small = np.minimum(p, q)
    # -(1-s) log(1-s) ~ s/ln2 survives even when 1-s rounds to 1
    out = xlogx_bits(small) - (1.0 - small) * np.log1p(-small) / LN2
    return out if out.ndim else float(out)


def xlogx_bits(p):
    """Elementwise -p log2 p with the 0 log 0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = -p[pos] * np.log(p[pos]) / LN2
    return out


def shannon_entropy(weights) -> float:
    """Entropy of a probability vector whose largest entry may be ~1.

    The largest weight is handled through ``log1p`` of the sum of the others,
    which keeps full relative precision when the rest are tiny.
    """
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        return 0.0
    k = int(np.argmax(w))
    rest = np.delete(w, k)
    delta = float(rest.sum())
    top = -(1.0 - delta) * math.log1p(-delta) / LN2 if delta < 1.0 else 0.0
    return float(xlogx_bits(rest).sum()) + top


def spectrum_entropy(eigenvalues, multiplicities=None) -> float:
    """Von Neumann entropy (bits) of a spectrum, clamping roundoff negatives."""
    ev = np.asarray(eigenvalues, dtype=float)
    if ev.size and ev.min() < -NEGATIVE_EIGENVALUE_TOL:
        raise NotPositiveSemidefinite(f"eigenvalue {ev.min():.3e} is negative")
    ev = np.clip(ev, 0.0, None)
    terms = xlogx_bits(ev)
    if multiplicities is not None:
        terms = terms * np.asarray(multiplicities, dtype=float)
    return float(terms.sum())


def two_level_deficit(x):
    """1 - h((1+x)/2) for x in [-1, 1], accurate down to x ~ 1e-150.

    Uses (1+x)ln(1+x) + (1-x)ln(1-x) = 2x atanh(x) + ln(1-x^2), whose two
    terms only cancel by a factor of two.
    """
    x = np.abs(np.asarray(x, dtype=float))
    out = np.ones_like(x)
    inner = x < 1.0
    xi = x[inner]
    out[inner] = (2.0 * xi * np.arctanh(xi) + np.log1p(-xi * xi)) / (2.0 * LN2)
    return out if out.ndim else float(out)


def _kl_term(x):
    """(1+x) ln(1+x) - x for x >= -1, series near zero."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-2
    xs = x[small]
    acc = np.zeros_like(xs)
    for k in range(9, 1, -1):
        acc = acc + (-1) ** k * xs**k / (k * (k - 1))
    out[small] = acc
    big = ~small
    xb = x[big]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(xb > -1.0, (1.0 + xb) * np.log1p(np.maximum(xb, -1.0)) - xb, 1.0)
    out[big] = val
    return out


def uniform_deficit(x) -> float:
    """log2(d) - S for a spectrum written as a_k = (1 + x_k)/d with sum(x) = 0."""
    x = np.asarray(x, dtype=float)
    if x.size and x.min() < -1.0 - NEGATIVE_EIGENVALUE_TOL * x.size:
        raise NotPositiveSemidefinite(f"eigenvalue offset {x.min():.3e} below -1")
    x = np.clip(x, -1.0, None)
    return float(_kl_term(x).sum() / (x.size * LN2))
