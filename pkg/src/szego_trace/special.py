"""Riemann and Hurwitz zeta by Euler-Maclaurin summation.

Works on numpy arrays of complex arguments.  For ``Re w >= -1/2`` the
Euler-Maclaurin tail is used directly; for ``Re w < -1/2`` with integer
offset the Riemann reflection formula moves the evaluation to ``1 - w``,
which avoids the cancellation of huge partial sums.  The reflected
argument then stays away from the pole at 1.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gamma

EM_TERMS = 15
REFLECT_BELOW = -0.5


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2 (Akiyama-Tanigawa)."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return a[0] if n != 1 else Fraction(-1, 2)


@lru_cache(maxsize=None)
def _em_coefficients(terms: int) -> tuple:
    return tuple(float(bernoulli(2 * i) / math.factorial(2 * i)) for i in range(1, terms + 1))


def _hurwitz_em(w: np.ndarray, a: float) -> np.ndarray:
    wmax = float(np.max(np.abs(w))) if w.size else 0.0
    N = max(0, int(math.ceil(2.0 * wmax + 20.0 - a)))
    x = a + N
    out = np.zeros(w.shape, dtype=complex)
    if N:
        bases = (a + np.arange(N, dtype=float)).reshape((N,) + (1,) * w.ndim)
        out += np.sum(bases ** (-w), axis=0)
    xw = x ** (-w)
    out += x * xw / (w - 1.0) + 0.5 * xw
    rising = w.copy()
    xpow = xw / x
    for i, c in enumerate(_em_coefficients(EM_TERMS), start=1):
        out += c * rising * xpow
        rising = rising * (w + 2 * i - 1) * (w + 2 * i)
        xpow = xpow / (x * x)
    return out


def riemann_zeta(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    out = np.empty(w.shape, dtype=complex)
    right = w.real >= REFLECT_BELOW
    if np.any(right):
        out[right] = _hurwitz_em(w[right], 1.0)
    left = ~right
    if np.any(left):
        wl = w[left]
        refl = _hurwitz_em(1.0 - wl, 1.0)
        out[left] = (2.0 ** wl) * (np.pi ** (wl - 1.0)) * np.sin(np.pi * wl / 2.0) * gamma(1.0 - wl) * refl
    return out


def hurwitz_zeta(w, a) -> np.ndarray:
    """sum_{k>=0} (a + k)^(-w), continued to w != 1; a > 0."""
    w = np.asarray(w, dtype=complex)
    if a <= 0:
        raise ValueError("offset must be positive")
    out = np.empty(w.shape, dtype=complex)
    right = w.real >= REFLECT_BELOW
    if np.any(right):
        out[right] = _hurwitz_em(w[right], float(a))
    left = ~right
    if np.any(left):
        wl = w[left]
        if float(a).is_integer():
            acc = riemann_zeta(wl)
            for k in range(1, int(a)):
                acc -= float(k) ** (-wl)
            out[left] = acc
        else:
            out[left] = _hurwitz_em(wl, float(a))
    return out
