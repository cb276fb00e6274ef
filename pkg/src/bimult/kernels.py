"""Hot loops with a numba backend and a pure-numpy fallback.

The backend is chosen once at import time.  Set ``BIMULT_NUMBA=0`` to force
the numpy path (numba is also skipped when it cannot be imported).  Both
implementations of every kernel stay importable under ``*_numpy`` and
``*_numba`` names so they can be compared directly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("BIMULT_NUMBA", "1").strip().lower() not in (
    "0", "false", "no", "off")
BACKEND = "numba" if USE_NUMBA else "numpy"

__all__ = [
    "BACKEND",
    "antidiag_sum",
    "bilinear_bruteforce",
    "trilinear_bruteforce",
    "window_averages",
    "dyadic_widths",
]


# -- anti-diagonal sums ------------------------------------------------------

def antidiag_sum_numpy(H: np.ndarray) -> np.ndarray:
    """``G[(i + j - M/2) mod M] = sum H[i, j]`` for centered frequency labels."""
    M = H.shape[0]
    idx = (np.arange(M)[:, None] + np.arange(M)[None, :] - M // 2) % M
    flat = idx.ravel()
    re = np.bincount(flat, weights=H.real.ravel(), minlength=M)
    im = np.bincount(flat, weights=H.imag.ravel(), minlength=M)
    return re + 1j * im


def _antidiag_sum_py(H):
    M = H.shape[0]
    half = M // 2
    G = np.zeros(M, dtype=np.complex128)
    for i in range(M):
        for j in range(M):
            G[(i + j - half) % M] += H[i, j]
    return G


# -- brute-force multilinear sums --------------------------------------------

def bilinear_bruteforce_numpy(S, fh, gh, x, k, L):
    """``T(x) = L^-2 sum_{k1,k2} S fh gh exp(2 pi i x (k1+k2)/L)``.

    Loops over ``k1`` in order, so the summation order is fixed.
    """
    E = np.exp(2j * np.pi * np.multiply.outer(x, k) / L)  # (x, k)
    out = np.zeros(x.shape[0], dtype=np.complex128)
    for i1 in range(k.shape[0]):
        row = S[i1] * fh[i1] * gh  # over k2
        out += E[:, i1] * (E @ row)
    return out / L ** 2


def _characters(x, k, L):
    # e[n, i] = exp(2 pi i x_n k_i / L), built once per call
    nx = x.shape[0]
    nk = k.shape[0]
    e = np.empty((nx, nk), dtype=np.complex128)
    for n in range(nx):
        for i in range(nk):
            ph = 2.0 * np.pi * x[n] * k[i] / L
            e[n, i] = np.cos(ph) + 1j * np.sin(ph)
    return e


def _bilinear_bruteforce_py(S, fh, gh, x, k, L):
    nx = x.shape[0]
    nk = k.shape[0]
    e = _characters(x, k, L)
    out = np.zeros(nx, dtype=np.complex128)
    for n in range(nx):
        acc = 0.0 + 0.0j
        for i1 in range(nk):
            a = 0.0 + 0.0j
            for i2 in range(nk):
                a += S[i1, i2] * gh[i2] * e[n, i2]
            acc += a * fh[i1] * e[n, i1]
        out[n] = acc / (L * L)
    return out


def trilinear_bruteforce_numpy(S, f1, f2, f3, x, k, L):
    """Three-fold version of :func:`bilinear_bruteforce_numpy`."""
    E = np.exp(2j * np.pi * np.multiply.outer(x, k) / L)
    out = np.zeros(x.shape[0], dtype=np.complex128)
    for i1 in range(k.shape[0]):
        inner = np.zeros(x.shape[0], dtype=np.complex128)
        for i2 in range(k.shape[0]):
            row = S[i1, i2] * f3
            inner += E[:, i2] * f2[i2] * (E @ row)
        out += E[:, i1] * f1[i1] * inner
    return out / L ** 3


def _trilinear_bruteforce_py(S, f1, f2, f3, x, k, L):
    nx = x.shape[0]
    nk = k.shape[0]
    e = _characters(x, k, L)
    out = np.zeros(nx, dtype=np.complex128)
    for n in range(nx):
        acc = 0.0 + 0.0j
        for i1 in range(nk):
            a1 = 0.0 + 0.0j
            for i2 in range(nk):
                a2 = 0.0 + 0.0j
                for i3 in range(nk):
                    a2 += S[i1, i2, i3] * f3[i3] * e[n, i3]
                a1 += a2 * f2[i2] * e[n, i2]
            acc += a1 * f1[i1] * e[n, i1]
        out[n] = acc / (L * L * L)
    return out


# -- windowed averages for the maximal function ------------------------------

def dyadic_widths(M: int) -> np.ndarray:
    """Half-widths (in samples) 0, 1, 2, 4, ... up to M/2."""
    w = [0]
    t = 1
    while t <= M // 2:
        w.append(t)
        t *= 2
    if w[-1] != M // 2:
        w.append(M // 2)
    return np.array(w, dtype=np.int64)


def window_averages_numpy(a: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """Max over half-widths ``w`` of the periodic trapezoid average of ``a``.

    The trapezoid average over ``[x - w h, x + w h]`` is the mean of the
    piecewise-linear interpolant; ``w = 0`` is the point value.
    """
    M = a.shape[0]
    ext = np.concatenate([a, a, a])
    P = np.concatenate([[0.0], np.cumsum(ext)])
    n = np.arange(M) + M
    best = a.copy()
    for w in widths:
        if w == 0:
            continue
        s = P[n + w + 1] - P[n - w] - 0.5 * (ext[n - w] + ext[n + w])
        np.maximum(best, s / (2 * w), out=best)
    return best


def _window_averages_py(a, widths):
    M = a.shape[0]
    best = a.copy()
    P = np.zeros(3 * M + 1)
    for i in range(3 * M):
        P[i + 1] = P[i] + a[i % M]
    for x in range(M):
        n = x + M
        for w in widths:
            if w == 0:
                continue
            s = P[n + w + 1] - P[n - w] - 0.5 * (a[(n - w) % M] + a[(n + w) % M])
            v = s / (2 * w)
            if v > best[x]:
                best[x] = v
    return best


if HAVE_NUMBA:
    _characters = njit(cache=True)(_characters)
    antidiag_sum_numba = njit(cache=True)(_antidiag_sum_py)
    bilinear_bruteforce_numba = njit(cache=True)(_bilinear_bruteforce_py)
    trilinear_bruteforce_numba = njit(cache=True)(_trilinear_bruteforce_py)
    window_averages_numba = njit(cache=True)(_window_averages_py)
else:  # pragma: no cover
    antidiag_sum_numba = antidiag_sum_numpy
    bilinear_bruteforce_numba = bilinear_bruteforce_numpy
    trilinear_bruteforce_numba = trilinear_bruteforce_numpy
    window_averages_numba = window_averages_numpy


if USE_NUMBA:
    _antidiag, _bil, _tril, _win = (antidiag_sum_numba, bilinear_bruteforce_numba,
                                    trilinear_bruteforce_numba, window_averages_numba)
else:
    _antidiag, _bil, _tril, _win = (antidiag_sum_numpy, bilinear_bruteforce_numpy,
                                    trilinear_bruteforce_numpy, window_averages_numpy)


def antidiag_sum(H: np.ndarray) -> np.ndarray:
    return _antidiag(np.ascontiguousarray(H, dtype=np.complex128))


def bilinear_bruteforce(S, fh, gh, x, k, L):
    c = np.ascontiguousarray
    return _bil(c(S, dtype=np.complex128), c(fh, dtype=np.complex128),
                c(gh, dtype=np.complex128), c(x, dtype=float), c(k, dtype=float), float(L))


def trilinear_bruteforce(S, f1, f2, f3, x, k, L):
    c = np.ascontiguousarray
    return _tril(c(S, dtype=np.complex128), c(f1, dtype=np.complex128),
                 c(f2, dtype=np.complex128), c(f3, dtype=np.complex128),
                 c(x, dtype=float), c(k, dtype=float), float(L))


def window_averages(a: np.ndarray, widths: np.ndarray) -> np.ndarray:
    return _win(np.ascontiguousarray(a, dtype=float), np.asarray(widths, dtype=np.int64))
