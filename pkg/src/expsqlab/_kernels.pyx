# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused per-point kernels: Hermite recurrence, guarded exponential,
mode-wise OU update and weighted coefficient reductions.

One pass per array where numpy needs two or three; the FFTs that dominate
the heavier experiments live in numpy/pocketfft and are not duplicated here.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fmin

cnp.import_array()

__all__ = [
    "hermite_rec",
    "scaled_exp",
    "ou_step",
    "apply_multiplier",
    "weighted_abs2_sum",
]


def hermite_rec(int n, cnp.ndarray[cnp.float64_t, ndim=1] x, double sigma):
    cdef Py_ssize_t i, m = x.shape[0]
    cdef int j
    cdef double xi, hp, hc, hn
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    for i in range(m):
        xi = x[i]
        hp = 1.0
        if n == 0:
            out[i] = 1.0
            continue
        hc = xi
        for j in range(1, n):
            hn = xi * hc - (j * sigma) * hp
            hp = hc
            hc = hn
        out[i] = hc
    return out


def scaled_exp(cnp.ndarray[cnp.float64_t, ndim=1] values, double alpha, double shift):
    cdef Py_ssize_t i, m = values.shape[0]
    cdef double e, mx = -1e308
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    for i in range(m):
        e = alpha * values[i] - shift
        if e > mx:
            mx = e
        out[i] = exp(fmin(e, 705.0))
    return out, mx


def ou_step(cnp.ndarray[cnp.complex128_t, ndim=1] coeffs,
            cnp.ndarray[cnp.float64_t, ndim=1] decay,
            cnp.ndarray[cnp.complex128_t, ndim=1] noise):
    cdef Py_ssize_t i, m = coeffs.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=np.complex128)
    for i in range(m):
        out[i] = decay[i] * coeffs[i] + noise[i]
    return out


def apply_multiplier(cnp.ndarray[cnp.complex128_t, ndim=1] coeffs,
                     cnp.ndarray[cnp.float64_t, ndim=1] mult):
    cdef Py_ssize_t i, m = coeffs.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=np.complex128)
    for i in range(m):
        out[i] = mult[i] * coeffs[i]
    return out


def weighted_abs2_sum(cnp.ndarray[cnp.complex128_t, ndim=1] coeffs,
                      cnp.ndarray[cnp.float64_t, ndim=1] weights):
    cdef Py_ssize_t i, m = coeffs.shape[0]
    cdef double acc = 0.0, re, im
    for i in range(m):
        re = coeffs[i].real
        im = coeffs[i].imag
        acc += weights[i] * (re * re + im * im)
    return acc
