"""Pure-numpy fallbacks for the compiled per-point kernels.

Signatures and dtype contracts match ``_kernels`` exactly: 1-D contiguous
float64 / complex128 arrays in, fresh arrays out.
"""

import numpy as np

__all__ = [
    "hermite_rec",
    "scaled_exp",
    "ou_step",
    "apply_multiplier",
    "weighted_abs2_sum",
]


def hermite_rec(n, x, sigma):
    """H_n(x; sigma) by the three-term recurrence, vectorized over x."""
    x = np.asarray(x, dtype=np.float64)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev
    h = x.copy()
    for j in range(1, n):
        h, h_prev = x * h - (j * sigma) * h_prev, h
    return h


def scaled_exp(values, alpha, shift):
    """exp(alpha*values - shift) plus the max exponent (overflow guard)."""
    expo = alpha * values - shift
    m = float(expo.max()) if expo.size else float("-inf")
    # cap only to dodge the RuntimeWarning; callers reject m > 700 anyway
    return np.exp(np.minimum(expo, 705.0)), m


def ou_step(coeffs, decay, noise):
    return decay * coeffs + noise


def apply_multiplier(coeffs, mult):
    return mult * coeffs


def weighted_abs2_sum(coeffs, weights):
    c = coeffs.view(np.float64)
    return float(np.dot(weights, c[0::2] * c[0::2] + c[1::2] * c[1::2]))
