"""Backend parity and per-point kernel contracts.

The compiled extension and the numpy fallback must agree bit-for-bit on
elementwise operations; reductions may differ by summation order only.
"""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from expsqlab import kernels

needs_compiled = pytest.mark.skipif(
    kernels.COMPILED is None, reason="compiled extension not available"
)

finite64 = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False, width=64
)


def _rand_complex(rng, n):
    return np.ascontiguousarray(
        rng.standard_normal(n) + 1j * rng.standard_normal(n)
    )


@needs_compiled
def test_elementwise_parity():
    rng = np.random.default_rng(77)
    c = _rand_complex(rng, 4096)
    decay = np.ascontiguousarray(rng.uniform(0.0, 1.0, 4096))
    noise = _rand_complex(rng, 4096)
    assert np.array_equal(
        kernels.PURE.ou_step(c, decay, noise), kernels.COMPILED.ou_step(c, decay, noise)
    )
    assert np.array_equal(
        kernels.PURE.apply_multiplier(c, decay),
        kernels.COMPILED.apply_multiplier(c, decay),
    )
    x = np.ascontiguousarray(rng.standard_normal(4096))
    for n in (0, 1, 2, 7):
        assert np.array_equal(
            kernels.PURE.hermite_rec(n, x, 0.8), kernels.COMPILED.hermite_rec(n, x, 0.8)
        )


@needs_compiled
def test_reduction_parity():
    rng = np.random.default_rng(78)
    c = _rand_complex(rng, 4096)
    w = np.ascontiguousarray(rng.uniform(0.1, 3.0, 4096))
    a = kernels.PURE.weighted_abs2_sum(c, w)
    b = kernels.COMPILED.weighted_abs2_sum(c, w)
    assert a == pytest.approx(b, rel=1e-12)


@needs_compiled
def test_scaled_exp_parity():
    rng = np.random.default_rng(79)
    v = np.ascontiguousarray(rng.normal(0.0, 5.0, 4096))
    out_p, m_p = kernels.PURE.scaled_exp(v, 1.3, 0.4)
    out_c, m_c = kernels.COMPILED.scaled_exp(v, 1.3, 0.4)
    assert m_p == m_c
    assert np.allclose(out_p, out_c, rtol=1e-12, atol=0)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 64), elements=finite64),
    st.floats(-3.0, 3.0),
    st.floats(-5.0, 5.0),
)
def test_scaled_exp_contract(values, alpha, shift):
    values = np.ascontiguousarray(values)
    out, max_exp = kernels.scaled_exp(values, alpha, shift)
    expo = alpha * values - shift
    assert max_exp == float(expo.max())
    # capped at 705 to avoid inf; below the cap it is the exact exp
    mask = expo <= 705.0
    assert np.array_equal(out[mask], np.exp(expo[mask]))
    assert np.all(np.isfinite(out))


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 32), elements=st.floats(-30.0, 30.0)),
    st.integers(0, 12),
    st.floats(0.0, 4.0),
)
def test_hermite_rec_matches_recurrence(x, n, sigma):
    x = np.ascontiguousarray(x)
    got = kernels.hermite_rec(n, x, sigma)
    h_prev, h = np.ones_like(x), x.copy()
    if n == 0:
        expected = h_prev
    else:
        for j in range(1, n):
            h, h_prev = x * h - (j * sigma) * h_prev, h
        expected = h
    assert np.allclose(got, expected, rtol=1e-12, atol=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 64), st.integers(0, 2**32 - 1))
def test_weighted_abs2_sum_matches_manual(n, seed):
    rng = np.random.default_rng(seed)
    c = _rand_complex(rng, n)
    w = np.ascontiguousarray(rng.uniform(0.0, 2.0, n))
    got = kernels.weighted_abs2_sum(c, w)
    assert got == pytest.approx(float(np.sum(w * np.abs(c) ** 2)), rel=1e-12)


def test_scaled_exp_empty():
    out, m = kernels.scaled_exp(np.empty(0), 1.0, 0.0)
    assert out.size == 0
    assert m == float("-inf")


def test_backend_env_override():
    # EXPSQLAB_PURE=1 must force the python backend in a fresh process
    env = dict(os.environ, EXPSQLAB_PURE="1")
    code = "import expsqlab.kernels as k; print(k.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "python"


def test_backend_reported():
    assert kernels.BACKEND in ("python", "compiled")
    if kernels.COMPILED is not None and os.environ.get("EXPSQLAB_PURE") != "1":
        assert kernels.BACKEND == "compiled"
