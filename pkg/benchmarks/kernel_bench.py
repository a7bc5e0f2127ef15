"""Timing comparison of the compiled kernels against the numpy fallback.

Run after installing the package:

    python3 benchmarks/kernel_bench.py [modes_per_dim]

The hot loops are per-point, fusible operations (exp with guard, OU mode
update, weighted power sums, Hermite recurrences); the FFTs themselves
stay with numpy's pocketfft either way, so the table below bounds what
the extension can buy end to end.
"""

import sys
import time

import numpy as np

from expsqlab import kernels


def _time(fn, *args, reps=200):
    fn(*args)  # warm-up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps * 1e6


def main():
    m = int(sys.argv[1]) if len(sys.argv) > 1 else 256
    rng = np.random.default_rng(0)
    real = rng.standard_normal(m * m)
    weight = rng.random(m * m) + 0.5
    coeffs = (rng.standard_normal(m * m) + 1j * rng.standard_normal(m * m)).astype(np.complex128)
    decay = rng.random(m * m)
    noise = (rng.standard_normal(m * m) + 1j * rng.standard_normal(m * m)).astype(np.complex128)
    herm_x = rng.standard_normal(m * m)

    cases = [
        ("scaled_exp", lambda mod: mod.scaled_exp(real, 1.0, 0.1)),
        ("ou_step", lambda mod: mod.ou_step(coeffs, decay, noise)),
        ("apply_multiplier", lambda mod: mod.apply_multiplier(coeffs, decay)),
        ("weighted_abs2_sum", lambda mod: mod.weighted_abs2_sum(coeffs, weight)),
        ("hermite_rec n=8", lambda mod: mod.hermite_rec(8, herm_x, 1.0)),
    ]

    backends = [("python", kernels.PURE)]
    if kernels.COMPILED is not None:
        backends.append(("compiled", kernels.COMPILED))
    else:
        print("compiled extension not importable; timing the fallback only")

    print(f"array size {m}x{m} = {m * m} points, microseconds per call\n")
    header = f"{'kernel':<22}" + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, call in cases:
        times = [_time(lambda mod=mod: call(mod)) for _, mod in backends]
        row = f"{label:<22}" + "".join(f"{t:>12.1f}" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.2f}x"
        print(row)

    # sanity: both backends agree on the same inputs (reductions may
    # differ in summation order, hence the 1e-12 relative tolerance)
    if kernels.COMPILED is not None:
        for label, call in cases:
            a = call(kernels.PURE)
            b = call(kernels.COMPILED)
            pair = zip(a, b) if isinstance(a, tuple) else [(a, b)]
            for x, y in pair:
                if not np.allclose(x, y, rtol=1e-12, atol=0):
                    raise SystemExit(f"backend mismatch in {label}")
        print("\nbackends agree within 1e-12 on all benchmark inputs")


if __name__ == "__main__":
    main()
