"""Solver checks: scalar ODE oracle, exact linear limits, splitting
bookkeeping, sign structure and contraction."""

import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from expsqlab import (
    ContractionReport,
    CutoffProfile,
    FieldPath,
    RngStream,
    SqeConfig,
    constant_field,
    contraction_check,
    gff_sample,
    heat_semigroup,
    make_grid,
    make_wick_params,
    measure_product,
    ou_decay,
    ou_path,
    solve_shifted,
    solve_sqe_full,
    solve_sqe_projected,
    time_grid,
    to_spectral,
    wick_exp_ou,
    zero_field,
)


def _params(grid, alpha=1.0, level=2, sharp=None):
    psi = sharp or CutoffProfile("sharp")
    return make_wick_params(alpha, level, psi, grid), psi


def _constant_forcing(config, grid, value=1.0):
    times = time_grid(config)
    return FieldPath(times=times, fields=[constant_field(grid, value)] * len(times))


def _shifted_config(grid, dt, horizon=1.0, alpha=1.0, level=0, **kw):
    params, psi = _params(grid, alpha=alpha, level=level)
    return SqeConfig(
        horizon=horizon, dt=dt, params=params, psi=psi, equation="shifted", **kw
    )


def _constant_mode_final(grid, dt, u0, alpha=1.0):
    config = _shifted_config(grid, dt, alpha=alpha)
    path = solve_shifted(
        constant_field(grid, u0), _constant_forcing(config, grid), config
    )
    return float(path.final().values()[0, 0])


def test_scalar_ode_oracle():
    # constant data and forcing reduce every grid point to the scalar ODE
    # u' = -u/2 - (alpha/2) e^{alpha u}; integrate it to rtol 1e-12 and
    # check the stepper converges at first order to that value
    grid = make_grid(8)
    u0, alpha = 0.4, 1.0
    ivp = solve_ivp(
        lambda t, u: -0.5 * u - 0.5 * alpha * np.exp(alpha * u),
        (0.0, 1.0),
        [u0],
        rtol=1e-12,
        atol=1e-14,
        dense_output=False,
    )
    ref = float(ivp.y[0, -1])
    ps = np.array([3, 4, 5, 6])
    errs = np.array(
        [abs(_constant_mode_final(grid, 2.0**-p, u0, alpha) - ref) for p in ps]
    )
    assert np.all(np.diff(errs) < 0)
    order = -np.polyfit(ps, np.log2(errs), 1)[0]
    assert order > 0.9
    # first-order structure: Richardson extrapolation removes most of it
    u_h = _constant_mode_final(grid, 2.0**-8, u0, alpha)
    u_h2 = _constant_mode_final(grid, 2.0**-9, u0, alpha)
    assert abs(2.0 * u_h2 - u_h - ref) < 0.05 * abs(u_h2 - ref)


def test_zero_forcing_is_heat_flow(grid32, stream):
    # chi = 0 switches the nonlinearity off: the flow must be the exact
    # per-mode decay of (Lap - 1)/2
    config = _shifted_config(grid32, dt=1.0 / 16, level=1)
    times = time_grid(config)
    zeros = FieldPath(times=times, fields=[zero_field(grid32)] * len(times))
    upsilon = heat_semigroup(gff_sample(grid32, stream), 0.2)
    path = solve_shifted(upsilon, zeros, config)
    expected = upsilon.coeffs * ou_decay(grid32, 1.0)
    assert np.abs(path.final().coeffs - expected).max() < 1e-13


def test_alpha_zero_full_solve_is_projected_ou(grid32, stream):
    params, psi = _params(grid32, alpha=0.0, level=2)
    config = SqeConfig(horizon=0.5, dt=1.0 / 32, params=params, psi=psi)
    phi0 = gff_sample(grid32, stream.child("init"))
    x_traj = ou_path(phi0, time_grid(config), stream.child("noise"))
    path = solve_sqe_full(phi0, config, stream, x_traj=x_traj)
    mult = psi.multiplier(grid32, 2)
    for state, x in zip(path.states, x_traj.states):
        assert np.abs(state.coeffs - mult * x.coeffs).max() < 1e-12
    _, y_part = path.decomposition
    assert all(np.abs(y.coeffs).max() < 1e-12 for y in y_part.fields)


def test_decomposition_sums_exactly(grid32, stream):
    params, psi = _params(grid32, alpha=1.0, level=2)
    config = SqeConfig(horizon=0.5, dt=1.0 / 32, params=params, psi=psi)
    phi0 = gff_sample(grid32, stream.child("init"))
    path = solve_sqe_full(phi0, config, stream.child("noise"))
    x_part, y_part = path.decomposition
    for state, x, y in zip(path.states, x_part.fields, y_part.fields):
        assert np.abs(x.coeffs + y.coeffs - state.coeffs).max() < 1e-13


def test_remainder_matches_independent_shifted_solve(grid32, stream):
    # on a shared time grid the subtraction remainder and the directly
    # integrated shifted equation coincide to rounding
    params, psi = _params(grid32, alpha=1.0, level=2)
    config = SqeConfig(horizon=0.5, dt=1.0 / 32, params=params, psi=psi)
    phi0 = gff_sample(grid32, stream.child("init"))
    path = solve_sqe_full(phi0, config, stream.child("noise"))
    _, y_part = path.decomposition
    shifted = path.diagnostics["shifted_path"]
    gaps = [
        np.abs(y.coeffs - s.coeffs).max()
        for y, s in zip(y_part.fields, shifted.fields)
    ]
    assert max(gaps) < 1e-10


def test_remainder_sign_structure(grid32, stream):
    # from zero initial datum with positive charge the remainder stays
    # nonpositive at every grid point and every step
    config = _shifted_config(grid32, dt=1.0 / 32, horizon=0.5, level=2)
    times = time_grid(config)
    traj = ou_path(gff_sample(grid32, stream.child("x0")), times, stream.child("ou"))
    chi = wick_exp_ou(traj, config.params, config.psi)
    path = solve_shifted(zero_field(grid32), chi, config)
    assert path.diagnostics["max_values"].max() <= 1e-12


def test_contraction_identical_inputs(grid32, stream):
    config = _shifted_config(grid32, dt=1.0 / 16, horizon=0.5, level=1)
    upsilon = heat_semigroup(gff_sample(grid32, stream), 0.2)
    report = contraction_check(upsilon, upsilon, _constant_forcing(config, grid32), config)
    assert isinstance(report, ContractionReport)
    assert report.max_rate_per_unit_time == float("-inf")
    assert report.passed


def test_contraction_random_pair(grid32, stream):
    config = _shifted_config(grid32, dt=1.0 / 32, horizon=0.5, level=2)
    times = time_grid(config)
    traj = ou_path(gff_sample(grid32, stream.child("x0")), times, stream.child("ou"))
    chi = wick_exp_ou(traj, config.params, config.psi)
    u1 = heat_semigroup(gff_sample(grid32, stream.child("a")), 0.1)
    u2 = heat_semigroup(gff_sample(grid32, stream.child("b")), 0.1)
    report = contraction_check(u1, u2, chi, config, tolerance=0.01)
    assert report.passed
    assert report.gaps[0] > 0


def test_measure_product(grid32, stream):
    f = gff_sample(grid32, stream.child("f"))
    xi_vals = np.abs(gff_sample(grid32, stream.child("xi")).values()) + 0.1
    xi = to_spectral(xi_vals, grid32)
    prod = measure_product(f, xi)
    expected = to_spectral(f.values() * xi.values(), grid32)
    assert np.abs(prod.coeffs - expected.coeffs).max() < 1e-12
    # a genuinely negative factor is rejected
    with pytest.raises(ValueError):
        measure_product(f, to_spectral(xi_vals - 1.0, grid32))
    with pytest.raises(ValueError):
        measure_product(f, to_spectral(np.abs(gff_sample(make_grid(8), stream).values()), make_grid(8)))
    # mollified product of a constant pair: exp(s Lap) fixes constants
    c1, c2 = constant_field(grid32, 2.0), constant_field(grid32, 3.0)
    out = measure_product(c1, c2, mollifier_scale=0.3)
    assert out.values() == pytest.approx(np.full((32, 32), 6.0), rel=1e-12)


def test_config_validation(grid32):
    params, psi = _params(grid32, level=2)
    with pytest.raises(ValueError):
        SqeConfig(horizon=0.0, dt=0.1, params=params, psi=psi)
    with pytest.raises(ValueError):
        SqeConfig(horizon=1.0, dt=2.0, params=params, psi=psi)
    with pytest.raises(ValueError):
        SqeConfig(horizon=1.0, dt=0.1, params=params, psi=psi, scheme="euler")
    with pytest.raises(ValueError):
        SqeConfig(horizon=1.0, dt=0.1, params=params, psi=psi, equation="strong")
    with pytest.raises(ValueError):
        SqeConfig(horizon=1.0, dt=0.1, params=params, psi=psi, mollifier_scale=-1.0)
    with pytest.raises(ValueError):
        # dt * 4^N = 2 * 16 above the stability cap
        SqeConfig(horizon=4.0, dt=2.0, params=params, psi=psi)
    bad = SqeConfig(horizon=1.0, dt=0.3, params=params, psi=psi)
    with pytest.raises(ValueError):
        bad.n_steps()
    ok = SqeConfig(horizon=1.0, dt=0.25, params=params, psi=psi)
    assert ok.n_steps() == 4
    assert np.array_equal(time_grid(ok), np.array([0.0, 0.25, 0.5, 0.75, 1.0]))


def test_equation_flavor_enforced(grid32, stream):
    params, psi = _params(grid32, level=2)
    full_cfg = SqeConfig(horizon=0.25, dt=1.0 / 16, params=params, psi=psi)
    shifted_cfg = replace(full_cfg, equation="shifted")
    proj_cfg = replace(full_cfg, equation="projected")
    phi0 = gff_sample(grid32, stream)
    with pytest.raises(ValueError):
        solve_sqe_full(phi0, shifted_cfg, stream)
    with pytest.raises(ValueError):
        solve_sqe_projected(phi0, full_cfg, stream)
    with pytest.raises(ValueError):
        solve_shifted(zero_field(grid32), _constant_forcing(full_cfg, grid32), full_cfg)
    # forcing path must sit on the solver's own grid of times
    wrong_times = FieldPath(
        times=np.array([0.0, 0.3]), fields=[zero_field(grid32)] * 2
    )
    with pytest.raises(ValueError):
        solve_shifted(zero_field(grid32), wrong_times, shifted_cfg)
    solve_sqe_projected(phi0, proj_cfg, stream)


def test_rough_initial_datum_rejected(stream):
    grid = make_grid(64)
    config = _shifted_config(grid, dt=1.0 / 16, horizon=0.25, level=2)
    rough = gff_sample(grid, stream)
    forcing = _constant_forcing(config, grid)
    with pytest.raises(ValueError, match="rough"):
        solve_shifted(rough, forcing, config)
    smooth = heat_semigroup(rough, 0.1)
    path = solve_shifted(smooth, forcing, config)
    assert np.all(np.isfinite(path.final().coeffs))


def test_x_traj_validation(grid32, stream):
    params, psi = _params(grid32, level=2)
    config = SqeConfig(horizon=0.25, dt=1.0 / 16, params=params, psi=psi)
    phi0 = gff_sample(grid32, stream.child("init"))
    other = gff_sample(grid32, stream.child("other"))
    traj = ou_path(other, time_grid(config), stream.child("ou"))
    with pytest.raises(ValueError, match="start"):
        solve_sqe_full(phi0, config, stream, x_traj=traj)
    short = ou_path(phi0, np.array([0.0, 0.25]), stream.child("ou"))
    with pytest.raises(ValueError):
        solve_sqe_full(phi0, config, stream, x_traj=short)


def test_semi_implicit_scheme(grid32, stream):
    params, psi = _params(grid32, alpha=1.0, level=2)
    config = SqeConfig(
        horizon=0.5, dt=1.0 / 32, params=params, psi=psi, scheme="semi-implicit"
    )
    phi0 = gff_sample(grid32, stream.child("init"))
    with pytest.raises(ValueError):
        solve_sqe_full(phi0, config, stream.child("n"), decompose=True)
    path = solve_sqe_full(phi0, config, stream.child("n"), decompose=False)
    assert path.decomposition is None
    assert np.all(np.isfinite(path.final().coeffs))
    assert len(path.states) == config.n_steps() + 1
    # deterministic in the stream
    again = solve_sqe_full(phi0, config, stream.child("n"), decompose=False)
    assert np.array_equal(path.final().coeffs, again.final().coeffs)


def test_projected_solver_deterministic(grid32, stream):
    params, psi = _params(grid32, alpha=1.0, level=2)
    config = SqeConfig(
        horizon=0.25, dt=1.0 / 16, params=params, psi=psi, equation="projected"
    )
    phi0 = gff_sample(grid32, stream.child("init"))
    a = solve_sqe_projected(phi0, config, stream.child("n"))
    b = solve_sqe_projected(phi0, config, stream.child("n"))
    assert np.array_equal(a.final().coeffs, b.final().coeffs)
    assert a.diagnostics["l2_norms"].shape == (config.n_steps() + 1,)
