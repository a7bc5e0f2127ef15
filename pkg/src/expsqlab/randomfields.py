"""Exact Gaussian sampling on the torus grid.

Free field, per-mode Ornstein-Uhlenbeck transitions and cylindrical
Wiener increments, all exact in distribution (no time discretization
error in the linear dynamics).

Real vs complex basis bookkeeping
---------------------------------
The noise is defined mode-wise on the real basis {(2*pi)^{-1},
cos(k.x)/(sqrt(2)*pi), sin(k.x)/(sqrt(2)*pi)}.  With cosine/sine
coefficients a_k, b_k the complex coefficient is

    coeff(k) = (a_k - i b_k) / sqrt(2),        coeff(-k) = conj(coeff(k)),

so i.i.d. N(0, v) real coefficients correspond to E|coeff(k)|^2 = v with
Re/Im each of variance v/2, and the k = 0 coefficient real with variance
v.  Sampling is realized by transforming grid white noise: fft2(white)/M
has exactly this law with v = 1, including the self-conjugate Nyquist
modes.

Parameters named ``stream`` are :class:`~expsqlab.rng.RngStream` values;
every sampler is a pure function of (inputs, stream).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .rng import RngStream
from .spectral import SpectralField, TorusGrid

__all__ = [
    "OuTrajectory",
    "FieldPath",
    "gff_sample",
    "gff_mode_variance",
    "ou_transition",
    "ou_decay",
    "ou_noise_variance",
    "ou_path",
    "ou_increments",
    "wiener_increment",
]


@dataclass(frozen=True)
class FieldPath:
    """Time-indexed sequence of fields on one grid."""

    times: np.ndarray
    fields: list

    def __post_init__(self):
        if len(self.times) != len(self.fields):
            raise ValueError("times and fields must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        grids = {f.grid for f in self.fields}
        if len(grids) > 1:
            raise ValueError("all fields must share one grid")


@dataclass(frozen=True)
class OuTrajectory:
    """Exact OU path: strictly increasing times from 0, one state per time,
    plus the stream that produced it (seed provenance for reports)."""

    times: np.ndarray
    states: list
    stream: RngStream

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")
        if self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must increase strictly from 0")
        grids = {s.grid for s in self.states}
        if len(grids) > 1:
            raise ValueError("all states must share one grid")

    @property
    def grid(self) -> TorusGrid:
        return self.states[0].grid


def _white_spectral(grid: TorusGrid, generator: np.random.Generator) -> np.ndarray:
    """Hermitian coefficient array with unit variance per mode."""
    white = generator.standard_normal((grid.modes_per_dim,) * 2)
    return np.fft.fft2(white) / grid.modes_per_dim


def gff_mode_variance(grid: TorusGrid) -> np.ndarray:
    """Stationary per-mode variance (1 + |k|^2)^{-1}."""
    return 1.0 / (1.0 + grid.ksq)


def gff_sample(grid: TorusGrid, stream: RngStream) -> SpectralField:
    """One draw from the massive free field: independent mode coefficients
    with E|coeff(k)|^2 = (1+|k|^2)^{-1}, coeff(0) real with variance 1."""
    g = stream.generator()
    coeffs = _white_spectral(grid, g) * np.sqrt(gff_mode_variance(grid))
    return SpectralField(grid, coeffs)


def ou_decay(grid: TorusGrid, dt: float) -> np.ndarray:
    """Mode-wise decay exp(-(1+|k|^2) dt / 2) of the drift (Lap-1)/2."""
    return np.exp(-0.5 * dt * (1.0 + grid.ksq))


def ou_noise_variance(grid: TorusGrid, dt: float) -> np.ndarray:
    """Exact transition noise variance (1 - exp(-(1+|k|^2) dt))/(1+|k|^2).

    Satisfies the two-half-step identity
    v(dt/2) * (1 + exp(-(1+|k|^2) dt/2)) = v(dt) exactly.
    """
    c = 1.0 + grid.ksq
    return -np.expm1(-dt * c) / c


def ou_transition(
    state: SpectralField,
    dt: float,
    stream: RngStream,
    include_noise: bool = True,
) -> SpectralField:
    """One exact OU step.  ``include_noise=False`` is the zero-variance test
    hook returning the pure per-mode decay."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = state.grid
    decay = ou_decay(grid, dt).ravel()
    if include_noise:
        g = stream.generator()
        noise = (_white_spectral(grid, g) * np.sqrt(ou_noise_variance(grid, dt))).ravel()
    else:
        noise = np.zeros(grid.npoints, dtype=np.complex128)
    out = kernels.ou_step(np.ascontiguousarray(state.coeffs.ravel()), decay, noise)
    return SpectralField(grid, out.reshape(state.coeffs.shape))


def ou_path(init: SpectralField, times, stream: RngStream) -> OuTrajectory:
    """Chain exact transitions over the given times (increasing from 0).

    The noise is drawn sequentially from one generator, so the same
    (stream, times) always yields the identical trajectory.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or len(times) < 1 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a 1-d strictly increasing array starting at 0")
    grid = init.grid
    g = stream.generator()
    states = [init]
    coeffs = init.coeffs
    for dt in np.diff(times):
        decay = ou_decay(grid, dt).ravel()
        noise = (_white_spectral(grid, g) * np.sqrt(ou_noise_variance(grid, dt))).ravel()
        coeffs = kernels.ou_step(np.ascontiguousarray(coeffs.ravel()), decay, noise).reshape(
            coeffs.shape
        )
        states.append(SpectralField(grid, coeffs))
    return OuTrajectory(times=times, states=states, stream=stream)


def ou_increments(traj: OuTrajectory, stride: int = 1) -> tuple[np.ndarray, list]:
    """Exact stochastic-convolution increments recovered from a path.

    Over a step [t, t+h] the mild solution satisfies
    X_{t+h} = decay(h) * X_t + eta with eta the semigroup-filtered noise
    integral; eta is therefore X_{t+h} - decay(h) * X_t, exactly.  With
    ``stride`` > 1 the increments of the coarsened path are returned,
    which is how one fine noise realization drives solvers at dt and
    dt/2 consistently.

    Returns (coarsened times, list of coefficient arrays).
    """
    idx = range(0, len(traj.times), stride)
    times = traj.times[list(idx)]
    grid = traj.grid
    increments = []
    for a, b in zip(list(idx)[:-1], list(idx)[1:]):
        h = traj.times[b] - traj.times[a]
        increments.append(traj.states[b].coeffs - ou_decay(grid, h) * traj.states[a].coeffs)
    return times, increments


def wiener_increment(grid: TorusGrid, dt: float, stream: RngStream) -> SpectralField:
    """Cylindrical Wiener increment over a step of length dt: independent
    N(0, dt) per real basis direction, i.e. E|coeff(k)|^2 = dt."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = stream.generator()
    return SpectralField(grid, _white_spectral(grid, g) * np.sqrt(dt))
