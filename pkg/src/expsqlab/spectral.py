"""Torus geometry, Fourier transforms, Sobolev norms, heat semigroups and
truncated Green kernels on the two-dimensional torus [0, 2*pi)^2.

Conventions
-----------
A real field ``u`` is represented by the coefficients of the complex
orthonormal basis ``(2*pi)^{-1} exp(i k.x)``, so

    coeff(k) = <u, basis_k> = (2*pi / M^2) * fft2(u)[k],
    u(x_j)   = (M^2 / (2*pi)) * ifft2(coeff)[j],

with the numpy FFT mode layout ``k in [-M/2, M/2)`` per axis.  A constant
field ``c`` therefore has ``coeff(0) = 2*pi*c``, and discrete Parseval
holds exactly: ``sum_k |coeff(k)|^2 = (2*pi/M)^2 * sum_j u_j^2``.

Real-valuedness is the Hermitian symmetry ``coeff(-k) = conj(coeff(k))``
(indices mod M, which also ties the Nyquist rows to themselves); every
operation in this module preserves it because all multipliers are real
and even in k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import kernels

__all__ = [
    "TorusGrid",
    "SpectralField",
    "NormSpec",
    "make_grid",
    "to_spectral",
    "from_spectral",
    "field_from_coeffs",
    "zero_field",
    "constant_field",
    "sobolev_norm",
    "heat_semigroup",
    "heat_semigroup_massless",
    "green_field",
    "grid_quadrature",
    "hermitian_defect",
]

TWO_PI = 2.0 * np.pi


class TorusGrid:
    """Uniform M x M collocation grid on the torus, M a power of two, M >= 8.

    Mode arrays and Sobolev weights are precomputed lazily and cached;
    instances are immutable and safe to share between workers.
    """

    def __init__(self, modes_per_dim: int):
        M = modes_per_dim
        if not isinstance(M, (int, np.integer)):
            raise TypeError(f"modes_per_dim must be an integer, got {M!r}")
        M = int(M)
        if M < 8:
            raise ValueError(f"grid must have at least 8 modes per axis, got {M}")
        if M & (M - 1) != 0:
            raise ValueError(f"modes_per_dim must be a power of two, got {M}")
        self.modes_per_dim = M
        self.spacing = TWO_PI / M
        self.points = np.arange(M) * self.spacing
        # integer wavenumbers in FFT layout: 0, 1, ..., M/2-1, -M/2, ..., -1
        self.mode_axis = np.fft.fftfreq(M, d=1.0 / M).astype(np.int64)
        self.kx, self.ky = np.meshgrid(self.mode_axis, self.mode_axis, indexing="ij")
        self.ksq = (self.kx * self.kx + self.ky * self.ky).astype(np.float64)
        self._sobolev_cache: dict[float, np.ndarray] = {}
        for arr in (self.points, self.mode_axis, self.kx, self.ky, self.ksq):
            arr.setflags(write=False)

    @property
    def npoints(self) -> int:
        return self.modes_per_dim**2

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    def sobolev_weight(self, s: float) -> np.ndarray:
        """Flattened (1 + |k|^2)^s over all grid modes."""
        s = float(s)
        w = self._sobolev_cache.get(s)
        if w is None:
            w = (1.0 + self.ksq.ravel()) ** s
            w.setflags(write=False)
            self._sobolev_cache[s] = w
        return w

    def __eq__(self, other) -> bool:
        return isinstance(other, TorusGrid) and other.modes_per_dim == self.modes_per_dim

    def __hash__(self) -> int:
        return hash(("TorusGrid", self.modes_per_dim))

    def __repr__(self) -> str:
        return f"TorusGrid(M={self.modes_per_dim})"


def make_grid(modes_per_dim: int) -> TorusGrid:
    """Build the M x M torus grid; rejects M odd, M < 8, or not a power of two."""
    return TorusGrid(modes_per_dim)


@dataclass(frozen=True)
class SpectralField:
    """A real torus field stored as Hermitian-symmetric complex coefficients.

    ``coeffs`` is the full M x M complex array in FFT layout and is
    read-only.  Arithmetic helpers return new fields on the same grid.
    """

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        M = self.grid.modes_per_dim
        if self.coeffs.shape != (M, M) or self.coeffs.dtype != np.complex128:
            raise ValueError(
                f"coeffs must be complex128 of shape ({M}, {M}), "
                f"got {self.coeffs.dtype} {self.coeffs.shape}"
            )
        self.coeffs.setflags(write=False)

    def values(self) -> np.ndarray:
        return from_spectral(self)

    def copy_coeffs(self) -> np.ndarray:
        return np.array(self.coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def _check_same_grid(self, other: "SpectralField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")


def field_from_coeffs(grid: TorusGrid, coeffs: np.ndarray, validate: bool = False) -> SpectralField:
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    field = SpectralField(grid, coeffs)
    if validate:
        defect = hermitian_defect(field)
        scale = max(float(np.abs(coeffs).max()), 1.0)
        if defect > 1e-10 * scale:
            raise ValueError(f"coefficients are not Hermitian-symmetric (defect {defect:.3e})")
    return field


def zero_field(grid: TorusGrid) -> SpectralField:
    return SpectralField(grid, np.zeros((grid.modes_per_dim,) * 2, dtype=np.complex128))


def constant_field(grid: TorusGrid, value: float) -> SpectralField:
    coeffs = np.zeros((grid.modes_per_dim,) * 2, dtype=np.complex128)
    coeffs[0, 0] = TWO_PI * value
    return SpectralField(grid, coeffs)


def to_spectral(values: np.ndarray, grid: TorusGrid) -> SpectralField:
    """Physical M x M samples -> SpectralField.  Rejects non-finite input."""
    values = np.asarray(values, dtype=np.float64)
    M = grid.modes_per_dim
    if values.shape != (M, M):
        raise ValueError(f"expected shape ({M}, {M}), got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("physical values contain non-finite entries")
    coeffs = np.fft.fft2(values) * (TWO_PI / grid.npoints)
    return SpectralField(grid, coeffs)


def from_spectral(field: SpectralField) -> np.ndarray:
    """SpectralField -> physical M x M samples (real part; the imaginary
    residue of a Hermitian coefficient array is at rounding level)."""
    grid = field.grid
    return np.real(np.fft.ifft2(field.coeffs)) * (grid.npoints / TWO_PI)


def hermitian_defect(field: SpectralField) -> float:
    """max |coeff(k) - conj(coeff(-k))| over the grid (0 for real fields)."""
    c = field.coeffs
    mirrored = np.roll(np.flip(c, axis=(0, 1)), shift=1, axis=(0, 1))
    return float(np.abs(c - np.conj(mirrored)).max())


def grid_quadrature(values: np.ndarray, grid: TorusGrid) -> float:
    """Trapezoid-on-torus (= rectangle) quadrature, exact for trig
    polynomials of degree < M per axis."""
    return float(values.sum()) * grid.cell_area


@dataclass(frozen=True)
class NormSpec:
    """Which norm: kind 'sobolev' (p = q = 2 implicitly) or 'besov' with
    integrability indices p, q in [1, inf] (math.inf for sup norms)."""

    kind: Literal["sobolev", "besov"]
    s: float
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        if self.kind not in ("sobolev", "besov"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        for name, idx in (("p", self.p), ("q", self.q)):
            if not (1.0 <= idx):
                raise ValueError(f"{name} must lie in [1, inf], got {idx}")


def sobolev_norm(field: SpectralField, s: float) -> float:
    """sqrt( sum_k (1+|k|^2)^s |coeff(k)|^2 )."""
    w = field.grid.sobolev_weight(s)
    flat = np.ascontiguousarray(field.coeffs.ravel())
    return float(np.sqrt(kernels.weighted_abs2_sum(flat, w)))


def _apply_real_multiplier(field: SpectralField, mult: np.ndarray) -> SpectralField:
    flat = np.ascontiguousarray(field.coeffs.ravel())
    out = kernels.apply_multiplier(flat, np.ascontiguousarray(mult.ravel()))
    return SpectralField(field.grid, out.reshape(field.coeffs.shape))


def heat_semigroup(field: SpectralField, t: float) -> SpectralField:
    """exp(t*(Lap - 1)/2): multiplies coeff(k) by exp(-(1+|k|^2) t / 2)."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    mult = np.exp(-0.5 * t * (1.0 + field.grid.ksq))
    return _apply_real_multiplier(field, mult)


def heat_semigroup_massless(field: SpectralField, t: float) -> SpectralField:
    """exp(t*Lap): multiplies coeff(k) by exp(-|k|^2 t); mollifier variant."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    mult = np.exp(-t * field.grid.ksq)
    return _apply_real_multiplier(field, mult)


def green_field(gamma: float, psi, level: int, grid: TorusGrid) -> SpectralField:
    """Truncated Green kernel of (1 - Lap)^{-gamma} at cutoff level N.

    Returns the field z -> (2*pi)^{-2} sum_k psi(2^{-N} k)^2 (1+|k|^2)^{-gamma}
    exp(i k.z); its value at z = 0 with gamma = 1 equals the level-N
    renormalization constant.  ``psi`` is any object exposing
    ``multiplier(grid, level)`` (see the cutoff profiles in the wick module).
    """
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    m = psi.multiplier(grid, level)
    coeffs = (m * m) * (1.0 + grid.ksq) ** (-gamma) / TWO_PI
    return SpectralField(grid, coeffs.astype(np.complex128))
