"""Grids, fields, phase-space states, weighted norms and admissible potentials.

Everything lives on a uniform periodic lattice ``x_i = -L + i*dx``.  Derivatives
are spectral (FFT); integrals are composite trapezoid sums, which on a periodic
lattice reduce to ``dx * sum``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AdmissibilityError, InvalidInputError

__all__ = [
    "Grid",
    "Field",
    "State",
    "ModelParams",
    "Potential",
    "japanese",
    "spectral_derivative",
    "fourier_multiplier",
    "differentiation_matrix",
    "weighted_norm",
    "energy_norm_F",
    "check_potential",
    "power_potential",
    "sech2_potential",
    "gaussian_state",
    "bump_state",
]


def japanese(x):
    """Return <x> = (1 + x^2)^(1/2)."""
    return np.sqrt(1.0 + np.square(x))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [-L, L) with ``n`` nodes."""

    half_length: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise InvalidInputError(f"grid node count must be even and >= 16, got {self.n}")
        if not np.isfinite(self.half_length) or self.half_length <= 0:
            raise InvalidInputError("grid half_length must be positive")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + self.dx * np.arange(self.n)
        x.setflags(write=False)
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order, Nyquist mode zeroed.

        Zeroing the Nyquist mode keeps ``D`` real and skew-symmetric and makes
        ``D @ D`` the second-derivative operator used everywhere.
        """
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        k[self.n // 2] = 0.0
        k.setflags(write=False)
        return k

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.half_length, self.n * factor)

    def enlarge(self, factor: int = 2) -> "Grid":
        """Same spacing, ``factor`` times the box."""
        return Grid(self.half_length * factor, self.n * factor)

    def __repr__(self):
        return f"Grid(L={self.half_length:g}, n={self.n})"


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a scalar function on a grid (immutable)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid.n,):
            raise InvalidInputError(
                f"field has {vals.shape} samples, grid expects ({self.grid.n},)")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("field contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.x))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True, eq=False)
class State:
    """Phase-space point (psi, pi); both components on one grid.

    Supports the vector-space operations needed by the evolvers and the
    projections (``+``, ``-``, scalar ``*``).
    """

    psi: Field
    pi: Field

    def __post_init__(self):
        if self.psi.grid != self.pi.grid:
            raise InvalidInputError("psi and pi must live on the same grid")

    @classmethod
    def from_arrays(cls, grid, psi, pi):
        return cls(Field(grid, psi), Field(grid, pi))

    @classmethod
    def zeros(cls, grid):
        z = np.zeros(grid.n)
        return cls.from_arrays(grid, z, z)

    @classmethod
    def from_vector(cls, grid, vec):
        vec = np.asarray(vec)
        return cls.from_arrays(grid, vec[: grid.n], vec[grid.n:])

    @property
    def grid(self) -> Grid:
        return self.psi.grid

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.psi.values, self.pi.values])

    def __add__(self, other):
        return State.from_arrays(self.grid, self.psi.values + other.psi.values,
                                 self.pi.values + other.pi.values)

    def __sub__(self, other):
        return State.from_arrays(self.grid, self.psi.values - other.psi.values,
                                 self.pi.values - other.pi.values)

    def __mul__(self, c):
        return State.from_arrays(self.grid, c * self.psi.values, c * self.pi.values)

    __rmul__ = __mul__

    def __neg__(self):
        return -1 * self


@dataclass(frozen=True)
class ModelParams:
    """Mass ``m > 0`` and frame velocity ``|v| < 1``."""

    m: float = 1.0
    v: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m > 0):
            raise InvalidInputError(f"mass must be positive, got {self.m}")
        if not (np.isfinite(self.v) and abs(self.v) < 1):
            raise InvalidInputError(f"frame velocity must satisfy |v| < 1, got {self.v}")

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.v ** 2)

    @property
    def mu(self) -> complex:
        """Upper edge point i*m/gamma of the continuous spectrum."""
        return 1j * self.m / self.gamma

    @property
    def edge(self) -> float:
        """|mu| = m / gamma."""
        return self.m / self.gamma


def fourier_multiplier(values, grid, symbol):
    """Apply the Fourier multiplier ``symbol(k)`` (array over ``grid.k``)."""
    return np.fft.ifft(symbol * np.fft.fft(values, axis=0), axis=0) if np.ndim(values) == 1 \
        else np.fft.ifft(symbol[:, None] * np.fft.fft(values, axis=0), axis=0)


def spectral_derivative(values, grid, order=1):
    """Spectral derivative of samples (1D array, or columns of a 2D array)."""
    return fourier_multiplier(values, grid, (1j * grid.k) ** order)


def differentiation_matrix(grid) -> np.ndarray:
    """Dense real skew-symmetric matrix of the spectral derivative."""
    d = np.ascontiguousarray(spectral_derivative(np.eye(grid.n), grid).real)
    return 0.5 * (d - d.T)


def _as_values(f):
    if isinstance(f, Field):
        return f.values, f.grid
    raise InvalidInputError("expected a Field")


def weighted_norm(f: Field, s: int, sigma: float) -> float:
    """Discrete ``|| <x>^sigma <nabla>^s f ||_{L^2}``.

    The Bessel potential ``<nabla>^s`` is applied first, the weight second.
    """
    vals, grid = _as_values(f)
    if not np.all(np.isfinite(vals)):
        raise InvalidInputError("non-finite field values")
    if s not in (-1, 0, 1):
        raise InvalidInputError(f"smoothness index must be -1, 0 or 1, got {s}")
    g = vals if s == 0 else fourier_multiplier(vals, grid, (1.0 + grid.k ** 2) ** (s / 2))
    if sigma:
        g = japanese(grid.x) ** sigma * g
    return float(np.sqrt(grid.dx * np.sum(np.abs(g) ** 2)))


def energy_norm_F(state: State, sigma: float) -> float:
    """Norm of F_sigma = H^1_sigma (+) H^0_sigma."""
    return weighted_norm(state.psi, 1, sigma) + weighted_norm(state.pi, 0, sigma)


@dataclass(frozen=True, eq=False)
class Potential:
    """Real potential samples that passed the decay-envelope check."""

    samples: Field
    beta: float
    C_bound: float
    label: str = "custom"

    @property
    def grid(self):
        return self.samples.grid

    @property
    def values(self) -> np.ndarray:
        return self.samples.values.real

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def scaled(self, c: float) -> "Potential":
        return Potential(Field(self.grid, c * self.values), self.beta,
                         abs(c) * self.C_bound, f"{c:g}*{self.label}")

    def on(self, grid: Grid, func=None) -> "Potential":
        """Resample on another grid (requires the generating function)."""
        if func is None:
            raise InvalidInputError("resampling needs the generating function")
        return check_potential(Field(grid, func(grid.x)), self.beta, label=self.label)


def check_potential(V: Field, beta: float, label: str = "custom",
                    imag_tol: float = 0.0, tail_growth: float = 1.5) -> Potential:
    """Verify ``|V| + |V'| <= C <x>^{-beta}`` on the grid and return a Potential.

    ``C_bound`` is the smallest constant that works at the nodes.  Besides
    ``beta > 5``, the asserted rate must actually be attained: the ratio
    ``|V| <x>^beta`` may not be more than ``tail_growth`` times larger on the
    outer half of the box than on the inner half.  The tail test uses |V|
    only, because the FFT derivative has an absolute noise floor (~1e-11 for
    smooth data) that <x>^beta magnifies beyond recognition near the edges.
    """
    vals, grid = _as_values(V)
    if np.any(np.abs(vals.imag) > imag_tol):
        raise InvalidInputError("potential must be real-valued")
    if not beta > 5:
        raise AdmissibilityError(f"decay rate beta={beta} violates beta > 5")
    v = vals.real
    dv = np.real(spectral_derivative(v, grid))
    weight = japanese(grid.x) ** beta
    C = float(((np.abs(v) + np.abs(dv)) * weight).max())
    if not np.isfinite(C):
        raise AdmissibilityError("envelope constant is not finite")
    tail = np.abs(v) * weight
    outer = np.abs(grid.x) > grid.half_length / 2
    if tail[outer].max() > tail_growth * tail[~outer].max():
        raise AdmissibilityError(
            f"|V|<x>^{beta:g} grows toward the box edge "
            f"({tail[outer].max():.3g} vs {tail[~outer].max():.3g}); decay slower than beta")
    return Potential(Field(grid, v), float(beta), C, label)


def power_potential(grid: Grid, amplitude: float, beta: float) -> Potential:
    """``amplitude * <x>^{-beta}``."""
    return check_potential(Field(grid, amplitude * japanese(grid.x) ** (-beta)), beta,
                           label=f"{amplitude:g}<x>^-{beta:g}")


def sech2_potential(grid: Grid, amplitude: float, beta: float = 6.0) -> Potential:
    """``amplitude * sech(x)^2`` (exponential decay satisfies any beta)."""
    vals = amplitude / np.cosh(np.clip(grid.x, -350, 350)) ** 2
    return check_potential(Field(grid, vals), beta, label=f"{amplitude:g}sech^2")


def gaussian_state(grid: Grid, center=0.0, width=1.0, amp_psi=1.0, amp_pi=0.0,
                   wavenumber=0.0) -> State:
    """Gaussian data ``exp(-(x-c)^2/width^2) * exp(i k x)`` in each component."""
    g = np.exp(-((grid.x - center) / width) ** 2 + 1j * wavenumber * grid.x)
    return State.from_arrays(grid, amp_psi * g, amp_pi * g)


def bump_state(grid: Grid, radius=1.0, center=0.0, amp_psi=1.0, amp_pi=0.0) -> State:
    """Compactly supported C-infinity bump ``exp(-1/(1-s^2))`` on |x-c| < radius."""
    s = (grid.x - center) / radius
    b = np.zeros(grid.n)
    inside = np.abs(s) < 1
    b[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return State.from_arrays(grid, amp_psi * b, amp_pi * b)
