"""Time evolution: exact Fourier flow, closed-form kernel flow, RK4 method of lines.

Free flow per Fourier mode (numpy convention, d/dx -> i k):

    exp(t [[i v k, 1], [-w^2, i v k]]) = e^{i v k t} [[cos wt, sin(wt)/w], [-w sin wt, cos wt]],

with w = sqrt(k^2 + m^2).  The eigenvectors (1, +-i w) carry the frequencies
v k +- w; the low/high splitting multiplies each branch by l or h of its
frequency.

The moving-frame solution is psi(x, t) = phi(x + v t, t) with phi the rest-frame
Klein-Gordon solution for data (psi0, pi0), and pi(x, t) = phi_t(x + v t, t).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Grid, ModelParams, Potential, State, fourier_multiplier, japanese
from .errors import GeometryError, InvalidInputError, StabilityError
from .freekernel import smooth_parts
from .special import smooth_filter_pair

__all__ = [
    "EvolutionConfig",
    "InitialData",
    "evolve_free_fourier",
    "evolve_free_kernel",
    "evolve_perturbed",
    "rk4_trajectory",
    "energy",
    "split_low_high",
    "evolve",
]


@dataclass(frozen=True)
class EvolutionConfig:
    """Time step, horizon, method and filter width."""

    dt: float = 0.01
    t_max: float = 10.0
    method: str = "fourier-free"
    eps_f: float = 0.2

    METHODS = ("fourier-free", "kernel-free", "rk4-perturbed")

    def validate(self, grid: Grid, support_radius: float = 0.0, v: float = 0.0):
        if self.method not in self.METHODS:
            raise InvalidInputError(f"unknown method {self.method!r}")
        if not (self.dt > 0 and self.t_max > 0 and self.eps_f > 0):
            raise InvalidInputError("dt, t_max and eps_f must be positive")
        if self.method == "rk4-perturbed" and self.dt > 0.5 * grid.dx:
            raise InvalidInputError(f"dt={self.dt} exceeds 0.5*dx={0.5 * grid.dx:g}")
        if self.t_max * (1 + abs(v)) + support_radius > grid.half_length:
            raise GeometryError("the light cone leaves the box before t_max")
        return self


# ---------------------------------------------------------------- Fourier

def evolve_free_fourier(state: State, t: float, params: ModelParams) -> State:
    """Exact free flow on the periodic grid (any real t)."""
    grid = state.grid
    k = grid.k
    w = np.sqrt(k * k + params.m ** 2)
    ph = np.exp(1j * params.v * k * t)
    c, s = np.cos(w * t), np.sin(w * t)
    a = np.fft.fft(state.psi.values)
    b = np.fft.fft(state.pi.values)
    a1 = ph * (c * a + s / w * b)
    b1 = ph * (-w * s * a + c * b)
    return State.from_arrays(grid, np.fft.ifft(a1), np.fft.ifft(b1))


# ---------------------------------------------------------------- kernel

@dataclass(frozen=True)
class InitialData:
    """Initial data as callables; ``support`` = (a, b) if psi, pi vanish outside [a, b]."""

    psi: Callable
    dpsi: Callable
    pi: Callable
    support: tuple | None = None

    @classmethod
    def gaussian(cls, center=0.0, width=1.0, amp_psi=1.0, amp_pi=0.0):
        g = lambda x: np.exp(-((x - center) / width) ** 2)
        return cls(lambda x: amp_psi * g(x),
                   lambda x: amp_psi * (-2 * (x - center) / width ** 2) * g(x),
                   lambda x: amp_pi * g(x))

    @classmethod
    def bump(cls, radius=1.0, center=0.0, amp_psi=1.0, amp_pi=0.0):
        """exp(-1/(1-s^2)) on |s| < 1, s = (x-c)/radius."""

        def b(x):
            s = (np.asarray(x, float) - center) / radius
            out = np.zeros_like(s)
            m = np.abs(s) < 1
            out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
            return out

        def db(x):
            s = (np.asarray(x, float) - center) / radius
            out = np.zeros_like(s)
            m = np.abs(s) < 1
            sm = s[m]
            out[m] = np.exp(-1.0 / (1.0 - sm ** 2)) * (-2 * sm / (1 - sm ** 2) ** 2) / radius
            return out

        return cls(lambda x: amp_psi * b(x), lambda x: amp_psi * db(x),
                   lambda x: amp_pi * b(x), (center - radius, center + radius))

    def sample(self, grid: Grid) -> State:
        return State.from_arrays(grid, self.psi(grid.x), self.pi(grid.x))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panels(a, b, breaks, hmax=1.0):
    pts = [a] + [p for p in breaks if a < p < b] + [b]
    nodes, weights = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        m = max(1, int(np.ceil((hi - lo) / hmax)))
        edges = np.linspace(lo, hi, m + 1)
        for e0, e1 in zip(edges[:-1], edges[1:]):
            h = 0.5 * (e1 - e0)
            nodes.append(e0 + h * (_GL_X + 1))
            weights.append(h * _GL_W)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def evolve_free_kernel(data: InitialData, t: float, params: ModelParams, grid: Grid,
                       check_box: bool = True) -> State:
    """Closed-form free flow evaluated at the grid nodes (t > 0).

        psi = [psi0(xi-t) + psi0(xi+t)]/2 + int dG0 psi0 + int G0 pi0
        pi  = [psi0'(xi+t) - psi0'(xi-t)]/2 - (m^2 t/4)[psi0(xi+t) + psi0(xi-t)]
              + int ddG0 psi0 + [pi0(xi+t) + pi0(xi-t)]/2 + int dG0 pi0

    with xi = x + v t, integrals over |xi - y| < t (smooth kernel parts).
    """
    if t <= 0:
        raise InvalidInputError("kernel evolution needs t > 0")
    m = params.m
    if check_box and data.support is not None:
        reach = max(abs(data.support[0]), abs(data.support[1])) + t * (1 + abs(params.v))
        if reach > grid.half_length:
            raise GeometryError(f"light cone (reach {reach:g}) exits the box")
    psi_out = np.zeros(grid.n, dtype=complex)
    pi_out = np.zeros(grid.n, dtype=complex)
    for i, x in enumerate(grid.x):
        xi = x + params.v * t
        lo, hi = xi - t, xi + t
        if data.support is not None:
            lo, hi = max(lo, data.support[0]), min(hi, data.support[1])
        bp, bm = xi + t, xi - t
        p_p, p_m = data.psi(np.array([bp, bm]))
        d_p, d_m = data.dpsi(np.array([bp, bm]))
        q_p, q_m = data.pi(np.array([bp, bm]))
        psi_v = 0.5 * (p_p + p_m)
        pi_v = 0.5 * (d_p - d_m) - 0.25 * m * m * t * (p_p + p_m) + 0.5 * (q_p + q_m)
        if hi > lo:
            y, wq = _panels(lo, hi, [xi])
            g, dg, ddg = smooth_parts(xi - y, t, m)
            f, h = data.psi(y), data.pi(y)
            psi_v += np.sum(wq * (dg * f + g * h))
            pi_v += np.sum(wq * (ddg * f + dg * h))
        psi_out[i] = psi_v
        pi_out[i] = pi_v
    return State.from_arrays(grid, psi_out, pi_out)


# ---------------------------------------------------------------- RK4

def _rhs(psi_h, pi_h, k, v, m2, V):
    """RHS in Fourier space for psi, pi (V applied in physical space)."""
    ik = 1j * k
    dpsi = v * ik * psi_h + pi_h
    dpi = -(k * k + m2) * psi_h + v * ik * pi_h
    if V is not None:
        dpi = dpi - np.fft.fft(V * np.fft.ifft(psi_h))
    return dpsi, dpi


def rk4_trajectory(state: State, times, params: ModelParams, potential: Potential | None = None,
                   dt: float | None = None, growth_limit: float = 10.0):
    """RK4 snapshots at ``times`` (all >= 0 or all <= 0, sorted by |t|).

    Negative times integrate the reversed flow.  The step is adjusted so each
    requested time is hit exactly; default dt = 0.5 dx.
    """
    grid = state.grid
    times = [float(t) for t in times]
    if any(t > 0 for t in times) and any(t < 0 for t in times):
        raise InvalidInputError("times must share one sign")
    if dt is None:
        dt = 0.5 * grid.dx
    if dt <= 0:
        raise InvalidInputError("dt must be positive")
    V = None if potential is None or potential.is_zero() else potential.values
    k, v, m2 = grid.k, params.v, params.m ** 2
    a = np.fft.fft(state.psi.values)
    b = np.fft.fft(state.pi.values)
    n0 = np.sqrt(np.sum(np.abs(a) ** 2 + np.abs(b) ** 2))
    order = np.argsort(np.abs(times))
    out = [None] * len(times)
    t_now = 0.0
    for idx in order:
        target = times[idx]
        span = target - t_now
        nsteps = int(np.ceil(abs(span) / dt - 1e-9)) if span else 0
        h = span / nsteps if nsteps else 0.0
        for _ in range(nsteps):
            k1 = _rhs(a, b, k, v, m2, V)
            k2 = _rhs(a + 0.5 * h * k1[0], b + 0.5 * h * k1[1], k, v, m2, V)
            k3 = _rhs(a + 0.5 * h * k2[0], b + 0.5 * h * k2[1], k, v, m2, V)
            k4 = _rhs(a + h * k3[0], b + h * k3[1], k, v, m2, V)
            a = a + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            b = b + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        nrm = np.sqrt(np.sum(np.abs(a) ** 2 + np.abs(b) ** 2))
        if not np.isfinite(nrm) or nrm > growth_limit * max(n0, 1e-300) * (1 + abs(target)):
            raise StabilityError(f"RK4 norm grew by {nrm / n0:.3g} at t={target:g}; reduce dt")
        t_now = target
        out[idx] = State.from_arrays(grid, np.fft.ifft(a), np.fft.ifft(b))
    return out


def evolve_perturbed(state: State, t: float, params: ModelParams,
                     potential: Potential | None = None, dt: float | None = None) -> State:
    """Classical RK4 method of lines for Psi' = A Psi (t may be negative)."""
    if t == 0:
        return state
    return rk4_trajectory(state, [t], params, potential, dt)[0]


def evolve(state: State, t: float, params: ModelParams, config: EvolutionConfig,
           potential: Potential | None = None, data: InitialData | None = None) -> State:
    """Dispatch on ``config.method``."""
    if config.method == "fourier-free":
        return evolve_free_fourier(state, t, params)
    if config.method == "kernel-free":
        if data is None:
            raise InvalidInputError("kernel evolution needs callable initial data")
        return evolve_free_kernel(data, t, params, state.grid)
    return evolve_perturbed(state, t, params, potential, config.dt)


# ---------------------------------------------------------------- energy

def energy(state: State, params: ModelParams, potential: Potential | None = None) -> float:
    """Conserved functional  int |pi + v psi'|^2 + (1 - v^2)|psi'|^2 + (m^2 + V)|psi|^2 dx.

    This is twice the Hamiltonian generating the moving-frame flow; D is
    skew-symmetric and D^2 = D D on the grid, so the semi-discrete flow
    conserves it exactly.
    """
    grid = state.grid
    psi, pi = state.psi.values, state.pi.values
    dpsi = fourier_multiplier(psi, grid, 1j * grid.k)
    dens = (np.abs(pi + params.v * dpsi) ** 2 + (1 - params.v ** 2) * np.abs(dpsi) ** 2
            + params.m ** 2 * np.abs(psi) ** 2)
    if potential is not None:
        dens = dens + potential.values * np.abs(psi) ** 2
    return float(grid.dx * np.sum(dens))


# ---------------------------------------------------------------- splitting

def split_low_high(state: State, eps_f: float, params: ModelParams):
    """Split Psi = low + high along the two free eigen-branches of each Fourier mode."""
    grid = state.grid
    filt = smooth_filter_pair(eps_f, params)
    k = grid.k
    w = np.sqrt(k * k + params.m ** 2)
    assert np.all(w > 0)
    a = np.fft.fft(state.psi.values)
    b = np.fft.fft(state.pi.values)
    ap = 0.5 * (a - 1j * b / w)
    am = 0.5 * (a + 1j * b / w)
    lp = filt.l(params.v * k + w)
    lm = filt.l(params.v * k - w)
    cp, cm = lp * ap, lm * am
    low_a = cp + cm
    low_b = 1j * w * (cp - cm)
    low = State.from_arrays(grid, np.fft.ifft(low_a), np.fft.ifft(low_b))
    high = state - low
    return low, high
