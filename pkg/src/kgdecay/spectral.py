"""Discrete spectrum of the generator, zero-energy resonance test and spectral projections.

Eigenvalues of A in the gap come from negative eigenvalues zeta of
-Lap + g^2 V through  zeta = -g^2 m^2 - g^4 lam^2.  The eigenstate is

    psi = exp(-g^2 v lam x) phi,   pi = (lam - v d/dx) psi,

and since A = J H with J = [[0, 1], [-1, 0]] and H Hermitian, the left
eigenvector is J^{-1} r = (-pi, psi).  The rank-one projector r l^H / (l^H r)
is the oracle for the contour (Riesz) projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import Grid, ModelParams, Potential, State, differentiation_matrix, fourier_multiplier
from .errors import GeometryError, InconclusiveError, InvalidInputError, KGError
from .resolvent import (DiscreteOperator, ResolventProbe, build_matrix_resolvent_perturbed,
                        circulant_derivative, generator_matrix)

__all__ = [
    "SpectralData",
    "RankOneProjector",
    "schrodinger_spectrum",
    "map_to_A_eigenvalues",
    "direct_gap_eigenvalues",
    "eigenstate",
    "discrete_eigenprojector",
    "detect_zero_resonance",
    "zero_energy_wronskian",
    "resonance_threshold",
    "embed",
    "ResonanceResult",
    "riesz_projection",
    "continuous_projection",
    "analyze",
]

EDGE_FLAG = 1e-3


@dataclass(frozen=True, eq=False)
class RankOneProjector:
    """P = r l^H / (l^H r) stored through its vectors."""

    lam: complex
    right: np.ndarray
    left: np.ndarray
    grid: Grid

    @property
    def norm_const(self):
        return np.vdot(self.left, self.right)

    def coefficient(self, state: State) -> complex:
        return np.vdot(self.left, state.to_vector()) / self.norm_const

    def apply(self, state: State) -> State:
        return State.from_vector(self.grid, self.coefficient(state) * self.right)

    def matrix(self):
        return np.outer(self.right, self.left.conj()) / self.norm_const

    def eigenstate(self) -> State:
        return State.from_vector(self.grid, self.right)


@dataclass
class ResonanceResult:
    verdict: str
    wronskian: float
    threshold: float
    tail_bound: float

    def to_dict(self):
        return {"verdict": self.verdict, "wronskian": self.wronskian,
                "threshold": self.threshold, "tail_bound": self.tail_bound}


@dataclass
class SpectralData:
    """Gap eigenvalues, eigenstates/projectors on one grid, and the zero-energy verdict."""

    schrodinger_eigs: list
    A_eigs: list
    projectors: list
    resonance_verdict: str
    wronskian_value: float
    anomalies: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def eigenstates(self):
        return [p.eigenstate() for p in self.projectors]

    def to_dict(self):
        return {"zetas": [float(z) for z in self.schrodinger_eigs],
                "lambdas": [[complex(l).real, complex(l).imag] for l in self.A_eigs],
                "wronskian": float(self.wronskian_value),
                "verdict": self.resonance_verdict,
                "anomalies": [float(a) for a in self.anomalies], "flags": list(self.flags)}


# ---------------------------------------------------------------- eigenvalues

def _schrodinger_matrix(V: Potential, params: ModelParams):
    D = differentiation_matrix(V.grid)
    return -(D @ D) + np.diag(params.gamma ** 2 * V.values)


def schrodinger_spectrum(V: Potential, params: ModelParams, localization: float = 1e-3,
                         return_vectors: bool = False):
    """Negative eigenvalues of the spectral discretization of -Lap + g^2 V.

    Eigenvectors carrying more than ``localization`` of their mass in the outer
    half of the box are periodic-box modes, not bound states, and are dropped.
    """
    grid = V.grid
    if V.is_zero():
        return ([], np.zeros((grid.n, 0))) if return_vectors else []
    H = _schrodinger_matrix(V, params)
    w, U = np.linalg.eigh(0.5 * (H + H.T))
    outer = np.abs(grid.x) > grid.half_length / 2
    keep = [i for i in range(len(w)) if w[i] < 0
            and np.sum(U[outer, i] ** 2) < localization]
    zetas = [float(w[i]) for i in keep]
    if return_vectors:
        return zetas, U[:, keep] / np.sqrt(grid.dx)
    return zetas


def map_to_A_eigenvalues(zetas, params: ModelParams):
    """lam = +- i sqrt(g^2 m^2 + zeta) / g^2; zetas below -g^2 m^2 are returned as anomalies."""
    g2 = params.gamma ** 2
    lams, anomalies = [], []
    for z in zetas:
        if z <= -g2 * params.m ** 2:
            anomalies.append(z)
            continue
        y = math.sqrt(g2 * params.m ** 2 + z) / g2
        lams.extend([1j * y, -1j * y])
    return lams, anomalies


def direct_gap_eigenvalues(params: ModelParams, grid: Grid, potential: Potential | None = None,
                           re_tol: float = 1e-6, localization: float = 1e-3):
    """Eigenvalues of the dense generator matrix strictly inside the gap.

    As in :func:`schrodinger_spectrum`, eigenvectors that are not localized
    (e.g. the zero-kinetic-energy Nyquist mode feeling the box average of V)
    are discarded.
    """
    ev, U = np.linalg.eig(generator_matrix(params, grid, potential))
    outer = np.abs(grid.x) > grid.half_length / 2
    out = []
    for i in np.flatnonzero((np.abs(ev.real) < re_tol)
                            & (np.abs(ev.imag) < params.edge * (1 - 1e-9))):
        psi = U[: grid.n, i]
        if np.sum(np.abs(psi[outer]) ** 2) < localization * np.sum(np.abs(psi) ** 2):
            out.append(ev[i])
    return sorted(out, key=lambda z: z.imag)


# ---------------------------------------------------------------- eigenvectors

def eigenstate(phi, lam, params: ModelParams, grid: Grid) -> State:
    """(psi, pi) = (e^{-g^2 v lam x} phi, (lam - v D) psi) from a Schrodinger eigenfunction."""
    psi = np.exp(-params.gamma ** 2 * params.v * lam * grid.x) * phi
    pi = lam * psi - params.v * fourier_multiplier(psi, grid, 1j * grid.k)
    return State.from_arrays(grid, psi, pi)


def _inverse_iteration(params, grid, potential, lam, r, iters=4):
    """Shifted inverse iteration on A, with pi eliminated so only an n x n LU is needed.

    (A - lam) (psi, pi) = (b1, b2) gives pi = b1 - B psi, B = v D - lam, and
    [D^2 - m^2 - V - B^2] psi = b2 - B b1.
    """
    n = grid.n
    D = circulant_derivative(grid)
    V = np.zeros(n) if potential is None else potential.values
    A = generator_matrix(params, grid, potential)
    B = params.v * D - lam * np.eye(n)
    lu = sla.lu_factor(D @ D - np.diag(params.m ** 2 + V) - B @ B)
    for _ in range(iters):
        b1, b2 = r[:n], r[n:]
        psi = sla.lu_solve(lu, b2 - B @ b1)
        r = np.concatenate([psi, b1 - B @ psi])
        r /= np.linalg.norm(r)
        l = np.concatenate([-r[n:], r[:n]])
        lam = np.vdot(l, A @ r) / np.vdot(l, r)
    return lam, r


def discrete_eigenprojector(lam, phi, params: ModelParams, potential: Potential,
                            refine: bool = True) -> RankOneProjector:
    """Rank-one projector from the right eigenvector r and left eigenvector (-pi, psi).

    ``refine`` polishes (lam, r) by inverse iteration on the dense generator.
    """
    grid = potential.grid
    r = eigenstate(phi, lam, params, grid).to_vector()
    if refine:
        lam, r = _inverse_iteration(params, grid, potential, lam, r)
    n = grid.n
    l = np.concatenate([-r[n:], r[:n]])
    return RankOneProjector(complex(lam), r, l, grid)


def embed(P: RankOneProjector, grid: Grid) -> RankOneProjector:
    """Zero-pad a projector computed on a small box into a larger box with the same dx."""
    small = P.grid
    if abs(small.dx - grid.dx) > 1e-12 * grid.dx or grid.n < small.n:
        raise GeometryError("embedding needs the same spacing and a larger box")
    off = (grid.n - small.n) // 2
    if not math.isclose(grid.x[off], small.x[0], abs_tol=1e-9 * grid.dx):
        raise GeometryError("small and large grids are not aligned")

    def pad(vec):
        out = np.zeros(2 * grid.n, dtype=complex)
        out[off: off + small.n] = vec[: small.n]
        out[grid.n + off: grid.n + off + small.n] = vec[small.n:]
        return out

    return RankOneProjector(P.lam, pad(P.right), pad(P.left), grid)


# ---------------------------------------------------------------- resonance

def _fine_potential(V: Potential, params: ModelParams, coupling: float, h_max: float):
    """g^2 c V on a refined lattice (band-limited interpolation), substeps per cell."""
    grid = V.grid
    sub = max(1, int(math.ceil(grid.dx / h_max)))
    q = params.gamma ** 2 * coupling * V.values
    qh = np.fft.fft(q)
    n, nf = grid.n, grid.n * 2 * sub
    big = np.zeros(nf, dtype=complex)
    big[: n // 2] = qh[: n // 2]
    big[-(n // 2) + 1:] = qh[-(n // 2) + 1:]
    qf = np.real(np.fft.ifft(big)) * (nf / n)
    return qf, grid.dx / (2 * sub)


def _rk4_path(q, h):
    """u'' = q u along samples q[0], q[1], ... (spacing h/2 per sample, step h)."""
    u, du = 1.0, 0.0
    prof = [u]
    for i in range(0, len(q) - 2, 2):
        qa, qm, qb = q[i], q[i + 1], q[i + 2]
        k1u, k1d = du, qa * u
        k2u, k2d = du + 0.5 * h * k1d, qm * (u + 0.5 * h * k1u)
        k3u, k3d = du + 0.5 * h * k2d, qm * (u + 0.5 * h * k2u)
        k4u, k4d = du + h * k3d, qb * (u + h * k3u)
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        du += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d)
        prof.append(u)
    return u, du, np.array(prof)


def zero_energy_wronskian(V: Potential, params: ModelParams, coupling: float = 1.0,
                          h_max: float = 0.01):
    """W(f+, f-) at x = 0 for u'' = g^2 c V u with u = 1, u' = 0 at both box ends.

    RK4 with step <= h_max; the potential at the substeps comes from the
    band-limited (Fourier) interpolant of the samples.
    """
    qf, hh = _fine_potential(V, params, coupling, h_max)
    nf = len(qf)
    mid = nf // 2
    um, dum, _ = _rk4_path(qf[: mid + 1], 2 * hh)
    # x from +L (periodic copy of -L) down to 0; derivative sign flips for the reversed path
    rev = np.concatenate([[qf[0]], qf[::-1][: mid]])
    up, dup_rev, _ = _rk4_path(rev, 2 * hh)
    dup = -dup_rev
    return up * dum - dup * um, (up, dup, um, dum)


def _profile(V, params, coupling, h_max=0.01):
    qf, hh = _fine_potential(V, params, coupling, h_max)
    _, _, prof = _rk4_path(np.concatenate([qf, [qf[0]]]), 2 * hh)
    return prof


def detect_zero_resonance(V: Potential, params: ModelParams, rel_tol: float = 1e-6,
                          coupling: float = 1.0) -> ResonanceResult:
    """Verdict at the edge points: regular | resonance | eigenvalue.

    Threshold tau = rel_tol * integral g^2 |V| + 1e-12 (W ~ integral g^2 V for
    weak potentials, so this is relative to the natural scale of W).  The box
    is too small when the neglected tail, bounded by g^2 |V(+-L)| <L>^2, is
    not an order of magnitude below tau.
    """
    grid = V.grid
    g2 = params.gamma ** 2
    scale = g2 * abs(coupling) * grid.dx * np.sum(np.abs(V.values))
    tau = rel_tol * scale + 1e-12
    L = grid.half_length
    tail = g2 * abs(coupling) * max(abs(V.values[0]), abs(V.values[-1])) * (1 + L * L)
    if tail > 0.1 * tau and not V.is_zero():
        raise InconclusiveError(
            f"box too small for the zero-energy test: tail {tail:.2e} vs threshold {tau:.2e}")
    W, _ = zero_energy_wronskian(V, params, coupling)
    if abs(W) > tau:
        verdict = "regular"
    else:
        verdict = "resonance"
        # a zero-energy eigenfunction would decay at both ends; with flat data it
        # can only show up as an interior amplitude dwarfing the boundary value
        u = _profile(V, params, coupling)
        xs = np.linspace(-L, L, len(u))
        if np.max(np.abs(u[np.abs(xs) > 0.9 * L])) < 1e-3 * np.max(np.abs(u)):
            verdict = "eigenvalue"
    return ResonanceResult(verdict, float(W), float(tau), float(tail))


def resonance_threshold(V: Potential, params: ModelParams, c_lo: float, c_hi: float,
                        tol: float = 1e-12, maxiter: int = 200) -> float:
    """Bisection for a coupling c with W(c V) = 0 inside [c_lo, c_hi]."""
    w = lambda c: zero_energy_wronskian(V, params, c)[0]
    a, b = float(c_lo), float(c_hi)
    wa, wb = w(a), w(b)
    if wa * wb > 0:
        raise InvalidInputError("W(c) has the same sign at both ends of the bracket")
    for _ in range(maxiter):
        c = 0.5 * (a + b)
        wc = w(c)
        if wa * wc <= 0:
            b, wb = c, wc
        else:
            a, wa = c, wc
        if b - a < tol * max(1.0, abs(c)):
            break
    return 0.5 * (a + b)


# ---------------------------------------------------------------- projections

def riesz_projection(lam_j, contour_radius: float, params: ModelParams, potential: Potential,
                     others=(), nodes: int = 32) -> DiscreteOperator:
    """P_j = -(1/2 pi i) \\oint R(lam) dlam on |lam - lam_j| = delta, trapezoid rule.

    The minus sign accounts for R(lam) = (A - lam)^{-1}.
    """
    lam_j = complex(lam_j)
    d = contour_radius
    cut_gap = params.edge - abs(lam_j.imag) if abs(lam_j.real) < 1e-9 * max(1.0, abs(lam_j)) else \
        min(abs(lam_j - params.mu), abs(lam_j + params.mu), abs(lam_j.real))
    if not 0 < d < 0.5 * cut_gap:
        raise GeometryError(f"contour radius {d} must be below half the distance "
                            f"{cut_gap:.4g} to the cut")
    for lk in others:
        if abs(complex(lk) - lam_j) > 1e-6 and not d < 0.5 * abs(complex(lk) - lam_j):
            raise GeometryError(f"contour around {lam_j} reaches eigenvalue {lk}")
    grid = potential.grid
    acc = np.zeros((2 * grid.n, 2 * grid.n), dtype=complex)
    for k in range(nodes):
        e = np.exp(2j * np.pi * (k + 0.5) / nodes)
        probe = ResolventProbe(lam_j + d * e, params, grid, "off", potential)
        acc += d * e * build_matrix_resolvent_perturbed(probe).matrix
    return DiscreteOperator(-acc / nodes, grid, "block", f"P({lam_j:.4g})")


def continuous_projection(state: State, spectral_data: SpectralData) -> State:
    """P_c Psi = Psi - sum_j P_j Psi."""
    out = state
    for P in spectral_data.projectors:
        if P.grid != state.grid:
            raise InvalidInputError("projector and state live on different grids")
        out = out - P.apply(state)
    return out


def analyze(V: Potential, params: ModelParams, resonance: bool = True,
            refine: bool = True, eig_grid: Grid | None = None) -> SpectralData:
    """Full pipeline on V.grid; eigenvectors may be computed on a smaller aligned box
    (``eig_grid``, same dx) and zero-padded."""
    if eig_grid is not None:
        off = (V.grid.n - eig_grid.n) // 2
        Vs = Potential(type(V.samples)(eig_grid, V.values[off: off + eig_grid.n]),
                       V.beta, V.C_bound, V.label)
    else:
        Vs = V
    zetas, phis = schrodinger_spectrum(Vs, params, return_vectors=True)
    lams, anomalies = map_to_A_eigenvalues(zetas, params)
    flags = []
    projectors = []
    for i, z in enumerate(zetas):
        y = math.sqrt(params.gamma ** 2 * params.m ** 2 + z) / params.gamma ** 2 \
            if z > -params.gamma ** 2 * params.m ** 2 else None
        if y is None:
            continue
        if y < 1e-8:
            flags.append("double eigenvalue at 0 (Jordan structure) unsupported")
            continue
        if params.edge - y < EDGE_FLAG:
            flags.append(f"eigenvalue {y:.6g}i within {EDGE_FLAG} of the edge: out of validated scope")
        for lam in (1j * y, -1j * y):
            P = discrete_eigenprojector(lam, phis[:, i], params, Vs, refine)
            projectors.append(P if eig_grid is None else embed(P, V.grid))
    if resonance:
        res = detect_zero_resonance(V, params)
        verdict, W = res.verdict, res.wronskian
    else:
        verdict, W = "unknown", float("nan")
    return SpectralData(zetas, lams, projectors, verdict, W, anomalies, flags)
