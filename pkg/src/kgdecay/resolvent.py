"""Free and perturbed resolvents as dense Nystrom matrices.

The free kernel

    R0(lam; z) = exp(-g^2 (w |z| + v lam z)) / (2 w),   w = sqrt(lam^2 - mu^2)

is piecewise (polynomial x exponential) in z with a kink at z = 0.  Matrices
are circulant: entry (i, j) is the kernel at the minimum-image offset of
x_i - x_j, times dx.  That makes every scalar operator commute with the
spectral derivative D, so the block formulas and the Born identity close
algebraically.  The kink is handled by Euler-Maclaurin corrections (jumps of
the one-sided derivatives times powers of D), giving O(dx^8) accuracy on
smooth data instead of O(dx^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import Field, Grid, ModelParams, Potential, State, fourier_multiplier, japanese
from .errors import DomainError, InvalidInputError, SpectralPointError
from .special import branch_sqrt, on_cut

__all__ = [
    "ResolventProbe",
    "circulant_derivative",
    "DiscreteOperator",
    "r0_kernel",
    "build_R0",
    "build_R0_derivs",
    "idR0_residual",
    "build_matrix_resolvent_free",
    "build_R",
    "solve_perturbed",
    "build_matrix_resolvent_perturbed",
    "resolvent_residual",
    "schrodinger_boost_R",
    "weighted_hs",
    "lap_limit",
    "LapReport",
    "low_energy_coeffs",
    "check_low_energy",
    "LowEnergyReport",
    "born_identity_residual",
    "w_norm",
]

# Bernoulli numbers B2, B4, B6, B8
_BERN = {1: 1 / 6, 2: -1 / 30, 3: 1 / 42, 4: -1 / 30}
EM_ORDER = 3


# ---------------------------------------------------------------- kernels

@dataclass(frozen=True)
class _Side:
    """p(z) exp(s z) with polynomial coefficients ``coef`` (ascending)."""

    coef: tuple
    s: complex

    def __call__(self, z):
        p = np.zeros_like(z, dtype=complex)
        for c in reversed(self.coef):
            p = p * z + c
        return p * np.exp(self.s * z)

    def deriv_at0(self, l: int) -> complex:
        return sum(math.comb(l, i) * math.factorial(i) * c * self.s ** (l - i)
                   for i, c in enumerate(self.coef) if i <= l)


@dataclass(frozen=True)
class _SplitKernel:
    """Translation-invariant kernel, smooth on each side of z = 0."""

    right: _Side
    left: _Side

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.where(z > 0, self.right(z), self.left(z))
        return np.where(z == 0, 0.5 * (self.right(z) + self.left(z)), out)

    def jump(self, l: int) -> complex:
        """Jump at y = x of d^l/dy^l K(x - y) (from y < x to y > x)."""
        return (-1) ** l * (self.left.deriv_at0(l) - self.right.deriv_at0(l))


def _poly_mul(a, b):
    out = [0j] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def _r0_split(lam, params, side, order=0):
    """Free kernel and its lam-derivatives (order 0, 1, 2) as split kernels."""
    g2 = params.gamma ** 2
    v = params.v
    w = branch_sqrt(lam, params, side)
    if w == 0:
        raise DomainError("branch point")
    a2 = params.edge ** 2
    sides = []
    for sg in (1, -1):   # sg = sign(z); |z| = sg z
        s = -g2 * (w * sg + v * lam)
        c0 = 1 / (2 * w)
        if order == 0:
            poly = (c0,)
        else:
            # log-derivative: E1(z) - lam/w^2 with E1 = -g2 (lam/w sg + v) z
            e1 = (-lam / w ** 2, -g2 * (lam / w * sg + v))
            if order == 1:
                poly = tuple(c0 * c for c in e1)
            else:
                sq = _poly_mul(e1, e1)
                extra = (-1 / w ** 2 + 2 * lam ** 2 / w ** 4, -g2 * a2 * sg / w ** 3)
                poly = tuple(c0 * (sq[i] + (extra[i] if i < 2 else 0)) for i in range(3))
        sides.append(_Side(poly, s))
    return _SplitKernel(sides[0], sides[1])


def r0_kernel(lam, x, y, params: ModelParams, side: str | None = None):
    """Free resolvent kernel R0(lam, x, y); ``side`` selects a boundary value on the cut."""
    return _r0_split(lam, params, side)(np.asarray(x, float) - np.asarray(y, float))


def _offsets(grid: Grid):
    """Minimum-image offsets r*dx folded into [-L, L)."""
    r = np.arange(grid.n)
    r = np.where(r >= grid.n // 2, r - grid.n, r)
    return r * grid.dx


def _circulant_from_symbol(symbol):
    col = np.fft.ifft(symbol)
    n = len(col)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]


def _nystrom_symbol(kern: _SplitKernel, grid: Grid, em_order=EM_ORDER):
    """DFT symbol of the corrected circulant Nystrom matrix of ``kern``."""
    col = kern(_offsets(grid)) * grid.dx
    sym = np.fft.fft(col)
    ik = 1j * grid.k
    dx = grid.dx
    for j in range(1, em_order + 1):
        c = _BERN[j] / math.factorial(2 * j) * dx ** (2 * j)
        nmax = 2 * j - 1
        for l in range(0, nmax + 1):
            jl = kern.jump(l)
            if jl != 0:
                sym = sym + c * math.comb(nmax, l) * jl * ik ** (nmax - l)
    return sym


# ---------------------------------------------------------------- containers

@dataclass(frozen=True)
class ResolventProbe:
    """Spectral parameter with side flag ('off', '+', '-'), model, grid, optional V."""

    lam: complex
    params: ModelParams
    grid: Grid
    side: str = "off"
    potential: Potential | None = None
    eigenvalues: tuple = ()

    def __post_init__(self):
        lam = complex(self.lam)
        object.__setattr__(self, "lam", lam)
        if self.side not in ("off", "+", "-"):
            raise InvalidInputError(f"side must be 'off', '+' or '-', got {self.side!r}")
        if self.side == "off" and on_cut(lam, self.params):
            raise DomainError(f"lambda={lam} lies on the cut; choose side '+' or '-'")
        if self.side != "off" and not on_cut(lam, self.params):
            raise DomainError(f"sided probe requires lambda on the cut, got {lam}")
        if self.potential is not None and self.potential.grid != self.grid:
            raise InvalidInputError("potential lives on a different grid")
        for lj in self.eigenvalues:
            if abs(lam - lj) < 1e-3:
                raise SpectralPointError(f"lambda={lam} within 1e-3 of eigenvalue {lj}", lj)

    @property
    def branch_side(self):
        return None if self.side == "off" else self.side

    def shifted(self, lam, side="off"):
        return ResolventProbe(lam, self.params, self.grid, side, self.potential, self.eigenvalues)


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Dense matrix with quadrature weights folded in; scalar (n) or block (2n)."""

    matrix: np.ndarray
    grid: Grid
    kind: str = "scalar"
    label: str = ""

    def __post_init__(self):
        n = self.grid.n * (1 if self.kind == "scalar" else 2)
        if self.matrix.shape != (n, n):
            raise InvalidInputError(f"{self.kind} operator must be {n}x{n}")

    def apply(self, obj):
        if isinstance(obj, Field):
            return Field(self.grid, self.matrix @ obj.values)
        if isinstance(obj, State):
            return State.from_vector(self.grid, self.matrix @ obj.to_vector())
        return self.matrix @ np.asarray(obj)

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.grid.n
        return self.matrix[(i - 1) * n: i * n, (j - 1) * n: j * n]

    def __matmul__(self, other):
        return DiscreteOperator(self.matrix @ other.matrix, self.grid, self.kind)

    def __sub__(self, other):
        return DiscreteOperator(self.matrix - other.matrix, self.grid, self.kind)

    def __add__(self, other):
        return DiscreteOperator(self.matrix + other.matrix, self.grid, self.kind)


def circulant_derivative(grid):
    """Dense real circulant matrix of the spectral derivative (Nyquist mode zeroed)."""
    return np.ascontiguousarray(_circulant_from_symbol(1j * grid.k).real)


_dmat = circulant_derivative


def _check_potential(probe, need=True):
    if probe.potential is None and need:
        raise InvalidInputError("probe has no potential")


# ---------------------------------------------------------------- free

def build_R0(probe: ResolventProbe, order: int = 0) -> DiscreteOperator:
    """Circulant Nystrom matrix of d^order/dlam^order R0 (order 0, 1, 2)."""
    kern = _r0_split(probe.lam, probe.params, probe.branch_side, order)
    sym = _nystrom_symbol(kern, probe.grid)
    return DiscreteOperator(_circulant_from_symbol(sym), probe.grid, "scalar",
                            f"R0^({order})({probe.lam:.4g})")


def build_R0_derivs(probe, kmax=2):
    return [build_R0(probe, k).matrix for k in range(kmax + 1)]


def idR0_residual(probe: ResolventProbe) -> float:
    """Relative Frobenius residual of (m^2+lam^2) R0 = 1 + Lap R0/g^2 + 2 v lam grad R0.

    grad R0 and Lap R0 are Nystrom matrices of the differentiated kernels; the
    delta part of Lap R0 contributes -g^2 times the identity.
    """
    p, lam, grid = probe.params, probe.lam, probe.grid
    g2 = p.gamma ** 2
    kern = _r0_split(lam, p, probe.branch_side)
    dk = _SplitKernel(_Side(tuple(kern.right.s * c for c in kern.right.coef), kern.right.s),
                      _Side(tuple(kern.left.s * c for c in kern.left.coef), kern.left.s))
    d2k = _SplitKernel(_Side(tuple(kern.right.s ** 2 * c for c in kern.right.coef), kern.right.s),
                       _Side(tuple(kern.left.s ** 2 * c for c in kern.left.coef), kern.left.s))
    r0 = _nystrom_symbol(kern, grid)
    grad = _nystrom_symbol(dk, grid)
    lap = _nystrom_symbol(d2k, grid) - g2
    res = (p.m ** 2 + lam ** 2) * r0 - 1.0 - lap / g2 - 2 * p.v * lam * grad
    # circulant matrices: Frobenius norms from the symbols
    return float(np.linalg.norm(res) / np.linalg.norm((p.m ** 2 + lam ** 2) * r0))


def _blocks_from_scalar(R, Rp, Rpp, lam, v, D, order):
    """Block resolvent [[R A, -R], [1 - A R A, A R]] (A = vD - lam) or its lam-derivatives."""
    n = D.shape[0]
    A = v * D - lam * np.eye(n)
    if order == 0:
        return np.block([[R @ A, -R], [np.eye(n) - A @ R @ A, A @ R]])
    if order == 1:
        return np.block([[Rp @ A - R, -Rp],
                         [R @ A + A @ R - A @ Rp @ A, A @ Rp - R]])
    # second derivative, A' = -1, A'' = 0
    return np.block([[Rpp @ A - 2 * Rp, -Rpp],
                     [-(A @ Rpp @ A) + 2 * (Rp @ A + A @ Rp) - 2 * R, A @ Rpp - 2 * Rp]])


def build_matrix_resolvent_free(probe: ResolventProbe, order: int = 0) -> DiscreteOperator:
    """Block free resolvent; R0 is circulant so (1,1) and (2,2) blocks coincide."""
    Rs = [build_R0(probe, k).matrix for k in range(order + 1)] + [None] * (2 - order)
    M = _blocks_from_scalar(Rs[0], Rs[1], Rs[2], probe.lam, probe.params.v,
                            _dmat(probe.grid), order)
    return DiscreteOperator(M, probe.grid, "block", f"cR0^({order})")


# ---------------------------------------------------------------- perturbed

def _factor(probe, R0):
    V = probe.potential.values
    n = probe.grid.n
    M = np.eye(n) + R0 * V[None, :]
    lu = sla.lu_factor(M, check_finite=False)
    anorm = np.linalg.norm(M, 1)
    rcond, _ = sla.lapack.zgecon(lu[0], anorm, norm="1")
    if rcond < 1e-12:
        near = min(probe.eigenvalues, key=lambda lj: abs(lj - probe.lam)) \
            if probe.eigenvalues else None
        raise SpectralPointError(
            f"1 + R0 V is numerically singular at lambda={probe.lam} "
            f"(condition ~ {1 / max(rcond, 1e-300):.2e})", near)
    return lu, 1.0 / rcond


def build_R(probe: ResolventProbe, order: int = 0, return_all: bool = False):
    """Perturbed resolvent (1 + R0 V)^{-1} R0 and optionally its lam-derivatives.

    R'  = X R0' Y,  R'' = X R0'' Y - 2 X R0' Y V R0' Y  with X = (1+R0V)^{-1},
    Y = (1+VR0)^{-1}; uses V X = Y V.
    """
    _check_potential(probe)
    R0s = build_R0_derivs(probe, order)
    V = probe.potential.values
    lu, cond = _factor(probe, R0s[0])
    solve = lambda B: sla.lu_solve(lu, B, check_finite=False)
    R = solve(R0s[0])
    out = [R]
    if order >= 1:
        # Y = (1 + V R0)^{-1} = 1 - V R
        Y = np.eye(probe.grid.n) - V[:, None] * R
        XR1 = solve(R0s[1])
        Rp = XR1 @ Y
        out.append(Rp)
        if order >= 2:
            Rpp = solve(R0s[2]) @ Y - 2 * Rp @ (V[:, None] * (R0s[1] @ Y))
            out.append(Rpp)
    ops = [DiscreteOperator(M, probe.grid, "scalar", f"R^({k})") for k, M in enumerate(out)]
    if return_all:
        return ops, cond
    return ops[order] if order else ops[0]


def solve_perturbed(probe: ResolventProbe, f: Field) -> Field:
    """u = R(lam) f via (1 + R0 V) u = R0 f."""
    _check_potential(probe)
    R0 = build_R0(probe).matrix
    lu, _ = _factor(probe, R0)
    return Field(probe.grid, sla.lu_solve(lu, R0 @ f.values, check_finite=False))


def build_matrix_resolvent_perturbed(probe: ResolventProbe, order: int = 0) -> DiscreteOperator:
    """Block perturbed resolvent [[R A, -R], [1 - A R A, A R]] and lam-derivatives."""
    if probe.potential is None or probe.potential.is_zero():
        return build_matrix_resolvent_free(probe, order)
    ops, _ = build_R(probe, order, return_all=True)
    Rs = [o.matrix for o in ops] + [None] * (2 - order)
    M = _blocks_from_scalar(Rs[0], Rs[1], Rs[2], probe.lam, probe.params.v,
                            _dmat(probe.grid), order)
    return DiscreteOperator(M, probe.grid, "block", f"cR^({order})")


def generator_matrix(params: ModelParams, grid: Grid, potential: Potential | None = None):
    """Dense spectral discretization of A = [[v D, 1], [D^2 - m^2 - V, v D]]."""
    n = grid.n
    D = _dmat(grid)
    V = np.zeros(n) if potential is None else potential.values
    return np.block([[params.v * D, np.eye(n)],
                     [D @ D - np.diag(params.m ** 2 + V), params.v * D]])


def resolvent_residual(op: DiscreteOperator, probe: ResolventProbe, psi: State,
                       interior: float = 1.0) -> float:
    """||(A - lam) cR Psi - Psi|| / ||Psi|| in the discrete F_0 sense on |x| <= interior*L."""
    grid = probe.grid
    out = State.from_vector(grid, op.matrix @ psi.to_vector())
    u, p = out.psi.values, out.pi.values
    D = lambda f: fourier_multiplier(f, grid, 1j * grid.k)
    V = 0 if probe.potential is None else probe.potential.values
    r1 = probe.params.v * D(u) + p - probe.lam * u - psi.psi.values
    r2 = D(D(u)) - (probe.params.m ** 2 + V) * u + probe.params.v * D(p) - probe.lam * p \
        - psi.pi.values
    mask = np.abs(grid.x) <= interior * grid.half_length
    num = _f0(r1 * mask, grid) + np.sqrt(grid.dx) * np.linalg.norm(r2 * mask)
    den = _f0(psi.psi.values, grid) + np.sqrt(grid.dx) * np.linalg.norm(psi.pi.values)
    return float(num / den)


def _f0(f, grid):
    g = fourier_multiplier(f, grid, np.sqrt(1 + grid.k ** 2))
    return np.sqrt(grid.dx) * np.linalg.norm(g)


def schrodinger_boost_R(probe: ResolventProbe) -> DiscreteOperator:
    """R(lam) through the v = 0 Schrodinger resolvent at zeta = g^2 m^2 + g^4 lam^2.

    R(lam) = e^{-g^2 v lam x} g^2 Rt(zeta) e^{g^2 v lam y},
    Rt(zeta) = (-Lap + zeta + g^2 V)^{-1} = (1 + Rt0 g^2 V)^{-1} Rt0,
    with the kernel exp(-sqrt(zeta)|z|)/(2 sqrt(zeta)), sqrt(zeta) = g^2 w.
    Entries with |x - y| > L differ from the circulant moving-frame matrix by
    the box folding; compare on |x|, |y| <= L/2.
    """
    p, lam, grid = probe.params, probe.lam, probe.grid
    g2 = p.gamma ** 2
    sz = g2 * branch_sqrt(lam, p, probe.branch_side)
    kern = _SplitKernel(_Side((1 / (2 * sz),), -sz), _Side((1 / (2 * sz),), sz))
    n = grid.n
    Rt0 = _circulant_from_symbol(_nystrom_symbol(kern, grid))
    V = np.zeros(n) if probe.potential is None else probe.potential.values
    Rt = np.linalg.solve(np.eye(n) + Rt0 * (g2 * V)[None, :], Rt0)
    e = np.exp(-g2 * p.v * lam * grid.x)
    return DiscreteOperator(g2 * e[:, None] * Rt / e[None, :], grid, "scalar", "boost")


# ---------------------------------------------------------------- norms

def weighted_hs(M, grid: Grid, sigma_left: float, sigma_right: float | None = None) -> float:
    """Frobenius norm of <x>^{-sl} M <y>^{-sr} (the Nystrom weights are already in M)."""
    if isinstance(M, DiscreteOperator):
        M = M.matrix
    sr = sigma_left if sigma_right is None else sigma_right
    wx = japanese(grid.x)
    reps = M.shape[0] // grid.n
    wl = np.tile(wx ** (-sigma_left), reps)
    wr = np.tile(wx ** (-sr), reps)
    return float(np.linalg.norm(wl[:, None] * M * wr[None, :]))


# ---------------------------------------------------------------- LAP

@dataclass
class LapReport:
    lam: complex
    side: str
    eps: list
    distances: list
    orders: list
    monotone: bool
    jump_norm: float | None = None

    def to_dict(self):
        return {"lam_re": self.lam.real, "lam_im": self.lam.imag, "side": self.side,
                "eps": list(self.eps), "distances": list(self.distances),
                "orders": list(self.orders), "monotone": self.monotone,
                "jump_norm": self.jump_norm}


def lap_limit(lam, eps_sequence, params: ModelParams, grid: Grid,
              potential: Potential | None = None, sigma: float = 3.0,
              side: str = "+") -> LapReport:
    """Weighted HS distance between R(lam +- eps) and the sided boundary value R(lam +- 0)."""
    lam = complex(lam)
    if not on_cut(lam, params) or abs(lam.imag) == params.edge:
        raise DomainError(f"lambda={lam} is not an interior point of the cut")
    eps = sorted((float(e) for e in eps_sequence), reverse=True)
    sgn = 1.0 if side == "+" else -1.0

    def scalar(probe):
        if potential is None:
            return build_R0(probe).matrix
        return build_R(probe).matrix

    base = ResolventProbe(lam, params, grid, side, potential)
    lim = scalar(base)
    d = [weighted_hs(scalar(base.shifted(lam + sgn * e)) - lim, grid, sigma) for e in eps]
    orders = [math.log(d[i] / d[i + 1]) / math.log(eps[i] / eps[i + 1])
              for i in range(len(d) - 1)]
    other = scalar(ResolventProbe(lam, params, grid, "-" if side == "+" else "+", potential))
    return LapReport(lam, side, eps, d, orders,
                     all(d[i + 1] < d[i] for i in range(len(d) - 1)),
                     weighted_hs(lim - other, grid, sigma))


# ---------------------------------------------------------------- low energy

def low_energy_coeffs(sign: int, params: ModelParams, grid: Grid):
    """(B0, B1) near lam = sign*mu:

    B0 = exp(-+ g^2 v mu z) / (2 sqrt(+-2 mu)),  B1 = -g^2 exp(-+ g^2 v mu z) |z| / 2.
    """
    if sign not in (1, -1):
        raise InvalidInputError("sign must be +1 or -1")
    g2 = params.gamma ** 2
    mu = params.mu
    s = -sign * g2 * params.v * mu
    b0 = 1 / (2 * np.sqrt(sign * 2 * mu))
    k0 = _SplitKernel(_Side((b0,), s), _Side((b0,), s))
    k1 = _SplitKernel(_Side((0, -g2 / 2), s), _Side((0, g2 / 2), s))
    B0 = DiscreteOperator(_circulant_from_symbol(_nystrom_symbol(k0, grid)), grid, "scalar", "B0")
    B1 = DiscreteOperator(_circulant_from_symbol(_nystrom_symbol(k1, grid)), grid, "scalar", "B1")
    return B0, B1


@dataclass
class LowEnergyReport:
    sign: int
    nu: list
    r: list
    r_deriv: list
    variation: float
    variation_deriv: float
    passed: bool

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("sign", "nu", "r", "r_deriv", "variation", "variation_deriv", "passed")}


def _variation(vals):
    return float(max(vals) / min(vals) - 1.0)


def check_low_energy(sign: int, nu_sequence, params: ModelParams, grid: Grid,
                     sigma: float = 3.0, tol: float = 0.10) -> LowEnergyReport:
    """r(nu) = ||R0 - B0/sqrt(nu) - B1|| / sqrt(nu) and r1(nu) = ||R0' + B0/(2 nu^1.5)|| sqrt(nu).

    Both must vary by less than ``tol`` (max/min - 1) across the nu sequence.
    """
    B0, B1 = low_energy_coeffs(sign, params, grid)
    nus = sorted((float(n) for n in nu_sequence), reverse=True)
    if any(not (0 < n <= 0.5 * params.edge) for n in nus):
        raise DomainError("nu must lie in (0, |mu|/2]")
    r, r1 = [], []
    for nu in nus:
        probe = ResolventProbe(sign * params.mu + nu, params, grid)
        R0, R0p = build_R0_derivs(probe, 1)
        sq = np.sqrt(nu)
        r.append(weighted_hs(R0 - B0.matrix / sq - B1.matrix, grid, sigma) / sq)
        r1.append(weighted_hs(R0p + B0.matrix / (2 * nu * sq), grid, sigma) * sq)
    var, var1 = _variation(r), _variation(r1)
    return LowEnergyReport(sign, nus, r, r1, var, var1, bool(var < tol and var1 < tol))


# ---------------------------------------------------------------- Born

def _vblock(V):
    n = len(V)
    Z = np.zeros((n, n))
    return np.block([[Z, Z], [-np.diag(V), Z]])


def w_norm(probe: ResolventProbe, sigma: float = 1.0) -> float:
    """HS surrogate of ||V R0 V||: H^1_{-sigma} -> H^0_sigma (the only nonzero block of W)."""
    _check_potential(probe)
    grid = probe.grid
    V = probe.potential.values
    R0 = build_R0(probe).matrix
    inv_bessel = np.ascontiguousarray(_circulant_from_symbol(1 / np.sqrt(1 + grid.k ** 2)).real)
    wx = japanese(grid.x) ** sigma
    M = (wx * V)[:, None] * R0 @ (V[:, None] * inv_bessel * wx[None, :])
    return float(np.linalg.norm(M))


def born_identity_residual(probe: ResolventProbe, sigma_w: float = 1.0):
    """Relative residual of cR = cR0 - cR0 cV cR0 + cR0 cV cR0 cV cR, and W_norm."""
    if probe.potential is None or probe.potential.is_zero():
        return 0.0, 0.0
    R0b = build_matrix_resolvent_free(probe).matrix
    Rb = build_matrix_resolvent_perturbed(probe).matrix
    Vb = _vblock(probe.potential.values)
    T = R0b @ Vb @ R0b
    rhs = R0b - T + T @ Vb @ Rb
    res = float(np.linalg.norm(Rb - rhs) / np.linalg.norm(Rb))
    return res, w_norm(probe, sigma_w)
