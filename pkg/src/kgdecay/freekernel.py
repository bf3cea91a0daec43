"""Free propagator kernels in the moving frame and their bad/remainder splitting.

Convention: the generator is ``A = [[v d/dx, 1], [d^2/dx^2 - m^2 - V, v d/dx]]``.
Pure transport ``psi_t = v psi_x`` moves data to the left, so the free kernel
is the rest-frame kernel evaluated at ``zeta = z + v t`` (``z = x - y``) and
vanishes outside ``|z + v t| <= t``.

The smooth (cone-interior) entries of the rest-frame kernel are

    G0    = J0(m theta) / 2
    dG0   = -(m^2 t / 2) J1(u)/u                      (u = m theta)
    ddG0  = -(m^2 / 2) [J1(u)/u - m^2 t^2 J2(u)/u^2]

with ``theta = sqrt(t^2 - zeta^2)``; the light-cone delta terms are left out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ModelParams
from .errors import DomainError, InvalidInputError
from .special import bessel_j0, j1_over_x, j2_over_x2

__all__ = [
    "Kernel2x2",
    "g0_scalar",
    "smooth_parts",
    "gv_smooth",
    "gb_matrix",
    "gr_matrix",
    "gb_tilde_matrix",
    "q_matrix",
    "z_derivative",
    "BoundReport",
    "check_kernel_bound",
    "check_q_bounds",
]

DELTA_CONE = 1e-3


@dataclass(frozen=True, eq=False)
class Kernel2x2:
    """2x2 kernel value; ``matrix`` has shape (2, 2) + shape of z."""

    matrix: np.ndarray
    z: object
    t: float

    def entry(self, i: int, j: int):
        """1-based entry (i, j)."""
        return self.matrix[i - 1, j - 1]

    def __sub__(self, other):
        return Kernel2x2(self.matrix - other.matrix, self.z, self.t)

    def __add__(self, other):
        return Kernel2x2(self.matrix + other.matrix, self.z, self.t)

    def max_abs(self):
        """Entrywise max of |K^{ij}|, elementwise in z."""
        return np.abs(self.matrix).max(axis=(0, 1))


def g0_scalar(z, t, m):
    """Retarded scalar kernel ``theta(t-|z|) J0(m sqrt(t^2-z^2)) / 2``."""
    if t <= 0:
        raise DomainError("g0_scalar needs t > 0")
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) <= t
    th = np.sqrt(np.where(inside, t * t - z * z, 0.0))
    out = np.where(inside, 0.5 * bessel_j0(m * th), 0.0)
    return out if out.ndim else float(out)


def smooth_parts(zeta, t, m):
    """(G0, dG0/dt, d2G0/dt2) smooth parts at rest-frame offset ``zeta``; |zeta| < t."""
    zeta = np.asarray(zeta, dtype=float)
    th = np.sqrt(np.clip(t * t - zeta * zeta, 0.0, None))
    u = m * th
    g = 0.5 * bessel_j0(u)
    j1u = j1_over_x(u)
    dg = -0.5 * m * m * t * j1u
    ddg = -0.5 * m * m * (j1u - m * m * t * t * j2_over_x2(u))
    return g, dg, ddg


def _cone_check(zeta, t, delta):
    if t <= 0:
        raise DomainError("kernel needs t > 0")
    if np.any(np.abs(zeta) >= t * (1.0 - delta)):
        raise DomainError(
            f"point outside the cone interior |z+vt| < t(1-{delta:g}) at t={t:g}")


def gv_smooth(z, t, params: ModelParams, delta_cone: float = DELTA_CONE) -> Kernel2x2:
    """Smooth part of the moving-frame kernel [[dG0, G0], [ddG0, dG0]] at (z + v t, t)."""
    z = np.asarray(z, dtype=float)
    zeta = z + params.v * t
    _cone_check(zeta, t, delta_cone)
    g, dg, ddg = smooth_parts(zeta, t, params.m)
    return Kernel2x2(np.array([[dg, g], [ddg, dg]]), z, t)


def _bad_phase(z, t, params):
    g = params.gamma
    return params.m * (t / g - g * params.v * z) - 0.25 * np.pi


def gb_matrix(z, t, params: ModelParams) -> Kernel2x2:
    """Slowly decaying part carrying only the edge frequencies +-m/gamma.

    Leading stationary-phase term of the smooth kernel for fixed z, t -> oo.
    """
    if t <= 0:
        raise DomainError("gb_matrix needs t > 0")
    z = np.asarray(z, dtype=float)
    m, g = params.m, params.gamma
    phi = _bad_phase(z, t, params)
    s, c = np.sin(phi), np.cos(phi)
    pref = 1.0 / np.sqrt(2.0 * np.pi * m * t / g)
    d = -m * g * s
    return Kernel2x2(pref * np.array([[d, c], [-(m * g) ** 2 * c, d]]), z, t)


def gr_matrix(z, t, params: ModelParams, delta_cone: float = DELTA_CONE) -> Kernel2x2:
    """Remainder gv_smooth - gb_matrix."""
    return gv_smooth(z, t, params, delta_cone) - gb_matrix(z, t, params)


def gb_tilde_matrix(z, t, params: ModelParams) -> Kernel2x2:
    """Large-argument Bessel asymptotics of the smooth kernel at fixed zeta/t."""
    z = np.asarray(z, dtype=float)
    m = params.m
    zeta = z + params.v * t
    th2 = t * t - zeta * zeta
    if np.any(th2 <= 0):
        raise DomainError("gb_tilde_matrix is defined inside the cone only")
    th = np.sqrt(th2)
    ph = m * th - 0.25 * np.pi
    s, c = np.sin(ph), np.cos(ph)
    pref = 1.0 / np.sqrt(2.0 * m * np.pi)
    d = -m * t * s / th2 ** 0.75
    return Kernel2x2(pref * np.array([[d, c / th2 ** 0.25],
                                      [-(m * t) ** 2 * c / th2 ** 1.25, d]]), z, t)


def _q_domain(z, t, eps, params):
    if not (abs(params.v) < eps < 1):
        raise InvalidInputError(f"need |v| < eps < 1, got eps={eps}, v={params.v}")
    if t < 1:
        raise DomainError("Q bounds are stated for t >= 1")
    if np.any(np.abs(z) > (eps - abs(params.v)) * t * (1 + 1e-12)):
        raise DomainError("|z| exceeds (eps-|v|) t")


def q_matrix(z, t, params: ModelParams, eps: float) -> Kernel2x2:
    """Q = gb_tilde - gb on the domain |z| <= (eps-|v|) t, t >= 1."""
    _q_domain(z, t, eps, params)
    return gb_tilde_matrix(z, t, params) - gb_matrix(z, t, params)


def z_derivative(func, z, h=1e-3):
    """Fourth-order central difference of a Kernel2x2-valued ``func(z)`` in z."""
    z = np.asarray(z, dtype=float)
    f = lambda s: func(z + s).matrix
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


@dataclass
class BoundReport:
    """Envelope sweep result: sup ratio per t and the overall constant."""

    eps: float
    k: int
    times: list
    sup_per_t: list
    C: float
    growth: float
    passed: bool
    rows: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {"eps": self.eps, "k": self.k, "times": list(self.times),
                "sup_per_t": [float(s) for s in self.sup_per_t], "C": float(self.C),
                "growth": float(self.growth), "passed": bool(self.passed)}


def _sweep(ratio_fn, eps, k, t_set, z_density, params, tol):
    t_set = sorted(float(t) for t in t_set)
    if not t_set or t_set[0] < 1:
        raise DomainError("t values must be >= 1")
    sups, rows = [], []
    for t in t_set:
        zmax = (eps - abs(params.v)) * t
        nz = max(int(np.ceil(2 * zmax * z_density)) + 1, 3)
        z = np.linspace(-zmax, zmax, nz)
        r = ratio_fn(z, t)
        sups.append(float(r.max()))
        rows.extend((float(zi), t, k, float(ri)) for zi, ri in zip(z, r))
    growth = sups[-1] / sups[-2] - 1.0 if len(sups) > 1 else 0.0
    C = max(sups)
    return BoundReport(eps, k, t_set, sups, C, growth,
                       bool(np.isfinite(C) and growth < tol), rows)


def check_kernel_bound(eps: float, k: int, t_set, z_density: float = 20.0,
                       params: ModelParams = ModelParams(), tol: float = 0.05) -> BoundReport:
    """Sup of |d^k_z G_r^{ij}| t^{3/2} / (1+z^2) over |z| <= (eps-|v|) t, per t.

    Passes when the sup is finite and grows by less than ``tol`` between the
    two largest t values.
    """
    if not (abs(params.v) < eps < 1):
        raise InvalidInputError(f"need |v| < eps < 1, got eps={eps}, v={params.v}")
    if k not in (0, 1):
        raise InvalidInputError("k must be 0 or 1")

    def ratio(z, t):
        if k == 0:
            a = gr_matrix(z, t, params).matrix
        else:
            a = z_derivative(lambda s: gr_matrix(s, t, params), z)
        return np.abs(a).max(axis=(0, 1)) * t ** 1.5 / (1 + z * z)

    return _sweep(ratio, eps, k, t_set, z_density, params, tol)


def check_q_bounds(eps: float, t_set, k: int = 0, z_density: float = 20.0,
                   params: ModelParams = ModelParams(), entries: str = "12",
                   tol: float = 0.05) -> BoundReport:
    """Same sweep for Q = gb_tilde - gb; ``entries`` is "12" or "all"."""
    if entries not in ("12", "all"):
        raise InvalidInputError("entries must be '12' or 'all'")

    def ratio(z, t):
        if k == 0:
            a = q_matrix(z, t, params, eps).matrix
        else:
            # the stencil pokes just past |z| = (eps-|v|)t; the closed form is fine there
            a = z_derivative(lambda s: gb_tilde_matrix(s, t, params)
                             - gb_matrix(s, t, params), z)
        a = np.abs(a[0, 1]) if entries == "12" else np.abs(a).max(axis=(0, 1))
        return a * t ** 1.5 / (1 + z * z)

    _q_domain(np.zeros(1), max(t_set), eps, params)
    return _sweep(ratio, eps, k, t_set, z_density, params, tol)
