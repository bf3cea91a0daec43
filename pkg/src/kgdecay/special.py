"""Bessel functions, the branch of sqrt(lambda^2 - mu^2), and smooth frequency filters."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as _sp

from .core import ModelParams
from .errors import BranchPointError, DomainError, InvalidInputError

__all__ = [
    "BranchPoint",
    "bessel_j0",
    "bessel_j1",
    "bessel_series",
    "bessel_hankel",
    "j1_over_x",
    "j2_over_x2",
    "branch_sqrt",
    "on_cut",
    "FilterPair",
    "smooth_filter_pair",
    "smoothstep",
]


# ---------------------------------------------------------------- Bessel

def bessel_j0(x):
    """J0(x); Cephes rational approximations, absolute error ~1e-16."""
    return _sp.j0(x)


def bessel_j1(x):
    """J1(x); odd, so negative arguments are handled by symmetry."""
    return _sp.j1(x)


def bessel_series(nu: int, x: float) -> float:
    """Ascending power series of J_nu at a scalar x (use for x <~ 12).

    The terms alternate and peak near e^{x}/sqrt(x), so cancellation leaves an
    absolute error of a few 1e-13 at x = 12.
    """
    h = 0.5 * x
    term = h ** nu / math.factorial(nu)
    terms = [term]
    q = -h * h
    k = 0
    while abs(term) > 1e-18 * max(1.0, abs(sum(terms))) or k < 4:
        k += 1
        term *= q / (k * (k + nu))
        terms.append(term)
        if k > 200:
            break
    return math.fsum(terms)


def bessel_hankel(nu: int, x: float) -> float:
    """Hankel asymptotic expansion of J_nu, truncated at the smallest term (x > 0)."""
    if x <= 0:
        raise DomainError("Hankel expansion needs x > 0")
    mu4 = 4.0 * nu * nu
    a = [1.0]
    for k in range(1, 60):
        a.append(a[-1] * (mu4 - (2 * k - 1) ** 2) / (k * 8.0))
    p, q = 0.0, 0.0
    prev = math.inf
    for k, ak in enumerate(a):
        t = ak / x ** k
        if abs(t) > prev:
            break
        prev = abs(t)
        sgn = (-1) ** (k // 2)
        if k % 2 == 0:
            p += sgn * t
        else:
            q += sgn * t
    chi = x - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def j1_over_x(u):
    """J1(u)/u, continuous at 0 (value 1/2)."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < 1e-3
    us = u[small] ** 2
    out[small] = 0.5 - us / 16.0 + us * us / 384.0
    ub = u[~small]
    out[~small] = _sp.j1(ub) / ub
    return out if out.ndim else float(out)


def j2_over_x2(u):
    """J2(u)/u^2, continuous at 0 (value 1/8)."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < 0.05
    us = u[small] ** 2
    out[small] = 1 / 8 - us / 96 + us * us / 3072 - us ** 3 / 184320
    ub = u[~small]
    out[~small] = _sp.jv(2, ub) / ub ** 2
    return out if out.ndim else float(out)


# ---------------------------------------------------------------- branch

@dataclass(frozen=True)
class BranchPoint:
    """Edge point mu = i m/gamma and the cut on the imaginary axis beyond +-mu."""

    params: ModelParams

    @property
    def mu(self) -> complex:
        return self.params.mu

    def on_cut(self, lam: complex, tol: float = 0.0) -> bool:
        return on_cut(lam, self.params, tol)

    def distance(self, lam: complex) -> float:
        """Euclidean distance from lambda to the closed cut."""
        a = self.params.edge
        y = abs(lam.imag)
        return abs(lam.real) if y >= a else math.hypot(lam.real, a - y)


def on_cut(lam: complex, params: ModelParams, tol: float = 0.0) -> bool:
    lam = complex(lam)
    return abs(lam.real) <= tol and abs(lam.imag) >= params.edge


def branch_sqrt(lam, params: ModelParams, side: str | None = None):
    """Square root w of lambda^2 - mu^2 with Re w > 0 off the cut.

    ``side='+'`` (``'-'``) returns the boundary value on the cut reached from
    Re lambda > 0 (< 0).  Works elementwise on arrays when ``side`` is None.
    """
    a2 = params.edge ** 2
    if side is None:
        lam_arr = np.asarray(lam, dtype=complex)
        if np.any((lam_arr.real == 0) & (np.abs(lam_arr.imag) >= params.edge)):
            if np.any(np.isclose(np.abs(lam_arr.imag), params.edge, rtol=0, atol=0)
                      & (lam_arr.real == 0)):
                raise BranchPointError(f"lambda at branch point +-{params.mu}")
            raise DomainError("lambda on the cut: pass side='+' or side='-'")
        w = np.sqrt(lam_arr * lam_arr + a2)
        return w if w.ndim else complex(w)
    if side not in ("+", "-"):
        raise InvalidInputError(f"side must be '+' or '-', got {side!r}")
    lam = complex(lam)
    if not on_cut(lam, params):
        raise DomainError(f"side flag given but lambda={lam} is not on the cut")
    y = lam.imag
    if abs(y) == params.edge:
        raise BranchPointError(f"lambda at branch point +-{params.mu}")
    w = 1j * math.copysign(1.0, y) * math.sqrt(y * y - a2)
    return w if side == "+" else -w


# ---------------------------------------------------------------- filters

def smoothstep(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, built from exp(-1/s)."""
    s = np.asarray(s, dtype=float)
    f = lambda u: np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
    a, b = f(s), f(1.0 - s)
    return a / (a + b)


@dataclass(frozen=True)
class FilterPair:
    """Low/high frequency profiles with l + h = 1 and h1 = sqrt(h)."""

    eps: float
    edge: float
    l: Callable
    h: Callable
    h1: Callable


def smooth_filter_pair(eps_f: float, params: ModelParams) -> FilterPair:
    """Even C-infinity cutoff: l = 1 on |w| <= |mu|+eps, l = 0 on |w| >= |mu|+2eps."""
    if not (np.isfinite(eps_f) and eps_f > 0):
        raise InvalidInputError("filter width must be positive")
    a = params.edge

    def l(w):
        return 1.0 - smoothstep((np.abs(w) - a - eps_f) / eps_f)

    def h(w):
        return 1.0 - l(w)

    def h1(w):
        return np.sqrt(np.clip(h(w), 0.0, None))

    return FilterPair(float(eps_f), a, l, h, h1)
