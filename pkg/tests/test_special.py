import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgdecay.core import ModelParams
from kgdecay.errors import BranchPointError, DomainError, InvalidInputError
from kgdecay.special import (BranchPoint, bessel_hankel, bessel_j0, bessel_j1, bessel_series,
                             branch_sqrt, j1_over_x, j2_over_x2, on_cut, smooth_filter_pair,
                             smoothstep)

XS = [0.0, 1e-8, 0.3, 1.0, 2.404825557695773, 5.0, 11.9, 25.0, 80.0, 300.0]


@pytest.mark.parametrize("x", XS)
def test_bessel_against_mpmath(x):
    assert bessel_j0(x) == pytest.approx(float(mpmath.besselj(0, x)), abs=1e-15)
    assert bessel_j1(x) == pytest.approx(float(mpmath.besselj(1, x)), abs=1e-15)


@pytest.mark.parametrize("x, tol", [(0.5, 1e-15), (3.0, 1e-15), (8.0, 1e-14), (11.5, 1e-12)])
def test_series_against_mpmath(x, tol):
    # alternating terms of size ~e^{x}/sqrt(x) cancel, so the error grows with x
    for nu in (0, 1, 2):
        assert bessel_series(nu, x) == pytest.approx(float(mpmath.besselj(nu, x)), abs=tol)


@pytest.mark.parametrize("x", [30.0, 60.0, 200.0])
def test_hankel_against_mpmath(x):
    for nu in (0, 1):
        assert bessel_hankel(nu, x) == pytest.approx(float(mpmath.besselj(nu, x)), abs=1e-12)


def test_hankel_domain():
    with pytest.raises(DomainError):
        bessel_hankel(0, 0.0)


def test_bessel_symmetry_and_zero():
    assert bessel_j1(-1.7) == pytest.approx(-bessel_j1(1.7))
    assert abs(bessel_j0(2.404825557695773)) < 1e-15


def test_ratio_functions_continuous():
    u = np.array([0.0, 1e-4, 9.9e-4, 1.01e-3, 0.049, 0.051, 1.0, 7.0])
    ref1 = [0.5] + [float(mpmath.besselj(1, x) / x) for x in u[1:]]
    ref2 = [0.125] + [float(mpmath.besselj(2, x) / x ** 2) for x in u[1:]]
    assert np.allclose(j1_over_x(u), ref1, atol=1e-15)
    assert np.allclose(j2_over_x2(u), ref2, atol=1e-15)


P = ModelParams(1.0, 0.3)


@settings(max_examples=200, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_branch_sqrt_off_cut(a, b):
    lam = complex(a, b)
    if on_cut(lam, P) or abs(a) < 1e-9:
        return
    w = branch_sqrt(lam, P)
    assert w.real > 0
    assert w * w == pytest.approx(lam * lam + P.edge ** 2, rel=1e-12, abs=1e-12)


def test_branch_sqrt_cut_and_sides():
    y = 2.0
    with pytest.raises(DomainError):
        branch_sqrt(1j * y, P)
    with pytest.raises(BranchPointError):
        branch_sqrt(P.mu, P)
    wp, wm = branch_sqrt(1j * y, P, "+"), branch_sqrt(1j * y, P, "-")
    assert wp == -wm
    # '+' is the limit from Re lambda > 0
    assert wp == pytest.approx(branch_sqrt(1e-10 + 1j * y, P), abs=1e-8)
    assert wm == pytest.approx(branch_sqrt(-1e-10 + 1j * y, P), abs=1e-8)
    with pytest.raises(DomainError):
        branch_sqrt(0.5 + 1j, P, "+")
    with pytest.raises(InvalidInputError):
        branch_sqrt(1j * y, P, "x")


def test_branch_point_distance():
    bp = BranchPoint(P)
    assert bp.mu == P.mu
    assert bp.distance(0.0) == pytest.approx(P.edge)
    assert bp.distance(0.3 + 3j) == pytest.approx(0.3)
    assert bp.on_cut(2j) and not bp.on_cut(0.5j)


def test_filters_partition_and_support():
    f = smooth_filter_pair(0.2, P)
    w = np.linspace(-5, 5, 2001)
    assert np.allclose(f.l(w) + f.h(w), 1.0)
    a = P.edge
    assert np.all(f.l(w[np.abs(w) <= a + 0.2]) == 1.0)
    assert np.all(f.l(w[np.abs(w) >= a + 0.4]) == 0.0)
    assert np.allclose(f.h1(w) ** 2, f.h(w))
    assert np.allclose(f.l(w), f.l(-w))
    with pytest.raises(InvalidInputError):
        smooth_filter_pair(0.0, P)


def test_smoothstep_flat_ends():
    s = np.array([-1.0, 0.0, 0.05, 0.5, 1.0, 2.0])
    v = smoothstep(s)
    assert v[0] == 0 and v[1] == 0 and v[4] == 1 and v[5] == 1
    assert v[3] == pytest.approx(0.5)
    assert 0 < v[2] < 1e-8
