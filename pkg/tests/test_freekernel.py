import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgdecay.core import ModelParams
from kgdecay.errors import DomainError, InvalidInputError
from kgdecay.freekernel import (Kernel2x2, check_kernel_bound, check_q_bounds, g0_scalar,
                                gb_matrix, gb_tilde_matrix, gr_matrix, gv_smooth, q_matrix,
                                smooth_parts, z_derivative)


def _g_oracle(zeta, t, m, order):
    f = lambda tt: 0.5 * mpmath.besselj(0, m * mpmath.sqrt(tt * tt - zeta * zeta))
    return float(mpmath.diff(f, t, order))


@pytest.mark.parametrize("zeta,t,m", [(0.0, 1.0, 1.0), (0.7, 2.0, 1.0), (-3.0, 5.5, 2.0),
                                      (9.0, 10.0, 0.5)])
def test_smooth_parts_are_time_derivatives(zeta, t, m):
    g, dg, ddg = smooth_parts(zeta, t, m)
    assert g == pytest.approx(_g_oracle(zeta, t, m, 0), abs=1e-14)
    assert dg == pytest.approx(_g_oracle(zeta, t, m, 1), abs=1e-12)
    assert ddg == pytest.approx(_g_oracle(zeta, t, m, 2), abs=1e-10)


def test_g0_scalar_support():
    z = np.linspace(-5, 5, 101)
    g = g0_scalar(z, 3.0, 1.0)
    assert np.all(g[np.abs(z) > 3.0] == 0)
    assert g0_scalar(0.0, 3.0, 1.0) == pytest.approx(0.5 * float(mpmath.besselj(0, 3.0)))
    with pytest.raises(DomainError):
        g0_scalar(0.0, 0.0, 1.0)


def test_moving_frame_shift():
    p = ModelParams(1.0, 0.4)
    t, z = 6.0, np.array([-2.0, 0.0, 1.0])
    K = gv_smooth(z, t, p)
    g, dg, ddg = smooth_parts(z + p.v * t, t, p.m)
    assert np.allclose(K.entry(1, 2), g) and np.allclose(K.entry(2, 1), ddg)
    assert np.allclose(K.entry(1, 1), dg) and np.allclose(K.entry(2, 2), dg)
    with pytest.raises(DomainError):
        gv_smooth(np.array([t]), t, p)  # z + vt outside the cone


@pytest.mark.parametrize("v", [0.0, 0.3, 0.6])
def test_bad_part_is_leading_asymptotics(v):
    # at fixed z and large t, gv - gb is one order of t smaller than gv
    p = ModelParams(1.0, v)
    z = np.array([-1.0, 0.0, 0.5, 2.0])
    prev = None
    for t in (200.0, 800.0, 3200.0):
        gv = np.abs(gv_smooth(z, t, p).matrix).max()
        gr = np.abs(gr_matrix(z, t, p).matrix).max()
        assert gr < 10 * gv / np.sqrt(t)
        if prev is not None:
            # |gr| t^{3/2} roughly constant, |gv| t^{1/2} roughly constant
            assert gr * t ** 1.5 < 1.6 * prev
        prev = gr * t ** 1.5


def test_gb_tilde_is_hankel_limit():
    # the large-argument Bessel form matches the exact kernel to O(theta^{-3/2})
    p = ModelParams(1.0, 0.2)
    t = 400.0
    z = np.array([-50.0, 0.0, 30.0])
    diff = np.abs((gv_smooth(z, t, p) - gb_tilde_matrix(z, t, p)).matrix).max()
    assert diff < 5 * t ** -1.5 * t  # entries carry up to t^2/theta^2 prefactors
    assert diff < 0.01 * np.abs(gv_smooth(z, t, p).matrix).max()


def test_q_domain_checks():
    p = ModelParams(1.0, 0.3)
    with pytest.raises(InvalidInputError):
        q_matrix(0.0, 10.0, p, 0.2)
    with pytest.raises(DomainError):
        q_matrix(0.0, 0.5, p, 0.6)
    with pytest.raises(DomainError):
        q_matrix(10.0, 10.0, p, 0.6)
    Q = q_matrix(np.array([0.0, 1.0]), 10.0, p, 0.6)
    assert Q.matrix.shape == (2, 2, 2)


def test_kernel2x2_arithmetic():
    a = Kernel2x2(np.ones((2, 2, 3)), np.zeros(3), 1.0)
    b = a + a - a
    assert np.allclose(b.matrix, 1.0) and np.allclose(b.max_abs(), 1.0)


def test_z_derivative_fourth_order():
    f = lambda z: Kernel2x2(np.array([[np.sin(z), z ** 3], [np.exp(z), z]]), z, 1.0)
    z = np.array([0.3, 1.2])
    d = z_derivative(f, z)
    assert np.allclose(d[0, 0], np.cos(z), atol=1e-11)
    assert np.allclose(d[1, 0], np.exp(z), atol=1e-11)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(2.0, 50.0), st.floats(-0.9, 0.9))
def test_smooth_kernel_symmetry(v, t, s):
    # the rest-frame smooth kernel is even in zeta
    p = ModelParams(1.0, v)
    zeta = s * t
    z_plus, z_minus = zeta - v * t, -zeta - v * t
    assert np.allclose(gv_smooth(z_plus, t, p, 0.05).matrix,
                       gv_smooth(z_minus, t, p, 0.05).matrix, atol=1e-14)


def test_kernel_bound_sweep():
    p = ModelParams(1.0, 0.3)
    r = check_kernel_bound(0.6, 0, [10, 20, 40, 80], params=p)
    assert r.passed and r.growth < 0.05 and np.isfinite(r.C)
    q = check_q_bounds(0.6, [10, 20, 40, 80], k=1, params=p, entries="all")
    assert q.passed
    assert set(r.to_dict()) >= {"eps", "k", "C", "growth", "passed"}
    with pytest.raises(InvalidInputError):
        check_kernel_bound(0.2, 0, [10, 20], params=p)
    with pytest.raises(InvalidInputError):
        check_kernel_bound(0.6, 2, [10, 20], params=p)
    with pytest.raises(DomainError):
        check_kernel_bound(0.6, 0, [0.5, 20], params=p)
