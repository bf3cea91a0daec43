import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgdecay.core import (Field, Grid, ModelParams, State, check_potential, energy_norm_F,
                          gaussian_state, japanese, power_potential, sech2_potential,
                          spectral_derivative, weighted_norm, differentiation_matrix)
from kgdecay.errors import AdmissibilityError, InvalidInputError

G = Grid(16.0, 256)


def test_grid_validation():
    with pytest.raises(InvalidInputError):
        Grid(10.0, 15)
    with pytest.raises(InvalidInputError):
        Grid(10.0, 8)
    with pytest.raises(InvalidInputError):
        Grid(-1.0, 64)
    g = Grid(10.0, 64)
    assert g.dx == pytest.approx(20 / 64)
    assert g.x[0] == -10.0 and g.k[32] == 0.0
    assert g.enlarge(2).dx == g.dx and g.refine(2).n == 128


def test_field_is_immutable_and_finite():
    f = Field(G, np.ones(G.n))
    with pytest.raises(ValueError):
        f.values[0] = 2
    with pytest.raises(InvalidInputError):
        Field(G, np.full(G.n, np.nan))
    with pytest.raises(InvalidInputError):
        Field(G, np.ones(10))


def test_model_params():
    p = ModelParams(2.0, 0.6)
    assert p.gamma == pytest.approx(1.25)
    assert p.mu == pytest.approx(1.6j)
    with pytest.raises(InvalidInputError):
        ModelParams(1.0, 1.0)
    with pytest.raises(InvalidInputError):
        ModelParams(0.0, 0.0)


def test_spectral_derivative_of_gaussian():
    f = np.exp(-G.x ** 2)
    assert np.allclose(spectral_derivative(f, G), -2 * G.x * f, atol=1e-12)
    D = differentiation_matrix(G)
    assert np.allclose(D, -D.T)
    assert np.allclose(D @ f, -2 * G.x * f, atol=1e-12)


def test_weighted_norm_plane_wave():
    # periodic plane wave: <nabla> multiplies by sqrt(1+k^2); norm^2 = (1+k^2) * 2L
    k = G.k[5]
    f = Field(G, np.exp(1j * k * G.x))
    assert weighted_norm(f, 1, 0) == pytest.approx(np.sqrt((1 + k * k) * 2 * G.half_length))
    assert weighted_norm(f, -1, 0) == pytest.approx(np.sqrt(2 * G.half_length / (1 + k * k)))
    with pytest.raises(InvalidInputError):
        weighted_norm(f, 2, 0)


def test_weighted_norm_gaussian_closed_form():
    # || e^{-x^2} ||_{L^2}^2 = sqrt(pi/2)
    f = Field(G, np.exp(-G.x ** 2))
    assert weighted_norm(f, 0, 0) == pytest.approx((np.pi / 2) ** 0.25, rel=1e-12)
    # ||x e^{-x^2}||^2 + ||e^{-x^2}||^2 = sqrt(pi/2)(1 + 1/4) for the <x>^1 weight
    assert weighted_norm(f, 0, 1) == pytest.approx((np.sqrt(np.pi / 2) * 1.25) ** 0.5, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.5, 3), st.floats(-2, 2), st.sampled_from([-1, 0, 1]))
def test_weighted_norm_homogeneous_and_sigma_monotone(c, w, scale, s):
    f = Field(G, np.exp(-((G.x - c) / w) ** 2))
    n = weighted_norm(f, s, 0)
    assert weighted_norm(Field(G, scale * f.values), s, 0) == pytest.approx(abs(scale) * n, abs=1e-12)
    assert weighted_norm(f, s, -3) <= weighted_norm(f, s, -1) + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 2))
def test_energy_norm_triangle(c1, c2, w):
    a = gaussian_state(G, c1, w, 1.0, 0.5)
    b = gaussian_state(G, c2, w, -0.3, 1.0)
    assert energy_norm_F(a + b, -3) <= energy_norm_F(a, -3) + energy_norm_F(b, -3) + 1e-12


def test_state_arithmetic():
    a = gaussian_state(G, 0, 1, 1.0, 2.0)
    z = a - a
    assert energy_norm_F(z, 0) == 0
    assert np.allclose((2 * a).pi.values, 2 * a.pi.values)
    assert np.allclose(State.from_vector(G, a.to_vector()).psi.values, a.psi.values)
    with pytest.raises(InvalidInputError):
        State(Field(G, np.zeros(G.n)), Field(Grid(16.0, 128), np.zeros(128)))


def test_japanese():
    assert japanese(0.0) == 1.0
    assert japanese(np.array([3.0]))[0] == pytest.approx(np.sqrt(10))


def test_check_potential_gates():
    g = Grid(40.0, 512)
    V = power_potential(g, -1.0, 6)
    assert V.beta == 6 and V.C_bound > 0
    with pytest.raises(AdmissibilityError):
        power_potential(g, -1.0, 4)
    # asserted beta=6 but data only decays like <x>^-2
    with pytest.raises(AdmissibilityError):
        check_potential(Field(g, japanese(g.x) ** -2.0), 6)
    with pytest.raises(InvalidInputError):
        check_potential(Field(g, 1j * japanese(g.x) ** -6.0), 6)
    assert sech2_potential(g, -2.0).values.min() == pytest.approx(-2.0)
    assert check_potential(Field(g, np.zeros(g.n)), 6).is_zero()
    assert V.scaled(2.0).values.min() == pytest.approx(2 * V.values.min())
