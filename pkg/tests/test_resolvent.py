import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgdecay.core import Field, Grid, ModelParams, gaussian_state, power_potential, japanese
from kgdecay.errors import DomainError, InvalidInputError, SpectralPointError
from kgdecay.resolvent import (ResolventProbe, born_identity_residual, build_matrix_resolvent_free,
                               build_matrix_resolvent_perturbed, build_R, build_R0,
                               build_R0_derivs, idR0_residual, lap_limit, low_energy_coeffs,
                               r0_kernel, resolvent_residual, schrodinger_boost_R,
                               solve_perturbed, weighted_hs, w_norm, circulant_derivative)

P = ModelParams(1.0, 0.3)
G = Grid(32.0, 512)
V = power_potential(G, -0.5, 6)


def _symbol_oracle(lam, f, grid, params, V=None):
    """Solve [-(1-v^2) d^2 - 2 v lam d + m^2 + lam^2 (+ V)] u = f spectrally."""
    k, v = grid.k, params.v
    if V is None:
        sym = (1 - v * v) * k * k - 2j * v * lam * k + params.m ** 2 + lam * lam
        return np.fft.ifft(np.fft.fft(f) / sym)
    D = circulant_derivative(grid)
    M = -(1 - v * v) * D @ D - 2 * v * lam * D + (params.m ** 2 + lam * lam) * np.eye(grid.n) \
        + np.diag(V)
    return np.linalg.solve(M, f)


@pytest.mark.parametrize("lam", [1 + 0.5j, -0.7 + 2j, 2.0 - 1j])
def test_R0_matches_symbol_inverse(lam):
    f = np.exp(-(G.x - 0.5) ** 2)
    u = build_R0(ResolventProbe(lam, P, G)).apply(Field(G, f)).values
    ref = _symbol_oracle(lam, f, G, P)
    assert np.linalg.norm(u - ref) / np.linalg.norm(ref) < 1e-8


@pytest.mark.parametrize("lam", [1 + 0.5j, -0.8 - 1.5j])
def test_perturbed_scalar_matches_dense_inverse(lam):
    f = np.exp(-(G.x + 0.3) ** 2)
    u = solve_perturbed(ResolventProbe(lam, P, G, potential=V), Field(G, f)).values
    ref = _symbol_oracle(lam, f, G, P, V.values)
    assert np.linalg.norm(u - ref) / np.linalg.norm(ref) < 1e-8


def test_kernel_is_translation_invariant_and_decays():
    x = np.array([0.0, 1.0, 5.0])
    a = r0_kernel(1 + 1j, x + 2.0, 2.0, P)
    b = r0_kernel(1 + 1j, x, 0.0, P)
    assert np.allclose(a, b)
    assert abs(b[2]) < abs(b[1]) < abs(b[0])


def test_derivative_identity():
    g = Grid(32.0, 512)
    assert idR0_residual(ResolventProbe(2 + 1j, P, g)) < 1e-10


def test_lambda_derivatives_match_differences():
    lam, h = 0.8 + 0.9j, 1e-4
    R0, R0p, R0pp = build_R0_derivs(ResolventProbe(lam, P, G), 2)
    Rp = build_R0(ResolventProbe(lam + h, P, G)).matrix
    Rm = build_R0(ResolventProbe(lam - h, P, G)).matrix
    assert np.abs(R0p - (Rp - Rm) / (2 * h)).max() < 1e-6 * np.abs(R0p).max()
    assert np.abs(R0pp - (Rp - 2 * R0 + Rm) / h ** 2).max() < 1e-4 * np.abs(R0pp).max()


@settings(max_examples=6, deadline=None)
@given(st.floats(0.5, 2.0), st.floats(-2.5, 2.5), st.sampled_from([1, -1]))
def test_block_resolvent_residuals(re, im, sgn):
    # dx = 0.125; at dx = 0.25 the quadrature error is ~1e-5
    g = G
    Vg = V
    lam = complex(sgn * re, im)
    psi = gaussian_state(g, 0.3, 1.0, 1.0, 0.5)
    free = ResolventProbe(lam, P, g)
    pert = ResolventProbe(lam, P, g, potential=Vg)
    assert resolvent_residual(build_matrix_resolvent_free(free), free, psi) < 1e-6
    assert resolvent_residual(build_matrix_resolvent_perturbed(pert), pert, psi) < 1e-6


def test_born_identity_and_forms():
    g = Grid(16.0, 512)
    Vg = power_potential(g, -0.5, 6)
    res, wn = born_identity_residual(ResolventProbe(1 + 2j, P, g, potential=Vg))
    assert res < 1e-10 and wn > 0
    pr = ResolventProbe(1 + 1j, P, g, potential=Vg)
    R, R0 = build_R(pr).matrix, build_R0(ResolventProbe(1 + 1j, P, g)).matrix
    alt = R0 @ np.linalg.inv(np.eye(g.n) + Vg.values[:, None] * R0)
    assert np.abs(R - alt).max() < 1e-10 * np.abs(R).max()


def test_schrodinger_boost_on_smooth_data():
    pb = ResolventProbe(0.5 + 0.5j, ModelParams(1.0, 0.4), G, potential=V)
    f = np.exp(-G.x ** 2)
    a = build_R(pb).matrix @ f
    b = schrodinger_boost_R(pb).matrix @ f
    assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-9


def test_probe_validation():
    with pytest.raises(DomainError):
        ResolventProbe(2j, P, G)
    with pytest.raises(DomainError):
        ResolventProbe(0.5 + 2j, P, G, "+")
    with pytest.raises(InvalidInputError):
        ResolventProbe(1.0, P, G, "x")
    with pytest.raises(SpectralPointError) as e:
        ResolventProbe(0.5j + 1e-4, P, G, eigenvalues=(0.5j,))
    assert e.value.nearest == 0.5j
    with pytest.raises(InvalidInputError):
        ResolventProbe(1.0, P, Grid(16.0, 256), potential=V)


def test_weighted_hs_identity():
    g = Grid(8.0, 64)
    w = japanese(g.x) ** -1.0
    assert weighted_hs(np.eye(g.n), g, 0.5) == pytest.approx(np.linalg.norm(w))


def test_lap_monotone_and_jump():
    g = Grid(32.0, 256)
    r = lap_limit(3j * P.edge, [1e-1, 1e-2, 1e-3], P, g)
    assert r.monotone and all(o > 0.8 for o in r.orders)
    assert r.jump_norm > 0
    with pytest.raises(DomainError):
        lap_limit(0.5j * P.edge, [1e-1], P, g)


def test_low_energy_leading_term():
    # sqrt(nu) R0(mu + nu) -> B0 in the weighted HS norm
    g = Grid(32.0, 256)
    B0, _ = low_energy_coeffs(1, P, g)
    d = []
    for nu in (1e-2, 1e-3, 1e-4):
        R0 = build_R0(ResolventProbe(P.mu + nu, P, g)).matrix
        d.append(weighted_hs(np.sqrt(nu) * R0 - B0.matrix, g, 3))
    assert d[0] > d[1] > d[2]
    assert d[2] < 0.05 * weighted_hs(B0.matrix, g, 3)


def test_high_energy_W_law():
    g = Grid(16.0, 1024)
    Vg = power_potential(g, -0.5, 6)
    vals = []
    for c in (2, 4, 8, 16):
        lam = 1j * c * P.edge
        vals.append(w_norm(ResolventProbe(lam, P, g, "+", Vg)) * abs(lam) ** 2)
    assert max(vals) <= 2 * vals[0]
