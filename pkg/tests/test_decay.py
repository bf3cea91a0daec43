import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgdecay.core import (Field, Grid, ModelParams, Potential, check_potential, energy_norm_F,
                          gaussian_state, sech2_potential)
from kgdecay.decay import (DecayTable, bad_part, decay_series, fit_exponent, free_evolver,
                           full_group_fit, rk4_evolver, verify_full_decay, verify_remainder_decay)
from kgdecay.errors import (AdmissibilityError, GeometryError, InconclusiveError, InvalidInputError,
                            PreconditionError)
from kgdecay.spectral import analyze

T = np.geomspace(10, 80, 13)


def table(norms, t=T):
    return DecayTable(t, norms, 3.0, "synthetic")


def test_exact_power_law():
    f = fit_exponent(table(2.5 * T ** -1.5))
    assert abs(f.p + 1.5) < 1e-12 and abs(f.C - 2.5) < 1e-10
    assert f.npoints == 13 and f.residual < 1e-12


@settings(max_examples=40, deadline=None)
@given(p=st.floats(-3.0, 0.5), c=st.floats(1e-3, 1e3))
def test_power_law_recovered(p, c):
    f = fit_exponent(table(c * T ** p))
    assert abs(f.p - p) < 1e-9


def test_oscillating_power_law_within_band():
    f = fit_exponent(table(T ** -1.5 * (1 + 0.05 * np.sin(T))))
    assert abs(f.p + 1.5) < 0.05


def test_constant_has_zero_exponent():
    assert abs(fit_exponent(table(np.full(13, 0.7))).p) < 1e-12


def test_window_selects_points():
    f = fit_exponent(table(T ** -1.0), window=(20.0, 80.0))
    assert f.window[0] >= 20.0 and f.npoints < 13


def test_too_few_points_is_inconclusive():
    with pytest.raises(InconclusiveError):
        fit_exponent(table(T[:5] ** -1.5, T[:5]))
    short = np.linspace(10, 15, 8)
    with pytest.raises(InconclusiveError):
        fit_exponent(table(short ** -1.5, short))


def test_noise_floor_truncates_with_warning():
    y = T ** -1.5
    y[-3:] = 1e-15
    with pytest.warns(UserWarning, match="noise floor"):
        f = fit_exponent(table(y))
    assert f.npoints == 10 and abs(f.p + 1.5) < 1e-12


def test_table_invariants():
    with pytest.raises(InvalidInputError):
        DecayTable([1, 2], [1.0], 3.0)
    with pytest.raises(InvalidInputError):
        DecayTable([2, 1], [1.0, 1.0], 3.0)
    with pytest.raises(InvalidInputError):
        DecayTable([1, 2], [1.0, -1.0], 3.0)


def test_csv_round_trip(tmp_path):
    tab = DecayTable(T, np.pi * T ** -1.5, 3.0, "free group")
    path = tmp_path / "d.csv"
    tab.to_csv(path)
    back = DecayTable.from_csv(path)
    assert np.array_equal(back.t, tab.t) and np.array_equal(back.norms, tab.norms)
    assert back.sigma == 3.0 and back.label == "free group"
    # a leading comment line is allowed
    path.write_text("# config_hash: abc\n" + path.read_text())
    assert np.array_equal(DecayTable.from_csv(path).norms, tab.norms)
    (tmp_path / "bad.csv").write_text("x,y\n1,2\n")
    with pytest.raises(InvalidInputError):
        DecayTable.from_csv(tmp_path / "bad.csv")


@pytest.mark.parametrize("v", [0.0, 0.4])
def test_bad_part_routes_agree(v):
    g = Grid(64.0, 1024)
    p = ModelParams(1.0, v)
    s = gaussian_state(g, 0.3, 1.0, 1.0, 0.5)
    for t in (5.0, 30.0):
        a = bad_part(s, t, p, "moments")
        b = bad_part(s, t, p, "quadrature")
        assert np.linalg.norm((a - b).to_vector()) < 1e-12 * np.linalg.norm(a.to_vector())
    with pytest.raises(InvalidInputError):
        bad_part(s, 1.0, p, "fft")


def test_bad_part_decays_like_inverse_sqrt_t():
    g = Grid(64.0, 1024)
    p = ModelParams(1.0, 0.3)
    s = gaussian_state(g)
    n = [np.abs(bad_part(s, t, p).psi.values).max() for t in (10.0, 40.0)]
    assert np.isclose(n[0] / n[1], 2.0, rtol=1e-6)


def test_sigma_monotonicity():
    g = Grid(64.0, 1024)
    p = ModelParams(1.0, 0.3)
    s = gaussian_state(g, 0.0, 1.0, 1.0, 0.5)
    times = [2.0, 5.0, 10.0]
    tabs = [decay_series(free_evolver(p), s, sig, times) for sig in (1.0, 2.0, 3.0, 4.0)]
    for a, b in zip(tabs, tabs[1:]):
        assert np.all(b.norms <= a.norms)


def test_series_sorts_by_absolute_time():
    g = Grid(64.0, 1024)
    p = ModelParams(1.0, 0.3)
    s = gaussian_state(g)
    tab = decay_series(free_evolver(p), s, 3.0, [-8.0, -2.0, -4.0])
    assert tab.t.tolist() == [2.0, 4.0, 8.0]


def test_free_group_is_time_symmetric():
    g = Grid(200.0, 8192)
    p = ModelParams(1.0, 0.3)
    # even real data with pi0 = 0: psi(x, -t) = psi(-x, t), and the weight is even
    s = gaussian_state(g, 0.0, 1.0, 1.0, 0.0)
    fwd = decay_series(free_evolver(p), s, 3.0, T)
    bwd = decay_series(free_evolver(p), s, 3.0, -T)
    assert np.allclose(fwd.norms, bwd.norms, rtol=1e-10)
    assert abs(full_group_fit(s, p).p + 0.5) < 0.1


def test_wrap_around_is_detected():
    g = Grid(16.0, 256)
    p = ModelParams(1.0, 0.3)
    with pytest.raises(GeometryError):
        decay_series(free_evolver(p), gaussian_state(g), 3.0, [5.0, 30.0])


def test_series_argument_checks():
    g = Grid(16.0, 256)
    p = ModelParams(1.0, 0.3)
    s = gaussian_state(g)
    with pytest.raises(InvalidInputError):
        decay_series(free_evolver(p), s, 0.0, [1.0])
    with pytest.raises(PreconditionError):
        decay_series(free_evolver(p), s, 3.0, [1.0], project_c=True)
    with pytest.raises(InvalidInputError):
        decay_series(free_evolver(p), s, 3.0, [1.0], True, analyze(sech2_potential(g, -0.5), p), "sideways")
    with pytest.raises(InvalidInputError):
        verify_remainder_decay(s, p, sigma=2.0)


def test_eigenstate_has_no_continuous_part():
    g = Grid(16.0, 256)
    p = ModelParams(2.0, 0.3)
    V = sech2_potential(g, -2.0 / p.gamma ** 2)
    sd = analyze(V, p, resonance=False)
    s = sd.projectors[0].eigenstate()
    tab = decay_series(rk4_evolver(p, V), s, 3.0, [0.5, 1.0, 2.0], True, sd)
    assert np.all(tab.norms < 1e-5 * energy_norm_F(s, -3.0))
    assert tab.metadata["path_difference"] < 1e-5
    assert tab.metadata["n_eigen"] == 2


def test_both_projection_paths_agree_on_generic_data():
    g = Grid(16.0, 256)
    p = ModelParams(2.0, 0.3)
    V = sech2_potential(g, -2.0 / p.gamma ** 2)
    sd = analyze(V, p, resonance=False)
    s = gaussian_state(g, 0.5, 1.0, 1.0, 0.3)
    a = decay_series(rk4_evolver(p, V, 0.02), s, 3.0, [1.0, 2.0], True, sd, "projector")
    b = decay_series(rk4_evolver(p, V, 0.02), s, 3.0, [1.0, 2.0], True, sd, "subtract")
    assert np.allclose(a.norms, b.norms, rtol=1e-5)


def test_full_decay_preconditions():
    g = Grid(16.0, 256)
    p = ModelParams(2.0, 0.3)
    s = gaussian_state(g)
    zero = check_potential(Field(g, np.zeros(g.n)), 6.0, "zero")
    with pytest.raises(PreconditionError):
        verify_full_decay(zero, p, s)
    slow = Potential(Field(g, -(1 + g.x ** 2) ** -2.0), 4.0, 1.0, "slow")
    with pytest.raises(AdmissibilityError):
        verify_full_decay(slow, p, s)
