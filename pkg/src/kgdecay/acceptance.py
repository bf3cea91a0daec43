"""The twelve acceptance checks as plain functions returning a CriterionResult.

Each check stops at its first failing sub-check and records the measured
numbers; the runner orders them by module dependency.
"""

from __future__ import annotations

import time
import traceback
from dataclasses import dataclass, field

import numpy as np

from .core import Field, Grid, ModelParams, check_potential, gaussian_state, power_potential, \
    sech2_potential, energy_norm_F
from .decay import (full_group_fit, high_energy_fit, negative_control, verify_full_decay,
                    verify_remainder_decay)
from .evolution import (InitialData, energy, evolve_free_fourier, evolve_free_kernel,
                        rk4_trajectory)
from .freekernel import check_kernel_bound, check_q_bounds
from .resolvent import (ResolventProbe, born_identity_residual, build_matrix_resolvent_free,
                        build_matrix_resolvent_perturbed, check_low_energy, lap_limit,
                        resolvent_residual, w_norm)
from .spectral import (analyze, detect_zero_resonance, direct_gap_eigenvalues,
                       riesz_projection, schrodinger_spectrum)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass
class CriterionResult:
    cid: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0
    error: str | None = None

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.cid:2d}: {self.title}"

    def to_dict(self):
        return {"id": self.cid, "title": self.title, "pass": self.passed,
                "details": _plain(self.details), "error": self.error}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


# ---------------------------------------------------------------- 1-4 resolvent

def c1_resolvent_residuals(seed=0):
    p = ModelParams(1.0, 0.3)
    g = Grid(32.0, 512)
    V = power_potential(g, -0.5, 6)
    psi = gaussian_state(g, 0.3, 1.0, 1.0, 0.5)
    rng = np.random.default_rng(seed)
    rows, ok = [], True
    for _ in range(10):
        lam = complex(rng.choice([-1, 1]) * rng.uniform(0.5, 2.0), rng.uniform(-3.0, 3.0))
        free = ResolventProbe(lam, p, g)
        pert = ResolventProbe(lam, p, g, potential=V)
        r0 = resolvent_residual(build_matrix_resolvent_free(free), free, psi)
        r1 = resolvent_residual(build_matrix_resolvent_perturbed(pert), pert, psi)
        rows.append({"lam": lam, "free": r0, "perturbed": r1})
        ok &= r0 <= 1e-6 and r1 <= 1e-6
    return ok, {"rows": rows, "tol": 1e-6}


def c2_born_identity():
    p = ModelParams(1.0, 0.3)
    g = Grid(16.0, 1024)
    V = power_potential(g, -0.5, 6)
    res, _ = born_identity_residual(ResolventProbe(1 + 2j, p, g, potential=V))
    ladder = []
    for c in (2, 4, 8, 16):
        lam = 1j * c * p.edge
        ladder.append(w_norm(ResolventProbe(lam, p, g, "+", V)) * abs(lam) ** 2)
    ok = res <= 1e-8 and max(ladder) <= 2 * ladder[0]
    return ok, {"born_residual": res, "W_lam2": ladder}


def c3_limiting_absorption():
    p = ModelParams(1.0, 0.3)
    g = Grid(32.0, 512)
    V = power_potential(g, -0.5, 6)
    rows, ok = [], True
    for c in (1.5, 3.0, 6.0):
        for pot in (None, V):
            r = lap_limit(1j * c * p.edge, [1e-1, 1e-2, 1e-3, 1e-4], p, g, pot)
            rows.append({"lam_over_edge": c, "perturbed": pot is not None,
                         "distances": r.distances, "monotone": r.monotone})
            ok &= r.monotone
    return ok, {"rows": rows}


def c4_low_energy():
    p = ModelParams(1.0, 0.3)
    g = Grid(32.0, 512)
    rows, ok = [], True
    for sign in (1, -1):
        r = check_low_energy(sign, [1e-1, 3e-2, 1e-2, 3e-3], p, g, sigma=3)
        rows.append({"sign": sign, "r": r.r, "r_deriv": r.r_deriv,
                     "variation": r.variation, "variation_deriv": r.variation_deriv})
        ok &= r.variation < 0.1 and r.variation_deriv < 0.1
    return ok, {"rows": rows, "tol": 0.1}


# ---------------------------------------------------------------- 5-7 evolution

def c5_huygens():
    g = Grid(32.0, 512)
    data = InitialData.bump(radius=1.0)
    rows, ok = [], True
    for v in (0.0, 0.3, 0.6):
        p = ModelParams(1.0, v)
        for t in (2.0, 4.0, 6.0):
            s = evolve_free_kernel(data, t, p, g)
            out = np.abs(g.x + v * t) > t + 1.0
            leak = float(max(np.abs(s.psi.values[out]).max(), np.abs(s.pi.values[out]).max()))
            rows.append({"v": v, "t": t, "outside_max": leak})
            ok &= leak < 1e-12
    return ok, {"rows": rows}


def c6_energy():
    g = Grid(32.0, 256)
    s0 = gaussian_state(g, 0.0, 2.5, 1.0, 0.3)
    times = [10.0, 20.0, 30.0, 40.0, 50.0]
    out = {}
    ok = True
    for label, V, tol in (("free", None, 1e-8), ("potential", power_potential(g, -0.5, 6), 1e-7)):
        p = ModelParams(1.0, 0.5)
        E0 = energy(s0, p, V)
        traj = rk4_trajectory(s0, times, p, V, dt=0.005)
        drift = max(abs(energy(s, p, V) / E0 - 1) for s in traj)
        out[label] = {"drift": drift, "tol": tol}
        ok &= drift <= tol
    return ok, out


def c7_cross_agreement():
    p = ModelParams(1.0, 0.3)
    g = Grid(32.0, 512)
    data = InitialData.gaussian(0.0, 1.0, 1.0, 0.5)
    s0 = data.sample(g)
    a = evolve_free_fourier(s0, 5.0, p)
    b = evolve_free_kernel(data, 5.0, p, g)
    c = rk4_trajectory(s0, [5.0], p, None, dt=0.005)[0]
    d = {"fourier_kernel": energy_norm_F(a - b, 0), "fourier_rk4": energy_norm_F(a - c, 0),
         "kernel_rk4": energy_norm_F(b - c, 0)}
    return all(x <= 1e-6 for x in d.values()), d


# ---------------------------------------------------------------- 8 kernels

def c8_kernel_bounds():
    rows, ok = [], True
    for v, eps in ((0.0, 0.5), (0.3, 0.6), (0.5, 0.7)):
        p = ModelParams(1.0, v)
        for k in (0, 1):
            r = check_kernel_bound(eps, k, [10, 20, 40, 80], params=p)
            q = check_q_bounds(eps, [10, 20, 40, 80], k=k, params=p, entries="all")
            rows.append({"v": v, "eps": eps, "k": k, "remainder_growth": r.growth,
                         "q_growth": q.growth})
            ok &= r.passed and q.passed
    return ok, {"rows": rows, "tol": 0.05}


# ---------------------------------------------------------------- 9-12 decay

def c9_remainder_decay():
    g = Grid(200.0, 8192)
    s0 = gaussian_state(g, 0.0, 1.0, 1.0, 0.5)
    rows, ok = [], True
    for v in (0.0, 0.3):
        p = ModelParams(1.0, v)
        f = verify_remainder_decay(s0, p)
        c = full_group_fit(s0, p)
        rows.append({"v": v, "p_remainder": f.p, "p_full_group": c.p,
                     "route_gap": f.extra["route_gap"]})
        ok &= bool(f.passed and c.passed)
    return ok, {"rows": rows, "band": [-1.65, -1.35], "contrast": "-0.5 +- 0.1"}


def c10_high_energy():
    g = Grid(200.0, 8192)
    s0 = gaussian_state(g, 0.0, 1.0, 1.0, 0.5)
    rows, ok = [], True
    for v in (0.0, 0.3):
        f = high_energy_fit(s0, ModelParams(1.0, v))
        rows.append({"v": v, "p": f.p})
        ok &= bool(f.passed)
    return ok, {"rows": rows, "bound": -1.35}


def c11_spectral_pipeline():
    out, ok = {}, True
    for v in (0.0, 0.3):
        p = ModelParams(2.0, v)
        g = Grid(16.0, 256)
        V = sech2_potential(g, -2.0 / p.gamma ** 2)
        zetas = schrodinger_spectrum(V, p)
        sd = analyze(V, p, resonance=False)
        direct = direct_gap_eigenvalues(p, g, V)
        lam_err = max(min(abs(l - d) for d in direct) for l in sd.A_eigs) if direct else np.inf
        idem = 0.0
        for P in sd.projectors:
            R = riesz_projection(P.lam, 0.3 * (p.edge - abs(P.lam.imag)), p, V,
                                 others=sd.A_eigs).matrix
            idem = max(idem, float(np.linalg.norm(R @ R - R) / np.linalg.norm(R)))
        z_err = abs(zetas[0] + 1.0) if zetas else np.inf
        out[f"v={v}"] = {"zetas": zetas, "zeta_error": z_err, "lambda_match": lam_err,
                         "idempotence": idem}
        ok &= z_err <= 1e-5 and lam_err <= 1e-5 and idem <= 1e-6 and len(zetas) == 1
    g = Grid(16.0, 256)
    zero = check_potential(Field(g, np.zeros(g.n)), 6.0, "zero")
    verdict = detect_zero_resonance(zero, ModelParams(2.0, 0.3)).verdict
    out["zero_potential_verdict"] = verdict
    return ok and verdict == "resonance", out


def c12_main_decay():
    g = Grid(200.0, 8192)
    p = ModelParams(2.0, 0.3)
    base = power_potential(g, -1.0, 6)
    s0 = gaussian_state(g, 0.0, 1.0, 1.0, 0.5)
    small = Grid(50.0, 2048)
    dt = 0.25 * g.dx
    rep = verify_full_decay(base.scaled(2.0), p, s0, eig_grid=small, dt=dt)
    ctrl = negative_control(base, p, s0, 2.0, 6.0, offset=1e-2, eig_grid=small, dt=dt,
                            reverse=False)
    d = {"p_forward": rep.fit.p, "p_reverse": rep.fit_reverse.p,
         "window": rep.fit.window, "path_difference": rep.path_difference,
         "eigenvalues": rep.spectral_data.A_eigs, "wronskian": rep.spectral_data.wronskian_value,
         "control_p": ctrl.fit.p, "control_coupling": ctrl.fit.extra["coupling"],
         "threshold_coupling": ctrl.fit.extra["c_star"]}
    ok = rep.passed and rep.path_difference <= 1e-6 and ctrl.fit.p > -1.3
    return ok, d


CRITERIA = {
    1: ("resolvent residuals", c1_resolvent_residuals),
    2: ("Born identity and high-energy bound", c2_born_identity),
    3: ("limiting absorption", c3_limiting_absorption),
    4: ("low-energy expansion", c4_low_energy),
    5: ("Huygens principle", c5_huygens),
    6: ("energy conservation", c6_energy),
    7: ("evolver cross-agreement", c7_cross_agreement),
    8: ("kernel bounds", c8_kernel_bounds),
    9: ("free remainder decay", c9_remainder_decay),
    10: ("high-energy decay", c10_high_energy),
    11: ("spectral pipeline", c11_spectral_pipeline),
    12: ("continuous-spectrum decay", c12_main_decay),
}

# module dependency order: kernels, resolvent, spectral, evolution, decay
ORDER = (8, 1, 2, 3, 4, 11, 5, 6, 7, 9, 10, 12)


def run_criterion(cid: int, seed: int = 0) -> CriterionResult:
    title, fn = CRITERIA[cid]
    t0 = time.perf_counter()
    try:
        ok, details = fn(seed) if cid == 1 else fn()
        return CriterionResult(cid, title, bool(ok), details, time.perf_counter() - t0)
    except Exception as exc:  # a crash counts as a failure of this criterion only
        return CriterionResult(cid, title, False, {}, time.perf_counter() - t0,
                               f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}")


def run_all(ids=None, seed: int = 0, fail_fast: bool = False, parallel: int = 1):
    ids = [c for c in ORDER if ids is None or c in ids]
    if parallel > 1 and not fail_fast:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(parallel) as ex:
            return list(ex.map(run_criterion, ids, [seed] * len(ids)))
    out = []
    for c in ids:
        out.append(run_criterion(c, seed))
        if fail_fast and not out[-1].passed:
            break
    return out
