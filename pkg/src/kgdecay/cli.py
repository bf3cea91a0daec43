"""Command-line batch runner.

    kgdecay SUBCOMMAND [--config PATH] [--out DIR] [--seed N] [--parallel K]

Subcommands: evolve, decay-fit, spectrum, resolvent-probe, kernel-bounds,
suite, plot.  Configuration is JSON; any leaf can be overridden through the
environment as ``KGDECAY__SECTION__KEY=<json value>``.  Exit codes: 0 success,
1 invalid configuration or input, 2 a numerical check failed, 3 internal error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import Grid, ModelParams, Field, check_potential, gaussian_state, power_potential, \
    sech2_potential, energy_norm_F
from .errors import (AdmissibilityError, GeometryError, InvalidInputError, KGError,
                     PreconditionError)

log = logging.getLogger("kgdecay")

ENV_PREFIX = "KGDECAY__"

DEFAULTS = {
    "model": {"m": 1.0, "v": 0.3},
    "grid": {"L": 200.0, "n": 8192},
    "potential": {"kind": "none", "amplitude": -2.0, "beta": 6.0, "samples": None},
    "initial": {"center": 0.0, "width": 1.0, "amp_psi": 1.0, "amp_pi": 0.5},
    "evolution": {"dt": None, "t_max": 10.0, "method": "fourier-free", "eps_f": 0.2,
                  "snapshots": 5, "decimate": 8},
    "decay": {"sigma": 3.0, "times": None, "window": [10.0, 80.0], "eig_L": 50.0,
              "reverse": True},
    "resolvent": {"L": 32.0, "n": 512, "cut_points": [1.5, 3.0, 6.0],
                  "eps": [1e-1, 1e-2, 1e-3, 1e-4], "nu": [1e-1, 3e-2, 1e-2, 3e-3],
                  "ladder": [2, 4, 8, 16], "ladder_L": 16.0, "ladder_n": 1024},
    "kernel": {"pairs": [[0.0, 0.5], [0.3, 0.6], [0.5, 0.7]], "times": [10, 20, 40, 80],
               "z_density": 20.0},
    "suite": {"criteria": None, "fail_fast": False},
    "out": "kgdecay_out",
    "seed": 0,
}

POTENTIAL_KINDS = ("none", "power", "sech2", "custom-samples")


class ConfigError(InvalidInputError):
    pass


# ---------------------------------------------------------------- config

def _merge(base, over, path=""):
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict) and isinstance(v, dict):
            _merge(base[k], v, path + k + ".")
        else:
            base[k] = v
    return base


def _env_overrides(environ):
    over = {}
    for key, raw in sorted(environ.items()):
        if not key.startswith(ENV_PREFIX):
            continue
        parts = key[len(ENV_PREFIX):].lower().split("__")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        # environment names are case-folded; map back onto the spelled keys (grid.L)
        node, ref = over, DEFAULTS
        for i, p in enumerate(parts):
            if isinstance(ref, dict):
                p = next((k for k in ref if k.lower() == p), p)
                ref = ref.get(p)
            if i == len(parts) - 1:
                node[p] = val
            else:
                node = node.setdefault(p, {})
    return over


def load_config(path=None, environ=None, out=None, seed=None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        try:
            with open(path) as fh:
                _merge(cfg, json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    _merge(cfg, _env_overrides(os.environ if environ is None else environ))
    if out is not None:
        cfg["out"] = out
    if seed is not None:
        cfg["seed"] = seed
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    problems = []
    m, v = cfg["model"]["m"], cfg["model"]["v"]
    if not (isinstance(m, (int, float)) and m > 0):
        problems.append("model.m must be positive")
    if not (isinstance(v, (int, float)) and abs(v) < 1):
        problems.append("model.v must satisfy |v| < 1")
    n = cfg["grid"]["n"]
    if not (isinstance(n, int) and n >= 16 and n % 2 == 0):
        problems.append("grid.n must be an even integer >= 16")
    if not cfg["grid"]["L"] > 0:
        problems.append("grid.L must be positive")
    pk = cfg["potential"]["kind"]
    if pk not in POTENTIAL_KINDS:
        problems.append(f"potential.kind must be one of {POTENTIAL_KINDS}")
    if pk == "custom-samples" and not isinstance(cfg["potential"]["samples"], list):
        problems.append("potential.samples must be a list for custom-samples")
    ev = cfg["evolution"]
    if ev["method"] not in ("fourier-free", "kernel-free", "rk4-perturbed"):
        problems.append("evolution.method must be fourier-free, kernel-free or rk4-perturbed")
    if not ev["t_max"] > 0:
        problems.append("evolution.t_max must be positive")
    if ev["dt"] is not None and not ev["dt"] > 0:
        problems.append("evolution.dt must be positive")
    if not cfg["decay"]["sigma"] > 0:
        problems.append("decay.sigma must be positive")
    w = cfg["decay"]["window"]
    if not (len(w) == 2 and 0 < w[0] < w[1]):
        problems.append("decay.window must be [t1, t2] with 0 < t1 < t2")
    crit = cfg["suite"]["criteria"]
    if crit is not None and not all(isinstance(c, int) and 1 <= c <= 12 for c in crit):
        problems.append("suite.criteria must list ids 1..12")
    if problems:
        raise ConfigError("; ".join(problems))


def config_hash(cfg) -> str:
    body = {k: v for k, v in cfg.items() if k != "out"}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------- builders

def build_grid(cfg):
    return Grid(float(cfg["grid"]["L"]), int(cfg["grid"]["n"]))


def build_params(cfg):
    return ModelParams(float(cfg["model"]["m"]), float(cfg["model"]["v"]))


def build_potential(cfg, grid):
    pc = cfg["potential"]
    kind = pc["kind"]
    if kind == "none":
        return None
    if kind == "power":
        return power_potential(grid, float(pc["amplitude"]), float(pc["beta"]))
    if kind == "sech2":
        return sech2_potential(grid, float(pc["amplitude"]), float(pc["beta"]))
    vals = np.asarray(pc["samples"], dtype=float)
    if vals.size != grid.n:
        raise ConfigError(f"potential.samples has {vals.size} entries, grid has {grid.n}")
    return check_potential(Field(grid, vals), float(pc["beta"]), "custom")


def build_initial(cfg, grid):
    ic = cfg["initial"]
    return gaussian_state(grid, ic["center"], ic["width"], ic["amp_psi"], ic["amp_pi"])


def _zero_potential(grid):
    return check_potential(Field(grid, np.zeros(grid.n)), 6.0, "zero")


# ---------------------------------------------------------------- output

class Writer:
    def __init__(self, cfg):
        self.dir = Path(cfg["out"])
        self.hash = config_hash(cfg)
        self.files = []

    def _path(self, name):
        self.dir.mkdir(parents=True, exist_ok=True)
        return self.dir / name

    def json(self, name, obj):
        p = self._path(name)
        payload = {"config_hash": self.hash, "version": __version__, **obj}
        p.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
        self.files.append(str(p))
        return p

    def csv(self, name, header, rows):
        p = self._path(name)
        with open(p, "w", newline="") as fh:
            fh.write(f"# config_hash: {self.hash}\n")
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(x) for x in r])
        self.files.append(str(p))
        return p


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


class CheckFailed(Exception):
    """A numerical check did not meet its tolerance (exit code 2)."""


# ---------------------------------------------------------------- subcommands

def cmd_evolve(cfg, args, out: Writer):
    from .evolution import (EvolutionConfig, InitialData, energy, evolve_free_fourier,
                            evolve_free_kernel, rk4_trajectory)
    grid, params = build_grid(cfg), build_params(cfg)
    V = build_potential(cfg, grid)
    ev = cfg["evolution"]
    dt = ev["dt"] if ev["dt"] is not None else 0.5 * grid.dx
    ec = EvolutionConfig(dt, ev["t_max"], ev["method"], ev["eps_f"])
    ic = cfg["initial"]
    reach = abs(ic["center"]) + 6 * ic["width"]
    ec.validate(grid, reach, params.v)
    s0 = build_initial(cfg, grid)
    times = list(np.linspace(0.0, ev["t_max"], int(ev["snapshots"]) + 1))
    if ec.method == "fourier-free":
        states = [evolve_free_fourier(s0, t, params) for t in times]
    elif ec.method == "kernel-free":
        data = InitialData.gaussian(ic["center"], ic["width"], ic["amp_psi"], ic["amp_pi"])
        states = [s0] + [evolve_free_kernel(data, t, params, grid, check_box=False)
                         for t in times[1:]]
    else:
        states = [s0] + rk4_trajectory(s0, times[1:], params, V, dt)
    dec = max(1, int(ev["decimate"]))
    rows = []
    for t, s in zip(times, states):
        for i in range(0, grid.n, dec):
            rows.append((t, grid.x[i], s.psi.values[i].real, s.psi.values[i].imag,
                         s.pi.values[i].real, s.pi.values[i].imag))
    out.csv("trajectory.csv", ["t", "x", "re_psi", "im_psi", "re_pi", "im_pi"], rows)
    E = [energy(s, params, V) for s in states]
    out.json("evolve.json", {"method": ec.method, "times": times, "energy": E,
                             "F0_norm": [energy_norm_F(s, 0) for s in states],
                             "energy_drift": max(abs(e / E[0] - 1) for e in E) if E[0] else 0.0})
    return 0


def _decay_times(cfg):
    from .decay import DEFAULT_TIMES
    t = cfg["decay"]["times"]
    return DEFAULT_TIMES if t is None else [float(x) for x in t]


def cmd_decay_fit(cfg, args, out: Writer):
    from .decay import full_group_fit, verify_full_decay, verify_remainder_decay
    grid, params = build_grid(cfg), build_params(cfg)
    dc = cfg["decay"]
    V = build_potential(cfg, grid)
    s0 = build_initial(cfg, grid)
    times, window = _decay_times(cfg), tuple(dc["window"])
    if V is None or V.is_zero():
        fit = verify_remainder_decay(s0, params, dc["sigma"], times, window)
        contrast = full_group_fit(s0, params, dc["sigma"], times, window)
        tab = fit.extra["table"]
        out.csv("decay.csv", ["t", "norm", "sigma", "label"], tab.rows())
        out.csv("decay_full_group.csv", ["t", "norm", "sigma", "label"],
                contrast.extra["table"].rows())
        out.json("fit.json", {"mode": "free remainder", "fit": fit.to_dict(),
                              "contrast": contrast.to_dict(),
                              "note": "decay sampled on one initial state"})
        ok = fit.passed and contrast.passed
    else:
        if V.beta <= 5:
            raise AdmissibilityError(f"potential beta={V.beta:g}: the decay theorem needs beta > 5")
        n_small = int(round(2 * dc["eig_L"] / grid.dx))
        n_small += n_small % 2
        eig_grid = Grid(n_small * grid.dx / 2, n_small) if n_small < grid.n else None
        dt = cfg["evolution"]["dt"] or 0.25 * grid.dx
        rep = verify_full_decay(V, params, s0, dc["sigma"], times, window, eig_grid, dt,
                                dc["reverse"])
        out.csv("decay.csv", ["t", "norm", "sigma", "label"], rep.tables["forward"].rows())
        if "reverse" in rep.tables:
            out.csv("decay_reverse.csv", ["t", "norm", "sigma", "label"],
                    rep.tables["reverse"].rows())
        out.json("fit.json", {"mode": "continuous spectrum", **rep.to_dict()})
        ok = rep.passed
    if not ok:
        raise CheckFailed("decay fit outside its band")
    return 0


def cmd_spectrum(cfg, args, out: Writer):
    from .spectral import analyze
    grid, params = build_grid(cfg), build_params(cfg)
    V = build_potential(cfg, grid) or _zero_potential(grid)
    eig_grid = None
    n_small = int(round(2 * cfg["decay"]["eig_L"] / grid.dx))
    n_small += n_small % 2
    if 16 <= n_small < grid.n:
        eig_grid = Grid(n_small * grid.dx / 2, n_small)
    sd = analyze(V, params, eig_grid=eig_grid)
    out.json("spectrum.json", sd.to_dict())
    return 0


def cmd_resolvent_probe(cfg, args, out: Writer):
    from .resolvent import (ResolventProbe, born_identity_residual, check_low_energy,
                            lap_limit, w_norm)
    rc = cfg["resolvent"]
    grid, params = Grid(float(rc["L"]), int(rc["n"])), build_params(cfg)
    V = build_potential(cfg, grid) or power_potential(grid, -0.5, 6)
    rows, lap_ok = [], True
    for c in rc["cut_points"]:
        for pot, tag in ((None, "free"), (V, "perturbed")):
            r = lap_limit(1j * c * params.edge, rc["eps"], params, grid, pot)
            lap_ok &= r.monotone
            rows += [(e, d, f"{tag} {c:g}|mu|") for e, d in zip(r.eps, r.distances)]
    out.csv("lap.csv", ["eps", "distance", "label"], rows)
    low, low_ok = [], True
    for sign in (1, -1):
        r = check_low_energy(sign, rc["nu"], params, grid)
        low_ok &= r.passed
        low += [(sign, nu, a, b) for nu, a, b in zip(r.nu, r.r, r.r_deriv)]
    out.csv("low_energy.csv", ["sign", "nu", "r", "r_deriv"], low)
    # the |lam|^-2 law needs dx <~ 0.03, hence a separate finer grid
    fine = Grid(float(rc["ladder_L"]), int(rc["ladder_n"]))
    Vf = build_potential(cfg, fine) or power_potential(fine, -0.5, 6)
    ladder = []
    for c in rc["ladder"]:
        lam = 1j * c * params.edge
        wn = w_norm(ResolventProbe(lam, params, fine, "+", Vf))
        ladder.append((abs(lam), wn, wn * abs(lam) ** 2))
    out.csv("high_energy.csv", ["lam_abs", "W_norm", "W_lam2"], ladder)
    born, _ = born_identity_residual(ResolventProbe(1 + 2j, params, grid, potential=V))
    hi_ok = max(r[2] for r in ladder) <= 2 * ladder[0][2]
    summary = {"lap_monotone": lap_ok, "low_energy_pass": low_ok, "born_residual": born,
               "high_energy_bounded": hi_ok}
    out.json("resolvent_probe.json", summary)
    if not (lap_ok and low_ok and hi_ok and born <= 1e-8):
        raise CheckFailed(f"resolvent checks: {summary}")
    return 0


def cmd_kernel_bounds(cfg, args, out: Writer):
    from .freekernel import check_kernel_bound, check_q_bounds
    kc = cfg["kernel"]
    m = float(cfg["model"]["m"])
    rows, reports, ok = [], [], True
    for v, eps in kc["pairs"]:
        params = ModelParams(m, float(v))
        for k in (0, 1):
            for kind, rep in (("remainder", check_kernel_bound(eps, k, kc["times"], kc["z_density"], params)),
                              ("Q", check_q_bounds(eps, kc["times"], k, kc["z_density"], params, "all"))):
                ok &= rep.passed
                reports.append({"kind": kind, "v": v, **rep.to_dict()})
                rows += [(kind, v, eps, k, z, t, r) for z, t, _, r in rep.rows]
    out.csv("kernel_bounds.csv", ["kind", "v", "eps", "k", "z", "t", "ratio"], rows)
    out.json("kernel_bounds.json", {"reports": reports, "pass": ok})
    if not ok:
        raise CheckFailed("kernel envelope grows")
    return 0


def cmd_suite(cfg, args, out: Writer):
    from .acceptance import run_all
    sc = cfg["suite"]
    results = run_all(sc["criteria"], seed=int(cfg["seed"]), fail_fast=sc["fail_fast"],
                      parallel=max(1, args.parallel))
    for r in results:
        print(r.line())
    failed = [r.cid for r in results if not r.passed]
    out.json("suite.json", {"criteria": [r.to_dict() for r in results], "failed": failed,
                            "pass": not failed})
    if failed:
        raise CheckFailed(f"failing criteria: {failed}")
    return 0


def cmd_plot(cfg, args, out: Writer):
    from .plotting import emit_plot
    if not args.csv:
        raise ConfigError("plot needs --csv PATH")
    dest = out.dir / (Path(args.csv).stem + f"_{args.kind}.svg")
    emit_plot(args.csv, args.kind, dest)
    out.files.append(str(dest))
    return 0


COMMANDS = {
    "evolve": cmd_evolve,
    "decay-fit": cmd_decay_fit,
    "spectrum": cmd_spectrum,
    "resolvent-probe": cmd_resolvent_probe,
    "kernel-bounds": cmd_kernel_bounds,
    "suite": cmd_suite,
    "plot": cmd_plot,
}

VALIDATION_ERRORS = (InvalidInputError, AdmissibilityError, PreconditionError, GeometryError)


def build_parser():
    ap = argparse.ArgumentParser(prog="kgdecay", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int, help="seed for randomized checks")
    ap.add_argument("--parallel", type=int, default=1, help="worker processes for the suite")
    ap.add_argument("--csv", help="input CSV for 'plot'")
    ap.add_argument("--kind", default="loglog", choices=["loglog", "field", "sweep"],
                    help="plot kind")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, out=args.out, seed=args.seed)
        out = Writer(cfg)
        code = COMMANDS[args.command](cfg, args, out)
        for f in out.files:
            log.info("wrote %s", f)
        return code
    except VALIDATION_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2
    except KGError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything else is a bug
        log.exception("internal error")
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
