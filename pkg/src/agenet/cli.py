"""Command-line front end: one JSON config per run, CSV out.

Exit codes: 0 on success, 1 for usage or config problems, 2 when a
running invariant of the scheme fails, 3 when the activity solver
finds no root or several.  All CSV floats are written with 12
significant digits and no wall-clock data, so identical configs give
byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from types import SimpleNamespace
from typing import Optional

import numpy as np

from .delay_kernel import DelayKernel
from .errors import (AmbiguousActivityError, BracketError, ConfigError,
                     DegenerateInputError, InvariantViolationError,
                     ModelInconsistencyError)
from .evolution import (SimulationConfig, decay_fit, run,
                        stepper_equilibrium)
from .firing_rate import (ConstantRate, SmoothSaturatingRate, StepRate,
                          estimate_xi)
from .grid import AgeGrid, preset_density
from .linear_analysis import (build_delay_system, build_generator,
                              delay_spectrum, spectrum)
from .steady_state import regime_scan, solve_steady_state

__all__ = ["RunConfig", "parse_config", "default_config", "main"]

_PRESETS = ("uniform01", "exp2", "spike")
_SPECTRUM_CELL_CAP = 4000

_MODEL_DEFAULTS = {
    "constant": {"k0": 1.0, "lambda": 0.0},
    "smooth": {"k0": 0.5, "k1": 2.0, "lambda": 0.0, "mu_scale": 1.0,
               "x_scale": 1.0},
    "step": {"sigma_plus": 0.5, "sigma_minus": 0.25, "lambda": 0.0,
             "decay": 1.0},
}
_KERNEL_KEYS = {
    "dirac": (),
    "exponential": ("theta", "delta"),
    "gamma": ("shape", "rate", "delta"),
    "sampled": ("y", "b", "delta"),
}
_RUN_DEFAULTS = {
    "t_end": 10.0, "record_every": 10, "f0": "uniform01",
    "fixed_point_tol": 1e-12, "fixed_point_max_iter": 200,
    "window": [5.0, 30.0], "tau": None, "allow_zero_kappa0": False,
}


def default_config():
    """The complete default config; `--print-defaults` emits it and it
    parses back unchanged."""
    return {
        "grid": {"dx": 1e-3, "x_max": 10.0},
        "model": {"kind": "constant", **_MODEL_DEFAULTS["constant"]},
        "kernel": {"kind": "dirac"},
        "run": dict(_RUN_DEFAULTS),
        "sweep": {"lambdas": []},
        "q": 1.0,
    }


@dataclasses.dataclass(frozen=True)
class RunConfig:
    grid: AgeGrid
    model: object
    kernel: DelayKernel
    t_end: float
    record_every: int
    f0: str
    fixed_point_tol: float
    fixed_point_max_iter: int
    window: tuple
    tau: Optional[float]
    allow_zero_kappa0: bool
    lambdas: tuple
    q: float

    def simulation_config(self, t_end=None):
        return SimulationConfig(
            grid=self.grid, model=self.model, kernel=self.kernel,
            t_end=self.t_end if t_end is None else t_end,
            record_every=self.record_every,
            fixed_point_tol=self.fixed_point_tol,
            fixed_point_max_iter=self.fixed_point_max_iter,
            q=self.q, tau=self.tau,
            allow_zero_kappa0=self.allow_zero_kappa0)


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number(block, section, key, errors, positive=False, nonnegative=False):
    v = block[key]
    name = f"{section}.{key}"
    if not _is_number(v):
        errors.append(f"{name}: expected a number, got {v!r}")
        return None
    v = float(v)
    if not math.isfinite(v):
        errors.append(f"{name}: must be finite")
        return None
    if positive and v <= 0.0:
        errors.append(f"{name}: must be positive, got {v:g}")
        return None
    if nonnegative and v < 0.0:
        errors.append(f"{name}: must be nonnegative, got {v:g}")
        return None
    return v


def _integer(block, section, key, errors, minimum=1):
    v = block[key]
    name = f"{section}.{key}"
    if not isinstance(v, int) or isinstance(v, bool):
        errors.append(f"{name}: expected an integer, got {v!r}")
        return None
    if v < minimum:
        errors.append(f"{name}: must be at least {minimum}, got {v}")
        return None
    return v


def _merge(section, block, defaults, errors):
    """User block over defaults, flagging unknown keys by full name."""
    merged = dict(defaults)
    for key, value in block.items():
        if key not in defaults:
            known = ", ".join(sorted(defaults))
            errors.append(f"{section}.{key}: unknown key (known: {known})")
            continue
        merged[key] = value
    return merged


def _validate_grid(block, errors):
    merged = _merge("grid", block, {"dx": 1e-3, "x_max": 10.0}, errors)
    dx = _number(merged, "grid", "dx", errors, positive=True)
    x_max = _number(merged, "grid", "x_max", errors, positive=True)
    if dx is None or x_max is None:
        return None
    n_cells = int(round(x_max / dx))
    if n_cells < 2:
        errors.append("grid.x_max: must cover at least two cells of "
                      f"width dx = {dx:g}")
        return None
    if n_cells > 2_000_000:
        errors.append(f"grid: x_max/dx = {n_cells} cells exceeds the "
                      "2e6 cap; coarsen dx or shorten x_max")
        return None
    if abs(n_cells * dx - x_max) > 1e-9 * x_max:
        errors.append("grid.x_max: must be an integer multiple of grid.dx")
        return None
    return AgeGrid(dx=dx, n_cells=n_cells)


def _validate_model(block, errors):
    kind = block.get("kind", "constant")
    if kind not in _MODEL_DEFAULTS:
        known = ", ".join(sorted(_MODEL_DEFAULTS))
        errors.append(f"model.kind: unknown kind {kind!r} (known: {known})")
        return None
    merged = _merge("model", {k: v for k, v in block.items() if k != "kind"},
                    _MODEL_DEFAULTS[kind], errors)
    before = len(errors)
    lam = _number(merged, "model", "lambda", errors, nonnegative=True)
    if kind == "constant":
        k0 = _number(merged, "model", "k0", errors, positive=True)
        if len(errors) > before:
            return None
        return ConstantRate(k0=k0, lam=lam)
    if kind == "smooth":
        k0 = _number(merged, "model", "k0", errors, positive=True)
        k1 = _number(merged, "model", "k1", errors, positive=True)
        mu_scale = _number(merged, "model", "mu_scale", errors,
                           positive=True)
        x_scale = _number(merged, "model", "x_scale", errors, positive=True)
        if k0 is not None and k1 is not None and k1 < k0:
            errors.append(f"model.k1: saturated rate {k1:g} must be at "
                          f"least the rest rate model.k0 = {k0:g}")
        if len(errors) > before:
            return None
        return SmoothSaturatingRate(k0=k0, k1=k1, lam=lam,
                                    mu_scale=mu_scale, x_scale=x_scale)
    sigma_plus = _number(merged, "model", "sigma_plus", errors,
                         positive=True)
    sigma_minus = _number(merged, "model", "sigma_minus", errors,
                          positive=True)
    decay = _number(merged, "model", "decay", errors, positive=True)
    if sigma_plus is not None and sigma_minus is not None:
        if not sigma_minus < sigma_plus:
            errors.append(
                f"model.sigma_minus: rest threshold {sigma_minus:g} must "
                f"be strictly below the excited threshold "
                f"model.sigma_plus = {sigma_plus:g}")
        elif sigma_plus >= 1.0:
            errors.append(f"model.sigma_plus: must be below 1, got "
                          f"{sigma_plus:g}")
    if len(errors) > before:
        return None
    return StepRate(sigma_plus=sigma_plus, sigma_minus=sigma_minus,
                    lam=lam, decay=decay)


def _validate_kernel(block, errors):
    kind = block.get("kind", "dirac")
    if kind not in _KERNEL_KEYS:
        known = ", ".join(sorted(_KERNEL_KEYS))
        errors.append(f"kernel.kind: unknown kind {kind!r} (known: {known})")
        return None
    for key in block:
        if key != "kind" and key not in _KERNEL_KEYS[kind]:
            errors.append(f"kernel.{key}: unknown key for kind {kind!r}")
    before = len(errors)
    if kind == "dirac":
        return DelayKernel.dirac() if len(errors) == before else None

    def opt_delta(upper, upper_name):
        delta = block.get("delta")
        if delta is None:
            return None
        if not _is_number(delta) or not 0.0 < float(delta) < upper:
            errors.append(f"kernel.delta: must lie in (0, {upper_name})")
            return None
        return float(delta)

    if kind == "exponential":
        theta = block.get("theta", 2.0)
        if not _is_number(theta) or theta <= 0.0:
            errors.append("kernel.theta: must be a positive number")
            return None
        delta = opt_delta(float(theta), "kernel.theta")
        if len(errors) > before:
            return None
        return DelayKernel.exponential(theta=float(theta), delta=delta)
    if kind == "gamma":
        shape = block.get("shape", 2.0)
        rate = block.get("rate", 2.0)
        if not _is_number(shape) or shape < 1.0:
            errors.append("kernel.shape: must be a number >= 1")
        if not _is_number(rate) or rate <= 0.0:
            errors.append("kernel.rate: must be a positive number")
        if len(errors) > before:
            return None
        delta = opt_delta(float(rate), "kernel.rate")
        if len(errors) > before:
            return None
        return DelayKernel.gamma(shape=float(shape), rate=float(rate),
                                 delta=delta)
    y = block.get("y")
    b = block.get("b")
    for key, arr in (("y", y), ("b", b)):
        if (not isinstance(arr, list) or len(arr) < 2
                or not all(_is_number(v) for v in arr)):
            errors.append(f"kernel.{key}: expected a list of at least two "
                          "numbers")
    if len(errors) > before:
        return None
    delta = block.get("delta", 1.0)
    if not _is_number(delta) or delta <= 0.0:
        errors.append("kernel.delta: must be a positive number")
        return None
    try:
        return DelayKernel.sampled(np.asarray(y, dtype=float),
                                   np.asarray(b, dtype=float),
                                   delta=float(delta))
    except ValueError as exc:
        errors.append(f"kernel: {exc}")
        return None


def _validate_run(block, errors):
    merged = _merge("run", block, _RUN_DEFAULTS, errors)
    out = {}
    out["t_end"] = _number(merged, "run", "t_end", errors, positive=True)
    out["record_every"] = _integer(merged, "run", "record_every", errors)
    out["fixed_point_tol"] = _number(merged, "run", "fixed_point_tol",
                                     errors, positive=True)
    out["fixed_point_max_iter"] = _integer(merged, "run",
                                           "fixed_point_max_iter", errors)
    f0 = merged["f0"]
    if f0 not in _PRESETS:
        errors.append(f"run.f0: unknown preset {f0!r} (known: "
                      + ", ".join(_PRESETS) + ")")
        f0 = None
    out["f0"] = f0
    window = merged["window"]
    if (not isinstance(window, (list, tuple)) or len(window) != 2
            or not all(_is_number(v) for v in window)
            or not 0.0 <= float(window[0]) < float(window[1])):
        errors.append("run.window: expected [t0, t1] with 0 <= t0 < t1")
        out["window"] = None
    else:
        out["window"] = (float(window[0]), float(window[1]))
    tau = merged["tau"]
    if tau is not None and (not _is_number(tau) or float(tau) < 0.0):
        errors.append("run.tau: must be null or a nonnegative number")
        tau = None
    out["tau"] = None if tau is None else float(tau)
    flag = merged["allow_zero_kappa0"]
    if not isinstance(flag, bool):
        errors.append("run.allow_zero_kappa0: must be true or false")
        flag = False
    out["allow_zero_kappa0"] = flag
    return out


def _validate_sweep(block, errors):
    merged = _merge("sweep", block, {"lambdas": []}, errors)
    lambdas = merged["lambdas"]
    if not isinstance(lambdas, list):
        errors.append("sweep.lambdas: expected a list of couplings")
        return ()
    bad = [v for v in lambdas
           if not _is_number(v) or not math.isfinite(v) or v < 0.0]
    if bad:
        errors.append("sweep.lambdas: entries must be finite and "
                      f"nonnegative, got {bad[:3]!r}")
        return ()
    return tuple(float(v) for v in lambdas)


def parse_config(path):
    """Read and validate a JSON run config.

    Raises ConfigError carrying every problem found, each named by its
    section.key, so one pass over the message fixes the file.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])

    errors = []
    sections = {"grid", "model", "kernel", "run", "sweep", "q"}
    for key in raw:
        if key not in sections:
            errors.append(f"{key}: unknown section (known: "
                          + ", ".join(sorted(sections)) + ")")
    for name in ("grid", "model", "kernel", "run", "sweep"):
        if name in raw and not isinstance(raw[name], dict):
            errors.append(f"{name}: expected an object")
            raw = {k: v for k, v in raw.items() if k != name}

    grid = _validate_grid(raw.get("grid", {}), errors)
    model = _validate_model(raw.get("model", {}), errors)
    kernel = _validate_kernel(raw.get("kernel", {}), errors)
    run_block = _validate_run(raw.get("run", {}), errors)
    lambdas = _validate_sweep(raw.get("sweep", {}), errors)
    q = raw.get("q", 1.0)
    if not _is_number(q) or float(q) < 0.0:
        errors.append("q: moment exponent must be a nonnegative number")
        q = 1.0

    if errors:
        raise ConfigError(errors)
    return RunConfig(grid=grid, model=model, kernel=kernel,
                     t_end=run_block["t_end"],
                     record_every=run_block["record_every"],
                     f0=run_block["f0"],
                     fixed_point_tol=run_block["fixed_point_tol"],
                     fixed_point_max_iter=run_block["fixed_point_max_iter"],
                     window=run_block["window"], tau=run_block["tau"],
                     allow_zero_kappa0=run_block["allow_zero_kappa0"],
                     lambdas=lambdas, q=float(q))


# ---------------------------------------------------------------------------
# CSV helpers

def _fmt(x):
    if x is None:
        return ""
    return "%.12g" % x


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_simulate(args):
    cfg = parse_config(args.config)
    f0 = preset_density(cfg.grid, cfg.f0)
    try:
        steady = stepper_equilibrium(cfg.model, cfg.grid)
    except (BracketError, ValueError) as exc:
        print(f"note: no equilibrium reference ({exc}); the l1_dist "
              "column will be empty", file=sys.stderr)
        steady = None
    trace = run(cfg.simulation_config(), f0, steady=steady)
    dist = trace.l1_dist_to_F
    rows = []
    for i in range(trace.times.size):
        rows.append([
            _fmt(trace.times[i]), _fmt(trace.m_series[i]),
            _fmt(trace.p_series[i]), _fmt(trace.mass_series[i]),
            _fmt(dist[i]) if dist is not None else "",
            _fmt(trace.linf_series[i]), _fmt(trace.l1q_series[i])])
    _write_csv(args.out, ["t", "m", "p", "mass", "l1_dist", "linf", "l1q"],
               rows)
    drift = float(np.max(np.abs(trace.mass_series - 1.0)))
    print(f"wrote {args.out}: {trace.times.size} samples to t = "
          f"{_fmt(trace.times[-1])}, final m = {_fmt(trace.m_series[-1])}, "
          f"max |mass - 1| = {_fmt(drift)}")
    return 0


def _cmd_steady_state(args):
    cfg = parse_config(args.config)
    ss = solve_steady_state(cfg.model, cfg.grid)
    print(f"M = {_fmt(ss.M)}")
    print(f"profile residual = {_fmt(ss.residual_ode)}")
    print(f"activity residual = {_fmt(ss.residual_activity)}")
    if args.out:
        rows = [[_fmt(x), _fmt(v)]
                for x, v in zip(cfg.grid.midpoints, ss.F)]
        _write_csv(args.out, ["x", "F"], rows)
        print(f"wrote {args.out}: {len(rows)} cells")
    return 0


def _cmd_spectrum(args):
    cfg = parse_config(args.config)
    grid = cfg.grid
    ss = solve_steady_state(cfg.model, grid)
    if cfg.kernel.is_dirac:
        n_total = grid.n_cells
        if n_total > _SPECTRUM_CELL_CAP:
            raise ConfigError([
                f"grid: {n_total} cells exceeds the dense-eigensolve cap "
                f"({_SPECTRUM_CELL_CAP}); raise grid.dx for spectra"])
        rep = spectrum(build_generator(cfg.model, grid, ss))
        kernel_x = grid.midpoints
        kernel_v = rep.kernel_vector
    else:
        horizon = cfg.kernel.memory_horizon()
        n_lag = int(math.ceil(horizon / grid.dx))
        y_grid = AgeGrid(dx=grid.dx, n_cells=n_lag)
        n_total = grid.n_cells + n_lag
        if n_total > _SPECTRUM_CELL_CAP:
            raise ConfigError([
                f"grid: {grid.n_cells} age cells plus {n_lag} lag cells "
                f"exceed the dense-eigensolve cap ({_SPECTRUM_CELL_CAP}); "
                "raise grid.dx for spectra"])
        system = build_delay_system(cfg.model, grid, ss, cfg.kernel, y_grid)
        rep = delay_spectrum(system)
        kernel_x = grid.midpoints
        kernel_v = rep.kernel_vector[:grid.n_cells]
        print(f"lag transport eigenvalue = {_fmt(rep.lag_eigenvalue)}")
        print(f"age-block gap = {_fmt(rep.age_gap)}")
    print(f"eigenvalue nearest 0: {_fmt(rep.zero_eigenvalue.real)} + "
          f"{_fmt(rep.zero_eigenvalue.imag)}i")
    print(f"spectral gap = {_fmt(rep.gap)}")
    print(f"kernel/profile L1 mismatch = {_fmt(rep.kernel_match)}")
    if args.eigs_out:
        rows = [[_fmt(z.real), _fmt(z.imag)] for z in rep.eigenvalues]
        _write_csv(args.eigs_out, ["re", "im"], rows)
        print(f"wrote {args.eigs_out}: {len(rows)} eigenvalues")
    if args.kernel_out:
        rows = [[_fmt(x), _fmt(v)] for x, v in zip(kernel_x, kernel_v)]
        _write_csv(args.kernel_out, ["x", "v"], rows)
        print(f"wrote {args.kernel_out}: {len(rows)} cells")
    return 0


def _sweep_row(cfg, scan_row):
    """One sweep row; every numeric failure is folded into the status."""
    lam = scan_row.lam
    row = {"lambda": lam, "M": None, "xi": None, "gap": None,
           "alpha": None, "r2": None, "unique": None, "status": "ok"}
    try:
        if not scan_row.roots:
            row["status"] = "no-steady-state"
            return row
        row["unique"] = scan_row.unique
        model = dataclasses.replace(cfg.model, lam=lam)
        row["M"] = scan_row.roots[0]
        row["xi"] = estimate_xi(model).xi

        x_max = cfg.grid.x_max
        n_spec = min(cfg.grid.n_cells, 2000)
        spec_grid = AgeGrid(dx=x_max / n_spec, n_cells=n_spec)
        ss = solve_steady_state(model, spec_grid)
        rep = spectrum(build_generator(model, spec_grid, ss))
        row["gap"] = rep.gap

        equilibrium = stepper_equilibrium(model, cfg.grid)
        sim = SimulationConfig(
            grid=cfg.grid, model=model, kernel=cfg.kernel,
            t_end=cfg.t_end, record_every=cfg.record_every,
            fixed_point_tol=cfg.fixed_point_tol,
            fixed_point_max_iter=cfg.fixed_point_max_iter,
            q=cfg.q, tau=cfg.tau,
            allow_zero_kappa0=cfg.allow_zero_kappa0)
        trace = run(sim, preset_density(cfg.grid, cfg.f0),
                    steady=equilibrium)
        w0, w1 = cfg.window
        w1 = min(w1, cfg.t_end)
        fit = decay_fit(trace, (w0, w1))
        row["alpha"] = fit.alpha
        row["r2"] = fit.r2
    except AmbiguousActivityError:
        row.update(M=None, xi=None, gap=None, alpha=None, r2=None,
                   unique=None, status="ambiguous")
    except (ModelInconsistencyError, BracketError):
        row["status"] = "no-root"
    except InvariantViolationError:
        row["status"] = "invariant-violation"
    except (DegenerateInputError, ValueError):
        row["status"] = "error"
    return row


def _cmd_sweep(args):
    cfg = parse_config(args.config)
    if not cfg.lambdas:
        raise ConfigError(["sweep.lambdas: must be nonempty for a sweep"])
    scan = regime_scan(cfg.model, list(cfg.lambdas), cfg.grid)
    workers = min(8, len(scan))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda sr: _sweep_row(cfg, sr), scan))
    csv_rows = []
    for row in rows:
        unique = row["unique"]
        csv_rows.append([
            _fmt(row["lambda"]), _fmt(row["M"]), _fmt(row["xi"]),
            _fmt(row["gap"]), _fmt(row["alpha"]), _fmt(row["r2"]),
            "" if unique is None else str(int(unique)), row["status"]])
    _write_csv(args.out, ["lambda", "M", "xi", "gap", "alpha", "r2",
                          "unique", "status"], csv_rows)
    n_ok = sum(1 for row in rows if row["status"] == "ok")
    print(f"wrote {args.out}: {len(rows)} rows, {n_ok} ok")
    return 0


def _cmd_decay_fit(args):
    data = np.genfromtxt(args.trace, delimiter=",", names=True)
    if data.dtype.names is None or "t" not in data.dtype.names:
        raise ConfigError([f"{args.trace}: not a trace CSV (no t column)"])
    if "l1_dist" not in data.dtype.names:
        raise ConfigError([f"{args.trace}: no l1_dist column"])
    times = np.atleast_1d(data["t"])
    dist = np.atleast_1d(data["l1_dist"])
    if np.any(~np.isfinite(dist)):
        raise ConfigError([f"{args.trace}: l1_dist column has empty or "
                           "non-finite entries; rerun simulate with a "
                           "solvable equilibrium"])
    window = tuple(args.window) if args.window else \
        (float(times[0]), float(times[-1]))
    fake = SimpleNamespace(times=times, l1_dist_to_F=dist)
    fit = decay_fit(fake, window)
    print(f"alpha = {_fmt(fit.alpha)}")
    print(f"C = {_fmt(fit.C)}")
    print(f"r2 = {_fmt(fit.r2)}")
    print(f"window = [{_fmt(fit.window[0])}, {_fmt(fit.window[1])}], "
          f"{fit.n_points} points")
    if args.out:
        _write_csv(args.out, ["alpha", "C", "r2", "t0", "t1", "n_points"],
                   [[_fmt(fit.alpha), _fmt(fit.C), _fmt(fit.r2),
                     _fmt(fit.window[0]), _fmt(fit.window[1]),
                     str(fit.n_points)]])
        print(f"wrote {args.out}")
    return 0


def _cmd_accept(args):
    from .acceptance import run_suite
    results = run_suite(report=print)
    if args.out:
        rows = [[str(r.number), r.name, "pass" if r.passed else "fail",
                 r.detail.replace(",", ";")] for r in results]
        _write_csv(args.out, ["criterion", "name", "result", "detail"],
                   rows)
        print(f"wrote {args.out}")
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# driver

class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1; 2 and 3 are
    reserved for invariant violations and activity ambiguity."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(
        prog="agenet",
        description="Age-structured neuron network simulator: transport "
                    "with activity-dependent discharge, steady states, "
                    "spectra, and relaxation rates.")
    parser.add_argument("--print-defaults", action="store_true",
                        help="print the default JSON config and exit")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("simulate", parents=[], help="integrate a run "
                       "config and write the trace CSV")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--out", required=True, help="trace CSV path")

    p = sub.add_parser("steady-state",
                       help="solve the stationary profile and activity")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--out", help="profile CSV path (x, F)")

    p = sub.add_parser("spectrum", help="dense spectrum of the "
                       "linearization at the steady state")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--eigs-out", help="eigenvalue CSV path (re, im)")
    p.add_argument("--kernel-out", help="zero-mode CSV path (x, v)")

    p = sub.add_parser("sweep", help="per-coupling summary over "
                       "sweep.lambdas")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--out", required=True, help="summary CSV path")

    p = sub.add_parser("decay-fit", help="fit an exponential to the "
                       "l1_dist column of a trace CSV")
    p.add_argument("--trace", required=True, help="trace CSV from simulate")
    p.add_argument("--window", nargs=2, type=float, metavar=("T0", "T1"),
                   help="fit window (default: the whole trace)")
    p.add_argument("--out", help="one-row fit CSV path")

    p = sub.add_parser("accept", help="run the acceptance suite")
    p.add_argument("--out", help="per-criterion report CSV path")
    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "steady-state": _cmd_steady_state,
    "spectrum": _cmd_spectrum,
    "sweep": _cmd_sweep,
    "decay-fit": _cmd_decay_fit,
    "accept": _cmd_accept,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        print(json.dumps(default_config(), indent=2))
        return 0
    if args.command is None:
        parser.error("a subcommand is required (or --print-defaults)")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        for problem in exc.errors:
            print(f"config error: {problem}", file=sys.stderr)
        return 1
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (AmbiguousActivityError, ModelInconsistencyError) as exc:
        print(f"activity solver: {exc}", file=sys.stderr)
        return 3
    except (ValueError, BracketError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
