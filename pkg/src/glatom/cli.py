"""Command-line front end: config loading, run orchestration, CSV output.

Modes
-----
simulate    run a trajectory ensemble, write the observable series CSV
density     ensemble-averaged position densities at chosen sample times
cl-compare  analytic recoil-free variance curve for overlay comparisons
params      physical-to-dimensionless derivation report with diagnostics

Outputs are '#'-commented CSVs carrying the fully resolved config, with
floats at 17 significant digits so byte-identical reruns are possible
(the timestamp line is suppressed by --no-timestamp).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .caldeira_leggett import CLParams, cl_variance
from .engine import EnsembleConfig, EnsembleResult, run_ensemble, snapshot_density
from .errors import GlatomError, ValidationError
from .fock2d import DimensionlessParams
from .params import PhysicalParams, derive, direct

SERIES_COLUMNS = (
    "tau",
    "mean_x",
    "mean_y",
    "mean_px",
    "mean_py",
    "var_x",
    "var_y",
    "mean_L",
    "var_L",
    "jumps_in_bin",
    "truncation_metric",
)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config root must be a JSON object")
    return cfg


def resolve_params(cfg: dict, diagnostics: list[str]) -> DimensionlessParams:
    """Dimensionless block wins when both blocks are present."""
    dimless = cfg.get("params")
    physical = cfg.get("physical")
    if dimless is None and physical is None:
        raise ValidationError("config needs a 'params' or 'physical' block")
    if dimless is not None:
        p = direct(
            beta=float(dimless["beta"]),
            eta=float(dimless["eta"]),
            mu=float(dimless["mu"]),
        )
        if physical is not None:
            diagnostics.append(
                "both 'params' and 'physical' blocks present: the dimensionless "
                "block is used; derivation diagnostics follow"
            )
            scales = derive(_physical_from(physical), overrides=p)
            diagnostics.extend(scales.diagnostics)
        return p
    scales = derive(_physical_from(physical))
    diagnostics.extend(scales.diagnostics)
    return direct(float(physical["beta"]), scales.eta, scales.mu)


def _physical_from(block: dict) -> PhysicalParams:
    try:
        return PhysicalParams(
            mass=float(block["mass_kg"]),
            wavelength=float(block["wavelength_m"]),
            linewidth=float(block["linewidth_rad_per_s"]),
            detuning=float(block["detuning_rad_per_s"]),
            rabi=float(block["rabi_rad_per_s"]),
            waist=float(block["waist_m"]),
            beta=float(block["beta"]),
        )
    except KeyError as exc:
        raise ValidationError(f"physical block is missing {exc}") from exc


def resolve_engine(cfg: dict, params: DimensionlessParams, seed_override) -> EnsembleConfig:
    eng = cfg.get("engine")
    if eng is None:
        raise ValidationError("config needs an 'engine' block")
    initial = eng.get("initial", [0.0, 0.0, 0.0, 0.0])
    if len(initial) != 4:
        raise ValidationError("engine.initial must be [x0, y0, px0, py0]")
    seed = int(eng.get("seed", 0)) if seed_override is None else int(seed_override)
    return EnsembleConfig(
        params=params,
        cutoff=int(eng.get("cutoff", 40)),
        n_traj=int(eng["n_traj"]),
        tau_max=float(eng["tau_max"]),
        sample_dt=float(eng.get("sample_dt", 0.25)),
        initial=tuple(float(v) for v in initial),
        seed=seed,
        survival_convention=eng.get("survival_convention", "standard"),
        jump_bin_width=float(eng.get("jump_bin_width", 5.0)),
    )


def _header_lines(mode: str, resolved: dict, timestamp: bool, extra=()) -> list[str]:
    lines = [
        f"# glatom {__version__} mode={mode}",
        "# config " + json.dumps(resolved, sort_keys=True, separators=(",", ":")),
    ]
    lines.extend(f"# {e}" for e in extra)
    if timestamp:
        lines.append(f"# written {time.strftime('%Y-%m-%dT%H:%M:%S%z')}")
    return lines


def write_series_csv(path: Path, result: EnsembleResult, header: list[str]) -> None:
    with open(path, "w") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        for i, rec in enumerate(result.series):
            row = (
                rec.tau,
                rec.mean_x,
                rec.mean_y,
                rec.mean_px,
                rec.mean_py,
                rec.var_x,
                rec.var_y,
                rec.mean_L,
                rec.var_L,
                result.jumps_per_sample[i],
                result.truncation_series[i],
            )
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _threads(args) -> int:
    env = os.environ.get("GLATOM_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValidationError(f"GLATOM_THREADS={env!r} is not an integer") from exc
    return max(1, args.threads)


def cmd_simulate(cfg: dict, args, out: Path) -> int:
    diags: list[str] = []
    params = resolve_params(cfg, diags)
    econf = resolve_engine(cfg, params, args.seed)
    result = run_ensemble(econf, threads=_threads(args))
    resolved = {
        "mode": "simulate",
        "params": {"beta": params.beta, "eta": params.eta, "mu": params.mu},
        "engine": {
            "cutoff": econf.cutoff,
            "n_traj": econf.n_traj,
            "tau_max": econf.tau_max,
            "sample_dt": econf.sample_dt,
            "initial": list(econf.initial),
            "seed": econf.seed,
            "survival_convention": econf.survival_convention,
            "jump_bin_width": econf.jump_bin_width,
        },
    }
    extra = [f"diagnostic {d}" for d in diags]
    extra.append(
        f"n_traj_effective={result.n_traj_effective} "
        f"degenerate={result.n_traj_degenerate} "
        f"total_jumps={int(result.jump_histogram.sum())}"
    )
    write_series_csv(out / "series.csv", result, _header_lines(
        "simulate", resolved, not args.no_timestamp, extra))
    for d in diags:
        print(f"diagnostic: {d}", file=sys.stderr)
    print(f"wrote {out / 'series.csv'}")
    return 0


def cmd_density(cfg: dict, args, out: Path) -> int:
    diags: list[str] = []
    params = resolve_params(cfg, diags)
    econf = resolve_engine(cfg, params, args.seed)
    dblock = cfg.get("density")
    if dblock is None:
        raise ValidationError("density mode needs a 'density' block")
    taus = [float(t) for t in dblock["taus"]]
    lo = float(dblock.get("grid_min", -6.0))
    hi = float(dblock.get("grid_max", 6.0))
    npts = int(dblock.get("grid_points", 121))
    if not (hi > lo and npts >= 2):
        raise ValidationError("density grid must satisfy grid_max > grid_min, points >= 2")
    grid = np.linspace(lo, hi, npts)
    grids = snapshot_density(econf, taus, grid, grid, threads=_threads(args))
    resolved = {
        "mode": "density",
        "params": {"beta": params.beta, "eta": params.eta, "mu": params.mu},
        "engine": {"cutoff": econf.cutoff, "n_traj": econf.n_traj,
                   "tau_max": econf.tau_max, "sample_dt": econf.sample_dt,
                   "initial": list(econf.initial), "seed": econf.seed,
                   "survival_convention": econf.survival_convention},
        "density": {"taus": taus, "grid_min": lo, "grid_max": hi, "grid_points": npts},
    }
    cell = (grid[1] - grid[0]) ** 2
    for tau, dens in zip(taus, grids):
        stem = f"density_tau{_fmt(tau)}"
        path = out / f"{stem}.csv"
        with open(path, "w") as fh:
            for line in _header_lines("density", resolved, not args.no_timestamp,
                                      [f"tau={_fmt(tau)} rows=x columns=y"]):
                fh.write(line + "\n")
            for row in dens:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        meta = {
            "tau": tau,
            "x_min": lo, "x_max": hi, "y_min": lo, "y_max": hi,
            "points": npts,
            "cell_probability_sum": float(dens.sum() * cell),
        }
        with open(out / f"{stem}.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}")
    return 0


def cmd_cl_compare(cfg: dict, args, out: Path) -> int:
    block = cfg.get("cl")
    if block is None:
        raise ValidationError("cl-compare mode needs a 'cl' block")
    p = CLParams(
        sigma_bar=float(block["sigma_bar"]),
        eta_bar=float(block["eta_bar"]),
        beta=float(block["beta"]),
    )
    tau_max = float(block.get("tau_max", 80.0))
    dt = float(block.get("dt", 0.1))
    if not (tau_max > 0 and dt > 0):
        raise ValidationError("cl block needs tau_max > 0 and dt > 0")
    taus = np.arange(0.0, tau_max + 0.5 * dt, dt)
    var = cl_variance(taus, p)
    resolved = {"mode": "cl-compare", "cl": {"sigma_bar": p.sigma_bar,
                "eta_bar": p.eta_bar, "beta": p.beta, "tau_max": tau_max, "dt": dt}}
    path = out / "cl_variance.csv"
    with open(path, "w") as fh:
        for line in _header_lines("cl-compare", resolved, not args.no_timestamp):
            fh.write(line + "\n")
        fh.write("tau,cl_var_x,cl_dx\n")
        for t, v in zip(taus, var):
            fh.write(f"{_fmt(t)},{_fmt(v)},{_fmt(np.sqrt(v))}\n")
    print(f"wrote {path}")
    return 0


def cmd_params(cfg: dict, args, out: Path) -> int:
    physical = cfg.get("physical")
    if physical is None:
        raise ValidationError("params mode needs a 'physical' block")
    overrides = None
    if cfg.get("params") is not None:
        d = cfg["params"]
        overrides = direct(float(d["beta"]), float(d["eta"]), float(d["mu"]))
    scales = derive(_physical_from(physical), overrides=overrides)
    report = scales.report()
    print(report)
    path = out / "derived_scales.txt"
    with open(path, "w") as fh:
        fh.write(report + "\n")
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "density": cmd_density,
    "cl-compare": cmd_cl_compare,
    "params": cmd_params,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="glatom",
        description="Quantum-trajectory simulator for atom motion in a "
        "Gaussian-Laguerre beam",
    )
    ap.add_argument("mode", choices=sorted(_COMMANDS))
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--seed", type=int, default=None, help="override engine seed")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker processes (env GLATOM_THREADS overrides)")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--no-timestamp", action="store_true",
                    help="omit the timestamp comment for byte-stable output")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.mode](cfg, args, out)
    except (ValidationError, KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GlatomError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
