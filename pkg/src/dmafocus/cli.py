"""Command-line experiments: solve a scenario, map the field, sweep a knob.

Every output embeds the resolved configuration and seed, so reruns with the
same arguments reproduce identical artifacts.  Numeric solver options can be
overridden through DMAFOCUS_* environment variables (command-line flags win).

Exit codes: 0 success, 1 bad configuration, 2 unservable scenario,
3 solver hit its iteration cap (outputs still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .field import GridSpec, evaluate_grid, write_grid_csv, write_sidecar
from .manifold import RcgOptions
from .propagation import channel_matrix
from .scenario import (
    SPEED_OF_LIGHT,
    Scenario,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .solver import SolverOptions, SolverResult, UnservableScenarioError, solve

PRESETS = ("fig2a", "fig2b", "table1_equal", "table1_skewed")

ENV_PREFIX = "DMAFOCUS_"

# env var suffix -> (options path, type)
_ENV_OPTIONS = {
    "SEED": ("seed", int),
    "RESTARTS": ("restarts", int),
    "OUTER_ITERATIONS": ("outer_iterations", int),
    "OBJECTIVE_TOLERANCE": ("objective_tolerance", float),
    "EIG_TOL": ("eig_tol", float),
    "EIG_MAX_ITER": ("eig_max_iter", int),
    "RCG_MAX_ITERATIONS": ("rcg.max_iterations", int),
    "RCG_GRADIENT_TOLERANCE": ("rcg.gradient_tolerance", float),
    "RCG_INITIAL_STEP": ("rcg.initial_step", float),
    "RCG_CONTRACTION": ("rcg.contraction", float),
    "RCG_SUFFICIENT_DECREASE": ("rcg.sufficient_decrease", float),
    "RCG_MAX_BACKTRACKS": ("rcg.max_backtracks", int),
}


def resolve_scenario(source: str) -> Scenario:
    """Load a scenario from a file path or a named preset."""
    path = Path(source)
    if path.exists():
        return load_scenario(path)
    name = source[:-5] if source.endswith(".json") else source
    if name in PRESETS:
        text = resources.files("dmafocus.presets").joinpath(f"{name}.json").read_text()
        return scenario_from_dict(json.loads(text))
    raise ValueError(
        f"scenario '{source}' is neither an existing file nor one of the presets {PRESETS}"
    )


def _options_from_env() -> dict:
    found = {}
    for suffix, (dest, caster) in _ENV_OPTIONS.items():
        raw = os.environ.get(ENV_PREFIX + suffix)
        if raw is not None:
            try:
                found[dest] = caster(raw)
            except ValueError as exc:
                raise ValueError(f"bad value for {ENV_PREFIX}{suffix}: {exc}") from exc
    return found


def build_solver_options(args) -> SolverOptions:
    values = _options_from_env()
    if args.seed is not None:
        values["seed"] = args.seed
    if args.restarts is not None:
        values["restarts"] = args.restarts

    rcg_kwargs = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("rcg.")}
    solver_kwargs = {k: v for k, v in values.items() if "." not in k}
    opts = SolverOptions(rcg=RcgOptions(**rcg_kwargs), **solver_kwargs)
    if getattr(args, "trace", False):
        opts = replace(opts, keep_rcg_traces=True)
    return opts


def config_echo(scenario: Scenario, opts: SolverOptions) -> dict:
    return {
        "version": __version__,
        "speed_of_light_m_s": SPEED_OF_LIGHT,
        "scenario": scenario_to_dict(scenario),
        "solver": {
            "seed": opts.seed,
            "restarts": opts.restarts,
            "outer_iterations": opts.outer_iterations,
            "objective_tolerance": opts.objective_tolerance,
            "eig_tol": opts.eig_tol,
            "eig_max_iter": opts.eig_max_iter,
            "rcg": {
                "max_iterations": opts.rcg.max_iterations,
                "gradient_tolerance": opts.rcg.gradient_tolerance,
                "initial_step": opts.rcg.initial_step,
                "contraction": opts.rcg.contraction,
                "sufficient_decrease": opts.rcg.sufficient_decrease,
                "max_backtracks": opts.rcg.max_backtracks,
                "restart_period": opts.rcg.restart_period,
            },
        },
        "array": {
            "n_microstrips": scenario.geometry.n_microstrips,
            "n_elements_per_strip": scenario.geometry.n_elements,
            "wavelength_m": scenario.geometry.wavelength_m,
        },
    }


def write_solve_outputs(result: SolverResult, scenario, opts, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    report = result.report
    payload = {
        "energies_w": report.energies_w.tolist(),
        "final_objective_w": report.final_objective_w,
        "objective_trace": report.objective_trace.tolist(),
        "restart_traces": [t.tolist() for t in report.restart_traces],
        "converged": report.converged,
        "restart_index": report.restart_index,
        "wall_time_s": report.wall_time_s,
        "phases": result.state.to_dict(),
        "precoder": [[float(v.real), float(v.imag)] for v in result.precoder.w],
        "config_echo": config_echo(scenario, opts),
    }
    with open(out_dir / "report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    result.state.save(out_dir / "dma.json")
    with open(out_dir / "precoder.json", "w") as fh:
        json.dump(payload["precoder"], fh)
    if report.rcg_records and "trace" in report.rcg_records[0]:
        with open(out_dir / "rcg_trace.csv", "w") as fh:
            fh.write("restart,outer,iteration,objective,gradient_norm\n")
            for rec in report.rcg_records:
                for k, (fv, gv) in enumerate(zip(rec["trace"], rec["gradient_trace"])):
                    fh.write(f"{rec['restart']},{rec['outer']},{k},{float(fv)!r},{float(gv)!r}\n")


def _dump_channels(scenario: Scenario, out_dir: Path) -> None:
    rows = channel_matrix(scenario.geometry, scenario.receiver_positions)
    for m, row in enumerate(rows):
        with open(out_dir / f"channel_rx{m}.csv", "w") as fh:
            fh.write("index,real,imag\n")
            for idx, v in enumerate(row):
                fh.write(f"{idx},{float(v.real)!r},{float(v.imag)!r}\n")


def _parse_axis(text: str, name: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"--{name} expects the form a:b:n")
    return float(parts[0]), float(parts[1]), int(parts[2])


def grid_spec_from_args(args) -> GridSpec:
    kwargs = {}
    if args.grid_x:
        x0, x1, nx = _parse_axis(args.grid_x, "grid-x")
        kwargs.update(x_range=(x0, x1), nx=nx)
    if args.grid_z:
        z0, z1, nz = _parse_axis(args.grid_z, "grid-z")
        kwargs.update(z_range=(z0, z1), nz=nz)
    return GridSpec(**kwargs)


def cmd_solve(args) -> int:
    scenario = resolve_scenario(args.scenario)
    opts = build_solver_options(args)
    out_dir = Path(args.out)
    result = solve(scenario, opts)
    write_solve_outputs(result, scenario, opts, out_dir)
    if args.dump_channels:
        _dump_channels(scenario, out_dir)
    energies = ", ".join(f"{e * 1e6:.3f} uW" for e in result.report.energies_w)
    print(f"solved: energies [{energies}], restart {result.report.restart_index}, "
          f"{result.report.wall_time_s:.2f} s")
    return 0 if result.report.converged else 3


def cmd_grid(args) -> int:
    scenario = resolve_scenario(args.scenario)
    opts = build_solver_options(args)
    spec = grid_spec_from_args(args)
    out_dir = Path(args.out)
    result = solve(scenario, opts)
    write_solve_outputs(result, scenario, opts, out_dir)
    grid = evaluate_grid(result.state, result.precoder, scenario, spec)
    write_grid_csv(grid, out_dir / "grid.csv")
    write_sidecar(grid, scenario, out_dir / "grid_meta.json",
                  extra={"config_echo": config_echo(scenario, opts)})
    px, pz = grid.peak_location
    print(f"grid written: peak normalized {grid.peak_normalized:.4e} at "
          f"({px:.3f}, {pz:.3f}) m")
    return 0 if result.report.converged else 3


def _sweep_values(raw: str):
    try:
        parsed = json.loads(raw)
        if not isinstance(parsed, list):
            raise ValueError
        return parsed
    except (json.JSONDecodeError, ValueError):
        return [float(v) for v in raw.split(",") if v.strip()]


def _apply_sweep(scenario_dict: dict, parameter: str, value) -> dict:
    out = json.loads(json.dumps(scenario_dict))
    if parameter == "frequency":
        out["frequency_hz"] = float(value)
    elif parameter == "p_max":
        out["p_max_w"] = float(value)
    elif parameter == "receiver_z":
        for entry in out["receivers"]:
            entry["position_m"][2] = float(value)
    elif parameter == "weights":
        weights = list(value) if isinstance(value, (list, tuple)) else [float(value)]
        if len(weights) != len(out["receivers"]):
            raise ValueError(
                f"weights value {weights} does not match the {len(out['receivers'])} receivers"
            )
        for entry, w in zip(out["receivers"], weights):
            entry["weight"] = float(w)
    else:
        raise ValueError(
            f"unknown sweep parameter '{parameter}' "
            "(choose from frequency, weights, receiver_z, p_max)"
        )
    return out


def cmd_sweep(args) -> int:
    scenario = resolve_scenario(args.scenario)
    base = scenario_to_dict(scenario)
    opts = build_solver_options(args)
    values = _sweep_values(args.values)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    n_rx = len(base["receivers"])
    rows = []
    any_unconverged = False
    for index, value in enumerate(values):
        swept = scenario_from_dict(_apply_sweep(base, args.param, value))
        run_opts = replace(opts, seed=opts.seed + index)
        result = solve(swept, run_opts)
        any_unconverged |= not result.report.converged
        rows.append((value, result.report.energies_w, result.report.final_objective_w))

    header = "value," + ",".join(f"e{m + 1}_w" for m in range(n_rx)) + ",objective_w"
    with open(out_dir / "sweep.csv", "w") as fh:
        fh.write(header + "\n")
        for value, energies, objective in rows:
            tag = json.dumps(value).replace(",", ";") if isinstance(value, list) else repr(value)
            fh.write(tag + "," + ",".join(repr(float(e)) for e in energies)
                     + f",{objective!r}\n")
    with open(out_dir / "sweep_meta.json", "w") as fh:
        json.dump({
            "parameter": args.param,
            "values": values,
            "config_echo": config_echo(scenario, opts),
        }, fh, indent=2)
    print(f"sweep over {args.param}: {len(values)} runs -> {out_dir / 'sweep.csv'}")
    return 3 if any_unconverged else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmafocus",
        description="Design and evaluate energy-focusing DMA transmissions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True,
                       help="scenario JSON path or preset name "
                            "(fig2a, fig2b, table1_equal, table1_skewed)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--trace", action="store_true",
                       help="dump per-iteration inner-loop traces as CSV")

    p_solve = sub.add_parser("solve", help="optimize one scenario")
    common(p_solve)
    p_solve.add_argument("--dump-channels", action="store_true",
                         help="export receiver channel vectors as CSV")
    p_solve.set_defaults(func=cmd_solve)

    p_grid = sub.add_parser("grid", help="solve, then map received power over a plane")
    common(p_grid)
    p_grid.add_argument("--grid-x", default=None, metavar="a:b:n")
    p_grid.add_argument("--grid-z", default=None, metavar="a:b:n")
    p_grid.set_defaults(func=cmd_grid)

    p_sweep = sub.add_parser("sweep", help="solve once per parameter value")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         help="frequency | weights | receiver_z | p_max")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated numbers or a JSON list")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnservableScenarioError as exc:
        print(f"unservable scenario: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
