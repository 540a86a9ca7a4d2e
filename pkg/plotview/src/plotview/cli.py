"""Batch renderer for solver artifacts.

Reads only the file contracts of the solver package (grid CSV + JSON
sidecar, report JSON); no solver code is imported and no numeric value is
modified on the way to the figure.

    plotview heatmap <grid.csv> <grid_meta.json> -o out.png [--db]
    plotview heatmap <grid.csv> <grid_meta.json> --dump-stats
    plotview trace <report.json> -o out.png

Exit codes: 0 success, 2 input does not match the expected contract
(wrong CSV columns, missing/empty traces), 5 dump-stats disagrees with the
sidecar, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

EXPECTED_COLUMNS = ["x_m", "z_m", "power_w", "normalized", "norm_db"]
DB_FLOOR = -40.0


class SchemaError(Exception):
    """Input file does not follow the documented contract."""


def load_grid(path) -> dict[str, np.ndarray]:
    """Parse a grid CSV, insisting on the exact column contract."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EXPECTED_COLUMNS:
            found = header or []
            missing = [c for c in EXPECTED_COLUMNS if c not in found]
            unexpected = [c for c in found if c not in EXPECTED_COLUMNS]
            raise SchemaError(
                f"column mismatch in {path}: expected {','.join(EXPECTED_COLUMNS)}; "
                f"got {','.join(found)} (missing: {missing or 'none'}, "
                f"unexpected: {unexpected or 'none'})"
            )
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise SchemaError(f"{path} contains no data rows")
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(EXPECTED_COLUMNS)}


def grid_stats(data: dict[str, np.ndarray]) -> dict:
    """Min/max/argmax of the normalized column, as stored in the sidecar."""
    normalized = data["normalized"]
    idx = int(np.argmax(normalized))
    return {
        "min_normalized": float(normalized.min()),
        "max_normalized": float(normalized.max()),
        "argmax": {
            "row_index": idx,
            "x_m": float(data["x_m"][idx]),
            "z_m": float(data["z_m"][idx]),
        },
    }


def sidecar_stats(sidecar: dict) -> dict:
    peak = sidecar["peak"]
    return {
        "min_normalized": sidecar["min_normalized"],
        "max_normalized": sidecar["max_normalized"],
        "argmax": {
            "row_index": peak["row_index"],
            "x_m": peak["x_m"],
            "z_m": peak["z_m"],
        },
    }


def _grid_shape(data: dict[str, np.ndarray], sidecar: dict) -> tuple[int, int]:
    grid = sidecar.get("grid", {})
    nx, nz = grid.get("nx"), grid.get("nz")
    if not nx or not nz:
        nx = int(np.unique(data["x_m"]).size)
        nz = int(np.unique(data["z_m"]).size)
    if nx * nz != data["x_m"].size:
        raise SchemaError(
            f"row count {data['x_m'].size} does not fill an {nz} x {nx} grid"
        )
    return int(nz), int(nx)


def render_heatmap(data, sidecar, out_path, db=False) -> None:
    """Draw the power map with receiver markers and the annotated peak."""
    nz, nx = _grid_shape(data, sidecar)
    x = data["x_m"].reshape(nz, nx)[0]
    z = data["z_m"].reshape(nz, nx)[:, 0]
    if db:
        values = data["norm_db"].reshape(nz, nx)
        kwargs = {"vmin": DB_FLOOR, "vmax": 0.0}
        label = "normalized power [dB rel. peak]"
    else:
        values = data["normalized"].reshape(nz, nx)
        kwargs = {}
        label = "normalized power"

    fig, ax = plt.subplots(figsize=(6.5, 5))
    mesh = ax.pcolormesh(x, z, values, shading="nearest", cmap="inferno", **kwargs)
    fig.colorbar(mesh, ax=ax, label=label)

    for rx in sidecar.get("receivers_m", []):
        ax.plot(rx[0], rx[2], "c^", ms=9, mfc="none", mew=1.5)
    stats = grid_stats(data)
    px, pz = stats["argmax"]["x_m"], stats["argmax"]["z_m"]
    ax.plot(px, pz, "w*", ms=11, mec="k")
    ax.annotate(
        f"peak {stats['max_normalized']:.3e}\n({px:.3g}, {pz:.3g}) m",
        xy=(px, pz), xytext=(6, 6), textcoords="offset points",
        color="w", fontsize=8,
        bbox={"boxstyle": "round,pad=0.2", "fc": "black", "alpha": 0.5},
    )
    ax.set_xlabel("x [m]")
    ax.set_ylabel("z [m]")
    ax.set_title(Path(out_path).stem)
    fig.tight_layout()
    fig.savefig(out_path, dpi=140)
    plt.close(fig)


def render_trace(report: dict, out_path) -> tuple[float, int]:
    """Plot objective traces (one line per restart) and annotate the report's
    final objective.  Returns (annotated value, number of lines drawn)."""
    traces = report.get("restart_traces")
    if not traces:
        single = report.get("objective_trace")
        traces = [single] if single else None
    if not traces or any(len(t) == 0 for t in traces):
        raise SchemaError("report carries no non-empty objective trace")

    chosen = report.get("restart_index", 0)
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    for idx, trace in enumerate(traces):
        trace = np.asarray(trace, dtype=float)
        style = "-" if idx == chosen else "--"
        line, = ax.plot(trace, style, lw=1.8 if idx == chosen else 1.0,
                        label=f"restart {idx}")
        drops = np.where(np.diff(trace) < -1e-9 * np.abs(trace[:-1]))[0]
        if drops.size:
            ax.plot(drops + 1, trace[drops + 1], "rx", ms=8,
                    label="_decrease" if idx else "decrease!")
    final = float(report.get("final_objective_w", traces[chosen][-1]))
    ax.annotate(
        f"reported objective: {final:.6e} W",
        xy=(0.98, 0.05), xycoords="axes fraction", ha="right", fontsize=9,
        bbox={"boxstyle": "round,pad=0.3", "fc": "white", "alpha": 0.8},
    )
    ax.set_xlabel("half-step")
    ax.set_ylabel("weighted objective [W]")
    ax.legend(fontsize=8)
    ax.grid(True, ls=":")
    fig.tight_layout()
    fig.savefig(out_path, dpi=140)
    plt.close(fig)
    return final, len(traces)


def cmd_heatmap(args) -> int:
    data = load_grid(args.csv)
    with open(args.sidecar) as fh:
        sidecar = json.load(fh)
    if args.dump_stats:
        stats = grid_stats(data)
        print(json.dumps(stats, indent=2))
        expected = sidecar_stats(sidecar)
        if stats != expected:
            print(f"stats disagree with sidecar: {expected}", file=sys.stderr)
            return 5
        return 0
    if not args.output:
        print("heatmap rendering needs -o/--output", file=sys.stderr)
        return 1
    render_heatmap(data, sidecar, args.output, db=args.db)
    print(f"wrote {args.output}")
    return 0


def cmd_trace(args) -> int:
    with open(args.report) as fh:
        report = json.load(fh)
    final, lines = render_trace(report, args.output)
    print(f"wrote {args.output} ({lines} restart lines), final objective: {final!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotview", description="Render solver grid CSVs and reports."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_heat = sub.add_parser("heatmap", help="render a power-grid CSV")
    p_heat.add_argument("csv")
    p_heat.add_argument("sidecar")
    p_heat.add_argument("-o", "--output", default=None)
    p_heat.add_argument("--db", action="store_true",
                        help=f"plot the dB column, floored at {DB_FLOOR} dB")
    p_heat.add_argument("--dump-stats", action="store_true",
                        help="emit min/max/argmax instead of rendering")
    p_heat.set_defaults(func=cmd_heatmap)

    p_trace = sub.add_parser("trace", help="render a report's objective traces")
    p_trace.add_argument("report")
    p_trace.add_argument("-o", "--output", required=True)
    p_trace.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
