"""Spatial power maps of a designed transmission.

Points are evaluated in the xz-plane (receivers live there); the normalized
value divides the received power by the channel gain ||a(p)||^2, removing
path loss so that focusing is visible independently of distance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dma import DmaState
from .precoding import Precoder
from .propagation import channel_matrix, waveguide_matrix
from .scenario import Scenario, scenario_to_dict

CSV_HEADER = "x_m,z_m,power_w,normalized,norm_db"

NORM_DB_FLOOR = -300.0  # stand-in for -inf at zero-power points

_CHUNK = 2048  # grid points per channel-matrix block, bounds peak memory


@dataclass(frozen=True)
class GridSpec:
    """Rectangular sampling of the xz-plane at fixed y."""

    x_range: tuple[float, float] = (-1.0, 1.0)
    z_range: tuple[float, float] = (0.5, 3.0)
    nx: int = 201
    nz: int = 251
    y: float = 0.0

    def __post_init__(self):
        if self.nx < 2 or self.nz < 2:
            raise ValueError("grid resolution must be at least 2 per axis")
        for lo, hi in (self.x_range, self.z_range):
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
                raise ValueError("grid ranges must be finite with max > min")

    @property
    def x_values(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.nx)

    @property
    def z_values(self) -> np.ndarray:
        return np.linspace(self.z_range[0], self.z_range[1], self.nz)

    def points(self) -> np.ndarray:
        """All (x, y, z) samples, z-major to match the CSV row order."""
        zz, xx = np.meshgrid(self.z_values, self.x_values, indexing="ij")
        return np.column_stack(
            [xx.reshape(-1), np.full(xx.size, self.y), zz.reshape(-1)]
        )


def _received_amplitudes(
    state: DmaState, precoder: Precoder, scenario: Scenario, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """|a(p)^H H Q w| and channel gain ||a(p)||^2 for a block of points."""
    waveguide = waveguide_matrix(scenario.geometry)
    radiated = waveguide.apply(state.apply(precoder.w))
    amp = np.empty(points.shape[0])
    gain = np.empty(points.shape[0])
    for lo in range(0, points.shape[0], _CHUNK):
        block = points[lo:lo + _CHUNK]
        a = channel_matrix(scenario.geometry, block)
        amp[lo:lo + _CHUNK] = np.abs(a.conj() @ radiated)
        gain[lo:lo + _CHUNK] = np.sum(np.abs(a) ** 2, axis=1)
    return amp, gain


def received_power(
    state: DmaState, precoder: Precoder, scenario: Scenario, point
) -> float:
    """Harvested power zeta |a(p)^H H Q w|^2 at one point, in watts."""
    pts = np.asarray(point, dtype=float)[None, :]
    amp, _ = _received_amplitudes(state, precoder, scenario, pts)
    return float(scenario.conversion_efficiency * amp[0] ** 2)


def normalized_power(
    state: DmaState, precoder: Precoder, scenario: Scenario, point
) -> tuple[float, bool]:
    """Path-loss-free power |a^H H Q w|^2 / ||a||^2 and a zero-channel flag."""
    pts = np.asarray(point, dtype=float)[None, :]
    amp, gain = _received_amplitudes(state, precoder, scenario, pts)
    if gain[0] == 0.0:
        return 0.0, True
    return float(amp[0] ** 2 / gain[0]), False


@dataclass(frozen=True)
class PowerGrid:
    """Raw and normalized power sampled over a GridSpec, plus peak metadata."""

    spec: GridSpec
    power_w: np.ndarray      # (nz, nx)
    normalized: np.ndarray   # (nz, nx)
    zero_channel_points: int
    peak_index: tuple[int, int] = field(init=False)

    def __post_init__(self):
        flat = int(np.argmax(self.normalized))
        object.__setattr__(self, "peak_index", tuple(np.unravel_index(flat, self.normalized.shape)))

    @property
    def peak_location(self) -> tuple[float, float]:
        iz, ix = self.peak_index
        return (float(self.spec.x_values[ix]), float(self.spec.z_values[iz]))

    @property
    def peak_normalized(self) -> float:
        return float(self.normalized[self.peak_index])

    @property
    def norm_db(self) -> np.ndarray:
        """Normalized power in dB relative to the grid peak."""
        peak = self.peak_normalized
        if peak <= 0.0:
            return np.full_like(self.normalized, NORM_DB_FLOOR)
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(self.normalized / peak)
        return np.maximum(db, NORM_DB_FLOOR)

    def half_power_fraction(self) -> float:
        """Fraction of grid points at or above half the normalized peak."""
        peak = self.peak_normalized
        if peak <= 0.0:
            return 1.0
        return float(np.mean(self.normalized >= 0.5 * peak))


def evaluate_grid(
    state: DmaState, precoder: Precoder, scenario: Scenario, spec: GridSpec
) -> PowerGrid:
    """Sample received and normalized power at every grid point."""
    points = spec.points()
    amp, gain = _received_amplitudes(state, precoder, scenario, points)
    power = scenario.conversion_efficiency * amp**2
    zero = gain == 0.0
    safe_gain = np.where(zero, 1.0, gain)
    normalized = np.where(zero, 0.0, amp**2 / safe_gain)
    shape = (spec.nz, spec.nx)
    return PowerGrid(
        spec=spec,
        power_w=power.reshape(shape),
        normalized=normalized.reshape(shape),
        zero_channel_points=int(np.count_nonzero(zero)),
    )


def write_grid_csv(grid: PowerGrid, path) -> None:
    """Write one row per point, z-major, with full round-trip float precision."""
    x = grid.spec.x_values
    z = grid.spec.z_values
    db = grid.norm_db
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for iz in range(grid.spec.nz):
            for ix in range(grid.spec.nx):
                fh.write(
                    f"{float(x[ix])!r},{float(z[iz])!r},{float(grid.power_w[iz, ix])!r},"
                    f"{float(grid.normalized[iz, ix])!r},{float(db[iz, ix])!r}\n"
                )


def grid_sidecar(grid: PowerGrid, scenario: Scenario, extra: dict | None = None) -> dict:
    """Metadata companion for a grid CSV: axes, peak, stats, conventions."""
    iz, ix = grid.peak_index
    meta = {
        "grid": {
            "x_range_m": list(grid.spec.x_range),
            "z_range_m": list(grid.spec.z_range),
            "nx": grid.spec.nx,
            "nz": grid.spec.nz,
            "y_m": grid.spec.y,
            "row_order": "z-major (z outer loop, x inner loop)",
        },
        "normalization": "received power divided by channel gain ||a(p)||^2",
        "db_floor": NORM_DB_FLOOR,
        "peak": {
            "normalized": grid.peak_normalized,
            "power_w": float(grid.power_w[iz, ix]),
            "x_m": grid.peak_location[0],
            "z_m": grid.peak_location[1],
            "row_index": int(iz * grid.spec.nx + ix),
        },
        "min_normalized": float(grid.normalized.min()),
        "max_normalized": float(grid.normalized.max()),
        "half_power_fraction": grid.half_power_fraction(),
        "zero_channel_points": grid.zero_channel_points,
        "receivers_m": [list(r.position_m) for r in scenario.receivers],
        "scenario": scenario_to_dict(scenario),
    }
    if extra:
        meta.update(extra)
    return meta


def write_sidecar(grid: PowerGrid, scenario: Scenario, path, extra: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(grid_sidecar(grid, scenario, extra), fh, indent=2)
