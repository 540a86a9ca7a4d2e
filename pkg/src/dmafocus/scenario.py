"""Physical scenario description: array geometry, receivers, power budget.

The transmit aperture is a planar grid of metamaterial elements in the
z = 0 plane, organised as ``n_microstrips`` strips of ``n_elements`` each.
Element counts are derived from the aperture side length and the carrier
wavelength; receivers sit in the z > 0 half space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 2.998e8
"""Propagation speed used for every wavelength conversion, in m/s."""


@dataclass(frozen=True)
class SystemGeometry:
    """Planar DMA aperture plus the constants of its feeding waveguides.

    ``element_positions`` is an (N, 3) array in microstrip-major order:
    the element at strip ``i``, slot ``l`` (0-based) lives at row
    ``i * n_elements + l``.  This flattening order is the single indexing
    convention shared by every module that touches per-element vectors.
    """

    frequency_hz: float
    aperture_m: float
    n_microstrips: int
    n_elements: int
    spacing_m: float
    waveguide_attenuation: float   # 1/m, amplitude decay along a strip
    waveguide_phase_rate: float    # rad/m, phase accumulation along a strip
    boresight_gain: float          # exponent of the cos^b element pattern
    element_positions: np.ndarray = field(repr=False)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength_m

    @property
    def n_total(self) -> int:
        return self.n_microstrips * self.n_elements


def build_geometry(
    frequency_hz: float,
    aperture_m: float,
    spacing_fraction: float = 0.5,
    *,
    waveguide_attenuation: float = 1.2,
    waveguide_phase_rate: float = 827.67,
    boresight_gain: float = 2.0,
) -> SystemGeometry:
    """Derive the element grid from the aperture side and frequency.

    Both strip count and per-strip element count equal floor(2 D / lambda);
    elements are spaced ``spacing_fraction * lambda`` apart and centred on
    the origin of the z = 0 plane.
    """
    if frequency_hz <= 0:
        raise ValueError("frequency_hz must be positive")
    if aperture_m <= 0:
        raise ValueError("aperture_m must be positive")
    if spacing_fraction <= 0:
        raise ValueError("spacing_fraction must be positive")

    wavelength = SPEED_OF_LIGHT / frequency_hz
    n = int(np.floor(2.0 * aperture_m / wavelength))
    if n < 1:
        raise ValueError(
            f"aperture {aperture_m} m holds no elements at {frequency_hz} Hz "
            f"(floor(2D/lambda) = {n})"
        )
    spacing = spacing_fraction * wavelength

    # 1-based grid rule x_i = (i - (n+1)/2) * spacing, written 0-based.
    offsets = (np.arange(n) - (n - 1) / 2.0) * spacing
    x, y = np.meshgrid(offsets, offsets, indexing="ij")  # x: strip, y: slot
    positions = np.column_stack(
        [x.reshape(-1), y.reshape(-1), np.zeros(n * n)]
    )
    positions.setflags(write=False)

    return SystemGeometry(
        frequency_hz=float(frequency_hz),
        aperture_m=float(aperture_m),
        n_microstrips=n,
        n_elements=n,
        spacing_m=spacing,
        waveguide_attenuation=float(waveguide_attenuation),
        waveguide_phase_rate=float(waveguide_phase_rate),
        boresight_gain=float(boresight_gain),
        element_positions=positions,
    )


def fraunhofer_distance(geometry: SystemGeometry) -> float:
    """Outer edge of the radiating near field: 2 D^2 / lambda."""
    return 2.0 * geometry.aperture_m**2 / geometry.wavelength_m


def fresnel_limit(geometry: SystemGeometry) -> float:
    """Inner edge of the radiating near field: (D^4 / (8 lambda))^(1/3)."""
    return (geometry.aperture_m**4 / (8.0 * geometry.wavelength_m)) ** (1.0 / 3.0)


def classify_region(geometry: SystemGeometry, point) -> str:
    """Label a point as reactive / radiating-near-field / far-field.

    Distance is measured from the aperture centre; both region boundaries
    belong to the radiating near field.
    """
    r = float(np.linalg.norm(np.asarray(point, dtype=float)))
    if r < fresnel_limit(geometry):
        return "reactive"
    if r > fraunhofer_distance(geometry):
        return "far-field"
    return "radiating-near-field"


@dataclass(frozen=True)
class Receiver:
    """An energy receiver position with its priority weight."""

    position_m: tuple[float, float, float]
    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("receiver weight must be non-negative")
        if len(self.position_m) != 3:
            raise ValueError("receiver position must be an (x, y, z) triple")
        if self.position_m[2] <= 0:
            raise ValueError("receiver must sit in front of the aperture (z > 0)")
        object.__setattr__(self, "position_m", tuple(float(v) for v in self.position_m))


@dataclass(frozen=True)
class Scenario:
    """Geometry, receivers, transmit power budget and conversion efficiency."""

    geometry: SystemGeometry
    receivers: tuple[Receiver, ...]
    p_max_w: float
    conversion_efficiency: float

    def __post_init__(self):
        if len(self.receivers) < 1:
            raise ValueError("scenario needs at least one receiver")
        if self.p_max_w <= 0:
            raise ValueError("p_max_w must be positive")
        if not (0.0 < self.conversion_efficiency < 1.0):
            raise ValueError("conversion_efficiency must lie strictly in (0, 1)")
        object.__setattr__(self, "receivers", tuple(self.receivers))

    @property
    def receiver_positions(self) -> np.ndarray:
        return np.array([r.position_m for r in self.receivers], dtype=float)

    @property
    def receiver_weights(self) -> np.ndarray:
        return np.array([r.weight for r in self.receivers], dtype=float)


# --- JSON wire format ------------------------------------------------------
#
# { "frequency_hz", "aperture_m", "spacing_fraction", "alpha_c", "beta_c",
#   "boresight_b", "p_max_w", "zeta",
#   "receivers": [ { "position_m": [x, y, z], "weight" } ] }

_REQUIRED_KEYS = (
    "frequency_hz", "aperture_m", "alpha_c", "beta_c",
    "boresight_b", "p_max_w", "zeta", "receivers",
)


def scenario_from_dict(data: dict) -> Scenario:
    for key in _REQUIRED_KEYS:
        if key not in data:
            raise ValueError(f"scenario is missing required field '{key}'")
    receivers = []
    for idx, entry in enumerate(data["receivers"]):
        try:
            receivers.append(
                Receiver(position_m=tuple(entry["position_m"]), weight=float(entry["weight"]))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"receivers[{idx}] is invalid: {exc}") from exc
    geometry = build_geometry(
        frequency_hz=float(data["frequency_hz"]),
        aperture_m=float(data["aperture_m"]),
        spacing_fraction=float(data.get("spacing_fraction", 0.5)),
        waveguide_attenuation=float(data["alpha_c"]),
        waveguide_phase_rate=float(data["beta_c"]),
        boresight_gain=float(data["boresight_b"]),
    )
    return Scenario(
        geometry=geometry,
        receivers=tuple(receivers),
        p_max_w=float(data["p_max_w"]),
        conversion_efficiency=float(data["zeta"]),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    g = scenario.geometry
    return {
        "frequency_hz": g.frequency_hz,
        "aperture_m": g.aperture_m,
        "spacing_fraction": g.spacing_m / g.wavelength_m,
        "alpha_c": g.waveguide_attenuation,
        "beta_c": g.waveguide_phase_rate,
        "boresight_b": g.boresight_gain,
        "p_max_w": scenario.p_max_w,
        "zeta": scenario.conversion_efficiency,
        "receivers": [
            {"position_m": list(r.position_m), "weight": r.weight}
            for r in scenario.receivers
        ],
    }


def load_scenario(path) -> Scenario:
    """Read a scenario JSON file; raises ValueError with context on failure."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(
                f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    try:
        return scenario_from_dict(data)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
