"""Free-space near-field channels and intra-microstrip waveguide couplings.

Channel entries follow the spherical-wave model: per-element amplitude
sqrt(F(theta)) * lambda / (4 pi d) and phase exp(+j k d), stored so that the
Hermitian inner product ``a^H r`` applies the physical exp(-j k d) delay to
the radiated signal r.  Elements seen from behind the aperture contribute
exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import SystemGeometry


def radiation_profile(theta, boresight_gain: float):
    """Element gain 2 (b + 1) cos^b(theta) for theta in [0, pi/2], else 0."""
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    gain = np.where(
        (theta >= 0.0) & (theta <= np.pi / 2.0),
        2.0 * (boresight_gain + 1.0) * np.abs(c) ** boresight_gain,
        0.0,
    )
    if gain.ndim == 0:
        return float(gain)
    return gain


@dataclass(frozen=True)
class ChannelVector:
    """Per-element complex channel gains towards one receiver position."""

    entries: np.ndarray       # (N,) complex, microstrip-major order
    position_m: np.ndarray    # (3,) receiver location

    @property
    def gain(self) -> float:
        """Channel power ||a||^2."""
        return float(np.vdot(self.entries, self.entries).real)


def channel_matrix(geometry: SystemGeometry, points: np.ndarray) -> np.ndarray:
    """Channel rows for many positions at once; shape (K, N).

    Row k equals the entries of ``channel_vector(geometry, points[k])``.
    Raises if any point coincides with an element (1/d singularity).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    pos = geometry.element_positions
    # Elements lie in z = 0, so the z offset is the point's own z coordinate.
    d_sq = (pts[:, 0:1] - pos[None, :, 0]) ** 2
    d_sq += (pts[:, 1:2] - pos[None, :, 1]) ** 2
    d_sq += pts[:, 2:3] ** 2
    d = np.sqrt(d_sq)
    if np.any(d == 0.0):
        raise ValueError("evaluation point coincides with an array element")
    # cos(theta) measured from the aperture normal (+z); negative z is behind.
    cos_theta = pts[:, 2:3] / d
    b = geometry.boresight_gain
    front = cos_theta > 0.0
    profile = np.where(front, 2.0 * (b + 1.0) * np.abs(cos_theta) ** b, 0.0)
    amplitude = np.sqrt(profile) * geometry.wavelength_m / (4.0 * np.pi * d)
    return amplitude * np.exp(1j * geometry.wavenumber * d)


def channel_vector(geometry: SystemGeometry, position) -> ChannelVector:
    """Near-field channel towards a single position with z >= 0."""
    pos = np.asarray(position, dtype=float)
    entries = channel_matrix(geometry, pos[None, :])[0]
    entries.setflags(write=False)
    return ChannelVector(entries=entries, position_m=pos)


@dataclass(frozen=True)
class WaveguideMatrix:
    """Diagonal of the N x N intra-microstrip propagation matrix.

    Only the diagonal is stored; the matrix is diagonal by construction.
    """

    diagonal: np.ndarray  # (N,) complex, microstrip-major order

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.diagonal * vec

    def apply_adjoint(self, vec: np.ndarray) -> np.ndarray:
        return self.diagonal.conj() * vec


def waveguide_matrix(geometry: SystemGeometry) -> WaveguideMatrix:
    """Couplings exp(-rho (alpha_c + j beta_c)) with rho = (l - 1) * spacing.

    The feed sits at the first element of each strip, so slot l travels
    (l - 1) inter-element spacings of waveguide before radiating.
    """
    rho = np.arange(geometry.n_elements) * geometry.spacing_m
    per_strip = np.exp(
        -rho * (geometry.waveguide_attenuation + 1j * geometry.waveguide_phase_rate)
    )
    diag = np.tile(per_strip, geometry.n_microstrips)
    diag.setflags(write=False)
    return WaveguideMatrix(diagonal=diag)
