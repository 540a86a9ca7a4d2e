"""Closed-form digital precoding for a fixed metasurface configuration.

For fixed weights the harvested-energy objective is a Rayleigh quotient of
a rank-deficient Hermitian PSD matrix, so the optimal feed vector is its
dominant eigenvector carrying the full power budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dma import DmaState
from .propagation import WaveguideMatrix, channel_matrix, waveguide_matrix
from .scenario import Scenario


@dataclass(frozen=True)
class Precoder:
    """Complex feed weights, one per microstrip."""

    w: np.ndarray

    @property
    def power(self) -> float:
        return float(np.vdot(self.w, self.w).real)


@dataclass(frozen=True)
class EnergyMatrix:
    """Hermitian PSD matrix whose Rayleigh quotient is the weighted objective."""

    matrix: np.ndarray  # (n_strips, n_strips)


def build_energy_matrix(
    state: DmaState,
    channels: np.ndarray,
    weights: np.ndarray,
    waveguide: WaveguideMatrix,
    zeta: float,
) -> EnergyMatrix:
    """Sum of rank-1 terms zeta * alpha_m u_m u_m^H with u_m = Q^H H^H a_m."""
    channels = np.atleast_2d(np.asarray(channels))
    weights = np.asarray(weights, dtype=float)
    u = np.array([state.apply_adjoint(waveguide.apply_adjoint(a)) for a in channels])
    g = zeta * (u.T @ (weights[:, None] * u.conj()))
    g = 0.5 * (g + g.conj().T)
    return EnergyMatrix(matrix=g)


@dataclass(frozen=True)
class EigResult:
    eigenvalue: float
    vector: np.ndarray
    converged: bool
    iterations: int


def max_eigvec(g: np.ndarray, tol: float = 1e-10, max_iter: int = 5000) -> EigResult:
    """Dominant eigenpair of a Hermitian PSD matrix by power iteration.

    Runs from the normalized all-ones vector and from the first canonical
    basis vectors (the ones start may be an exact non-dominant fixed point),
    keeping the converged candidate with the largest eigenvalue.  Returns the
    best iterate with ``converged=False`` when no start meets the residual
    tolerance within ``max_iter`` steps.
    """
    g = np.asarray(g)
    n = g.shape[0]
    starts = [np.ones(n, dtype=complex) / np.sqrt(n)]
    starts += [np.eye(n, dtype=complex)[k] for k in range(min(n, 2))]

    best: EigResult | None = None
    for v in starts:
        total = 0
        candidate = None
        for _ in range(max_iter):
            gv = g @ v
            norm = np.linalg.norm(gv)
            if norm == 0.0:
                break
            v = gv / norm
            total += 1
            gv = g @ v
            lam = float(np.vdot(v, gv).real)
            residual = np.linalg.norm(gv - lam * v)
            if residual <= tol * max(lam, np.finfo(float).tiny):
                candidate = EigResult(eigenvalue=lam, vector=v, converged=True, iterations=total)
                break
        if candidate is None:
            gv = g @ v
            lam = float(np.vdot(v, gv).real)
            candidate = EigResult(eigenvalue=lam, vector=v, converged=False, iterations=total)
        if (
            best is None
            or (candidate.converged, candidate.eigenvalue) > (best.converged, best.eigenvalue)
        ):
            best = candidate
    if best.eigenvalue == 0.0:
        # Zero matrix: any unit vector is optimal, pick e_1 deterministically.
        e1 = np.zeros(n, dtype=complex)
        e1[0] = 1.0
        return EigResult(eigenvalue=0.0, vector=e1, converged=True, iterations=0)
    return best


@dataclass(frozen=True)
class PrecoderDesign:
    precoder: Precoder
    eigenvalue: float
    converged: bool
    unservable: bool


def precoder_for(
    state: DmaState,
    scenario: Scenario,
    *,
    channels: np.ndarray | None = None,
    waveguide: WaveguideMatrix | None = None,
    eig_tol: float = 1e-10,
    eig_max_iter: int = 5000,
) -> PrecoderDesign:
    """Full-power dominant-eigenvector feed for the given metasurface state.

    A single feed vector suffices: energy symbols carry no information, so
    every receiver harvests from the same waveform.  When the energy matrix
    vanishes (no receiver couples to the aperture) the scenario is flagged
    unservable and the first basis vector is returned at full power.
    """
    if channels is None:
        channels = channel_matrix(scenario.geometry, scenario.receiver_positions)
    if waveguide is None:
        waveguide = waveguide_matrix(scenario.geometry)
    g = build_energy_matrix(
        state, channels, scenario.receiver_weights, waveguide,
        scenario.conversion_efficiency,
    )
    eig = max_eigvec(g.matrix, tol=eig_tol, max_iter=eig_max_iter)
    w = np.sqrt(scenario.p_max_w) * eig.vector
    w.setflags(write=False)
    return PrecoderDesign(
        precoder=Precoder(w=w),
        eigenvalue=eig.eigenvalue,
        converged=eig.converged,
        unservable=(eig.eigenvalue == 0.0),
    )
