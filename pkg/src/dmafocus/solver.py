"""Alternating design of the digital feed and the metasurface weights.

Each outer iteration computes the closed-form optimal feed for the current
weights, then descends the weight objective on the circle manifold; both
half-steps can only improve the weighted harvested energy, so the objective
trace is non-decreasing.  The transmit-power constraint is restored by one
final rescale of the feed vector against the radiated power.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .dma import DmaState, build_quadratic_form, reduced_channels
from .manifold import RcgOptions, rcg_minimize
from .precoding import Precoder, precoder_for
from .propagation import channel_matrix, waveguide_matrix
from .scenario import Scenario


class UnservableScenarioError(RuntimeError):
    """No receiver with positive weight couples to the aperture."""


@dataclass(frozen=True)
class SolverOptions:
    outer_iterations: int = 30
    objective_tolerance: float = 1e-5    # relative improvement for early exit
    restarts: int = 4
    seed: int = 0
    rcg: RcgOptions = field(default_factory=RcgOptions)
    eig_tol: float = 1e-10
    eig_max_iter: int = 5000
    keep_rcg_traces: bool = False        # retain per-iteration inner traces

    def __post_init__(self):
        if self.outer_iterations < 1:
            raise ValueError("outer_iterations must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class SolverReport:
    """Outcome of one solve: traces, energies, and bookkeeping.

    ``objective_trace`` holds the weighted objective of the winning restart
    after every half-step, evaluated under the relaxed (digital) power
    constraint used during the alternation.  ``energies_w`` come from the
    rescaled feed that meets the transmitted-power constraint exactly.
    """

    objective_trace: np.ndarray
    restart_traces: tuple[np.ndarray, ...]
    energies_w: np.ndarray
    final_objective_w: float
    converged: bool
    restart_index: int
    wall_time_s: float
    rcg_records: tuple[dict, ...] = ()


@dataclass(frozen=True)
class SolverResult:
    state: DmaState
    precoder: Precoder
    report: SolverReport


def harvested_energies(
    state: DmaState, precoder: Precoder, scenario: Scenario
) -> np.ndarray:
    """Per-receiver harvested power zeta |a_m^H H Q w|^2 in watts."""
    channels = channel_matrix(scenario.geometry, scenario.receiver_positions)
    waveguide = waveguide_matrix(scenario.geometry)
    radiated = waveguide.apply(state.apply(precoder.w))
    received = channels.conj() @ radiated
    return scenario.conversion_efficiency * np.abs(received) ** 2


def solve(scenario: Scenario, options: SolverOptions | None = None) -> SolverResult:
    """Run the alternating optimization with multi-start and pick the best run.

    Raises UnservableScenarioError when every weighted receiver has a zero
    channel.  A run counts as converged when the relative improvement of the
    weighted objective between outer iterations falls below the tolerance
    before the iteration cap.
    """
    opts = options or SolverOptions()
    geometry = scenario.geometry
    channels = channel_matrix(geometry, scenario.receiver_positions)
    waveguide = waveguide_matrix(geometry)
    alphas = scenario.receiver_weights
    zeta = scenario.conversion_efficiency
    p_max = scenario.p_max_w

    coupled = np.sum(np.abs(channels) ** 2, axis=1) * alphas
    if not np.any(coupled > 0.0):
        raise UnservableScenarioError(
            "all receivers have zero channel or zero weight; nothing to optimize"
        )

    t_start = time.perf_counter()
    runs = []
    for restart in range(opts.restarts):
        rng = np.random.default_rng([opts.seed, restart])
        phases = rng.uniform(0.0, 2.0 * np.pi, size=(geometry.n_microstrips, geometry.n_elements))
        state = DmaState(phases=phases)

        trace: list[float] = []
        rcg_records: list[dict] = []
        converged = False
        prev_objective = None

        for outer in range(opts.outer_iterations):
            design = precoder_for(
                state, scenario, channels=channels, waveguide=waveguide,
                eig_tol=opts.eig_tol, eig_max_iter=opts.eig_max_iter,
            )
            zbar = reduced_channels(design.precoder.w, channels, waveguide)
            form = build_quadratic_form(zbar, alphas, zeta)
            trace.append(-form.quad(state.q_flat))

            rcg = rcg_minimize(form, state.circle, opts.rcg)
            state = DmaState.from_circle(rcg.b, geometry.n_microstrips, geometry.n_elements)
            trace.append(float(-rcg.trace[-1]))
            record = {
                "restart": restart,
                "outer": outer,
                "iterations": rcg.iterations,
                "objective": float(rcg.trace[-1]),
                "gradient_norm": rcg.gradient_norm,
            }
            if opts.keep_rcg_traces:
                record["trace"] = rcg.trace
                record["gradient_trace"] = rcg.gradient_trace
            rcg_records.append(record)

            objective = trace[-1]
            if prev_objective is not None:
                improvement = objective - prev_objective
                if improvement <= opts.objective_tolerance * max(
                    abs(prev_objective), np.finfo(float).tiny
                ):
                    converged = True
                    break
            prev_objective = objective

        # Pair the final weights with their own optimal feed before rescaling.
        design = precoder_for(
            state, scenario, channels=channels, waveguide=waveguide,
            eig_tol=opts.eig_tol, eig_max_iter=opts.eig_max_iter,
        )
        zbar = reduced_channels(design.precoder.w, channels, waveguide)
        form = build_quadratic_form(zbar, alphas, zeta)
        trace.append(-form.quad(state.q_flat))

        radiated_norm = np.linalg.norm(waveguide.apply(state.apply(design.precoder.w)))
        if radiated_norm == 0.0:
            raise UnservableScenarioError("radiated power is zero for the designed weights")
        w_scaled = np.sqrt(p_max) * design.precoder.w / radiated_norm
        w_scaled.setflags(write=False)
        precoder = Precoder(w=w_scaled)

        energies = harvested_energies(state, precoder, scenario)
        final_objective = float(np.dot(alphas, energies))
        runs.append({
            "state": state,
            "precoder": precoder,
            "trace": np.asarray(trace),
            "energies": energies,
            "objective": final_objective,
            "converged": converged and design.converged,
            "rcg_records": tuple(rcg_records),
        })

    best = max(range(len(runs)), key=lambda idx: (runs[idx]["objective"], -idx))
    chosen = runs[best]
    report = SolverReport(
        objective_trace=chosen["trace"],
        restart_traces=tuple(run["trace"] for run in runs),
        energies_w=chosen["energies"],
        final_objective_w=chosen["objective"],
        converged=bool(chosen["converged"]),
        restart_index=best,
        wall_time_s=time.perf_counter() - t_start,
        rcg_records=chosen["rcg_records"],
    )
    return SolverResult(state=chosen["state"], precoder=chosen["precoder"], report=report)
