"""Conjugate-gradient descent on the product of N unit circles.

Minimizes f(b) = 1/4 (b + j1)^H A (b + j1) with A Hermitian negative
semidefinite, keeping every entry of b unit modulus.  Tangent spaces use the
real inner product Re(u^H v); steps leave the manifold and are pulled back
by entrywise renormalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dma import QuadraticForm


@dataclass(frozen=True)
class RcgOptions:
    """Hyperparameters of the circle-manifold conjugate-gradient loop.

    ``gradient_tolerance`` is applied to the Riemannian gradient of the
    objective rescaled to unit spectral bound, making the stopping rule
    independent of the physical magnitude of A; None means 1e-6 * N.
    ``restart_period`` of None restarts the conjugate direction every N
    iterations.
    """

    max_iterations: int = 500
    gradient_tolerance: float | None = None
    initial_step: float = 1.0
    contraction: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 50
    restart_period: int | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (0.0 < self.contraction < 1.0):
            raise ValueError("contraction must lie in (0, 1)")
        if not (0.0 < self.sufficient_decrease < 1.0):
            raise ValueError("sufficient_decrease must lie in (0, 1)")
        if self.initial_step <= 0:
            raise ValueError("initial_step must be positive")


def objective(form: QuadraticForm, b: np.ndarray) -> float:
    """f(b) = 1/4 (b + j1)^H A (b + j1); real and <= 0."""
    return 0.25 * form.quad(b + 1j)


def euclidean_gradient(form: QuadraticForm, b: np.ndarray) -> np.ndarray:
    """Ambient gradient 1/2 (A b + j A 1), using the cached image of ones."""
    return 0.5 * (form.matvec(b) + 1j * form.ones_image)


def riemannian_gradient(grad: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Project an ambient vector onto the tangent spaces of the circles."""
    return grad - np.real(grad * b.conj()) * b


def transport(tangent: np.ndarray, b_from: np.ndarray, b_to: np.ndarray) -> np.ndarray:
    """Carry a tangent vector to another point by re-projection."""
    return riemannian_gradient(tangent, b_to)


def retract(b: np.ndarray, tangent: np.ndarray, step: float) -> np.ndarray:
    """Entrywise renormalization of b + step * tangent back to unit modulus.

    A vanishing denominator (possible only for |step * t_l| >= 1) is handled
    by halving the step until every entry stays away from the origin.
    """
    step = float(step)
    for _ in range(64):
        moved = b + step * tangent
        mags = np.abs(moved)
        if np.all(mags > 0.0):
            return moved / mags
        step *= 0.5
    return b.copy()


def _real_inner(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.real(np.vdot(u, v)))


@dataclass(frozen=True)
class RcgResult:
    b: np.ndarray
    trace: np.ndarray           # objective value per accepted iterate, original scale
    gradient_trace: np.ndarray  # Riemannian gradient norm per accepted iterate
    gradient_norm: float
    iterations: int
    converged: bool


def rcg_minimize(
    form: QuadraticForm,
    b0: np.ndarray,
    options: RcgOptions | None = None,
) -> RcgResult:
    """Polak-Ribiere conjugate gradient with Armijo backtracking.

    The conjugate coefficient is clamped at zero and the direction is
    restarted periodically and whenever it fails to point downhill, which
    guarantees a non-increasing objective trace.
    """
    opts = options or RcgOptions()
    b = np.asarray(b0, dtype=complex).copy()
    n = b.size

    scale = form.scale_bound
    if scale == 0.0:
        return RcgResult(
            b=b, trace=np.array([0.0]), gradient_trace=np.array([0.0]),
            gradient_norm=0.0, iterations=0, converged=True,
        )
    gtol = opts.gradient_tolerance if opts.gradient_tolerance is not None else 1e-6 * n
    restart_every = opts.restart_period if opts.restart_period is not None else n

    def f_scaled(x):
        return objective(form, x) / scale

    f_val = f_scaled(b)
    grad = riemannian_gradient(euclidean_gradient(form, b) / scale, b)
    gnorm = np.linalg.norm(grad)
    trace = [f_val]
    grad_trace = [gnorm]
    direction = -grad

    iterations = 0
    converged = gnorm <= gtol
    since_restart = 0

    while not converged and iterations < opts.max_iterations:
        descent = _real_inner(grad, direction)
        if descent >= 0.0:
            direction = -grad
            descent = -gnorm**2
            since_restart = 0

        # Armijo backtracking along the retracted ray.
        step = opts.initial_step
        accepted = False
        for _ in range(opts.max_backtracks):
            candidate = retract(b, direction, step)
            f_new = f_scaled(candidate)
            if f_new <= f_val + opts.sufficient_decrease * step * descent:
                accepted = True
                break
            step *= opts.contraction
        if not accepted:
            if _real_inner(direction, -grad) < gnorm**2 * (1.0 - 1e-12):
                # Conjugate direction failed: retry steepest descent once.
                direction = -grad
                since_restart = 0
                continue
            break  # Stationary to machine precision.

        grad_prev, b_prev = grad, b
        b, f_val = candidate, f_new
        trace.append(f_val)
        iterations += 1
        since_restart += 1

        grad = riemannian_gradient(euclidean_gradient(form, b) / scale, b)
        gnorm = np.linalg.norm(grad)
        grad_trace.append(gnorm)
        if gnorm <= gtol:
            converged = True
            break

        if since_restart >= restart_every:
            direction = -grad
            since_restart = 0
        else:
            grad_prev_moved = transport(grad_prev, b_prev, b)
            beta = _real_inner(grad, grad - grad_prev_moved) / _real_inner(
                grad_prev, grad_prev
            )
            beta = max(beta, 0.0)
            direction = -grad + beta * transport(direction, b_prev, b)

    return RcgResult(
        b=b,
        trace=np.asarray(trace) * scale,
        gradient_trace=np.asarray(grad_trace) * scale,
        gradient_norm=float(gnorm * scale),
        iterations=iterations,
        converged=converged,
    )
