"""Metasurface configuration state and its vectorized algebra.

Each element weight is confined to the circle (j + e^{j phi}) / 2.  The
block-sparse weighting matrix Q (one column per microstrip) is never stored
densely: applying it to a feed vector only needs the flattened weights and
index arithmetic, and the support-restricted channel reduction turns the
focusing objective into a low-rank Hermitian quadratic form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .propagation import WaveguideMatrix

TWO_PI = 2.0 * np.pi


def flat_index(strip: int, slot: int, n_elements: int) -> int:
    """Microstrip-major position of element (strip, slot), both 0-based."""
    return strip * n_elements + slot


def grid_index(index: int, n_elements: int) -> tuple[int, int]:
    """Inverse of flat_index."""
    return divmod(index, n_elements)


def lorentzian_weight(phi):
    """Weight (j + e^{j phi}) / 2 on the circle of radius 1/2 about j/2."""
    return (1j + np.exp(1j * np.asarray(phi, dtype=float))) / 2.0


def circle_from_weights(q_flat: np.ndarray) -> np.ndarray:
    """Map Lorentzian weights onto the unit circle: b = 2 q - j."""
    return 2.0 * q_flat - 1j


def weights_from_circle(b: np.ndarray) -> np.ndarray:
    """Inverse map q = (b + j) / 2."""
    return (b + 1j) / 2.0


@dataclass(frozen=True)
class DmaState:
    """Per-element phases plus the weight vectors derived from them.

    Phases are canonicalized to [0, 2 pi); the flattened weights ``q_flat``
    and the unit-circle variables ``circle`` are cached at construction so
    there is a single source of truth.
    """

    phases: np.ndarray                       # (n_strips, n_elements) radians
    q_flat: np.ndarray = field(init=False, repr=False)
    circle: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        phases = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        if phases.ndim != 2:
            raise ValueError("phases must be an (n_strips, n_elements) grid")
        phases.setflags(write=False)
        q = lorentzian_weight(phases).reshape(-1)
        q.setflags(write=False)
        b = circle_from_weights(q)
        b.setflags(write=False)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "q_flat", q)
        object.__setattr__(self, "circle", b)

    @property
    def n_microstrips(self) -> int:
        return self.phases.shape[0]

    @property
    def n_elements(self) -> int:
        return self.phases.shape[1]

    @property
    def n_total(self) -> int:
        return self.q_flat.size

    @classmethod
    def from_circle(cls, b: np.ndarray, n_microstrips: int, n_elements: int) -> "DmaState":
        """Rebuild a state from unit-circle variables (phases = arg b)."""
        b = np.asarray(b)
        if b.size != n_microstrips * n_elements:
            raise ValueError("circle variable length does not match the grid")
        phases = np.angle(b).reshape(n_microstrips, n_elements)
        return cls(phases=phases)

    def apply(self, w: np.ndarray) -> np.ndarray:
        """Q w: feed vector (n_strips,) -> radiating vector (N,)."""
        w = np.asarray(w)
        if w.shape != (self.n_microstrips,):
            raise ValueError(
                f"feed vector has shape {w.shape}, expected ({self.n_microstrips},)"
            )
        return self.q_flat * np.repeat(w, self.n_elements)

    def apply_adjoint(self, v: np.ndarray) -> np.ndarray:
        """Q^H v: element vector (N,) -> feed-space vector (n_strips,)."""
        v = np.asarray(v)
        if v.shape != (self.n_total,):
            raise ValueError(f"element vector has shape {v.shape}, expected ({self.n_total},)")
        return (self.q_flat.conj() * v).reshape(self.n_microstrips, self.n_elements).sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "n_d": self.n_microstrips,
            "n_e": self.n_elements,
            "phases_rad": self.phases.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DmaState":
        phases = np.asarray(data["phases_rad"], dtype=float)
        if phases.shape != (int(data["n_d"]), int(data["n_e"])):
            raise ValueError("phases_rad shape disagrees with n_d / n_e")
        return cls(phases=phases)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "DmaState":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def reduced_channels(
    w: np.ndarray,
    channels: np.ndarray,
    waveguide: WaveguideMatrix,
) -> np.ndarray:
    """Support-restricted channel vectors, one row per receiver; shape (M, N).

    Entry (i, l) of row m is conj(w_i) * (H^H a_m)_(i,l), which makes
    ``row^H q_flat`` equal to ``a_m^H H Q w`` for every feasible state.
    """
    channels = np.atleast_2d(np.asarray(channels))
    n = channels.shape[1]
    w = np.asarray(w)
    if n % w.size != 0:
        raise ValueError("channel length is not a multiple of the feed count")
    n_elements = n // w.size
    w_stretched = np.repeat(w.conj(), n_elements)
    return w_stretched[None, :] * waveguide.diagonal.conj()[None, :] * channels


@dataclass(frozen=True)
class QuadraticForm:
    """The Hermitian form -zeta * sum_m alpha_m zbar_m zbar_m^H, kept low rank.

    Mat-vecs and quadratic values route through the (M, N) factor matrix, so
    cost scales with the number of receivers, not N^2.  The image of the
    all-ones vector is cached for the gradient of the focusing objective.
    """

    zbar: np.ndarray       # (M, N) rows are the reduced channels
    weights: np.ndarray    # (M,) non-negative receiver priorities
    zeta: float
    ones_image: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        zbar = np.atleast_2d(np.asarray(self.zbar))
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (zbar.shape[0],):
            raise ValueError("one weight per reduced channel row is required")
        if np.any(weights < 0):
            raise ValueError("receiver weights must be non-negative")
        object.__setattr__(self, "zbar", zbar)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "ones_image", self.matvec(np.ones(zbar.shape[1])))

    @property
    def dim(self) -> int:
        return self.zbar.shape[1]

    @property
    def scale_bound(self) -> float:
        """Upper bound on the spectral radius: zeta * sum alpha_m ||zbar_m||^2."""
        row_power = np.sum(np.abs(self.zbar) ** 2, axis=1)
        return float(self.zeta * np.dot(self.weights, row_power))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        inner = self.zbar.conj() @ x            # [zbar_m^H x]
        return -self.zeta * ((self.weights * inner) @ self.zbar)

    def quad(self, x: np.ndarray) -> float:
        """x^H A x, exactly real and never positive."""
        inner = self.zbar.conj() @ x
        return float(-self.zeta * np.dot(self.weights, np.abs(inner) ** 2))


def build_quadratic_form(
    zbar: np.ndarray,
    weights: np.ndarray,
    zeta: float,
) -> QuadraticForm:
    """Assemble the focusing objective's quadratic form from reduced channels."""
    if not (0.0 < zeta < 1.0):
        raise ValueError("zeta must lie strictly in (0, 1)")
    return QuadraticForm(zbar=zbar, weights=weights, zeta=zeta)
