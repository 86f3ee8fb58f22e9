"""Spin-1/2 phase space: phase-point kernel, Pauli Weyl symbols and
infinite-temperature sampling.

Every spin is represented by two angles (theta, phi) on the sphere.  The
complex 2x2 kernel only ever appears here, as a verification surface; the
simulation modules work on real angle arrays exclusively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError

SQRT3 = np.sqrt(3.0)

# theta is clamped to [POLE_EPS, pi - POLE_EPS] after every update; the
# 1/sin(theta) drift terms diverge at the poles.
POLE_EPS = 1e-6


class SpinAngles(NamedTuple):
    theta: float
    phi: float


def wrap_phi(phi):
    """Wrap azimuthal angle(s) into [0, 2*pi)."""
    return np.mod(phi, 2.0 * np.pi)


def clamp_theta(theta):
    """Clamp polar angle(s) into [POLE_EPS, pi - POLE_EPS]."""
    return np.clip(theta, POLE_EPS, np.pi - POLE_EPS)


@dataclass
class SpinEnsembleState:
    """Angles of N spins replicated over a trajectory ensemble.

    theta, phi: float arrays of shape (n_traj, n_spins).
    """

    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        self.phi = np.atleast_2d(np.asarray(self.phi, dtype=float))
        if self.theta.shape != self.phi.shape:
            raise ValidationError(
                f"theta shape {self.theta.shape} != phi shape {self.phi.shape}"
            )
        if self.theta.ndim != 2:
            raise ValidationError("angle arrays must be 2-d (n_traj, n_spins)")

    @property
    def n_traj(self) -> int:
        return self.theta.shape[0]

    @property
    def n_spins(self) -> int:
        return self.theta.shape[1]

    def copy(self) -> "SpinEnsembleState":
        return SpinEnsembleState(self.theta.copy(), self.phi.copy())


def phase_point_kernel(angles) -> np.ndarray:
    """2x2 phase-point operator at (theta, phi).

    Hermitian with unit trace: the diagonal is (1 +- sqrt(3) cos(theta))/2,
    the off-diagonal sqrt(3) e^{-+ i phi} sin(theta)/2.
    """
    theta, phi = angles
    ct, st = np.cos(theta), np.sin(theta)
    off = SQRT3 * np.exp(-1j * phi) * st
    return 0.5 * np.array(
        [[1.0 + SQRT3 * ct, off], [np.conj(off), 1.0 - SQRT3 * ct]],
        dtype=complex,
    )


def pauli_weyl(axis: str, angles) -> float:
    """Weyl symbol of a Pauli operator: Tr{sigma^axis kernel(theta, phi)}."""
    theta, phi = angles
    if axis == "x":
        return SQRT3 * np.sin(theta) * np.cos(phi)
    if axis == "y":
        return SQRT3 * np.sin(theta) * np.sin(phi)
    if axis == "z":
        return SQRT3 * np.cos(theta)
    raise ValidationError(f"unknown Pauli axis {axis!r}")


def sample_fully_mixed(n_spins: int, n_traj: int, rng: np.random.Generator) -> SpinEnsembleState:
    """Sample an ensemble from the infinite-temperature (identity) state.

    Each spin is independent and uniform on the sphere: cos(theta) uniform
    on (-1, 1), phi uniform on [0, 2*pi).  Sampling u = cos(theta) directly
    realizes the flattened density sin(theta)/2 without distortion near the
    poles.
    """
    if n_spins < 1:
        raise ValidationError("n_spins must be >= 1")
    if n_traj < 1:
        raise ValidationError("n_traj must be >= 1")
    u = rng.uniform(-1.0, 1.0, size=(n_traj, n_spins))
    theta = clamp_theta(np.arccos(u))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=(n_traj, n_spins))
    return SpinEnsembleState(theta, phi)
