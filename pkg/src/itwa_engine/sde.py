"""Ito-Euler integration of trajectory ensembles in imaginary time with
per-trajectory log-weight accumulation.

The weight integral uses left-endpoint quadrature: the Weyl energy is
evaluated on the pre-update state of each step.  Noise is drawn from
counter-based Philox streams keyed by (seed, step index), so results are a
pure function of (model, schedule) and independent of how trajectories are
chunked across workers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .phasespace import SpinEnsembleState, sample_fully_mixed

WORKERS_ENV_VAR = "ITWA_WORKERS"


def noise_block(seed: int, step_index: int, n_rows: int, n_channels: int) -> np.ndarray:
    """Standard-normal block for one step, identical regardless of chunking.

    Each step owns a disjoint Philox counter range; row t of the block is
    the noise of trajectory t at this step.
    """
    bg = np.random.Philox(key=seed, counter=[0, 0, step_index + 1, 0])
    return np.random.Generator(bg).standard_normal((n_rows, n_channels))


def _initial_rng(seed: int) -> np.random.Generator:
    # separate counter plane from the per-step noise blocks
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, 1]))


@dataclass
class Schedule:
    """Integration plan: step size, output times, ensemble size and seed."""

    d_tau: float
    snapshot_taus: tuple
    n_traj: int
    seed: int = 0

    def __post_init__(self):
        self.snapshot_taus = tuple(float(t) for t in self.snapshot_taus)
        if self.d_tau <= 0:
            raise ValidationError("d_tau must be positive")
        if self.n_traj < 1:
            raise ValidationError("n_traj must be >= 1")
        if not self.snapshot_taus:
            raise ValidationError("at least one snapshot time required")
        prev = -1.0
        for t in self.snapshot_taus:
            if t < 0:
                raise ValidationError("snapshot times must be >= 0")
            if t <= prev:
                raise ValidationError("snapshot times must be strictly increasing")
            steps = t / self.d_tau
            if abs(steps - round(steps)) > 1e-12 * max(1.0, steps):
                raise ValidationError(
                    f"snapshot tau {t} is not an integer multiple of d_tau {self.d_tau}"
                )
            prev = t

    def step_index(self, tau: float) -> int:
        return int(round(tau / self.d_tau))


@dataclass
class WeightedSnapshot:
    """Ensemble state at one tau with stabilized log-weights.

    log_weights are max-subtracted; the subtracted constant is kept in
    log_weight_offset so the partition-function ratio can be recovered.
    """

    tau: float
    state: SpinEnsembleState
    log_weights: np.ndarray
    log_weight_offset: float = 0.0
    n_invalid: int = 0

    @property
    def n_traj(self) -> int:
        return self.state.n_traj


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    if workers < 1:
        raise ValidationError("worker count must be >= 1")
    return workers


def _emit(tau: float, state: SpinEnsembleState, log_w: np.ndarray,
          valid: np.ndarray) -> WeightedSnapshot:
    n_invalid = int(np.count_nonzero(~valid))
    theta = state.theta[valid].copy()
    phi = state.phi[valid].copy()
    lw = log_w[valid].copy()
    offset = float(lw.max())
    return WeightedSnapshot(
        tau=tau,
        state=SpinEnsembleState(theta, phi),
        log_weights=lw - offset,
        log_weight_offset=offset,
        n_invalid=n_invalid,
    )


def step(snapshot: WeightedSnapshot, model, d_tau: float, seed: int = 0,
         step_index: int | None = None) -> WeightedSnapshot:
    """Advance every trajectory by one Ito-Euler step.

    The log-weight decreases by the pre-step Weyl energy times d_tau; the
    state update and angle clamping follow.  Noise (if the model carries
    any) is read from the counter stream at `step_index`, defaulting to the
    step count implied by snapshot.tau.
    """
    if d_tau <= 0:
        raise ValidationError("d_tau must be positive")
    if step_index is None:
        step_index = int(round(snapshot.tau / d_tau))
    state = snapshot.state.copy()
    log_w = snapshot.log_weights.copy()
    model.advance(state, log_w, d_tau=d_tau, n_steps=1,
                  step_offset=step_index, seed=seed)
    valid = np.isfinite(log_w) & np.isfinite(state.theta).all(axis=1) \
        & np.isfinite(state.phi).all(axis=1)
    snap = _emit(snapshot.tau + d_tau, state, log_w, valid)
    snap.log_weight_offset += snapshot.log_weight_offset
    snap.n_invalid += snapshot.n_invalid
    return snap


def evolve(model, schedule: Schedule, workers: int | None = None) -> list:
    """Integrate from the fully mixed state, emitting the scheduled snapshots.

    Trajectories whose state or weight turns non-finite are excluded from
    every later snapshot and counted in n_invalid.
    """
    workers = resolve_workers(workers)
    n_traj = schedule.n_traj
    rng = _initial_rng(schedule.seed)
    state = sample_fully_mixed(model.n_spins, n_traj, rng)
    log_w = np.zeros(n_traj)
    valid = np.ones(n_traj, dtype=bool)

    bounds = np.linspace(0, n_traj, workers + 1).astype(int)
    snapshots = []
    prev_tau = 0.0
    for tau in schedule.snapshot_taus:
        n_steps = schedule.step_index(tau) - schedule.step_index(prev_tau)
        if n_steps > 0:
            step_offset = schedule.step_index(prev_tau)
            for a, b in zip(bounds[:-1], bounds[1:]):
                if a == b:
                    continue
                chunk = SpinEnsembleState(state.theta[a:b], state.phi[a:b])
                model.advance(chunk, log_w[a:b], d_tau=schedule.d_tau,
                              n_steps=n_steps, step_offset=step_offset,
                              seed=schedule.seed, row_start=a,
                              n_rows_total=n_traj)
        finite = (np.isfinite(log_w)
                  & np.isfinite(state.theta).all(axis=1)
                  & np.isfinite(state.phi).all(axis=1))
        valid &= finite
        if not valid.any():
            raise ValidationError("every trajectory became invalid")
        snapshots.append(_emit(tau, state, log_w, valid))
        prev_tau = tau
    return snapshots
