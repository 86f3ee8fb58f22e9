"""Reweighted observable estimation with jackknife error bars, effective
sample size, stationary-window averaging and the partition-function ratio.

All ratio estimators are invariant under a common shift of the
log-weights; only log_partition_ratio consumes the absolute normalization,
which snapshots carry in log_weight_offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ValidationError
from .phasespace import SQRT3
from .sde import WeightedSnapshot


def _check_pair(values, log_weights):
    values = np.asarray(values, dtype=float)
    log_weights = np.asarray(log_weights, dtype=float)
    if values.shape != log_weights.shape or values.ndim != 1:
        raise ValidationError("values and log_weights must be equal-length 1-d arrays")
    if values.size == 0:
        raise ValidationError("empty input")
    if not np.all(np.isfinite(values)):
        raise ValidationError("non-finite value encountered")
    if np.all(np.isneginf(log_weights)):
        raise ValidationError("all log-weights are -inf")
    return values, log_weights


def reweighted_mean(values, log_weights) -> float:
    """Ratio estimator sum(v*w)/sum(w) with w = exp(L - max L)."""
    values, log_weights = _check_pair(values, log_weights)
    w = np.exp(log_weights - log_weights.max())
    return float((values * w).sum() / w.sum())


def effective_sample_size(log_weights) -> float:
    """(sum w)^2 / sum w^2, shift-invariant weight-degeneracy diagnostic."""
    log_weights = np.asarray(log_weights, dtype=float)
    if log_weights.size == 0:
        raise ValidationError("empty input")
    w = np.exp(log_weights - log_weights.max())
    return float(w.sum() ** 2 / (w * w).sum())


def jackknife_error(values, log_weights) -> float:
    """Leave-one-out jackknife standard deviation of reweighted_mean."""
    values, log_weights = _check_pair(values, log_weights)
    n = values.size
    if n < 2:
        raise ValidationError("jackknife needs at least 2 samples")
    w = np.exp(log_weights - log_weights.max())
    sw = w.sum()
    svw = (values * w).sum()
    denom = sw - w
    if np.any(denom <= 0):
        # one weight carries everything; the loo estimates are degenerate
        denom = np.clip(denom, np.finfo(float).tiny, None)
    loo = (svw - values * w) / denom
    m = loo.mean()
    return float(np.sqrt((n - 1) / n * ((loo - m) ** 2).sum()))


@dataclass
class ObservableSeries:
    """One observable on a tau grid: value, stderr and ESS per row."""

    tau: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    ess: np.ndarray
    n_traj: np.ndarray

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        self.ess = np.asarray(self.ess, dtype=float)
        self.n_traj = np.asarray(self.n_traj, dtype=int)
        n = self.tau.size
        for arr in (self.value, self.stderr, self.ess, self.n_traj):
            if arr.size != n:
                raise ValidationError("all series columns must have equal length")
        if n > 1 and not np.all(np.diff(self.tau) > 0):
            raise ValidationError("tau grid must be strictly increasing")
        if np.any(self.stderr < 0):
            raise ValidationError("stderr must be >= 0")
        if np.any((self.ess <= 0) | (self.ess > self.n_traj + 1e-9)):
            raise ValidationError("ess must lie in (0, n_traj]")

    def __len__(self) -> int:
        return self.tau.size


def _reweighted_pair(values, snapshot: WeightedSnapshot):
    value = reweighted_mean(values, snapshot.log_weights)
    err = jackknife_error(values, snapshot.log_weights) if values.size > 1 else 0.0
    return value, err


def energy_observable(model, snapshot: WeightedSnapshot):
    """Reweighted <H> with the model's constant report shift added back."""
    values = model.weyl_energy(snapshot.state) + model.report_offset
    return _reweighted_pair(values, snapshot)


def magnetization_sq_values(snapshot: WeightedSnapshot) -> np.ndarray:
    """Per-trajectory Weyl estimator of m^2 = (N + sum_{i!=j} sz_i sz_j)/N^2."""
    u = np.cos(snapshot.state.theta)
    n = snapshot.state.n_spins
    total = u.sum(axis=1)
    return (n + 3.0 * (total * total - (u * u).sum(axis=1))) / n**2


def magnetization_sq(snapshot: WeightedSnapshot):
    return _reweighted_pair(magnetization_sq_values(snapshot), snapshot)


def transverse_magnetization(snapshot: WeightedSnapshot):
    """Site-averaged reweighted <sigma^x>."""
    state = snapshot.state
    values = SQRT3 * (np.sin(state.theta) * np.cos(state.phi)).mean(axis=1)
    return _reweighted_pair(values, snapshot)


def window_average(series: ObservableSeries, tau_min: float, tau_max: float):
    """Mean of the rows inside [tau_min, tau_max] with a conservative stderr.

    Rows within one run share trajectories and are correlated, so the
    stderr is the larger of the mean row stderr and the scatter-based
    estimate.
    """
    mask = (series.tau >= tau_min - 1e-12) & (series.tau <= tau_max + 1e-12)
    k = int(np.count_nonzero(mask))
    if k == 0:
        raise ValidationError(
            f"no rows in window [{tau_min}, {tau_max}]"
        )
    vals = series.value[mask]
    errs = series.stderr[mask]
    value = float(vals.mean())
    propagated = float(errs.mean())
    scatter = float(vals.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0
    return value, max(propagated, scatter)


def log_partition_ratio(snapshot: WeightedSnapshot) -> float:
    """log(Z(tau)/Z(0)) = log of the plain ensemble mean of exp(L).

    Uses the unshifted accumulated log-weights via the snapshot's stored
    offset; this is the one estimator that is not shift-invariant.
    """
    lw = snapshot.log_weights
    if lw.size == 0:
        raise ValidationError("empty snapshot")
    return float(snapshot.log_weight_offset + logsumexp(lw) - np.log(lw.size))
