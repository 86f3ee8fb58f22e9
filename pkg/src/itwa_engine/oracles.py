"""Exact and heuristic reference solvers used for validation: full
configuration enumeration for the graph model, dense exact diagonalization
for small TFIM lattices, and simulated annealing for graphs too large to
enumerate.

Configurations are encoded as integers, little-endian: spin i is bit i,
bit value 1 meaning sz = +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SizeGuardError, ValidationError
from .graphs import RegularGraph, config_energy

ENUM_MAX_SPINS = 26
ED_MAX_SPINS = 12
_CHUNK = 1 << 20


@dataclass(frozen=True)
class GroundStateReport:
    energy: float
    assignment: np.ndarray
    degeneracy: int | None
    method: str


def _bits_to_assignment(code: int, n: int) -> np.ndarray:
    bits = (code >> np.arange(n)) & 1
    return (2 * bits - 1).astype(np.int64)


def _cut_counts(g: RegularGraph):
    """Histogram of cut sizes over all 2^n configurations, plus an argmax.

    Returns (counts, best_code) where counts[c] is the number of
    configurations with cut size c and best_code attains the maximum cut.
    """
    n, edges = g.n, g.edge_array()
    if n > ENUM_MAX_SPINS:
        raise SizeGuardError(
            f"enumeration limited to {ENUM_MAX_SPINS} spins, got {n}; "
            "use the simulated-annealing estimate instead"
        )
    m = g.n_edges
    counts = np.zeros(m + 1, dtype=np.int64)
    best_cut = -1
    best_code = 0
    total = 1 << n
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        cut = np.zeros(codes.size, dtype=np.int64)
        for i, j in edges:
            cut += ((codes >> np.uint64(i)) ^ (codes >> np.uint64(j))).astype(np.int64) & 1
        counts += np.bincount(cut, minlength=m + 1)
        k = int(cut.argmax())
        if cut[k] > best_cut:
            best_cut = int(cut[k])
            best_code = int(codes[k])
    return counts, best_code


def enumerate_ground_state(g: RegularGraph, J: float = 1.0) -> GroundStateReport:
    """Exact minimum of config_energy over all assignments, with degeneracy."""
    counts, best_code = _cut_counts(g)
    max_cut = int(np.nonzero(counts)[0].max())
    energy = J * (g.n_edges - 2 * max_cut)
    return GroundStateReport(
        energy=float(energy),
        assignment=_bits_to_assignment(best_code, g.n),
        degeneracy=int(counts[max_cut]),
        method="enumeration",
    )


def enumerate_thermal_energy(g: RegularGraph, J: float, tau: float) -> float:
    """Exact Gibbs <H>(tau) from the enumerated energy spectrum."""
    if tau < 0:
        raise ValidationError("tau must be >= 0")
    counts, _ = _cut_counts(g)
    cuts = np.arange(counts.size)
    energies = J * (g.n_edges - 2.0 * cuts)
    mask = counts > 0
    energies, degen = energies[mask], counts[mask]
    x = -tau * energies
    x -= x.max()
    w = degen * np.exp(x)
    return float((energies * w).sum() / w.sum())


def sa_estimate_ground_state(g: RegularGraph, J: float = 1.0, restarts: int = 64,
                             sweeps: int = 1000, seed: int = 0) -> GroundStateReport:
    """Simulated-annealing upper bound on the ground-state energy.

    Independent geometric-cooling single-spin-flip Metropolis runs,
    vectorized across restarts, each followed by a zero-temperature
    descent to the nearest local minimum.  Deterministic per seed.
    """
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    n = g.n
    nbr = g.neighbor_array()
    s = rng.choice(np.array([-1, 1], dtype=np.int64), size=(restarts, n))
    t_hi, t_lo = 3.0 * J, 0.05 * J
    temps = t_hi * (t_lo / t_hi) ** (np.arange(sweeps) / max(1, sweeps - 1))
    for T in temps:
        order = rng.permutation(n)
        for i in order:
            # flipping spin i changes the energy by -2 J s_i * sum_nbr s_j
            dE = -2.0 * J * s[:, i] * s[:, nbr[i]].sum(axis=1)
            accept = (dE <= 0) | (rng.random(restarts) < np.exp(-np.clip(dE, 0, None) / T))
            s[accept, i] *= -1
    # greedy quench: single-spin descent until no improving flip remains
    while True:
        improved = False
        for i in range(n):
            dE = -2.0 * J * s[:, i] * s[:, nbr[i]].sum(axis=1)
            mask = dE < 0
            if mask.any():
                s[mask, i] *= -1
                improved = True
        if not improved:
            break
    energies = np.array([config_energy(g, row, J) for row in s])
    best = int(energies.argmin())
    return GroundStateReport(
        energy=float(energies[best]),
        assignment=s[best].copy(),
        degeneracy=None,
        method="annealing",
    )


def _tfim_dense_hamiltonian(model) -> tuple[np.ndarray, np.ndarray]:
    """Dense unshifted TFIM matrix and the diagonal of (1/N) sum sigma^z."""
    n = model.n_spins
    if n > ED_MAX_SPINS:
        raise SizeGuardError(
            f"dense ED limited to {ED_MAX_SPINS} spins, got {n}"
        )
    dim = 1 << n
    codes = np.arange(dim, dtype=np.uint64)
    z = 2.0 * (((codes[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & 1).astype(float)) - 1.0
    diag = np.zeros(dim)
    for a, b in model.lattice.bonds():
        diag += -model.J * z[:, a] * z[:, b]
    H = np.diag(diag)
    idx = np.arange(dim)
    for j in range(n):
        flipped = idx ^ (1 << j)
        H[idx, flipped] += -model.h
    m_diag = z.sum(axis=1) / n
    return H, m_diag


def ed_thermal_tfim(model, tau) -> tuple[np.ndarray, np.ndarray]:
    """Exact Gibbs <H> and <m^2> of the TFIM at one or more taus.

    Accepts a scalar or array tau; returns matching-shape arrays of the
    energy and squared-magnetization expectation values.
    """
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(taus < 0):
        raise ValidationError("tau must be >= 0")
    H, m_diag = _tfim_dense_hamiltonian(model)
    evals, vecs = scipy.linalg.eigh(H)
    # <k| M^2 |k> with M diagonal in the z basis
    m2_per_state = (vecs ** 2 * (m_diag ** 2)[:, None]).sum(axis=0)
    energies = np.empty_like(taus)
    msq = np.empty_like(taus)
    for k, t in enumerate(taus):
        x = -t * (evals - evals[0])
        w = np.exp(x)
        zpart = w.sum()
        energies[k] = (evals * w).sum() / zpart
        msq[k] = (m2_per_state * w).sum() / zpart
    if np.isscalar(tau) or np.asarray(tau).ndim == 0:
        return float(energies[0]), float(msq[0])
    return energies, msq
