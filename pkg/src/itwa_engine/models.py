"""Concrete imaginary-time systems: the AF Ising model on a regular graph
and the transverse-field Ising model (TFIM) on a 1D/2D lattice.

Each model provides the Weyl-symbol energy entering the trajectory
weights, the drift of its stochastic equations, noise amplitudes where
diffusion survives, and an `advance` routine that integrates a trajectory
ensemble over a number of Ito-Euler steps.

The graph model carries no diffusion (its matrix is not positive and is
dropped), so its equations are deterministic ODEs; they are integrated in
the u = cos(theta) variable where the drift is polynomial.  The TFIM is
integrated in (theta, phi) with a truncated diagonal theta-noise and a
constant phi-noise factor obtained from an eigendecomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ValidationError
from .graphs import RegularGraph
from .phasespace import POLE_EPS, SQRT3, SpinEnsembleState, clamp_theta, wrap_phi
from .sde import noise_block

# per-step cap on the deterministic theta increment; the pole clamp keeps
# the noise term safe, so the cap is not applied to it.
MAX_DTHETA = 0.1
_U_MAX = np.cos(POLE_EPS)


def _check_sized(model, state: SpinEnsembleState):
    if state.n_spins != model.n_spins:
        raise ValidationError(
            f"state has {state.n_spins} spins, model expects {model.n_spins}"
        )


# ---------------------------------------------------------------------------
# AF Ising model on a regular graph
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ising_advance_kernel(u, log_w, nbr, J, d_tau, n_steps, u_max, du_max):
    n_traj, n = u.shape
    k = nbr.shape[1]
    s = np.empty(n)
    for t in range(n_traj):
        for _ in range(n_steps):
            energy = 0.0
            for i in range(n):
                acc = 0.0
                for a in range(k):
                    acc += u[t, nbr[i, a]]
                s[i] = acc
                energy += u[t, i] * acc
            energy *= 1.5 * J
            log_w[t] -= energy * d_tau
            for i in range(n):
                ui = u[t, i]
                du = d_tau * J * (3.0 * ui * ui - 1.0) * s[i]
                if du > du_max:
                    du = du_max
                elif du < -du_max:
                    du = -du_max
                ui += du
                if ui > u_max:
                    ui = u_max
                elif ui < -u_max:
                    ui = -u_max
                u[t, i] = ui


class IsingGraphModel:
    """AF Ising Hamiltonian with uniform coupling J > 0 on a regular graph."""

    n_noise_channels = 0
    report_offset = 0.0

    def __init__(self, graph: RegularGraph, J: float = 1.0):
        if J <= 0:
            raise ValidationError("J must be positive")
        self.graph = graph
        self.J = float(J)
        self._nbr = graph.neighbor_array()

    @property
    def n_spins(self) -> int:
        return self.graph.n

    def _neighbor_sum(self, u: np.ndarray) -> np.ndarray:
        return u[:, self._nbr].sum(axis=2)

    def weyl_energy(self, state: SpinEnsembleState) -> np.ndarray:
        """Per-trajectory Weyl energy: 3J * sum_edges cos(theta_i)cos(theta_j)."""
        _check_sized(self, state)
        u = np.cos(state.theta)
        return 1.5 * self.J * (u * self._neighbor_sum(u)).sum(axis=1)

    def drift(self, state: SpinEnsembleState):
        """Deterministic drift in (theta, phi); the phi sector is frozen."""
        _check_sized(self, state)
        st = np.clip(np.sin(state.theta), np.sin(POLE_EPS), None)
        u = np.cos(state.theta)
        dtheta = -self.J * (2.0 / st - 3.0 * st) * self._neighbor_sum(u)
        return dtheta, np.zeros_like(dtheta)

    def drift_u(self, u: np.ndarray) -> np.ndarray:
        """Equivalent drift of u = cos(theta): J(3u^2 - 1) * neighbor sum."""
        return self.J * (3.0 * u * u - 1.0) * self._neighbor_sum(u)

    def advance(self, state: SpinEnsembleState, log_w: np.ndarray, *,
                d_tau: float, n_steps: int, step_offset: int = 0,
                seed: int = 0, row_start: int = 0, n_rows_total: int | None = None):
        u = np.ascontiguousarray(np.cos(state.theta))
        _ising_advance_kernel(u, log_w, self._nbr, self.J, d_tau, n_steps,
                              _U_MAX, MAX_DTHETA)
        state.theta[...] = np.arccos(u)


# ---------------------------------------------------------------------------
# TFIM on a 1D chain or 2D square lattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeSpec:
    """Hypercubic lattice: a chain (d=1) or square lattice (d=2).

    A single site with no bonds (lengths=(1,)) is permitted so that the
    one-spin limit of the TFIM can be exercised directly.
    """

    dimension: int
    lengths: tuple
    boundary: str = "periodic"

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(int(x) for x in self.lengths))
        if self.dimension not in (1, 2):
            raise ValidationError("lattice dimension must be 1 or 2")
        if len(self.lengths) != self.dimension:
            raise ValidationError("one length per lattice axis required")
        if any(x < 1 for x in self.lengths):
            raise ValidationError("lattice lengths must be >= 1")
        if self.boundary not in ("periodic", "open"):
            raise ValidationError("boundary must be 'periodic' or 'open'")

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.lengths))

    def bonds(self) -> np.ndarray:
        """(n_bonds, 2) array of nearest-neighbor site pairs, deduplicated."""
        if self.dimension == 1:
            (L,) = self.lengths
            idx = lambda x: x[0]  # noqa: E731
            shape = (L,)
        else:
            Lx, Ly = self.lengths
            idx = lambda x: x[0] * Ly + x[1]  # noqa: E731
            shape = (Lx, Ly)
        pairs = set()
        for site in np.ndindex(*shape):
            site = site if self.dimension == 2 else (site[0],)
            for axis in range(self.dimension):
                L = self.lengths[axis]
                nxt = list(site)
                nxt[axis] += 1
                if nxt[axis] >= L:
                    if self.boundary == "open" or L <= 2:
                        # L == 2 periodic would duplicate the single bond
                        if self.boundary == "periodic" and L == 2 and site[axis] == 1:
                            continue
                        if self.boundary == "open":
                            continue
                    nxt[axis] %= L
                a, b = idx(tuple(site)), idx(tuple(nxt))
                if a != b:
                    pairs.add((min(a, b), max(a, b)))
        if not pairs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(sorted(pairs), dtype=np.int64)


@dataclass(frozen=True)
class PhiDiffusionFactor:
    """Constant factor B with B @ B.T ~= D_phiphi, negative modes clipped."""

    matrix: np.ndarray
    diffusion: np.ndarray


class TFIMModel:
    """Transverse-field Ising model -h sum sigma^x - J sum_bonds sigma^z sigma^z.

    Trajectory weights use the energy shifted by -d*J*N; the shift cancels
    in every reweighted ratio and is added back when reporting <H>.
    """

    def __init__(self, lattice: LatticeSpec, J: float = 1.0, h: float = 0.0):
        if J < 0:
            raise ValidationError("J must be >= 0")
        if h < 0:
            raise ValidationError("h must be >= 0")
        self.lattice = lattice
        self.J = float(J)
        self.h = float(h)
        self.d = lattice.dimension
        n = lattice.n_sites
        bonds = lattice.bonds()
        self._bonds = bonds
        # padded neighbor table: index n refers to a zero pad column
        counts = np.zeros(n, dtype=np.int64)
        for a, b in bonds:
            counts[a] += 1
            counts[b] += 1
        width = max(1, counts.max() if n else 0)
        nbr = np.full((n, width), n, dtype=np.int64)
        fill = np.zeros(n, dtype=np.int64)
        for a, b in bonds:
            nbr[a, fill[a]] = b
            fill[a] += 1
            nbr[b, fill[b]] = a
            fill[b] += 1
        self._nbr_pad = nbr
        self._phi_factor = self._build_phi_factor()

    @property
    def n_spins(self) -> int:
        return self.lattice.n_sites

    @property
    def n_noise_channels(self) -> int:
        return 2 * self.n_spins

    @property
    def report_offset(self) -> float:
        return self.d * self.J * self.n_spins

    def _build_phi_factor(self) -> PhiDiffusionFactor:
        n = self.n_spins
        if n == 0:
            raise ValidationError("lattice must have at least one site")
        D = np.zeros((n, n))
        np.fill_diagonal(D, 2.0 * self.d * self.J)
        for a, b in self._bonds:
            D[a, b] = D[b, a] = -self.J
        if self.J == 0.0:
            return PhiDiffusionFactor(matrix=np.zeros((n, n)), diffusion=D)
        lam, vec = np.linalg.eigh(D)
        lam = np.clip(lam, 0.0, None)
        return PhiDiffusionFactor(matrix=vec * np.sqrt(lam), diffusion=D)

    def phi_diffusion_factor(self) -> PhiDiffusionFactor:
        return self._phi_factor

    def _neighbor_sum(self, u: np.ndarray) -> np.ndarray:
        pad = np.concatenate([u, np.zeros((u.shape[0], 1))], axis=1)
        return pad[:, self._nbr_pad].sum(axis=2)

    def weyl_energy(self, state: SpinEnsembleState) -> np.ndarray:
        """Shifted Weyl energy used inside trajectory weights."""
        _check_sized(self, state)
        u = np.cos(state.theta)
        st = np.sin(state.theta)
        field = -self.h * SQRT3 * (st * np.cos(state.phi)).sum(axis=1)
        bond = -1.5 * self.J * (u * self._neighbor_sum(u)).sum(axis=1)
        return field + bond - self.report_offset

    def drift(self, state: SpinEnsembleState):
        _check_sized(self, state)
        u = np.cos(state.theta)
        st = np.sin(state.theta)
        cp = np.cos(state.phi)
        S = self._neighbor_sum(u)
        dtheta = (-self.J * st * S
                  + (self.h / SQRT3) * u * cp
                  + self.d * self.J * st * u)
        st_safe = np.clip(st, np.sin(POLE_EPS), None)
        dphi = -(self.h / SQRT3) * np.sin(state.phi) / st_safe
        return dtheta, dphi

    def theta_noise_amp(self, state: SpinEnsembleState) -> np.ndarray:
        """Diagonal theta-noise amplitude sqrt(max(D_theta_ii, 0))."""
        _check_sized(self, state)
        u = np.cos(state.theta)
        st = np.sin(state.theta)
        a = (4.0 * self.J * u * self._neighbor_sum(u)
             + (4.0 * self.h / SQRT3) * st * np.cos(state.phi)
             - 2.0 * self.d * self.J * st * st)
        return np.sqrt(np.clip(a, 0.0, None))

    def advance(self, state: SpinEnsembleState, log_w: np.ndarray, *,
                d_tau: float, n_steps: int, step_offset: int = 0,
                seed: int = 0, row_start: int = 0, n_rows_total: int | None = None):
        theta, phi = state.theta, state.phi
        n_rows = theta.shape[0]
        if n_rows_total is None:
            n_rows_total = n_rows
        n = self.n_spins
        sqdt = np.sqrt(d_tau)
        B_phi_T = self._phi_factor.matrix.T
        has_phi_noise = self.J != 0.0
        for k in range(n_steps):
            z = noise_block(seed, step_offset + k, n_rows_total, 2 * n)
            z = z[row_start:row_start + n_rows]
            u = np.cos(theta)
            st = np.sin(theta)
            cp = np.cos(phi)
            S = self._neighbor_sum(u)
            energy = (-self.h * SQRT3 * (st * cp).sum(axis=1)
                      - 1.5 * self.J * (u * S).sum(axis=1)
                      - self.report_offset)
            log_w -= energy * d_tau
            amp_sq = (4.0 * self.J * u * S
                      + (4.0 * self.h / SQRT3) * st * cp
                      - 2.0 * self.d * self.J * st * st)
            amp = np.sqrt(np.clip(amp_sq, 0.0, None))
            drift_theta = (-self.J * st * S
                           + (self.h / SQRT3) * u * cp
                           + self.d * self.J * st * u)
            dtheta = (np.clip(drift_theta * d_tau, -MAX_DTHETA, MAX_DTHETA)
                      + amp * z[:, :n] * sqdt)
            st_safe = np.clip(st, np.sin(POLE_EPS), None)
            dphi = -(self.h / SQRT3) * np.sin(phi) / st_safe * d_tau
            if has_phi_noise:
                dphi = dphi + (z[:, n:] @ B_phi_T) * sqdt
            theta[...] = clamp_theta(theta + dtheta)
            phi[...] = wrap_phi(phi + dphi)
