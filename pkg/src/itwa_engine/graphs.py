"""Random k-regular interaction graphs: generation, file I/O and classical
energetics of the antiferromagnetic Ising model defined on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

MAX_RESTARTS = 20000


@dataclass(frozen=True)
class RegularGraph:
    """Unweighted k-regular graph with 0-based node indices.

    Edges are stored as a canonically sorted tuple of (i, j) pairs with
    i < j.  Validation enforces uniform degree, no self-loops and no
    duplicate edges.
    """

    n: int
    edges: tuple
    degree: int = 3

    def __post_init__(self):
        edges = tuple(sorted((min(i, j), max(i, j)) for i, j in self.edges))
        object.__setattr__(self, "edges", edges)
        if self.n < 1:
            raise ValidationError("graph must have at least one node")
        if (self.n * self.degree) % 2 != 0:
            raise ValidationError(
                f"n*degree must be even, got n={self.n}, degree={self.degree}"
            )
        deg = np.zeros(self.n, dtype=int)
        seen = set()
        for i, j in edges:
            if i == j:
                raise ValidationError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"edge ({i},{j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise ValidationError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
            deg[i] += 1
            deg[j] += 1
        bad = np.nonzero(deg != self.degree)[0]
        if bad.size:
            raise ValidationError(
                f"node {bad[0]} has degree {deg[bad[0]]}, expected {self.degree}"
            )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbor_array(self) -> np.ndarray:
        """(n, degree) array of neighbor indices, rows sorted ascending."""
        nbr = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbr[i].append(j)
            nbr[j].append(i)
        return np.array([sorted(row) for row in nbr], dtype=np.int64)

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)


def generate_random_regular(n: int, k: int = 3, seed: int = 0) -> RegularGraph:
    """Sample a random k-regular graph via the configuration (pairing) model.

    Stubs are paired uniformly at random; any pairing containing a
    self-loop or multi-edge triggers a full restart.  Deterministic for a
    fixed seed.
    """
    if n <= k:
        raise ValidationError(f"need n > k, got n={n}, k={k}")
    if (n * k) % 2 != 0:
        raise ValidationError(
            f"n*k must be even (handshake parity), got n={n}, k={k}"
        )
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), k)
    for _ in range(MAX_RESTARTS):
        perm = rng.permutation(stubs)
        a, b = perm[0::2], perm[1::2]
        if np.any(a == b):
            continue
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            continue
        edges = list(zip(lo.tolist(), hi.tolist()))
        return RegularGraph(n=n, edges=tuple(edges), degree=k)
    raise ValidationError(
        f"configuration model failed to produce a simple graph after "
        f"{MAX_RESTARTS} restarts (n={n}, k={k})"
    )


def serialize_graph(g: RegularGraph) -> str:
    """Edge-list text format: 'N M' header then M sorted 'i j' lines."""
    lines = [f"{g.n} {g.n_edges}"]
    lines.extend(f"{i} {j}" for i, j in g.edges)
    return "\n".join(lines) + "\n"


def parse_graph(text: str, degree: int | None = None) -> RegularGraph:
    """Parse the edge-list format; inverse of serialize_graph.

    Comment lines start with '#'.  Degree is inferred from the edge list
    unless given explicitly.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected two fields, got {raw!r}")
        try:
            rows.append((lineno, int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValidationError(f"line {lineno}: non-integer field in {raw!r}")
    if not rows:
        raise ValidationError("empty graph file")
    _, n, m = rows[0]
    edges = [(i, j) for _, i, j in rows[1:]]
    if len(edges) != m:
        raise ValidationError(
            f"header declares {m} edges but file contains {len(edges)}"
        )
    for lineno, i, j in rows[1:]:
        if i == j:
            raise ValidationError(f"line {lineno}: self-loop {i} {j}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValidationError(f"line {lineno}: node index out of range")
    if degree is None:
        if n == 0 or m == 0:
            raise ValidationError("cannot infer degree from empty graph")
        if (2 * m) % n != 0:
            raise ValidationError(f"edge count {m} not consistent with a regular graph")
        degree = 2 * m // n
    return RegularGraph(n=n, edges=tuple(edges), degree=degree)


def _check_assignment(g: RegularGraph, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s)
    if s.shape != (g.n,):
        raise ValidationError(
            f"assignment length {s.shape} does not match graph with n={g.n}"
        )
    if not np.all(np.abs(s) == 1):
        raise ValidationError("assignment entries must be +-1")
    return s


def cut_size(g: RegularGraph, s) -> int:
    """Number of edges whose endpoints carry opposite spin values."""
    s = _check_assignment(g, s)
    e = g.edge_array()
    return int(np.count_nonzero(s[e[:, 0]] != s[e[:, 1]]))


def config_energy(g: RegularGraph, s, J: float = 1.0) -> float:
    """Classical Ising energy J * (|edges| - 2*cut) of an assignment.

    Equals the eigenvalue of the AF Hamiltonian with coupling J per
    undirected edge; the ferromagnetic maximum is J*n*degree/2.
    """
    if J <= 0:
        raise ValidationError("J must be positive (antiferromagnetic model)")
    return J * (g.n_edges - 2 * cut_size(g, s))
