import numpy as np
import pytest

from itwa_engine.errors import ValidationError
from itwa_engine.graphs import (
    RegularGraph,
    config_energy,
    cut_size,
    generate_random_regular,
    parse_graph,
    serialize_graph,
)

K4_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def k4():
    return RegularGraph(n=4, edges=K4_EDGES, degree=3)


def test_regular_graph_validation():
    with pytest.raises(ValidationError):  # degree mismatch
        RegularGraph(n=4, edges=K4_EDGES[:-1], degree=3)
    with pytest.raises(ValidationError):  # self-loop
        RegularGraph(n=2, edges=((0, 0),), degree=1)
    with pytest.raises(ValidationError):  # duplicate edge
        RegularGraph(n=2, edges=((0, 1), (1, 0)), degree=2)
    with pytest.raises(ValidationError):  # parity
        RegularGraph(n=3, edges=(), degree=3)


def test_edges_canonicalized():
    g = RegularGraph(n=4, edges=tuple(reversed([(j, i) for i, j in K4_EDGES])), degree=3)
    assert g.edges == K4_EDGES
    nbr = g.neighbor_array()
    assert nbr.shape == (4, 3)
    assert list(nbr[0]) == [1, 2, 3]


def test_generate_random_regular_is_simple_and_deterministic():
    for n in (8, 14, 20):
        g = generate_random_regular(n, k=3, seed=42)
        deg = np.zeros(n, dtype=int)
        for i, j in g.edges:
            assert i < j
            deg[i] += 1
            deg[j] += 1
        assert np.all(deg == 3)
    a = generate_random_regular(16, seed=5)
    b = generate_random_regular(16, seed=5)
    c = generate_random_regular(16, seed=6)
    assert a.edges == b.edges
    assert a.edges != c.edges


def test_generate_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        generate_random_regular(3, k=3, seed=0)  # n <= k
    with pytest.raises(ValidationError):
        generate_random_regular(7, k=3, seed=0)  # odd stub count


def test_generate_n4_is_always_k4():
    # only one simple 3-regular graph on 4 vertices
    for seed in range(10):
        g = generate_random_regular(4, k=3, seed=seed)
        assert g.edges == K4_EDGES


def test_generate_n6_reaches_both_isomorphism_classes():
    # 3-regular on 6 vertices: K_{3,3} (triangle-free) or the prism (2 triangles)
    def n_triangles(g):
        adj = np.zeros((g.n, g.n), dtype=int)
        for i, j in g.edges:
            adj[i, j] = adj[j, i] = 1
        return int(np.trace(adj @ adj @ adj)) // 6

    counts = {n_triangles(generate_random_regular(6, seed=s)) for s in range(60)}
    assert counts == {0, 2}


def test_cut_size_flip_invariance():
    g = generate_random_regular(14, seed=3)
    rng = np.random.default_rng(0)
    s = rng.choice([-1, 1], size=g.n)
    assert cut_size(g, s) == cut_size(g, -s)


def test_config_energy_parity():
    # E/J = M - 2*cut is always an integer with the parity of M = 3n/2
    g = generate_random_regular(10, seed=21)
    m = len(g.edges)
    rng = np.random.default_rng(4)
    for _ in range(20):
        s = rng.choice([-1, 1], size=g.n)
        e = config_energy(g, s, J=1.0)
        assert np.isclose(e, round(e))
        assert (round(e) - m) % 2 == 0


def test_serialize_parse_round_trip():
    g = generate_random_regular(12, seed=1)
    text = serialize_graph(g)
    g2 = parse_graph(text)
    assert g2.n == g.n and g2.edges == g.edges and g2.degree == 3


def test_parse_accepts_comments_and_blank_lines():
    text = "# a comment\n4 6\n\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n"
    g = parse_graph(text)
    assert g.edges == K4_EDGES


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ValidationError, match="line 3"):
        parse_graph("4 6\n0 1\n0 x\n")
    with pytest.raises(ValidationError, match="line 2"):
        parse_graph("4 1\n1 1\n")
    with pytest.raises(ValidationError, match="declares"):
        parse_graph("4 6\n0 1\n")
    with pytest.raises(ValidationError):
        parse_graph("")


def test_cut_size_and_energy_k4():
    g = k4()
    # 2-2 bipartition: maximum cut of K4 is 4, energy J(6 - 8) = -2J
    s = np.array([1, 1, -1, -1])
    assert cut_size(g, s) == 4
    assert config_energy(g, s) == -2.0
    # ferromagnetic configuration sits at the top of the spectrum, 3JN/2
    all_up = np.ones(4, dtype=int)
    assert cut_size(g, all_up) == 0
    assert config_energy(g, all_up, J=2.0) == 12.0  # 3*J*N/2


def test_energy_equals_edge_sum():
    g = generate_random_regular(10, seed=9)
    rng = np.random.default_rng(0)
    for _ in range(10):
        s = rng.choice([-1, 1], size=10)
        direct = sum(s[i] * s[j] for i, j in g.edges)
        assert config_energy(g, s) == direct


def test_assignment_validation():
    g = k4()
    with pytest.raises(ValidationError):
        cut_size(g, np.array([1, -1, 1]))
    with pytest.raises(ValidationError):
        cut_size(g, np.array([1, -1, 0, 1]))
    with pytest.raises(ValidationError):
        config_energy(g, np.ones(4, dtype=int), J=-1.0)
