import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from btcoh.building import (Apartment, BallTooLarge, GlobalParams, apartment_f_value,
                            ball_complex, bfs_distances, canonicalize, contains_lattice,
                            contiguous_simplices, distance, normalize_simplex,
                            sample_apartments)
from btcoh.normal_forms import determinant, matmul


def diag(*exps, p=2):
    n = len(exps)
    return [[p ** exps[i] if i == j else 0 for j in range(n)] for i in range(n)]


def tree_ball_size(p, n):
    return 1 + (p + 1) * (p ** n - 1) // (p - 1)


unimodular2 = st.lists(st.integers(-3, 3), min_size=4, max_size=4).map(
    lambda e: [[e[0], e[1]], [e[2], e[3]]]).filter(lambda m: abs(determinant(m)) == 1)


# ---------------------------------------------------------------- classes

def test_canonical_form_examples():
    assert canonicalize([[1, 0], [0, 1]], 2).rep == ((1, 0), (0, 1))
    assert canonicalize([[4, 0], [0, 8]], 2) == canonicalize([[1, 0], [0, 2]], 2)
    # column operations do not change the class
    assert canonicalize([[1, 1], [0, 2]], 2) == canonicalize([[1, 0], [0, 2]], 2)


@given(st.lists(st.integers(-5, 5), min_size=4, max_size=4), st.integers(-2, 2),
       unimodular2)
def test_canonical_invariance(e, s, g):
    M = [[e[0], e[1]], [e[2], e[3]]]
    if determinant(M) == 0:
        return
    p = 3
    c = canonicalize(M, p)
    scaled = [[x * Fraction(p) ** s for x in r] for r in M]
    assert canonicalize(scaled, p) == c
    assert canonicalize(matmul(M, g), p) == c


# --------------------------------------------------------------- distance

def test_distance_examples():
    I = canonicalize(diag(0, 0), 2)
    assert distance(I, canonicalize(diag(0, 3), 2)) == 3
    assert distance(I, canonicalize(diag(2, 2), 2)) == 0
    assert distance(canonicalize(diag(0, 1, 3), 2), canonicalize(diag(0, 0, 0), 2)) == 3


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3),
       st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_distance_on_diagonal_lattices(a, b):
    p = 2
    d = [x - y for x, y in zip(a, b)]
    assert distance(canonicalize(diag(*a, p=p), p), canonicalize(diag(*b, p=p), p)) \
        == max(d) - min(d)


def _lattices(p):
    return st.lists(st.integers(-p ** 2, p ** 2), min_size=4, max_size=4).map(
        lambda e: [[e[0], e[1]], [e[2], e[3]]]).filter(lambda m: determinant(m) != 0)


@given(_lattices(2), _lattices(2), _lattices(2), unimodular2)
def test_distance_metric_properties(A, B, C, g):
    p = 2
    a, b, c = (canonicalize(M, p) for M in (A, B, C))
    assert distance(a, a) == 0
    assert distance(a, b) == distance(b, a)
    assert distance(a, c) <= distance(a, b) + distance(b, c)
    assert distance(canonicalize(matmul(g, A), p), canonicalize(matmul(g, B), p)) \
        == distance(a, b)


@pytest.mark.parametrize("d,p,n", [(1, 2, 3), (1, 3, 2), (2, 2, 1)])
def test_distance_matches_bfs(d, p, n):
    ball = ball_complex(GlobalParams(d, p), n)
    adj = ball.adjacency()
    for i, v in enumerate(ball.vertices):
        bfs = bfs_distances(adj, i)
        assert all(bfs[j] == distance(v, w) for j, w in enumerate(ball.vertices))


# ------------------------------------------------------------------ balls

@pytest.mark.parametrize("p,n", [(2, 0), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2)])
def test_tree_ball_counts(p, n):
    ball = ball_complex(GlobalParams(1, p), n)
    V = tree_ball_size(p, n)
    assert ball.counts == ({0: V, 1: V - 1} if n else {0: 1})


def test_d2_star_counts():
    # 14 = points + lines of P^2(F_2); 21 point-line incidences
    assert ball_complex(GlobalParams(2, 2), 1).counts == {0: 15, 1: 35, 2: 21}


def test_ball_members_within_radius():
    P = GlobalParams(2, 2)
    ball = ball_complex(P, 2)
    assert ball.counts == {0: 113, 1: 343, 2: 231}
    assert all(distance(P.standard_vertex, v) <= 2 for v in ball.vertices)


def test_size_cap():
    with pytest.raises(BallTooLarge):
        ball_complex(GlobalParams(2, 2), 2, cap=100)


# --------------------------------------------------------------- simplices

def test_normalize_edge():
    P = GlobalParams(1, 2)
    s0 = P.standard_vertex
    v = canonicalize(diag(0, 1), 2)
    s = normalize_simplex([v, s0])
    assert s.vertices == (s0, v) and s.type == (1, 1)
    assert s.chain == (((1, 0), (0, 1)), ((1, 0), (0, 2)))
    # adapted blocks are N_0, N_1 with M_1 = N_1 + pN_0
    assert s.adapted.vectors == ((0, 1), (1, 0))
    assert normalize_simplex([s0, canonicalize(diag(0, 2), 2)]) is None


def test_normalize_type_two_edge():
    s0 = GlobalParams(2, 2).standard_vertex
    s = normalize_simplex([s0, canonicalize(diag(0, 1, 1), 2)])
    assert sorted(s.type) == [1, 2]
    assert sum(s.type) == 3


@pytest.mark.parametrize("d,p,n", [(1, 2, 2), (1, 3, 1), (2, 2, 1), (2, 3, 1)])
def test_adapted_basis_reconstructs_chain(d, p, n):
    ball = ball_complex(GlobalParams(d, p), n)
    for key in ball.all_simplices():
        s = ball.simplex(key)
        F = s.adapted
        assert F.blocks == s.type
        for i, H in enumerate(s.chain):
            assert F.lattice(i, p) == H
        for a, b in zip(s.chain, s.chain[1:]):
            assert contains_lattice(a, b, p)


@given(st.permutations(range(3)))
def test_normalize_order_independent(perm):
    ball = ball_complex(GlobalParams(2, 2), 1)
    for key in ball.simplices[2]:
        vs = [ball.vertices[i] for i in key]
        assert normalize_simplex([vs[i] for i in perm]) == ball.simplex(key)


def test_contiguous_simplices_of_vertex_form_star():
    P = GlobalParams(2, 2)
    ball = ball_complex(P, 1)
    tau = ball.simplex((ball.index[P.standard_vertex.rep],))
    edges = contiguous_simplices(tau, 1)
    assert len(edges) == 35
    assert all(normalize_simplex(list(e.vertices) + [P.standard_vertex]) is not None
               for e in edges)


# --------------------------------------------------------------- apartments

def test_standard_apartment_values():
    A = Apartment.standard(2, 3)
    for x in itertools.product(range(-2, 3), repeat=2):
        pt = (0,) + x
        assert apartment_f_value(A, pt) == max(pt) - min(pt)


@pytest.mark.parametrize("d,p", [(1, 2), (2, 3)])
def test_sampled_apartments_are_frames(d, p):
    for A in sample_apartments(d, p, 5, seed=1):
        s0 = GlobalParams(d, p).standard_vertex
        for x in itertools.product(range(-2, 3), repeat=d):
            pt = (0,) + x
            assert apartment_f_value(A, pt) == distance(s0, A.vertex(pt))
