import itertools

import pytest
from hypothesis import given, strategies as st

from btcoh.arrangement import (HyperplaneRep, canonical_rep, circuits, count_H,
                               projective_point,
                               coverage_gaps, enumerate_H, rank_mod, stratify,
                               working_arrangement)
from btcoh.building import GlobalParams, ball_complex


def brute_count_H(d, p, n):
    q = p ** n
    unimodular = sum(1 for v in itertools.product(range(q), repeat=d + 1)
                     if any(x % p for x in v))
    return unimodular // (q // p * (p - 1))


@pytest.mark.parametrize("d,p,n,expected", [(1, 2, 1, 3), (2, 2, 1, 7), (1, 2, 2, 6),
                                            (1, 3, 2, 12), (2, 2, 2, 28), (1, 2, 3, 12)])
def test_count_H(d, p, n, expected):
    assert count_H(d, p, n) == expected == brute_count_H(d, p, n)
    H = enumerate_H(d, p, n)
    assert len(H) == expected
    assert len({h.coords for h in H}) == expected
    assert all(canonical_rep(h.coords, p, n) == h.coords for h in H)


@given(st.lists(st.integers(0, 26), min_size=3, max_size=3), st.integers(1, 26))
def test_canonical_rep_unit_invariance(v, u):
    p, n = 3, 3
    if not any(x % p for x in v) or u % p == 0:
        return
    assert canonical_rep([u * x for x in v], p, n) == canonical_rep(v, p, n)


def test_canonical_rep_rejects_non_unimodular():
    with pytest.raises(ValueError):
        canonical_rep((2, 4), 2, 3)


def test_rank_mod():
    assert rank_mod([(1, 1, 0), (0, 1, 1), (1, 0, 1)], 2) == 2
    assert rank_mod([(1, 1, 0), (0, 1, 1), (1, 0, 1)], 3) == 3


@pytest.fixture(scope="module")
def d2_setup():
    ball = ball_complex(GlobalParams(2, 2), 1)
    W = working_arrangement(ball.params, [ball.simplex(k) for k in ball.all_simplices()])
    return ball, W


def test_stratification_partitions(d2_setup):
    ball, W = d2_setup
    for key in ball.all_simplices():
        S = stratify(W.hyperplanes, ball.simplex(key))
        assert len(S.strata) == len(S.sigma.type)
        assert sorted(a for s in S.strata for a in s) == list(range(len(W)))
        for i, stratum in enumerate(S.strata):
            assert all(S.stratum_of[a] == i and any(S.projection[a]) for a in stratum)
            assert all(len(S.projection[a]) == S.sigma.type[i] for a in stratum)


def test_working_arrangement_faithful_and_minimal_level(d2_setup):
    ball, W = d2_setup
    simplices = [ball.simplex(k) for k in ball.all_simplices()]
    assert all(not coverage_gaps(stratify(W.hyperplanes, s)) for s in simplices)
    coarse = enumerate_H(2, 2, W.level - 1)
    assert any(coverage_gaps(stratify(coarse, s)) for s in simplices)
    full = working_arrangement(ball.params, simplices, mode="full")
    assert len(full) == count_H(2, 2, full.level) and full.level == W.level


@pytest.mark.parametrize("d,p,n", [(1, 2, 1), (1, 2, 2), (1, 3, 1)])
def test_working_arrangement_tree(d, p, n):
    ball = ball_complex(GlobalParams(d, p), n)
    simplices = [ball.simplex(k) for k in ball.all_simplices()]
    W = working_arrangement(ball.params, simplices)
    assert W.level == n + 1
    assert all(not coverage_gaps(stratify(W.hyperplanes, s)) for s in simplices)


def brute_circuits(vecs, labels, p):
    out = []
    for r in range(1, len(vecs[labels[0]]) + 2):
        for C in itertools.combinations(labels, r):
            if rank_mod([vecs[a] for a in C], p) < r and all(
                    rank_mod([vecs[a] for a in C if a != b], p) == r - 1 for b in C):
                out.append(C)
    return out


def test_circuits_complete_and_minimal(d2_setup):
    ball, W = d2_setup
    for key in [(0,), ball.simplices[1][0], ball.simplices[2][0]]:
        S = stratify(W.hyperplanes, ball.simplex(key))
        vecs = dict(enumerate(S.projection))
        for labels, found in zip(S.strata, circuits(S)):
            expected = brute_circuits(vecs, list(labels), 2) if labels else []
            assert sorted(found) == sorted(expected)


def test_reordering_keeps_hyperplanes(d2_setup):
    _, W = d2_setup
    perm = list(reversed(range(len(W))))
    R = W.reordered(perm, "reversed")
    assert R.order == "reversed" and set(R.hyperplanes) == set(W.hyperplanes)
    assert isinstance(R.hyperplanes[0], HyperplaneRep)


@pytest.mark.parametrize("d,p", [(1, 2), (1, 3), (2, 2), (2, 3)])
def test_standard_vertex_sees_residue_points(d, p):
    # at s_0 the chain is O > pO: every hyperplane of H_1 lies in the single
    # stratum and projects to its own point of P^d(F_p)
    ball = ball_complex(GlobalParams(d, p), 0)
    H = enumerate_H(d, p, 1)
    S = stratify(H, ball.simplex((0,)))
    assert S.strata == (tuple(range(len(H))),)
    assert [projective_point(S.projection[a], p) for a in range(len(H))] == \
        [projective_point(h.coords, p) for h in H]
