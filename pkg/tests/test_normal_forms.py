from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from btcoh.normal_forms import (INTEGERS, RATIONALS, RingDescriptor, determinant,
                                elementary_divisors, factorize, field_rank, hnf_rows,
                                howell_form, inverse, is_prime, kernel_mod, matmul,
                                prime_field, quotient_invariants, rank_and_kernel,
                                residue_ring, smith_normal_form, solve_in_lattice,
                                span_invariants, sparse_rank, valuation)


def matrices(max_rows=4, max_cols=4, lo=-6, hi=6):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                               min_size=r, max_size=r)))


def brute_rank_mod(M, q):
    """Rank over F_q by counting the image: |image| = q^rank."""
    ncols = len(M[0])
    image = {tuple(sum(x * row[j] for x, row in zip(coef, M)) % q for j in range(ncols))
             for coef in product(range(q), repeat=len(M))}
    r = 0
    while q ** r < len(image):
        r += 1
    return r


# ------------------------------------------------------------------ rings

def test_ring_parsing_round_trip():
    for text in ("Q", "Z", "F2", "F7", "Z/9", "Z/4"):
        assert RingDescriptor.parse(text).name == text
    assert prime_field(3).is_field and not residue_ring(9).is_field
    assert RATIONALS.is_field and not INTEGERS.is_field


@pytest.mark.parametrize("bad", ["F4", "Z/1", "R", "Fx"])
def test_ring_parsing_rejects(bad):
    with pytest.raises(ValueError):
        RingDescriptor.parse(bad)


def test_valuation_and_factorize():
    assert valuation(48, 2) == 4
    assert valuation(Fraction(9, 8), 2) == -3
    with pytest.raises(ValueError):
        valuation(0, 2)
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


# ------------------------------------------------------------------- Smith

def test_smith_textbook_example():
    M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    S = smith_normal_form(M)
    assert S.divisors == (2, 6, 12)
    assert matmul(matmul(S.U, M), S.V) == [list(r) for r in S.D]
    assert abs(determinant(S.U)) == 1 and abs(determinant(S.V)) == 1


def test_smith_rank_deficient():
    assert smith_normal_form([[1, 2], [2, 4]]).divisors == (1,)
    assert elementary_divisors([[0, 0], [0, 0]], 2) == []


@given(matrices())
def test_smith_properties(M):
    S = smith_normal_form(M)
    assert matmul(matmul(S.U, M), S.V, len(M[0])) == [list(r) for r in S.D]
    d = S.divisors
    assert all(x > 0 for x in d)
    assert all(b % a == 0 for a, b in zip(d, d[1:]))
    assert sorted(elementary_divisors(M, len(M[0]))) == sorted(d)
    assert S.rank == field_rank(M, RATIONALS, len(M[0]))


@given(matrices(3, 3))
def test_smith_determinant(M):
    if len(M) != len(M[0]):
        return
    det = determinant(M)
    S = smith_normal_form(M)
    prod = 1
    for x in S.divisors:
        prod *= x
    assert (prod if S.rank == len(M) else 0) == abs(det)


@given(matrices(4, 4))
def test_rank_mod_matches_image_count(M):
    for q in (2, 3):
        assert field_rank(M, prime_field(q), len(M[0])) == brute_rank_mod(M, q)


@given(matrices(4, 5))
def test_sparse_rank_agrees(M):
    rows = [{j: x for j, x in enumerate(r) if x} for r in M]
    for ring in (RATIONALS, prime_field(2), prime_field(5)):
        assert sparse_rank(rows, ring) == field_rank(M, ring, len(M[0]))


@given(matrices(4, 5))
def test_kernel_over_fields(M):
    n = len(M[0])
    for ring in (RATIONALS, prime_field(3)):
        r, ker = rank_and_kernel(M, ring, n)
        assert r + len(ker) == n
        for v in ker:
            assert all(ring.reduce(sum(a * b for a, b in zip(row, v))) == 0 for row in M)


def test_kernel_requires_field():
    with pytest.raises(ValueError):
        rank_and_kernel([[1]], INTEGERS, 1)


def test_inverse():
    A = [[2, 1], [7, 4]]
    assert matmul(A, inverse(A)) == [[1, 0], [0, 1]]


# ---------------------------------------------------------------- lattices

@given(matrices(4, 3))
def test_hnf_same_lattice(M):
    H = hnf_rows(M, len(M[0]))
    assert hnf_rows(H, len(M[0])) == H
    for row in M:
        assert solve_in_lattice(H, row) is not None
    for row in H:
        assert solve_in_lattice(hnf_rows(M, len(M[0])), row) is not None


def test_quotient_invariants():
    assert quotient_invariants([[1, 0], [0, 1]], [[2, 0], [0, 3]], 2) == (0, [6])
    assert quotient_invariants([[1, 0], [0, 1]], [[4, 0]], 2) == (1, [4])


# ------------------------------------------------------------ residue rings

def test_kernel_mod_examples():
    assert kernel_mod([[1], [1]], 2, 2, 1) == [[1, 1]]
    assert span_invariants([[2]], 4, 1) == (2,)
    assert span_invariants([[3]], 9, 1) == (3,)


def test_howell_canonical_under_row_operations():
    assert howell_form([[2, 0], [0, 2]], 4, 2) == howell_form([[2, 2], [0, 2]], 4, 2)


@given(matrices(3, 3, 0, 8), st.integers(0, 7), st.sampled_from([4, 8, 9, 12]))
def test_howell_canonicity(M, c, m):
    n = len(M[0])
    base = howell_form(M, m, n)
    mixed = [list(r) for r in M]
    if len(mixed) > 1:
        mixed[0] = [(a + c * b) % m for a, b in zip(mixed[0], mixed[1])]
    mixed.reverse()
    assert howell_form(mixed, m, n) == base


@given(matrices(3, 3, 0, 11), st.sampled_from([(4, 9), (8, 3), (4, 25)]))
def test_span_invariants_split_by_crt(M, mn):
    a, b = mn
    n = len(M[0])
    whole = span_invariants(M, a * b, n)
    size = 1
    for x in whole:
        size *= x
    sa = span_invariants(M, a, n)
    sb = span_invariants(M, b, n)
    pa = pb = 1
    for x in sa:
        pa *= x
    for x in sb:
        pb *= x
    assert size == pa * pb


@given(matrices(3, 3, 0, 8), st.sampled_from([4, 9, 8]))
def test_kernel_mod_annihilates(M, m):
    n = len(M[0])
    for x in kernel_mod(M, m, len(M), n):
        assert all(sum(x[i] * M[i][j] for i in range(len(M))) % m == 0 for j in range(n))
