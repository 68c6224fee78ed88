"""Lattice classes, simplices and balls in the Bruhat-Tits building of
PGL_{d+1}(Q_p).

A vertex is stored through a canonical generator matrix: upper triangular,
columns generating a lattice M with p^N O^{d+1} <= M <= O^{d+1}, M not inside
pO^{d+1}, p-power diagonal, and entries of row i reduced modulo the diagonal
entry of row i. Simplices are stored as decreasing chains
M_0 > M_1 > ... > M_k > pM_0.
"""
from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .normal_forms import (determinant, inverse, is_prime, matmul, rref,
                           prime_field, smith_normal_form, valuation)

DEFAULT_SIZE_CAP = 500_000


class BallTooLarge(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"ball too large: reached {count} simplices (cap {cap})")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class GlobalParams:
    d: int
    p: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")

    @property
    def n(self) -> int:
        return self.d + 1

    @property
    def standard_vertex(self) -> "LatticeClass":
        return LatticeClass(tuple(tuple(int(i == j) for j in range(self.n))
                                  for i in range(self.n)), self.p)


@dataclass(frozen=True, order=True)
class LatticeClass:
    rep: tuple
    p: int = field(compare=False)

    @property
    def dim(self) -> int:
        return len(self.rep)

    def matrix(self) -> list:
        return [list(r) for r in self.rep]

    def to_json(self) -> list:
        return [[str(x) for x in r] for r in self.rep]

    def __repr__(self):
        return f"LatticeClass({[list(r) for r in self.rep]})"


def _split_unit(x: Fraction, p: int) -> tuple[int, Fraction]:
    v = valuation(x, p)
    return v, x / Fraction(p) ** v


def _mod_pa(x: Fraction, p: int, a: int) -> int:
    """x in Z_(p) reduced to an integer in [0, p^a)."""
    q = p ** a
    if q == 1:
        return 0
    return x.numerator * pow(x.denominator, -1, q) % q


def _column_hnf(cols: list, p: int) -> list:
    """Triangularize column generators over Z_(p). Returns the n pivot columns
    (column i has zeros below row i, diagonal a power of p)."""
    n = len(cols[0])
    remaining = [list(c) for c in cols if any(c)]
    placed = [None] * n
    for i in range(n - 1, -1, -1):
        best = None
        for idx, c in enumerate(remaining):
            if c[i] != 0:
                v = valuation(c[i], p)
                if best is None or v < best[0]:
                    best = (v, idx)
        if best is None:
            raise ValueError("not a lattice")
        v, idx = best
        piv = remaining.pop(idx)
        unit = piv[i] / Fraction(p) ** v
        piv = [x / unit for x in piv]
        for c in remaining:
            if c[i] != 0:
                f = c[i] / piv[i]
                for r in range(n):
                    c[r] -= f * piv[r]
        placed[i] = piv
    return placed


def _reduce_columns(placed: list, p: int) -> tuple:
    n = len(placed)
    exps = [valuation(placed[i][i], p) for i in range(n)]
    for i in range(n - 2, -1, -1):
        for j in range(i + 1, n):
            x = placed[j][i]
            if x == 0:
                continue
            r = _mod_pa(x, p, exps[i])
            q = (x - r) / placed[i][i]
            if q:
                placed[j] = [a - q * b for a, b in zip(placed[j], placed[i])]
    rows = []
    for r in range(n):
        row = []
        for j in range(n):
            x = placed[j][r]
            if x.denominator != 1:
                raise AssertionError("non-integral canonical form")
            row.append(x.numerator)
        rows.append(tuple(row))
    return tuple(rows)


def _columns(gens) -> list:
    n = len(gens)
    m = len(gens[0]) if n else 0
    return [[Fraction(gens[r][c]) for r in range(n)] for c in range(m)]


def lattice_hnf(gens, p: int) -> tuple:
    """Reduced column Hermite form over Z_(p) of an integral lattice (no
    homothety normalization)."""
    placed = _column_hnf(_columns(gens), p)
    if any(x != 0 and valuation(x, p) < 0 for c in placed for x in c):
        raise ValueError("lattice is not integral")
    return _reduce_columns(placed, p)


def canonicalize(gens, p: int) -> LatticeClass:
    """Canonical representative of the homothety class of the lattice whose
    generators are the columns of ``gens`` (rational entries, full rank)."""
    placed = _column_hnf(_columns(gens), p)
    m0 = min(valuation(x, p) for c in placed for x in c if x != 0)
    if m0:
        s = Fraction(p) ** (-m0)
        placed = [[x * s for x in c] for c in placed]
    return LatticeClass(_reduce_columns(placed, p), p)


def coordinates(H, v) -> list:
    """Coordinates of the vector v in the basis given by the columns of the
    upper-triangular matrix H."""
    n = len(H)
    y = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(v[i]) - sum(H[i][j] * y[j] for j in range(i + 1, n))
        y[i] = s / H[i][i]
    return y


def contains(H, v, p: int) -> bool:
    return all(x == 0 or valuation(x, p) >= 0 for x in coordinates(H, v))


def contains_lattice(H, K, p: int) -> bool:
    """Whether the lattice with generator columns K lies in the one of H."""
    n = len(K)
    return all(contains(H, [K[r][c] for r in range(n)], p) for c in range(len(K[0])))


def relative_exponents(H0, H1, p: int) -> list[int]:
    """Exponents (e_1 <= ... <= e_n) of the invariant factors of the lattice
    of H1 relative to the lattice of H0, via the Smith form."""
    R = matmul(inverse([list(r) for r in H0]), [list(r) for r in H1])
    N = max((-valuation(x, p) for r in R for x in r if x != 0), default=0)
    N = max(N, 0)
    scale = Fraction(p) ** N
    Z = []
    for r in R:
        row = []
        for x in r:
            y = x * scale
            if y.denominator != 1:
                # denominators prime to p are units of Z_(p); clear them
                raise AssertionError("relative matrix is not p-integral")
            row.append(y.numerator)
        Z.append(row)
    divs = smith_normal_form(Z, len(Z), transforms=False).divisors
    if len(divs) != len(Z):
        raise ValueError("dimension mismatch or singular lattice")
    return sorted(valuation(x, p) - N for x in divs)


def distance(M0: LatticeClass, M1: LatticeClass) -> int:
    """Combinatorial distance: e_max - e_min of the relative invariant factors."""
    if M0.dim != M1.dim or M0.p != M1.p:
        raise ValueError("dimension mismatch")
    if M0.rep == M1.rep:
        return 0
    e = relative_exponents(M0.rep, M1.rep, M0.p)
    return e[-1] - e[0]


# ------------------------------------------------------------------ simplices

@dataclass(frozen=True)
class Simplex:
    """A simplex with a decreasing chain certificate.

    ``vertices`` is sorted by canonical representative. ``chain`` lists the
    representative lattices M_0 > ... > M_k (integral column Hermite forms)
    with M_0 the class of ``vertices[0]``; ``chain_vertex[i]`` is the index in
    ``vertices`` of the class of M_i. ``type`` is (e_0, ..., e_k) with
    e_i = dim_F M_i/M_{i+1}, M_{k+1} = pM_0.
    """

    vertices: tuple
    chain: tuple
    chain_vertex: tuple
    type: tuple
    p: int

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def n(self) -> int:
        return len(self.chain[0])

    def increasing_chain(self) -> tuple:
        """The chain in the increasing convention pM_0 < M_k < ... < M_0."""
        return tuple(reversed(self.chain))

    def to_json(self) -> dict:
        return {"vertices": [v.to_json() for v in self.vertices],
                "type": list(self.type)}

    @cached_property
    def adapted(self) -> "AdaptedBasis":
        return adapted_basis(self)


def normalize_simplex(classes) -> Simplex | None:
    classes = sorted(set(classes))
    if not classes:
        raise ValueError("empty vertex set")
    p = classes[0].p
    n = classes[0].dim
    if len(classes) > n:
        return None
    L0 = classes[0].rep
    L0inv = inverse([list(r) for r in L0])
    members = []
    for idx, c in enumerate(classes):
        R = matmul(L0inv, [list(r) for r in c.rep])
        b = min(valuation(x, p) for r in R for x in r if x != 0)
        scale = Fraction(p) ** (-b)
        gens = [[x * scale for x in r] for r in c.rep]
        H = lattice_hnf(gens, p)
        pL0 = [[p * x for x in r] for r in L0]
        if not contains_lattice(H, pL0, p):
            return None
        vdet = valuation(determinant([list(r) for r in H]), p)
        members.append((vdet, idx, H))
    members.sort()
    dets = [m[0] for m in members]
    if len(set(dets)) != len(dets):
        return None
    for (_, _, A), (_, _, B) in zip(members, members[1:]):
        if not contains_lattice(A, B, p):
            return None
    top = dets[0] + n
    typ = tuple(b - a for a, b in zip(dets, dets[1:] + [top]))
    return Simplex(tuple(classes), tuple(m[2] for m in members),
                   tuple(m[1] for m in members), typ, p)


@dataclass(frozen=True)
class AdaptedBasis:
    """Basis f_0..f_d of M_0 (columns of ``F``) split into blocks N_0..N_k with
    M_i = N_i + ... + N_k + p(N_0 + ... + N_{i-1})."""

    vectors: tuple
    blocks: tuple  # block sizes e_0..e_k
    F_inv: tuple

    def block_of(self, j: int) -> int:
        acc = 0
        for b, size in enumerate(self.blocks):
            acc += size
            if j < acc:
                return b
        raise IndexError(j)

    def coords(self, v) -> list:
        return [sum(Fraction(a) * b for a, b in zip(row, v)) for row in self.F_inv]

    def lattice(self, i: int, p: int) -> tuple:
        """Reconstruct M_i from the blocks."""
        n = len(self.vectors)
        start = sum(self.blocks[:i])
        cols = [list(f) if j >= start else [p * x for x in f]
                for j, f in enumerate(self.vectors)]
        return lattice_hnf([[cols[c][r] for c in range(n)] for r in range(n)], p)


def _span_mod(vectors, p: int, n: int) -> list:
    if not vectors:
        return []
    R, _ = rref([list(v) for v in vectors], prime_field(p), n)
    return [list(r) for r in R]


def adapted_basis(sigma: Simplex) -> AdaptedBasis:
    p = sigma.p
    n = sigma.n
    L0 = [list(r) for r in sigma.chain[0]]
    L0inv = inverse(L0)
    spaces = []
    for H in sigma.chain:
        C = matmul(L0inv, [list(r) for r in H])
        vecs = [[int(C[r][c]) % p if C[r][c].denominator == 1 else
                 C[r][c].numerator * pow(C[r][c].denominator, -1, p) % p
                 for r in range(n)] for c in range(n)]
        spaces.append(_span_mod(vecs, p, n))
    spaces.append([])
    k = len(sigma.chain) - 1
    chosen: list = []
    blocks_rev = []
    for i in range(k, -1, -1):
        added = []
        for v in spaces[i]:
            cur = chosen + added
            r_before = len(_span_mod(cur, p, n)) if cur else 0
            if len(_span_mod(cur + [v], p, n)) > r_before:
                added.append(v)
        blocks_rev.append(added)
        chosen = chosen + added
    ordered = []
    sizes = []
    for blk in reversed(blocks_rev):
        ordered.extend(blk)
        sizes.append(len(blk))
    vectors = []
    for w in ordered:
        vectors.append(tuple(sum(L0[r][c] * w[c] for c in range(n)) for r in range(n)))
    F = [[vectors[c][r] for c in range(n)] for r in range(n)]
    Finv = inverse(F)
    return AdaptedBasis(tuple(vectors), tuple(sizes), tuple(map(tuple, Finv)))


# ---------------------------------------------------------------- enumeration

def subspaces(dim: int, p: int) -> list[tuple]:
    """All proper nonzero subspaces of F_p^dim, each as an RREF basis tuple."""
    out = []
    for k in range(1, dim):
        for pivots in itertools.combinations(range(dim), k):
            free = [(r, c) for r, pc in enumerate(pivots) for c in range(pc + 1, dim)
                    if c not in pivots]
            for vals in itertools.product(range(p), repeat=len(free)):
                rows = [[0] * dim for _ in range(k)]
                for r, pc in enumerate(pivots):
                    rows[r][pc] = 1
                for (r, c), v in zip(free, vals):
                    rows[r][c] = v
                out.append(tuple(map(tuple, rows)))
    return out


def _contains_space(big, small, p: int, dim: int) -> bool:
    return len(_span_mod(list(big) + list(small), p, dim)) == len(big)


def vertex_candidates(params: GlobalParams, n: int):
    """Canonical representatives of all classes within distance n of s_0."""
    d1, p = params.n, params.p
    out = []
    for exps in itertools.product(range(n + 1), repeat=d1):
        slots = [(i, j) for i in range(d1) for j in range(i + 1, d1)]
        ranges = [range(p ** exps[i]) for i, _ in slots]
        for vals in itertools.product(*ranges):
            H = [[0] * d1 for _ in range(d1)]
            for i in range(d1):
                H[i][i] = p ** exps[i]
            for (i, j), v in zip(slots, vals):
                H[i][j] = v
            if all(x % p == 0 for r in H for x in r):
                continue
            rep = tuple(map(tuple, H))
            pn = p ** n
            if all(contains(rep, [pn * int(r == c) for r in range(d1)], p) for c in range(d1)):
                out.append(LatticeClass(rep, p))
    out.sort()
    return out


@dataclass
class BallComplex:
    params: GlobalParams
    radius: int
    vertices: list
    distances: list
    simplices: dict  # dim -> sorted list of vertex index tuples

    def __post_init__(self):
        self.index = {v.rep: i for i, v in enumerate(self.vertices)}
        self._simplex_cache: dict = {}

    @property
    def counts(self) -> dict:
        return {k: len(v) for k, v in sorted(self.simplices.items())}

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.simplices.values())

    def adjacency(self) -> dict:
        adj = {i: set() for i in range(len(self.vertices))}
        for a, b in self.simplices.get(1, []):
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def simplex(self, key: tuple) -> Simplex:
        s = self._simplex_cache.get(key)
        if s is None:
            s = normalize_simplex([self.vertices[i] for i in key])
            assert s is not None, key
            self._simplex_cache[key] = s
        return s

    def all_simplices(self):
        for k in sorted(self.simplices):
            yield from self.simplices[k]

    def to_json(self, full: bool = True) -> dict:
        out = {"radius": self.radius, "d": self.params.d, "p": self.params.p,
               "vertices": len(self.vertices),
               "edges": len(self.simplices.get(1, [])),
               "counts": {str(k): v for k, v in self.counts.items()}}
        if full:
            out["vertex_reps"] = [v.to_json() for v in self.vertices]
            out["simplices"] = {str(k): [list(s) for s in v]
                                for k, v in sorted(self.simplices.items())}
        return out


def neighbours_by_subspace(v: LatticeClass, spaces) -> dict:
    """Map each subspace W of M/pM (in the basis of v's columns) to the class
    of pM + lift(W)."""
    p = v.p
    n = v.dim
    H = v.rep
    out = {}
    for W in spaces:
        cols = [[p * H[r][c] for r in range(n)] for c in range(n)]
        for w in W:
            cols.append([sum(H[r][c] * w[c] for c in range(n)) for r in range(n)])
        gens = [[cols[c][r] for c in range(len(cols))] for r in range(n)]
        out[W] = canonicalize(gens, p)
    return out


def _flags(spaces, p: int, dim: int):
    """All chains W_1 > W_2 > ... of proper nonzero subspaces (nonempty)."""
    below = {W: [U for U in spaces if len(U) < len(W) and _contains_space(W, U, p, dim)]
             for W in spaces}
    def extend(chain):
        yield chain
        for U in below[chain[-1]]:
            yield from extend(chain + (U,))
    for W in spaces:
        yield from extend((W,))


def ball_complex(params: GlobalParams, n: int, cap: int = DEFAULT_SIZE_CAP) -> BallComplex:
    """B(n): face closure of all simplices containing a vertex at distance
    <= n-1 from s_0; B(0) = {s_0}."""
    p, dim = params.p, params.n
    s0 = params.standard_vertex
    if n == 0:
        return BallComplex(params, 0, [s0], [0], {0: [(0,)]})
    verts = vertex_candidates(params, n)
    index = {v.rep: i for i, v in enumerate(verts)}
    dist = [distance(s0, v) for v in verts]
    spaces = subspaces(dim, p)
    flags = list(_flags(spaces, p, dim))
    found: set = set()
    for i, v in enumerate(verts):
        if dist[i] > n - 1:
            continue
        nb = neighbours_by_subspace(v, spaces)
        for flag in flags:
            simplex = tuple(sorted({i} | {index[nb[W].rep] for W in flag}))
            for r in range(1, len(simplex) + 1):
                for face in itertools.combinations(simplex, r):
                    if face not in found:
                        found.add(face)
                        if len(found) > cap:
                            raise BallTooLarge(len(found), cap)
        if (i,) not in found:
            found.add((i,))
    used = sorted({x for s in found for x in s})
    assert used == list(range(len(verts))), "vertex outside the star closure"
    simplices: dict = {}
    for s in sorted(found):
        simplices.setdefault(len(s) - 1, []).append(s)
    for k in simplices:
        simplices[k].sort()
    return BallComplex(params, n, verts, dist, simplices)


def bfs_distances(adj: dict, source: int) -> dict:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


# ----------------------------------------------------------------- apartments

@dataclass(frozen=True)
class Apartment:
    """Apartment of the basis f_i = sum_j m[i][j] e_j (rows of ``forward``)."""

    forward: tuple
    backward: tuple
    p: int

    @classmethod
    def from_matrix(cls, m, p: int) -> "Apartment":
        m = [[Fraction(x) for x in r] for r in m]
        inv = inverse(m)
        return cls(tuple(map(tuple, m)), tuple(map(tuple, inv)), p)

    @classmethod
    def standard(cls, d: int, p: int) -> "Apartment":
        return cls.from_matrix([[int(i == j) for j in range(d + 1)] for i in range(d + 1)], p)

    def vertex(self, x) -> LatticeClass:
        """Class of the lattice spanned by p^{x_i} f_i."""
        n = len(x)
        cols = [[Fraction(self.p) ** x[i] * self.forward[i][j] for j in range(n)]
                for i in range(n)]
        return canonicalize([[cols[c][r] for c in range(n)] for r in range(n)], self.p)


def apartment_f_value(A: Apartment, x) -> int:
    """max_{i,j}(x_j - v(m~_ij)) - min_{i,j}(v(m_ij) + x_i); zero entries
    (valuation +infinity) drop out."""
    x = [xi - x[0] for xi in x]
    p = A.p
    n = len(x)
    g = max(x[j] - valuation(A.backward[i][j], p)
            for i in range(n) for j in range(n) if A.backward[i][j] != 0)
    h = min(valuation(A.forward[i][j], p) + x[i]
            for i in range(n) for j in range(n) if A.forward[i][j] != 0)
    return g - h


def sample_apartments(d: int, p: int, count: int, seed: int) -> list[Apartment]:
    """The standard apartment followed by ``count - 1`` apartments from random
    integer matrices with entries in [-p^3, p^3] and determinant +-p^k."""
    rng = random.Random(seed)
    bound = p ** 3
    out = [Apartment.standard(d, p)]
    while len(out) < count:
        m = [[rng.randint(-bound, bound) for _ in range(d + 1)] for _ in range(d + 1)]
        det = determinant(m)
        if det == 0:
            continue
        det = abs(int(det))
        while det % p == 0:
            det //= p
        if det != 1:
            continue
        out.append(Apartment.from_matrix(m, p))
    return out


def contiguous_simplices(tau: Simplex, dim: int) -> list[Simplex]:
    """All simplices sigma of the given dimension such that sigma and tau
    together span a simplex (searched in the whole building, through the
    maximal simplices containing tau)."""
    v = tau.vertices[0]
    n, p = v.dim, v.p
    spaces = subspaces(n, p)
    nb = neighbours_by_subspace(v, spaces)
    verts = set(tau.vertices)
    found = set()
    for flag in _flags(spaces, p, n):
        full = {v} | {nb[W] for W in flag}
        if not verts <= full:
            continue
        for face in itertools.combinations(sorted(full), dim + 1):
            found.add(face)
    if dim == 0:
        found |= {(x,) for x in verts}
    out = [normalize_simplex(f) for f in sorted(found)]
    assert all(s is not None for s in out)
    return out
