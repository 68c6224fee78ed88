"""Finite hyperplane sets H_n = P^d(Z/p^n), their stratification along a
simplex, and circuits of the residue projections."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .building import Simplex, GlobalParams
from .normal_forms import valuation

DEFAULT_H_CAP = 200_000


class ArrangementTooLarge(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class HyperplaneRep:
    """Unimodular coefficient vector of a hyperplane, canonical modulo units
    of Z/p^level: the last unit coordinate is 1 and entries lie in [0, p^level)."""

    coords: tuple
    level: int
    p: int

    @property
    def order_key(self) -> tuple:
        return self.coords

    def to_json(self) -> list:
        return [str(x) for x in self.coords]


def canonical_rep(v, p: int, level: int) -> tuple:
    q = p ** level
    v = [int(x) % q for x in v]
    units = [i for i, x in enumerate(v) if x % p]
    if not units:
        raise ValueError("vector is not unimodular")
    u = pow(v[units[-1]], -1, q)
    return tuple(x * u % q for x in v)


def count_H(d: int, p: int, n: int) -> int:
    """|P^d(Z/p^n)| = p^{(n-1)d} (p^{d+1} - 1)/(p - 1)."""
    return p ** ((n - 1) * d) * (p ** (d + 1) - 1) // (p - 1)


def enumerate_H(d: int, p: int, n: int, cap: int = DEFAULT_H_CAP) -> list[HyperplaneRep]:
    if n < 1:
        raise ValueError("level must be >= 1")
    total = count_H(d, p, n)
    if total > cap:
        raise ArrangementTooLarge(f"|H_{n}| = {total} exceeds cap {cap}")
    q = p ** n
    out = []
    for j in range(d + 1):
        before = [range(q)] * j
        after = [range(0, q, p)] * (d - j)
        for head in itertools.product(*before):
            for tail in itertools.product(*after):
                out.append(HyperplaneRep(tuple(head) + (1,) + tuple(tail), n, p))
    out.sort()
    return out


# --------------------------------------------------------- linear algebra mod p

def _reduce_against(basis: list, v: list, p: int) -> list:
    """Reduce v against an echelon basis (list of (pivot, row))."""
    v = [x % p for x in v]
    for pc, row in basis:
        if v[pc]:
            f = v[pc]
            v = [(a - f * b) % p for a, b in zip(v, row)]
    return v


def _echelon(vectors, p: int) -> list:
    basis = []
    for v in vectors:
        r = _reduce_against(basis, list(v), p)
        if any(r):
            pc = next(i for i, x in enumerate(r) if x)
            inv = pow(r[pc], -1, p)
            r = [x * inv % p for x in r]
            basis.append((pc, r))
    return basis


def rank_mod(vectors, p: int) -> int:
    return len(_echelon(vectors, p))


def projective_point(v, p: int) -> tuple:
    """Scale a nonzero vector over F_p so its last nonzero entry is 1."""
    nz = [i for i, x in enumerate(v) if x % p]
    u = pow(v[nz[-1]], -1, p)
    return tuple(x * u % p for x in v)


# ------------------------------------------------------------- stratification

@dataclass(frozen=True)
class StratifiedArrangement:
    """Strata A_i = A meets M_i minus M_{i+1} of a simplex, as label lists.

    Labels index the working arrangement; the label order is the total order.
    ``projection[a]`` is the class of the normalized representative of a in
    M_i/M_{i+1} = F_p^{e_i} (adapted coordinates of block i)."""

    sigma: Simplex
    strata: tuple
    stratum_of: tuple
    projection: tuple
    p: int

    @property
    def size(self) -> int:
        return len(self.stratum_of)

    def stratum_dims(self) -> tuple:
        return self.sigma.type

    def to_json(self) -> dict:
        return {"type": list(self.sigma.type),
                "strata_sizes": [len(s) for s in self.strata],
                "stratum_of": list(self.stratum_of)}


def locate(vector, sigma: Simplex) -> tuple[int, tuple]:
    """Stratum index and residue projection of a nonzero vector, after
    rescaling it by a power of p into M_0 minus pM_0."""
    basis = sigma.adapted
    p = sigma.p
    y = basis.coords(vector)
    m = min(valuation(x, p) for x in y if x != 0)
    scale = Fraction(p) ** (-m)
    y = [x * scale for x in y]
    start = 0
    for i, size in enumerate(basis.blocks):
        block = y[start:start + size]
        red = tuple(x.numerator * pow(x.denominator, -1, p) % p for x in block)
        if any(red):
            return i, red
        start += size
    raise AssertionError("vector lies in no stratum of the chain")


def stratify(A, sigma: Simplex) -> StratifiedArrangement:
    strata = [[] for _ in sigma.type]
    where = []
    proj = []
    for label, h in enumerate(A):
        coords = h.coords if isinstance(h, HyperplaneRep) else tuple(h)
        i, red = locate(coords, sigma)
        strata[i].append(label)
        where.append(i)
        proj.append(red)
    return StratifiedArrangement(sigma, tuple(map(tuple, strata)), tuple(where),
                                 tuple(proj), sigma.p)


def coverage_gaps(S: StratifiedArrangement) -> list[tuple]:
    """(stratum, missing projective point) pairs, i.e. where the arrangement
    is not faithful for the simplex."""
    p = S.p
    gaps = []
    for i, e in enumerate(S.sigma.type):
        seen = {projective_point(S.projection[a], p) for a in S.strata[i]}
        for v in itertools.product(range(p), repeat=e):
            if any(v) and projective_point(v, p) == v and v not in seen:
                gaps.append((i, v))
    return gaps


def circuits(S: StratifiedArrangement) -> list[list[tuple]]:
    """Per stratum, the minimal dependent label sets (sorted tuples).

    A circuit C with largest label x is an independent set I = C - {x} with x
    in span(I) using every element of I; independent sets are grown in
    increasing label order."""
    p = S.p
    out = []
    for labels in S.strata:
        found = []
        vecs = {a: S.projection[a] for a in labels}

        def grow(indep: tuple, echelon: list, start: int):
            for pos in range(start, len(labels)):
                x = labels[pos]
                r = _reduce_against(echelon, list(vecs[x]), p)
                if any(r):
                    grow(indep + (x,), _echelon([vecs[a] for a in indep + (x,)], p), pos + 1)
                elif _full_support(indep, x, vecs, p):
                    found.append(indep + (x,))

        grow((), [], 0)
        found.sort(key=lambda c: (len(c), c))
        out.append(found)
    return out


def _full_support(indep: tuple, x, vecs: dict, p: int) -> bool:
    """Whether vecs[x] is a combination of vecs[indep] with no zero
    coefficient (indep is independent and x lies in its span)."""
    if not indep:
        return True  # a zero projection would be a loop; cannot occur
    n = len(indep)
    dim = len(vecs[x])
    # augmented columns: solve sum c_j v_j = x
    rows = [[vecs[a][r] % p for a in indep] + [vecs[x][r] % p] for r in range(dim)]
    piv_row = 0
    pivots = []
    for c in range(n):
        r = next((i for i in range(piv_row, dim) if rows[i][c]), None)
        if r is None:
            continue
        rows[piv_row], rows[r] = rows[r], rows[piv_row]
        inv = pow(rows[piv_row][c], -1, p)
        rows[piv_row] = [v * inv % p for v in rows[piv_row]]
        for i in range(dim):
            if i != piv_row and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[piv_row])]
        pivots.append(c)
        piv_row += 1
    return all(rows[i][n] for i in range(len(pivots)))


# ------------------------------------------------------- working arrangement

@dataclass(frozen=True)
class WorkingArrangement:
    """A finite arrangement shared by a family of simplices, faithful for each
    (every stratum sees every point of P(M_i/M_{i+1})). Labels follow the
    order of ``hyperplanes``; that order is the total order used downstream."""

    hyperplanes: tuple
    level: int
    mode: str
    order: str = "lex"

    def __len__(self):
        return len(self.hyperplanes)

    def reordered(self, perm, name: str) -> "WorkingArrangement":
        return WorkingArrangement(tuple(self.hyperplanes[i] for i in perm),
                                  self.level, self.mode, name)

    def to_json(self) -> dict:
        return {"level": self.level, "mode": self.mode, "order": self.order,
                "hyperplanes": [h.to_json() for h in self.hyperplanes]}


def _requirements(simplices, H) -> tuple[set, list]:
    need = set()
    covers = [set() for _ in H]
    for si, sigma in enumerate(simplices):
        for i, e in enumerate(sigma.type):
            for v in itertools.product(range(sigma.p), repeat=e):
                if any(v) and projective_point(v, sigma.p) == v:
                    need.add((si, i, v))
        for hi, h in enumerate(H):
            i, red = locate(h.coords, sigma)
            covers[hi].add((si, i, projective_point(red, sigma.p)))
    return need, covers


def working_arrangement(params: GlobalParams, simplices, mode: str = "minimal",
                        max_level: int = 8, cap: int = DEFAULT_H_CAP) -> WorkingArrangement:
    """Smallest level N at which H_N is faithful for every simplex given; in
    ``minimal`` mode a greedy covering subset of H_N is kept, in ``full``
    mode all of H_N."""
    if mode not in ("minimal", "full"):
        raise ValueError(f"unknown arrangement mode {mode!r}")
    simplices = list(simplices)
    for level in range(1, max_level + 1):
        H = enumerate_H(params.d, params.p, level, cap)
        need, covers = _requirements(simplices, H)
        if not need <= set().union(*covers):
            continue
        if mode == "full":
            return WorkingArrangement(tuple(H), level, mode)
        chosen = []
        left = set(need)
        while left:
            best = max(range(len(H)), key=lambda j: (len(covers[j] & left), -j))
            chosen.append(best)
            left -= covers[best]
        chosen.sort()
        return WorkingArrangement(tuple(H[j] for j in chosen), level, mode)
    raise ArrangementTooLarge(f"no faithful level up to {max_level}")
