"""Exterior algebra on a finite arrangement, the ideals I(sigma), special
(no-broken-circuit) chains, straightening over Z, and a Gaussian oracle.

Elements of the exterior algebra are dicts {sorted label tuple: coefficient};
labels index the working arrangement and their numeric order is the total
order on it. A chain s = s_0.s_1...s_k (per-stratum decreasing sequences,
strata in order) denotes the wedge e_s taken in that sequence order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

from .arrangement import StratifiedArrangement, _echelon, _reduce_against, circuits
from .normal_forms import (RingDescriptor, SparseEchelon,
                           elementary_divisors)

STEP_GUARD = 1_000_000


class StraighteningError(RuntimeError):
    pass


def sort_sign(seq) -> tuple[int, tuple | None]:
    """Sign of the permutation sorting ``seq`` and the sorted tuple; (0, None)
    when an entry repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0, None
    sign = 1
    arr = seq[:]
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(arr)


def perm_sign(values) -> int:
    """Signature of a sequence as a permutation of its sorted values."""
    return sort_sign(values)[0]


def _add(acc: dict, key, coef) -> None:
    v = acc.get(key, 0) + coef
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def monomial(seq) -> dict:
    s, u = sort_sign(seq)
    return {u: s} if s else {}


def reduce_coefficients(x: dict, ring: RingDescriptor) -> dict:
    """Integer coefficients reduced into the ring (kept as ints over Q)."""
    if ring.kind in ("Z", "Q"):
        return {k: v for k, v in x.items() if v}
    out = {}
    for k, v in x.items():
        r = ring.reduce(v)
        if r:
            out[k] = r
    return out


def differential(x: dict) -> dict:
    """d(e_s) = sum_{i=1}^{r} (-1)^i e_{s^(i)} extended linearly."""
    out: dict = {}
    for u, c in x.items():
        for i in range(len(u)):
            _add(out, u[:i] + u[i + 1:], c * (-1 if i % 2 == 0 else 1))
    return out


def wedge(x: dict, y: dict) -> dict:
    out: dict = {}
    for u, a in x.items():
        for w, b in y.items():
            s, t = sort_sign(u + w)
            if s:
                _add(out, t, s * a * b)
    return out


def scale(x: dict, c) -> dict:
    return {k: v * c for k, v in x.items() if v * c}


def add(x: dict, y: dict) -> dict:
    out = dict(x)
    for k, v in y.items():
        _add(out, k, v)
    return out


# ----------------------------------------------------------- ideal generators

def ideal_rows(circuit_list, m: int, k: int, unique: bool = True):
    """Spanning set of I^k: e_t ^ d(e_c) over circuits c and all sorted t
    (repeated rows up to sign skipped when ``unique``)."""
    seen = set()
    for c in circuit_list:
        dc = differential({tuple(c): 1})
        rest = k - len(c) + 1
        if rest < 0:
            continue
        for t in itertools.combinations(range(m), rest):
            row = wedge({t: 1}, dc)
            if not row:
                continue
            if unique:
                lead = min(row)
                sgn = 1 if row[lead] > 0 else -1
                key = frozenset((u, sgn * v) for u, v in row.items())
                if key in seen:
                    continue
                seen.add(key)
            yield row


def dependent_sets(S: StratifiedArrangement, max_size: int | None = None):
    """All dependent subsets of each stratum (brute force; small inputs)."""
    from .arrangement import rank_mod
    for labels in S.strata:
        top = len(labels) if max_size is None else min(len(labels), max_size)
        for r in range(2, top + 1):
            for c in itertools.combinations(labels, r):
                if rank_mod([S.projection[a] for a in c], S.p) < r:
                    yield c


def _indexer(m: int, k: int) -> dict:
    return {t: i for i, t in enumerate(itertools.combinations(range(m), k))}


def _as_row(x: dict, index: dict) -> dict:
    return {index[t]: v for t, v in x.items()}


# --------------------------------------------------------------- the algebra

@dataclass(frozen=True)
class OracleRanks:
    ring: str
    tilde: tuple
    a: tuple


class OSAlgebra:
    """Presentation of A~(sigma) = E~/I(sigma) and A(sigma) for a stratified
    working arrangement."""

    def __init__(self, S: StratifiedArrangement):
        self.S = S
        self.p = S.p
        self.m = S.size
        self.strata = S.strata
        self.top = max(S.strata[0])
        self._closure: dict = {}
        self._part: dict = {}
        self._mono: dict = {}
        self._special: dict = {}
        self._steps = 0

    # ---- matroid of each stratum
    def _span_echelon(self, T):
        return _echelon([self.S.projection[a] for a in T], self.p)

    def closure(self, T) -> frozenset:
        key = frozenset(T)
        cl = self._closure.get(key)
        if cl is None:
            if not key:
                cl = frozenset()
            else:
                i = self.S.stratum_of[next(iter(key))]
                ech = self._span_echelon(sorted(key))
                cl = frozenset(b for b in self.strata[i]
                               if not any(_reduce_against(ech, list(self.S.projection[b]), self.p)))
            self._closure[key] = cl
        return cl

    def independent(self, T) -> bool:
        return len(self._span_echelon(T)) == len(T)

    @property
    def circuits(self) -> list:
        c = getattr(self, "_circuits", None)
        if c is None:
            c = circuits(self.S)
            self._circuits = c
        return c

    def all_circuits(self) -> list:
        return [c for per in self.circuits for c in per]

    # ---- special chains
    def is_special_part(self, T) -> bool:
        desc = sorted(T, reverse=True)
        if not self.independent(desc):
            return False
        return all(max(self.closure(desc[j:])) == desc[j] for j in range(len(desc)))

    def special_parts(self, i: int) -> list[tuple]:
        """Special subsets of stratum i as decreasing tuples."""
        got = self._special.get(i)
        if got is not None:
            return got
        out = [()]
        frontier = [()]
        while frontier:
            nxt = []
            for s in frontier:
                cl = self.closure(s)
                floor = s[0] if s else -1
                for h in self.strata[i]:
                    if h <= floor or h in cl:
                        continue
                    t = (h,) + s
                    if max(self.closure(t)) == h:
                        nxt.append(t)
            out.extend(nxt)
            frontier = nxt
        out.sort(key=lambda t: (len(t), t))
        self._special[i] = out
        return out

    def special_chains(self, degree: int) -> list[tuple]:
        """Special chains of the given degree as sequences s_0.s_1...s_k."""
        parts = [self.special_parts(i) for i in range(len(self.strata))]
        out = []
        for combo in itertools.product(*parts):
            if sum(len(c) for c in combo) == degree:
                out.append(tuple(x for c in combo for x in c))
        out.sort()
        return out

    def chain_of(self, u) -> tuple:
        """The chain sequence of a sorted monomial (per-stratum decreasing)."""
        parts = [sorted((a for a in u if self.S.stratum_of[a] == i), reverse=True)
                 for i in range(len(self.strata))]
        return tuple(x for part in parts for x in part)

    def special_basis(self, degree: int) -> list[tuple]:
        """Sorted monomials of the special chains (a basis of A~^degree)."""
        return sorted(tuple(sorted(c)) for c in self.special_chains(degree))

    def a_basis(self, k: int) -> list[tuple]:
        """Special chains s of degree k avoiding a = max of stratum 0; the
        element of A^k they index is d(e_{a.s})."""
        return [s for s in self.special_chains(k) if self.top not in s]

    def a_representative(self, s: tuple) -> dict:
        return differential(monomial((self.top,) + tuple(s)))

    # ---- straightening
    def _straighten_part(self, T: tuple) -> dict:
        got = self._part.get(T)
        if got is not None:
            return got
        self._steps += 1
        if self._steps > STEP_GUARD:
            raise StraighteningError("straightening step bound exceeded")
        if not self.independent(T):
            self._part[T] = {}
            return {}
        desc = sorted(T, reverse=True)
        violation = None
        for j in range(len(desc) - 1, -1, -1):
            b = max(self.closure(desc[j:]))
            if b != desc[j]:
                violation = (j, b)
                break
        if violation is None:
            res = {T: 1}
            self._part[T] = res
            return res
        j, b = violation
        support = list(desc[j:])
        for x in list(support):
            trial = [y for y in support if y != x]
            if b in self.closure(trial):
                support = trial
        support.sort()
        rest = sorted(set(T) - set(support))
        eps, _ = sort_sign(support + rest)
        res: dict = {}
        for i in range(1, len(support) + 1):
            seq = [b] + support[:i - 1] + support[i:] + rest
            sg, U = sort_sign(seq)
            if not sg:
                continue
            coef = eps * (1 if i % 2 == 1 else -1) * sg
            for V, c in self._straighten_part(U).items():
                _add(res, V, coef * c)
        self._part[T] = res
        return res

    def straighten_monomial(self, u: tuple) -> dict:
        """Integer coordinates of e_u (u sorted) modulo I(sigma) in the basis of
        sorted special monomials."""
        got = self._mono.get(u)
        if got is not None:
            return got
        parts = [tuple(a for a in u if self.S.stratum_of[a] == i)
                 for i in range(len(self.strata))]
        eps, _ = sort_sign([x for p in parts for x in p])
        acc = {(): eps}
        for part in parts:
            if not part:
                continue
            sp = self._straighten_part(part)
            nxt: dict = {}
            for left, a in acc.items():
                for right, b in sp.items():
                    _add(nxt, left + right, a * b)
            acc = nxt
            if not acc:
                break
        res: dict = {}
        for seq, c in acc.items():
            sg, U = sort_sign(seq)
            _add(res, U, sg * c)
        self._mono[u] = res
        return res

    def straighten(self, x: dict) -> dict:
        out: dict = {}
        for u, c in x.items():
            for v, a in self.straighten_monomial(u).items():
                _add(out, v, c * a)
        return out

    # ---- A(sigma) coordinates
    def chain_sign(self, u: tuple) -> int:
        """e_{chain(u)} = chain_sign(u) * e_u."""
        return sort_sign(self.chain_of(u))[0]

    def a_coordinates(self, x: dict, check: bool = True) -> list[int]:
        """Coordinates of x in E^k (mod I) over the basis d(e_{a.s})."""
        k = len(next(iter(x))) if x else 0
        basis = self.a_basis(k)
        st = self.straighten(x)
        coords = []
        for s in basis:
            u = tuple(sorted(s))
            c = st.get(u, 0)
            coords.append(-c * sort_sign(s)[0])
        if check:
            rebuilt: dict = {}
            for c, s in zip(coords, basis):
                if c:
                    for v, a in self.straighten(self.a_representative(s)).items():
                        _add(rebuilt, v, c * a)
            if rebuilt != st:
                raise StraighteningError("element is not in the span of the A-basis")
        return coords

    # ---- reports
    def special_counts(self, max_degree: int) -> list[int]:
        return [len(self.special_chains(k)) for k in range(max_degree + 1)]

    def a_counts(self, max_degree: int) -> list[int]:
        return [len(self.a_basis(k)) for k in range(max_degree + 1)]

    def to_json(self, max_degree: int) -> dict:
        return {"type": list(self.S.sigma.type),
                "strata_sizes": [len(s) for s in self.strata],
                "circuits": sum(len(c) for c in self.circuits),
                "special_counts": self.special_counts(max_degree),
                "a_counts": self.a_counts(max_degree)}


# ------------------------------------------------------------------- oracle

def ideal_echelon(circuit_list, m: int, k: int, ring: RingDescriptor):
    index = _indexer(m, k)
    ech = SparseEchelon(ring)
    for row in ideal_rows(circuit_list, m, k):
        ech.add(_as_row(reduce_coefficients(row, ring), index))
    return ech, index


def oracle_ranks(circuit_list, m: int, max_degree: int, ring: RingDescriptor) -> OracleRanks:
    """Ranks of E~^k/I^k and (E^k + I^k)/I^k over a field by elimination."""
    tilde, a = [], []
    for k in range(max_degree + 1):
        ech, index = ideal_echelon(circuit_list, m, k, ring)
        r_ideal = ech.rank
        tilde.append(comb(m, k) - r_ideal)
        # E^k = d(E~^{k+1}) is spanned by d(e_0 ^ e_w): d(e_u) = d(e_0 ^ d(e_u))
        for w in itertools.combinations(range(1, m), k):
            ech.add(_as_row(reduce_coefficients(differential({(0,) + w: 1}), ring), index))
        a.append(ech.rank - r_ideal)
    return OracleRanks(ring.name, tuple(tilde), tuple(a))


def in_ideal(x: dict, ech: SparseEchelon, index: dict, ring: RingDescriptor) -> bool:
    return not ech.reduce(_as_row(reduce_coefficients(x, ring), index))


def ideal_torsion(circuit_list, m: int, k: int) -> list[int]:
    """Non-unit elementary divisors of the integral generator matrix of I^k."""
    index = _indexer(m, k)
    rows = [_as_row(r, index) for r in ideal_rows(circuit_list, m, k)]
    return [x for x in elementary_divisors(rows, len(index)) if x != 1]


def koszul_degree_one(m: int, ring: RingDescriptor) -> tuple[int, int]:
    """(dim ker d: E~^1 -> E~^0, rank d: E~^2 -> E~^1) over a field."""
    ech1 = SparseEchelon(ring)
    for a in range(m):
        ech1.add(_as_row(reduce_coefficients(differential({(a,): 1}), ring), {(): 0}))
    ker1 = m - ech1.rank
    index = _indexer(m, 1)
    ech2 = SparseEchelon(ring)
    for u in itertools.combinations(range(m), 2):
        ech2.add(_as_row(reduce_coefficients(differential({u: 1}), ring), index))
    return ker1, ech2.rank


# --------------------------------------------------------------- restriction

def restriction_matrix(tau_alg: OSAlgebra, sigma_alg: OSAlgebra, k: int) -> list[list[int]]:
    """Matrix of A^k(tau) -> A^k(sigma) (rows indexed by the sigma basis,
    columns by the tau basis)."""
    tv = set(tau_alg.S.sigma.vertices)
    if not tv <= set(sigma_alg.S.sigma.vertices):
        raise ValueError("not a face")
    cols = [sigma_alg.a_coordinates(tau_alg.a_representative(s))
            for s in tau_alg.a_basis(k)]
    nrows = len(sigma_alg.a_basis(k))
    return [[cols[j][i] for j in range(len(cols))] for i in range(nrows)]


# ---------------------------------------------------------- signature forms

@dataclass(frozen=True)
class SignatureForm:
    """l_sigma(s) = sgn(i_sigma(s_0), ..., i_sigma(s_m)), zero unless the
    stratum map is a bijection onto [0, k]; ``shift`` selects the cyclic
    presentation (M_j, ..., M_k, M_0, ..., M_{j-1})."""

    S: StratifiedArrangement
    shift: int = 0

    @property
    def degree(self) -> int:
        return len(self.S.strata)

    def on_sequence(self, seq) -> int:
        k1 = self.degree
        if len(seq) != k1:
            raise ValueError("degree mismatch")
        idx = [(self.S.stratum_of[a] - self.shift) % k1 for a in seq]
        if sorted(idx) != list(range(k1)):
            return 0
        return perm_sign(idx)

    def __call__(self, x: dict) -> int:
        return sum(c * self.on_sequence(u) for u, c in x.items())


def contiguous(sigma, tau) -> bool:
    from .building import normalize_simplex
    return normalize_simplex(set(sigma.vertices) | set(tau.vertices)) is not None


def vertex_ideal_generators(alg_vertices, k: int, m: int):
    """Union of the I^k generators of the vertex algebras of a chain."""
    for alg in alg_vertices:
        yield from ideal_rows(alg.all_circuits(), m, k)
