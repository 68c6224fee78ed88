"""Exact arithmetic over Z, Q, F_l and Z/m, and the matrix normal forms
(Smith, Hermite, reduced echelon, Howell) used by the rest of the package.

Matrices are plain lists of lists of Python ints (or Fractions over Q).
Nothing here touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Matrix = list  # list[list[int | Fraction]]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True)
class RingDescriptor:
    """One of Z, Q, F_l (l prime) or Z/m (m >= 2)."""

    kind: str
    modulus: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "F", "Zm"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == "F" and not is_prime(self.modulus):
            raise ValueError(f"F_{self.modulus}: modulus must be prime")
        if self.kind == "Zm" and self.modulus < 2:
            raise ValueError("Z/m requires m >= 2")
        if self.kind in ("Z", "Q") and self.modulus != 0:
            raise ValueError(f"{self.kind} takes no modulus")

    @property
    def is_field(self) -> bool:
        return self.kind in ("Q", "F")

    @property
    def characteristic(self) -> int:
        return self.modulus

    def reduce(self, x):
        if self.kind == "Q":
            return Fraction(x)
        if self.kind == "Z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        if isinstance(x, Fraction):
            return x.numerator * pow(x.denominator, -1, self.modulus) % self.modulus
        return int(x) % self.modulus

    @property
    def name(self) -> str:
        if self.kind == "F":
            return f"F{self.modulus}"
        if self.kind == "Zm":
            return f"Z/{self.modulus}"
        return self.kind

    def __str__(self):
        return self.name

    @classmethod
    def parse(cls, text: str) -> "RingDescriptor":
        """Parse 'Z', 'Q', 'F5', 'Z/9' (also 'GF5', 'Z/5' for a prime gives Z/5)."""
        t = text.strip()
        if t in ("Z", "ZZ"):
            return INTEGERS
        if t in ("Q", "QQ"):
            return RATIONALS
        if t.startswith("GF"):
            return prime_field(int(t[2:]))
        if t.startswith("F"):
            return prime_field(int(t[1:]))
        if t.startswith("Z/"):
            return residue_ring(int(t[2:]))
        raise ValueError(f"cannot parse ring {text!r}")


INTEGERS = RingDescriptor("Z")
RATIONALS = RingDescriptor("Q")


def prime_field(ell: int) -> RingDescriptor:
    return RingDescriptor("F", ell)


def residue_ring(m: int) -> RingDescriptor:
    return RingDescriptor("Zm", m)


@dataclass(frozen=True)
class ExactMatrix:
    """Immutable dense matrix over a RingDescriptor with canonical entries."""

    ring: RingDescriptor
    rows: tuple
    ncols: int = -1

    def __post_init__(self):
        rows = tuple(tuple(self.ring.reduce(x) for x in r) for r in self.rows)
        ncols = self.ncols if self.ncols >= 0 else (len(rows[0]) if rows else 0)
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "ncols", ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def tolist(self) -> list:
        return [list(r) for r in self.rows]

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.ring != other.ring or self.ncols != other.nrows:
            raise ValueError("incompatible matrices")
        return ExactMatrix(self.ring, matmul(self.tolist(), other.tolist(), other.ncols),
                           other.ncols)

    def to_json(self) -> list:
        return [[str(x) for x in r] for r in self.rows]

    @classmethod
    def identity(cls, ring: RingDescriptor, n: int) -> "ExactMatrix":
        return cls(ring, identity(n), n)


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> Matrix:
    return [[0] * c for _ in range(r)]


def transpose(A: Matrix, ncols: int | None = None) -> Matrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(c) for c in zip(*A)]


def matmul(A: Matrix, B: Matrix, bcols: int | None = None) -> Matrix:
    if bcols is None:
        bcols = len(B[0]) if B else 0
    Bt = transpose(B, bcols)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def valuation(x, p: int) -> int:
    """Exponent of the prime p in the nonzero rational x."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    num, den = abs(x.numerator), x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def determinant(A: Matrix):
    """Exact determinant by fraction Gaussian elimination."""
    n = len(A)
    M = [[Fraction(x) for x in r] for r in A]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            if M[r][c]:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det.numerator if det.denominator == 1 else det


def inverse(A: Matrix) -> Matrix:
    """Exact inverse over Q; raises ValueError if singular."""
    n = len(A)
    M = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [r[n:] for r in M]


# ---------------------------------------------------------------- Smith form

@dataclass(frozen=True)
class SmithDecomposition:
    """U * M * V = D with U, V unimodular and d_1 | d_2 | ... on the diagonal."""

    U: tuple
    D: tuple
    V: tuple
    divisors: tuple  # nonzero diagonal entries, in order

    @property
    def rank(self) -> int:
        return len(self.divisors)


def _min_pivot(A: Matrix, t: int):
    best = None
    for i in range(t, len(A)):
        row = A[i]
        for j in range(t, len(row)):
            x = row[j]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), i, j)
                if best[0] == 1:
                    return best
    return best


def smith_normal_form(M: Matrix, ncols: int | None = None,
                      transforms: bool = True) -> SmithDecomposition:
    """Smith normal form over Z with deterministic pivoting.

    The pivot is the entry of smallest absolute value, ties broken by the
    lowest (row, column) index. With ``transforms=False`` U and V are empty.
    """
    m = len(M)
    n = ncols if ncols is not None else (len(M[0]) if M else 0)
    A = [[int(x) for x in r] for r in M]
    U = identity(m) if transforms else None
    V = identity(n) if transforms else None
    divisors = []
    t = 0
    while t < min(m, n):
        best = _min_pivot(A, t)
        if best is None:
            break
        _, i, j = best
        while True:
            if i != t:
                A[t], A[i] = A[i], A[t]
                if transforms:
                    U[t], U[i] = U[i], U[t]
            if j != t:
                for r in A:
                    r[t], r[j] = r[j], r[t]
                if transforms:
                    for r in V:
                        r[t], r[j] = r[j], r[t]
            piv = A[t][t]
            dirty = False
            for r in range(t + 1, m):
                x = A[r][t]
                if x:
                    q = x // piv
                    if q:
                        rt = A[t]
                        A[r] = [a - q * b for a, b in zip(A[r], rt)]
                        if transforms:
                            U[r] = [a - q * b for a, b in zip(U[r], U[t])]
                    if A[r][t]:
                        dirty = True
            for c in range(t + 1, n):
                x = A[t][c]
                if x:
                    q = x // piv
                    if q:
                        for r in A:
                            r[c] -= q * r[t]
                        if transforms:
                            for r in V:
                                r[c] -= q * r[t]
                    if A[t][c]:
                        dirty = True
            if dirty:
                best = None
                for r in range(t, m):
                    x = A[r][t]
                    if x and (best is None or abs(x) < best[0]):
                        best = (abs(x), r, t)
                for c in range(t, n):
                    x = A[t][c]
                    if x and abs(x) < best[0]:
                        best = (abs(x), t, c)
                _, i, j = best
                continue
            # divisibility: fold an offending row into row t
            bad = None
            for r in range(t + 1, m):
                if any(A[r][c] % piv for c in range(t + 1, n)):
                    bad = r
                    break
            if bad is not None:
                A[t] = [a + b for a, b in zip(A[t], A[bad])]
                if transforms:
                    U[t] = [a + b for a, b in zip(U[t], U[bad])]
                i, j = t, t
                continue
            break
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            if transforms:
                U[t] = [-a for a in U[t]]
        divisors.append(A[t][t])
        t += 1
    D = tuple(tuple(r) for r in A)
    if transforms:
        return SmithDecomposition(tuple(map(tuple, U)), D, tuple(map(tuple, V)), tuple(divisors))
    return SmithDecomposition((), D, (), tuple(divisors))


def elementary_divisors(rows: Iterable, ncols: int) -> list[int]:
    """Nonzero elementary divisors of an integer matrix given as sparse rows.

    Rows may be dicts {col: value} or dense lists. Unit pivots are eliminated
    sparsely first (a unimodular step); the remaining core goes through
    smith_normal_form.
    """
    sparse = []
    for r in rows:
        if isinstance(r, dict):
            d = {c: v for c, v in r.items() if v}
        else:
            d = {c: v for c, v in enumerate(r) if v}
        if d:
            sparse.append(d)
    units = 0
    changed = True
    while changed:
        changed = False
        for idx, r in enumerate(sparse):
            col = next((c for c in sorted(r) if abs(r[c]) == 1), None)
            if col is None:
                continue
            # clear column `col` from every other row, then drop row and column
            sign = r[col]
            rest = []
            for jdx, s in enumerate(sparse):
                if jdx == idx:
                    continue
                x = s.get(col)
                if x:
                    f = x * sign
                    s = dict(s)
                    for c, v in r.items():
                        nv = s.get(c, 0) - f * v
                        if nv:
                            s[c] = nv
                        else:
                            s.pop(c, None)
                s.pop(col, None)
                if s:
                    rest.append(s)
            sparse = rest
            units += 1
            changed = True
            break
    if not sparse:
        return [1] * units
    cols = sorted({c for r in sparse for c in r})
    index = {c: i for i, c in enumerate(cols)}
    dense = [[0] * len(cols) for _ in sparse]
    for i, r in enumerate(sparse):
        for c, v in r.items():
            dense[i][index[c]] = v
    core = smith_normal_form(dense, len(cols), transforms=False).divisors
    return [1] * units + list(core)


# --------------------------------------------------------- fields: echelon

def _field_ops(ring: RingDescriptor):
    if ring.kind == "Q":
        return (lambda x: Fraction(x)), (lambda x: 1 / x)
    if ring.kind == "F":
        ell = ring.modulus
        return (lambda x: int(x) % ell if not isinstance(x, Fraction) else ring.reduce(x)), \
            (lambda x: pow(x, -1, ell))
    raise ValueError("field required")


def rref(M: Matrix, ring: RingDescriptor, ncols: int | None = None):
    """Reduced row echelon form over Q or F_l. Returns (rows, pivot columns)."""
    conv, inv = _field_ops(ring)
    n = ncols if ncols is not None else (len(M[0]) if M else 0)
    A = [[conv(x) for x in r] for r in M]
    mod = ring.modulus if ring.kind == "F" else None
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        f = inv(A[r][c])
        A[r] = [x * f % mod for x in A[r]] if mod else [x * f for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                g = A[i][c]
                if mod:
                    A[i] = [(a - g * b) % mod for a, b in zip(A[i], A[r])]
                else:
                    A[i] = [a - g * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank_and_kernel(M: Matrix, ring: RingDescriptor, ncols: int | None = None):
    """Rank of M and a basis of {k : M k = 0} over a field (Q or F_l)."""
    if not ring.is_field:
        raise ValueError("field required")
    n = ncols if ncols is not None else (len(M[0]) if M else 0)
    R, pivots = rref(M, ring, n)
    zero = Fraction(0) if ring.kind == "Q" else 0
    one = Fraction(1) if ring.kind == "Q" else 1
    free = [c for c in range(n) if c not in set(pivots)]
    kernel = []
    for f in free:
        v = [zero] * n
        v[f] = one
        for row, pc in zip(R, pivots):
            x = -row[f]
            v[pc] = x % ring.modulus if ring.kind == "F" else x
        kernel.append(v)
    return len(pivots), kernel


def field_rank(M: Matrix, ring: RingDescriptor, ncols: int | None = None) -> int:
    return rank_and_kernel(M, ring, ncols)[0] if M else 0


class SparseEchelon:
    """Incremental row echelon basis over Q (fraction free, content removed)
    or F_l, for large sparse systems such as ideal generator matrices."""

    def __init__(self, ring: RingDescriptor):
        if not ring.is_field:
            raise ValueError("field required")
        self.ring = ring
        self.mod = ring.modulus if ring.kind == "F" else None
        self.pivots: dict = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _normalize(self, row: dict) -> dict:
        if self.mod:
            return {c: v % self.mod for c, v in row.items() if v % self.mod}
        row = {c: v for c, v in row.items() if v}
        if row:
            g = 0
            for v in row.values():
                g = gcd(g, v)
                if g == 1:
                    break
            if g > 1:
                row = {c: v // g for c, v in row.items()}
        return row

    def reduce(self, row: dict) -> dict:
        row = self._normalize(dict(row))
        mod = self.mod
        while row:
            lead = min(row)
            prow = self.pivots.get(lead)
            if prow is None:
                return row
            a = row[lead]
            if mod:
                new = dict(row)
                for c, v in prow.items():
                    nv = (new.get(c, 0) - a * v) % mod
                    if nv:
                        new[c] = nv
                    else:
                        new.pop(c, None)
                row = new
            else:
                b = prow[lead]
                g = gcd(a, b)
                fa, fb = b // g, a // g
                new = {c: fa * v for c, v in row.items()}
                for c, v in prow.items():
                    nv = new.get(c, 0) - fb * v
                    if nv:
                        new[c] = nv
                    else:
                        new.pop(c, None)
                row = self._normalize(new)
        return row

    def add(self, row: dict) -> bool:
        """Insert a row; True if it increased the rank."""
        r = self.reduce(row)
        if not r:
            return False
        lead = min(r)
        if self.mod:
            inv = pow(r[lead], -1, self.mod)
            r = {c: v * inv % self.mod for c, v in r.items()}
        elif r[lead] < 0:
            r = {c: -v for c, v in r.items()}
        self.pivots[lead] = r
        return True


def sparse_rank(rows: Iterable[dict], ring: RingDescriptor) -> int:
    ech = SparseEchelon(ring)
    for r in rows:
        ech.add(r)
    return ech.rank


# ------------------------------------------------------------ Hermite (Z)

def hnf_rows(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Row-style Hermite normal form over Z: echelon, positive pivots,
    entries above each pivot reduced into [0, pivot). Zero rows dropped."""
    A = [list(map(int, r)) for r in rows if any(r)]
    out = []
    r0 = 0
    for c in range(ncols):
        nz = [i for i in range(r0, len(A)) if A[i][c]]
        if not nz:
            continue
        # gcd-combine all rows with a nonzero entry in column c
        piv = nz[0]
        A[r0], A[piv] = A[piv], A[r0]
        for i in range(r0 + 1, len(A)):
            b = A[i][c]
            if not b:
                continue
            a = A[r0][c]
            g, s, t = xgcd(a, b)
            top = [s * x + t * y for x, y in zip(A[r0], A[i])]
            bot = [(b // g) * x - (a // g) * y for x, y in zip(A[r0], A[i])]
            A[r0], A[i] = top, bot
        if A[r0][c] < 0:
            A[r0] = [-x for x in A[r0]]
        r0 += 1
    A = A[:r0]
    pcols = [next(c for c, x in enumerate(r) if x) for r in A]
    for i in range(len(A)):
        c = pcols[i]
        for j in range(i):
            q = A[j][c] // A[i][c]
            if q:
                A[j] = [x - q * y for x, y in zip(A[j], A[i])]
    out = A
    return out


def solve_in_lattice(basis: list[list[int]], v: Sequence[int]):
    """Integer coordinates of v in the row HNF basis, or None if v is outside."""
    v = list(v)
    coords = []
    for row in basis:
        c = next(i for i, x in enumerate(row) if x)
        q, r = divmod(v[c], row[c])
        if r:
            return None
        coords.append(q)
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    if any(v):
        return None
    return coords


def quotient_invariants(big: list[list[int]], small: list[list[int]], ncols: int):
    """Invariants of L_big / L_small for integer lattices L_small <= L_big.

    Returns (free rank, torsion orders > 1)."""
    B = hnf_rows(big, ncols)
    coords = []
    for r in hnf_rows(small, ncols):
        c = solve_in_lattice(B, r)
        if c is None:
            raise ValueError("sublattice is not contained in lattice")
        coords.append(c)
    divs = smith_normal_form(coords, len(B), transforms=False).divisors if coords else ()
    free = len(B) - len(divs)
    return free, [x for x in divs if x != 1]


# ----------------------------------------------------------- Howell (Z/m)

def _unit_normalizer(a: int, m: int) -> int:
    """A unit u mod m with u*a = gcd(a, m) (mod m)."""
    g = gcd(a, m)
    mg = m // g
    if mg == 1:
        return 1
    u0 = pow((a // g) % mg, -1, mg)
    u = u0
    while gcd(u, m) != 1:
        u += mg
    return u % m


def howell_form(rows: Iterable[Sequence[int]], m: int, ncols: int) -> list[list[int]]:
    """Howell normal form of the row span of a matrix over Z/m.

    Equal row spans give identical output. Pivots are divisors of m, entries
    above a pivot are reduced into [0, pivot), and every vector of the span
    whose first k entries vanish is a combination of the rows whose pivot
    lies beyond column k (the Howell property)."""
    work = [[int(x) % m for x in r] for r in rows]
    work = [r for r in work if any(r)]
    result: list[list[int]] = []
    for c in range(ncols):
        cand = [r for r in work if next(i for i, x in enumerate(r) if x) == c]
        rest = [r for r in work if next(i for i, x in enumerate(r) if x) != c]
        if not cand:
            work = rest
            continue
        piv = cand[0]
        for r in cand[1:]:
            a, b = piv[c], r[c]
            g, s, t = xgcd(a, b)
            newpiv = [(s * x + t * y) % m for x, y in zip(piv, r)]
            other = [((b // g) * x - (a // g) * y) % m for x, y in zip(piv, r)]
            piv = newpiv
            if any(other):
                rest.append(other)
        u = _unit_normalizer(piv[c], m)
        piv = [x * u % m for x in piv]
        ann = [x * (m // piv[c]) % m for x in piv]
        if any(ann):
            rest.append(ann)
        result.append(piv)
        work = rest
    # back-reduce entries above pivots
    pcols = [next(i for i, x in enumerate(r) if x) for r in result]
    for i in range(len(result)):
        c = pcols[i]
        for j in range(i):
            q = result[j][c] // result[i][c]
            if q:
                result[j] = [(x - q * y) % m for x, y in zip(result[j], result[i])]
    return result


def kernel_mod(A: Matrix, m: int, nrows: int, ncols: int) -> list[list[int]]:
    """Howell basis of {x in (Z/m)^nrows : x A = 0} for an nrows x ncols matrix A."""
    aug = [list(A[i]) + [int(i == j) for j in range(nrows)] for i in range(nrows)] \
        if ncols else [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    H = howell_form(aug, m, ncols + nrows)
    return howell_form([r[ncols:] for r in H if not any(r[:ncols])], m, nrows)


@dataclass(frozen=True)
class ResidueForm:
    """Howell basis of a row span over Z/m plus its cyclic decomposition."""

    modulus: int
    basis: tuple
    invariants: tuple  # orders of the cyclic summands, each > 1, divisibility chain

    @property
    def size(self) -> int:
        n = 1
        for x in self.invariants:
            n *= x
        return n


def span_invariants(rows: Sequence[Sequence[int]], m: int, ncols: int) -> tuple:
    """Cyclic decomposition of the row span of rows inside (Z/m)^ncols."""
    lattice = [list(r) for r in rows] + [[m * int(i == j) for j in range(ncols)]
                                        for i in range(ncols)]
    divs = smith_normal_form(hnf_rows(lattice, ncols), ncols, transforms=False).divisors
    inv = sorted((m // e for e in divs if m // e > 1), key=lambda x: x)
    # m//e reverses the divisibility chain; re-sort ascending
    return tuple(sorted(inv))


def residue_normal_form(M: Matrix, m: int, ncols: int | None = None) -> ResidueForm:
    n = ncols if ncols is not None else (len(M[0]) if M else 0)
    if m < 2:
        raise ValueError("Z/m requires m >= 2")
    H = howell_form(M, m, n)
    return ResidueForm(m, tuple(map(tuple, H)), span_invariants(H, m, n))


def quotient_invariants_mod(big: Sequence[Sequence[int]], small: Sequence[Sequence[int]],
                            m: int, ncols: int) -> tuple:
    """Cyclic decomposition of span(big)/span(small) inside (Z/m)^ncols."""
    mI = [[m * int(i == j) for j in range(ncols)] for i in range(ncols)]
    free, tors = quotient_invariants([list(r) for r in big] + mI,
                                     [list(r) for r in small] + mI, ncols)
    assert free == 0
    return tuple(sorted(tors))
