"""Coefficient systems on finite subcomplexes of the building, their Cech
complexes, and cohomology over Z, Q, F_l and Z/m."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .arrangement import stratify, working_arrangement
from .building import BallComplex, GlobalParams, ball_complex
from .normal_forms import (INTEGERS, RATIONALS, RingDescriptor, factorize, field_rank,
                           howell_form, kernel_mod, prime_field, quotient_invariants,
                           quotient_invariants_mod, rank_and_kernel, residue_ring,
                           smith_normal_form, span_invariants, transpose)
from .orlik_solomon import OSAlgebra, restriction_matrix


class MissingTransition(KeyError):
    pass


# -------------------------------------------------------- coefficient systems

class ConstantSystem:
    """The constant system Z (identity transitions) on any complex."""

    def rank(self, key) -> int:
        return 1

    def transition(self, tau, sigma) -> list:
        return [[1]]


class OSCoefficientSystem:
    """sigma -> A^k(sigma) over a shared working arrangement, with the
    projections A^k(tau) -> A^k(sigma) for faces tau of sigma."""

    def __init__(self, complex_: BallComplex, arrangement, k: int):
        self.complex = complex_
        self.arrangement = arrangement
        self.k = k
        self._alg: dict = {}
        self._maps: dict = {}

    def algebra(self, key) -> OSAlgebra:
        a = self._alg.get(key)
        if a is None:
            a = OSAlgebra(stratify(self.arrangement.hyperplanes, self.complex.simplex(key)))
            self._alg[key] = a
        return a

    def rank(self, key) -> int:
        return len(self.algebra(key).a_basis(self.k))

    def transition(self, tau, sigma) -> list:
        if not set(tau) <= set(sigma):
            raise MissingTransition(f"{tau} is not a face of {sigma}")
        if tau == sigma:
            r = self.rank(sigma)
            return [[int(i == j) for j in range(r)] for i in range(r)]
        got = self._maps.get((tau, sigma))
        if got is None:
            got = restriction_matrix(self.algebra(tau), self.algebra(sigma), self.k)
            self._maps[(tau, sigma)] = got
        return got


# --------------------------------------------------------------- the complex

@dataclass
class CechComplex:
    simplices: dict          # degree -> sorted list of keys
    offsets: dict            # degree -> {key: (start, rank)}
    dims: list
    boundaries: list         # boundaries[j]: C^j -> C^{j+1}, dims[j+1] x dims[j]

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def euler_characteristic(self) -> int:
        return sum((-1) ** j * n for j, n in enumerate(self.dims))


def build_cech(simplices: dict, system) -> CechComplex:
    """C^j = sum over j-simplices of the system; (Dx)_sigma = sum_i (-1)^i
    res(x_{sigma minus its i-th vertex}) in the global vertex order."""
    degrees = sorted(simplices)
    top = degrees[-1] if degrees else 0
    offsets, dims = {}, []
    for j in range(top + 1):
        off, start = {}, 0
        for key in simplices.get(j, []):
            r = system.rank(key)
            off[key] = (start, r)
            start += r
        offsets[j] = off
        dims.append(start)
    boundaries = []
    for j in range(top):
        D = [[0] * dims[j] for _ in range(dims[j + 1])]
        for key, (row0, r) in offsets[j + 1].items():
            for i in range(len(key)):
                face = key[:i] + key[i + 1:]
                if face not in offsets[j]:
                    raise MissingTransition(f"face {face} of {key} missing from the complex")
                col0, c = offsets[j][face]
                M = system.transition(face, key)
                sign = -1 if i % 2 else 1
                for a in range(r):
                    for b in range(c):
                        if M[a][b]:
                            D[row0 + a][col0 + b] += sign * M[a][b]
        boundaries.append(D)
    C = CechComplex({j: list(simplices.get(j, [])) for j in range(top + 1)},
                    offsets, dims, boundaries)
    for j in range(top - 1):
        prod = _mul(C.boundaries[j + 1], C.boundaries[j], dims[j])
        assert not any(any(r) for r in prod), "D o D != 0"
    return C


def _mul(A, B, bcols):
    out = []
    for row in A:
        acc = [0] * bcols
        for t, a in enumerate(row):
            if a:
                for c, b in enumerate(B[t]):
                    if b:
                        acc[c] += a * b
        out.append(acc)
    return out


# --------------------------------------------------------------- cohomology

@dataclass(frozen=True)
class DegreeCohomology:
    degree: int
    rank: int
    torsion: tuple = ()

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.torsion

    def to_json(self) -> dict:
        return {"degree": self.degree, "rank": self.rank, "torsion": list(self.torsion)}


@dataclass(frozen=True)
class CohomologyReport:
    ring: str
    degrees: tuple
    dims: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, j) -> DegreeCohomology:
        return self.degrees[j]

    def to_json(self) -> dict:
        return {"ring": self.ring, "dims": list(self.dims),
                "cohomology": [h.to_json() for h in self.degrees], **self.meta}


def invariant_factors(cyclic_orders) -> tuple:
    """Invariant factors (>1, divisibility chain) of a sum of cyclic groups."""
    orders = [x for x in cyclic_orders if x != 1]
    if not orders:
        return ()
    n = len(orders)
    diag = [[orders[i] if i == j else 0 for j in range(n)] for i in range(n)]
    return tuple(x for x in smith_normal_form(diag, n, transforms=False).divisors if x != 1)


def _rank_over(D, ncols: int, ring: RingDescriptor) -> int:
    if not D or not ncols:
        return 0
    return field_rank(D, ring, ncols)


def cohomology(C: CechComplex, ring: RingDescriptor) -> CohomologyReport:
    dims = C.dims
    top = C.top
    out = []
    if ring.is_field:
        ranks = [_rank_over(C.boundaries[j], dims[j], ring) for j in range(top)] + [0]
        for j in range(top + 1):
            prev = ranks[j - 1] if j else 0
            out.append(DegreeCohomology(j, dims[j] - ranks[j] - prev))
    elif ring.kind == "Z":
        divs = [integral_divisors(C.boundaries[j], dims[j]) for j in range(top)] + [()]
        for j in range(top + 1):
            prev = divs[j - 1] if j else ()
            out.append(DegreeCohomology(j, dims[j] - len(divs[j]) - len(prev),
                                        tuple(x for x in prev if x != 1)))
    else:
        out = list(cohomology_mod_direct(C, ring.modulus))
    return CohomologyReport(ring.name, tuple(out), tuple(dims))


def integral_divisors(D, ncols: int) -> tuple:
    if not D or not ncols:
        return ()
    return smith_normal_form(D, ncols, transforms=False).divisors


def _residue_degree(j: int, m: int, invariants) -> DegreeCohomology:
    inv = tuple(sorted(invariants))
    free = sum(1 for x in inv if x == m)
    return DegreeCohomology(j, free, tuple(x for x in inv if x != m))


def cohomology_mod_direct(C: CechComplex, m: int):
    """H^j over Z/m as ker D^j / im D^{j-1} via Howell forms."""
    dims = C.dims
    for j in range(C.top + 1):
        n = dims[j]
        if n == 0:
            yield DegreeCohomology(j, 0)
            continue
        if j < C.top and dims[j + 1]:
            ker = kernel_mod(transpose(C.boundaries[j], n), m, n, dims[j + 1])
        else:
            ker = [[int(a == b) for b in range(n)] for a in range(n)]
        im = transpose(C.boundaries[j - 1], dims[j - 1]) if j and dims[j - 1] else []
        inv = quotient_invariants_mod(ker, im, m, n) if ker else ()
        yield _residue_degree(j, m, inv)


def cohomology_mod_uct(integral: CohomologyReport, m: int) -> tuple:
    """H^j(C tensor Z/m) = H^j(C) tensor Z/m + Tor(H^{j+1}(C), Z/m)."""
    out = []
    degs = integral.degrees
    for j, h in enumerate(degs):
        cyc = [m] * h.rank + [gcd(t, m) for t in h.torsion]
        if j + 1 < len(degs):
            cyc += [gcd(t, m) for t in degs[j + 1].torsion]
        out.append(_residue_degree(j, m, invariant_factors(cyc)))
    return tuple(out)


# ------------------------------------------------------- H^0 and base change

def integral_h0_basis(C: CechComplex) -> list[list[int]]:
    """Z-basis of ker D^0 (columns of V beyond the rank in U D^0 V = S)."""
    n = C.dims[0]
    if C.top == 0 or not C.dims[1]:
        return [[int(a == b) for b in range(n)] for a in range(n)]
    snf = smith_normal_form(C.boundaries[0], n)
    r = snf.rank
    V = snf.V
    return [[V[i][c] for i in range(n)] for c in range(r, n)]


def h0_kernel(C: CechComplex, ring: RingDescriptor):
    n = C.dims[0]
    if C.top == 0 or not C.dims[1]:
        return [[int(a == b) for b in range(n)] for a in range(n)]
    if ring.is_field:
        return rank_and_kernel(C.boundaries[0], ring, n)[1]
    return kernel_mod(transpose(C.boundaries[0], n), ring.modulus, n, C.dims[1])


def base_change_check(C: CechComplex, ring: RingDescriptor, basis=None) -> dict:
    """Compare the reduction of a Z-basis of H^0 with H^0 over the ring."""
    basis = integral_h0_basis(C) if basis is None else basis
    n = C.dims[0]
    r = len(basis)
    if ring.kind == "Z":
        return {"ring": ring.name, "rank": r, "iso": True}
    if ring.is_field:
        reduced = [[ring.reduce(x) for x in v] for v in basis]
        kdim = len(h0_kernel(C, ring))
        rk = field_rank(reduced, ring, n) if reduced else 0
        in_kernel = all(not any(ring.reduce(sum(a * b for a, b in zip(row, v))) for row in C.boundaries[0])
                        for v in reduced) if C.top else True
        return {"ring": ring.name, "rank": r, "image_rank": rk, "kernel_dim": kdim,
                "iso": rk == kdim == r and in_kernel}
    m = ring.modulus
    ker = h0_kernel(C, ring)
    mine = howell_form(basis, m, n)
    theirs = howell_form(ker, m, n)
    inv = span_invariants(mine, m, n)
    return {"ring": ring.name, "rank": r, "invariants": list(inv),
            "iso": mine == theirs and list(inv) == [m] * r}


# ------------------------------------------------------------ verify suites

@dataclass
class Setting:
    """A ball with its shared working arrangement and cached systems."""

    params: GlobalParams
    radius: int
    ball: BallComplex
    arrangement: object
    systems: dict = field(default_factory=dict)
    complexes: dict = field(default_factory=dict)

    @classmethod
    def create(cls, params: GlobalParams, radius: int, arrangement=None, mode="minimal",
               cap: int | None = None):
        ball = ball_complex(params, radius) if cap is None else ball_complex(params, radius, cap)
        if arrangement is None:
            sims = [ball.simplex(k) for k in ball.all_simplices()]
            arrangement = working_arrangement(params, sims, mode)
        return cls(params, radius, ball, arrangement)

    def system(self, k: int) -> OSCoefficientSystem:
        s = self.systems.get(k)
        if s is None:
            s = OSCoefficientSystem(self.ball, self.arrangement, k)
            self.systems[k] = s
        return s

    def complex(self, k: int) -> CechComplex:
        c = self.complexes.get(k)
        if c is None:
            c = build_cech(self.ball.simplices, self.system(k))
            self.complexes[k] = c
        return c


def default_rings(p: int) -> list[RingDescriptor]:
    ells = [e for e in (2, 3, 5, 7) if e != p]
    rings = [RATIONALS, INTEGERS]
    for e in ells:
        rings += [prime_field(e), residue_ring(e * e)]
    return rings


def _only_p_torsion(torsion, p: int) -> bool:
    return all(set(factorize(t)) <= {p} for t in torsion)


def _witness(C: CechComplex, j: int) -> list | None:
    """A rational cocycle in degree j that is not a coboundary."""
    n = C.dims[j]
    if j < C.top and C.dims[j + 1]:
        kernel = rank_and_kernel(C.boundaries[j], RATIONALS, n)[1]
    else:
        kernel = [[int(a == b) for b in range(n)] for a in range(n)]
    im = transpose(C.boundaries[j - 1], C.dims[j - 1]) if j and C.dims[j - 1] else []
    base = field_rank(im, RATIONALS, n) if im else 0
    for v in kernel:
        if field_rank(im + [v], RATIONALS, n) > base:
            return [str(x) for x in v]
    return None


def verify_setting(setting: Setting, k: int, rings, next_setting: Setting | None = None) -> list[dict]:
    """Clauses (a)-(e) for one ball, one degree k and the given rings."""
    p = setting.params.p
    C = setting.complex(k)
    clauses = []
    tag = {"d": setting.params.d, "p": p, "radius": setting.radius, "k": k}
    reports = {}
    for ring in rings:
        reports[ring.name] = cohomology(C, ring)
    integral = reports.get("Z") or cohomology(C, INTEGERS)
    # (a) acyclicity
    for ring in rings:
        rep = reports[ring.name]
        if ring.kind == "Z":
            ok = all(h.rank == 0 and _only_p_torsion(h.torsion, p) for h in rep.degrees[1:])
        else:
            ok = all(h.is_zero() for h in rep.degrees[1:])
        entry = {"id": "a", **tag, "ring": ring.name, "status": "pass" if ok else "fail",
                 "cohomology": [h.to_json() for h in rep.degrees]}
        if not ok:
            bad = next(h.degree for h in rep.degrees[1:] if h.rank or h.torsion)
            entry["witness"] = {"degree": bad, "cocycle": _witness(C, bad)}
        clauses.append(entry)
    # (b) freeness of integral H^0 away from p
    h0z = integral[0]
    ok = _only_p_torsion(h0z.torsion, p)
    clauses.append({"id": "b", **tag, "ring": "Z", "status": "pass" if ok else "fail",
                    "rank": h0z.rank, "torsion": list(h0z.torsion)})
    # (c) flatness: equal H^0 ranks; Z/l^2 computed two ways
    ranks = {}
    ok = True
    for ring in rings:
        h = reports[ring.name][0]
        if ring.kind == "Zm":
            uct = cohomology_mod_uct(integral, ring.modulus)
            agree = tuple(reports[ring.name].degrees) == uct
            ok &= agree and not h.torsion
        ranks[ring.name] = h.rank
        ok &= h.rank == h0z.rank
    clauses.append({"id": "c", **tag, "status": "pass" if ok else "fail", "ranks": ranks})
    # (d) base change on bases
    basis = integral_h0_basis(C)
    checks = [base_change_check(C, ring, basis) for ring in rings]
    ok = all(c["iso"] for c in checks)
    clauses.append({"id": "d", **tag, "status": "pass" if ok else "fail", "checks": checks})
    # (e) transition map of the projective system
    if next_setting is not None:
        clauses.append(transition_record(next_setting, setting.radius, k, tag))
    return clauses


def transition_record(bigger: Setting, radius: int, k: int, tag: dict) -> dict:
    """H^0(B(n+1)) -> H^0(B(n)) computed with the arrangement of B(n+1)."""
    small_ball = ball_complex(bigger.params, radius)
    Cs = build_cech(small_ball.simplices,
                    OSCoefficientSystem(small_ball, bigger.arrangement, k))
    Cb = bigger.complex(k)
    # vertex indices differ between balls; match through canonical reps
    remap = {}
    for j, keys in Cs.simplices.items():
        for key in keys:
            remap[key] = tuple(bigger.ball.index[small_ball.vertices[i].rep] for i in key)
    big_offsets = {remap[key]: key for j in Cs.simplices for key in Cs.simplices[j]}
    basis_big = integral_h0_basis(Cb)
    images = []
    for v in basis_big:
        w = [0] * Cs.dims[0]
        for bkey, (b0, rb) in Cb.offsets[0].items():
            skey = big_offsets.get(bkey)
            if skey is None:
                continue
            s0, r = Cs.offsets[0][skey]
            w[s0:s0 + r] = v[b0:b0 + r]
        images.append(w)
    target = integral_h0_basis(Cs)
    n = Cs.dims[0]
    rank_q = field_rank(images, RATIONALS, n) if images else 0
    free, tors = quotient_invariants(target, images, n) if images else (len(target), [])
    return {"id": "e", **tag, "status": "recorded", "source_rank": len(basis_big),
            "target_rank": len(target), "map_rank": rank_q,
            "surjective_over_Z": free == 0 and not tors, "cokernel_torsion": list(tors)}
