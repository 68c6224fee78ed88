"""Verification suites shared by the ``verify`` command and the acceptance
tests. Each check returns a JSON-ready dict with a ``status`` field."""
from __future__ import annotations

import itertools
import random
from math import gcd
from concurrent.futures import ProcessPoolExecutor

from .arrangement import HyperplaneRep, stratify
from .building import (GlobalParams, ball_complex, bfs_distances, canonicalize,
                       apartment_f_value, contiguous_simplices, distance, normalize_simplex,
                       sample_apartments)
from .cech import Setting, default_rings, verify_setting
from .normal_forms import RATIONALS, field_rank, prime_field
from .orlik_solomon import (OSAlgebra, SignatureForm, differential, ideal_rows,
                            koszul_degree_one, monomial, oracle_ranks)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def pmap(fn, items, workers: int = 1):
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# ------------------------------------------------------------------ building

def distance_check(params: GlobalParams, radius: int) -> dict:
    """Invariant-factor distance against BFS in the 1-skeleton of B(radius),
    for every ordered pair of vertices."""
    ball = ball_complex(params, radius)
    adj = ball.adjacency()
    V = ball.vertices
    mismatches = []
    for i in range(len(V)):
        bfs = bfs_distances(adj, i)
        for j in range(len(V)):
            dv = distance(V[i], V[j])
            if bfs.get(j) != dv:
                mismatches.append([i, j, dv, bfs.get(j)])
    out = {"id": "distance", "d": params.d, "p": params.p, "radius": radius,
           "vertices": len(V), "pairs": len(V) ** 2, "status": _status(not mismatches)}
    if mismatches:
        out["witness"] = mismatches[0]
    return out


def window_points(d: int, width: int):
    for rest in itertools.product(range(-width, width + 1), repeat=d):
        yield (0,) + rest


def apartment_check(params: GlobalParams, max_radius: int = 3, count: int = 20,
                    seed: int = 0, width: int = 4) -> dict:
    """f(x) <= n iff the apartment vertex lies in B(n), f equals the distance
    from s_0, and f is convex along lattice segments of the window."""
    balls = [{v.rep for v in ball_complex(params, n).vertices} for n in range(max_radius + 1)]
    s0 = params.standard_vertex
    failures = []
    checked = 0
    for ai, A in enumerate(sample_apartments(params.d, params.p, count, seed)):
        fvals = {}
        for x in window_points(params.d, width):
            f = apartment_f_value(A, x)
            fvals[x] = f
            v = A.vertex(x)
            checked += 1
            if f != distance(s0, v):
                failures.append({"apartment": ai, "x": list(x), "kind": "distance"})
            for n, members in enumerate(balls):
                if (f <= n) != (v.rep in members):
                    failures.append({"apartment": ai, "x": list(x), "n": n, "kind": "ball"})
        pts = list(fvals)
        for x, y in itertools.combinations(pts, 2):
            diff = [b - a for a, b in zip(x, y)]
            g = 0
            for t in diff:
                g = gcd(g, t)
            for j in range(1, g):
                z = tuple(a + j * t // g for a, t in zip(x, diff))
                if fvals[z] > max(fvals[x], fvals[y]):
                    failures.append({"apartment": ai, "kind": "convexity",
                                     "x": list(x), "y": list(y), "z": list(z)})
    out = {"id": "apartment", "d": params.d, "p": params.p, "apartments": count,
           "seed": seed, "window": width, "max_radius": max_radius, "points": checked,
           "status": _status(not failures)}
    if failures:
        out["witness"] = failures[0]
    return out


# ----------------------------------------------------------- Orlik-Solomon

def oracle_rings(p: int) -> list:
    return [RATIONALS] + [prime_field(e) for e in (2, 3, 5) if e != p]


def alternative_orders(m: int, seed: int = 0) -> list[tuple[str, tuple]]:
    rng = random.Random(seed)
    out = [("reversed", tuple(range(m - 1, -1, -1)))]
    for t in range(2):
        perm = list(range(m))
        rng.shuffle(perm)
        out.append((f"shuffle{seed}-{t}", tuple(perm)))
    return out


def _nbc_one(job) -> dict:
    """Special-chain counts against oracle ranks for one simplex."""
    d, p, level, coords, reps, key, orders = job
    sigma = normalize_simplex([canonicalize([list(r) for r in rep], p) for rep in reps])
    A = [HyperplaneRep(tuple(c), level, p) for c in coords]
    alg = OSAlgebra(stratify(A, sigma))
    top = d + 1
    counts = alg.special_counts(top)
    acounts = alg.a_counts(d)
    oracle = {}
    ok = True
    integral = True
    for ring in oracle_rings(p):
        o = oracle_ranks(alg.all_circuits(), len(A), d, ring)
        oracle[ring.name] = {"tilde": list(o.tilde), "a": list(o.a)}
        ok &= tuple(counts[:d + 1]) == o.tilde and tuple(acounts) == o.a
    for k in range(d + 1):
        for u in itertools.combinations(range(len(A)), k):
            if not all(isinstance(c, int) for c in alg.straighten_monomial(u).values()):
                integral = False
    order_counts = {}
    for name, perm in orders:
        alt = OSAlgebra(stratify([A[i] for i in perm], sigma))
        order_counts[name] = alt.special_counts(top)
        ok &= order_counts[name][:d + 1] == counts[:d + 1]
        ok &= alt.a_counts(d) == acounts
    return {"simplex": list(key), "type": list(sigma.type), "special": counts,
            "a_basis": acounts, "oracle": oracle, "orders": order_counts,
            "integral": integral, "status": _status(ok and integral)}


def nbc_check(setting: Setting, workers: int = 1, seed: int = 0) -> dict:
    params = setting.params
    W = setting.arrangement
    m = len(W)
    orders = alternative_orders(m, seed)
    coords = [list(h.coords) for h in W.hyperplanes]
    jobs = []
    for key in setting.ball.all_simplices():
        s = setting.ball.simplex(key)
        jobs.append((params.d, params.p, W.level, coords, [v.rep for v in s.vertices], key, orders))
    results = pmap(_nbc_one, jobs, workers)
    ok = all(r["status"] == "pass" for r in results)
    return {"id": "nbc", "d": params.d, "p": params.p, "radius": setting.radius,
            "arrangement_size": m, "orders": [o[0] for o in orders],
            "simplices": results, "status": _status(ok)}


def vertex_sanity_check(setting: Setting) -> dict:
    """A^1 at every vertex has rank p (d = 1), by basis count and oracle."""
    params = setting.params
    A = setting.arrangement.hyperplanes
    rows = []
    ok = True
    for (i,) in setting.ball.simplices[0]:
        alg = OSAlgebra(stratify(A, setting.ball.simplex((i,))))
        count = len(alg.a_basis(1))
        o = oracle_ranks(alg.all_circuits(), len(A), 1, RATIONALS)
        rows.append({"vertex": i, "a1": count, "oracle": o.a[1]})
        ok &= count == o.a[1] == params.p
    return {"id": "vertex_a1", "d": params.d, "p": params.p, "vertices": rows,
            "status": _status(ok)}


def koszul_check(max_size: int = 7, rings=None) -> dict:
    rings = rings or [RATIONALS, prime_field(2), prime_field(3), prime_field(5)]
    rows = []
    ok = True
    for m in range(1, max_size + 1):
        for ring in rings:
            ker, im = koszul_degree_one(m, ring)
            rows.append({"size": m, "ring": ring.name, "ker": ker, "im": im})
            ok &= ker == im
    return {"id": "koszul", "max_size": max_size, "results": rows, "status": _status(ok)}


def signature_one(alg_tau: OSAlgebra, A, tau) -> dict:
    """Vanishing, spanning and the triangular property of the signature forms
    of simplices contiguous to tau, on A^k(tau) with k = dim tau."""
    k = tau.dim
    m = len(A)
    cont = contiguous_simplices(tau, k)
    forms = [(s, stratify(A, s)) for s in cont]
    vanish_ok = True
    gens = list(ideal_rows(alg_tau.all_circuits(), m, k + 1))
    closed = [differential({u: 1}) for u in itertools.combinations(range(m), k + 2)]
    for _, S in forms:
        l = SignatureForm(S)
        if any(l(g) for g in gens) or any(l(g) for g in closed):
            vanish_ok = False
            break
    basis = alg_tau.a_basis(k)
    chains = [(alg_tau.top,) + s for s in basis]
    M = [[SignatureForm(S)(monomial(t)) for t in chains] for _, S in forms]
    rank = field_rank(M, RATIONALS, len(chains)) if M and chains else 0
    triangular = True
    for t in chains:
        later = [s for s in chains if s > t]  # lexicographic on chain sequences
        hit = False
        for _, S in forms:
            for shift in range(k + 1):
                l = SignatureForm(S, shift)
                if l.on_sequence(t) == 1 and all(l.on_sequence(s) == 0 for s in later):
                    hit = True
                    break
            if hit:
                break
        if not hit:
            triangular = False
            break
    return {"contiguous": len(cont), "generators": len(gens), "vanish": vanish_ok,
            "dual_rank": rank, "a_rank": len(chains), "spans": rank == len(chains),
            "triangular": triangular,
            "status": _status(vanish_ok and rank == len(chains) and triangular)}


def _signature_job(job) -> dict:
    d, p, level, coords, reps, key = job
    tau = normalize_simplex([canonicalize([list(r) for r in rep], p) for rep in reps])
    A = [HyperplaneRep(tuple(c), level, p) for c in coords]
    res = signature_one(OSAlgebra(stratify(A, tau)), A, tau)
    res["simplex"] = list(key)
    return res


def signature_check(setting: Setting, workers: int = 1) -> dict:
    params = setting.params
    coords = [list(h.coords) for h in setting.arrangement.hyperplanes]
    level = setting.arrangement.level
    jobs = [(params.d, params.p, level, coords, [v.rep for v in setting.ball.simplex(k).vertices], k)
            for k in setting.ball.all_simplices()]
    results = pmap(_signature_job, jobs, workers)
    return {"id": "signature", "d": params.d, "p": params.p, "radius": setting.radius,
            "simplices": results,
            "status": _status(all(r["status"] == "pass" for r in results))}


# -------------------------------------------------------------------- Cech

def cech_check(params: GlobalParams, radius: int, rings=None, mode: str = "minimal") -> dict:
    """Clauses (a)-(e) for all n <= radius and k <= d."""
    rings = rings or default_rings(params.p)
    settings = {}
    top = Setting.create(params, radius, mode=mode)
    settings[radius] = top
    for n in range(radius - 1, 0, -1):
        settings[n] = Setting.create(params, n, mode=mode)
    clauses = []
    for n in range(1, radius + 1):
        nxt = settings.get(n + 1)
        for k in range(params.d + 1):
            clauses.extend(verify_setting(settings[n], k, rings, nxt))
    ok = all(c["status"] != "fail" for c in clauses)
    return {"id": "cech", "d": params.d, "p": params.p, "radius": radius,
            "rings": [r.name for r in rings],
            "arrangements": {str(n): {"level": s.arrangement.level, "size": len(s.arrangement)}
                             for n, s in sorted(settings.items())},
            "clauses": clauses, "status": _status(ok)}

