"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line; the lines
are repeated in the pytest terminal summary. Run standalone with
``python3 tests/test_acceptance.py`` for just the ten lines."""
import os
import subprocess
import sys
import time

import pytest

from btcoh.building import GlobalParams
from btcoh.cech import Setting
from btcoh.normal_forms import INTEGERS, RATIONALS, prime_field, residue_ring
from btcoh import suites

WORKERS = os.cpu_count() or 1
RESULTS: dict = {}
TREE_AND_PLANE = [(1, 2), (1, 3), (2, 2)]


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def acceptance_rings(p: int) -> list:
    """Q, Z and, for every l in {2,3,5,7} other than p, F_l and Z/l^2."""
    rings = [RATIONALS, INTEGERS]
    for ell in (2, 3, 5, 7):
        if ell != p:
            rings += [prime_field(ell), residue_ring(ell * ell)]
    return rings


@pytest.fixture(scope="module")
def b1_settings():
    return {dp: Setting.create(GlobalParams(*dp), 1) for dp in TREE_AND_PLANE}


@pytest.fixture(scope="module")
def cech_runs():
    runs = {}
    for d, p, n in [(1, 2, 2), (1, 3, 2), (2, 2, 1)]:
        runs[(d, p, n)] = timed(suites.cech_check, GlobalParams(d, p), n, acceptance_rings(p))
    return runs


def test_criterion_01_distance_equals_bfs():
    cases = [((1, 2), 4), ((1, 3), 4), ((2, 2), 2)]
    start = time.perf_counter()
    results = [suites.distance_check(GlobalParams(*dp), r) for dp, r in cases]
    elapsed = time.perf_counter() - start
    ok = all(r["status"] == "pass" for r in results) and elapsed < 120
    pairs = sum(r["pairs"] for r in results)
    record(1, ok, f"{pairs} vertex pairs agree with BFS in {elapsed:.1f}s (< 120s)")


def test_criterion_02_apartment_convexity():
    start = time.perf_counter()
    results = [suites.apartment_check(GlobalParams(*dp), max_radius=3, count=20, seed=0, width=4)
               for dp in TREE_AND_PLANE]
    elapsed = time.perf_counter() - start
    ok = all(r["status"] == "pass" for r in results) and elapsed < 60
    points = sum(r["points"] for r in results)
    record(2, ok, f"20 apartments per (d,p), {points} window points, n <= 3, "
                  f"{elapsed:.1f}s (< 60s)")


def test_criterion_03_nbc_basis(b1_settings):
    start = time.perf_counter()
    results = [suites.nbc_check(b1_settings[dp], WORKERS, seed=0) for dp in TREE_AND_PLANE]
    elapsed = time.perf_counter() - start
    simplices = [s for r in results for s in r["simplices"]]
    ok = (all(r["status"] == "pass" for r in results)
          and all(s["integral"] for s in simplices)
          and all(len(s["orders"]) == 3 for s in simplices)
          and elapsed < 300)
    record(3, ok, f"{len(simplices)} simplices of B(1): special chains = oracle ranks over "
                  f"Q and F_l, integral, 3 alternative orders, {elapsed:.1f}s (< 300s)")


def test_criterion_04_vertex_sanity(b1_settings):
    results = [suites.vertex_sanity_check(b1_settings[dp]) for dp in [(1, 2), (1, 3)]]
    ok = all(r["status"] == "pass" for r in results)
    detail = ", ".join(f"p={r['p']}: A^1 ranks {sorted({v['a1'] for v in r['vertices']})}"
                       for r in results)
    record(4, ok, detail)


def _clauses(cech_runs, ident):
    return [c for (res, _) in cech_runs.values() for c in res["clauses"] if c["id"] == ident]


def test_criterion_05_acyclicity(cech_runs):
    clauses = _clauses(cech_runs, "a")
    elapsed = sum(t for _, t in cech_runs.values())
    settings = {(c["d"], c["p"], c["radius"]) for c in clauses}
    expected = {(1, 2, 1), (1, 2, 2), (1, 3, 1), (1, 3, 2), (2, 2, 1)}
    ok = (all(c["status"] == "pass" for c in clauses) and expected <= settings
          and elapsed < 600)
    record(5, ok, f"H^i = 0 for i >= 1 in {len(clauses)} (setting, k, ring) cases "
                  f"(over Z up to p-torsion), {elapsed:.1f}s (< 600s)")


def test_criterion_06_flatness(cech_runs):
    b = _clauses(cech_runs, "b")
    c = _clauses(cech_runs, "c")
    ok = bool(b) and bool(c) and all(x["status"] == "pass" for x in b + c)
    record(6, ok, f"H^0 ranks agree over Q, Z, F_l, Z/l^2 in {len(c)} cases; "
                  f"no l-torsion; Z/l^2 direct = universal coefficients")


def test_criterion_07_base_change(cech_runs):
    clauses = _clauses(cech_runs, "d")
    ok = bool(clauses) and all(x["status"] == "pass" for x in clauses)
    checks = sum(len(x["checks"]) for x in clauses)
    record(7, ok, f"H^0(Z) tensor L -> H^0(L) is an isomorphism in {checks} cases")


def test_criterion_08_signature_duality(b1_settings):
    start = time.perf_counter()
    results = [suites.signature_check(b1_settings[dp], WORKERS) for dp in TREE_AND_PLANE]
    elapsed = time.perf_counter() - start
    simplices = [s for r in results for s in r["simplices"]]
    ok = all(s["vanish"] and s["spans"] and s["triangular"] for s in simplices)
    record(8, ok, f"{len(simplices)} simplices tau: forms vanish on the ideal, span the dual, "
                  f"triangular witness found, {elapsed:.1f}s")


def test_criterion_09_koszul_degree_one():
    r = suites.koszul_check(max_size=7)
    record(9, r["status"] == "pass", f"exact in degree 1 for |A| <= 7 over "
                                     f"{sorted({x['ring'] for x in r['results']})}")


def test_criterion_10_determinism(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"verify{i}.json"
        subprocess.run([sys.executable, "-m", "btcoh", "verify", "--d", "1", "--p", "2",
                        "--radius", "2", "--seed", "0", "--output", str(path)], check=True)
        outs.append(path.read_bytes())
    record(10, outs[0] == outs[1], f"two verify runs, {len(outs[0])} bytes each, identical")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
