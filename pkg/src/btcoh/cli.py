"""Command-line front end: ``btcoh {ball,distance,arrangement,os,cech,verify}``.

Every command prints (or writes to --output) one JSON report tagged with the
schema version and the validated configuration. Exit status: 0 on success,
1 when a verification clause fails, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import SCHEMA, __version__
from .arrangement import enumerate_H, stratify
from .building import (DEFAULT_SIZE_CAP, BallTooLarge, GlobalParams, ball_complex,
                       canonicalize, distance)
from .cech import Setting, cohomology, cohomology_mod_uct, default_rings
from .normal_forms import INTEGERS, RATIONALS, RingDescriptor, is_prime
from .orlik_solomon import OSAlgebra, oracle_ranks
from . import suites

OUTPUT_DIR_ENV = "BTCOH_OUTPUT_DIR"

# total orders every downstream choice depends on
ORDERS = {"vertices": "lex on canonical column Hermite form",
          "simplices": "lex on sorted vertex indices",
          "hyperplanes": "lex on canonical coefficient vectors"}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    d: int = 1
    p: int = 2
    radius: int = 1
    rings: list = field(default_factory=list)
    level: int = 1
    k: int = 0
    mode: str = "minimal"
    size_cap: int = DEFAULT_SIZE_CAP
    seed: int = 0
    apartments: int = 20
    output: str | None = None
    workers: int = 1
    verbose: bool = False
    timing: bool = False
    full: bool = False
    matrices: list = field(default_factory=list)

    def validate(self) -> None:
        if self.d < 1:
            raise UsageError("--d must be >= 1")
        if not is_prime(self.p):
            raise UsageError(f"--p {self.p} is not prime")
        if self.radius < 0:
            raise UsageError("--radius must be >= 0")
        if self.level < 1:
            raise UsageError("--level must be >= 1")
        if not 0 <= self.k <= self.d:
            raise UsageError("--k must lie in [0, d]")
        if self.mode not in ("minimal", "full"):
            raise UsageError("--mode must be minimal or full")
        if self.size_cap < 1 or self.apartments < 1 or self.workers < 1:
            raise UsageError("caps, apartment counts and worker counts must be positive")
        for r in self.rings:
            try:
                RingDescriptor.parse(r)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc

    def to_json(self) -> dict:
        out = asdict(self)
        for key in ("output", "workers", "verbose", "timing"):
            out.pop(key)  # do not affect results
        return out


def _parse_matrix(text: str) -> list:
    try:
        rows = json.loads(text)
        return [[Fraction(str(x)) for x in r] for r in rows]
    except (ValueError, TypeError) as exc:
        raise UsageError(f"cannot parse matrix {text!r}") from exc


def _rings(cfg: RunConfig) -> list:
    if cfg.rings:
        return [RingDescriptor.parse(r) for r in cfg.rings]
    return default_rings(cfg.p)


# ------------------------------------------------------------------ commands

def cmd_ball(cfg: RunConfig) -> tuple[dict, bool]:
    ball = ball_complex(GlobalParams(cfg.d, cfg.p), cfg.radius, cfg.size_cap)
    return ball.to_json(full=cfg.full), True


def cmd_distance(cfg: RunConfig) -> tuple[dict, bool]:
    if len(cfg.matrices) != 2:
        raise UsageError("distance needs --a and --b")
    a, b = (_parse_matrix(m) for m in cfg.matrices)
    n = cfg.d + 1
    if any(len(M) != n or any(len(r) != n for r in M) for M in (a, b)):
        raise UsageError(f"matrices must be {n}x{n}")
    try:
        A, B = canonicalize(a, cfg.p), canonicalize(b, cfg.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return {"a": A.to_json(), "b": B.to_json(), "distance": distance(A, B)}, True


def cmd_arrangement(cfg: RunConfig) -> tuple[dict, bool]:
    params = GlobalParams(cfg.d, cfg.p)
    H = enumerate_H(cfg.d, cfg.p, cfg.level)
    out = {"level": cfg.level, "count": len(H), "hyperplanes": [h.to_json() for h in H]}
    ball = ball_complex(params, cfg.radius, cfg.size_cap)
    out["stratifications"] = [{"simplex": list(key), **stratify(H, ball.simplex(key)).to_json()}
                              for key in ball.all_simplices()]
    return out, True


def cmd_os(cfg: RunConfig) -> tuple[dict, bool]:
    params = GlobalParams(cfg.d, cfg.p)
    setting = Setting.create(params, cfg.radius, mode=cfg.mode, cap=cfg.size_cap)
    A = setting.arrangement.hyperplanes
    rings = [r for r in _rings(cfg) if r.is_field] or [RATIONALS]
    rows = []
    ok = True
    for key in setting.ball.all_simplices():
        alg = OSAlgebra(stratify(A, setting.ball.simplex(key)))
        rep = {"simplex": list(key), **alg.to_json(cfg.d + 1), "oracle": {}}
        for ring in rings:
            o = oracle_ranks(alg.all_circuits(), len(A), cfg.d, ring)
            rep["oracle"][ring.name] = {"tilde": list(o.tilde), "a": list(o.a)}
            ok &= tuple(rep["special_counts"][:cfg.d + 1]) == o.tilde
            ok &= tuple(rep["a_counts"][:cfg.d + 1]) == o.a
        rows.append(rep)
    return {"arrangement": setting.arrangement.to_json(), "simplices": rows,
            "status": "pass" if ok else "fail"}, ok


def cmd_cech(cfg: RunConfig) -> tuple[dict, bool]:
    params = GlobalParams(cfg.d, cfg.p)
    setting = Setting.create(params, cfg.radius, mode=cfg.mode, cap=cfg.size_cap)
    C = setting.complex(cfg.k)
    reports = []
    for ring in _rings(cfg):
        rep = cohomology(C, ring).to_json()
        if ring.kind == "Zm":
            uct = cohomology_mod_uct(cohomology(C, INTEGERS), ring.modulus)
            rep["universal_coefficients"] = [h.to_json() for h in uct]
        reports.append(rep)
    return {"k": cfg.k, "arrangement": setting.arrangement.to_json(),
            "euler_characteristic": C.euler_characteristic(), "reports": reports}, True


def cmd_verify(cfg: RunConfig) -> tuple[dict, bool]:
    params = GlobalParams(cfg.d, cfg.p)
    rings = _rings(cfg)
    results = []
    results.append(suites.distance_check(params, cfg.radius))
    results.append(suites.apartment_check(params, min(cfg.radius, 3), cfg.apartments, cfg.seed))
    b1 = Setting.create(params, 1, mode=cfg.mode, cap=cfg.size_cap)
    results.append(suites.nbc_check(b1, cfg.workers, cfg.seed))
    if cfg.d == 1:
        results.append(suites.vertex_sanity_check(b1))
    results.append(suites.signature_check(b1, cfg.workers))
    results.append(suites.koszul_check())
    if cfg.radius >= 1:
        results.append(suites.cech_check(params, cfg.radius, rings, cfg.mode))
    ok = all(r["status"] != "fail" for r in results)
    summary = [{"id": r["id"], "status": r["status"]} for r in results]
    return {"summary": summary, "results": results,
            "status": "pass" if ok else "fail"}, ok


COMMANDS = {"ball": cmd_ball, "distance": cmd_distance, "arrangement": cmd_arrangement,
            "os": cmd_os, "cech": cmd_cech, "verify": cmd_verify}


# ------------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="btcoh", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"btcoh {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, radius=True):
        sp.add_argument("--d", type=int, default=1, help="building for PGL_{d+1}")
        sp.add_argument("--p", type=int, default=2, help="residue characteristic")
        if radius:
            sp.add_argument("--radius", type=int, default=1)
        sp.add_argument("--size-cap", type=int, default=DEFAULT_SIZE_CAP)
        sp.add_argument("--output", default=None, help="report path (default: stdout)")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--timing", action="store_true", help="include wall-clock timing")
        sp.add_argument("--verbose", action="store_true")

    sp = sub.add_parser("ball", help="enumerate B(n)")
    common(sp)
    sp.add_argument("--full", action="store_true", help="include vertex and simplex lists")

    sp = sub.add_parser("distance", help="combinatorial distance of two lattices")
    common(sp, radius=False)
    sp.add_argument("--a", required=True, help="generator matrix as JSON, columns generate")
    sp.add_argument("--b", required=True)

    sp = sub.add_parser("arrangement", help="dump H_n and its stratifications over B(n)")
    common(sp)
    sp.add_argument("--level", type=int, default=1)

    for name, helptext in (("os", "Orlik-Solomon reports per simplex"),
                           ("cech", "one Cech cohomology computation"),
                           ("verify", "run the verification matrix")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--rings", default="", help="comma separated, e.g. Q,Z,F3,Z/9")
        sp.add_argument("--mode", default="minimal", choices=["minimal", "full"])
        if name == "cech":
            sp.add_argument("--k", type=int, default=0)
        if name == "verify":
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--apartments", type=int, default=20)
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command, d=args.d, p=args.p,
                    radius=getattr(args, "radius", 0), size_cap=args.size_cap,
                    output=args.output, workers=args.workers, verbose=args.verbose,
                    timing=args.timing)
    if getattr(args, "rings", ""):
        cfg.rings = [r.strip() for r in args.rings.split(",") if r.strip()]
    for name in ("level", "k", "mode", "seed", "apartments", "full"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if args.command == "distance":
        cfg.matrices = [args.a, args.b]
    return cfg


def _output_path(path: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = config_from_args(args)
    try:
        cfg.validate()
        start = time.perf_counter()
        body, ok = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except BallTooLarge as exc:
        print(json.dumps({"schema": SCHEMA, "error": str(exc), "count": exc.count}),
              file=sys.stderr)
        return 2
    report = {"schema": SCHEMA, "command": cfg.command, "config": cfg.to_json(),
              "orders": ORDERS, **body,
              "timing": {"seconds": round(time.perf_counter() - start, 3)} if cfg.timing else None}
    text = json.dumps(report, sort_keys=True, indent=1) + "\n"
    if cfg.output:
        with open(_output_path(cfg.output), "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
