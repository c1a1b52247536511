"""Command-line front end.

Exit codes: 0 all checks pass, 1 error (bad input, size cap, internal),
2 hypothesis gate failed, 3 a check failed.
"""

from __future__ import annotations

import argparse
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from typing import Any, Iterator

import numpy as np

from . import __version__
from .extract import unstructured_pipeline
from .gf2core import F2Set, F2Vector, span_basis
from .generators import FAMILIES, SEEDED, GeneratorSpec, SplitMix64, gen_random
from .report import CheckResult, dumps
from .setfile import SetFileError, format_set, read_set, set_digest, write_set
from .stats import (
    CapExceeded,
    conversion_check,
    freiman_ruzsa_check,
    lemma4_bijection_check,
    lemma6_check,
    lemma7_check,
    markov_check,
    mass_check,
    pr_Z_positive,
    symmetry_profile,
)
from .structured import ChainError, chain_select, containment_checks, scan_astar, structured_B, structured_pipeline

EXIT_OK, EXIT_ERROR, EXIT_GATE, EXIT_CHECK = 0, 1, 2, 3

ALL_CHECKS = ("mass", "lemma6", "lemma7", "lemma8", "eq6", "fr", "containments")
DEFAULT_CHECKS = ("mass", "lemma6", "lemma7", "lemma8", "eq6", "fr")
LEMMA8_ALL_PAIRS_CAP = 32
LEMMA8_SAMPLES = 64
PROFILE_LISTING_CAP = 256
BENCH_NAIVE_PAIRS = 1 << 24
BENCH_SAMPLES = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 2 is reserved for gate failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


class Timer:
    def __init__(self) -> None:
        self.stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = round(time.perf_counter() - t0, 6)


def _echo(args: argparse.Namespace) -> dict[str, Any]:
    skip = {"func", "threads", "out"}
    return {k: (str(v) if isinstance(v, Fraction) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _run_report(args: argparse.Namespace, result: Any, timer: Timer,
                A: F2Set | None = None, exit_code: int = EXIT_OK) -> dict[str, Any]:
    report: dict[str, Any] = {
        "tool": "f2pfr",
        "version": __version__,
        "command": _echo(args),
        "exit_code": exit_code,
        "result": result,
        "timings": timer.stages,
    }
    if A is not None:
        report["input"] = {"dim": A.dim, "size": len(A), "sha256": set_digest(A)}
    return report


def _emit(report: dict[str, Any], out: str | None) -> None:
    text = dumps(report)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------

def cmd_analyze(args: argparse.Namespace) -> int:
    timer = Timer()
    with timer.stage("read"):
        A = read_set(args.setfile)
    with timer.stage("profile"):
        prof = symmetry_profile(A, args.method, threads=args.threads)
    with timer.stage("span"):
        basis = span_basis(A)
    mass = mass_check(A, prof)
    result: dict[str, Any] = {
        "size": len(A),
        "sumset_size": prof.sumset_size,
        "K": prof.K,
        "mass": prof.mass,
        "mean_fiber": prof.mean,
        "mass_identity": mass,
        "span": {"rank": basis.rank, "size": basis.size},
        "fiber_histogram": prof.histogram(),
        "fiber_min": int(prof.counts.min()),
        "fiber_max": int(prof.counts.max()),
    }
    if prof.sumset_size <= PROFILE_LISTING_CAP:
        result["profile"] = {format(s, f"0{A.dim}b"): c for s, c in prof.fibers().items()}
    code = EXIT_CHECK if mass.failed else EXIT_OK
    _emit(_run_report(args, result, timer, A, code), args.out)
    return code


def _verify_containments(A: F2Set, prof, args: argparse.Namespace) -> list[CheckResult]:
    if args.eps is None:
        raise UsageError("containments needs --eps")
    if prof.K == 1:
        return [CheckResult.of("containments", True, detail="K = 1: every fiber is full")]
    if args.astar is not None:
        a_star: Any = F2Vector.from_str(args.astar)
    else:
        a_star = scan_astar(A, args.eps, prof)["a_star"]
    sb = structured_B(A, a_star, args.eps, prof)
    try:
        deltas = chain_select(A, args.eps, args.L, prof).deltas[1:]
    except ChainError:
        deltas = []
        d = 2 * sb.delta0
        while d <= 1:
            deltas.append(d)
            d *= 2
    res = containment_checks(A, sb.B, args.eps, deltas, prof)
    res.values["a_star"] = sb.a_star
    return [res]


def _lemma8_pairs(A: F2Set) -> tuple[list[tuple[int, int]], str]:
    """All pairs for small A, otherwise a fixed seeded sample."""
    bits = A.bits
    if len(A) <= LEMMA8_ALL_PAIRS_CAP:
        return [(x, y) for x in bits for y in bits], "all"
    rng = SplitMix64(0)
    return [(bits[rng.below(len(A))], bits[rng.below(len(A))]) for _ in range(LEMMA8_SAMPLES)], "sampled"


def cmd_verify(args: argparse.Namespace) -> int:
    timer = Timer()
    A = read_set(args.setfile)
    which = args.checks.split(",") if args.checks else list(DEFAULT_CHECKS)
    unknown = sorted(set(which) - set(ALL_CHECKS))
    if unknown:
        raise UsageError(f"unknown checks {unknown}; choose from {list(ALL_CHECKS)}")
    with timer.stage("profile"):
        prof = symmetry_profile(A, threads=args.threads)
    results: dict[str, Any] = {}
    errors: dict[str, str] = {}
    for name in ALL_CHECKS:
        if name not in which:
            continue
        try:
            with timer.stage(name):
                if name == "mass":
                    out = [mass_check(A, prof)]
                elif name == "lemma6":
                    out = [markov_check(A, prof), lemma6_check(A, prof)]
                elif name == "lemma7":
                    out = [lemma7_check(A, args.L, prof), conversion_check(A, args.L, prof)]
                elif name == "lemma8":
                    pairs, mode = _lemma8_pairs(A)
                    checks = [lemma4_bijection_check(A, x, y, prof) for x, y in pairs]
                    bad = [c for c in checks if c.failed]
                    out = [CheckResult.of("lemma8_bijection", not bad, pairs=len(checks), mode=mode,
                                          failures=len(bad), witness=bad[0] if bad else None)]
                elif name == "eq6":
                    mr = pr_Z_positive(A, prof)
                    out = [CheckResult.of(
                        "eq6", mr.ok, E_Z=mr.E_Z, E_Z2=mr.E_Z2, E_Y2=mr.E_Y2, Pr_Z_pos=mr.Pr_Z_pos,
                        paley_zygmund_lower=mr.paley_zygmund_lower, parts=mr.checks,
                    )]
                elif name == "fr":
                    out = [freiman_ruzsa_check(A, prof)]
                else:
                    out = _verify_containments(A, prof, args)
            results[name] = out
        except CapExceeded as exc:
            errors[name] = f"{name}: {exc}"
    failed = any(c.failed for cs in results.values() for c in cs)
    code = EXIT_CHECK if failed else (EXIT_ERROR if errors else EXIT_OK)
    result = {"K": prof.K, "checks": results, "errors": errors}
    _emit(_run_report(args, result, timer, A, code), args.out)
    for msg in errors.values():
        print(f"error: {msg}", file=sys.stderr)
    return code


def _extract_code(status: str) -> int:
    return {"pass": EXIT_OK, "gate_failure": EXIT_GATE}.get(status, EXIT_CHECK)


def cmd_extract(args: argparse.Namespace) -> int:
    timer = Timer()
    A = read_set(args.input)
    with timer.stage("profile"):
        prof = symmetry_profile(A, threads=args.threads)
    with timer.stage("pipeline"):
        if args.mode == "unstructured":
            rep = unstructured_pipeline(A, args.L, force=args.force,
                                        energy_floor=args.energy_floor, profile=prof)
        else:
            if args.astar is None and not args.scan_astar:
                raise UsageError("structured mode needs --astar or --scan-astar")
            a_star = F2Vector.from_str(args.astar) if args.astar is not None else None
            if a_star is not None and a_star.dim != A.dim:
                raise UsageError(f"--astar has {a_star.dim} coordinates, set has {A.dim}")
            rep = structured_pipeline(A, a_star, args.eps, args.L, force=args.force,
                                      scan=args.scan_astar, profile=prof)
    code = _extract_code(rep.status)
    _emit(_run_report(args, rep, timer, A, code), args.out)
    return code


def cmd_generate(args: argparse.Namespace) -> int:
    params: dict[str, Any] = {"n": args.n}
    fam = args.family
    if fam == "weight-one-prefix":
        params["t"] = args.t if args.t is not None else args.n
    elif fam == "subspace":
        params["d"] = _need(args, "d")
    elif fam == "dense-subspace-sample":
        params.update(d=_need(args, "d"), density=_need(args, "density"))
    elif fam == "subspace-plus-points":
        params.update(d=_need(args, "d"), k=_need(args, "k"), coset=args.coset)
    elif fam == "random":
        params["m"] = _need(args, "m")
    if fam in SEEDED:
        params["seed"] = _need(args, "seed")
    A = GeneratorSpec(fam, params).build()
    if args.out:
        write_set(A, args.out)
    else:
        sys.stdout.write(format_set(A))
    return EXIT_OK


def _need(args: argparse.Namespace, name: str) -> Any:
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"family {args.family!r} requires --{name}")
    return value


def cmd_bench(args: argparse.Namespace) -> int:
    timer = Timer()
    rows = []
    rng = SplitMix64(args.seed)
    ok = True
    for n in range(args.n_min, args.n_max + 1):
        m = max(1, int(Fraction(args.density) * (1 << n)))
        A = gen_random(n, m, args.seed + n)
        with timer.stage(f"n{n}_wht"):
            fast = symmetry_profile(A, "wht")
        row: dict[str, Any] = {"n": n, "size": m, "sumset_size": fast.sumset_size}
        if m * m <= BENCH_NAIVE_PAIRS:
            with timer.stage(f"n{n}_naive"):
                slow = symmetry_profile(A, "naive", threads=args.threads)
            row["oracle"] = "naive"
            row["equal"] = fast.same_as(slow)
        else:
            # fibers at seeded sample points, counted directly
            pts = np.array([rng.below(1 << n) for _ in range(BENCH_SAMPLES)], dtype=np.uint64)
            direct = np.array([int(A.contains_many(A.array ^ s).sum()) for s in pts])
            row["oracle"] = f"sampled:{BENCH_SAMPLES}"
            row["equal"] = bool(np.array_equal(direct, fast.lookup(pts)))
        ok &= row["equal"]
        rows.append(row)
    code = EXIT_OK if ok else EXIT_CHECK
    _emit(_run_report(args, {"rows": rows}, timer, None, code), args.out)
    return code


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (results are identical)")
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    p = _Parser(prog="f2pfr", description="Sumsets, symmetry sets and PFR-style extraction over F_2^n.")
    p.add_argument("--version", action="version", version=f"f2pfr {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common], help="profile, doubling, span")
    a.add_argument("setfile")
    a.add_argument("--method", choices=("auto", "naive", "wht"), default="auto")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", parents=[common], help="lemma-level checks")
    v.add_argument("setfile")
    v.add_argument("--checks", help=f"comma list from {','.join(ALL_CHECKS)}")
    v.add_argument("--L", type=_rational, default=Fraction(2))
    v.add_argument("--eps", type=_rational)
    v.add_argument("--astar")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("extract", help="run an extraction pipeline")
    esub = e.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    eu = esub.add_parser("unstructured", parents=[common])
    eu.add_argument("--input", required=True)
    eu.add_argument("--L", type=_rational, required=True)
    eu.add_argument("--energy-floor", type=_rational)
    eu.add_argument("--force", action="store_true")
    eu.set_defaults(func=cmd_extract)
    es = esub.add_parser("structured", parents=[common])
    es.add_argument("--input", required=True)
    es.add_argument("--astar")
    es.add_argument("--scan-astar", action="store_true")
    es.add_argument("--eps", type=_rational, required=True)
    es.add_argument("--L", type=_rational, required=True)
    es.add_argument("--force", action="store_true")
    es.set_defaults(func=cmd_extract)

    g = sub.add_parser("generate", help="write a seeded instance as a set file")
    g.add_argument("family", choices=sorted(FAMILIES))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--t", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--density", type=_rational)
    g.add_argument("--k", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--coset", action="store_true")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", parents=[common], help="naive vs WHT profile kernels")
    b.add_argument("--n-min", type=int, required=True)
    b.add_argument("--n-max", type=int, required=True)
    b.add_argument("--density", type=_rational, default=Fraction(1, 8))
    b.add_argument("--seed", type=int, required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except (SetFileError, UsageError, CapExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
