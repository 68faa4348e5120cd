"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails (the report is
still written), 2 for usage errors and malformed input.
"""
from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from . import mutations, props, sectors, twodim
from .cache import cache_get_or_build
from .errors import ChiralForgeError
from .exactlin import to_fraction
from .props import SCHEMA_VERSION, VerificationReport
from .testfunctions import TestFunction
from .vertex import VertexSeries

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

VERIFY_SUITES = ("heisenberg", "virasoro", "gram", "braiding", "primarity", "locality", "energy", "chain",
                 "normal-product")
SECTOR_COMMANDS = ("check-1d", "check-2d", "lr", "shift-fields")
TWODIM_COMMANDS = ("locality", "smear", "commutator-decay")


class UsageError(Exception):
    pass


@lru_cache(maxsize=1)
def git_rev() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=Path(__file__).resolve().parent,
                             capture_output=True, text=True, timeout=5, check=True)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _rational(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return x


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from exc


def parse_group(text: str) -> sectors.AbelianGroup:
    """``"Z"``, ``"Z2"``, ``"Z2xZ3"``, ``"ZxZ2"``: free factors and cyclic orders."""
    free, torsion = 0, []
    for part in text.replace(" ", "").split("x"):
        if part == "Z":
            free += 1
        elif part.startswith("Z") and part[1:].isdigit():
            torsion.append(int(part[1:]))
        else:
            raise UsageError(f"cannot parse group {text!r}")
    return sectors.AbelianGroup(free, tuple(torsion))


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=_rational, default=Fraction(1), help="charge alpha (p/q)")
    common.add_argument("--beta", type=_rational, default=Fraction(1), help="second charge (p/q)")
    common.add_argument("--cutoff", type=int, default=None, help="grading cutoff N")
    common.add_argument("--m-range", type=int, default=None, help="largest |m| for mode commutators")
    common.add_argument("--tol", type=_positive, default=1e-9, help="tolerance of float suites")
    common.add_argument("--cache-dir", default=None, help="mode cache directory (else $CHIRALFORGE_CACHE)")
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized samples")
    common.add_argument("--mutate", action="append", default=[], choices=mutations.KNOWN,
                        help="enable a deliberate bug (repeatable)")

    parser = argparse.ArgumentParser(prog="chiralforge", description="Exact checks for U(1) vertex operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="identity suites")
    verify.add_argument("suite", choices=VERIFY_SUITES)
    verify.add_argument("--k-max", type=int, default=3, help="chain depth for the commutator chain")

    sec = sub.add_parser("sectors", parents=[common], help="sector admissibility")
    sec.add_argument("action", choices=SECTOR_COMMANDS)
    sec.add_argument("--spec", default=None, help="sector spec JSON")
    sec.add_argument("--group", default="Z", help="group for shift-fields, e.g. Z2xZ3")
    sec.add_argument("--window", type=int, default=8, help="grading window of free factors")
    sec.add_argument("--pairing", choices=sectors.PAIRINGS, default="conjugate")
    sec.add_argument("--single-leg", action="store_true", help="drop the conjugate leg of the Q-system")

    two = sub.add_parser("twodim", parents=[common], help="two-dimensional fields")
    two.add_argument("action", choices=TWODIM_COMMANDS)
    two.add_argument("--pairing", choices=("spacelike", "same-sign"), default="spacelike")
    two.add_argument("--same-legs", action="store_true", help="use R(n) = L(n) instead of the conjugate")
    two.add_argument("--width", type=_positive, default=0.5, help="Gaussian width of test functions")
    two.add_argument("--window", type=_positive, default=8.0, help="Fourier window of test functions")
    two.add_argument("--cutoffs", type=_int_list, default=[4, 6, 8], help="comma separated cutoffs")

    sub.add_parser("demo", parents=[common], help="full battery of checks")
    return parser


# ------------------------------------------------------------------ running

def _cached_builder(cache_dir):
    def build(alpha, s, beta, cutoff):
        return cache_get_or_build(alpha, s, beta, cutoff, cache_dir)
    return build


def _cutoff(args, default: int) -> int:
    n = default if args.cutoff is None else args.cutoff
    if n < 0:
        raise UsageError("cutoff must be non-negative")
    return n


def _m_range(args, default: int) -> int:
    return default if args.m_range is None else args.m_range


def run_verify(args) -> VerificationReport:
    a, b = args.alpha, args.beta
    suite = args.suite
    if suite == "heisenberg":
        return props.check_heisenberg((0, a), _m_range(args, 6), _cutoff(args, 8))
    if suite == "virasoro":
        return props.check_virasoro((0, a), _m_range(args, 4), _cutoff(args, 8))
    if suite == "gram":
        return props.check_gram(a, _cutoff(args, 10))
    if suite == "braiding":
        return props.check_braiding(a, b, _cutoff(args, 4))
    if suite == "primarity":
        return props.check_primarity(a, _m_range(args, 3), _cutoff(args, 4))
    if suite == "locality":
        return props.check_relative_locality(a, _m_range(args, 3), _cutoff(args, 5))
    if suite == "energy":
        return props.check_energy_bounds(a, _cutoff(args, 8), args.tol, builder=_cached_builder(args.cache_dir))
    if suite == "chain":
        return props.check_commutator_chain(VertexSeries(a), TestFunction.gaussian(), args.k_max,
                                            _cutoff(args, 8), tol=args.tol)
    if suite == "normal-product":
        return props.check_normal_product_bound(a, b, _cutoff(args, 6), args.tol)
    raise UsageError(f"unknown suite {suite}")


def _load_spec(args) -> sectors.SectorSpec:
    if not args.spec:
        raise UsageError("--spec is required")
    try:
        return sectors.SectorSpec.load(args.spec)
    except FileNotFoundError as exc:
        raise UsageError(f"spec file not found: {args.spec}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"spec file is not valid JSON: {exc}") from exc


def _split_left_right(spec: sectors.SectorSpec) -> tuple[sectors.SectorSpec, sectors.SectorSpec]:
    if len(spec.kappas) != 2:
        raise UsageError("check-2d needs a spec with exactly two chiral indices (left, right)")
    return sectors.SectorSpec(spec.group, spec.kappas[:1]), sectors.SectorSpec(spec.group, spec.kappas[1:])


def combine(suite: str, params: dict, reports: list[VerificationReport]) -> VerificationReport:
    """Fold several reports into one; it passes iff all parts pass."""
    worst = [r.worst_violation for r in reports]
    exact = all(isinstance(w, Fraction) for w in worst)
    agg = max(worst, default=Fraction(0)) if exact else max((float(w) for w in worst), default=0.0)
    return VerificationReport(
        suite, params, "pass" if all(r.passed for r in reports) else "fail", agg,
        sum(r.comparisons for r in reports), sum(r.elapsed for r in reports),
        {"parts": [r.to_json(seed=None, git_rev=git_rev()) for r in reports]},
    )


def run_sectors(args) -> VerificationReport:
    if args.action == "check-1d":
        return sectors.check_1d_gluing(_load_spec(args))
    if args.action == "check-2d":
        left, right = _split_left_right(_load_spec(args))
        return sectors.check_2d_extension(left, right, args.pairing)
    if args.action == "lr":
        return sectors.lr_qsystem(_load_spec(args), single_leg=args.single_leg)[1]
    group = _load_spec(args).group if args.spec else parse_group(args.group)
    table = sectors.build_shift_fields(group, args.window)
    return combine("shift_fields", {"group": group.to_json(), "window": args.window},
                   [sectors.check_shift_fields(table), sectors.charged_intertwiner_shiftcheck(table)])


def _fields(args):
    field = twodim.TwoDimField.u1(args.alpha, 1, conjugate=not args.same_legs)
    return field, field


def run_twodim(args) -> VerificationReport:
    start = time.perf_counter()
    fa, fb = _fields(args)
    if args.action == "locality":
        return twodim.check_2d_locality(fa, fb, _cutoff(args, 3), args.pairing)
    if args.action == "smear":
        n = _cutoff(args, 4)
        fits = [props.check_energy_bounds(c, max(n, 2), args.tol, builder=_cached_builder(args.cache_dir))
                for c in {fa.alpha_left, fa.alpha_right} if c != 0]
        f = TestFunction.gaussian(width=args.width, window=args.window)
        sm = twodim.smear_2d(fa, f, f, n)
        details = {"tail_bound": sm.tail_bound, "tail_left": sm.tail_left, "tail_right": sm.tail_right,
                   "exponents": list(sm.exponents), "left_shape": list(sm.left.matrix.shape),
                   "right_shape": list(sm.right.matrix.shape), "fits": [r.details["fit"] for r in fits]}
        ok = math.isfinite(sm.tail_bound) and all(r.passed for r in fits)
        return VerificationReport("smear_2d", {"alpha": args.alpha, "cutoff": n, "width": args.width,
                                               "window": args.window}, "pass" if ok else "fail", 0.0,
                                  1, time.perf_counter() - start, details)
    # commutator decay: spacelike pair unless the same-sign (timelike) control is requested
    def g(center):
        return TestFunction.gaussian(center=center, width=args.width, window=args.window)

    left_a, left_b = -math.pi / 2, math.pi / 2
    right_a, right_b = (left_b, left_a) if args.pairing == "spacelike" else (left_a, left_b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", twodim.ConfigurationWarning)
        table = twodim.commutator_decay(fa, fb, g(left_a), g(right_a), g(left_b), g(right_b), args.cutoffs)
    norms = table["norms"]
    decreasing = all(b < a for a, b in zip(norms, norms[1:]))
    ok = decreasing if table["spacelike"] else True
    return VerificationReport("commutator_decay", {"alpha": args.alpha, "cutoffs": args.cutoffs,
                                                   "pairing": args.pairing, "width": args.width},
                              "pass" if ok else "fail", 0.0 if ok else float(norms[-1]), len(norms),
                              time.perf_counter() - start, {**table, "strictly_decreasing": decreasing})


# -------------------------------------------------------------------- demo

def _demo_tasks(n: int) -> list[tuple[str, str, tuple, dict]]:
    h = Fraction(1, 2)
    return [
        ("heisenberg", "check_heisenberg", ((0, 1), 6, n), {}),
        ("virasoro", "check_virasoro", ((0, 1), 4, n), {}),
        ("gram", "check_gram", (0, 10), {}),
        ("braiding 1,1", "check_braiding", (1, 1, min(n, 4)), {}),
        ("braiding 1,-1", "check_braiding", (1, -1, min(n, 4)), {}),
        ("braiding 1,2", "check_braiding", (1, 2, min(n, 4)), {}),
        ("braiding 1/2,1/2", "check_braiding", (h, h, min(n, 4)), {}),
        ("primarity 1", "check_primarity", (1, 3, n), {}),
        ("primarity 2", "check_primarity", (2, 3, n), {}),
        ("locality 1", "check_relative_locality", (1, 3, n), {}),
        ("locality 2", "check_relative_locality", (2, 3, n), {}),
        ("energy 1", "check_energy_bounds", (1, n), {}),
        ("normal product 1,2", "check_normal_product_bound", (1, 2, n), {}),
        ("sectors", "_demo_sectors", (), {}),
        ("2d locality", "_demo_2d", (min(n, 3),), {}),
    ]


def _demo_sectors() -> VerificationReport:
    Z = sectors.integers()
    z2 = sectors.cyclic(2)
    parts = [
        sectors.check_1d_gluing(sectors.SectorSpec.u1(Z, ["sqrt(2)"])),
        sectors.check_1d_gluing(sectors.SectorSpec.u1(Z, ["1"], ["1"])),
        sectors.check_2d_extension(sectors.SectorSpec.u1(Z, ["1"]), sectors.SectorSpec.u1(Z, ["-1"])),
        sectors.lr_qsystem(sectors.SectorSpec.u1(z2, ["sqrt(2)"]))[1],
    ]
    for group in (Z, z2, sectors.AbelianGroup(0, (2, 3))):
        table = sectors.build_shift_fields(group)
        parts += [sectors.check_shift_fields(table), sectors.charged_intertwiner_shiftcheck(table)]
    return combine("sectors", {}, parts)


def _demo_2d(n: int) -> VerificationReport:
    field = twodim.TwoDimField.u1(1)
    return twodim.check_2d_locality(field, field, n)


def _run_task(name: str, func: str, a: tuple, kw: dict, muts: tuple) -> tuple[str, dict, bool]:
    target = globals()[func] if func.startswith("_demo") else getattr(props, func)
    with mutations.mutate(*muts):
        rep = target(*a, **kw)
    return name, rep.to_json(seed=None, git_rev=git_rev()), rep.passed


def run_demo(args) -> tuple[dict, bool]:
    start = time.perf_counter()
    tasks = _demo_tasks(_cutoff(args, 6))
    muts = tuple(args.mutate)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_task, *zip(*[(t[0], t[1], t[2], t[3], muts) for t in tasks])))
    else:
        results = [_run_task(*t, muts) for t in tasks]
    ok = all(r[2] for r in results)
    out = {
        "schema_version": SCHEMA_VERSION,
        "suite": "demo",
        "params": {"cutoff": _cutoff(args, 6), "mutations": sorted(muts)},
        "status": "pass" if ok else "fail",
        "worst_violation": None,
        "comparisons": sum(r[1]["comparisons"] for r in results),
        "elapsed_s": round(time.perf_counter() - start, 6),
        "seed": args.seed,
        "artifact_git_rev": git_rev(),
        "reports": {name: rep for name, rep, _ in results},
    }
    return out, ok


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_USAGE
    if args.jobs < 1:
        print("chiralforge: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "demo":
            payload, ok = run_demo(args)
            _emit(payload, args.out)
            return EXIT_OK if ok else EXIT_FAIL
        runner = {"verify": run_verify, "sectors": run_sectors, "twodim": run_twodim}[args.command]
        with mutations.mutate(*args.mutate):
            report = runner(args)
    except (UsageError, ChiralForgeError, ValueError) as exc:
        print(f"chiralforge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(report.to_json(seed=args.seed, git_rev=git_rev()), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
