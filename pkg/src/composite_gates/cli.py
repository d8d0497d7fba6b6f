"""Command-line interface: verify, profile, range, solve and catalog.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
Angles and areas are printed in units of pi; profile CSV columns use raw eps.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import seqfile
from .catalog import (
    Catalog,
    NamedSequence,
    UnknownSequenceError,
    load_catalog,
    polished,
    verify,
)
from .fidelity import DEFAULT_THRESHOLD, NoRangeError, high_fidelity_range, profile
from .solver import DesignProblem, PolishError, solve
from .su2 import PI, DomainError, Family

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _resolve(target: str) -> NamedSequence:
    cat = load_catalog()
    if target in cat:
        return cat.get(target)
    path = Path(target)
    if path.suffix == ".json" or path.exists():
        try:
            return seqfile.load(path)
        except seqfile.SequenceFileError as exc:
            raise UsageError(str(exc)) from None
    raise UsageError(f"unknown sequence {target!r} (not a catalog name or file)")


def _working_sequence(entry: NamedSequence):
    """Polished double-precision sequence for catalog rows, the file as given otherwise."""
    if entry.source != "file" and entry.claimed_order > 0:
        try:
            return polished(entry).sequence.to_float()
        except (PolishError, DomainError):
            pass
    return entry.sequence


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    cat = load_catalog()
    if args.target == "all":
        entries = list(cat)
    else:
        entries = [_resolve(args.target)]
    results = [verify(e, strict=args.strict, tol=args.tol) for e in entries]
    for res in results:
        print(res.render())
    passed = sum(r.passed for r in results)
    if len(results) > 1:
        print(f"{passed}/{len(results)} sequences passed")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


def cmd_profile(args) -> int:
    entry = _resolve(args.target)
    prof = profile(_working_sequence(entry), entry.theta, args.eps_min, args.eps_max, args.points)
    lines = ["eps,frobenius_fidelity,trace_fidelity"]
    lines += [f"{e:.12f},{f:.12f},{t:.12f}" for e, f, t in prof.rows()]
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_range(args) -> int:
    entry = _resolve(args.target)
    try:
        r = high_fidelity_range(_working_sequence(entry), entry.theta, args.threshold)
    except NoRangeError as exc:
        print(f"{entry.name}: {exc}")
        return EXIT_FAIL
    lo, hi = r.area_interval_pi
    print(
        f"{entry.name}: [{lo:.3f}pi, {hi:.3f}pi] eps in [{r.eps_minus:.6f}, {r.eps_plus:.6f}] "
        f"threshold {args.threshold:g}"
    )
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        problem = DesignProblem(Family(args.family), args.order, args.theta_pi * PI, args.pulses)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sols = solve(problem, seeds=args.seeds, rng_seed=args.rng_seed)
    converged = sum(d.converged for d in sols.diagnostics)
    print(
        f"family={problem.family.value} order={problem.order} theta={args.theta_pi:.12f}pi "
        f"pulses={problem.pulse_count} starts={args.seeds} converged={converged} classes={len(sols)}"
    )
    records = []
    for k, s in enumerate(sols):
        seq = s.sequence
        areas = " ".join(f"{a / PI:.12f}" for a in seq.areas)
        phases = " ".join(f"{p / PI:.12f}" for p in seq.phases)
        print(f"[{k}] area={s.total_area / PI:.12f}pi order={s.achieved_order} seed={s.seed_id}")
        print(f"    areas_pi:  {areas}")
        print(f"    phases_pi: {phases}")
        records.append(json.loads(seqfile.dumps(seq, f"solution-{k}", s.achieved_order)))
    if args.out:
        Path(args.out).write_text(json.dumps(records, indent=1) + "\n")
    return EXIT_OK if sols else EXIT_FAIL


def cmd_catalog(args) -> int:
    cat: Catalog = load_catalog()
    if args.action == "export":
        _write(cat.export(args.format), args.out)
        return EXIT_OK
    rows = cat.list_sequences(args.family, args.order, args.theta_pi)
    for e in rows:
        phases = " ".join(f"{p:.4f}" for p in e.phases_pi)
        areas = " ".join(f"{a:.4f}" for a in e.areas_pi)
        print(
            f"{e.name:12s} {e.family.value:16s} theta={e.theta_pi:.4f}pi order={e.claimed_order} "
            f"N={len(e.areas_pi)} area={e.total_area_pi:.4f}pi areas_pi=[{areas}] phases_pi=[{phases}]"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="composite-gates", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check a catalog entry or sequence file ('all' for the catalog)")
    v.add_argument("target")
    v.add_argument("--strict", action="store_true", help="also run the exact coefficient test")
    v.add_argument("--tol", type=float, default=1e-10, help="polished gate tolerance")
    v.set_defaults(func=cmd_verify)

    pr = sub.add_parser("profile", help="fidelity profile as CSV")
    pr.add_argument("target")
    pr.add_argument("--eps-min", type=float, default=-0.3)
    pr.add_argument("--eps-max", type=float, default=0.3)
    pr.add_argument("--points", type=int, default=601)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_profile)

    r = sub.add_parser("range", help="high-fidelity error range")
    r.add_argument("target")
    r.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    r.set_defaults(func=cmd_range)

    s = sub.add_parser("solve", help="multi-start solution of the compensation conditions")
    s.add_argument("--family", required=True, choices=[f.value for f in Family if f is not Family.CUSTOM])
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--theta-pi", type=float, default=1.0)
    s.add_argument("--pulses", type=int)
    s.add_argument("--seeds", type=int, default=64)
    s.add_argument("--rng-seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("catalog", help="list or export published sequences")
    c.add_argument("action", choices=["list", "export"])
    c.add_argument("--family", choices=[f.value for f in Family])
    c.add_argument("--order", type=int)
    c.add_argument("--theta-pi", type=float)
    c.add_argument("--format", choices=["json", "csv"], default="json")
    c.add_argument("--out")
    c.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, UnknownSequenceError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
