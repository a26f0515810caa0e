"""Command-line front end.

Exit codes: 0 success, 2 configuration/input error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigFileError, load_config
from .coverage import run_coverage
from .engine import ConfigError, InternalConsistencyError, run_schedule
from .faults import (
    DEFAULT_CATALOG,
    FaultListError,
    FaultSyntaxError,
    enumerate_instances,
    instances_from_entries,
    load_fault_list,
)
from .galois import GF2, FeedbackSpec, FieldSpec, GaloisError, parse_poly, sequence_period
from .march import MarchError, MarchSyntaxError, parse_march, run_march
from .memory import Memory, MemoryAccessError, MemorySpec
from .romsig import SigState, gen_table, rom_signature

EXIT_OK, EXIT_CONFIG, EXIT_INTERNAL = 0, 2, 3


class CliError(Exception):
    pass


def _coeffs(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v, 0) for v in text.split(","))
    except ValueError:
        raise CliError(f"expected comma-separated integers, got {text!r}") from None


def _instances(path: str | None, spec: MemorySpec, placement: str):
    if path is None:
        return enumerate_instances(DEFAULT_CATALOG, spec, placement)
    try:
        entries = load_fault_list(path)
    except OSError as exc:
        raise CliError(f"cannot read fault list {path}: {exc.strerror}") from None
    return instances_from_entries(entries, spec, placement)


def cmd_field_table(args) -> int:
    table = gen_table(FieldSpec(parse_poly(args.p)), args.c1, args.c2)
    sys.stdout.write(table.to_text())
    return EXIT_OK


def cmd_period(args) -> int:
    if args.q_poly is not None:
        fb = FeedbackSpec.from_poly2(parse_poly(args.q_poly))
    elif args.q is not None:
        field = GF2 if args.p is None else FieldSpec(parse_poly(args.p))
        fb = FeedbackSpec(field, _coeffs(args.q))
    else:
        raise CliError("give --q or --q-poly")
    seed = _coeffs(args.seed) if args.seed else (1,) + (0,) * (fb.k - 1)
    print(sequence_period(fb, seed))
    return EXIT_OK


def cmd_run(args) -> int:
    exp = load_config(args.config)
    faults = args.faults or exp.fault_list
    instances = [] if faults is None else _instances(faults, exp.spec, exp.placement)
    outcomes = run_schedule(exp.spec, exp.schedule, instances)
    print(f"faults injected: {len(instances)}")
    for i, o in enumerate(outcomes):
        sig = "" if o.signature is None else f" signature={o.signature} golden={o.golden_signature}"
        print(f"iteration {i}: final={list(o.final_window)} golden={list(o.golden_window)}"
              f"{sig} cycles={o.cycles} detected={int(o.detected)}")
    print(f"detected: {int(any(o.detected for o in outcomes))}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    exp = load_config(args.config)
    faults = args.faults or exp.fault_list
    instances = _instances(faults, exp.spec, exp.placement)
    report = run_coverage(exp.spec, exp.schedule, instances, jobs=args.jobs,
                          metadata={"config": exp.digest, "placement": exp.placement})
    if args.output:
        Path(args.output).write_text(report.to_csv())
    sys.stdout.write(report.summary())
    return EXIT_OK


def cmd_march(args) -> int:
    if (args.alg is None) == (args.alg_file is None):
        raise CliError("give exactly one of --alg or --alg-file")
    text = args.alg if args.alg is not None else Path(args.alg_file).read_text()
    field = None if args.p is None else FieldSpec(parse_poly(args.p))
    alg = parse_march(text.strip(), field)
    spec = MemorySpec(args.n, args.word_bits)
    instances = _instances(args.faults, spec, args.placement)
    report = run_march(alg, Memory.new(spec, args.fill), instances)
    detected = sum(report.detected.values())
    print(f"algorithm: {alg}")
    print(f"detected {detected}/{len(instances)}")
    for inst, run in report.results:
        if not run.detected:
            print(f"  missed {inst.id} {inst.primitive}")
    return EXIT_OK


def cmd_romsig(args) -> int:
    try:
        rom = Path(args.rom).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read ROM image {args.rom}: {exc.strerror}") from None
    table = gen_table(FieldSpec(parse_poly(args.p)), args.c1, args.c2)
    seed = SigState.parse(args.seed) if args.seed else SigState()
    print(rom_signature(rom, table, seed))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudoring",
                                     description="Pseudo-ring memory self-test simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field-table", help="print the modular-sum table c2*i + c1*j")
    p.add_argument("--p", default="19")
    p.add_argument("--c1", type=int, default=1)
    p.add_argument("--c2", type=int, default=9)
    p.set_defaults(func=cmd_field_table)

    p = sub.add_parser("period", help="period of a feedback register")
    p.add_argument("--p", help="field generator polynomial (default GF(2))")
    p.add_argument("--q", help="feedback coefficients c1,...,ck")
    p.add_argument("--q-poly", help="GF(2) feedback polynomial, e.g. 19 for 1+x+x^4")
    p.add_argument("--seed", help="initial window, comma-separated")
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("run", help="run a schedule with all listed faults injected at once")
    p.add_argument("--config", required=True)
    p.add_argument("--faults")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("coverage", help="single-fault coverage campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--faults", help="fault-list file (default: built-in catalog)")
    p.add_argument("--output", help="CSV report path")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("march", help="run a March algorithm against a fault list")
    p.add_argument("--alg")
    p.add_argument("--alg-file")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--word-bits", type=int, default=1)
    p.add_argument("--p", help="field for coefficient products")
    p.add_argument("--fill", type=int, default=0)
    p.add_argument("--faults")
    p.add_argument("--placement", default="pairs",
                   choices=("single", "pairs", "adjacent-pairs"))
    p.set_defaults(func=cmd_march)

    p = sub.add_parser("romsig", help="signature of a ROM image")
    p.add_argument("--rom", required=True)
    p.add_argument("--p", default="19")
    p.add_argument("--c1", type=int, default=1)
    p.add_argument("--c2", type=int, default=9)
    p.add_argument("--seed", help="initial state MM:LL in hex")
    p.set_defaults(func=cmd_romsig)
    return parser


CONFIG_ERRORS = (CliError, ConfigError, ConfigFileError, GaloisError, FaultSyntaxError,
                 FaultListError, MarchSyntaxError, MarchError, MemoryAccessError, OSError,
                 ValueError)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InternalConsistencyError as exc:
        print(f"internal-consistency error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
