"""Command-line front end: ``synth``, ``analyze``, ``verify``, ``bench``.

Exit codes: 0 success, 1 verification or check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import (compare_table, reference_mismatches, resource_report,
                       table_csv)
from .circuit_core import AccountingMode, Circuit, CircuitError
from .sim import verify_circuit, verify_cnx
from .synthesis import SynthesisMethod, SynthesisRequest, synthesize

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _method(text):
    try:
        return SynthesisMethod.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _mode(text):
    try:
        return AccountingMode(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mode must be one of worst, best, static")


def _range(text):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("range must look like 4:16")
    return lo, hi


def _request(args) -> SynthesisRequest:
    if args.n is None:
        raise UsageError("--n is required")
    if args.n < 2:
        raise UsageError(f"--n must be at least 2, got {args.n}")
    return SynthesisRequest(args.n, args.method)


def _write(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _default_mode(method, mode):
    if mode is not None:
        return mode
    if method is SynthesisMethod.STATIC_BASELINE:
        return AccountingMode.STATIC_ONLY
    return AccountingMode.WORST_CASE


def cmd_synth(args) -> int:
    result = synthesize(_request(args))
    circuit = result.circuit
    text = circuit.to_qasm() if args.format == "qasm" else circuit.to_text()
    _write(text, args.output)
    report = resource_report(circuit, _default_mode(result.method, args.mode),
                             result.n, result.method)
    # keep stdout clean for the circuit when no output file is given
    print(report.summary(), file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


def _load(path) -> Circuit:
    try:
        return Circuit.from_text(Path(path).read_text())
    except (OSError, CircuitError) as exc:
        raise UsageError(f"cannot read circuit {path}: {exc}")


def _controls_of(circuit: Circuit) -> int:
    return len([r for r in circuit.role_map() if r.startswith("c")])


def cmd_analyze(args) -> int:
    if args.input is not None:
        circuit = _load(args.input)
        n, method = _controls_of(circuit), None
    else:
        result = synthesize(_request(args))
        circuit, n, method = result.circuit, result.n, result.method
    mode = _default_mode(method, args.mode)
    print(resource_report(circuit, mode, n, method).summary())
    return EXIT_OK


def cmd_verify(args) -> int:
    opts = dict(seed=args.seed, exhaustive_cap=args.exhaustive_cap)
    if args.input is not None:
        circuit = _load(args.input)
        report = verify_circuit(circuit, _controls_of(circuit), args.tolerance, **opts)
    else:
        report = verify_cnx(synthesize(_request(args)), args.tolerance, **opts)
    print(report.summary())
    for problem in report.problems:
        print("  " + problem)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_bench(args) -> int:
    lo, hi = args.range
    if not 4 <= lo <= hi:
        raise UsageError(f"range must satisfy 4 <= min <= max, got {lo}:{hi}")
    rows = compare_table(lo, hi)
    _write(table_csv(rows), args.output)
    if not args.check_paper:
        return EXIT_OK
    bad = 0
    for row in rows:
        for col, ours, ref in reference_mismatches(row):
            bad += 1
            print(f"mismatch n={row.n} {col}: measured {ours}, reference {ref}",
                  file=sys.stderr)
    print(f"reference check: {bad} mismatching cell(s) over {len(rows)} row(s)",
          file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toffoli-forge",
                                description="Clifford+T synthesis of n-controlled Toffoli gates "
                                            "with one clean ancilla.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_n=True):
        sp.add_argument("--n", type=int, help="number of controls")
        sp.add_argument("--method", type=_method, default=SynthesisMethod.DYNAMIC_MIXED,
                        help="static, ccix or mixed (default: mixed)")

    s = sub.add_parser("synth", help="synthesize and write a circuit")
    common(s)
    s.add_argument("--format", choices=["qasm", "canonical"], default="canonical")
    s.add_argument("--mode", type=_mode, default=None)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_synth)

    a = sub.add_parser("analyze", help="report CX, T-count and T-depth")
    common(a)
    a.add_argument("--input", "-i", help="canonical circuit file")
    a.add_argument("--mode", type=_mode, default=None)
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="check a circuit against the CnX oracle")
    common(v)
    v.add_argument("--input", "-i", help="canonical circuit file")
    v.add_argument("--tolerance", type=float, default=1e-10)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--exhaustive-cap", type=int, default=10)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="emit the resource comparison CSV")
    b.add_argument("--range", type=_range, default=(4, 16))
    b.add_argument("--check-paper", action="store_true",
                   help="compare against the embedded reference table")
    b.add_argument("--output", "-o")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
