"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import analysis, fsm, sweep, verify
from .classifier import DEFAULT_CHUNK, DEFAULT_STEP_CAP, classify, classify_trace
from .core import CollatzError, Form

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_int(text: str) -> int:
    """Integer argument; accepts ``1_000_000``, ``1e6`` and ``2.5e3``."""
    try:
        d = Decimal(text.strip().replace("_", ""))
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not d.is_finite() or d != d.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(d)


def positive_int(text: str) -> int:
    v = parse_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def form_arg(text: str) -> Form:
    try:
        return Form.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_powers(text: str) -> list[int]:
    """``1-4`` or ``1,3,5`` (mixing allowed: ``1-3,6``)."""
    out: set[int] = set()
    try:
        for part in text.split(","):
            lo, sep, hi = part.partition("-")
            if sep:
                out.update(range(int(lo), int(hi) + 1))
            else:
                out.add(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad power list {text!r}; use e.g. 1-4 or 1,3,5") from None
    if not out or min(out) < 0:
        raise argparse.ArgumentTypeError(f"bad power list {text!r}")
    return sorted(out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="collatz-forms", description="Terminating mod-9 forms of Collatz trajectories.")
    p.add_argument("--no-timing", action="store_true", help="suppress the timing footer on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt="text"):
        sp.add_argument("--step-cap", type=positive_int, default=DEFAULT_STEP_CAP)
        sp.add_argument("--format", choices=("csv", "json", "text"), default=fmt)
        sp.add_argument("--output", "-o", type=Path, help="write the report here instead of stdout")

    def engine(sp):
        sp.add_argument("--workers", "-j", type=positive_int, default=1)
        sp.add_argument("--chunk", type=positive_int, default=DEFAULT_CHUNK)
        sp.add_argument("--no-memo", dest="memo", action="store_false")

    for name, help_ in (
        ("classify", "terminating form of one start"),
        ("trace", "compressed trajectory of one start"),
        ("fsm-trace", "state-machine path of one start"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("n", type=positive_int)
        common(sp)

    sp = sub.add_parser("sweep", help="form counts over [1, N]")
    sp.add_argument("--max", dest="max_n", type=positive_int, required=True)
    sp.add_argument("--checkpoint", type=Path)
    sp.add_argument("--capture-limit", type=parse_int, help="per-form member cap (default: per-form)")
    sp.add_argument("--members", action="store_true", help="include captured members (json)")
    common(sp, "csv")
    engine(sp)

    sp = sub.add_parser("table3", help="frequency rows for N = 10^p")
    sp.add_argument("--powers", type=parse_powers, default=parse_powers("1-6"))
    common(sp, "csv")
    engine(sp)

    sp = sub.add_parser("sets", help="members of S(form), optionally factorized")
    sp.add_argument("--form", type=form_arg, required=True)
    sp.add_argument("--max", dest="max_n", type=positive_int, required=True)
    sp.add_argument("--factor", action="store_true")
    sp.add_argument("--gaps", action="store_true", help="power-of-two position/gap report")
    common(sp)
    engine(sp)

    sp = sub.add_parser("verify", help="run a property suite")
    sp.add_argument("--suite", choices=verify.SUITES, required=True)
    sp.add_argument("--max", dest="max_n", type=positive_int)
    sp.add_argument("--max-m", type=positive_int, help="largest exponent for --suite cycle")
    sp.add_argument("--workers", "-j", type=positive_int, default=1)
    return p


def _classification_record(c) -> dict:
    return {
        "start": c.start,
        "form": c.terminating_form.label,
        "residue": c.terminating_form.residue,
        "stopping_exponent": c.stopping_exponent,
        "stopping_power": c.stopping_power,
        "compressed_steps": c.compressed_steps,
        "peak": c.peak,
    }


def _render_classification(c, fmt: str) -> str:
    rec = _classification_record(c)
    if fmt == "json":
        return json.dumps(rec, indent=2) + "\n"
    if fmt == "csv":
        return ",".join(rec) + "\n" + ",".join(str(v) for v in rec.values()) + "\n"
    return (
        f"start: {c.start}\n"
        f"terminating form: {c.terminating_form.label} (9n+{c.terminating_form.residue})\n"
        f"stopping power: 2^{c.stopping_exponent} = {c.stopping_power}\n"
        f"compressed steps: {c.compressed_steps}\n"
        f"peak: {c.peak}\n"
    )


def cmd_classify(args) -> tuple[str, int]:
    return _render_classification(classify(args.n, args.step_cap), args.format), EXIT_OK


def cmd_trace(args) -> tuple[str, int]:
    path, c = classify_trace(args.n, args.step_cap)
    if args.format == "json":
        rec = _classification_record(c) | {"trajectory": path}
        return json.dumps(rec, indent=2) + "\n", EXIT_OK
    if args.format == "csv":
        return "step,value\n" + "".join(f"{i},{v}\n" for i, v in enumerate(path)), EXIT_OK
    text = " -> ".join(map(str, path)) + "\n" + _render_classification(c, "text")
    return text, EXIT_OK


def cmd_fsm_trace(args) -> tuple[str, int]:
    tr = fsm.fsm_trace(args.n, args.step_cap)
    if args.format == "json":
        rec = {
            "start": tr.start,
            "entry_steps": tr.entry_steps,
            "states": [{"form": s.form.label, "index": s.index, "value": s.value} for s in tr.states],
            "terminating_form": tr.terminating_form.label,
            "stopping_exponent": tr.stopping_exponent,
        }
        return json.dumps(rec, indent=2) + "\n", EXIT_OK
    if args.format == "csv":
        rows = "".join(f"{i},{s.form.label},{s.index},{s.value}\n" for i, s in enumerate(tr.states))
        return "step,form,index,value\n" + rows, EXIT_OK
    text = (
        f"entry: {tr.entry_steps} compressed steps\n"
        + " -> ".join(map(str, tr.states))
        + f"\nterminating form: {tr.terminating_form.label}"
        f" at 2^{tr.stopping_exponent} = {tr.states[-1].value}\n"
    )
    return text, EXIT_OK


def cmd_sweep(args) -> tuple[str, int]:
    result = sweep.sweep(
        args.max_n,
        workers=args.workers,
        chunk=args.chunk,
        member_capture_limit=args.capture_limit,
        checkpoint_path=args.checkpoint,
        memo=args.memo,
        step_cap=args.step_cap,
    )
    if args.format == "json":
        rec = result.to_record()
        if not args.members:
            rec.pop("members")
        return json.dumps(rec, indent=2) + "\n", EXIT_OK
    return sweep.render_rows(result, [result.table], args.format), EXIT_OK


def cmd_table3(args) -> tuple[str, int]:
    text = sweep.emit_table3(
        args.powers,
        args.format,
        workers=args.workers,
        chunk=args.chunk,
        memo=args.memo,
        step_cap=args.step_cap,
    )
    return text, EXIT_OK


def cmd_sets(args) -> tuple[str, int]:
    members = analysis.build_set(
        args.form, args.max_n, memo=args.memo, workers=args.workers, chunk=args.chunk,
        step_cap=args.step_cap,
    )
    if args.factor:
        rows = [(x, analysis.factorize(x)) for x in members]
        out = analysis.render_factor_rows(args.form, rows, args.format)
    elif args.format == "json":
        out = json.dumps({"form": args.form.label, "max": args.max_n, "members": members}) + "\n"
    elif args.format == "csv":
        out = "element\n" + "".join(f"{x}\n" for x in members)
    else:
        out = f"S({args.form.label}) up to {args.max_n}: {len(members)} members\n"
        out += ", ".join(map(str, members)) + "\n"
    if args.gaps:
        gap = analysis.gap_progression_report(args.form, args.max_n, members)
        scan = analysis.power2_exponent_scan(args.form, args.max_n, members)
        out += gap.text()
        out += (
            f"exponent residue mod 6: expected {scan.expected_residue},"
            f" {'all match' if scan.residues_ok else 'MISMATCH'};"
            f" non-powers of two in set: {len(scan.non_powers)}\n"
        )
    return out, EXIT_OK


def cmd_verify(args) -> tuple[str, int]:
    limit = args.max_m if args.suite == "cycle" and args.max_m else args.max_n
    reports = verify.run_suite(args.suite, limit, workers=args.workers)
    lines = []
    for r in reports:
        lines.append(r.line())
        lines.extend(f"  note: {n}" for n in r.notes)
    status = EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY
    return "\n".join(lines) + "\n", status


COMMANDS = {
    "classify": cmd_classify,
    "trace": cmd_trace,
    "fsm-trace": cmd_fsm_trace,
    "sweep": cmd_sweep,
    "table3": cmd_table3,
    "sets": cmd_sets,
    "verify": cmd_verify,
}


def _one_line(msg) -> str:
    return " ".join(str(msg).split())


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {_one_line(exc)}", file=stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        text, status = COMMANDS[args.command](args)
        output = getattr(args, "output", None)
        if output is not None:
            output.write_text(text)
        else:
            stdout.write(text)
    except (CollatzError, OSError, ValueError) as exc:
        print(f"error: {_one_line(exc)}", file=stderr)
        return EXIT_RUNTIME
    if not args.no_timing:
        print(f"# elapsed {time.perf_counter() - t0:.3f} s", file=stderr)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
