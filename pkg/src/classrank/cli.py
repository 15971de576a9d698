"""Command-line front end: ``classrank {classgroup,scan,density,lemmas,verify}``.

Exit codes: 0 success, 1 a replayed certificate is not a rank-2 proof,
2 usage or configuration error, 3 resource bound exceeded, 4 internal
consistency failure (a bug).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from . import __version__
from .family import IdentityViolation, Mode, strict_window
from .number_core import DEFAULT_EFFORT, DEFAULT_TRIAL_BOUND, is_probable_prime, primes_up_to
from .polydensity import (
    BudgetError,
    Lemma32Contradiction,
    check_lemma31,
    check_lemma32,
    euler_product,
)
from .quadforms import OracleRangeError, Rank2Certificate, enumerate_class_group
from .scan import (
    Box,
    InternalConsistencyError,
    default_workers,
    growth_fit,
    run_campaign,
    run_scan,
    select_q,
    strict_window_box,
)

EXIT_OK = 0
EXIT_INVALID_CERT = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _prime_p(text: str) -> int:
    p = int(text)
    if p < 5 or not is_probable_prime(p):
        raise argparse.ArgumentTypeError(f"p must be a prime >= 5, got {text}")
    return p


def _prime(text: str) -> int:
    q = int(text)
    if not is_probable_prime(q):
        raise argparse.ArgumentTypeError(f"q must be prime, got {text}")
    return q


def _positive_real(text: str) -> float:
    x = float(text)
    if not x >= 2:
        raise argparse.ArgumentTypeError(f"X must be >= 2, got {text}")
    return x


def _write(path: str | None, text: str) -> None:
    """All-or-nothing write: a temp file is renamed into place only when complete."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".classrank-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(reports, with_x: bool) -> str:
    buf = io.StringIO()
    cols = ["D", "a", "b", "multiplicity", "squarefree_verdict", "certified"]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((["X", "q"] if with_x else []) + cols)
    for rep in reports:
        for row in rep.rows:
            prefix = [repr(rep.X), rep.q] if with_x else []
            writer.writerow(prefix + [row[c] for c in cols])
    return buf.getvalue()


def cmd_classgroup(args) -> int:
    try:
        G = enumerate_class_group(args.disc, oracle_bound=args.oracle_bound)
    except OracleRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ranks = {p: G.p_rank(p) for p in primes_up_to(13)}
    if args.json:
        out = {
            "discriminant": G.discriminant,
            "class_number": G.class_number,
            "elementary_divisors": G.elementary_divisors,
            "generators": [list(g) for g in G.generators],
            "p_ranks": {str(p): r for p, r in ranks.items()},
        }
        print(json.dumps(out, indent=2))
    else:
        print(f"disc={G.discriminant} h={G.class_number} divisors={G.elementary_divisors}")
        print("p-ranks: " + " ".join(f"{p}:{r}" for p, r in ranks.items()))
    return EXIT_OK


def _summary(rep) -> str:
    x = "" if rep.X is None else f"X={rep.X:g} "
    return (
        f"{x}q={rep.q} S1={rep.S1} S2={rep.S2} cs_bound={rep.cs_lower_bound} "
        f"distinct_squarefree={rep.distinct_squarefree} distinct_probable={rep.distinct_probable} "
        f"certified={rep.certified_rank2}"
    )


def cmd_scan(args) -> int:
    if (args.q is None) == (args.X is None):
        raise UsageError("give exactly one of --q or --X")
    if args.box is not None and args.strict_window:
        raise UsageError("--box and --strict-window are mutually exclusive")
    try:
        box = Box.parse(args.box, args.skip_diagonal) if args.box else None
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.q is not None and box is None and not args.strict_window:
        raise UsageError("--q needs --box or --strict-window")
    common = dict(mode=args.mode, trial_bound=args.trial_bound, effort=args.effort, workers=args.workers)

    def one_scan(q, X):
        b = strict_window_box(args.p, q) if args.strict_window else box
        rep = run_scan(args.p, q, b, X=X, **common)
        if args.strict_window and not strict_window(args.p, q):
            rep.notes.append(f"strict window is empty for p={args.p}, q={q}")
        return rep

    if args.q is not None:
        rep = one_scan(args.q, None)
        print(_summary(rep), file=sys.stderr)
        for note in rep.notes:
            print(f"note: {note}", file=sys.stderr)
        text = json.dumps(rep.to_dict(), indent=2) + "\n" if args.format == "json" else _csv_text([rep], False)
        _write(args.out, text)
        return EXIT_OK

    runs, reports, points = [], [], []
    for X in args.X:
        if box is not None or args.strict_window:
            q = select_q(args.p, X, args.constant)
            rep = one_scan(q, X)
            reports.append(rep)
            count = rep.certified_rank2
            runs.append({"X": X, "q": q, "count": count, "report": rep.to_dict()})
            print(_summary(rep), file=sys.stderr)
            for note in rep.notes:
                print(f"note: {note}", file=sys.stderr)
        else:
            camp = run_campaign(args.p, X, args.constant, **common)
            reports.extend(camp.reports)
            count = camp.count
            runs.append({"X": X, **camp.to_dict()})
            print(
                f"X={X:g} q<={camp.q_values[-1] if camp.q_values else '-'} "
                f"S1={sum(r.S1 for r in camp.reports)} S2={sum(r.S2 for r in camp.reports)} "
                f"cs_bound={max((r.cs_lower_bound for r in camp.reports), default=0)} certified={count}",
                file=sys.stderr,
            )
        points.append((X, count))
    doc = {"p": args.p, "mode": Mode(args.mode).value, "runs": runs, "growth_fit": None}
    try:
        fit = growth_fit(points, args.p)
        doc["growth_fit"] = fit.to_dict()
        print(f"fitted exponent {fit.fitted_exponent:.4f} (target {fit.target_exponent:.4f})", file=sys.stderr)
    except ValueError as exc:
        doc["growth_fit_note"] = str(exc)
        if len(points) > 1:
            print(f"note: {exc}", file=sys.stderr)
    text = json.dumps(doc, indent=2) + "\n" if args.format == "json" else _csv_text(reports, True)
    _write(args.out, text)
    return EXIT_OK


def cmd_density(args) -> int:
    if args.q <= args.p:
        raise UsageError(f"density needs q > p, got p={args.p}, q={args.q}")
    try:
        est = euler_product(args.p, args.q, args.L)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    print(f"{'ell':>5} {'c_ell':>8} {'1 - c/ell^4':>14}")
    for ell, c in est.c_values:
        print(f"{ell:>5} {c:>8} {1 - c / ell**4:>14.10f}")
    lo, hi = est.interval
    print(f"partial_product (L={args.L}) = {est.partial_product} ~ {float(est.partial_product):.10f}")
    print(f"tail_lower (heuristic, C={float(est.tail_constant):.4f}) = {float(est.tail_lower):.10f}")
    print(f"density interval ~ [{float(lo):.10f}, {float(hi):.10f}]")
    return EXIT_OK


def cmd_lemmas(args) -> int:
    if args.q < 5:
        raise UsageError(f"lemma31 needs q >= 5, got q={args.q}")
    if args.q <= args.p:
        raise UsageError(f"lemma32 needs q > p, got p={args.p}, q={args.q}")
    ok31 = check_lemma31(args.p, args.q)
    missing = []
    for ell in primes_up_to(args.lmax):
        w = check_lemma32(args.p, args.q, ell)
        if w is None:
            missing.append(ell)
        elif args.verbose:
            print(f"  ell={ell}: witness (a, b) = {w}")
    msg32 = (
        f"witness found for every ell <= {args.lmax}"
        if not missing
        else f"no witness for ell in {missing}"
    )
    print(f"lemma31: {'PASS' if ok31 else 'FAIL'}; lemma32: {msg32}")
    return EXIT_OK if ok31 and not missing else EXIT_INTERNAL


def _load_certificates(doc) -> list[Rank2Certificate]:
    if isinstance(doc, dict) and "transcript" in doc:
        return [Rank2Certificate.from_dict(doc)]
    if isinstance(doc, dict) and "certificates" in doc:
        return [Rank2Certificate.from_dict(c) for c in doc["certificates"]]
    if isinstance(doc, dict) and "runs" in doc:
        out = []
        for run in doc["runs"]:
            reps = [run["report"]] if "report" in run else run.get("reports", [])
            for rep in reps:
                out.extend(Rank2Certificate.from_dict(c) for c in rep["certificates"])
        return out
    if isinstance(doc, list):
        return [Rank2Certificate.from_dict(c) for c in doc]
    raise ValueError("no certificates found in document")


def cmd_verify(args) -> int:
    try:
        with open(args.certificate, encoding="utf-8") as fh:
            certs = _load_certificates(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read certificates: {exc}") from exc
    status = EXIT_OK
    for cert in certs:
        replayed = cert.replay()
        if replayed.transcript != cert.transcript:
            print(f"D={-cert.discriminant}: MISMATCH with stored transcript")
            status = EXIT_INTERNAL
        elif replayed.valid:
            print(f"D={-cert.discriminant}: valid")
        else:
            print(f"D={-cert.discriminant}: not a rank-2 certificate ({replayed.first_failure})")
            if status == EXIT_OK:
                status = EXIT_INVALID_CERT
    if args.require_valid_only is False and status == EXIT_INVALID_CERT:
        status = EXIT_OK
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="classrank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cg = sub.add_parser("classgroup", help="class group of a negative discriminant")
    cg.add_argument("--disc", type=int, required=True)
    cg.add_argument("--oracle-bound", type=int, default=10**7)
    cg.add_argument("--json", action="store_true")
    cg.set_defaults(func=cmd_classgroup)

    sc = sub.add_parser("scan", help="box scan or campaign over the family")
    sc.add_argument("--p", type=_prime_p, required=True)
    sc.add_argument("--q", type=_prime)
    sc.add_argument("--X", type=_positive_real, nargs="+")
    sc.add_argument("--box", help="A:B,C:D, inclusive")
    sc.add_argument("--skip-diagonal", action="store_true")
    sc.add_argument("--strict-window", action="store_true")
    sc.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.RELAXED.value)
    sc.add_argument("--trial-bound", type=int, default=DEFAULT_TRIAL_BOUND)
    sc.add_argument("--effort", type=int, default=DEFAULT_EFFORT)
    sc.add_argument("--constant", type=float, default=1.0, help="q = next_prime(constant * X^((p-2)/(2p(p-1))))")
    sc.add_argument("--out", help="output file (default stdout)")
    sc.add_argument("--format", choices=["json", "csv"], default="json")
    sc.add_argument("--workers", type=int, default=None)
    sc.add_argument("--seed", type=int, default=0, help="accepted for reproducibility; scans are deterministic")
    sc.set_defaults(func=cmd_scan)

    de = sub.add_parser("density", help="Euler product for squarefree values of f_q")
    de.add_argument("--p", type=_prime_p, required=True)
    de.add_argument("--q", type=_prime, required=True)
    de.add_argument("--L", type=int, default=50)
    de.set_defaults(func=cmd_density)

    le = sub.add_parser("lemmas", help="squarefree polynomial and local witness checks")
    le.add_argument("--p", type=_prime_p, required=True)
    le.add_argument("--q", type=_prime, required=True)
    le.add_argument("--lmax", type=int, default=50)
    le.add_argument("--verbose", action="store_true")
    le.set_defaults(func=cmd_lemmas)

    ve = sub.add_parser("verify", help="replay stored rank-2 certificates")
    ve.add_argument("certificate", help="JSON certificate, list of certificates, or scan report")
    ve.add_argument(
        "--allow-invalid",
        dest="require_valid_only",
        action="store_false",
        help="exit 0 even if some stored certificates do not prove rank 2",
    )
    ve.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "workers", None) is None and hasattr(args, "workers"):
            args.workers = default_workers()
        return args.func(args)
    except UsageError as exc:
        print(f"classrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InternalConsistencyError, IdentityViolation, Lemma32Contradiction) as exc:
        print(f"classrank: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
