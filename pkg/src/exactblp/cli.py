"""Command-line entry point.

Exit codes: 0 success/yes, 1 no/infeasible, 2 unbounded, 64 parse or usage error,
65 dimension error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bigm import compute_mp, tight_bounds_by_enumeration
from .certificates import (
    CertificateFormatError,
    OptCert,
    check_opt_cert,
    check_pess_cert,
    format_certificate,
    parse_certificate,
)
from .enumeration import decide_optimistic, decide_pessimistic, solve_optimistic
from .kkt import build_milp, solve_by_z_enumeration, write_lp_format
from .lp import Status
from .model import (
    DecisionInstance,
    DimensionError,
    ParseError,
    format_instance,
    gen_binary_gadget,
    parse_binary_program,
    parse_instance,
    scale_to_integers,
)
from .rational import format_rational, parse_rational

EXIT_OK, EXIT_NO, EXIT_UNBOUNDED, EXIT_PARSE, EXIT_DIMENSION = 0, 1, 2, 64, 65

_STATUS_EXIT = {Status.OPTIMAL: EXIT_OK, Status.INFEASIBLE: EXIT_NO, Status.UNBOUNDED: EXIT_UNBOUNDED}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's default status 2 would read as "unbounded"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _fmt(values) -> str:
    return " ".join(format_rational(v) for v in values)


def _rational_arg(text: str):
    try:
        return parse_rational(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a rational literal: {text!r}") from None


def _load(path):
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _load_plain(path):
    inst = _load(path)
    return inst.instance if isinstance(inst, DecisionInstance) else inst


def _load_decision(path, alpha) -> DecisionInstance:
    inst = _load(path)
    if alpha is not None:
        base = inst.instance if isinstance(inst, DecisionInstance) else inst
        return DecisionInstance(base, alpha)
    if not isinstance(inst, DecisionInstance):
        raise UsageError("no threshold: pass --alpha or add an 'alpha:' line to the instance")
    return inst


def _write(path, text, out):
    Path(path).write_text(text, encoding="utf-8")
    print(f"wrote {path}", file=out)


def _big_ms(args, scaled):
    """Computed big-Ms unless both overrides are given; returns (mp, md, source)."""
    if args.mp is not None and args.md is not None:
        return args.mp, args.md, "supplied"
    result = compute_mp(scaled)
    mp = args.mp if args.mp is not None else result.Mp
    md = args.md if args.md is not None else result.Md
    source = "computed" if args.mp is None and args.md is None else "mixed"
    return mp, md, source


def cmd_solve(args, out):
    inst = _load_plain(args.instance)
    res = solve_optimistic(inst)
    if res.status is Status.OPTIMAL:
        print(f"OPTIMAL value {format_rational(res.value)}", file=out)
        print(f"x: {_fmt(res.x)}".rstrip(), file=out)
        print(f"y: {_fmt(res.y)}".rstrip(), file=out)
        print(f"basis: {_fmt(j + 1 for j in res.certificate.basis)}".rstrip(), file=out)
    else:
        print(res.status.name, file=out)
    return _STATUS_EXIT[res.status]


def _decide(args, out, decide):
    dec = _load_decision(args.instance, args.alpha)
    result = decide(dec)
    if not result.yes:
        print("NO", file=out)
        return EXIT_NO
    print("YES", file=out)
    cert_text = format_certificate(result.certificate)
    print(cert_text, end="", file=out)
    if args.cert_out:
        _write(args.cert_out, cert_text, out)
    return EXIT_OK


def cmd_bigm(args, out):
    inst = _load_plain(args.instance)
    scaled = scale_to_integers(inst)
    res = compute_mp(scaled)
    print(f"Mp {format_rational(res.Mp)}  Md {format_rational(res.Md)}", file=out)
    print(f"ell {res.ell}  ML {format_rational(res.ML_bound)}  Mf {format_rational(res.Mf_bound)}", file=out)
    print(f"scaling upper {_fmt(scaled.upper_scales) or '-'}  lower {_fmt(scaled.lower_scales) or '-'}"
          f"  q {scaled.q_scale}", file=out)
    if args.tight:
        mp_star, md_star = tight_bounds_by_enumeration(scaled.instance)
        print(f"tight Mp {format_rational(mp_star)}  Md {format_rational(md_star)}", file=out)
    return EXIT_OK


def cmd_reformulate(args, out):
    inst = _load_plain(args.instance)
    scaled = scale_to_integers(inst)
    mp, md, source = _big_ms(args, scaled)
    comments = [
        f"KKT reformulation of {Path(args.instance).name}",
        f"big-M ({source}): Mp = {format_rational(mp)}, Md = {format_rational(md)}",
    ]
    text = write_lp_format(build_milp(scaled.instance, mp, md, comments))
    if args.output:
        _write(args.output, text, out)
    else:
        print(text, end="", file=out)
    return EXIT_OK


def cmd_solve_milp(args, out):
    inst = _load_plain(args.instance)
    scaled = scale_to_integers(inst)
    mp, md, source = _big_ms(args, scaled)
    res = solve_by_z_enumeration(build_milp(scaled.instance, mp, md))
    print(f"big-M ({source}): Mp {format_rational(mp)}  Md {format_rational(md)}", file=out)
    if res.optimal:
        n, m = inst.n, inst.m
        print(f"OPTIMAL value {format_rational(res.value)}", file=out)
        print(f"x: {_fmt(res.values[:n])}".rstrip(), file=out)
        print(f"y: {_fmt(res.values[n:n + m])}".rstrip(), file=out)
        print(f"z: {' '.join(map(str, res.z))}".rstrip(), file=out)
    else:
        print(res.status.name, file=out)
    return _STATUS_EXIT[res.status]


def cmd_check_cert(args, out):
    dec = _load_decision(args.instance, args.alpha)
    try:
        cert = parse_certificate(Path(args.certificate).read_text(encoding="utf-8"))
    except CertificateFormatError as exc:
        raise ParseError(str(exc), 1, 1) from None
    if isinstance(cert, OptCert):
        report = check_opt_cert(dec, cert.basis)
    else:
        report = check_pess_cert(dec, cert)
    print(report, file=out)
    if report.witness is not None:
        print(f"witness: {_fmt(report.witness)}".rstrip(), file=out)
    return EXIT_OK if report.accepted else EXIT_NO


def cmd_gen_gadget(args, out):
    bp = parse_binary_program(Path(args.program).read_text(encoding="utf-8"))
    text = format_instance(gen_binary_gadget(bp))
    if args.output:
        _write(args.output, text, out)
    else:
        print(text, end="", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exactblp", description="Exact tools for bilevel linear programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="optimistic optimum by lower-level basis enumeration")
    p.add_argument("instance")
    p.set_defaults(func=cmd_solve)

    for name, func, help_ in (
        ("decide-opt", decide_optimistic, "optimistic decision version"),
        ("decide-pess", decide_pessimistic, "pessimistic decision version"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("instance")
        p.add_argument("--alpha", type=_rational_arg)
        p.add_argument("--cert-out", help="write the certificate here on YES")
        p.set_defaults(func=lambda a, o, f=func: _decide(a, o, f))

    p = sub.add_parser("bigm", help="bilevel-correct big-M values")
    p.add_argument("instance")
    p.add_argument("--tight", action="store_true", help="also report enumeration bounds")
    p.set_defaults(func=cmd_bigm)

    for name, func, help_ in (
        ("reformulate", cmd_reformulate, "write the KKT MILP in LP format"),
        ("solve-milp", cmd_solve_milp, "solve the KKT MILP by enumerating z"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("instance")
        p.add_argument("--mp", type=_rational_arg, help="override the primal big-M")
        p.add_argument("--md", type=_rational_arg, help="override the dual big-M")
        if name == "reformulate":
            p.add_argument("-o", "--output")
        p.set_defaults(func=func)

    p = sub.add_parser("check-cert", help="check an OPT-CERT or PESS-CERT file")
    p.add_argument("instance")
    p.add_argument("certificate")
    p.add_argument("--alpha", type=_rational_arg)
    p.set_defaults(func=cmd_check_cert)

    p = sub.add_parser("gen-gadget", help="bilevel encoding of a binary program")
    p.add_argument("program")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_gadget)
    return parser


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def main():
    sys.exit(run())
