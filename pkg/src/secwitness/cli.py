"""Command line front end.

    secwitness analyze  <file> [--function fmax|fek|fn] [--format table|json-lines] [--roles auto|manual]
    secwitness check-wp <file> [--roles auto|manual]
    secwitness roles    <file> [--roles auto|manual]
    secwitness oracle   <file> [--trials N] [--depth N] [--seed N]

Exit codes: 0 when the criterion holds on every row, 2 when some row gives
no decision, 1 on unreadable or unparsable input, 64 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .errors import AnalyzerError
from .oracle import check_full_invariance, check_non_disclosure
from .rewrite import check_well_protected
from .roles import Protocol, load_protocol, pattern_space, roles_for
from .selection import INSTANCES, value_function
from .terms import print_message
from .witness import analyze, render_table, to_json_lines

EXIT_OK = 0
EXIT_FILE = 1
EXIT_UNDECIDED = 2
EXIT_USAGE = 64

FUNCTION_ENV = "SECWITNESS_FUNCTION"

NO_DECISION_BANNER = (
    "no decision: the criterion is one-sided, a failed row neither proves nor\n"
    "refutes secrecy; the flagged values say where the bound could not be met"
)


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); usage is 64 here
        raise _Usage(message)


def _default_function() -> str:
    return os.environ.get(FUNCTION_ENV, "fmax")


def _build_parser() -> _Parser:
    p = _Parser(prog="secwitness", description="Protocol secrecy criterion checker")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, function=True):
        sp.add_argument("file", help="protocol description")
        sp.add_argument("--roles", choices=("auto", "manual"), default=None,
                        help="force computed or declared roles (default: declared when present)")
        if function:
            sp.add_argument("--function", choices=sorted(INSTANCES), default=None,
                            help=f"bound to use (default from ${FUNCTION_ENV} or fmax)")

    sp = sub.add_parser("analyze", help="run the criterion on every send")
    add_common(sp)
    sp.add_argument("--format", choices=("table", "json-lines"), default="table")

    sp = sub.add_parser("check-wp", help="check the pattern space is well protected")
    add_common(sp, function=False)

    sp = sub.add_parser("roles", help="print role views and the pattern space")
    add_common(sp, function=False)

    sp = sub.add_parser("oracle", help="randomized checks against the attacker model")
    add_common(sp)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    return p


def _load(path: str) -> Protocol:
    try:
        return load_protocol(path)
    except OSError as err:
        raise AnalyzerError(f"cannot read {path}: {err.strerror or err}") from err


def _cmd_analyze(args) -> int:
    protocol = _load(args.file)
    function = args.function or _default_function()
    report = analyze(protocol, function=function, roles=roles_for(protocol, args.roles))
    if args.format == "json-lines":
        print(to_json_lines(report))
    else:
        print(f"protocol {report.protocol or args.file} / function {report.function}")
        print(render_table(report))
    if report.fulfilled:
        return EXIT_OK
    print(NO_DECISION_BANNER, file=sys.stderr)
    return EXIT_UNDECIDED


def _cmd_check_wp(args) -> int:
    protocol = _load(args.file)
    pool = pattern_space(protocol, roles_for(protocol, args.roles))
    report = check_well_protected(pool, protocol.context)
    for pat in pool:
        print(f"  {print_message(pat)}")
    if report.ok:
        print("well protected: every guarded value sits under a strong enough key")
        return EXIT_OK
    for atom, msg, keyset in report.violations:
        keys = ", ".join(sorted(k.display() for k in keyset)) or "no key"
        print(f"unprotected: {atom.display()} in {print_message(msg)} (guards: {keys})")
    return EXIT_UNDECIDED


def _cmd_roles(args) -> int:
    protocol = _load(args.file)
    roles = roles_for(protocol, args.roles)
    for role in roles:
        print(f"{role.role_id} ({role.agent.display()}):")
        for st in role.steps:
            peer = f" [{st.peer.display()}]" if st.peer is not None else ""
            print(f"  {st.direction.value}{peer}: {print_message(st.message)}")
    print("pattern space:")
    for pat in pattern_space(protocol, roles):
        print(f"  {print_message(pat)}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    protocol = _load(args.file)
    ctx = protocol.context
    failed = False
    for name in sorted(INSTANCES):
        rep = check_full_invariance(value_function(name), ctx,
                                    trials=args.trials, depth=args.depth, seed=args.seed)
        status = "ok" if rep.ok else "FAILED"
        print(f"full-invariance[{name}]: {status} "
              f"({rep.trials} trials, {rep.truncated_trials} truncated)")
        for f in rep.failures[:3]:
            print(f"  counterexample: {f.atom} in {f.derived}: {f.detail}")
        failed |= not rep.ok
    messages = [s.message for s in protocol.steps]
    rep = check_non_disclosure(messages, ctx, depth=args.depth)
    status = "ok" if rep.ok else "FAILED"
    print(f"non-disclosure[one honest session]: {status}")
    for f in rep.failures[:3]:
        print(f"  disclosed: {f.atom}")
    for p in rep.precondition_failures[:3]:
        print(f"  precondition: {p}")
    failed |= not rep.ok
    return EXIT_UNDECIDED if failed else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "check-wp":
            return _cmd_check_wp(args)
        if args.command == "roles":
            return _cmd_roles(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
    except AnalyzerError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FILE
    return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
