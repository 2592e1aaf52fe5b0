#!/usr/bin/env python3
"""Print the conformity tables for the two bundled handshakes.

The first protocol leaves a row unjustified and names the suspect value;
the corrected variant closes every row.  Always exits 0: the point is the
side-by-side reproduction, the per-protocol verdict is printed.
"""

from __future__ import annotations

import argparse

from secwitness.cli import NO_DECISION_BANNER
from secwitness.protocols import load_bundled
from secwitness.witness import analyze, render_table


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--function", default="fmax", choices=("fmax", "fek", "fn"),
                        help="bound used for every row (default fmax)")
    args = parser.parse_args()

    for name in ("ns", "nsl"):
        report = analyze(load_bundled(name), function=args.function)
        print(f"== {report.protocol} (function {report.function})")
        print(render_table(report))
        if report.fulfilled:
            print("verdict: criterion met on every send, secrecy grows with the protocol")
        else:
            print(NO_DECISION_BANNER)
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
