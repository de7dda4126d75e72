"""spt-plot: render figures from spt CSV artifacts.

Usage: ``spt-plot --spec <json>`` where the JSON holds one figure spec or a
list of them.  Exit codes: 0 all rendered, 1 some renders failed, 2 spec file
invalid.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .render import batch
from .spec import SpecError, load_specs


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="spt-plot",
        description="render publication-style figures from spt CSV output")
    parser.add_argument("--spec", required=True,
                        help="JSON figure spec (object or list)")
    parser.add_argument("--fail-fast", action="store_true",
                        help="stop at the first failing spec")
    args = parser.parse_args(argv)

    try:
        specs = load_specs(args.spec)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2

    result = batch(specs, fail_fast=args.fail_fast)
    for png, svg in result.rendered:
        print(f"wrote {png} and {svg}")
    for spec, message in result.failures:
        print(f"failed [{spec.kind}] {spec.input_csv}: {message}",
              file=sys.stderr)
    if result.failures:
        print(f"{len(result.failures)} of {len(specs)} figures failed",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
