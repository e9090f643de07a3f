"""Command-line entry point.

    clhjlab run <scenario-file>       execute a scenario, exit 0 iff all PASS
    clhjlab validate <scenario-file>  parse and validate only
    clhjlab list-catalog              show builtin problems and parameters

The environment variable CLHJLAB_OUTPUT_ROOT, when set, is prepended to
every scenario's outputs.dir.
"""

from __future__ import annotations

import argparse
import sys

from .catalog import catalog_names, catalog_param_docs, documented_assumptions
from .errors import ClhjError, ScenarioError
from .scenario import parse_scenario, run_scenario


def _cmd_run(args) -> int:
    try:
        sc = parse_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run_scenario(sc)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ClhjError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def _cmd_validate(args) -> int:
    try:
        sc = parse_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.scenario}: OK "
          f"(id={sc.values['scenario.id']}, kind={sc.values['experiment.kind']})")
    return 0


def _cmd_list_catalog(_args) -> int:
    for name in catalog_names():
        print(name)
        print(f"  params: {catalog_param_docs(name)}")
        docs = documented_assumptions(name)
        tags = " ".join(f"{k}={v}" for k, v in sorted(docs.items()))
        print(f"  assumptions (defaults): {tags}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="clhjlab",
        description="scenario-driven runs of the conservation-law / "
                    "Hamilton-Jacobi laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("scenario")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="validate a scenario file")
    p_val.add_argument("scenario")
    p_val.set_defaults(func=_cmd_validate)

    p_cat = sub.add_parser("list-catalog", help="list builtin problems")
    p_cat.set_defaults(func=_cmd_list_catalog)

    args = parser.parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
