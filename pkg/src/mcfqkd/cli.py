"""``mcfqkd <command> --scenario FILE [--out FILE] [--format csv|json]``

Exit codes: 0 success, 2 unusable scenario or arguments, 3 model error
(saturated detector, no key-rate budget).
"""

import argparse
import json
import logging
import sys

from . import __version__
from .calibration import run_calibration, write_calibration
from .errors import ModelError, ScenarioError
from .report import render, run_command
from .scenario import COMMANDS, load_scenario

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_MODEL = 3

log = logging.getLogger("mcfqkd")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mcfqkd",
        description="QKD coexistence with data channels in 7-core fiber: leakage, key rate, planning.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario file (YAML or JSON)")
        p.add_argument("--out", help="output file (default: output.path or stdout)")
        choices = ("csv", "json", "table") if name == "plan" else ("csv", "json")
        p.add_argument("--format", choices=choices, help="overrides output.format")
    cal = sub.add_parser("calibrate", help="re-fit the calibration and write it as JSON")
    cal.add_argument("--out", help="output file (default: stdout)")
    return parser


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")

    if args.command == "calibrate":
        if args.out:
            write_calibration(args.out)
        else:
            sys.stdout.write(json.dumps(run_calibration(), indent=2, sort_keys=True) + "\n")
        return EXIT_OK

    try:
        scenario = load_scenario(args.scenario)
        report = run_command(args.command, scenario)
    except OSError as exc:
        log.error("cannot read scenario: %s", exc)
        return EXIT_SCENARIO
    except ScenarioError as exc:
        log.error("invalid scenario: %s", exc)
        return EXIT_SCENARIO
    except ModelError as exc:
        log.error("model error [%s]: %s", exc.code, exc)
        return EXIT_MODEL

    fmt = args.format or scenario.output_format
    _write(render(report, fmt, scenario), args.out or scenario.output_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
