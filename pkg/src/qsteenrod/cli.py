"""
Command line interface for qsteenrod.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import RunConfig, load_config
from .errors import QSteenrodError
from .output import get_default_output_filename, handle_output, print_summary
from .pipeline import SUBCOMMANDS, dump_report, emit, run_verify

EPILOG = """
Examples:
  qsteenrod verify A1                          # Smoke run, p = 3, N = 6
  qsteenrod verify A2 p=5 N=7 -o report.json   # Write the JSON report
  qsteenrod verify --config run.toml seed=4    # Config file plus overrides
  qsteenrod roots A2                           # Positive roots by height
  qsteenrod stab A1 p=3                        # Stab+ restriction matrix
  qsteenrod connection A2 b=[1,0]              # Quantum multiplication matrix
  qsteenrod pcurv A1 basis=fixed-point         # p-curvature in the fixed-point basis
  qsteenrod steenrod A1 p=3 N=6 b=[1]          # Sigma_b(1) via p-curvature

Overrides:
  Any config key as key=value; p, N and b are short for prime, truncation
  and divisor. Values are read as TOML (numbers, [lists], true/false),
  anything else as a plain string.

Exit codes:
  0 all enabled checks pass, 1 a check failed, 2 configuration error,
  3 degenerate prime, chamber or stable-envelope system
"""

_LABELS = {
    "verify": "Report",
    "roots": "Root table",
    "stab": "Stable basis",
    "connection": "Connection matrix",
    "pcurv": "p-curvature",
    "steenrod": "Steenrod operation",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("system", nargs="?", help="Root system such as A1, A2, B2, G2")
    parser.add_argument("overrides", nargs="*", metavar="KEY=VALUE", help="Config overrides")
    parser.add_argument("--config", type=Path, help="Flat TOML config file")

    output_group = parser.add_argument_group("output options")
    output_group.add_argument("--output", "-o", type=Path, help="Output file path")
    output_group.add_argument("--clipboard", "-c", action="store_true", help="Copy output to clipboard")
    output_group.add_argument(
        "--stdout",
        "-s",
        action="store_true",
        help="Output to stdout (default if no other output specified)",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress (-v) or solver details (-vv) to stderr",
    )


def create_parser() -> argparse.ArgumentParser:
    """Create and configure argument parser."""
    parser = argparse.ArgumentParser(
        prog="qsteenrod",
        description="Mod-p quantum connection, p-curvature and stable envelopes of T*(G/B)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    helps = {
        "verify": "Run the verification suite and emit a JSON report",
        "roots": "Print the root table",
        "stab": "Print the Stab+ restriction matrix",
        "connection": "Print the quantum multiplication matrix",
        "pcurv": "Print the p-curvature matrix",
        "steenrod": "Print Sigma_b(1) computed via the p-curvature",
    }
    for name in ("verify",) + SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=helps[name], formatter_class=argparse.RawDescriptionHelpFormatter, epilog=EPILOG)
        _add_common(sub)
    return parser


def validate_arguments(args: argparse.Namespace) -> None:
    """Validate command line arguments."""
    # "verify --config run.toml p=5" puts the first override in the system slot
    if args.system and "=" in args.system:
        args.overrides = [args.system] + list(args.overrides)
        args.system = None

    if not args.system and not args.config:
        print("Error: a root system or --config is required", file=sys.stderr)
        sys.exit(2)

    for override in args.overrides:
        if "=" not in override:
            print(f"Error: override must look like key=value, got '{override}'", file=sys.stderr)
            sys.exit(2)

    if args.output:
        output_path = Path(args.output)
        if output_path.parent != Path(".") and not output_path.parent.exists():
            try:
                output_path.parent.mkdir(parents=True, exist_ok=True)
            except (OSError, IOError) as e:
                print(f"Error: Cannot create output directory: {e}", file=sys.stderr)
                sys.exit(1)


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def resolve_output_file(args: argparse.Namespace, config: RunConfig) -> Optional[Path]:
    """-o wins over the config key; output = "auto" picks a name from the run."""
    if args.output:
        return Path(args.output)
    if config.output == "auto":
        return get_default_output_filename(config.system, config.prime, config.truncation)
    return Path(config.output) if config.output else None


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point for the CLI."""
    parser = create_parser()
    args = parser.parse_args(argv)

    validate_arguments(args)
    configure_logging(args.verbose)

    try:
        config = load_config(args.config, args.overrides, args.system)
        output_file = resolve_output_file(args, config)

        if args.command == "verify":
            print(f"Verifying {config.system} at p = {config.prime}, N = {config.truncation}...", file=sys.stderr)
            document, verdict, ctx = run_verify(config)
            handle_output(
                content=dump_report(document),
                output_file=output_file,
                to_clipboard=args.clipboard,
                to_stdout=args.stdout,
                label=_LABELS["verify"],
            )
            print_summary(document, ctx.timings)
            sys.exit(verdict)

        handle_output(
            content=emit(args.command, config),
            output_file=output_file,
            to_clipboard=args.clipboard,
            to_stdout=args.stdout,
            label=_LABELS[args.command],
        )

    except QSteenrodError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    except FileNotFoundError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user", file=sys.stderr)
        sys.exit(1)
    except Exception as e:
        print(f"Unexpected error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
