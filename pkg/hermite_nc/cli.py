#!/usr/bin/env python3
"""
cli.py
Command-line interface for hermite-nc.
Parses arguments, loads the experiment config, and invokes the orchestrator.

Exit codes: 0 pass, 1 probe or numeric failure, 2 usage/config error, 130 interrupted.
"""
from __future__ import annotations
import argparse, sys

from .bundle import DEFAULT_CONFIG_PATH
from .config import dump_config, find_config, load_config
from .errors import ConfigError, InputError, NumericError
from .orchestrator import run_experiment, run_verify

EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ Error: {message}", file=sys.stderr)
        print("💡 Hint: Try 'hermite-nc --help'", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def validate_arguments(args) -> int:
    """0 when the arguments are usable, else the exit code after printing a hint."""
    jobs = getattr(args, "jobs", None)
    if jobs is not None and jobs < 1:
        print(f"❌ Error: --jobs must be a positive integer, got {jobs}")
        print("💡 Hint: Try --jobs 4 for example")
        return EXIT_USAGE
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="hermite-nc",
        description="hermite-nc: Hermite expansions of matrix-valued functions and operator probes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="\nResults go to results.csv, report.json and plot_*.svg in the output directory.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a TOML config")
    run.add_argument(
        "config",
        nargs="?",
        default=None,
        help=f"path to the experiment TOML (default: {DEFAULT_CONFIG_PATH} then /etc/hermite_nc.toml)",
    )
    run.add_argument("--jobs", type=int, default=None, help="worker threads (must be positive)")
    run.add_argument("--out", default=None, help="output directory (overrides out_dir)")
    run.add_argument("--seed", type=int, default=None, help="random seed (overrides seed)")

    ver = sub.add_parser("verify", help="run the built-in acceptance battery")
    ver.add_argument("--out", default="verify", help="output directory for the battery (default: ./verify)")
    ver.add_argument("--jobs", type=int, default=None, help="worker threads (must be positive)")
    ver.add_argument("--seed", type=int, default=0, help="random seed for the battery")

    show = sub.add_parser("show-config", help="print the normalized config as TOML")
    show.add_argument("config", nargs="?", default=None, help="path to the experiment TOML")
    return ap


def _load(path_arg):
    cfg_path = None
    try:
        cfg_path = find_config(path_arg)
        return load_config(cfg_path), 0
    except FileNotFoundError as e:
        print(f"❌ Error: {e}")
        if path_arg:
            print("💡 Hint: Check the path or run './setup.sh demo-config' to generate a template")
        else:
            print(f"💡 Hint: Create {cfg_path or DEFAULT_CONFIG_PATH} or run './setup.sh demo-config' to generate a template")
        return None, EXIT_USAGE
    except ConfigError as e:
        print(f"❌ Error: Invalid configuration file {cfg_path}: {e}")
        print("💡 Hint: Keys must match the experiment fields exactly; see 'hermite-nc show-config'")
        return None, EXIT_USAGE


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        code = validate_arguments(args)
        if code:
            return code

        if args.command == "verify":
            return run_verify(args.out, args.jobs, args.seed)

        cfg, code = _load(args.config)
        if cfg is None:
            return code
        if args.command == "show-config":
            sys.stdout.write(dump_config(cfg))
            return 0
        return run_experiment(cfg, args.jobs, args.out, args.seed)

    except KeyboardInterrupt:
        print("\n\n⚡ Interrupted by user.")
        return 130
    except InputError as e:
        print(f"❌ Error: {e}")
        print("💡 Hint: Check the experiment's parameter ranges against its preconditions")
        return EXIT_USAGE
    except NumericError as e:
        print(f"❌ Numeric failure: {e}")
        print("💡 Hint: Shrink the lattice or raise the grid size")
        return 1
    except Exception as e:
        print(f"❌ Unexpected error: {e}")
        print("💡 Hint: Run 'hermite-nc show-config' to check the configuration")
        return 1


if __name__ == "__main__":
    sys.exit(main())
