#!/usr/bin/env python3
"""
Homogenization lab for forced graphical mean curvature flow
CLI entry point for the solvers and experiments

Usage:
    python main.py check --config data/configs/forced_sweep.toml
    python main.py rate --config data/configs/forced_sweep.toml --jobs 4 --out runs/forced
    python main.py cone --config data/configs/cone.toml --override experiment.resolutions=[512]
    python main.py --template  # Generate TOML template
"""
import argparse
import asyncio
import logging
import sys
import time
import traceback
from pathlib import Path
from typing import List, Optional

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from src import __version__
from src.config import RunConfig, apply_overrides, config_from_dict, parse_config, render_template, settings
from src.errors import HomogenizationError
from src.pipeline import COMMANDS, ExperimentPipeline
from src.utils import format_duration


def print_banner():
    """Print application banner"""
    print(f"""
================================================================
    Forced Mean Curvature Flow Homogenization Lab
    v{__version__}
================================================================
    """)


def configure_logging(debug: bool):
    level = logging.DEBUG if debug else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def load_config(path: Optional[str], overrides: List[str]) -> RunConfig:
    """Config file (or defaults) with --override values applied"""
    if path:
        return parse_config(Path(path), overrides)
    return config_from_dict(apply_overrides({}, overrides))


def resolve_out(flag: Optional[str], config: Optional[RunConfig]) -> Path:
    """--out > output_dir in the config > HOMOG_MCF_OUT"""
    if flag:
        return Path(flag)
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    return settings.out


def write_template(out: Path) -> Path:
    """Write the commented default config below out/templates"""
    target = settings.ensure_dirs(out) / "templates"
    target.mkdir(exist_ok=True)
    path = target / "run_template.toml"
    path.write_text(render_template(), encoding="utf-8")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Numerical lab for the homogenization of forced graph mean curvature flow",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Commands:
  check      coercivity certificate of the configured force
  evolve     rescaled flow run and trace export
  cell       corrector and F_bar at cell.p
  table      effective Hamiltonian table (table.csv)
  effective  Lax-Friedrichs run of the effective equation
  rate       homogenization error sweep and report
  cone       cone example (experiment.cone_variant) and report
  monitors   a priori estimate monitors

Examples:
  python main.py check --config data/configs/constant_force.toml
  python main.py rate --config data/configs/forced_sweep.toml --jobs 4
  python main.py cone --config data/configs/cone.toml --out runs/cone
  python main.py monitors --config data/configs/forced_monitors.toml --override solver.horizon=4.0
  python main.py --template
        """
    )

    parser.add_argument(
        "command",
        nargs="?",
        choices=COMMANDS,
        help="Command to run"
    )

    parser.add_argument(
        "--config", "-c",
        type=str,
        help="TOML run configuration (defaults when omitted)"
    )

    parser.add_argument(
        "--jobs", "-j",
        type=int,
        default=None,
        help="Worker threads for independent work items (default: HOMOG_MCF_JOBS or 1)"
    )

    parser.add_argument(
        "--out", "-o",
        type=str,
        help="Output directory (default: output_dir from the config, then HOMOG_MCF_OUT)"
    )

    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config key, e.g. solver.horizon=2.0 (repeatable)"
    )

    parser.add_argument(
        "--template", "-t",
        action="store_true",
        help="Generate TOML template file"
    )

    parser.add_argument(
        "--debug", "-d",
        action="store_true",
        help="Enable debug output"
    )

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Print banner
    print_banner()

    # Handle debug mode
    if args.debug:
        settings.debug = True
    configure_logging(settings.debug)

    try:
        # Handle template generation
        if args.template:
            template_path = write_template(resolve_out(args.out, None))
            print(f"\n[SUCCESS] Template file created!")
            print(f"   Location: {template_path}")
            print("   Edit it and run:")
            print(f"   python main.py <command> --config {template_path}")
            return 0

        # Require a command otherwise
        if not args.command:
            parser.print_help()
            print("[ERROR] a command is required (or --template)", file=sys.stderr)
            return 1

        config = load_config(args.config, args.override)
        out = resolve_out(args.out, config)
        jobs = args.jobs if args.jobs is not None else settings.jobs

        print(f"\n[START] {args.command}")
        print(f"   Scenario: {config.scenario.name} (n = {config.scenario.dimension})")
        print(f"   Output: {out}")
        print()

        pipeline = ExperimentPipeline(
            config,
            out,
            jobs=jobs,
            cache_enabled=settings.cache_enabled,
            cache_keep=settings.cache_keep,
            show_progress=sys.stderr.isatty(),
        )
        started = time.perf_counter()
        outputs = asyncio.run(pipeline.run(args.command))
        elapsed = time.perf_counter() - started

        print(f"\n[SUCCESS] {args.command} finished in {format_duration(elapsed)}")
        for path in outputs:
            print(f"   {path}")
        print()
        return 0

    except HomogenizationError as e:
        print(f"[ERROR] {type(e).__name__}: {e}", file=sys.stderr)
        if settings.debug:
            traceback.print_exc()
        return getattr(e, "exit_code", 2)

    except OSError as e:
        print(f"[ERROR] {type(e).__name__}: {e}", file=sys.stderr)
        if settings.debug:
            traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
