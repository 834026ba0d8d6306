"""Command line entry point: ``sta-crane <command> CONFIG``.

Exit codes: 0 success, 2 configuration error, 3 physics/regime error or
unreached optimisation target.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from .config import COMMANDS, ConfigError, load_config
from .model import ModelValidityError
from .optimal import DegenerateDurationError
from .plotting import render, script_source
from .scenarios import RUNNERS
from .sta import DesignError

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS = 0, 2, 3


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{float(v):.12g}" for v in row])
    return buf.getvalue()


def _override(text):
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sta-crane",
                                     description="Shortcut transport of a crane load: design, "
                                                 "simulation and energy consumption.")
    parser.add_argument("command", choices=COMMANDS + ("run",),
                        help="what to compute; 'run' uses the config's own 'command' key")
    parser.add_argument("config", type=Path, help="scenario file (key = value lines)")
    parser.add_argument("-o", "--output", type=Path,
                        help="CSV path (default: <config stem>-<command>.csv in the working directory)")
    parser.add_argument("--set", dest="overrides", action="append", type=_override, default=[],
                        metavar="KEY=VALUE", help="override a config entry (repeatable)")
    parser.add_argument("--plot", action="store_true", help="also render a PNG figure next to the CSV")
    parser.add_argument("--plot-script", action="store_true",
                        help="also write a standalone matplotlib script that redraws the figure")
    parser.add_argument("-j", "--jobs", type=int, default=1, help="worker processes for sweeps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, dict(args.overrides))
        command = args.command
        if command == "run":
            if cfg.command is None:
                raise ConfigError("'run' needs a 'command' key in the config", key="command",
                                  source=str(args.config))
            command = cfg.command
        report = RUNNERS[command](cfg, jobs=max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelValidityError, DegenerateDurationError, DesignError) as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS

    out = args.output or Path(f"{args.config.stem}-{command}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_csv(report.header, report.rows))
    print(f"{command}: wrote {len(report.rows)} rows to {out}")
    for line in report.summary:
        print("  " + line)
    if report.plot is not None and (args.plot or args.plot_script):
        png = out.with_suffix(".png")
        if args.plot:
            render(report.plot, out, png)
            print(f"  figure: {png}")
        if args.plot_script:
            script = out.with_name(out.stem + "_plot.py")
            script.write_text(script_source(report.plot, out, png))
            print(f"  plot script: {script}")
    if not report.ok:
        print("target not met; see summary above", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
