"""Command-line front end.

Subcommands ``verify``, ``bounds``, ``approx`` and ``report`` each write a
report document.  Exit status: 0 when every check passes, 1 when any check
fails, 2 on usage, configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig
from .report import FAIL, build_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COMMANDS = {
    "verify": ("verify",),
    "bounds": ("bounds",),
    "approx": ("approx",),
    "report": ("verify", "bounds", "approx"),
}


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--n", dest="N", type=int, help="half set size (inputs have 2N columns)")
    common.add_argument("--d", dest="D", type=int, help="ambient dimension")
    common.add_argument("--d-hat", dest="d_hat", type=int, help="effective dimension override")
    common.add_argument("--l-grid", dest="L_grid", type=_int_list, help="comma-separated widths, e.g. 0,1,2,4")
    common.add_argument("--samples", dest="mc_samples", type=int, help="Monte Carlo samples per estimate")
    common.add_argument("--approx-samples", dest="approx_samples", type=int,
                        help="torus inputs for network error probes")
    common.add_argument("--burn-in", dest="burn_in", type=int, help="CUE burn-in sweeps")
    common.add_argument("--thin", type=int, help="CUE sweeps between emitted states")
    common.add_argument("--epsilon", dest="epsilon_target", type=float, help="target sup error of the network")
    common.add_argument("--j", dest="J", type=int, help="root-of-unity order override")
    common.add_argument("--seed", type=int, help="64-bit root seed")
    common.add_argument("--format", dest="output_format", choices=("json", "csv"))
    common.add_argument("--out", dest="output_path", help="output file (csv: one file per section)")
    # negative control: shift the reference value of one named check
    common.add_argument("--corrupt-check", dest="corrupt", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="symsep", description="Seeded verification and separation reports.")
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "verify": "run the inner-product, Blaschke, hard-function and rank-inequality checks",
        "bounds": "tabulate the lower bounds over the width grid",
        "approx": "build the exact and exp-activation networks and probe their sup error",
        "report": "run verify, bounds and approx into one document",
    }
    for name, text in descriptions.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            cfg = RunConfig.from_json(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    names = ("N", "D", "d_hat", "L_grid", "mc_samples", "approx_samples", "burn_in", "thin",
             "epsilon_target", "J", "seed", "output_format", "output_path")
    return cfg.override(**{n: getattr(args, n) for n in names}).validate()


def _clean(value):
    """Plain JSON types; non-finite floats become ``None``."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    return value


def to_json(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def section_csv(section: dict) -> str:
    rows = section.get("table") or section["rows"]
    if section.get("table"):
        # the bound table is the payload; checks follow as their own block
        rows = section["table"] + [dict(r, L=None) for r in section["rows"]]
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in _clean(row).items()})
    return buf.getvalue()


def write_output(doc: dict, cfg: RunConfig) -> None:
    if cfg.output_format == "json":
        text = to_json(doc)
        if cfg.output_path:
            Path(cfg.output_path).write_text(text)
        else:
            sys.stdout.write(text)
        return
    sections = doc["sections"]
    if cfg.output_path:
        base = Path(cfg.output_path)
        stem = base.with_suffix("") if base.suffix == ".csv" else base
        for name, section in sections.items():
            Path(f"{stem}_{name}.csv").write_text(section_csv(section), newline="")
    else:
        for name, section in sections.items():
            sys.stdout.write(f"# {name}\n")
            sys.stdout.write(section_csv(section))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"symsep: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = build_report(cfg, COMMANDS[args.command], corrupt=args.corrupt)
    try:
        write_output(doc, cfg)
    except OSError as exc:
        print(f"symsep: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_FAIL if doc["status"] == FAIL else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
