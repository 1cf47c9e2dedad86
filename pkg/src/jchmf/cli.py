"""Command-line entry point.

Subcommands: ``spectrum`` (sector eigenvalues vs anharmonicity), ``lobes``
(weak-hopping lobe boundaries and crossings), ``phase`` (mean-field order
parameter and density over a (J, mu) grid).  Flags override config-file
values.  Progress goes to stderr; data only to files.

Exit codes: 0 success, 1 configuration error, 2 numerical failure at every
grid point of a phase sweep.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .config import ConfigError, RunConfig, load_config
from .heatmap import emit_heatmap
from .sweep import (
    FAILURE_FLAGS,
    sweep_lobes,
    sweep_phase,
    sweep_spectrum,
    write_lobes_csv,
    write_lobes_json,
    write_phase_csv,
    write_phase_json,
    write_spectrum_csv,
    write_spectrum_json,
)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="TOML run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), help="table format")
    common.add_argument(
        "--svg", action="store_true", help="also write SVG heatmaps (phase only)"
    )
    parser = argparse.ArgumentParser(
        prog="jchmf",
        description="Mean-field phase diagrams of a qubit-cavity lattice.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common],
                   help="sector eigenvalues vs anharmonicity")
    sub.add_parser("lobes", parents=[common],
                   help="weak-hopping Mott lobe boundaries")
    sub.add_parser("phase", parents=[common],
                   help="order parameter and density over a (J, mu) grid")
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    out = cfg.output
    if args.out is not None:
        out = replace(out, dir=args.out)
    if args.format is not None:
        out = replace(out, format=args.format)
    if args.svg:
        out = replace(out, svg=True)
    return replace(cfg, output=out)


def _progress(label: str):
    state = {"last": -1}

    def report(done: int, total: int) -> None:
        pct = done * 100 // total
        if pct != state["last"] or done == total:
            state["last"] = pct
            sys.stderr.write(f"\r{label}: {done}/{total} ({pct}%)")
            sys.stderr.flush()
            if done == total:
                sys.stderr.write("\n")

    return report


def _tag(value: float) -> str:
    return f"{value:g}".replace("-", "m")


def _run_spectrum(cfg: RunConfig) -> int:
    tables = sweep_spectrum(cfg)
    for dv, rows in tables.items():
        stem = os.path.join(cfg.output.dir, f"spectrum_delta_{_tag(dv)}")
        if cfg.output.format == "csv":
            path = stem + ".csv"
            write_spectrum_csv(rows, path)
        else:
            path = stem + ".json"
            write_spectrum_json(rows, path)
        sys.stderr.write(f"wrote {path}\n")
    return 0


def _run_lobes(cfg: RunConfig) -> int:
    diagram = sweep_lobes(cfg)
    if cfg.output.format == "csv":
        b_path = os.path.join(cfg.output.dir, "lobe_boundaries.csv")
        c_path = os.path.join(cfg.output.dir, "lobe_crossings.csv")
        write_lobes_csv(diagram, b_path, c_path)
        sys.stderr.write(f"wrote {b_path}\nwrote {c_path}\n")
    else:
        path = os.path.join(cfg.output.dir, "lobes.json")
        write_lobes_json(diagram, path)
        sys.stderr.write(f"wrote {path}\n")
    return 0


def _run_phase(cfg: RunConfig) -> int:
    all_failed = True
    for anh in cfg.phase_anh_values:
        label = f"phase anh={anh:g}"
        records = sweep_phase(cfg, anh, progress=_progress(label))
        if any(not (r.flags & FAILURE_FLAGS) for r in records):
            all_failed = False
        stem = os.path.join(cfg.output.dir, f"phase_anh_{_tag(anh)}")
        if cfg.output.format == "csv":
            path = stem + ".csv"
            write_phase_csv(records, path)
        else:
            path = stem + ".json"
            write_phase_json(records, path)
        sys.stderr.write(f"wrote {path}\n")
        if cfg.output.svg:
            for observable in ("psi", "rho"):
                svg_path = os.path.join(
                    cfg.output.dir, f"heatmap_{observable}_anh_{_tag(anh)}.svg"
                )
                emit_heatmap(records, observable, svg_path)
                sys.stderr.write(f"wrote {svg_path}\n")
    return 2 if all_failed else 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        os.makedirs(cfg.output.dir, exist_ok=True)
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    if args.command == "spectrum":
        return _run_spectrum(cfg)
    if args.command == "lobes":
        return _run_lobes(cfg)
    return _run_phase(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
