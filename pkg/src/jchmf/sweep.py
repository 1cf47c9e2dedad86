"""Grid sweeps and their deterministic serialization.

A phase sweep evaluates the mean-field solver over a (J, mu) grid at fixed
anharmonicity and detuning.  Per-point failures never abort the sweep: the
affected record carries flags instead.  Emission order and file bytes are
fully determined by the configuration, independent of worker count.
"""

from __future__ import annotations

import csv
import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .config import ConfigError, RunConfig
from .lobes import LobeDiagram, lobe_diagram
from .meanfield import (
    BracketAtBoundary,
    DegeneracyWarning,
    SearchConfig,
    TruncationNotConverged,
    converge_truncation,
)
from .model import ModelParams
from .onsite_spectrum import SpectrumRow, spectrum_vs_anharmonicity

FLAG_DEGENERACY = "degeneracy"
FLAG_BRACKET = "bracket_boundary"
FLAG_TRUNCATION = "truncation_warning"
FAILURE_FLAGS = frozenset({FLAG_BRACKET, FLAG_TRUNCATION})

PHASE_COLUMNS = (
    "j_over_lambda",
    "mu_minus_omega_over_lambda",
    "anh",
    "delta",
    "psi_min",
    "rho",
    "energy",
    "n_max_used",
    "flags",
)


class IncompleteGrid(ValueError):
    pass


@dataclass(frozen=True)
class SweepRecord:
    j_over_lambda: float
    mu_minus_omega_over_lambda: float
    anh: float
    delta: float
    psi_min: float
    rho: float
    energy: float
    n_max_used: int
    flags: frozenset[str]


def _evaluate_point(
    base: ModelParams, solver: SearchConfig, j_val: float, mu_val: float
) -> tuple[float, float, float, int, frozenset[str]]:
    """One grid point; returns (psi, rho, energy, n_max_used, flags)."""
    scale = base.lambda1
    params = base.with_(j_hop=j_val * scale, mu=base.omega_c + mu_val * scale)
    flags: set[str] = set()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        try:
            sol = converge_truncation(params, search=solver)
        except BracketAtBoundary as exc:
            sol = exc.solution
            flags.add(FLAG_BRACKET)
        except TruncationNotConverged as exc:
            sol = exc.solution
            flags.add(FLAG_TRUNCATION)
            if not sol.converged and sol.psi_min >= sol.psi_bracket[1] > 0.0:
                flags.add(FLAG_BRACKET)
    if sol.degenerate:
        flags.add(FLAG_DEGENERACY)
    return sol.psi_min, sol.rho, sol.energy, sol.n_max_used, frozenset(flags)


def _evaluate_chunk(args):
    base, solver, points = args
    out = []
    for ji, mi, j_val, mu_val in points:
        out.append((ji, mi) + _evaluate_point(base, solver, j_val, mu_val))
    return out


def resolve_workers(cfg: RunConfig) -> int:
    """Worker count: JCHMF_WORKERS env var beats config, 0 means auto."""
    env = os.environ.get("JCHMF_WORKERS")
    if env is not None:
        try:
            w = int(env)
        except ValueError as exc:
            raise ConfigError(f"JCHMF_WORKERS must be an integer, got {env!r}") from exc
        if w < 1:
            raise ConfigError(f"JCHMF_WORKERS must be >= 1, got {w}")
        return w
    if cfg.output.workers > 0:
        return cfg.output.workers
    return os.cpu_count() or 1


def sweep_phase(cfg: RunConfig, anh: float, progress=None) -> list[SweepRecord]:
    """Full (J, mu) sweep at one anharmonicity value.

    Emission order is row-major in (J, mu) grid indices regardless of how
    the points were scheduled, so output bytes do not depend on the worker
    count.
    """
    base = cfg.model.with_(anh=float(anh))
    j_vals = cfg.axis_j.values()
    mu_vals = cfg.axis_mu.values()
    points = [
        (ji, mi, float(j), float(m))
        for ji, j in enumerate(j_vals)
        for mi, m in enumerate(mu_vals)
    ]
    total = len(points)
    workers = resolve_workers(cfg)

    results: dict[tuple[int, int], tuple] = {}
    if workers == 1:
        for idx, (ji, mi, j_val, mu_val) in enumerate(points):
            results[(ji, mi)] = _evaluate_point(base, cfg.solver, j_val, mu_val)
            if progress is not None:
                progress(idx + 1, total)
    else:
        chunk_size = max(1, total // (workers * 8))
        chunks = [
            (base, cfg.solver, points[i : i + chunk_size])
            for i in range(0, total, chunk_size)
        ]
        done = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk_result in pool.map(_evaluate_chunk, chunks):
                for ji, mi, *payload in chunk_result:
                    results[(ji, mi)] = tuple(payload)
                done += len(chunk_result)
                if progress is not None:
                    progress(done, total)

    records = []
    for ji, j in enumerate(j_vals):
        for mi, m in enumerate(mu_vals):
            psi, rho, energy, n_used, flags = results[(ji, mi)]
            records.append(
                SweepRecord(
                    j_over_lambda=float(j),
                    mu_minus_omega_over_lambda=float(m),
                    anh=float(anh),
                    delta=cfg.model.delta,
                    psi_min=psi,
                    rho=rho,
                    energy=energy,
                    n_max_used=n_used,
                    flags=flags,
                )
            )
    return records


def sweep_spectrum(cfg: RunConfig) -> dict[float, list[SpectrumRow]]:
    """Sector eigenvalue tables over the anharmonicity axis, one per delta."""
    axis = [float(a) for a in cfg.axis_anh.values()]
    out = {}
    for dv in cfg.spectrum_delta_values:
        params = cfg.model.with_(delta=float(dv))
        out[float(dv)] = spectrum_vs_anharmonicity(
            params, axis, cfg.spectrum_n_max_sector
        )
    return out


def sweep_lobes(cfg: RunConfig) -> LobeDiagram:
    """Lobe boundaries and crossings over the anharmonicity axis."""
    axis = [float(a) for a in cfg.axis_anh.values()]
    return lobe_diagram(cfg.model, axis, cfg.lobes_n_max_lobe)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_phase_csv(records: list[SweepRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PHASE_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    _fmt(r.j_over_lambda),
                    _fmt(r.mu_minus_omega_over_lambda),
                    _fmt(r.anh),
                    _fmt(r.delta),
                    _fmt(r.psi_min),
                    _fmt(r.rho),
                    _fmt(r.energy),
                    str(r.n_max_used),
                    ";".join(sorted(r.flags)),
                ]
            )


def read_phase_csv(path: str) -> list[SweepRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != PHASE_COLUMNS:
            raise ValueError(f"unexpected phase CSV header: {header}")
        for row in reader:
            records.append(
                SweepRecord(
                    j_over_lambda=float(row[0]),
                    mu_minus_omega_over_lambda=float(row[1]),
                    anh=float(row[2]),
                    delta=float(row[3]),
                    psi_min=float(row[4]),
                    rho=float(row[5]),
                    energy=float(row[6]),
                    n_max_used=int(row[7]),
                    flags=frozenset(f for f in row[8].split(";") if f),
                )
            )
    return records


def write_phase_json(records: list[SweepRecord], path: str) -> None:
    payload = [
        {
            "j_over_lambda": r.j_over_lambda,
            "mu_minus_omega_over_lambda": r.mu_minus_omega_over_lambda,
            "anh": r.anh,
            "delta": r.delta,
            "psi_min": r.psi_min,
            "rho": r.rho,
            "energy": r.energy,
            "n_max_used": r.n_max_used,
            "flags": sorted(r.flags),
        }
        for r in records
    ]
    with open(path, "w") as fh:
        json.dump({"records": payload}, fh, indent=1)
        fh.write("\n")


def write_spectrum_csv(rows: list[SpectrumRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("anh", "n_excitations", "branch", "eigenvalue"))
        for r in rows:
            writer.writerow(
                [_fmt(r.anh), str(r.n_excitations), r.branch, _fmt(r.eigenvalue)]
            )


def write_spectrum_json(rows: list[SpectrumRow], path: str) -> None:
    payload = [
        {
            "anh": r.anh,
            "n_excitations": r.n_excitations,
            "branch": r.branch,
            "eigenvalue": r.eigenvalue,
        }
        for r in rows
    ]
    with open(path, "w") as fh:
        json.dump({"rows": payload}, fh, indent=1)
        fh.write("\n")


def write_lobes_csv(diagram: LobeDiagram, boundaries_path: str, crossings_path: str) -> None:
    with open(boundaries_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("anh", "n_from", "n_to", "mu_boundary", "lobe_covered"))
        for i, row in enumerate(diagram.boundaries):
            hidden = set(diagram.covered[i])
            for b in row:
                # the flag refers to the lobe just above this boundary; the
                # topmost lobe's width is not assessable from this table
                covered = (
                    "" if b.n_to > len(row) - 1 else
                    ("true" if b.n_to in hidden else "false")
                )
                writer.writerow(
                    [_fmt(b.anh), str(b.n_from), str(b.n_to), _fmt(b.mu_boundary), covered]
                )
    with open(crossings_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("lobe", "anh", "mu"))
        for c in diagram.crossings:
            writer.writerow([str(c.lobe), _fmt(c.anh), _fmt(c.mu)])


def write_lobes_json(diagram: LobeDiagram, path: str) -> None:
    payload = {
        "anh_axis": list(diagram.anh_axis),
        "boundaries": [
            [
                {
                    "anh": b.anh,
                    "n_from": b.n_from,
                    "n_to": b.n_to,
                    "mu_boundary": b.mu_boundary,
                }
                for b in row
            ]
            for row in diagram.boundaries
        ],
        "covered": diagram.covered,
        "crossings": [
            {"lobe": c.lobe, "anh": c.anh, "mu": c.mu} for c in diagram.crossings
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
