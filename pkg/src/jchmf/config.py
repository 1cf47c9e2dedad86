"""Declarative run configuration.

A run is described by one TOML file with flat dotted keys; every key has a
default, so the file only lists what differs from the stock figure setup.
``schema_version`` is mandatory in any config file and must currently be 1.
Unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .meanfield import SearchConfig
from .model import ModelParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AxisSpec:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"axis count must be >= 1, got {self.count}")
        if self.count == 1 and self.start != self.stop:
            raise ConfigError("axis with count=1 requires start == stop")

    def values(self) -> np.ndarray:
        # uniform, inclusive of both endpoints
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    format: str = "csv"
    svg: bool = False
    workers: int = 0  # 0: use available parallelism


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = ModelParams()
    axis_j: AxisSpec = AxisSpec(0.0, 0.2, 80)
    axis_mu: AxisSpec = AxisSpec(-2.5, 0.5, 80)
    axis_anh: AxisSpec = AxisSpec(-3.0, 3.0, 241)
    phase_anh_values: tuple[float, ...] = (-1.0, 0.0, 1.0)
    spectrum_delta_values: tuple[float, ...] = (-2.0, 0.0, 2.0)
    spectrum_n_max_sector: int = 3
    lobes_n_max_lobe: int = 4
    solver: SearchConfig = SearchConfig()
    output: OutputConfig = OutputConfig()


def _flatten(tree: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in tree.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, path + "."))
        else:
            flat[path] = value
    return flat


def _as_float(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite, got {value!r}")
    return v


def _as_int(key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _as_bool(key: str, value) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{key} must be a boolean, got {value!r}")
    return value


def _as_str(key: str, value) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string, got {value!r}")
    return value


def _as_float_list(key: str, value) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key} must be a nonempty array of numbers")
    return tuple(_as_float(key, v) for v in value)


def _axis(flat: dict, name: str, default: AxisSpec) -> AxisSpec:
    start = flat.pop(f"axes.{name}.start", default.start)
    stop = flat.pop(f"axes.{name}.stop", default.stop)
    count = flat.pop(f"axes.{name}.count", default.count)
    return AxisSpec(
        _as_float(f"axes.{name}.start", start),
        _as_float(f"axes.{name}.stop", stop),
        _as_int(f"axes.{name}.count", count),
    )


def _parse_psi_max(value) -> float | None:
    if value is None or value == "auto":
        return None
    v = _as_float("solver.psi_max", value)
    if v <= 0:
        raise ConfigError(f"solver.psi_max must be positive or 'auto', got {v}")
    return v


def parse_config(tree: dict, require_schema: bool = True) -> RunConfig:
    """Build a RunConfig from a parsed TOML tree."""
    flat = _flatten(tree)
    if require_schema:
        if "schema_version" not in flat:
            raise ConfigError("config file must declare schema_version")
        version = flat.pop("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(
                f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}"
            )
    else:
        flat.pop("schema_version", None)

    defaults = RunConfig()
    raw_lambda2 = flat.pop("model.lambda2", None)
    model = ModelParams(
        omega_c=_as_float("model.omega_c", flat.pop("model.omega_c", 0.0)),
        delta=_as_float("model.delta", flat.pop("model.delta", 0.0)),
        anh=_as_float("model.anh", flat.pop("model.anh", 0.0)),
        lambda1=_as_float("model.lambda1", flat.pop("model.lambda1", 1.0)),
        lambda2=(
            None if raw_lambda2 is None
            else _as_float("model.lambda2", raw_lambda2)
        ),
        z=_as_int("model.z", flat.pop("model.z", 3)),
    )
    axis_j = _axis(flat, "j", defaults.axis_j)
    axis_mu = _axis(flat, "mu", defaults.axis_mu)
    axis_anh = _axis(flat, "anh", defaults.axis_anh)

    phase_anh = _as_float_list(
        "phase.anh_values", flat.pop("phase.anh_values", list(defaults.phase_anh_values))
    )
    spectrum_deltas = _as_float_list(
        "spectrum.delta_values",
        flat.pop("spectrum.delta_values", list(defaults.spectrum_delta_values)),
    )
    spectrum_n = _as_int(
        "spectrum.n_max_sector", flat.pop("spectrum.n_max_sector", 3)
    )
    lobes_n = _as_int("lobes.n_max_lobe", flat.pop("lobes.n_max_lobe", 4))
    if spectrum_n < 1:
        raise ConfigError("spectrum.n_max_sector must be >= 1")
    if lobes_n < 1:
        raise ConfigError("lobes.n_max_lobe must be >= 1")

    d = SearchConfig()
    solver = SearchConfig(
        coarse_points=_as_int(
            "solver.coarse_points", flat.pop("solver.coarse_points", d.coarse_points)
        ),
        psi_max=_parse_psi_max(flat.pop("solver.psi_max", "auto")),
        golden_tol=_as_float(
            "solver.golden_tol", flat.pop("solver.golden_tol", d.golden_tol)
        ),
        polish=_as_bool("solver.polish", flat.pop("solver.polish", d.polish)),
        psi_tol=_as_float("solver.psi_tol", flat.pop("solver.psi_tol", d.psi_tol)),
        rho_tol=_as_float("solver.rho_tol", flat.pop("solver.rho_tol", d.rho_tol)),
        n_max_start=_as_int(
            "solver.n_max_start", flat.pop("solver.n_max_start", d.n_max_start)
        ),
        n_max_cap=_as_int(
            "solver.n_max_cap", flat.pop("solver.n_max_cap", d.n_max_cap)
        ),
        fd_step=_as_float("solver.fd_step", flat.pop("solver.fd_step", d.fd_step)),
        compute_rho_fd=_as_bool(
            "solver.compute_rho_fd",
            flat.pop("solver.compute_rho_fd", d.compute_rho_fd),
        ),
        degeneracy_tol=_as_float(
            "solver.degeneracy_tol",
            flat.pop("solver.degeneracy_tol", d.degeneracy_tol),
        ),
    )
    if solver.coarse_points < 2:
        raise ConfigError("solver.coarse_points must be >= 2")
    if solver.n_max_start < 2 or solver.n_max_cap < solver.n_max_start:
        raise ConfigError("need 2 <= solver.n_max_start <= solver.n_max_cap")

    fmt = _as_str("output.format", flat.pop("output.format", "csv"))
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {fmt!r}")
    output = OutputConfig(
        dir=_as_str("output.dir", flat.pop("output.dir", "out")),
        format=fmt,
        svg=_as_bool("output.svg", flat.pop("output.svg", False)),
        workers=_as_int("output.workers", flat.pop("output.workers", 0)),
    )
    if output.workers < 0:
        raise ConfigError("output.workers must be >= 0")

    if flat:
        unknown = ", ".join(sorted(flat))
        raise ConfigError(f"unknown config keys: {unknown}")

    return RunConfig(
        model=model,
        axis_j=axis_j,
        axis_mu=axis_mu,
        axis_anh=axis_anh,
        phase_anh_values=phase_anh,
        spectrum_delta_values=spectrum_deltas,
        spectrum_n_max_sector=spectrum_n,
        lobes_n_max_lobe=lobes_n,
        solver=solver,
        output=output,
    )


def load_config(path: str | None) -> RunConfig:
    """Read a config file, or return all defaults when path is None."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            tree = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return parse_config(tree)
