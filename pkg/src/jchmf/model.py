"""Domain types shared by every other module.

Units: all energies are measured in units of the first qubit-photon coupling
lambda1, which is therefore fixed to 1 by default.  Only energy differences
matter physically: adding the same constant to ``omega_c`` and ``mu`` leaves
the mean-field problem unchanged, so ``omega_c`` defaults to 0 and reported
chemical potentials read directly as (mu - omega_c).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

SQRT2 = math.sqrt(2.0)


class ModelError(ValueError):
    """Base class for parameter validation failures."""


class NonPositiveCoupling(ModelError):
    pass


class NegativeHopping(ModelError):
    pass


class InvalidCoordination(ModelError):
    pass


class QubitLevel(enum.IntEnum):
    """Qubit levels in ascending energy order.

    The integer value doubles as the level's rank in the basis ordering and
    as its contribution to the conserved excitation number.
    """

    G = 0
    E = 1
    F = 2


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters, all dimensionless (units of lambda1).

    omega_c  : bare cavity frequency
    delta    : qubit-cavity detuning, delta = omega_q - omega_c
    anh      : qubit anharmonicity (detuning of the e-f transition from g-e)
    lambda1  : g-e qubit-photon coupling (the energy unit)
    lambda2  : e-f coupling; defaults to sqrt(2)*lambda1
    z        : lattice coordination number
    j_hop    : photon hopping amplitude J
    mu       : chemical potential
    """

    omega_c: float = 0.0
    delta: float = 0.0
    anh: float = 0.0
    lambda1: float = 1.0
    lambda2: float | None = None
    z: int = 3
    j_hop: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if self.lambda2 is None:
            object.__setattr__(self, "lambda2", SQRT2 * self.lambda1)

    @property
    def omega_q(self) -> float:
        # derived, never stored independently
        return self.omega_c + self.delta

    def with_(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged if all invariants hold, else raise.

    Raises NonPositiveCoupling, NegativeHopping or InvalidCoordination,
    naming the offending field.
    """
    if not params.lambda1 > 0:
        raise NonPositiveCoupling(f"lambda1 must be > 0, got {params.lambda1}")
    if not params.lambda2 > 0:
        raise NonPositiveCoupling(f"lambda2 must be > 0, got {params.lambda2}")
    if params.j_hop < 0:
        raise NegativeHopping(f"j_hop must be >= 0, got {params.j_hop}")
    if not isinstance(params.z, int) or params.z < 1:
        raise InvalidCoordination(f"z must be a positive integer, got {params.z!r}")
    for name in ("omega_c", "delta", "anh", "mu", "lambda1", "lambda2", "j_hop"):
        v = getattr(params, name)
        if not math.isfinite(v):
            raise ModelError(f"{name} must be finite, got {v}")
    return params


@dataclass(frozen=True)
class BasisState:
    """Product state |level, n photons>."""

    level: QubitLevel
    photons: int

    def __post_init__(self):
        if self.photons < 0:
            raise ModelError(f"photon number must be >= 0, got {self.photons}")


def excitation_number(b: BasisState) -> int:
    """Conserved excitation count N = n + m_s (m_G=0, m_E=1, m_F=2)."""
    return b.photons + int(b.level)


@dataclass(frozen=True)
class TruncatedBasis:
    """Fock-space truncation with a fixed, documented state ordering.

    index(s, n) = 3*n + rank(s) with rank G=0, E=1, F=2, so states are
    grouped by photon number and the matrix of the mean-field Hamiltonian
    is banded with bandwidth 3.
    """

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ModelError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return 3 * (self.n_max + 1)

    def index(self, state: BasisState) -> int:
        if state.photons > self.n_max:
            raise ModelError(
                f"photon number {state.photons} exceeds n_max={self.n_max}"
            )
        return 3 * state.photons + int(state.level)

    def state(self, idx: int) -> BasisState:
        if not 0 <= idx < self.dim:
            raise ModelError(f"index {idx} out of range for dim={self.dim}")
        n, rank = divmod(idx, 3)
        return BasisState(QubitLevel(rank), n)

    def states(self):
        """All basis states in index order."""
        return [self.state(i) for i in range(self.dim)]
