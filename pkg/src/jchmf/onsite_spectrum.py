"""Exact J=0 physics: per-sector spectra of the on-site Hamiltonian.

At zero hopping the excitation number N = a^dag a + |e><e| + 2|f><f| is
conserved, so the on-site Hamiltonian splits into sectors spanned by
{|g,N>, |e,N-1>, |f,N-2>} (dropping states with negative photon number).
Sector N=0 is trivial, N=1 has a closed form, N>=2 is a 3x3 matrix.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import eigen
from .model import ModelParams, validate


class SectorTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class SectorSpectrum:
    """Eigenvalues/eigenvectors of one fixed-N sector.

    Eigenvectors are unit-norm coefficient vectors over the sector basis
    {|g,N>, |e,N-1>, |f,N-2>}, entries for nonexistent states omitted,
    so they have length 1 (N=0), 2 (N=1) or 3 (N>=2).
    """

    n_excitations: int
    eigenvalues: np.ndarray  # ascending
    eigenvectors: list[np.ndarray]


def sector_matrix(params: ModelParams, n: int) -> np.ndarray:
    """3x3 sector Hamiltonian for excitation number n >= 2.

    Basis order (|g,n>, |e,n-1>, |f,n-2>); diagonal
    (n*omega_c, n*omega_c + delta, n*omega_c + 2*delta + anh), couplings
    sqrt(n)*lambda1 and sqrt(n-1)*lambda2.
    """
    if n < 2:
        raise SectorTooSmall(f"sector matrix needs n >= 2, got {n}")
    validate(params)
    w = n * params.omega_c
    a = math.sqrt(n) * params.lambda1
    b = math.sqrt(n - 1) * params.lambda2
    return np.array(
        [
            [w, a, 0.0],
            [a, w + params.delta, b],
            [0.0, b, w + 2.0 * params.delta + params.anh],
        ]
    )


def _n1_closed_form(params: ModelParams) -> tuple[np.ndarray, list[np.ndarray]]:
    # 2x2 sector {|g,1>, |e,0>}: eigenvalues omega_c + delta/2 -+ R
    lam = params.lambda1
    half = 0.5 * params.delta
    r = math.hypot(lam, half)
    e_minus = params.omega_c + half - r
    e_plus = params.omega_c + half + r
    vecs = []
    for root in (half - r, half + r):
        v = np.array([lam, root])
        v /= math.hypot(v[0], v[1])
        k = int(abs(v[1]) > abs(v[0]))  # largest-magnitude component positive
        if v[k] < 0:
            v = -v
        vecs.append(v)
    return np.array([e_minus, e_plus]), vecs


def sector_spectrum(params: ModelParams, n: int) -> SectorSpectrum:
    """Spectrum of sector n, excluding any chemical-potential term."""
    if n < 0:
        raise SectorTooSmall(f"sector index must be >= 0, got {n}")
    validate(params)
    if n == 0:
        # vacuum |g,0> has energy exactly 0 for any parameters
        return SectorSpectrum(0, np.array([0.0]), [np.array([1.0])])
    if n == 1:
        vals, vecs = _n1_closed_form(params)
        return SectorSpectrum(1, vals, vecs)
    dec = eigen.eigh(sector_matrix(params, n))
    return SectorSpectrum(
        n, dec.eigenvalues, [dec.eigenvectors[:, i].copy() for i in range(3)]
    )


@functools.lru_cache(maxsize=65536)
def _lowest_cached(
    omega_c: float, delta: float, anh: float, lambda1: float, lambda2: float, n: int
) -> float:
    p = ModelParams(omega_c=omega_c, delta=delta, anh=anh,
                    lambda1=lambda1, lambda2=lambda2)
    return float(sector_spectrum(p, n).eigenvalues[0])


def lowest_sector_energy(params: ModelParams, n: int) -> float:
    """E_minus(n): smallest eigenvalue of sector n, with E_minus(0) = 0.

    Cached on the parameters that enter the sector problem (mu and J do
    not), which makes grid sweeps over (J, mu) essentially free here.
    """
    return _lowest_cached(
        params.omega_c, params.delta, params.anh,
        params.lambda1, params.lambda2, int(n),
    )


def single_excitation_nonlinearity(params: ModelParams) -> float:
    """Shift of the lowest one-excitation level from the bare photon ladder.

    eta = E_minus(1) - omega_c = delta/2 - sqrt(lambda1^2 + delta^2/4).
    Independent of the anharmonicity because the |f> level does not enter
    the one-excitation sector.
    """
    validate(params)
    half = 0.5 * params.delta
    return half - math.hypot(params.lambda1, half)


_BRANCHES = {1: ("-",), 2: ("-", "+"), 3: ("-", "0", "+")}


class SpectrumRow(NamedTuple):
    anh: float
    n_excitations: int
    branch: str
    eigenvalue: float


def spectrum_vs_anharmonicity(
    params: ModelParams,
    anh_axis: Sequence[float],
    n_max_sector: int,
) -> list[SpectrumRow]:
    """All sector eigenvalues for N <= n_max_sector at each anharmonicity.

    Branch labels -, 0, + are assigned purely by ascending energy order at
    each point; no adiabatic continuation across crossings.
    """
    if len(anh_axis) == 0:
        raise ValueError("anh_axis must be nonempty")
    if n_max_sector < 1:
        raise ValueError(f"n_max_sector must be >= 1, got {n_max_sector}")
    rows = []
    for anh in anh_axis:
        p = params.with_(anh=float(anh))
        for n in range(n_max_sector + 1):
            spec = sector_spectrum(p, n)
            labels = _BRANCHES[len(spec.eigenvalues)]
            for label, val in zip(labels, spec.eigenvalues):
                rows.append(SpectrumRow(float(anh), n, label, float(val)))
    return rows
