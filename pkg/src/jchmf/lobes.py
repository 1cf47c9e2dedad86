"""Mott-lobe boundaries in the weak-hopping limit and their crossings.

As J -> 0 the ground state at chemical potential mu holds the integer
occupation N that minimizes E_-(N) - mu*N, so the N -> N+1 boundary sits
at mu = E_-(N+1) - E_-(N).  Boundaries can cross as the anharmonicity is
varied; where the nominal width of a lobe is not positive the lobe is
"covered" (never the ground state at any mu).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import ModelParams, validate
from .onsite_spectrum import lowest_sector_energy


@dataclass(frozen=True)
class LobeBoundary:
    n_from: int
    n_to: int
    mu_boundary: float  # reported as (mu - omega_c)
    anh: float


@dataclass(frozen=True)
class LobeCrossing:
    lobe: int  # the lobe whose width changes sign
    anh: float
    mu: float  # boundary value at the crossing, as (mu - omega_c)


@dataclass(frozen=True)
class LobeDiagram:
    anh_axis: tuple[float, ...]
    # boundaries[i][n] is the n -> n+1 boundary at anh_axis[i]
    boundaries: list[list[LobeBoundary]]
    crossings: list[LobeCrossing]
    # covered[i] lists lobe indices with nonpositive width at anh_axis[i]
    covered: list[list[int]]


def lobe_boundary(params: ModelParams, n: int) -> float:
    """Chemical potential of the n -> n+1 occupation change at J=0."""
    validate(params)
    if n < 0:
        raise ValueError(f"lobe index must be >= 0, got {n}")
    if n == 0:
        return lowest_sector_energy(params, 1)
    return lowest_sector_energy(params, n + 1) - lowest_sector_energy(params, n)


def _width(params: ModelParams, lobe: int, anh: float) -> float:
    p = params.with_(anh=float(anh))
    return lobe_boundary(p, lobe) - lobe_boundary(p, lobe - 1)


def _bisect_crossing(
    params: ModelParams, lobe: int, lo: float, hi: float, w_lo: float, tol: float
) -> float:
    # sign change of the width function bracketed in [lo, hi]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        w_mid = _width(params, lobe, mid)
        if w_mid == 0.0:
            return mid
        if (w_mid > 0.0) == (w_lo > 0.0):
            lo, w_lo = mid, w_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def lobe_diagram(
    params: ModelParams,
    anh_axis: Sequence[float],
    n_max_lobe: int = 4,
) -> LobeDiagram:
    """Boundaries for n = 0..n_max_lobe over the anharmonicity axis.

    Crossings are located by a sign change of the lobe-width function
    between adjacent axis samples and refined by bisection to 1e-10.
    """
    validate(params)
    axis = tuple(float(a) for a in anh_axis)
    if not axis:
        raise ValueError("anh_axis must be nonempty")
    if n_max_lobe < 1:
        raise ValueError(f"n_max_lobe must be >= 1, got {n_max_lobe}")

    boundaries: list[list[LobeBoundary]] = []
    covered: list[list[int]] = []
    widths = {lobe: [] for lobe in range(1, n_max_lobe + 1)}
    for anh in axis:
        p = params.with_(anh=anh)
        row = [
            LobeBoundary(n, n + 1, lobe_boundary(p, n) - p.omega_c, anh)
            for n in range(n_max_lobe + 1)
        ]
        boundaries.append(row)
        hidden = []
        for lobe in range(1, n_max_lobe + 1):
            w = row[lobe].mu_boundary - row[lobe - 1].mu_boundary
            widths[lobe].append(w)
            if w <= 0.0:
                hidden.append(lobe)
        covered.append(hidden)

    crossings: list[LobeCrossing] = []
    for lobe in range(1, n_max_lobe + 1):
        ws = widths[lobe]
        for i in range(len(axis) - 1):
            w0, w1 = ws[i], ws[i + 1]
            if w0 == 0.0:
                anh_star = axis[i]
            elif w0 * w1 < 0.0:
                anh_star = _bisect_crossing(
                    params, lobe, axis[i], axis[i + 1], w0, 1e-10
                )
            else:
                continue
            p_star = params.with_(anh=anh_star)
            mu_star = lobe_boundary(p_star, lobe - 1) - p_star.omega_c
            crossings.append(LobeCrossing(lobe, anh_star, mu_star))
        # an exact zero at the last sample is a crossing too
        if ws and ws[-1] == 0.0 and (len(ws) < 2 or ws[-2] != 0.0):
            p_star = params.with_(anh=axis[-1])
            crossings.append(
                LobeCrossing(
                    lobe, axis[-1], lobe_boundary(p_star, lobe - 1) - p_star.omega_c
                )
            )
    return LobeDiagram(axis, boundaries, crossings, covered)
