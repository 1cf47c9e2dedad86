"""Single-site mean-field problem: build, minimize over psi, densities.

The mean-field Hamiltonian at order parameter psi is, in the truncated
basis |s,n> with index 3n + rank(s),

    H(psi) = H0 - z*J*psi*(a + a^dag) + z*J*psi^2

where H0 contains the on-site energies and qubit-photon couplings minus
mu times the excitation number.  Diagonal entries are evaluated in the
grouped form N*(omega_c - mu) + m_s*delta + anh*[s=f] so that shifting
omega_c and mu by the same constant leaves the matrix unchanged to the
last bit whenever (omega_c - mu) itself is reproduced exactly.

The matrix is banded (bandwidth 3): qubit-photon couplings sit two places
off the diagonal and the hopping term three.  Minimization over psi uses a
coarse scan plus golden-section refinement, optionally polished to machine
precision with a root solve of the self-consistency residual <x> - psi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace as _dc_replace

import numpy as np
from scipy.linalg import eig_banded, eigvals_banded
from scipy.optimize import brentq

from . import eigen
from .model import ModelParams, TruncatedBasis, validate
from .onsite_spectrum import lowest_sector_energy

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = 1.0 - _INVPHI

# dense batched LAPACK beats the banded solver below this dimension
_DENSE_DIM_MAX = 30


class MeanFieldError(RuntimeError):
    pass


class TruncationTooSmall(MeanFieldError):
    pass


class BracketAtBoundary(MeanFieldError):
    """Minimum pinned at psi_max even at the truncation cap."""

    def __init__(self, message: str, solution: "MeanFieldSolution | None" = None):
        super().__init__(message)
        self.solution = solution


class TruncationNotConverged(MeanFieldError):
    """Photon cutoff cap reached without two agreeing levels."""

    def __init__(self, message: str, solution: "MeanFieldSolution | None" = None):
        super().__init__(message)
        self.solution = solution


class DegeneracyWarning(UserWarning):
    """Hellmann-Feynman and finite-difference densities disagree.

    Signals a (near-)degenerate ground state, typically at a lobe boundary
    where the density jumps.
    """


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the psi minimizer and the truncation ladder."""

    coarse_points: int = 64
    psi_max: float | None = None  # None: sqrt(n_max)/2
    golden_tol: float = 1e-9
    polish: bool = True  # root-solve <x> - psi after golden section
    psi_tol: float = 1e-8  # ladder agreement on psi_min
    rho_tol: float = 1e-8  # ladder agreement on rho
    n_max_start: int = 4
    n_max_cap: int = 64
    fd_step: float = 1e-4  # h = fd_step * max(1, |mu|)
    compute_rho_fd: bool = True
    degeneracy_tol: float = 1e-3


@dataclass
class MeanFieldSolution:
    psi_min: float
    energy: float
    ground_vector: np.ndarray
    rho: float
    n_max_used: int
    converged: bool
    psi_bracket: tuple[float, float]
    rho_fd: float | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class MeanFieldMatrixSpec:
    params: ModelParams
    psi: float
    basis: TruncatedBasis

    def __post_init__(self):
        if self.psi < 0:
            raise MeanFieldError(f"psi must be >= 0, got {self.psi}")
        if self.basis.n_max < 2:
            raise TruncationTooSmall(
                f"mean-field matrix needs n_max >= 2, got {self.basis.n_max}"
            )


def _diagonal(params: ModelParams, n_max: int) -> np.ndarray:
    # grouped form: N*(omega_c - mu) + m_s*delta + anh at |f>
    dim = 3 * (n_max + 1)
    idx = np.arange(dim)
    n_exc = idx // 3 + idx % 3  # N = n + m_s
    diag = n_exc * (params.omega_c - params.mu)
    diag += (idx % 3) * params.delta
    diag[idx % 3 == 2] += params.anh
    return diag


def _coupling_band2(params: ModelParams, n_max: int) -> np.ndarray:
    # second superdiagonal: <e,n|H|g,n+1> = lambda1*sqrt(n+1),
    # <f,n|H|e,n+1> = lambda2*sqrt(n+1); zero at |g,n> <-> |f,n>
    dim = 3 * (n_max + 1)
    band = np.zeros(dim - 2)
    for n in range(n_max):
        root = math.sqrt(n + 1.0)
        band[3 * n + 1] = params.lambda1 * root
        band[3 * n + 2] = params.lambda2 * root
    return band

def _hop_band3(n_max: int) -> np.ndarray:
    # third superdiagonal pattern: sqrt(n+1) on every |s,n> <-> |s,n+1>
    dim = 3 * (n_max + 1)
    j = np.arange(3, dim)
    return np.sqrt(j // 3).astype(float)


def build_mf_matrix(spec: MeanFieldMatrixSpec) -> np.ndarray:
    """Dense symmetric mean-field matrix for the given psi."""
    p = validate(spec.params)
    n_max = spec.basis.n_max
    dim = spec.basis.dim
    zj = p.z * p.j_hop
    a = np.zeros((dim, dim))
    diag = _diagonal(p, n_max) + zj * spec.psi * spec.psi
    a[np.arange(dim), np.arange(dim)] = diag
    band2 = _coupling_band2(p, n_max)
    for i, v in enumerate(band2):
        if v != 0.0:
            a[i, i + 2] = v
            a[i + 2, i] = v
    hop = -zj * spec.psi * _hop_band3(n_max)
    for i, v in enumerate(hop):
        if v != 0.0:
            a[i, i + 3] = v
            a[i + 3, i] = v
    return a


def mf_matrix(params: ModelParams, psi: float, n_max: int) -> np.ndarray:
    return build_mf_matrix(MeanFieldMatrixSpec(params, psi, TruncatedBasis(n_max)))


def ground_energy(params: ModelParams, psi: float, n_max: int) -> float:
    """Smallest eigenvalue of the mean-field matrix."""
    return float(eigen.eigvalsh(mf_matrix(params, psi, n_max))[0])


def number_expectation(vector: np.ndarray) -> float:
    """<N> = <a^dag a + |e><e| + 2|f><f|> for a basis-ordered vector."""
    idx = np.arange(vector.shape[0])
    n_exc = idx // 3 + idx % 3
    return float(np.dot(vector * vector, n_exc))


def expectation_x(vector: np.ndarray) -> float:
    """<(a + a^dag)/2> for a basis-ordered real vector."""
    dim = vector.shape[0]
    hop = _hop_band3((dim - 3) // 3)  # sqrt(n+1) factors, len dim-3
    return float(np.dot(vector[:-3] * vector[3:], hop))


class _Engine:
    """Banded/dense evaluators of E(psi) for one (params, n_max).

    E(psi) = lambda_min(H0 + psi*C) + z*J*psi^2 with C the hopping pattern.
    Dense batched LAPACK is used for small dimensions, the banded solver
    above; both agree with the public dense route to eigensolver accuracy.
    """

    def __init__(self, params: ModelParams, n_max: int):
        if n_max < 2:
            raise TruncationTooSmall(f"n_max must be >= 2, got {n_max}")
        self.params = validate(params)
        self.n_max = n_max
        self.dim = 3 * (n_max + 1)
        self.zj = params.z * params.j_hop
        diag = _diagonal(params, n_max)
        band2 = _coupling_band2(params, n_max)
        hop = _hop_band3(n_max)
        # upper-band storage for scipy: row u+i-j holds A[i,j], u = 3
        self._h0_band = np.zeros((4, self.dim))
        self._h0_band[3] = diag
        self._h0_band[1, 2:] = band2
        self._c_band = np.zeros((4, self.dim))
        self._c_band[0, 3:] = -self.zj * hop
        self._use_dense = self.dim <= _DENSE_DIM_MAX
        if self._use_dense:
            self._h0 = np.diag(diag)
            i = np.arange(self.dim - 2)
            self._h0[i, i + 2] = band2
            self._h0[i + 2, i] = band2
            self._c = np.zeros((self.dim, self.dim))
            i = np.arange(self.dim - 3)
            self._c[i, i + 3] = -self.zj * hop
            self._c[i + 3, i] = -self.zj * hop

    def values(self, psis: np.ndarray) -> np.ndarray:
        """E(psi) for an array of psi values."""
        psis = np.asarray(psis, dtype=float)
        shift = self.zj * psis * psis
        if self._use_dense:
            stack = self._h0[None, :, :] + psis[:, None, None] * self._c[None, :, :]
            return np.linalg.eigvalsh(stack)[:, 0] + shift
        out = np.empty(psis.shape[0])
        for k, psi in enumerate(psis):
            band = self._h0_band + psi * self._c_band
            out[k] = eigvals_banded(
                band, lower=False, select="i", select_range=(0, 0),
                check_finite=False,
            )[0]
        return out + shift

    def value(self, psi: float) -> float:
        if self._use_dense:
            low = np.linalg.eigvalsh(self._h0 + psi * self._c)[0]
        else:
            band = self._h0_band + psi * self._c_band
            low = eigvals_banded(
                band, lower=False, select="i", select_range=(0, 0),
                check_finite=False,
            )[0]
        return float(low) + self.zj * psi * psi

    def pair(self, psi: float) -> tuple[float, np.ndarray]:
        """(E(psi), ground vector)."""
        band = self._h0_band + psi * self._c_band
        vals, vecs = eig_banded(
            band, lower=False, select="i", select_range=(0, 0), check_finite=False
        )
        return float(vals[0]) + self.zj * psi * psi, vecs[:, 0]

    def gap(self, psi: float) -> float:
        """Spacing between the two lowest eigenvalues at psi."""
        band = self._h0_band + psi * self._c_band
        vals = eigvals_banded(
            band, lower=False, select="i", select_range=(0, 1), check_finite=False
        )
        return float(vals[1] - vals[0])


def _golden(f, a: float, b: float, tol: float):
    """Golden-section minimum of f on [a, b]; returns (x, fx, (a, b))."""
    h = b - a
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc = f(c)
    fd = f(d)
    while h > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = f(d)
    if fc < fd:
        return c, fc, (a, b)
    return d, fd, (a, b)


def _polish_psi(engine: _Engine, psi: float, psi_max: float, tol: float) -> float:
    """Sharpen an interior minimum by solving <x>(psi) - psi = 0.

    The stationarity condition of E(psi) is exactly psi = <x>; a bracketed
    root solve reaches machine precision where golden section stops at
    golden_tol.  Returns the input psi unchanged when no bracket is found
    or the ground state is close to degenerate.
    """
    scale = max(1.0, abs(engine.value(psi)))
    if engine.gap(psi) < 1e-9 * scale:
        return psi

    def resid(x: float) -> float:
        _, v = engine.pair(x)
        return expectation_x(v) - x

    f0 = resid(psi)
    if f0 == 0.0:
        return psi
    w = max(64.0 * tol, 4.0 * abs(f0))
    for _ in range(6):
        lo = max(psi - w, 1e-12)
        hi = min(psi + w, psi_max)
        flo = resid(lo)
        fhi = resid(hi)
        if flo > 0.0 > fhi:
            return float(brentq(resid, lo, hi, xtol=1e-14, rtol=8.9e-16))
        w *= 8.0
        if lo == 1e-12 and hi == psi_max:
            break
    return psi


def _finish(
    engine: _Engine,
    psi: float,
    bracket: tuple[float, float],
    converged: bool,
) -> MeanFieldSolution:
    energy, vector = engine.pair(psi)
    k = int(np.argmax(np.abs(vector)))
    if vector[k] < 0:
        vector = -vector
    rho = number_expectation(vector)
    return MeanFieldSolution(
        psi_min=psi,
        energy=energy,
        ground_vector=vector,
        rho=rho,
        n_max_used=engine.n_max,
        converged=converged,
        psi_bracket=bracket,
    )


def _fd_energy(engine: _Engine, psi_hint: float, psi_max: float, cell: float) -> float:
    """Locally re-minimized E(psi) used for the finite-difference density."""
    if psi_hint <= 0.0:
        return engine.value(0.0)
    lo = max(0.0, psi_hint - 2.0 * cell)
    hi = min(psi_max, psi_hint + 2.0 * cell)
    _, e_min, _ = _golden(engine.value, lo, hi, 1e-10)
    # competing Mott basin
    return min(e_min, engine.value(0.0))


def _attach_rho_fd(
    params: ModelParams, n_max: int, search: SearchConfig, sol: MeanFieldSolution
) -> None:
    h = search.fd_step * max(1.0, abs(params.mu))
    psi_max = search.psi_max if search.psi_max is not None else math.sqrt(n_max) / 2.0
    cell = psi_max / max(search.coarse_points - 1, 1)
    e_plus = _fd_energy(_Engine(params.with_(mu=params.mu + h), n_max),
                        sol.psi_min, psi_max, cell)
    e_minus = _fd_energy(_Engine(params.with_(mu=params.mu - h), n_max),
                         sol.psi_min, psi_max, cell)
    sol.rho_fd = -(e_plus - e_minus) / (2.0 * h)
    if abs(sol.rho - sol.rho_fd) > search.degeneracy_tol:
        sol.degenerate = True
        warnings.warn(
            f"density mismatch at mu={params.mu:g}, J={params.j_hop:g}: "
            f"<N>={sol.rho:.6g} vs finite difference {sol.rho_fd:.6g}",
            DegeneracyWarning,
            stacklevel=3,
        )


def minimize_psi(
    params: ModelParams,
    n_max: int,
    search: SearchConfig = SearchConfig(),
) -> MeanFieldSolution:
    """Minimize the mean-field ground energy over psi in [0, psi_max].

    Coarse scan (search.coarse_points) plus golden-section refinement to
    width search.golden_tol, then an optional self-consistency polish.
    converged=False marks a minimum pinned at psi_max: the bracket is too
    small, typically because the occupation runs away at this (J, mu).
    """
    validate(params)
    if n_max < 2:
        raise TruncationTooSmall(f"minimize_psi needs n_max >= 2, got {n_max}")
    engine = _Engine(params, n_max)
    psi_max = search.psi_max if search.psi_max is not None else math.sqrt(n_max) / 2.0

    if params.j_hop == 0.0:
        # E is psi-independent; tie resolves to the Mott value
        sol = _finish(engine, 0.0, (0.0, 0.0), True)
    else:
        psis = np.linspace(0.0, psi_max, search.coarse_points)
        energies = engine.values(psis)
        k = int(np.argmin(energies))
        tol = search.golden_tol
        if k == 0:
            # explore the first cell: a shallow superfluid dip can hide there
            psi, e_psi, bracket = _golden(engine.value, 0.0, psis[1], tol)
            e0 = energies[0]
            if e_psi < e0 - 1e-13 * max(1.0, abs(e0)):
                if search.polish:
                    psi = _polish_psi(engine, psi, psi_max, tol)
                sol = _finish(engine, psi, bracket, True)
            else:
                sol = _finish(engine, 0.0, (0.0, float(psis[1])), True)
        else:
            lo = float(psis[k - 1])
            hi = float(psis[k + 1]) if k + 1 < len(psis) else psi_max
            pinned = False
            if k == len(psis) - 1:
                # cheap pass first: a minimum pinned at psi_max is common in
                # the runaway region and needs no fine refinement
                cheap_tol = max((hi - lo) / 256.0, tol)
                psi, _, bracket = _golden(engine.value, lo, hi, cheap_tol)
                pinned = psi_max - psi <= 4.0 * cheap_tol
                if not pinned and cheap_tol > tol:
                    psi, _, bracket = _golden(engine.value, *bracket, tol)
                    pinned = psi_max - psi <= 4.0 * tol
            else:
                psi, _, bracket = _golden(engine.value, lo, hi, tol)
            if pinned:
                sol = _finish(engine, psi_max, (lo, psi_max), False)
            else:
                if search.polish:
                    psi = _polish_psi(engine, psi, psi_max, tol)
                sol = _finish(engine, psi, bracket, True)

    if search.compute_rho_fd:
        _attach_rho_fd(params, n_max, search, sol)
    return sol


def _blocked_occupation_argmin(params: ModelParams, n_top: int) -> int:
    """argmin over N <= n_top of the zero-hopping grand energy E_-(N) - mu*N."""
    best_n = 0
    best = 0.0
    for n in range(n_top + 1):
        e = lowest_sector_energy(params, n) - params.mu * n
        if e < best:
            best = e
            best_n = n
    return best_n


def converge_truncation(
    params: ModelParams,
    n_max_start: int | None = None,
    search: SearchConfig = SearchConfig(),
) -> MeanFieldSolution:
    """Raise the photon cutoff until psi_min and rho both stabilize.

    Runs minimize_psi at n, 2n, ... until successive levels agree within
    search.psi_tol / search.rho_tol, capped at search.n_max_cap.  Raises
    TruncationNotConverged when the cap cannot represent the ground state
    (for example mu >= omega_c, where the occupation is unbounded) and
    BracketAtBoundary when the minimum stays pinned at psi_max even at the
    cap.  Both exceptions carry the last solution in .solution.
    """
    validate(params)
    start = search.n_max_start if n_max_start is None else n_max_start
    if start < 2:
        raise TruncationTooSmall(f"n_max_start must be >= 2, got {start}")
    cap = search.n_max_cap
    if start > cap:
        raise MeanFieldError(f"n_max_start {start} exceeds n_max_cap {cap}")
    # the finite-difference density is only worth computing once, on the
    # solution that is actually returned
    ladder_search = (
        search if not search.compute_rho_fd
        else _dc_replace(search, compute_rho_fd=False)
    )

    # cheap exactness check at J=0: if the best occupation at the cap sits at
    # the truncation edge, no ladder level can converge; fail fast
    if _blocked_occupation_argmin(params, cap + 2) >= cap + 1:
        sol = minimize_psi(params, start, ladder_search)
        sol.converged = False
        raise TruncationNotConverged(
            f"occupation at mu={params.mu:g} exceeds the truncation cap {cap}",
            solution=sol,
        )

    prev: MeanFieldSolution | None = None
    sol: MeanFieldSolution | None = None
    n = start
    while n <= cap:
        sol = minimize_psi(params, n, ladder_search)
        if prev is not None and prev.converged and sol.converged:
            if (
                abs(sol.psi_min - prev.psi_min) <= search.psi_tol
                and abs(sol.rho - prev.rho) <= search.rho_tol
            ):
                if search.compute_rho_fd:
                    _attach_rho_fd(params, sol.n_max_used, search, sol)
                return sol
        prev = sol
        n *= 2

    assert sol is not None
    if not sol.converged:
        raise BracketAtBoundary(
            f"psi minimum pinned at the bracket edge up to n_max={sol.n_max_used}; "
            f"the mean-field problem runs away at J={params.j_hop:g}, "
            f"mu={params.mu:g}",
            solution=sol,
        )
    raise TruncationNotConverged(
        f"no two successive cutoffs agreed below the cap {cap} "
        f"at J={params.j_hop:g}, mu={params.mu:g}",
        solution=sol,
    )


def density(
    params: ModelParams,
    solution: MeanFieldSolution,
    search: SearchConfig = SearchConfig(),
) -> tuple[float, float]:
    """(Hellmann-Feynman rho, finite-difference rho_fd) for a solution.

    The first is <N> in the ground vector, valid because psi_min is a
    stationary point; the second re-minimizes E at mu +- h.  A mismatch
    beyond search.degeneracy_tol raises DegeneracyWarning and marks the
    solution degenerate.
    """
    if solution.rho_fd is None:
        _attach_rho_fd(params, solution.n_max_used, search, solution)
    return solution.rho, float(solution.rho_fd)
