"""Mean-field matrix construction, psi minimization and densities."""

import math

import numpy as np
import pytest

from jchmf import eigen
from jchmf.meanfield import (
    BracketAtBoundary,
    DegeneracyWarning,
    MeanFieldError,
    MeanFieldMatrixSpec,
    SearchConfig,
    TruncationNotConverged,
    TruncationTooSmall,
    build_mf_matrix,
    converge_truncation,
    density,
    expectation_x,
    ground_energy,
    mf_matrix,
    minimize_psi,
    number_expectation,
)
from jchmf.model import ModelParams, TruncatedBasis
from jchmf.onsite_spectrum import lowest_sector_energy, sector_spectrum

NO_FD = SearchConfig(compute_rho_fd=False)

# Mott-1/Mott-2 step of the anh=1 lobe diagram (from the cubic oracle)
B1_ANH1 = -0.813606502648331


# ---------------------------------------------------------------- matrix


def test_matrix_diagonal_grouped_form():
    p = ModelParams(omega_c=0.25, delta=0.5, anh=1.5, mu=-0.75, j_hop=0.1)
    m = mf_matrix(p, 0.0, 3)
    basis = TruncatedBasis(3)
    for i in range(basis.dim):
        s = basis.state(i)
        n_exc = s.photons + int(s.level)
        want = n_exc * (p.omega_c - p.mu) + int(s.level) * p.delta
        if int(s.level) == 2:
            want += p.anh
        assert m[i, i] == want


def test_matrix_band_structure():
    p = ModelParams(z=3, j_hop=0.1, mu=-1.0)
    psi = 0.5
    m = mf_matrix(p, psi, 4)
    dim = m.shape[0]
    assert np.array_equal(m, m.T)
    # first superdiagonal vanishes identically
    assert np.all(np.diag(m, 1) == 0.0)
    # couplings on the second superdiagonal
    d2 = np.diag(m, 2)
    for n in range(4):
        root = math.sqrt(n + 1.0)
        assert d2[3 * n] == 0.0  # no g <-> f matrix element
        assert d2[3 * n + 1] == p.lambda1 * root
        assert d2[3 * n + 2] == p.lambda2 * root
    # hopping on the third superdiagonal: -z*J*psi*sqrt(n+1) for every level
    d3 = np.diag(m, 3)
    for i in range(dim - 3):
        assert d3[i] == -p.z * p.j_hop * psi * math.sqrt(i // 3 + 1.0)
    # everything further out is zero
    for k in range(4, dim):
        assert np.all(np.diag(m, k) == 0.0)


def test_matrix_psi_square_shift():
    p = ModelParams(z=3, j_hop=0.1)
    base = mf_matrix(p, 0.0, 3)
    m = mf_matrix(p, 0.5, 3)
    zj_psi2 = 3 * 0.1 * 0.25
    off = m - np.diag(np.diag(m))
    base_off = base - np.diag(np.diag(base))
    assert np.max(np.abs(np.diag(m) - np.diag(base) - zj_psi2)) == 0.0
    # off-diagonal change is only the hopping band
    hop = off - base_off
    assert np.all(np.diag(hop, 2) == 0.0)
    assert np.any(np.diag(hop, 3) != 0.0)


def test_matrix_zero_psi_independent_of_hopping():
    a = mf_matrix(ModelParams(mu=-1.0), 0.0, 5)
    b = mf_matrix(ModelParams(mu=-1.0, j_hop=0.17), 0.0, 5)
    assert np.array_equal(a, b)


def test_matrix_shift_invariance_bitwise_for_exact_shift():
    # dyadic shift reproduces (omega_c - mu) exactly, so matrices match bit
    # for bit and the whole downstream pipeline is unchanged
    a = mf_matrix(ModelParams(mu=-1.25, anh=0.5, j_hop=0.07), 0.3, 6)
    b = mf_matrix(
        ModelParams(omega_c=0.5, mu=-0.75, anh=0.5, j_hop=0.07), 0.3, 6
    )
    assert np.array_equal(a, b)


def test_matrix_excitation_parity_conjugation():
    # the couplings conserve the excitation number while hopping changes it
    # by one, so conjugating by (-1)^N flips exactly the hopping band: E(psi)
    # equals E(-psi) and the restriction to psi >= 0 loses nothing
    p = ModelParams(j_hop=0.12, mu=-0.8)
    m = mf_matrix(p, 0.4, 4)
    dim = m.shape[0]
    par = np.diag([(-1.0) ** (i // 3 + i % 3) for i in range(dim)])
    flipped = par @ m @ par
    neg = m.copy()
    i = np.arange(dim - 3)
    neg[i, i + 3] *= -1.0
    neg[i + 3, i] *= -1.0
    assert np.array_equal(flipped, neg)
    assert np.max(np.abs(eigen.eigvalsh(flipped) - eigen.eigvalsh(m))) < 1e-12


def test_matrix_rejects_bad_inputs():
    with pytest.raises(TruncationTooSmall):
        mf_matrix(ModelParams(), 0.0, 1)
    with pytest.raises(MeanFieldError):
        MeanFieldMatrixSpec(ModelParams(), -0.1, TruncatedBasis(4))


def test_build_matches_helper():
    spec = MeanFieldMatrixSpec(ModelParams(j_hop=0.1), 0.2, TruncatedBasis(4))
    assert np.array_equal(build_mf_matrix(spec), mf_matrix(ModelParams(j_hop=0.1), 0.2, 4))


# ------------------------------------------------------------ expectations


def test_number_expectation_basis_states():
    basis = TruncatedBasis(3)
    for i in range(basis.dim):
        v = np.zeros(basis.dim)
        v[i] = 1.0
        s = basis.state(i)
        assert number_expectation(v) == s.photons + int(s.level)


def test_number_expectation_sector_eigenvector_is_integer():
    # a pure sector-N eigenvector embedded in the big basis has <N> = N
    p = ModelParams(delta=0.3, anh=0.9)
    spec = sector_spectrum(p, 2)
    basis = TruncatedBasis(5)
    v = np.zeros(basis.dim)
    v[6] = spec.eigenvectors[0][0]  # |g,2>
    v[4] = spec.eigenvectors[0][1]  # |e,1>
    v[2] = spec.eigenvectors[0][2]  # |f,0>
    assert abs(number_expectation(v) - 2.0) < 1e-15


def test_expectation_x_photon_superposition():
    # (|g,0> + |g,1>)/sqrt(2) has <(a + a^dag)/2> = 1/2
    basis = TruncatedBasis(2)
    v = np.zeros(basis.dim)
    v[0] = v[3] = 1.0 / math.sqrt(2.0)
    assert abs(expectation_x(v) - 0.5) < 1e-15
    # a single basis state carries no coherence
    w = np.zeros(basis.dim)
    w[3] = 1.0
    assert expectation_x(w) == 0.0


# ------------------------------------------------------------- energies


def test_ground_energy_zero_hopping_matches_sector_minimum():
    p = ModelParams(anh=1.0, mu=-0.8)
    want = min(
        lowest_sector_energy(p, n) - p.mu * n for n in range(0, 11)
    )
    got = ground_energy(p, 0.7, 8)  # psi irrelevant at J=0
    assert abs(got - want) < 1e-12


def test_ground_energy_vacuum_regime():
    p = ModelParams(anh=1.0, mu=-2.0, j_hop=0.0)
    assert abs(ground_energy(p, 0.0, 6)) < 1e-12


def test_ground_energy_variational_in_n_max():
    p = ModelParams(anh=0.5, mu=-1.2, j_hop=0.12)
    prev = None
    for n_max in range(2, 11):
        e = ground_energy(p, 0.37, n_max)
        if prev is not None:
            assert e <= prev + 1e-12
        prev = e


# ------------------------------------------------------------- minimizer


def test_minimize_zero_hopping_shortcut():
    sol = minimize_psi(ModelParams(anh=1.0, mu=-0.9), 8, NO_FD)
    assert sol.psi_min == 0.0
    assert sol.psi_bracket == (0.0, 0.0)
    assert sol.converged
    assert abs(sol.rho - 1.0) < 1e-12


def test_minimize_deep_mott_snaps_to_zero():
    sol = minimize_psi(ModelParams(anh=1.0, mu=-0.9, j_hop=1e-3), 8, NO_FD)
    assert sol.psi_min == 0.0
    assert abs(sol.rho - 1.0) < 1e-12
    assert sol.converged


def test_minimize_vacuum_region():
    sol = minimize_psi(ModelParams(anh=1.0, mu=-1.5, j_hop=1e-3), 8, NO_FD)
    assert sol.psi_min == 0.0
    assert sol.rho == 0.0
    assert abs(sol.energy) < 1e-12


def test_minimize_superfluid_point():
    p = ModelParams(anh=1.0, mu=-1.5, j_hop=0.35)
    sol = minimize_psi(p, 12, NO_FD)
    assert sol.converged
    assert sol.psi_min > 0.5
    # stationarity: psi equals the coherence of its own ground state
    assert abs(expectation_x(sol.ground_vector) - sol.psi_min) < 1e-6
    # energy agrees with the dense public route at the same psi
    assert abs(sol.energy - ground_energy(p, sol.psi_min, 12)) < 1e-12
    assert sol.energy < ground_energy(p, 0.0, 12) - 1e-6
    nv = float(np.dot(sol.ground_vector, sol.ground_vector))
    assert abs(nv - 1.0) < 1e-12


def test_minimize_respects_psi_max_and_flags_pin():
    p = ModelParams(anh=1.0, mu=-1.5, j_hop=0.35)
    sol = minimize_psi(p, 12, SearchConfig(psi_max=0.1, compute_rho_fd=False))
    assert not sol.converged
    assert sol.psi_min == 0.1


def test_minimize_shift_invariance_dyadic_exact():
    a = minimize_psi(ModelParams(anh=1.0, mu=-1.5, j_hop=0.35), 10, NO_FD)
    b = minimize_psi(
        ModelParams(omega_c=0.5, anh=1.0, mu=-1.0, j_hop=0.35), 10, NO_FD
    )
    assert a.psi_min == b.psi_min
    assert a.energy == b.energy
    assert a.rho == b.rho


def test_minimize_deterministic():
    p = ModelParams(anh=1.0, mu=-1.1, j_hop=0.2)
    a = minimize_psi(p, 10, NO_FD)
    b = minimize_psi(p, 10, NO_FD)
    assert a.psi_min == b.psi_min
    assert a.energy == b.energy
    assert np.array_equal(a.ground_vector, b.ground_vector)


def test_minimize_rejects_small_truncation():
    with pytest.raises(TruncationTooSmall):
        minimize_psi(ModelParams(), 1, NO_FD)


# -------------------------------------------------------------- densities


def test_densities_agree_at_stable_superfluid_point():
    p = ModelParams(anh=1.0, mu=-1.5, j_hop=0.35)
    sol = minimize_psi(p, 12)
    assert sol.rho_fd is not None
    assert abs(sol.rho - sol.rho_fd) < 1e-5
    assert not sol.degenerate


def test_density_step_triggers_degeneracy_warning():
    # widen the finite-difference stencil until it straddles the
    # Mott-1/Mott-2 density step; the two density routes must then disagree
    # and say so
    p = ModelParams(anh=1.0, mu=B1_ANH1 - 0.004, j_hop=1e-3)
    with pytest.warns(DegeneracyWarning):
        sol = minimize_psi(p, 8, SearchConfig(fd_step=1e-2))
    assert sol.degenerate
    assert abs(sol.rho - 1.0) < 1e-9
    assert abs(sol.rho_fd - sol.rho) > 1e-3


def test_density_fills_missing_fd_value():
    p = ModelParams(anh=1.0, mu=-0.9, j_hop=1e-3)
    sol = minimize_psi(p, 8, NO_FD)
    assert sol.rho_fd is None
    rho, rho_fd = density(p, sol)
    assert rho == sol.rho
    assert sol.rho_fd == rho_fd
    assert abs(rho - rho_fd) < 1e-5


# ------------------------------------------------------------- truncation


def test_converge_truncation_mott():
    sol = converge_truncation(ModelParams(anh=1.0, mu=-0.9, j_hop=1e-3))
    assert sol.converged
    assert sol.psi_min == 0.0
    assert abs(sol.rho - 1.0) < 1e-12
    assert sol.n_max_used == 8
    assert sol.rho_fd is not None


def test_converge_truncation_agrees_with_doubled_basis():
    p = ModelParams(anh=1.0, mu=-0.9, j_hop=1e-3)
    sol = converge_truncation(p, search=NO_FD)
    again = minimize_psi(p, 2 * sol.n_max_used, NO_FD)
    assert abs(sol.psi_min - again.psi_min) <= 1e-8
    assert abs(sol.rho - again.rho) <= 1e-8


def test_converge_truncation_custom_start():
    sol = converge_truncation(
        ModelParams(anh=1.0, mu=-0.9, j_hop=1e-3), n_max_start=6, search=NO_FD
    )
    assert sol.n_max_used == 12


def test_converge_truncation_runaway_raises_bracket_error():
    with pytest.raises(BracketAtBoundary) as exc:
        converge_truncation(
            ModelParams(mu=-1.5, j_hop=2.0),
            search=SearchConfig(n_max_cap=16, compute_rho_fd=False),
        )
    sol = exc.value.solution
    assert sol is not None
    assert not sol.converged
    assert sol.n_max_used == 16


def test_converge_truncation_unbounded_occupation_fails_fast():
    # mu above the cavity frequency: occupation grows without bound, no cap
    # can converge and the precheck catches it before any ladder work
    with pytest.raises(TruncationNotConverged) as exc:
        converge_truncation(
            ModelParams(mu=0.2, j_hop=0.05), search=NO_FD
        )
    sol = exc.value.solution
    assert sol is not None
    assert not sol.converged
    assert sol.n_max_used == SearchConfig().n_max_start


def test_converge_truncation_input_validation():
    with pytest.raises(TruncationTooSmall):
        converge_truncation(ModelParams(), n_max_start=1, search=NO_FD)
    with pytest.raises(MeanFieldError):
        converge_truncation(
            ModelParams(), n_max_start=32,
            search=SearchConfig(n_max_cap=16, compute_rho_fd=False),
        )
