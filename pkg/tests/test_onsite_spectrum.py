"""Zero-hopping sector spectra against independent oracles and closed forms."""

import math

import numpy as np
import pytest

from jchmf import eigen
from jchmf.model import ModelParams
from jchmf.onsite_spectrum import (
    SectorTooSmall,
    lowest_sector_energy,
    sector_matrix,
    sector_spectrum,
    single_excitation_nonlinearity,
    spectrum_vs_anharmonicity,
)

from oracles import cubic_char_roots

SQRT2 = math.sqrt(2.0)


def test_sector_matrix_resonant_n2():
    m = sector_matrix(ModelParams(), 2)
    expect = np.array(
        [[0.0, SQRT2, 0.0], [SQRT2, 0.0, SQRT2], [0.0, SQRT2, 0.0]]
    )
    assert np.array_equal(m, expect)


def test_sector_matrix_offsets():
    p = ModelParams(omega_c=1.0, delta=2.0, anh=1.0)
    m = sector_matrix(p, 3)
    assert np.array_equal(np.diag(m), [3.0, 5.0, 8.0])
    assert m[0, 1] == math.sqrt(3.0)
    assert m[1, 2] == math.sqrt(2.0) * SQRT2
    assert m[0, 2] == 0.0
    assert np.array_equal(m, m.T)


def test_sector_matrix_shifts_by_n_omega():
    base = sector_matrix(ModelParams(anh=0.7), 2)
    shifted = sector_matrix(ModelParams(omega_c=0.5, anh=0.7), 2)
    assert np.array_equal(shifted, base + 2 * 0.5 * np.eye(3))


@pytest.mark.parametrize("n", [-1, 0, 1])
def test_sector_matrix_rejects_small_n(n):
    with pytest.raises(SectorTooSmall):
        sector_matrix(ModelParams(), n)


def test_sector_spectrum_rejects_negative_n():
    with pytest.raises(SectorTooSmall):
        sector_spectrum(ModelParams(), -1)


def test_vacuum_sector_energy_is_zero():
    s = sector_spectrum(ModelParams(omega_c=3.0, delta=-1.0, anh=2.0), 0)
    assert s.eigenvalues[0] == 0.0
    assert len(s.eigenvectors) == 1
    assert s.eigenvectors[0][0] == 1.0


def test_n1_resonant_split():
    s = sector_spectrum(ModelParams(), 1)
    assert np.max(np.abs(s.eigenvalues - np.array([-1.0, 1.0]))) < 1e-15
    # resonant eigenvectors are (1, -+1)/sqrt(2)
    lo, hi = s.eigenvectors
    assert np.allclose(np.abs(lo), [1 / SQRT2, 1 / SQRT2], atol=1e-15)
    assert lo[0] * lo[1] < 0 or lo[1] == 0
    assert hi[0] > 0 and hi[1] > 0


def test_n1_closed_form_matches_two_by_two_solver():
    # 101-point detuning scan, closed form vs explicit 2x2 diagonalization
    for d in np.linspace(-3.0, 3.0, 101):
        p = ModelParams(delta=float(d), omega_c=0.25)
        s = sector_spectrum(p, 1)
        m = np.array([[p.omega_c, p.lambda1], [p.lambda1, p.omega_c + p.delta]])
        ref = eigen.eigh(m)
        assert np.max(np.abs(s.eigenvalues - ref.eigenvalues)) < 1e-12
        for k in range(2):
            assert (
                min(
                    np.max(np.abs(s.eigenvectors[k] - ref.eigenvectors[:, k])),
                    np.max(np.abs(s.eigenvectors[k] + ref.eigenvectors[:, k])),
                )
                < 1e-12
            )


def test_n1_sector_ignores_anharmonicity_bitwise():
    base = sector_spectrum(ModelParams(delta=0.7), 1)
    for anh in (-2.0, -0.3, 1.0, 5.0):
        s = sector_spectrum(ModelParams(delta=0.7, anh=anh), 1)
        assert np.array_equal(s.eigenvalues, base.eigenvalues)


def test_n2_resonant_harmonic_point():
    # delta = anh = 0: roots are exactly {-2, 0, 2}
    s = sector_spectrum(ModelParams(), 2)
    assert np.max(np.abs(s.eigenvalues - np.array([-2.0, 0.0, 2.0]))) < 1e-14


def test_harmonic_collapse_of_level_spacing():
    # at delta = anh = 0 the two-excitation ground level is twice the
    # one-excitation one, so consecutive occupation steps cost the same
    e1 = lowest_sector_energy(ModelParams(), 1)
    e2 = lowest_sector_energy(ModelParams(), 2)
    assert abs(e2 - 2.0 * e1) < 1e-12


def test_sector_eigenvalues_match_cubic_oracle():
    rng = np.random.default_rng(42)
    for _ in range(200):
        d, a = rng.uniform(-3.0, 3.0, size=2)
        n = int(rng.integers(2, 7))
        p = ModelParams(delta=float(d), anh=float(a))
        s = sector_spectrum(p, n)
        roots = cubic_char_roots(sector_matrix(p, n))
        assert np.max(np.abs(s.eigenvalues - np.array(roots))) < 1e-10


def test_sector_eigenvectors_orthonormal():
    p = ModelParams(delta=1.3, anh=-0.8)
    for n in (2, 3, 5):
        s = sector_spectrum(p, n)
        v = np.column_stack(s.eigenvectors)
        assert np.max(np.abs(v.T @ v - np.eye(3))) < 1e-12
        m = sector_matrix(p, n)
        resid = m @ v - v * s.eigenvalues
        assert np.max(np.abs(resid)) < 1e-12 * max(1.0, np.linalg.norm(m))


def test_spectrum_excludes_chemical_potential():
    a = sector_spectrum(ModelParams(delta=0.4, anh=0.9), 3)
    b = sector_spectrum(ModelParams(delta=0.4, anh=0.9, mu=-1.7, j_hop=0.05), 3)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_lowest_sector_energy_consistency():
    p = ModelParams(delta=-0.6, anh=1.4)
    for n in range(0, 6):
        assert lowest_sector_energy(p, n) == sector_spectrum(p, n).eigenvalues[0]


def test_single_excitation_nonlinearity_values():
    assert single_excitation_nonlinearity(ModelParams()) == -1.0
    got = single_excitation_nonlinearity(ModelParams(delta=2.0))
    assert abs(got - (1.0 - SQRT2)) < 1e-15
    # anharmonicity cannot enter
    assert single_excitation_nonlinearity(
        ModelParams(delta=2.0, anh=5.0)
    ) == single_excitation_nonlinearity(ModelParams(delta=2.0))


def test_nonlinearity_equals_lowest_level_shift():
    for d in (-1.5, 0.0, 0.8):
        p = ModelParams(delta=d, omega_c=0.3)
        eta = single_excitation_nonlinearity(p)
        assert abs(eta - (lowest_sector_energy(p, 1) - p.omega_c)) < 1e-14


def test_spectrum_table_structure():
    rows = spectrum_vs_anharmonicity(ModelParams(), [0.0], 3)
    # sectors 0..3 contribute 1 + 2 + 3 + 3 eigenvalues
    assert len(rows) == 9
    by_n = {}
    for r in rows:
        by_n.setdefault(r.n_excitations, []).append(r)
    assert [r.branch for r in by_n[0]] == ["-"]
    assert [r.branch for r in by_n[1]] == ["-", "+"]
    assert [r.branch for r in by_n[2]] == ["-", "0", "+"]
    vals2 = [r.eigenvalue for r in by_n[2]]
    assert np.max(np.abs(np.array(vals2) - np.array([-2.0, 0.0, 2.0]))) < 1e-14
    assert vals2 == sorted(vals2)


def test_spectrum_table_one_excitation_flat_in_anh():
    rows = spectrum_vs_anharmonicity(ModelParams(delta=2.0), [-3.0, 0.0, 3.0], 2)
    n1 = sorted(
        (r.anh, r.branch, r.eigenvalue) for r in rows if r.n_excitations == 1
    )
    minus = {r[2] for r in n1 if r[1] == "-"}
    plus = {r[2] for r in n1 if r[1] == "+"}
    assert len(minus) == 1 and len(plus) == 1


def test_spectrum_table_matches_oracle_along_axis():
    axis = np.linspace(-3.0, 3.0, 11)
    p = ModelParams(delta=-2.0)
    rows = spectrum_vs_anharmonicity(p, axis, 2)
    for anh in axis:
        got = sorted(
            r.eigenvalue
            for r in rows
            if r.n_excitations == 2 and r.anh == float(anh)
        )
        roots = cubic_char_roots(sector_matrix(p.with_(anh=float(anh)), 2))
        assert np.max(np.abs(np.array(got) - np.array(roots))) < 1e-10


def test_spectrum_table_input_validation():
    with pytest.raises(ValueError):
        spectrum_vs_anharmonicity(ModelParams(), [], 2)
    with pytest.raises(ValueError):
        spectrum_vs_anharmonicity(ModelParams(), [0.0], 0)
