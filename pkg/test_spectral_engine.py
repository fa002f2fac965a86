"""
Tests for the spectral engine: eigensolvers, half filling and correlations
"""

import math

import numpy as np
import pytest

from utils.chain_model import ChainSpec, TridiagonalMatrix, hopping_matrix
from utils.entanglement import half_chain_entropy
from utils.errors import FermiDegeneracyError, InvalidParameterError
from utils.sdrg import run_sdrg_chain, sdrg_gap_estimate
from utils.spectral_engine import (SingleBodySpectrum, correlation_matrix, eigh_dense_symmetric,
                                   eigh_tridiagonal, ground_state_occupation, single_particle_gap,
                                   solve_chain, spectrum_table)


def random_spec(rng) -> ChainSpec:
    # (L-1) h stays well inside the resolvable gap range
    return ChainSpec(int(rng.integers(1, 9)), float(rng.uniform(0.0, 2.5)), float(rng.uniform(0.5, 2.0)))


def test_two_by_two():
    spectrum = eigh_tridiagonal(TridiagonalMatrix([0.0, 0.0], [-0.5]))
    np.testing.assert_allclose(spectrum.energies, [-0.5, 0.5], atol=1e-15)
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(spectrum.modes[:, 0], [s, s], atol=1e-12)
    np.testing.assert_allclose(spectrum.modes[:, 1], [s, -s], atol=1e-12)


def test_uniform_open_chain_dispersion():
    spectrum = eigh_tridiagonal(hopping_matrix(ChainSpec(2, 0.0)))
    expected = sorted(-math.cos(k * math.pi / 5) for k in range(1, 5))
    np.testing.assert_allclose(spectrum.energies, expected, atol=1e-12)


def test_spectrum_properties():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        spec = random_spec(rng)
        T = hopping_matrix(spec)
        spectrum = eigh_tridiagonal(T)
        energies, modes = spectrum.energies, spectrum.modes
        scale = max(np.max(np.abs(energies)), 1e-300)

        assert np.all(np.diff(energies) >= 0), "energies must be ascending"
        np.testing.assert_allclose(modes.T @ modes, np.eye(spec.n_sites), atol=1e-10)
        residual = np.linalg.norm(T.to_dense() @ modes - modes * energies, axis=0)
        assert np.all(residual <= 1e-10 * scale)
        np.testing.assert_allclose(energies, -energies[::-1], atol=1e-10 * spec.J0)

        # mirror-symmetric modes tie in magnitude; the first of the tied components is the pivot
        magnitudes = np.abs(modes)
        pivots = np.argmax(magnitudes >= magnitudes.max(axis=0) * (1 - 1e-10), axis=0)
        assert np.all(modes[pivots, np.arange(spec.n_sites)] > 0), "largest component must be positive"


def test_correlation_matrix_properties():
    rng = np.random.default_rng(7)
    for _ in range(100):
        spec = random_spec(rng)
        C = solve_chain(spec).correlations.entries

        np.testing.assert_allclose(C, C.T, atol=1e-12)
        assert np.trace(C) == pytest.approx(spec.L, abs=1e-9)
        assert np.max(np.abs(C @ C - C)) <= 1e-9, "ground state is a Slater determinant"
        nu = np.linalg.eigvalsh(C)
        assert nu.min() >= -1e-10 and nu.max() <= 1 + 1e-10


def test_dense_solver_examples():
    values, vectors = eigh_dense_symmetric(np.eye(3))
    np.testing.assert_allclose(values, [1, 1, 1], atol=1e-14)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(3), atol=1e-12)

    values, _ = eigh_dense_symmetric(np.array([[0.5, 0.5], [0.5, 0.5]]))
    np.testing.assert_allclose(values, [0.0, 1.0], atol=1e-15)


def test_dense_solver_reconstruction():
    rng = np.random.default_rng(99)
    for size in (1, 2, 3, 6, 17):
        A = rng.normal(size=(size, size))
        M = A + A.T
        values, vectors = eigh_dense_symmetric(M)
        assert np.max(np.abs(vectors @ np.diag(values) @ vectors.T - M)) <= 1e-10
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(size), atol=1e-10)
        np.testing.assert_allclose(values, np.linalg.eigvalsh(M), atol=1e-10)


def test_dense_solver_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        eigh_dense_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidParameterError):
        eigh_dense_symmetric(np.zeros((2, 3)))


def test_dense_solver_symmetry_check_is_relative():
    with pytest.raises(InvalidParameterError):
        eigh_dense_symmetric(1e-12 * np.array([[0.0, 1.0], [0.0, 0.0]]))
    values, _ = eigh_dense_symmetric(1e-12 * np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(values, [1e-12, 3e-12], rtol=1e-10)
    values, _ = eigh_dense_symmetric(np.zeros((3, 3)))
    np.testing.assert_array_equal(values, np.zeros(3))


def test_dense_and_tridiagonal_agree():
    for spec in (ChainSpec(3, 0.0), ChainSpec(5, 1.3), ChainSpec(8, 0.4, 2.0)):
        T = hopping_matrix(spec)
        values, _ = eigh_dense_symmetric(T.to_dense(), compute_vectors=False)
        np.testing.assert_allclose(values, eigh_tridiagonal(T).energies, atol=1e-10)


def test_occupation():
    spectrum = eigh_tridiagonal(hopping_matrix(ChainSpec(1, 0.0)))
    occupied = ground_state_occupation(spectrum, 1)
    assert occupied.indices == (0,)
    assert occupied.fermi_gap_info == pytest.approx((-0.5, 0.5))

    ground_state = solve_chain(ChainSpec(3, 1.0))
    filled = ground_state.spectrum.energies[list(ground_state.occupied.indices)]
    assert len(filled) == 3 and np.all(filled < 0)


def test_degenerate_fermi_level_is_an_error():
    spectrum = SingleBodySpectrum(energies=np.array([-1.0, 0.0, 0.0, 1.0]), modes=np.eye(4))
    with pytest.raises(FermiDegeneracyError):
        ground_state_occupation(spectrum, 2)
    with pytest.raises(InvalidParameterError):
        ground_state_occupation(spectrum, 3)


def test_two_site_correlations():
    C = solve_chain(ChainSpec(1, 0.0)).correlations.entries
    np.testing.assert_allclose(C, [[0.5, 0.5], [0.5, 0.5]], atol=1e-14)


def test_correlation_matrix_is_read_only():
    C = solve_chain(ChainSpec(2, 0.5)).correlations
    with pytest.raises(ValueError):
        C.entries[0, 0] = 3.0


def test_single_site_gap():
    spectrum = eigh_tridiagonal(hopping_matrix(ChainSpec(1, 0.0, 2.0)))
    assert single_particle_gap(spectrum) == pytest.approx(2.0)


@pytest.mark.parametrize("h, sizes", [
    (0.5, [4, 8, 16, 32]),
    (1.0, [4, 8, 16]),
    (2.0, [4, 8]),
])
def test_gap_closes_with_size(h, sizes):
    # points whose gap falls under the ~1e-13 J0 resolution of double precision are left out
    gaps = [solve_chain(ChainSpec(L, h)).gap for L in sizes]
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:])), gaps


def test_gap_decreases_at_fixed_h():
    gaps = [solve_chain(ChainSpec(L, 1.0)).gap for L in (2, 4, 6, 8)]
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))


def test_gap_matches_sdrg_scale():
    spec = ChainSpec(4, 3.0)
    exact = solve_chain(spec).gap
    estimate = sdrg_gap_estimate(run_sdrg_chain(spec))
    assert estimate / 3 <= exact <= 3 * estimate


def test_entropies_do_not_depend_on_J0():
    for L, h in ((3, 0.0), (4, 0.8), (5, 2.0)):
        values = [half_chain_entropy(ChainSpec(L, h, J0)) for J0 in (0.5, 1.0, 2.0)]
        assert max(values) - min(values) <= 1e-10


def test_spectrum_table():
    ground_state = solve_chain(ChainSpec(4, 0.5))
    table = spectrum_table(ground_state.spectrum, ground_state.occupied)
    assert list(table.columns) == ["k", "energy", "occupied", "gap"]
    assert len(table) == 8
    assert table["occupied"].tolist() == [1, 1, 1, 1, 0, 0, 0, 0]
