"""
Tests for the brute-force many-body oracle
"""

import numpy as np
import pytest
import scipy.sparse

from utils.chain_model import ChainSpec
from utils.entanglement import Block, block_entropy, left_block
from utils.errors import (DegenerateGroundStateError, InvalidParameterError,
                          NumericalConsistencyError, OracleCapError)
from utils.oracle import (MAX_SITES, FockBasis, FockHamiltonian, ManyBodyState, apply_creation,
                          apply_hop, build_hamiltonian, correlations, ground_state, overlap,
                          rainbow_state, reduced_entropy, reduced_spectrum)
from utils.spectral_engine import solve_chain


def test_fock_basis():
    basis = FockBasis.half_filled(1)
    assert basis.masks == (0b01, 0b10)
    assert FockBasis.half_filled(3).dimension == 20
    assert FockBasis.half_filled(MAX_SITES // 2).dimension == 924
    with pytest.raises(OracleCapError):
        FockBasis.half_filled(MAX_SITES // 2 + 1)


def test_fermionic_signs():
    assert apply_creation(0b01, 0) is None
    assert apply_creation(0b01, 1) == (-1, 0b11)
    assert apply_hop(0b101, 1, 0) == (1, 0b110)
    # hopping across one occupied site picks up a minus sign
    assert apply_hop(0b110, 0, 2) == (-1, 0b011)
    assert apply_hop(0b110, 1, 2) is None


def test_single_bond():
    state = ground_state(build_hamiltonian(ChainSpec(1, 0.0, 2.0)))
    assert state.energy == pytest.approx(-1.0, abs=1e-12)
    assert abs(state.amplitudes[0]) == pytest.approx(1 / np.sqrt(2))
    assert reduced_entropy(state, left_block(1)) == pytest.approx(np.log(2), abs=1e-12)


@pytest.mark.parametrize("L", [1, 2, 3, 4])
@pytest.mark.parametrize("h", [0.0, 0.5, 2.0])
def test_energy_matches_filled_levels(L, h):
    spec = ChainSpec(L, h)
    reference = solve_chain(spec)
    filled = reference.spectrum.energies[list(reference.occupied.indices)].sum()
    assert ground_state(build_hamiltonian(spec)).energy == pytest.approx(filled, abs=1e-9)


@pytest.mark.parametrize("L", [1, 2, 3, 4])
@pytest.mark.parametrize("h", [0.0, 0.5, 2.0])
@pytest.mark.parametrize("n", [1.0, 2.0])
def test_entropies_agree_with_correlation_matrix(L, h, n):
    spec = ChainSpec(L, h)
    state = ground_state(build_hamiltonian(spec))
    C = solve_chain(spec).correlations
    for ell in range(1, 2 * L):
        B = left_block(ell)
        assert reduced_entropy(state, B, n) == pytest.approx(block_entropy(C, B, n), abs=1e-8)


@pytest.mark.parametrize("L, h", [(2, 0.0), (3, 0.7), (4, 1.5)])
def test_correlations_agree(L, h):
    spec = ChainSpec(L, h)
    state = ground_state(build_hamiltonian(spec))
    np.testing.assert_allclose(correlations(state), solve_chain(spec).correlations.entries,
                               atol=1e-9)


def test_reduced_density_matrix_is_a_state():
    state = ground_state(build_hamiltonian(ChainSpec(3, 0.4)))
    for ell in range(1, 6):
        weights = reduced_spectrum(state, left_block(ell))
        assert weights.sum() == pytest.approx(1.0, abs=1e-10)
        assert weights.min() >= -1e-12
    np.testing.assert_array_equal(reduced_spectrum(state, left_block(6)), [1.0])


def test_only_left_edge_blocks():
    state = ground_state(build_hamiltonian(ChainSpec(2, 0.0)))
    with pytest.raises(InvalidParameterError):
        reduced_spectrum(state, Block((1,)))
    with pytest.raises(InvalidParameterError):
        reduced_spectrum(state, Block((0, 2)))
    with pytest.raises(InvalidParameterError):
        reduced_entropy(state, left_block(1), 0.0)


def test_degenerate_ground_state():
    basis = FockBasis.half_filled(2)
    H = FockHamiltonian(matrix=scipy.sparse.csr_matrix((basis.dimension, basis.dimension)),
                        basis=basis, spec=ChainSpec(2, 0.0))
    with pytest.raises(DegenerateGroundStateError):
        ground_state(H)


def test_state_checks():
    basis = FockBasis.half_filled(1)
    with pytest.raises(NumericalConsistencyError):
        ManyBodyState(np.array([1.0, 1.0]), basis)
    with pytest.raises(InvalidParameterError):
        ManyBodyState(np.array([1.0]), basis)
    with pytest.raises(InvalidParameterError):
        rainbow_state(2, signs=[1])
    with pytest.raises(InvalidParameterError):
        overlap(rainbow_state(1), rainbow_state(2))


def test_rainbow_state_entropy():
    state = rainbow_state(3)
    for ell in range(1, 6):
        expected = min(ell, 6 - ell) * np.log(2)
        assert reduced_entropy(state, left_block(ell)) == pytest.approx(expected, abs=1e-12)
    statevector = state.to_statevector()
    assert statevector.num_qubits == 6
    assert statevector.is_valid()


@pytest.mark.parametrize("L", [2, 3])
def test_ground_state_approaches_rainbow(L):
    rainbow = rainbow_state(L)
    fidelities = [overlap(ground_state(build_hamiltonian(ChainSpec(L, h))), rainbow)
                  for h in (1.0, 2.0, 4.0, 8.0)]
    assert all(later > earlier for earlier, later in zip(fidelities, fidelities[1:])), fidelities
    assert fidelities[-1] >= 0.99


def test_wrong_signs_are_orthogonal_to_the_ground_state():
    flipped = rainbow_state(2, signs=[1, 1])
    assert overlap(ground_state(build_hamiltonian(ChainSpec(2, 8.0))), flipped) <= 0.01
    assert overlap(rainbow_state(1), ground_state(build_hamiltonian(ChainSpec(1, 3.0)))) == pytest.approx(1.0)
