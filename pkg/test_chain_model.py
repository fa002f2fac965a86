"""
Tests for the rainbow chain model: specification, couplings and hopping matrix
"""

import math

import numpy as np
import pytest

from utils.chain_model import (ChainSpec, CouplingProfile, TridiagonalMatrix, bond_distances,
                               classify_regime, coupling_profile, effective_size, hopping_matrix,
                               log_coupling_profile, site_label)
from utils.errors import InvalidParameterError, UnderflowGuardError


@pytest.mark.parametrize("L, h, J0", [
    (0, 1.0, 1.0),
    (-2, 1.0, 1.0),
    (1.5, 1.0, 1.0),
    (True, 1.0, 1.0),
    (2, -0.1, 1.0),
    (2, float("nan"), 1.0),
    (2, float("inf"), 1.0),
    (2, 1.0, 0.0),
    (2, 1.0, -1.0),
])
def test_invalid_specs_are_rejected(L, h, J0):
    with pytest.raises(InvalidParameterError):
        ChainSpec(L, h, J0)


def test_spec_json_round_trip():
    spec = ChainSpec(4, 0.5, 2.0)
    assert ChainSpec.from_json(spec.to_json()) == spec
    assert ChainSpec.from_json('{"L": 3, "h": 1}') == ChainSpec(3, 1.0, 1.0)

    with pytest.raises(InvalidParameterError):
        ChainSpec.from_json('{"L": 3}')
    with pytest.raises(InvalidParameterError):
        ChainSpec.from_json("[1, 2]")
    with pytest.raises(InvalidParameterError):
        ChainSpec.from_json("not json")


def test_site_labels():
    assert site_label(0, 6) == -5.5
    assert site_label(5, 6) == -0.5
    assert site_label(11, 6) == 5.5
    with pytest.raises(InvalidParameterError):
        site_label(12, 6)
    with pytest.raises(InvalidParameterError):
        site_label(-1, 6)


def test_bond_distances():
    np.testing.assert_array_equal(bond_distances(3), [1.5, 0.5, 0.0, 0.5, 1.5])
    np.testing.assert_array_equal(bond_distances(1), [0.0])


def test_uniform_profile_is_exact():
    profile = coupling_profile(ChainSpec(2, 0.0))
    np.testing.assert_array_equal(profile.bonds, [1.0, 1.0, 1.0])

    profile = coupling_profile(ChainSpec(50, 0.0, 0.3))
    assert np.all(profile.bonds == 0.3), "h=0 must give J0 bit-exactly"


def test_profile_values():
    np.testing.assert_allclose(coupling_profile(ChainSpec(2, 2.0)).bonds,
                               [math.exp(-1), 1.0, math.exp(-1)], rtol=1e-15)

    bonds = coupling_profile(ChainSpec(3, 1.0, 2.0)).bonds
    expected = 2.0 * np.exp(-np.array([1.5, 0.5, 0.0, 0.5, 1.5]))
    np.testing.assert_allclose(bonds, expected, rtol=1e-15)
    assert bonds[2] == 2.0


def test_profile_symmetry_and_monotonicity():
    rng = np.random.default_rng(11)
    for _ in range(100):
        spec = ChainSpec(int(rng.integers(1, 30)), float(rng.uniform(0.01, 3.0)),
                         float(rng.uniform(0.1, 5.0)))
        bonds = coupling_profile(spec).bonds
        assert len(bonds) == 2 * spec.L - 1
        np.testing.assert_array_equal(bonds, bonds[::-1])
        assert bonds[spec.L - 1] == spec.J0
        assert np.all(bonds > 0)
        assert np.all(np.diff(bonds[spec.L - 1:]) < 0), "couplings must decay away from the centre"


def test_underflow_guard():
    with pytest.raises(UnderflowGuardError) as info:
        coupling_profile(ChainSpec(4, 1000.0))
    assert info.value.exit_code == 3

    # log-domain profile is always available
    profile = log_coupling_profile(ChainSpec(4, 1000.0))
    assert profile.bonds is None
    assert profile.log_bonds[0] == pytest.approx(-2500.0)


def test_hopping_matrix():
    T = hopping_matrix(ChainSpec(1, 7.0, 3.0))
    np.testing.assert_array_equal(T.to_dense(), [[0.0, -1.5], [-1.5, 0.0]])

    T = hopping_matrix(ChainSpec(2, 0.0))
    np.testing.assert_array_equal(T.offdiagonal, [-0.5, -0.5, -0.5])
    np.testing.assert_array_equal(T.diagonal, np.zeros(4))

    T = hopping_matrix(ChainSpec(2, 2.0))
    np.testing.assert_allclose(T.offdiagonal, [-math.exp(-1) / 2, -0.5, -math.exp(-1) / 2])

    dense = hopping_matrix(ChainSpec(5, 0.7)).to_dense()
    np.testing.assert_array_equal(dense, dense.T)


def test_tridiagonal_shape_check():
    with pytest.raises(InvalidParameterError):
        TridiagonalMatrix(np.zeros(3), np.zeros(3))


def test_profile_from_bonds():
    profile = CouplingProfile.from_bonds([1.0, -0.5, 2.0])
    np.testing.assert_array_equal(profile.signs, [1, -1, 1])
    np.testing.assert_allclose(profile.log_bonds, np.log([1.0, 0.5, 2.0]))
    assert profile.n_sites == 4
    with pytest.raises(InvalidParameterError):
        CouplingProfile.from_bonds([1.0, 0.0])


def test_effective_size():
    assert effective_size(ChainSpec(100, 0.05)) == pytest.approx(5.0)
    assert effective_size(ChainSpec(37, 0.0)) == 0.0
    assert ChainSpec(9, 1.0).z == 9.0


def test_regime_classification():
    assert classify_regime(ChainSpec(10, 0.0)).regime == "uniform"
    assert classify_regime(ChainSpec(10, 0.05)).regime == "weak"
    strong = classify_regime(ChainSpec(10, 1.0))
    assert strong.regime == "strong"
    assert strong.violation == "volumetric"
