"""
Tests for the continuum predictions
"""

import math

import numpy as np
import pytest

from utils.continuum import (SERIES_THRESHOLD, comparison_report, continuum_prediction,
                             coordinate_map, curvature_info, effective_length,
                             effective_temperature, inverse_coordinate_map,
                             predicted_entropy_weak, scalar_curvature, uniform_chain_fit)
from utils.errors import InvalidParameterError, UnderflowGuardError


def test_coordinate_map_examples():
    assert coordinate_map(0.0, 1.3) == 0.0
    assert coordinate_map(1.0, 1.0) == pytest.approx(math.e - 1, rel=1e-15)
    assert coordinate_map(-2.0, 0.5) == pytest.approx(-(math.e - 1) / 0.5, rel=1e-15)
    assert coordinate_map(3.7, 0.0) == 3.7
    assert effective_length(10, 0.2) == pytest.approx((math.exp(2) - 1) / 0.2)

    values = coordinate_map(np.array([-1.0, 0.0, 1.0]), 1.0)
    assert isinstance(values, np.ndarray)
    np.testing.assert_allclose(values, [1 - math.e, 0.0, math.e - 1])


def test_coordinate_map_is_odd_and_increasing():
    x = np.linspace(-20, 20, 401)
    for h in (0.0, 0.05, 1.0):
        mapped = coordinate_map(x, h)
        np.testing.assert_allclose(mapped, -coordinate_map(-x, h), rtol=1e-15)
        assert np.all(np.diff(mapped) > 0)


def test_round_trip():
    rng = np.random.default_rng(17)
    for _ in range(100):
        h = float(rng.uniform(0, 2))
        x = float(rng.uniform(-50, 50))
        assert inverse_coordinate_map(coordinate_map(x, h), h) == pytest.approx(x, rel=1e-12, abs=1e-12)


def test_series_branch_is_continuous():
    h = 1.0
    below = coordinate_map(SERIES_THRESHOLD * (1 - 1e-9), h)
    above = coordinate_map(SERIES_THRESHOLD * (1 + 1e-9), h)
    assert above > below
    assert (above - below) / below == pytest.approx(2e-9, rel=1e-3)

    tiny = coordinate_map(1e-12, 1e-3)
    assert tiny == pytest.approx(1e-12, rel=1e-12)
    assert inverse_coordinate_map(tiny, 1e-3) == pytest.approx(1e-12, rel=1e-12)


def test_overflow_guard():
    with pytest.raises(UnderflowGuardError):
        coordinate_map(800.0, 1.0)
    with pytest.raises(UnderflowGuardError):
        predicted_entropy_weak(1000, 1.0)


def test_invalid_inputs():
    with pytest.raises(InvalidParameterError):
        coordinate_map(1.0, -0.1)
    with pytest.raises(InvalidParameterError):
        coordinate_map(float("nan"), 1.0)
    with pytest.raises(InvalidParameterError):
        inverse_coordinate_map(1.0, float("inf"))
    with pytest.raises(InvalidParameterError):
        predicted_entropy_weak(0, 0.1)
    with pytest.raises(InvalidParameterError):
        continuum_prediction(0.1, [])


def test_predicted_entropy():
    assert predicted_entropy_weak(32, 0.0, c=1.0, c_prime=0.3) == pytest.approx(math.log(32) / 6 + 0.3)
    # volume-law slope c h / 6 once hL is large
    h, c = 0.5, 1.0
    step = predicted_entropy_weak(101, h, c) - predicted_entropy_weak(100, h, c)
    assert step == pytest.approx(c * h / 6, rel=1e-10)

    small_h = predicted_entropy_weak(np.array([10, 20]), 1e-9)
    np.testing.assert_allclose(small_h, np.log([10, 20]) / 6, rtol=1e-8)


def test_thermal_and_geometric_identifications():
    assert effective_temperature(2 * math.pi) == pytest.approx(1.0)
    assert effective_temperature(0.0) == 0.0
    assert scalar_curvature(0.3) == pytest.approx(-0.09)
    info = curvature_info(0.25)
    assert info == {"bulk": -0.0625, "singular_at_origin": True, "origin_weight": 1.0}
    assert curvature_info(0.0)["singular_at_origin"] is False


def test_prediction_document():
    prediction = continuum_prediction(0.1, [40, 10, 20], c=1.0, c_prime=0.25)
    assert prediction.L_values.tolist() == [10, 20, 40]
    document = prediction.to_dict()
    assert document["effective_temperature"] == pytest.approx(0.1 / (2 * math.pi))
    assert document["curvature"] == pytest.approx(-0.01)
    assert [sample["L"] for sample in document["samples"]] == [10, 20, 40]
    assert document["samples"][0]["S_predicted"] == pytest.approx(
        math.log((math.exp(1.0) - 1) / 0.1) / 6 + 0.25)


def test_comparison_report_with_given_entropies():
    prediction = continuum_prediction(0.0, [8, 16], c_prime=0.5)
    report = comparison_report(prediction, exact=[(8, 0.8), (16, 0.9)])
    assert list(report.columns) == ["L", "h", "S_exact", "S_predicted", "deviation"]
    np.testing.assert_allclose(report["deviation"], report["S_predicted"] - report["S_exact"])
    with pytest.raises(InvalidParameterError):
        comparison_report(prediction, exact=[(8, 0.8)])


def test_comparison_report_against_exact_chain():
    prediction = continuum_prediction(0.0, [8, 9, 10])
    report = comparison_report(prediction)
    assert np.all(report["S_exact"] > 0)


@pytest.mark.slow
@pytest.mark.parametrize("h", [0.01, 0.05])
def test_weak_inhomogeneity_matches_exact(h):
    c_prime = uniform_chain_fit([16, 17, 24, 25, 32, 33, 48, 49, 64, 65]).coefficients["c_prime"]
    prediction = continuum_prediction(h, [32, 64, 96, 128, 192, 256], c=1.0, c_prime=c_prime)
    report = comparison_report(prediction)
    assert report["L"].tolist() == [32, 64, 96, 128, 192, 256]
    assert np.max(np.abs(report["deviation"])) <= 0.1
