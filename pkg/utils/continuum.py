"""
Continuum predictions for weak inhomogeneity

Closed-form results of the continuum limit of the rainbow chain: the
coordinate map to the flat-space picture, the predicted half-chain entropy,
the effective temperature and the scalar curvature. comparison_report puts
the prediction next to exact half-chain entropies.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.chain_model import ChainSpec
from utils.config import DEFAULT_CONFIG
from utils.entanglement import half_chain_entropy
from utils.errors import InvalidParameterError, UnderflowGuardError
from utils.scaling_fit import FitResult, fit_cft_halfchain

logger = logging.getLogger(__name__)

# Below this value of h|x| the map is evaluated from its Taylor series
SERIES_THRESHOLD = 1e-8


def _check_h(h: float) -> float:
    h = float(h)
    if not math.isfinite(h) or h < 0:
        raise InvalidParameterError(f"h must be a finite non-negative real, got {h!r}")
    return h


def _scalar_or_array(value: np.ndarray, template):
    return float(value) if np.ndim(template) == 0 else value


def coordinate_map(x, h: float, overflow_exponent: float = DEFAULT_CONFIG["underflow_exponent"]):
    """
    Map lattice position x to sign(x) (e^{h|x|} - 1)/h

    Args:
        x: Position (scalar or array)
        h: Inhomogeneity, h = 0 gives the identity
        overflow_exponent: Largest h|x| accepted

    Returns:
        Mapped position, same shape as x
    """
    h = _check_h(h)
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("Coordinate map needs finite positions")
    if h == 0.0:
        return _scalar_or_array(values.copy(), x)

    magnitude = np.abs(values)
    a = h * magnitude
    if np.any(a > overflow_exponent):
        raise UnderflowGuardError(f"Coordinate map overflows: h|x| = {float(np.max(a)):.6g}",
                                  details={"h": h, "limit": overflow_exponent})
    series = magnitude * (1.0 + a / 2.0 + a * a / 6.0)
    closed = np.expm1(a) / h
    mapped = np.sign(values) * np.where(a < SERIES_THRESHOLD, series, closed)
    return _scalar_or_array(mapped, x)


def inverse_coordinate_map(xt, h: float):
    """Inverse of coordinate_map: sign(xt) log(1 + h|xt|)/h."""
    h = _check_h(h)
    values = np.asarray(xt, dtype=float)
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("Inverse coordinate map needs finite positions")
    if h == 0.0:
        return _scalar_or_array(values.copy(), xt)

    magnitude = np.abs(values)
    b = h * magnitude
    series = magnitude * (1.0 - b / 2.0 + b * b / 3.0)
    closed = np.log1p(b) / h
    mapped = np.sign(values) * np.where(b < SERIES_THRESHOLD, series, closed)
    return _scalar_or_array(mapped, xt)


def effective_length(L, h: float):
    """Length of the half chain in mapped coordinates, (e^{hL} - 1)/h."""
    return coordinate_map(L, h)


def predicted_entropy_weak(L, h: float, c: float = 1.0, c_prime: float = 0.0):
    """
    Half-chain entropy predicted by the continuum theory

    S(L) = (c/6) log((e^{hL} - 1)/h) + c', reducing to (c/6) log L + c' at h = 0.

    Args:
        L: Half chain size (scalar or array), L >= 1
        h: Inhomogeneity
        c: Central charge
        c_prime: Non-universal constant

    Returns:
        Entropy in nats, same shape as L
    """
    sizes = np.asarray(L, dtype=float)
    if np.any(sizes < 1):
        raise InvalidParameterError("Chain sizes must be at least 1")
    return _scalar_or_array(c / 6.0 * np.log(effective_length(sizes, h)) + c_prime, L)


def effective_temperature(h: float) -> float:
    """T = h / 2 pi."""
    return _check_h(h) / (2.0 * math.pi)


def scalar_curvature(h: float) -> float:
    """Bulk scalar curvature -h^2; the delta term at the origin is reported by curvature_info."""
    h = _check_h(h)
    return -(h * h)


def curvature_info(h: float) -> Dict[str, Any]:
    h = _check_h(h)
    return {"bulk": scalar_curvature(h), "singular_at_origin": h > 0, "origin_weight": 4.0 * h}


@dataclass
class ContinuumPrediction:
    """
    Prediction curve with the thermal and geometric identifications

    Attributes:
        h: Inhomogeneity
        c: Central charge used
        c_prime: Non-universal constant used
        L_values: Half chain sizes
        entropies: Predicted half-chain entropies, nats
        effective_temperature: h / 2 pi
        curvature: Bulk scalar curvature -h^2
        singular_at_origin: Whether the curvature carries a delta term at x = 0
    """

    h: float
    c: float
    c_prime: float
    L_values: np.ndarray
    entropies: np.ndarray
    effective_temperature: float
    curvature: float
    singular_at_origin: bool
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": 1,
            "h": self.h,
            "c": self.c,
            "c_prime": self.c_prime,
            "effective_temperature": self.effective_temperature,
            "curvature": self.curvature,
            "singular_at_origin": self.singular_at_origin,
            "samples": [{"L": int(L), "S_predicted": float(s)}
                        for L, s in zip(self.L_values, self.entropies)],
            **self.metadata,
        }


def continuum_prediction(h: float, L_values: Sequence[int], c: float = 1.0,
                         c_prime: float = 0.0) -> ContinuumPrediction:
    """Evaluate the prediction curve over L_values."""
    sizes = np.asarray(sorted(int(L) for L in L_values))
    if sizes.size == 0:
        raise InvalidParameterError("At least one chain size is needed")
    return ContinuumPrediction(
        h=_check_h(h),
        c=float(c),
        c_prime=float(c_prime),
        L_values=sizes,
        entropies=np.asarray(predicted_entropy_weak(sizes, h, c, c_prime), dtype=float),
        effective_temperature=effective_temperature(h),
        curvature=scalar_curvature(h),
        singular_at_origin=h > 0,
    )


def uniform_chain_fit(L_values: Sequence[int], J0: float = 1.0, K: float = 1.0,
                      config: Optional[dict] = None) -> FitResult:
    """CFT fit of exact half-chain entropies at h = 0, the usual source of c'."""
    config = config or DEFAULT_CONFIG
    samples = [(L, half_chain_entropy(ChainSpec(int(L), 0.0, J0), 1.0, config)) for L in L_values]
    return fit_cft_halfchain(samples, K=K, condition_warning=config["condition_warning"])


def comparison_report(prediction: ContinuumPrediction,
                      exact: Optional[Sequence[Tuple[int, float]]] = None,
                      J0: float = 1.0, config: Optional[dict] = None) -> pd.DataFrame:
    """
    Predicted against exact half-chain entropies

    Args:
        prediction: Prediction curve
        exact: (L, S) pairs; computed by exact diagonalization when omitted
        J0: Coupling scale for the exact computation
        config: Run configuration

    Returns:
        pd.DataFrame: columns L, h, S_exact, S_predicted, deviation (predicted - exact)
    """
    if exact is None:
        config = config or DEFAULT_CONFIG
        exact = [(int(L), half_chain_entropy(ChainSpec(int(L), prediction.h, J0), 1.0, config))
                 for L in prediction.L_values]
    exact_by_L = dict((int(L), float(s)) for L, s in exact)
    missing = [int(L) for L in prediction.L_values if int(L) not in exact_by_L]
    if missing:
        raise InvalidParameterError(f"No exact entropy for L in {missing}")

    S_exact = np.array([exact_by_L[int(L)] for L in prediction.L_values])
    report = pd.DataFrame({
        "L": prediction.L_values,
        "h": prediction.h,
        "S_exact": S_exact,
        "S_predicted": prediction.entropies,
        "deviation": prediction.entropies - S_exact,
    })
    logger.info("Continuum comparison h=%g: max |deviation| %.4g nats", prediction.h,
                float(np.max(np.abs(report["deviation"]))))
    return report
