"""
Scaling-law fits of entanglement entropies

Linear least-squares extraction of the central charge and non-universal
constants from half-chain or block entropies:

- CFT_HALF:      S(L)  = (c/6) log L + c' + f cos(pi L) / L^K
- BLOCK_SCALING: S(l)  = c(1+1/n)/12 log[(4L/pi) sin(pi l/2L)] + c'_n
                         + f_n cos(pi l) [(8L/pi) sin(pi l/2L)]^(-K/n)
- Z_FAMILY:      S(L)  = (c(z)/6) log L + d(z) + f(z) cos(pi L) / L^K, at fixed z = hL

The models stay linear in their coefficients; K and n are fixed inputs.
Systems are solved with an SVD-based least-squares solver.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.config import DEFAULT_CONFIG
from utils.errors import FitError, InvalidParameterError, RankDeficiencyError
from utils.special import gamma

logger = logging.getLogger(__name__)

CFT_HALF = "CFT_HALF"
BLOCK_SCALING = "BLOCK_SCALING"
Z_FAMILY = "Z_FAMILY"
MODEL_IDS = (CFT_HALF, BLOCK_SCALING, Z_FAMILY)

COEFFICIENT_NAMES = {
    CFT_HALF: ("c", "c_prime", "f"),
    BLOCK_SCALING: ("c", "c_prime_n", "f_n"),
    Z_FAMILY: ("c_z", "d_z", "f_z"),
}


@dataclass
class FitModel:
    """
    Basis functions of one scaling law

    Attributes:
        model_id: One of MODEL_IDS
        K: Luttinger parameter in the oscillation exponent
        n: Renyi order
        L: Half chain size, block scaling only
    """

    model_id: str
    K: float = 1.0
    n: float = 1.0
    L: Optional[int] = None

    def __post_init__(self):
        if self.model_id not in MODEL_IDS:
            raise InvalidParameterError(f"Unknown fit model {self.model_id!r}",
                                        details={"models": list(MODEL_IDS)})
        if not np.isfinite(self.K) or self.K <= 0:
            raise InvalidParameterError(f"Luttinger parameter must be positive, got {self.K!r}")
        if not np.isfinite(self.n) or self.n <= 0:
            raise InvalidParameterError(f"Renyi order must be positive, got {self.n!r}")
        if self.model_id == BLOCK_SCALING and (self.L is None or self.L < 1):
            raise InvalidParameterError("Block scaling needs the half chain size L")

    def design(self, x: np.ndarray) -> np.ndarray:
        """Design matrix with one column per coefficient."""
        x = np.asarray(x, dtype=float)
        parity = np.cos(np.pi * x)
        if self.model_id == BLOCK_SCALING:
            chord = np.sin(np.pi * x / (2 * self.L))
            return np.column_stack([
                np.log(4 * self.L / np.pi * chord),
                np.ones_like(x),
                parity * (8 * self.L / np.pi * chord) ** (-self.K / self.n),
            ])
        return np.column_stack([np.log(x), np.ones_like(x), parity / x ** self.K])

    def slope_to_charge(self, slope: float) -> float:
        if self.model_id == BLOCK_SCALING:
            return 12.0 * slope / (1.0 + 1.0 / self.n)
        return 6.0 * slope

    def charge_to_slope(self, charge: float) -> float:
        if self.model_id == BLOCK_SCALING:
            return charge * (1.0 + 1.0 / self.n) / 12.0
        return charge / 6.0

    def parameters(self) -> Dict[str, Any]:
        params = {"K": self.K, "n": self.n}
        if self.L is not None:
            params["L"] = self.L
        return params


@dataclass
class FitResult:
    """
    Outcome of one scaling-law fit

    Attributes:
        model_id: Which scaling law was fitted
        coefficients: Named coefficients, the central charge already un-scaled
        residual_rms: Root mean square of the residuals
        condition_estimate: Ratio of largest to smallest singular value of the design
        n_samples: Number of samples used
        ill_conditioned: condition_estimate exceeded the warning threshold
        parameters: Fixed inputs of the model (K, n, L, z)
    """

    model_id: str
    coefficients: Dict[str, float]
    residual_rms: float
    condition_estimate: float
    n_samples: int
    ill_conditioned: bool = False
    parameters: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": 1,
            "model": self.model_id,
            "coefficients": dict(self.coefficients),
            "residual_rms": self.residual_rms,
            "condition_estimate": self.condition_estimate,
            "n_samples": self.n_samples,
            "ill_conditioned": self.ill_conditioned,
            "parameters": dict(self.parameters),
            "warnings": list(self.warnings),
        }


@dataclass
class SampleSet:
    """Samples read from a file together with the model context they imply."""

    model_id: str
    samples: List[Tuple[float, float]]
    L: Optional[int] = None
    n: float = 1.0
    z: Optional[float] = None


def _as_arrays(samples: Sequence[Tuple[float, float]]) -> Tuple[np.ndarray, np.ndarray]:
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] == 0:
        raise InvalidParameterError("Samples must be a non-empty list of (x, S) pairs")
    if not np.all(np.isfinite(data)):
        raise InvalidParameterError("Samples contain non-finite values")
    x, y = data[:, 0], data[:, 1]
    if np.any(x != np.round(x)):
        raise InvalidParameterError("Sizes must be integers")
    return x, y


def _check_identifiable(x: np.ndarray, min_distinct: int, label: str) -> None:
    distinct = np.unique(x)
    if len(distinct) < 3:
        raise RankDeficiencyError(
            f"Fit needs at least 3 distinct {label} values, got {len(distinct)}",
            details={"distinct": distinct.tolist()},
        )
    parities = set((distinct.astype(int) % 2).tolist())
    if len(parities) < 2:
        raise RankDeficiencyError(
            f"All {label} values share one parity; the oscillation amplitude is unidentifiable",
            details={"parity": parities.pop()},
        )
    if len(distinct) < min_distinct:
        raise FitError(f"Fit needs at least {min_distinct} distinct {label} values, got {len(distinct)}",
                       details={"distinct": distinct.tolist()})


def _solve(model: FitModel, x: np.ndarray, y: np.ndarray,
           condition_warning: float) -> FitResult:
    A = model.design(x)
    solution, _, rank, singular_values = np.linalg.lstsq(A, y, rcond=None)
    if rank < A.shape[1]:
        raise RankDeficiencyError(f"Design matrix has rank {rank} < {A.shape[1]}",
                                  details={"rank": int(rank), "model": model.model_id})

    residuals = y - A @ solution
    condition = float(singular_values[0] / singular_values[-1])
    slope, constant, oscillation = (float(v) for v in solution)
    names = COEFFICIENT_NAMES[model.model_id]
    result = FitResult(
        model_id=model.model_id,
        coefficients={names[0]: model.slope_to_charge(slope), names[1]: constant,
                      names[2]: oscillation},
        residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
        condition_estimate=max(condition, 1.0),
        n_samples=len(y),
        parameters=model.parameters(),
    )
    if condition > condition_warning:
        result.ill_conditioned = True
        message = f"ill-conditioned design: condition estimate {condition:.3g}"
        result.warnings.append(message)
        logger.warning("%s fit %s", model.model_id, message)
    return result


def fit_cft_halfchain(samples: Sequence[Tuple[float, float]], K: float = 1.0,
                      condition_warning: float = DEFAULT_CONFIG["condition_warning"]) -> FitResult:
    """
    Fit half-chain entropies of the uniform chain

    Args:
        samples: (L, S) pairs, at least 4 distinct L of both parities
        K: Luttinger parameter
        condition_warning: Condition estimate above which the result is flagged

    Returns:
        FitResult: coefficients c, c_prime, f
    """
    x, y = _as_arrays(samples)
    if np.any(x < 1):
        raise InvalidParameterError("Chain sizes must be positive")
    _check_identifiable(x, 4, "L")
    return _solve(FitModel(CFT_HALF, K=K), x, y, condition_warning)


def fit_block_scaling(samples: Sequence[Tuple[float, float]], L: int, n: float = 1.0,
                      K: float = 1.0,
                      condition_warning: float = DEFAULT_CONFIG["condition_warning"]) -> FitResult:
    """
    Fit the block-size dependence of the entropy in one chain

    Args:
        samples: (l, S) pairs with 1 <= l <= 2L-1, at least 5 of them
        L: Half chain size
        n: Renyi order of the entropies
        K: Luttinger parameter
        condition_warning: Condition estimate above which the result is flagged

    Returns:
        FitResult: coefficients c, c_prime_n, f_n
    """
    model = FitModel(BLOCK_SCALING, K=K, n=n, L=L)
    x, y = _as_arrays(samples)
    if np.any(x < 1) or np.any(x > 2 * L - 1):
        raise InvalidParameterError(f"Block sizes must lie in 1..{2 * L - 1}",
                                    details={"L": L})
    if len(x) < 5:
        raise FitError(f"Block scaling fit needs at least 5 samples, got {len(x)}")
    _check_identifiable(x, 3, "block size")
    return _solve(model, x, y, condition_warning)


def fit_z_family(samples: Sequence[Tuple[float, float]], K: float = 1.0, z: Optional[float] = None,
                 condition_warning: float = DEFAULT_CONFIG["condition_warning"]) -> FitResult:
    """
    Fit half-chain entropies at fixed effective size z = hL

    Same basis as fit_cft_halfchain; the coefficients become c(z), d(z), f(z).

    Args:
        samples: (L, S) pairs, each generated with h = z/L
        K: Luttinger parameter
        z: Effective size, recorded in the result
        condition_warning: Condition estimate above which the result is flagged

    Returns:
        FitResult: coefficients c_z, d_z, f_z
    """
    x, y = _as_arrays(samples)
    if np.any(x < 1):
        raise InvalidParameterError("Chain sizes must be positive")
    _check_identifiable(x, 4, "L")
    result = _solve(FitModel(Z_FAMILY, K=K), x, y, condition_warning)
    if z is not None:
        result.parameters["z"] = float(z)
    return result


def evaluate_model(result: FitResult, x) -> np.ndarray:
    """Entropies predicted by a fitted model at sizes x."""
    params = result.parameters
    model = FitModel(result.model_id, K=params.get("K", 1.0), n=params.get("n", 1.0),
                     L=params.get("L"))
    names = COEFFICIENT_NAMES[result.model_id]
    coefficients = np.array([
        model.charge_to_slope(result.coefficients[names[0]]),
        result.coefficients[names[1]],
        result.coefficients[names[2]],
    ])
    return model.design(np.atleast_1d(x)) @ coefficients


def f_n_analytic(n: float) -> float:
    """
    Oscillation amplitude f_n of the Renyi entropy

    f_1 = 1 by definition. Otherwise 2/(1-n) Gamma(1/2 + 1/2n) / Gamma(1/2 - 1/2n).

    Raises:
        GammaPoleError: when 1/2 - 1/2n is a non-positive integer (n = 1/3, 1/5, ...)
    """
    if not np.isfinite(n) or n <= 0:
        raise InvalidParameterError(f"Renyi order must be positive, got {n!r}")
    if n == 1:
        return 1.0
    return 2.0 / (1.0 - n) * gamma(0.5 + 0.5 / n) / gamma(0.5 - 0.5 / n)


def _read_frame(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, comment="#")
    except FileNotFoundError as e:
        raise InvalidParameterError(f"Sample file not found: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InvalidParameterError(f"Malformed sample file {path}: {e}") from e


def _single_value(frame: pd.DataFrame, column: str, path: str):
    values = frame[column].unique()
    if len(values) != 1:
        raise InvalidParameterError(
            f"{path} mixes several {column} values {sorted(values.tolist())}; filter it first",
            details={"column": column},
        )
    return values[0]


def load_samples_csv(path: str, model_id: str, z: Optional[float] = None,
                     n: Optional[float] = None, method: str = "exact") -> SampleSet:
    """
    Read fit samples from a profile or sweep CSV

    Block scaling reads columns ell, S (and L, n); the other models read L, S.
    Rows may be narrowed down by z, n and method when those columns exist.

    Args:
        path: CSV file, comment lines starting with '#'
        model_id: Model the samples are meant for
        z: Keep rows with this effective size
        n: Keep rows with this Renyi order
        method: Keep rows computed with this method

    Returns:
        SampleSet: samples plus the model context found in the file
    """
    if model_id not in MODEL_IDS:
        raise InvalidParameterError(f"Unknown fit model {model_id!r}")
    frame = _read_frame(path)

    x_column = "ell" if model_id == BLOCK_SCALING else "L"
    required = {x_column, "S"} | ({"L"} if model_id == BLOCK_SCALING else set())
    missing = sorted(required - set(frame.columns))
    if missing:
        raise InvalidParameterError(f"{path} lacks columns {missing}",
                                    details={"columns": list(frame.columns)})

    if z is not None and "z" in frame.columns:
        frame = frame[np.isclose(frame["z"].astype(float), z)]
    if n is not None and "n" in frame.columns:
        frame = frame[np.isclose(frame["n"].astype(float), n)]
    if "method" in frame.columns:
        frame = frame[frame["method"] == method]
    if frame.empty:
        raise InvalidParameterError(f"No samples left in {path} after filtering")

    try:
        x = pd.to_numeric(frame[x_column]).to_numpy(dtype=float)
        y = pd.to_numeric(frame["S"]).to_numpy(dtype=float)
    except (ValueError, TypeError) as e:
        raise InvalidParameterError(f"Non-numeric samples in {path}: {e}") from e

    sample_set = SampleSet(model_id=model_id, samples=list(zip(x.tolist(), y.tolist())))
    if "n" in frame.columns:
        sample_set.n = float(_single_value(frame, "n", path))
    if model_id == BLOCK_SCALING:
        sample_set.L = int(_single_value(frame, "L", path))
    if model_id == Z_FAMILY and "z" in frame.columns:
        sample_set.z = float(_single_value(frame, "z", path))
    return sample_set


def fit_samples(sample_set: SampleSet, K: float = 1.0,
                condition_warning: float = DEFAULT_CONFIG["condition_warning"]) -> FitResult:
    """Dispatch a sample set to the fit of its model."""
    if sample_set.model_id == CFT_HALF:
        return fit_cft_halfchain(sample_set.samples, K=K, condition_warning=condition_warning)
    if sample_set.model_id == BLOCK_SCALING:
        return fit_block_scaling(sample_set.samples, sample_set.L, n=sample_set.n, K=K,
                                 condition_warning=condition_warning)
    return fit_z_family(sample_set.samples, K=K, z=sample_set.z,
                        condition_warning=condition_warning)
