"""
Parameter sweeps over chain sizes and inhomogeneities

A sweep is the Cartesian product of L values with either h values or
effective sizes z (h = z/L). Each (L, h, method) point is an independent job
run on a multiprocessing pool; rows are sorted before they are returned so the
output does not depend on completion order. Failed points are reported, never
dropped silently.
"""

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from utils.chain_model import ChainSpec
from utils.config import DEFAULT_CONFIG
from utils.database import log_run_event
from utils.entanglement import block_entropy, half_chain
from utils.errors import InvalidParameterError, RainbowError, UnderflowGuardError
from utils.sdrg import run_sdrg_chain, sdrg_entropy_profile, sdrg_gap_estimate
from utils.spectral_engine import solve_chain

logger = logging.getLogger(__name__)

METHODS = ("exact", "sdrg", "both")
FORMATS = ("csv", "json")
COLUMNS = ["L", "h", "z", "n", "method", "S", "gap"]
UNITS = "S in nats; gap in units of J0; h, z dimensionless"


@dataclass
class SweepConfig:
    """
    What to sweep

    Attributes:
        L_values: Half chain sizes
        h_values: Inhomogeneities (exclusive with z_values)
        z_values: Effective sizes z = hL (exclusive with h_values)
        renyi_orders: Renyi orders, 1 for von Neumann
        method: exact, sdrg or both
        output: Output path, stdout when None
        format: csv or json
        J0: Coupling scale
        workers: Worker processes
    """

    L_values: Sequence[int]
    h_values: Optional[Sequence[float]] = None
    z_values: Optional[Sequence[float]] = None
    renyi_orders: Sequence[float] = (1.0,)
    method: str = "exact"
    output: Optional[str] = None
    format: str = "csv"
    J0: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if not self.L_values:
            raise InvalidParameterError("A sweep needs at least one L value")
        if any(int(L) != L or L < 1 for L in self.L_values):
            raise InvalidParameterError(f"L values must be positive integers: {list(self.L_values)}")
        if (self.h_values is None) == (self.z_values is None):
            raise InvalidParameterError("Give exactly one of h values and z values")
        axis = self.h_values if self.h_values is not None else self.z_values
        if not axis:
            raise InvalidParameterError("The h/z list of a sweep is empty")
        if any(not math.isfinite(v) or v < 0 for v in axis):
            raise InvalidParameterError(f"h/z values must be finite and non-negative: {list(axis)}")
        if not self.renyi_orders or any(not math.isfinite(n) or n <= 0 for n in self.renyi_orders):
            raise InvalidParameterError(f"Invalid Renyi orders: {list(self.renyi_orders)}")
        if self.method not in METHODS:
            raise InvalidParameterError(f"Unknown method {self.method!r}, expected one of {METHODS}")
        if self.format not in FORMATS:
            raise InvalidParameterError(f"Unknown format {self.format!r}, expected one of {FORMATS}")
        if self.workers < 1:
            raise InvalidParameterError("workers must be at least 1")

    @property
    def axis(self) -> str:
        return "h" if self.h_values is not None else "z"

    def methods(self) -> Tuple[str, ...]:
        return ("exact", "sdrg") if self.method == "both" else (self.method,)

    def points(self) -> List["SweepPoint"]:
        points = []
        values = self.h_values if self.h_values is not None else self.z_values
        for value in values:
            for L in sorted(set(int(L) for L in self.L_values)):
                h = float(value) if self.axis == "h" else float(value) / L
                for method in self.methods():
                    points.append(SweepPoint(L=L, h=h, z=h * L, axis_value=float(value), method=method))
        return points

    def check_underflow(self, exponent: float = DEFAULT_CONFIG["underflow_exponent"]) -> None:
        """Reject exact points whose outermost couplings would underflow."""
        if "exact" not in self.methods():
            return
        offending = [(p.L, p.h) for p in self.points()
                     if p.method == "exact" and p.h * (p.L - 1.5) > exponent]
        if offending:
            raise UnderflowGuardError(
                f"{len(offending)} exact sweep points would underflow, first (L, h) = {offending[0]}",
                details={"points": offending[:20]},
            )


@dataclass(frozen=True)
class SweepPoint:
    L: int
    h: float
    z: float
    axis_value: float
    method: str

    def sort_key(self) -> tuple:
        return (self.axis_value, self.L, self.method)

    def to_dict(self) -> Dict[str, Any]:
        return {"L": self.L, "h": self.h, "z": self.z, "method": self.method}


@dataclass
class SweepResult:
    rows: List[Dict[str, Any]]
    failures: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=COLUMNS)

    def to_dict(self) -> Dict[str, Any]:
        return {"units": UNITS, "rows": self.rows, "failures": self.failures}


def _evaluate_point(job: Tuple[SweepPoint, Tuple[float, ...], float, dict]):
    """Worker body: all Renyi orders of one point. Returns (point, rows, error)."""
    point, orders, J0, config = job
    spec = ChainSpec(point.L, point.h, J0)
    try:
        if point.method == "exact":
            ground_state = solve_chain(spec, config)
            gap = ground_state.gap
            entropies = [block_entropy(ground_state.correlations, half_chain(point.L), n, config)
                         for n in orders]
        else:
            vbs = run_sdrg_chain(spec)
            gap = sdrg_gap_estimate(vbs)
            half = float(sdrg_entropy_profile(vbs, ells=[point.L]).entropies[0])
            entropies = [half for _ in orders]
    except RainbowError as e:
        return point, [], e.to_dict()

    rows = [{"L": point.L, "h": point.h, "z": point.z, "n": float(n), "method": point.method,
             "S": S, "gap": gap} for n, S in zip(orders, entropies)]
    return point, rows, None


def run_sweep(sweep: SweepConfig, config: Optional[dict] = None) -> SweepResult:
    """
    Run every point of a sweep

    Args:
        sweep: What to sweep
        config: Run configuration handed to every worker

    Returns:
        SweepResult: rows sorted by (h or z, L, method, n) and the failed points
    """
    config = dict(config or DEFAULT_CONFIG)
    sweep.check_underflow(config["underflow_exponent"])
    orders = tuple(float(n) for n in sweep.renyi_orders)
    jobs = [(point, orders, sweep.J0, config) for point in sweep.points()]

    log_run_event("SWEEP", f"Sweeping {len(jobs)} points over {sweep.axis} with {sweep.workers} workers",
                  metadata={"points": len(jobs), "axis": sweep.axis, "method": sweep.method})

    if sweep.workers > 1 and len(jobs) > 1:
        with Pool(processes=min(sweep.workers, len(jobs))) as pool:
            outcomes = pool.map(_evaluate_point, jobs)
    else:
        outcomes = [_evaluate_point(job) for job in jobs]

    outcomes.sort(key=lambda outcome: outcome[0].sort_key())
    rows, failures = [], []
    for point, point_rows, error in outcomes:
        if error is None:
            rows.extend(sorted(point_rows, key=lambda row: row["n"]))
            continue
        failure = {**point.to_dict(), **error}
        failures.append(failure)
        log_run_event("SWEEP_POINT_FAILED",
                      f"L={point.L} h={point.h:g} ({point.method}): {error['message']}",
                      metadata=failure, level=logging.WARNING)

    return SweepResult(rows=rows, failures=failures)
