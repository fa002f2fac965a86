"""
Rainbow chain model

Defines the inhomogeneous free-fermion chain of 2L sites whose hopping
amplitudes decay exponentially away from the central bond, its coupling
profile and the single-particle (tridiagonal) hopping matrix.

Sites are indexed 0..2L-1 internally. Half-integer labels -L+1/2 .. L-1/2
appear only at input/output boundaries (site_label).
"""

import json
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from utils.config import DEFAULT_CONFIG
from utils.errors import InvalidParameterError, UnderflowGuardError


@dataclass(frozen=True)
class ChainSpec:
    """
    The triple (L, h, J0) defining the lattice model

    Attributes:
        L: Half the number of sites (total sites = 2L)
        h: Inhomogeneity parameter, dimensionless
        J0: Coupling scale of the central bond
    """

    L: int
    h: float
    J0: float = 1.0

    def __post_init__(self):
        if isinstance(self.L, bool) or not isinstance(self.L, (int, np.integer)) or self.L < 1:
            raise InvalidParameterError(f"L must be a positive integer, got {self.L!r}",
                                        details={"L": str(self.L)})
        if not math.isfinite(self.h) or self.h < 0:
            raise InvalidParameterError(f"h must be a finite non-negative real, got {self.h!r}",
                                        details={"h": str(self.h)})
        if not math.isfinite(self.J0) or self.J0 <= 0:
            raise InvalidParameterError(f"J0 must be a positive real, got {self.J0!r}",
                                        details={"J0": str(self.J0)})
        object.__setattr__(self, "L", int(self.L))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "J0", float(self.J0))

    @property
    def n_sites(self) -> int:
        return 2 * self.L

    @property
    def z(self) -> float:
        """Effective size hL, always derived."""
        return effective_size(self)

    def to_dict(self) -> Dict[str, Any]:
        return {"L": self.L, "h": self.h, "J0": self.J0}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ChainSpec":
        try:
            return cls(L=int(data["L"]), h=float(data["h"]), J0=float(data.get("J0", 1.0)))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidParameterError(f"Malformed chain specification: {data!r}") from e

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidParameterError(f"Malformed chain specification JSON: {e}") from e
        if not isinstance(data, dict):
            raise InvalidParameterError("Chain specification JSON must be an object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class CouplingProfile:
    """
    Bond strengths between adjacent sites, bond i joining sites i and i+1

    Attributes:
        log_bonds: log|J| per bond, always available
        bonds: J per bond, None when the linear values would underflow
        signs: sign of each bond (+1 for the rainbow chain)
    """

    log_bonds: np.ndarray
    bonds: Optional[np.ndarray] = None
    signs: Optional[np.ndarray] = None

    def __post_init__(self):
        log_bonds = np.asarray(self.log_bonds, dtype=float)
        log_bonds.setflags(write=False)
        object.__setattr__(self, "log_bonds", log_bonds)
        if self.bonds is not None:
            bonds = np.asarray(self.bonds, dtype=float)
            bonds.setflags(write=False)
            object.__setattr__(self, "bonds", bonds)
        signs = np.ones(len(log_bonds), dtype=int) if self.signs is None else np.asarray(self.signs, dtype=int)
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_bonds(cls, bonds) -> "CouplingProfile":
        """Profile from explicit (non-zero) coupling values."""
        values = np.asarray(bonds, dtype=float)
        if values.ndim != 1 or len(values) == 0:
            raise InvalidParameterError("A coupling profile needs at least one bond")
        if np.any(values == 0) or not np.all(np.isfinite(values)):
            raise InvalidParameterError("Couplings must be finite and non-zero")
        return cls(log_bonds=np.log(np.abs(values)), bonds=values,
                   signs=np.where(values > 0, 1, -1))

    @property
    def n_bonds(self) -> int:
        return len(self.log_bonds)

    @property
    def n_sites(self) -> int:
        return self.n_bonds + 1


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Real symmetric tridiagonal matrix stored by its two diagonals."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def __post_init__(self):
        diagonal = np.asarray(self.diagonal, dtype=float)
        offdiagonal = np.asarray(self.offdiagonal, dtype=float)
        if diagonal.ndim != 1 or offdiagonal.ndim != 1 or len(offdiagonal) != len(diagonal) - 1:
            raise InvalidParameterError(
                "Tridiagonal matrix needs n diagonal and n-1 off-diagonal entries",
                details={"n_diagonal": int(diagonal.size), "n_offdiagonal": int(offdiagonal.size)},
            )
        diagonal.setflags(write=False)
        offdiagonal.setflags(write=False)
        object.__setattr__(self, "diagonal", diagonal)
        object.__setattr__(self, "offdiagonal", offdiagonal)

    @property
    def size(self) -> int:
        return len(self.diagonal)

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diagonal)
                + np.diag(self.offdiagonal, 1)
                + np.diag(self.offdiagonal, -1))


@dataclass(frozen=True)
class RegimeInfo:
    """Area-law violation class of a chain."""

    regime: str
    description: str
    violation: str
    leading_term: str


def site_label(i: int, L: int) -> float:
    """
    Half-integer label of array site i in a chain of 2L sites

    Args:
        i: Array index, 0 <= i < 2L
        L: Half the number of sites

    Returns:
        float: i - L + 1/2
    """
    if L < 1 or not 0 <= i < 2 * L:
        raise InvalidParameterError(f"Site index {i} out of range for 2L={2 * L}",
                                    details={"i": i, "L": L})
    return i - L + 0.5


def bond_distances(L: int) -> np.ndarray:
    """Distance index d of every bond: 0 for the central bond, min(|a|, |a+1|) otherwise."""
    i = np.arange(2 * L - 1)
    d = np.abs(i - (L - 1)) - 0.5
    d[L - 1] = 0.0
    return d


def log_coupling_profile(spec: ChainSpec) -> CouplingProfile:
    """
    Coupling profile in the log domain only

    Never underflows, so it serves strong-disorder RG at any effective size.
    """
    log_bonds = math.log(spec.J0) - spec.h * bond_distances(spec.L)
    return CouplingProfile(log_bonds=log_bonds)


def coupling_profile(spec: ChainSpec,
                     underflow_exponent: float = DEFAULT_CONFIG["underflow_exponent"]) -> CouplingProfile:
    """
    Exponentially decaying coupling profile J0 * exp(-h d)

    Args:
        spec: Chain specification
        underflow_exponent: Largest exponent h*(L-3/2) accepted

    Returns:
        CouplingProfile: Mirror-symmetric profile of 2L-1 bonds

    Raises:
        UnderflowGuardError: when the outermost bonds would underflow
    """
    outer_exponent = spec.h * (spec.L - 1.5)
    if outer_exponent > underflow_exponent:
        raise UnderflowGuardError(
            f"Couplings underflow: h*(L-3/2) = {outer_exponent:.6g} > {underflow_exponent:g}; "
            "use the strong-disorder RG for this chain",
            details={"L": spec.L, "h": spec.h, "exponent": outer_exponent},
        )

    distances = bond_distances(spec.L)
    if spec.h == 0.0:
        bonds = np.full(2 * spec.L - 1, spec.J0)
    else:
        bonds = spec.J0 * np.exp(-spec.h * distances)
    log_bonds = math.log(spec.J0) - spec.h * distances
    return CouplingProfile(log_bonds=log_bonds, bonds=bonds)


def hopping_matrix(spec: ChainSpec, profile: Optional[CouplingProfile] = None) -> TridiagonalMatrix:
    """
    Single-particle hopping matrix of the rainbow Hamiltonian

    Args:
        spec: Chain specification
        profile: Precomputed coupling profile, computed from spec when omitted

    Returns:
        TridiagonalMatrix: zero diagonal, off-diagonal -J/2
    """
    profile = profile if profile is not None else coupling_profile(spec)
    if profile.bonds is None:
        raise UnderflowGuardError("Hopping matrix needs linear couplings",
                                  details=spec.to_dict())
    return TridiagonalMatrix(diagonal=np.zeros(spec.n_sites),
                             offdiagonal=-0.5 * profile.bonds)


def effective_size(spec: ChainSpec) -> float:
    """Effective size z = h L."""
    return spec.h * spec.L


def classify_regime(spec: ChainSpec) -> RegimeInfo:
    """
    Area-law violation class of the chain

    h = 0 is the uniform critical chain; otherwise z = hL < 1 is taken as the
    weak-inhomogeneity (thermal) regime and z >= 1 as the strong one.
    """
    if spec.h == 0.0:
        return RegimeInfo("uniform", "CFT", "logarithmic", "log(L)")
    if effective_size(spec) < 1.0:
        return RegimeInfo("weak", "thermal state", "volumetric", "L")
    return RegimeInfo("strong", "valence bond state", "volumetric", "L")
