"""
Block entanglement entropies from the correlation matrix

The reduced state of a block of a Slater determinant is fixed by the
eigenvalues nu_p of the correlation matrix restricted to the block. Entropies
are in nats.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import xlogy

from utils.chain_model import ChainSpec, effective_size
from utils.config import DEFAULT_CONFIG
from utils.errors import InvalidParameterError, NumericalConsistencyError
from utils.spectral_engine import ChainGroundState, CorrelationMatrix, eigh_dense_symmetric, solve_chain

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Block:
    """A set of sites, given by sorted array indices (need not be contiguous)."""

    sites: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise InvalidParameterError("A block needs at least one site")
        if len(set(sites)) != len(sites):
            raise InvalidParameterError(f"Block has duplicate sites: {sites}")
        if min(sites) < 0:
            raise InvalidParameterError(f"Block has negative site indices: {sites}")
        object.__setattr__(self, "sites", tuple(sorted(sites)))

    def __len__(self) -> int:
        return len(self.sites)

    def validate(self, n_sites: int) -> None:
        if self.sites[-1] >= n_sites:
            raise InvalidParameterError(
                f"Block site {self.sites[-1]} outside a chain of {n_sites} sites",
                details={"sites": list(self.sites), "n_sites": n_sites},
            )

    def complement(self, n_sites: int) -> "Block":
        self.validate(n_sites)
        rest = sorted(set(range(n_sites)) - set(self.sites))
        return Block(tuple(rest))

    def is_contiguous(self) -> bool:
        return self.sites[-1] - self.sites[0] + 1 == len(self.sites)


def left_block(ell: int) -> Block:
    """Sites 0..ell-1."""
    if ell < 1:
        raise InvalidParameterError(f"Block size must be positive, got {ell}")
    return Block(tuple(range(ell)))


def half_chain(L: int) -> Block:
    """Left half of a 2L-site chain."""
    return left_block(L)


@dataclass
class EntropyProfile:
    """
    Entropies of left blocks of growing size

    Attributes:
        ells: Block sizes
        entropies: Entropy of each block, nats
        spec: Chain the profile belongs to
        n: Renyi order (1 for von Neumann)
        method: "exact" or "sdrg"
    """

    ells: np.ndarray
    entropies: np.ndarray
    spec: ChainSpec
    n: float = 1.0
    method: str = "exact"
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def samples(self) -> List[tuple]:
        return list(zip(self.ells.tolist(), self.entropies.tolist()))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "ell": self.ells,
            "S": self.entropies,
            "n": self.n,
            "L": self.spec.L,
            "h": self.spec.h,
            "z": effective_size(self.spec),
        })

    def to_dict(self) -> Dict[str, Any]:
        return {
            "metadata": {"chain": self.spec.to_dict(), "n": self.n, "method": self.method,
                         "units": "nats", **self.metadata},
            "samples": [{"ell": int(ell), "S": float(s)} for ell, s in self.samples],
        }


def block_spectrum(C: CorrelationMatrix, B: Block,
                   validity_window: float = DEFAULT_CONFIG["validity_window"]) -> np.ndarray:
    """
    Eigenvalues of the correlation matrix restricted to a block

    Args:
        C: Correlation matrix of the whole chain
        B: Block of sites
        validity_window: Distance outside [0, 1] tolerated and clamped

    Returns:
        np.ndarray: Ascending nu_p, each within [0, 1]
    """
    B.validate(C.size)
    sites = np.asarray(B.sites)
    restricted = C.entries[np.ix_(sites, sites)]
    nu, _ = eigh_dense_symmetric(restricted, compute_vectors=False)
    if nu[0] < -validity_window or nu[-1] > 1.0 + validity_window:
        raise NumericalConsistencyError(
            f"Block correlation eigenvalues leave [0, 1]: min {nu[0]:.3g}, max {nu[-1]:.3g}",
            details={"min": float(nu[0]), "max": float(nu[-1]), "block_size": len(B)},
        )
    return np.clip(nu, 0.0, 1.0)


def renyi_from_spectrum(nu: np.ndarray, n: float,
                        clamp_eps: float = DEFAULT_CONFIG["clamp_eps"]) -> float:
    """Renyi entropy of order n from block eigenvalues; nu within clamp_eps of 0 or 1 contributes nothing."""
    _check_order(n, allow_one=False)
    nu = np.asarray(nu, dtype=float)
    nu = nu[(nu > clamp_eps) & (nu < 1.0 - clamp_eps)]
    # log(nu^n + (1-nu)^n) without underflow at large n
    terms = np.logaddexp(n * np.log(nu), n * np.log1p(-nu))
    return float(np.sum(terms) / (1.0 - n))


def von_neumann_from_spectrum(nu: np.ndarray) -> float:
    nu = np.asarray(nu, dtype=float)
    return float(-np.sum(xlogy(nu, nu) + xlogy(1.0 - nu, 1.0 - nu)))


def _check_order(n: float, allow_one: bool) -> None:
    if not np.isfinite(n) or n <= 0 or (not allow_one and n == 1):
        raise InvalidParameterError(f"Invalid Renyi order {n!r}", details={"n": str(n)})


def renyi_entropy(C: CorrelationMatrix, B: Block, n: float,
                  clamp_eps: float = DEFAULT_CONFIG["clamp_eps"],
                  validity_window: float = DEFAULT_CONFIG["validity_window"]) -> float:
    """
    Renyi entropy S_n = 1/(1-n) sum_p log[nu_p^n + (1-nu_p)^n]

    Args:
        C: Correlation matrix
        B: Block
        n: Order, n > 0 and n != 1
        clamp_eps: Eigenvalues this close to 0 or 1 are dropped
        validity_window: See block_spectrum

    Returns:
        float: Entropy in nats
    """
    _check_order(n, allow_one=False)
    return renyi_from_spectrum(block_spectrum(C, B, validity_window), n, clamp_eps)


def von_neumann_entropy(C: CorrelationMatrix, B: Block,
                        validity_window: float = DEFAULT_CONFIG["validity_window"]) -> float:
    """Von Neumann entropy -sum_p [nu log nu + (1-nu) log(1-nu)], nats."""
    return von_neumann_from_spectrum(block_spectrum(C, B, validity_window))


def block_entropy(C: CorrelationMatrix, B: Block, n: float = 1.0,
                  config: Optional[dict] = None) -> float:
    """Entropy of order n, dispatching n = 1 to the von Neumann formula."""
    config = config or DEFAULT_CONFIG
    _check_order(n, allow_one=True)
    if n == 1:
        return von_neumann_entropy(C, B, config["validity_window"])
    return renyi_entropy(C, B, n, config["clamp_eps"], config["validity_window"])


def entropy_profile(spec: ChainSpec, n: float = 1.0, ells: Optional[Iterable[int]] = None,
                    config: Optional[dict] = None,
                    ground_state: Optional[ChainGroundState] = None) -> EntropyProfile:
    """
    Entropy of the left blocks of a chain

    Args:
        spec: Chain specification
        n: Renyi order, 1 for von Neumann
        ells: Block sizes, default 1..2L-1
        config: Run configuration
        ground_state: Reuse an existing diagonalization

    Returns:
        EntropyProfile: Samples ordered by block size
    """
    config = config or DEFAULT_CONFIG
    _check_order(n, allow_one=True)
    ground_state = ground_state or solve_chain(spec, config)
    ells = np.arange(1, spec.n_sites) if ells is None else np.asarray(sorted(ells), dtype=int)
    if len(ells) and (ells[0] < 1 or ells[-1] > spec.n_sites):
        raise InvalidParameterError(f"Block sizes must lie in 1..{spec.n_sites}")

    entropies = np.array([
        block_entropy(ground_state.correlations, left_block(int(ell)), n, config) for ell in ells
    ])
    logger.debug("Entropy profile L=%d h=%g n=%g: %d blocks", spec.L, spec.h, n, len(ells))
    return EntropyProfile(ells=ells, entropies=entropies, spec=spec, n=float(n), method="exact")


def half_chain_entropy(spec: ChainSpec, n: float = 1.0, config: Optional[dict] = None) -> float:
    """Entropy of the left half of the chain."""
    ground_state = solve_chain(spec, config or DEFAULT_CONFIG)
    return block_entropy(ground_state.correlations, half_chain(spec.L), n, config)


def entropy_samples_by_size(L_values: Sequence[int], h_of_L, n: float = 1.0,
                            J0: float = 1.0, config: Optional[dict] = None) -> List[tuple]:
    """
    Half-chain entropies over chain sizes

    Args:
        L_values: Chain half-sizes
        h_of_L: Callable giving h for each L (constant h, or z/L at fixed z)
        n: Renyi order
        J0: Coupling scale
        config: Run configuration

    Returns:
        List[tuple]: (L, S) pairs in the order of L_values
    """
    return [(int(L), half_chain_entropy(ChainSpec(int(L), float(h_of_L(L)), J0), n, config))
            for L in L_values]
