"""
Brute-force many-body oracle

Builds the rainbow Hamiltonian in the fixed particle-number Fock space of a
small chain (2L <= 12 sites), diagonalizes it densely and computes block
entropies from reduced density matrices. Used to cross-check the
correlation-matrix results.

Conventions: bit i of an occupation mask is site i; fermionic operators pick
up the Jordan-Wigner sign (-1)^(number of occupied sites to the left).
The same bit layout is qiskit's little-endian qubit order, so site i is
qubit i when states are handed to qiskit.quantum_info.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse
from qiskit.quantum_info import Statevector, partial_trace
from scipy.special import xlogy

from utils.chain_model import ChainSpec, coupling_profile
from utils.config import DEFAULT_CONFIG
from utils.entanglement import Block
from utils.errors import (DegenerateGroundStateError, InvalidParameterError,
                          NumericalConsistencyError, OracleCapError)

logger = logging.getLogger(__name__)

MAX_SITES = 12
NORM_TOL = 1e-12


@dataclass(frozen=True)
class FockBasis:
    """
    Occupation masks of 2L sites with exactly L fermions

    Attributes:
        L: Half the number of sites, also the particle number
        masks: Masks in ascending (lexicographic) order
    """

    L: int
    masks: Tuple[int, ...]

    @classmethod
    def half_filled(cls, L: int) -> "FockBasis":
        if 2 * L > MAX_SITES:
            raise OracleCapError(f"Oracle is capped at {MAX_SITES} sites, got 2L={2 * L}",
                                 details={"L": L, "max_sites": MAX_SITES})
        masks = sorted(sum(1 << s for s in sites) for sites in combinations(range(2 * L), L))
        return cls(L=L, masks=tuple(masks))

    @property
    def n_sites(self) -> int:
        return 2 * self.L

    @property
    def dimension(self) -> int:
        return len(self.masks)

    def index(self) -> Dict[int, int]:
        return {mask: i for i, mask in enumerate(self.masks)}


@dataclass
class ManyBodyState:
    """Unit-norm amplitude vector over a FockBasis."""

    amplitudes: np.ndarray
    basis: FockBasis
    energy: Optional[float] = None

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        if self.amplitudes.shape != (self.basis.dimension,):
            raise InvalidParameterError("Amplitude vector does not match the basis dimension")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > NORM_TOL:
            raise NumericalConsistencyError(f"State is not normalized: norm {norm:.15g}",
                                            details={"norm": norm})

    def to_statevector(self) -> Statevector:
        """Embed into the full 2^(2L) qubit space."""
        full = np.zeros(1 << self.basis.n_sites, dtype=complex)
        full[list(self.basis.masks)] = self.amplitudes
        return Statevector(full)


@dataclass(frozen=True)
class FockHamiltonian:
    matrix: scipy.sparse.csr_matrix
    basis: FockBasis
    spec: ChainSpec


def _string_sign(mask: int, site: int) -> int:
    return -1 if bin(mask & ((1 << site) - 1)).count("1") % 2 else 1


def apply_creation(mask: int, site: int) -> Optional[Tuple[int, int]]:
    """c+_site on a mask: (sign, new mask), or None when the site is occupied."""
    if mask >> site & 1:
        return None
    return _string_sign(mask, site), mask | (1 << site)


def apply_annihilation(mask: int, site: int) -> Optional[Tuple[int, int]]:
    if not mask >> site & 1:
        return None
    return _string_sign(mask, site), mask & ~(1 << site)


def apply_hop(mask: int, to_site: int, from_site: int) -> Optional[Tuple[int, int]]:
    """c+_to c_from on a mask; the sign is the parity of occupied sites strictly between."""
    removed = apply_annihilation(mask, from_site)
    if removed is None:
        return None
    added = apply_creation(removed[1], to_site)
    if added is None:
        return None
    return removed[0] * added[0], added[1]


def build_hamiltonian(spec: ChainSpec, config: Optional[dict] = None) -> FockHamiltonian:
    """
    Many-body rainbow Hamiltonian at half filling

    Args:
        spec: Chain specification, 2L <= 12
        config: Run configuration (underflow guard)

    Returns:
        FockHamiltonian: sparse real symmetric matrix with its basis
    """
    config = config or DEFAULT_CONFIG
    basis = FockBasis.half_filled(spec.L)
    profile = coupling_profile(spec, underflow_exponent=config["underflow_exponent"])
    index = basis.index()

    rows, cols, data = [], [], []
    for bond, J in enumerate(profile.bonds):
        for column, mask in enumerate(basis.masks):
            for to_site, from_site in ((bond, bond + 1), (bond + 1, bond)):
                hop = apply_hop(mask, to_site, from_site)
                if hop is None:
                    continue
                sign, target = hop
                rows.append(index[target])
                cols.append(column)
                data.append(-0.5 * J * sign)

    matrix = scipy.sparse.coo_matrix((data, (rows, cols)),
                                     shape=(basis.dimension, basis.dimension)).tocsr()
    logger.debug("Oracle Hamiltonian L=%d h=%g: dimension %d, %d entries",
                 spec.L, spec.h, basis.dimension, matrix.nnz)
    return FockHamiltonian(matrix=matrix, basis=basis, spec=spec)


def ground_state(H: FockHamiltonian, tol: float = DEFAULT_CONFIG["fermi_degeneracy_tol"]) -> ManyBodyState:
    """
    Lowest eigenvector by dense diagonalization

    Raises:
        DegenerateGroundStateError: when the two lowest levels are closer than tol * J0
    """
    dense = H.matrix.toarray()
    if H.basis.dimension == 1:
        return ManyBodyState(np.ones(1), H.basis, energy=float(dense[0, 0]))

    energies, vectors = scipy.linalg.eigh(dense, subset_by_index=[0, 1])
    if energies[1] - energies[0] < tol * H.spec.J0:
        raise DegenerateGroundStateError(
            f"Degenerate many-body ground state: splitting {energies[1] - energies[0]:.3g}",
            details={"L": H.spec.L, "h": H.spec.h, "energies": energies.tolist()},
        )
    vector = vectors[:, 0]
    pivot = int(np.argmax(np.abs(vector)))
    vector = vector * np.sign(vector[pivot]) / np.linalg.norm(vector)
    return ManyBodyState(vector, H.basis, energy=float(energies[0]))


def correlations(state: ManyBodyState) -> np.ndarray:
    """<c+_i c_j> for all site pairs, by applying every hop to the state."""
    n_sites = state.basis.n_sites
    index = state.basis.index()
    C = np.zeros((n_sites, n_sites))
    for column, mask in enumerate(state.basis.masks):
        amplitude = state.amplitudes[column]
        if amplitude == 0.0:
            continue
        for i in range(n_sites):
            for j in range(n_sites):
                hop = apply_hop(mask, i, j)
                if hop is not None:
                    C[i, j] += state.amplitudes[index[hop[1]]] * hop[0] * amplitude
    return C


def reduced_spectrum(state: ManyBodyState, B: Block) -> np.ndarray:
    """Eigenvalues of the reduced density matrix of a left-edge block."""
    n_sites = state.basis.n_sites
    B.validate(n_sites)
    ell = len(B)
    if B.sites != tuple(range(ell)):
        raise InvalidParameterError(
            "Oracle supports contiguous blocks at the left edge only",
            details={"sites": list(B.sites)},
        )
    if ell == n_sites:
        return np.ones(1)

    rho = partial_trace(state.to_statevector(), list(range(ell, n_sites)))
    return np.linalg.eigvalsh(np.real_if_close(rho.data))


def reduced_entropy(state: ManyBodyState, B: Block, n: float = 1.0) -> float:
    """
    Entropy of a left-edge block from its reduced density matrix

    Args:
        state: Many-body state
        B: Block of sites 0..l-1
        n: Renyi order, 1 for von Neumann

    Returns:
        float: Entropy in nats
    """
    if not np.isfinite(n) or n <= 0:
        raise InvalidParameterError(f"Invalid Renyi order {n!r}")
    weights = np.clip(reduced_spectrum(state, B), 0.0, None)
    if n == 1:
        return float(-np.sum(xlogy(weights, weights)))
    return float(np.log(np.sum(weights ** n)) / (1.0 - n))


def rainbow_state(L: int, signs: Optional[Sequence[int]] = None) -> ManyBodyState:
    """
    Valence bond state of concentric pairs (L-k, L-1+k), k = 1..L

    Bond k is created by (c+_{L-k} + s_k c+_{L-1+k}) / sqrt(2), innermost first.
    By default s_k alternates +, -, +, ... starting at the centre.

    Args:
        L: Half the number of sites
        signs: Override of the bond signs, innermost first

    Returns:
        ManyBodyState: The normalized state
    """
    basis = FockBasis.half_filled(L)
    signs = [1 if k % 2 else -1 for k in range(1, L + 1)] if signs is None else list(signs)
    if len(signs) != L or any(s not in (1, -1) for s in signs):
        raise InvalidParameterError("Need one sign of +1 or -1 per bond")

    amplitudes = {0: 1.0}
    for k, sign in enumerate(signs, start=1):
        updated: Dict[int, float] = {}
        for mask, amplitude in amplitudes.items():
            for site, weight in ((L - k, 1.0), (L - 1 + k, float(sign))):
                created = apply_creation(mask, site)
                if created is None:
                    continue
                string_sign, target = created
                updated[target] = updated.get(target, 0.0) + string_sign * weight * amplitude / math.sqrt(2.0)
        amplitudes = updated

    index = basis.index()
    vector = np.zeros(basis.dimension)
    for mask, amplitude in amplitudes.items():
        vector[index[mask]] = amplitude
    return ManyBodyState(vector, basis)


def overlap(a: ManyBodyState, b: ManyBodyState) -> float:
    """Fidelity |<a|b>|^2."""
    if a.basis.masks != b.basis.masks:
        raise InvalidParameterError("States live in different bases")
    return float(np.dot(a.amplitudes, b.amplitudes) ** 2)
