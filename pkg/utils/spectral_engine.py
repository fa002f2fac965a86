"""
Spectral engine

Symmetric eigensolvers (tridiagonal and dense), the half-filled ground state
of the hopping matrix, its correlation matrix and the single-particle gap.
The tridiagonal kernel is LAPACK's, reached through scipy; the dense solver
reduces to tridiagonal form with Householder reflections first.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
import scipy.linalg
from numpy.linalg import LinAlgError

from utils.chain_model import ChainSpec, TridiagonalMatrix, coupling_profile, hopping_matrix
from utils.config import DEFAULT_CONFIG
from utils.errors import ConvergenceError, FermiDegeneracyError, InvalidParameterError

logger = logging.getLogger(__name__)

# Relative tolerance deciding that two eigenvector components tie in magnitude
SIGN_TIE_TOL = 1e-10


@dataclass(frozen=True)
class SingleBodySpectrum:
    """
    Eigen-decomposition of a hopping matrix

    Attributes:
        energies: Ascending single-particle energies
        modes: Orthonormal eigenvectors, column k belongs to energies[k]
    """

    energies: np.ndarray
    modes: np.ndarray

    @property
    def size(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class OccupiedModes:
    """The set of filled modes and the two levels around the Fermi energy."""

    indices: Tuple[int, ...]
    fermi_gap_info: Tuple[float, float]


@dataclass(frozen=True)
class CorrelationMatrix:
    """Ground-state correlations C_ij = <c+_i c_j>."""

    entries: np.ndarray

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ChainGroundState:
    """Everything exact diagonalization produces for one chain."""

    spec: ChainSpec
    spectrum: SingleBodySpectrum
    occupied: OccupiedModes
    correlations: CorrelationMatrix

    @property
    def gap(self) -> float:
        return single_particle_gap(self.spectrum)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column positive, ties going to the lowest index."""
    magnitudes = np.abs(vectors)
    threshold = magnitudes.max(axis=0) * (1.0 - SIGN_TIE_TOL)
    pivot = np.argmax(magnitudes >= threshold, axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _tridiagonal_kernel(diagonal: np.ndarray, offdiagonal: np.ndarray,
                        compute_vectors: bool = True):
    n = len(diagonal)
    if n == 1:
        return np.array(diagonal, dtype=float), (np.ones((1, 1)) if compute_vectors else None)
    try:
        if compute_vectors:
            return scipy.linalg.eigh_tridiagonal(diagonal, offdiagonal)
        return scipy.linalg.eigh_tridiagonal(diagonal, offdiagonal, eigvals_only=True), None
    except LinAlgError as e:
        details = {"size": n, "lapack_message": str(e)}
        digits = [int(tok) for tok in str(e).replace("=", " ").split() if tok.isdigit()]
        details["index"] = digits[-1] if digits else None
        if n <= 16:
            details["diagonal"] = [float(x) for x in diagonal]
            details["offdiagonal"] = [float(x) for x in offdiagonal]
        raise ConvergenceError(f"Tridiagonal eigensolver failed for a {n}x{n} matrix: {e}",
                               details=details) from e


def eigh_tridiagonal(T: TridiagonalMatrix) -> SingleBodySpectrum:
    """
    Full eigen-decomposition of a symmetric tridiagonal matrix

    Args:
        T: Tridiagonal matrix

    Returns:
        SingleBodySpectrum: Ascending energies and orthonormal modes with a
        deterministic sign convention
    """
    energies, modes = _tridiagonal_kernel(T.diagonal, T.offdiagonal)
    return SingleBodySpectrum(energies=energies, modes=_fix_signs(modes))


def eigh_dense_symmetric(M: np.ndarray, symmetry_tol: float = 1e-10,
                         compute_vectors: bool = True) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Eigen-decomposition of a dense real symmetric matrix

    Householder reduction to tridiagonal form followed by the tridiagonal kernel.

    Args:
        M: Square real matrix, symmetric within symmetry_tol (relative)
        symmetry_tol: Accepted relative asymmetry
        compute_vectors: Return eigenvectors as well

    Returns:
        Tuple: (ascending eigenvalues, orthonormal eigenvectors or None)
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidParameterError(f"Expected a non-empty square matrix, got shape {M.shape}")
    scale = float(np.max(np.abs(M))) or 1.0
    asymmetry = float(np.max(np.abs(M - M.T)))
    if asymmetry > symmetry_tol * scale:
        raise InvalidParameterError(f"Matrix is not symmetric (max asymmetry {asymmetry:.3g})",
                                    details={"asymmetry": asymmetry})
    M = 0.5 * (M + M.T)

    if M.shape[0] <= 2:
        # already tridiagonal
        diagonal, offdiagonal, Q = np.diag(M).copy(), np.diag(M, -1).copy(), None
    elif compute_vectors:
        H, Q = scipy.linalg.hessenberg(M, calc_q=True)
        diagonal, offdiagonal = np.diag(H).copy(), 0.5 * (np.diag(H, -1) + np.diag(H, 1))
    else:
        H = scipy.linalg.hessenberg(M)
        diagonal, offdiagonal, Q = np.diag(H).copy(), 0.5 * (np.diag(H, -1) + np.diag(H, 1)), None

    eigenvalues, vectors = _tridiagonal_kernel(diagonal, offdiagonal, compute_vectors)
    if not compute_vectors:
        return eigenvalues, None
    if Q is not None:
        vectors = Q @ vectors
    return eigenvalues, _fix_signs(vectors)


def ground_state_occupation(spectrum: SingleBodySpectrum, L: int, energy_scale: float = 1.0,
                            tol: float = DEFAULT_CONFIG["fermi_degeneracy_tol"]) -> OccupiedModes:
    """
    Fill the L lowest modes of a 2L-site chain

    Args:
        spectrum: Spectrum with ascending energies
        L: Number of fermions (half the number of sites)
        energy_scale: Coupling scale J0 the tolerance is measured in
        tol: Relative Fermi-level degeneracy tolerance

    Returns:
        OccupiedModes: indices of the filled modes and the Fermi-level pair

    Raises:
        FermiDegeneracyError: when the levels L and L+1 cannot be told apart
    """
    if spectrum.size != 2 * L:
        raise InvalidParameterError(f"Spectrum has {spectrum.size} levels, expected 2L={2 * L}",
                                    details={"size": spectrum.size, "L": L})
    below, above = float(spectrum.energies[L - 1]), float(spectrum.energies[L])
    if above - below < tol * energy_scale:
        raise FermiDegeneracyError(
            f"Fermi level is degenerate: gap {above - below:.3g} < {tol * energy_scale:.3g}",
            details={"L": L, "below": below, "above": above, "tol": tol * energy_scale},
        )
    return OccupiedModes(indices=tuple(range(L)), fermi_gap_info=(below, above))


def correlation_matrix(spectrum: SingleBodySpectrum, occupied: OccupiedModes) -> CorrelationMatrix:
    """C_ij = sum over occupied k of v_ki v_kj (modes are real)."""
    filled = spectrum.modes[:, list(occupied.indices)]
    entries = filled @ filled.T
    entries = 0.5 * (entries + entries.T)
    entries.setflags(write=False)
    return CorrelationMatrix(entries=entries)


def single_particle_gap(spectrum: SingleBodySpectrum) -> float:
    """Distance between the two levels around half filling."""
    L = spectrum.size // 2
    return float(spectrum.energies[L] - spectrum.energies[L - 1])


def solve_chain(spec: ChainSpec, config: Optional[dict] = None) -> ChainGroundState:
    """
    Exact diagonalization of a rainbow chain at half filling

    Args:
        spec: Chain specification
        config: Run configuration (tolerances), defaults when omitted

    Returns:
        ChainGroundState: spectrum, occupation and correlation matrix
    """
    config = config or DEFAULT_CONFIG
    profile = coupling_profile(spec, underflow_exponent=config["underflow_exponent"])
    spectrum = eigh_tridiagonal(hopping_matrix(spec, profile))
    occupied = ground_state_occupation(spectrum, spec.L, energy_scale=spec.J0,
                                       tol=config["fermi_degeneracy_tol"])
    logger.debug("Solved chain L=%d h=%g: gap %.6g", spec.L, spec.h, single_particle_gap(spectrum))
    return ChainGroundState(spec=spec, spectrum=spectrum, occupied=occupied,
                            correlations=correlation_matrix(spectrum, occupied))


def spectrum_table(spectrum: SingleBodySpectrum, occupied: Optional[OccupiedModes] = None) -> pd.DataFrame:
    """Spectrum as a table with columns k, energy, occupied (0/1) and gap."""
    filled = set(occupied.indices) if occupied is not None else set()
    return pd.DataFrame({
        "k": np.arange(spectrum.size),
        "energy": spectrum.energies,
        "occupied": [1 if k in filled else 0 for k in range(spectrum.size)],
        "gap": single_particle_gap(spectrum),
    })
