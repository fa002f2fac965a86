"""
Strong-disorder renormalization group for the free-fermion chain

Repeatedly bonds the two sites joined by the strongest coupling and replaces
the triple (J_L, J_max, J_R) by the effective coupling -J_L J_R / J_max.
Magnitudes are kept in the log domain with a separate sign, so chains whose
couplings underflow in linear form are handled as well.

The effective chain is a doubly linked list of alive couplings with a heap
on log magnitudes; superseded heap entries are skipped when popped.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from utils.chain_model import ChainSpec, CouplingProfile, log_coupling_profile
from utils.entanglement import Block, EntropyProfile
from utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)

BONDING = "bonding"
ANTIBONDING = "antibonding"


@dataclass
class RenormCoupling:
    """A coupling of the current effective chain."""

    log_magnitude: float
    sign: int
    left_site: int
    right_site: int


@dataclass(frozen=True)
class ValenceBond:
    """Two sites locked into a bonding (+) or antibonding (-) pair at a given RG scale."""

    site_a: int
    site_b: int
    bond_type: str
    log_energy_scale: float

    @property
    def sign(self) -> int:
        return 1 if self.bond_type == BONDING else -1

    def to_dict(self) -> Dict[str, Any]:
        return {"a": self.site_a, "b": self.site_b, "type": self.bond_type,
                "log_scale": self.log_energy_scale}


@dataclass
class ValenceBondState:
    """
    Output of the RG: bonds in the order they were established

    Attributes:
        bonds: Valence bonds, RG order
        n_sites: Number of sites covered
        spec: Chain the state was computed for, when known
        warnings: Diagnostics collected while running
    """

    bonds: List[ValenceBond]
    n_sites: int
    spec: Optional[ChainSpec] = None
    warnings: List[str] = field(default_factory=list)

    def partner(self, site: int) -> int:
        for bond in self.bonds:
            if bond.site_a == site:
                return bond.site_b
            if bond.site_b == site:
                return bond.site_a
        raise InvalidParameterError(f"Site {site} not covered by the valence bond state")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": 1,
            "n_sites": self.n_sites,
            "chain": self.spec.to_dict() if self.spec is not None else None,
            "bonds": [bond.to_dict() for bond in self.bonds],
            "warnings": list(self.warnings),
        }


def run_sdrg(profile: CouplingProfile, spec: Optional[ChainSpec] = None) -> ValenceBondState:
    """
    Decimate the strongest coupling until every site is bonded

    Args:
        profile: Couplings of the chain (log magnitudes and signs)
        spec: Chain specification to attach to the result

    Returns:
        ValenceBondState: Bonds in RG order

    Raises:
        InvalidParameterError: for an empty profile
    """
    n_couplings = profile.n_bonds
    if n_couplings == 0:
        raise InvalidParameterError("Strong-disorder RG needs at least one coupling")

    couplings = [
        RenormCoupling(float(profile.log_bonds[i]), int(profile.signs[i]), i, i + 1)
        for i in range(n_couplings)
    ]
    prev = list(range(-1, n_couplings - 1))
    nxt = list(range(1, n_couplings + 1))
    nxt[-1] = -1
    alive = [True] * n_couplings
    version = [0] * n_couplings

    # Max-heap on log magnitude; ties go to the smallest left endpoint
    heap = [(-c.log_magnitude, c.left_site, 0, i) for i, c in enumerate(couplings)]
    heapq.heapify(heap)

    bonds = []
    while heap:
        _, _, entry_version, c = heapq.heappop(heap)
        if not alive[c] or version[c] != entry_version:
            continue

        strongest = couplings[c]
        bonds.append(ValenceBond(
            site_a=strongest.left_site,
            site_b=strongest.right_site,
            bond_type=BONDING if strongest.sign > 0 else ANTIBONDING,
            log_energy_scale=strongest.log_magnitude,
        ))
        alive[c] = False
        p, q = prev[c], nxt[c]

        if p != -1 and q != -1:
            left, right = couplings[p], couplings[q]
            left.log_magnitude = left.log_magnitude + right.log_magnitude - strongest.log_magnitude
            left.sign = -left.sign * right.sign * strongest.sign
            left.right_site = right.right_site
            alive[q] = False
            nxt[p] = nxt[q]
            if nxt[q] != -1:
                prev[nxt[q]] = p
            version[p] += 1
            heapq.heappush(heap, (-left.log_magnitude, left.left_site, version[p], p))
        elif p != -1:
            # right edge: the left neighbour loses its partner site
            alive[p] = False
            if prev[p] != -1:
                nxt[prev[p]] = -1
        elif q != -1:
            alive[q] = False
            if nxt[q] != -1:
                prev[nxt[q]] = -1

    return ValenceBondState(bonds=bonds, n_sites=n_couplings + 1, spec=spec)


def run_sdrg_chain(spec: ChainSpec) -> ValenceBondState:
    """RG on the rainbow chain of spec, flagging results outside the method's validity."""
    vbs = run_sdrg(log_coupling_profile(spec), spec=spec)
    if spec.h == 0.0 and spec.L > 1:
        message = "outside SDRG validity: uniform couplings (h=0), bonds depend on tie-breaking"
        vbs.warnings.append(message)
        logger.warning(message)
    if not is_rainbow(vbs, spec.L):
        vbs.warnings.append("non-rainbow valence bond structure")
    return vbs


def _cut_bonds(vbs: ValenceBondState, sites: Iterable[int]) -> int:
    inside = set(sites)
    return sum(1 for bond in vbs.bonds if (bond.site_a in inside) != (bond.site_b in inside))


def bond_count_entropy(vbs: ValenceBondState, B: Block) -> float:
    """
    Entropy n_B log 2, n_B the number of bonds leaving the block

    Args:
        vbs: Valence bond state
        B: Block of sites

    Returns:
        float: Entropy in nats
    """
    B.validate(vbs.n_sites)
    return _cut_bonds(vbs, B.sites) * LOG2


def is_rainbow(vbs: ValenceBondState, L: int) -> bool:
    """True when every bond joins the mirror sites (L-k, L-1+k), k = 1..L."""
    if vbs.n_sites != 2 * L or len(vbs.bonds) != L:
        return False
    pairs = {(min(b.site_a, b.site_b), max(b.site_a, b.site_b)) for b in vbs.bonds}
    return pairs == {(L - k, L - 1 + k) for k in range(1, L + 1)}


def sdrg_entropy_profile(vbs: ValenceBondState, ells: Optional[Iterable[int]] = None,
                         spec: Optional[ChainSpec] = None, n: float = 1.0) -> EntropyProfile:
    """
    Bond-counting entropies of left blocks

    Every Renyi order gives the same value for a valence bond state; n is
    carried as metadata only.

    Args:
        vbs: Valence bond state
        ells: Block sizes, default 1..2L-1
        spec: Chain specification when vbs does not carry one
        n: Renyi order recorded in the profile

    Returns:
        EntropyProfile: method "sdrg"
    """
    spec = spec or vbs.spec
    if spec is None:
        raise InvalidParameterError("A chain specification is needed to label the profile")
    n_sites = vbs.n_sites
    ells = np.arange(1, n_sites) if ells is None else np.asarray(sorted(ells), dtype=int)
    if len(ells) and (ells[0] < 1 or ells[-1] > n_sites):
        raise InvalidParameterError(f"Block sizes must lie in 1..{n_sites}",
                                    details={"ells": [int(ell) for ell in ells]})

    # bond (a, b), a < b, is cut by every left block of size a+1 .. b
    cuts = np.zeros(n_sites + 2, dtype=int)
    for bond in vbs.bonds:
        a, b = sorted((bond.site_a, bond.site_b))
        cuts[a + 1] += 1
        cuts[b + 1] -= 1
    counts = np.cumsum(cuts)
    return EntropyProfile(ells=ells, entropies=counts[ells] * LOG2, spec=spec, n=float(n),
                          method="sdrg")


def sdrg_gap_estimate(vbs: ValenceBondState) -> float:
    """Energy of the last bond established, exp of its log scale."""
    if not vbs.bonds:
        raise InvalidParameterError("Empty valence bond state")
    return math.exp(vbs.bonds[-1].log_energy_scale)


def bond_naming(bond: ValenceBond) -> str:
    """Bell-pair name of a bond: bonding -> psi+, antibonding -> psi-."""
    return "psi+" if bond.bond_type == BONDING else "psi-"


def render_arcs(vbs: ValenceBondState) -> str:
    """
    ASCII arc diagram: sites on a line, each bond an arc above them

    Nested bonds are drawn lower than the bonds enclosing them. The arc top
    carries B for bonding and A for antibonding.
    """
    n = vbs.n_sites
    spans = sorted(((min(b.site_a, b.site_b), max(b.site_a, b.site_b), b) for b in vbs.bonds),
                   key=lambda item: item[1] - item[0])
    heights = {}
    for a, b, bond in spans:
        inner = [heights[(x, y)] for (x, y) in heights if a < x and y < b]
        heights[(a, b)] = 1 + max(inner, default=0)

    def column(site: int) -> int:
        return 3 * site + 1

    rows = []
    for level in range(max(heights.values(), default=0), 0, -1):
        line = [" "] * (3 * n)
        for a, b, bond in spans:
            height = heights[(a, b)]
            if height > level:
                line[column(a)] = "|"
                line[column(b)] = "|"
            elif height == level:
                line[column(a)] = "+"
                line[column(b)] = "+"
                for col in range(column(a) + 1, column(b)):
                    if line[col] == " ":
                        line[col] = "-"
                line[(column(a) + column(b)) // 2] = "B" if bond.bond_type == BONDING else "A"
        rows.append("".join(line).rstrip())
    rows.append("".join(" o " for _ in range(n)).rstrip())
    return "\n".join(rows)
