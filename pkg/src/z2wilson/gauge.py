"""Pure Z(2) gauge model: Hamiltonian, Gauss-law stars, physical sector.

The Hamiltonian is

    H = - sum_links sigma_1(e)  -  lam * sum_plaq sigma_3 sigma_3 sigma_3 sigma_3

and the Gauss constraint at every vertex is the star of sigma_1 over
incident links with eigenvalue +1.  Everything here works in the electric
(X-diagonal) basis, where a product state is labeled by a bitmask m with
bit i = 1 meaning sigma_1(e_i) = -1.  Stars are diagonal there, so
enumerating the physical sector is an integer parity filter, and the
sector Hamiltonian is a small dense matrix (32 x 32 on the cross):
the electric part is diagonal, each plaquette is the XOR permutation by
its link mask.

Embedding back to the computational (Z) basis is a fast Walsh-Hadamard
transform: |m>_X = 2^{-L/2} sum_z (-1)^{popcount(z & m)} |z>.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import Lattice
from .statevec import PauliString, StateVector, expect_pauli

_MAX_ENUM_QUBITS = 26  # 2**26 index filter is the practical ceiling here


class GaugeError(ValueError):
    pass


class DegenerateGroundStateWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Z2Model:
    lattice: Lattice
    lam: float = 10.0

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise GaugeError(f"coupling must be finite, got {self.lam}")


def star_operator(model: Z2Model, vertex: int) -> PauliString:
    """X on every link incident to the vertex, phase +1."""
    return PauliString({li: "X" for li in model.lattice.star(vertex)})


def plaquette_string(lattice: Lattice, plaq_index: int) -> PauliString:
    """Z Z Z Z on the four links of a plaquette."""
    return PauliString({li: "Z" for li in lattice.plaquettes[plaq_index]})


def _link_mask(links) -> int:
    m = 0
    for li in links:
        m |= 1 << li
    return m


@dataclass(frozen=True)
class PhysicalSector:
    """Joint star eigenspace in the electric basis.

    ``masks[k]`` is the X-configuration bitmask of sector basis state k;
    ``index_of`` inverts it.  ``charges[v]`` is the star eigenvalue at
    vertex v (all +1 for the physical sector); any admissible pattern has
    dim = 2**(n_links - n_vertices + 1).
    """

    n_links: int
    masks: np.ndarray                    # (dim,) uint64, sorted
    index_of: dict[int, int]
    charges: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.masks)

    def contains_mask(self, mask: int) -> bool:
        return int(mask) in self.index_of

    def is_physical(self) -> bool:
        return all(q == 1 for q in self.charges)


def build_physical_sector(model: Z2Model,
                          charges=None) -> PhysicalSector:
    """Enumerate X-basis product states with the given star eigenvalues.

    Default charges are +1 at every vertex (the Gauss-invariant sector).
    The product of all stars is the identity, so admissible patterns carry
    an even number of -1 entries; anything else enumerates empty and is
    rejected.
    """
    lat = model.lattice
    L = lat.n_links
    if charges is None:
        charges = (1,) * lat.n_vertices
    charges = tuple(int(q) for q in charges)
    if len(charges) != lat.n_vertices or any(q not in (1, -1) for q in charges):
        raise GaugeError("charges must be +-1 per vertex")
    if L > _MAX_ENUM_QUBITS:
        raise GaugeError(f"sector enumeration capped at {_MAX_ENUM_QUBITS} links")
    idx = np.arange(1 << L, dtype=np.uint64)
    keep = np.ones(idx.shape, dtype=bool)
    for v in range(lat.n_vertices):
        smask = np.uint64(_link_mask(lat.star(v)))
        want = np.uint64(0 if charges[v] == 1 else 1)
        keep &= (np.bitwise_count(idx & smask) & 1) == want
    masks = idx[keep]
    expected = 1 << (L - lat.n_vertices + 1)
    if len(masks) != expected:
        raise GaugeError(
            f"sector dimension {len(masks)} != 2**(L-V+1) = {expected}; "
            "check lattice connectivity and charge-pattern parity"
        )
    return PhysicalSector(L, masks,
                          {int(m): k for k, m in enumerate(masks)},
                          charges)


# ---------------------------------------------------------------------------
# embedding between the sector and the full 2**L space
# ---------------------------------------------------------------------------

def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along axis 0."""
    out = a.astype(np.complex128, copy=True)
    n = out.shape[0]
    tail = out.shape[1:]
    h = 1
    while h < n:
        out = out.reshape(n // (2 * h), 2, h, *tail)
        x = out[:, 0].copy()
        y = out[:, 1].copy()
        out[:, 0] = x + y
        out[:, 1] = x - y
        out = out.reshape(n, *tail)
        h *= 2
    return out


def embed_sector_coords(sector: PhysicalSector, coords: np.ndarray) -> np.ndarray:
    """Sector coefficients -> full-space amplitudes in the Z basis."""
    L = sector.n_links
    w = np.zeros((1 << L,) + coords.shape[1:], dtype=np.complex128)
    w[sector.masks.astype(np.intp)] = coords
    return fwht(w) / np.sqrt(1 << L)


def project_to_sector(sector: PhysicalSector, amps: np.ndarray) -> np.ndarray:
    """Full-space amplitudes -> sector coefficients (adjoint of embed)."""
    w = fwht(amps) / np.sqrt(1 << sector.n_links)
    return w[sector.masks.astype(np.intp)]


def embed_state(sector: PhysicalSector, coords: np.ndarray) -> StateVector:
    return StateVector(sector.n_links, embed_sector_coords(sector, coords))


# ---------------------------------------------------------------------------
# sector operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorOperator:
    """dim x dim matrix expressed in the PhysicalSector basis."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "SectorOperator") -> "SectorOperator":
        return SectorOperator(self.matrix @ other.matrix)

    def dagger(self) -> "SectorOperator":
        return SectorOperator(self.matrix.conj().T)

    def unitarity_error(self) -> float:
        d = self.dim
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix
                                   - np.eye(d))))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    @classmethod
    def identity(cls, dim: int) -> "SectorOperator":
        return cls(np.eye(dim, dtype=np.complex128))


def hamiltonian_in_sector(model: Z2Model, sector: PhysicalSector,
                          modified_links: frozenset[int] | set[int] = frozenset()
                          ) -> SectorOperator:
    """H + sum_{m in modified} 2 sigma_1(e_m), projected to the sector.

    The net electric coefficient on a modified link is +sigma_1 (the -sigma_1
    in H plus the 2 sigma_1 insertion).
    """
    lat = model.lattice
    L = lat.n_links
    for li in modified_links:
        if not 0 <= li < L:
            raise GaugeError(f"modified link {li} out of range")
    dim = sector.dim
    # electric eigenvalue per link: s_i = +1 when bit i is 0
    masks = sector.masks
    coeff = np.full(L, -1.0)
    for li in modified_links:
        coeff[li] = +1.0
    diag = np.zeros(dim)
    for li in range(L):
        s = 1.0 - 2.0 * ((masks >> np.uint64(li)) & np.uint64(1)).astype(float)
        diag += coeff[li] * s
    h = np.diag(diag).astype(np.complex128)
    for plaq in lat.plaquettes:
        pmask = np.uint64(_link_mask(plaq))
        dest = np.array([sector.index_of[int(m ^ pmask)] for m in masks])
        h[dest, np.arange(dim)] += -model.lam
    return SectorOperator(h)


def spatial_loop_in_sector(sector: PhysicalSector, links) -> SectorOperator:
    """Sector matrix of prod sigma_3 over the given links.

    sigma_3 flips the electric label of its link with unit coefficient, so
    this is the XOR permutation by the link mask.  The link set must have
    even overlap with every star (a closed cycle); otherwise the product
    leaves the sector, which is reported as an error.
    """
    smask = np.uint64(_link_mask(set(links)))
    dim = sector.dim
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for k, m in enumerate(sector.masks):
        target = int(m ^ smask)
        if target not in sector.index_of:
            raise GaugeError(
                "spatial link set is not a closed cycle; sigma_3 product "
                "leaves the physical sector"
            )
        mat[sector.index_of[target], k] = 1.0
    return SectorOperator(mat)


def exact_evolve_in_sector(model: Z2Model, sector: PhysicalSector, tau: float,
                           modified_links: frozenset[int] | set[int] = frozenset()
                           ) -> SectorOperator:
    """e^{-i tau (H + sum 2 sigma_1)} by exact eigendecomposition.

    Valid because H and every sigma_1(e) commute with all stars, so the
    evolution never leaves the sector.
    """
    if not np.isfinite(tau):
        raise GaugeError(f"tau must be finite, got {tau}")
    h = hamiltonian_in_sector(model, sector, modified_links).matrix
    evals, evecs = np.linalg.eigh(h)
    phases = np.exp(-1j * tau * evals)
    return SectorOperator((evecs * phases) @ evecs.conj().T)


def sector_spectrum(model: Z2Model, sector: PhysicalSector) -> np.ndarray:
    h = hamiltonian_in_sector(model, sector).matrix
    return np.linalg.eigvalsh(h)


def ground_state(model: Z2Model, sector: PhysicalSector,
                 gap_tolerance: float = 1e-10) -> tuple[float, StateVector]:
    """Lowest eigenpair of the sector Hamiltonian, embedded in the full space.

    Phase convention: the largest-magnitude full-space amplitude is made
    real positive (lowest index wins ties).  A spectral gap below
    ``gap_tolerance`` raises a DegenerateGroundStateWarning.
    """
    h = hamiltonian_in_sector(model, sector).matrix
    evals, evecs = np.linalg.eigh(h)
    if len(evals) > 1 and evals[1] - evals[0] < gap_tolerance:
        warnings.warn(
            f"ground state degenerate within {gap_tolerance}: "
            f"gap = {evals[1] - evals[0]:.3e}",
            DegenerateGroundStateWarning,
        )
    coords = evecs[:, 0]
    amps = embed_sector_coords(sector, coords)
    k = int(np.argmax(np.abs(amps)))
    ph = amps[k] / abs(amps[k])
    amps = amps / ph
    return float(evals[0]), StateVector(sector.n_links, amps)


def spectral_gap(model: Z2Model, sector: PhysicalSector) -> float:
    evals = sector_spectrum(model, sector)
    return float(evals[1] - evals[0]) if len(evals) > 1 else np.inf


def gauge_violation(sv: StateVector, model: Z2Model) -> float:
    """max over vertices of |1 - <sv| star_v |sv>|.

    Ancilla or matter qubits above the link register must be disentangled
    (caller's responsibility); stars act on link qubits only.
    """
    worst = 0.0
    for v in range(model.lattice.n_vertices):
        val = expect_pauli(sv, star_operator(model, v))
        worst = max(worst, abs(1.0 - val))
    return worst


def sector_basis_dump(sector: PhysicalSector) -> str:
    """Diagnostic dump: one `BASIS <index> <bitmask-hex>` line per state."""
    lines = [f"BASIS {k} {int(m):x}" for k, m in enumerate(sector.masks)]
    return "\n".join(lines) + "\n"
