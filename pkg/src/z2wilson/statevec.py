"""Dense statevector engine: Pauli strings, their exponentials, and controlled gates.

Amplitudes are stored as a flat complex array of length 2**n_qubits with
qubit 0 as the least significant bit of the index.  Spin convention:
bit 0 is spin-up (sigma_3 eigenvalue +1), bit 1 is spin-down.

All gates are applied through closed-form mask kernels: a Pauli string P
acts on a basis index k as

    P|k> = phase * i**nY * (-1)**popcount(k & zmask) |k ^ xmask>

where xmask collects X/Y qubits and zmask collects Z/Y qubits, and an
exponential e^{i theta P} is cos(theta)*I + i*sin(theta)*P exactly (P**2 = I
whenever the phase is +-1).  No matrix exponentiation, no series truncation.

The kernels accept either a single vector (2**n,) or a stack of column
vectors (2**n, k); the second form is used to push whole operator bases
through a gate sequence in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AXES = ("X", "Y", "Z")

# single-qubit products a*b -> (axis or None, phase)
_PAULI_MUL = {
    ("X", "X"): (None, 1), ("Y", "Y"): (None, 1), ("Z", "Z"): (None, 1),
    ("X", "Y"): ("Z", 1j), ("Y", "X"): ("Z", -1j),
    ("Y", "Z"): ("X", 1j), ("Z", "Y"): ("X", -1j),
    ("Z", "X"): ("Y", 1j), ("X", "Z"): ("Y", -1j),
}

_VALID_PHASES = (1, -1, 1j, -1j)


class PauliStringError(ValueError):
    """Malformed Pauli string or use outside its register."""


@dataclass(frozen=True)
class PauliString:
    """Signed tensor product of single-qubit Pauli operators.

    ``terms`` maps qubit index -> axis in {X, Y, Z}; ``phase`` is one of
    {+1, -1, +i, -i}.  The empty string with phase +1 is the identity.
    Instances are immutable and hashable.
    """

    terms: tuple[tuple[int, str], ...]
    phase: complex = 1

    def __init__(self, terms, phase=1):
        if isinstance(terms, dict):
            items = sorted(terms.items())
        else:
            items = sorted(terms)
        qubits = [q for q, _ in items]
        if len(set(qubits)) != len(qubits):
            raise PauliStringError(f"duplicate qubit entries in {items}")
        for q, ax in items:
            if q < 0:
                raise PauliStringError(f"negative qubit index {q}")
            if ax not in AXES:
                raise PauliStringError(f"unknown Pauli axis {ax!r}")
        phase = complex(phase)
        if not any(abs(phase - p) < 1e-14 for p in _VALID_PHASES):
            raise PauliStringError(f"phase must be one of +1,-1,+i,-i, got {phase}")
        # snap to the exact unit
        phase = min(_VALID_PHASES, key=lambda p: abs(phase - p))
        object.__setattr__(self, "terms", tuple(items))
        object.__setattr__(self, "phase", phase)

    # -- structure ---------------------------------------------------------

    @property
    def support(self) -> frozenset[int]:
        return frozenset(q for q, _ in self.terms)

    @property
    def weight(self) -> int:
        return len(self.terms)

    def axis_on(self, qubit: int) -> str | None:
        for q, ax in self.terms:
            if q == qubit:
                return ax
        return None

    def is_hermitian(self) -> bool:
        return self.phase in (1, -1)

    def is_identity(self) -> bool:
        return not self.terms and self.phase == 1

    def max_qubit(self) -> int:
        return max((q for q, _ in self.terms), default=-1)

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Operator product self * other with exact phase bookkeeping."""
        a = dict(self.terms)
        b = dict(other.terms)
        phase = self.phase * other.phase
        out = {}
        for q in sorted(set(a) | set(b)):
            if q in a and q in b:
                ax, ph = _PAULI_MUL[(a[q], b[q])]
                phase *= ph
                if ax is not None:
                    out[q] = ax
            else:
                out[q] = a.get(q, b.get(q))
        return PauliString(out, phase)

    def commutes_with(self, other: "PauliString") -> bool:
        """True iff the strings commute (even number of clashing qubits)."""
        a = dict(self.terms)
        clashes = sum(
            1 for q, ax in other.terms if q in a and a[q] != ax
        )
        return clashes % 2 == 0

    def masks(self) -> tuple[int, int, int]:
        """(xmask, zmask, nY) for the kernel action; xmask covers X|Y, zmask Z|Y."""
        xm = zm = ny = 0
        for q, ax in self.terms:
            if ax in ("X", "Y"):
                xm |= 1 << q
            if ax in ("Z", "Y"):
                zm |= 1 << q
            if ax == "Y":
                ny += 1
        return xm, zm, ny

    def __str__(self) -> str:
        body = " ".join(f"{q}:{ax}" for q, ax in self.terms) or "I"
        pre = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        return f"{pre}[{body}]"


def identity_string() -> PauliString:
    return PauliString({})


# ---------------------------------------------------------------------------
# raw array kernels
# ---------------------------------------------------------------------------

def _bit_parity(v: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(v) & 1).astype(np.int8)


# per-register-size index arrays and per-mask sign/flip arrays; the working
# set is a handful of masks per run, so a capped dict is enough
_INDEX_CACHE: dict[int, np.ndarray] = {}
_SIGN_CACHE: dict[tuple[int, int], np.ndarray] = {}
_PERM_CACHE: dict[tuple[int, int], np.ndarray] = {}
_BIT_CACHE: dict[tuple[int, int], np.ndarray] = {}
_CACHE_CAP = 96


def _indices(n_qubits: int) -> np.ndarray:
    if n_qubits not in _INDEX_CACHE:
        _INDEX_CACHE[n_qubits] = np.arange(1 << n_qubits, dtype=np.uint64)
    return _INDEX_CACHE[n_qubits]


def _signs(n_qubits: int, zmask: int) -> np.ndarray:
    key = (n_qubits, zmask)
    if key not in _SIGN_CACHE:
        if len(_SIGN_CACHE) > _CACHE_CAP:
            _SIGN_CACHE.clear()
        par = _bit_parity(_indices(n_qubits) & np.uint64(zmask))
        _SIGN_CACHE[key] = (1.0 - 2.0 * par).astype(np.float64)
    return _SIGN_CACHE[key]


def _perm(n_qubits: int, xmask: int) -> np.ndarray:
    key = (n_qubits, xmask)
    if key not in _PERM_CACHE:
        if len(_PERM_CACHE) > _CACHE_CAP:
            _PERM_CACHE.clear()
        _PERM_CACHE[key] = (_indices(n_qubits) ^ np.uint64(xmask)).astype(np.intp)
    return _PERM_CACHE[key]


def _bit_set(n_qubits: int, qubit: int) -> np.ndarray:
    key = (n_qubits, qubit)
    if key not in _BIT_CACHE:
        if len(_BIT_CACHE) > _CACHE_CAP:
            _BIT_CACHE.clear()
        idx = _indices(n_qubits)
        _BIT_CACHE[key] = ((idx >> np.uint64(qubit)) & np.uint64(1)).astype(bool)
    return _BIT_CACHE[key]


def _expand(arr: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Broadcast a (2**n,) coefficient vector against (2**n,) or (2**n, k)."""
    if vec.ndim == 1:
        return arr
    return arr[:, None]


def pauli_action(amps: np.ndarray, p: PauliString, n_qubits: int) -> np.ndarray:
    """Return P @ amps without modifying amps (axis 0 is the Hilbert index)."""
    xm, zm, ny = p.masks()
    if p.max_qubit() >= n_qubits:
        raise PauliStringError(
            f"string touches qubit {p.max_qubit()} outside register of {n_qubits}"
        )
    scalar = p.phase * (1j) ** ny
    # (P a)[j] = c(j^x) a[j^x]: scale at the source, then gather
    if zm == 0:
        tmp = amps if scalar == 1 else scalar * amps
    else:
        tmp = _expand(_signs(n_qubits, zm), amps) * amps
        if scalar != 1:
            tmp *= scalar
    if xm == 0:
        return tmp.copy() if tmp is amps else tmp
    perm = _perm(n_qubits, xm)
    return tmp[perm] if amps.ndim == 1 else tmp[perm, :]


def pauli_apply_inplace(amps: np.ndarray, p: PauliString, n_qubits: int) -> None:
    amps[:] = pauli_action(amps, p, n_qubits)


def _qubit_blocks(amps: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    """View (hi, 2, lo[, k]): axis 1 indexes the qubit's bit."""
    hi = 1 << (n_qubits - 1 - qubit)
    lo = 1 << qubit
    if amps.ndim == 1:
        return amps.reshape(hi, 2, lo)
    return amps.reshape(hi, 2, lo, amps.shape[1])


def _single_qubit_exp(amps: np.ndarray, qubit: int, axis: str, theta: float,
                      n_qubits: int) -> None:
    """e^{i theta sigma_axis(qubit)}, two half-size passes."""
    c, s = np.cos(theta), np.sin(theta)
    if qubit < 6 and amps.ndim == 1:
        # low qubits interleave badly; let BLAS handle the 2x2 mix
        lo = 1 << qubit
        if axis == "Z":
            m = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
        elif axis == "X":
            m = np.array([[c, 1j * s], [1j * s, c]])
        else:
            m = np.array([[c, s], [-s, c]])
        v = amps.reshape(-1, 2, lo)
        v[:] = np.matmul(m, v)
        return
    v = _qubit_blocks(amps, n_qubits, qubit)
    if axis == "Z":
        v[:, 0] *= np.exp(1j * theta)
        v[:, 1] *= np.exp(-1j * theta)
        return
    a0 = v[:, 0].copy()
    a1 = v[:, 1].copy()
    if axis == "X":
        v[:, 0] = c * a0 + 1j * s * a1
        v[:, 1] = c * a1 + 1j * s * a0
    else:  # Y
        v[:, 0] = c * a0 + s * a1
        v[:, 1] = c * a1 - s * a0


def pauli_exp_inplace(amps: np.ndarray, p: PauliString, theta: float,
                      n_qubits: int) -> None:
    """amps <- e^{i theta P} amps, exact closed form (requires Hermitian P)."""
    if not p.is_hermitian():
        raise PauliStringError("exponent requires a Hermitian string (phase +-1)")
    if p.is_identity():
        amps *= np.exp(1j * theta)
        return
    if p.max_qubit() >= n_qubits:
        raise PauliStringError(
            f"string touches qubit {p.max_qubit()} outside register of {n_qubits}"
        )
    if p.weight == 1:
        (qubit, axis), = p.terms
        _single_qubit_exp(amps, qubit, axis, theta * p.phase.real, n_qubits)
        return
    pa = pauli_action(amps, p, n_qubits)
    amps *= np.cos(theta)
    amps += (1j * np.sin(theta)) * pa


def _compress_above(p: PauliString, qubit: int) -> PauliString:
    """Re-index a string onto the register with ``qubit`` removed."""
    return PauliString({(q if q < qubit else q - 1): ax for q, ax in p.terms},
                       p.phase)


def _exp_on_branch(amps: np.ndarray, control: int, branch_bit: int,
                   p: PauliString, theta: float, n_qubits: int) -> None:
    """e^{i theta P} on the half-space where the control reads branch_bit."""
    view = _qubit_blocks(amps, n_qubits, control)[:, branch_bit]
    sub = np.ascontiguousarray(view)
    flat = sub.reshape(-1) if amps.ndim == 1 else sub.reshape(-1, amps.shape[-1])
    pauli_exp_inplace(flat, _compress_above(p, control), theta, n_qubits - 1)
    view[...] = flat.reshape(view.shape)


def controlled_pauli_exp_inplace(amps: np.ndarray, control: int, basis: str,
                                 p: PauliString, theta: float,
                                 n_qubits: int) -> None:
    """Apply e^{i theta P} on the controlled branch, identity elsewhere.

    basis "z": fires when the control qubit is spin-up (bit 0).
    basis "x-": fires when the control qubit is in |->.
    The control must lie outside the support of P.
    """
    if control in p.support:
        raise PauliStringError(f"control {control} overlaps string support")
    if not 0 <= control < n_qubits:
        raise PauliStringError(f"control {control} outside register")
    if not p.is_hermitian():
        raise PauliStringError("exponent requires a Hermitian string (phase +-1)")
    if basis == "z":
        _exp_on_branch(amps, control, 0, p, theta, n_qubits)
    elif basis == "x-":
        # rotate |-> onto spin-up, fire there, rotate back
        _single_qubit_exp(amps, control, "Y", -np.pi / 4, n_qubits)
        _exp_on_branch(amps, control, 0, p, theta, n_qubits)
        _single_qubit_exp(amps, control, "Y", +np.pi / 4, n_qubits)
    else:
        raise PauliStringError(f"unknown control basis {basis!r}")


# ---------------------------------------------------------------------------
# StateVector
# ---------------------------------------------------------------------------

@dataclass
class StateVector:
    """Normalized dense state over n_qubits.

    Mutation is exclusive: gates rewrite ``amps`` in place.  Norm drift is
    never silently repaired; use :meth:`norm_error` to inspect it.
    """

    n_qubits: int
    amps: np.ndarray
    norm_tolerance: float = 1e-12

    def __post_init__(self):
        if self.amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"amplitude array of shape {self.amps.shape} does not match "
                f"{self.n_qubits} qubits")
        if self.amps.dtype != np.complex128:
            self.amps = self.amps.astype(np.complex128)

    @classmethod
    def zeros(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy(), self.norm_tolerance)

    def norm_error(self) -> float:
        return abs(1.0 - float(np.sum(np.abs(self.amps) ** 2)))


def init_basis(n_qubits: int, bitstring: str) -> StateVector:
    """Computational basis state; bitstring is written qubit n-1 first."""
    if len(bitstring) != n_qubits:
        raise ValueError(
            f"bitstring length {len(bitstring)} != n_qubits {n_qubits}"
        )
    index = int(bitstring, 2)
    sv = StateVector.zeros(n_qubits)
    sv.amps[0] = 0.0
    sv.amps[index] = 1.0
    return sv


def apply_pauli(sv: StateVector, p: PauliString) -> None:
    pauli_apply_inplace(sv.amps, p, sv.n_qubits)


def apply_pauli_exp(sv: StateVector, p: PauliString, theta: float) -> None:
    pauli_exp_inplace(sv.amps, p, theta, sv.n_qubits)


def apply_controlled_pauli_exp(sv: StateVector, control: int, basis: str,
                               p: PauliString, theta: float) -> None:
    controlled_pauli_exp_inplace(sv.amps, control, basis, p, theta, sv.n_qubits)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>; registers must match."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"register mismatch: {a.n_qubits} vs {b.n_qubits}")
    return complex(np.vdot(a.amps, b.amps))


def expect_pauli(sv: StateVector, p: PauliString) -> float:
    """<sv|P|sv> for Hermitian P; imaginary residue beyond 1e-12 is an error."""
    if not p.is_hermitian():
        raise PauliStringError("expectation requires a Hermitian string")
    val = complex(np.vdot(sv.amps, pauli_action(sv.amps, p, sv.n_qubits)))
    if abs(val.imag) > 1e-12:
        raise FloatingPointError(f"non-real expectation {val}")
    return val.real


def reduced_qubit_density(sv: StateVector, qubit: int) -> np.ndarray:
    """2x2 reduced density matrix of one qubit (computational basis)."""
    n = sv.n_qubits
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} outside register")
    lo, hi = qubit, n - qubit - 1
    a = sv.amps.reshape(1 << hi, 2, 1 << lo)
    return np.einsum("iaj,ibj->ab", a, a.conj())


def qubit_purity(sv: StateVector, qubit: int) -> float:
    rho = reduced_qubit_density(sv, qubit)
    return float(np.real(np.trace(rho @ rho)))


def basis_state_fidelity(sv: StateVector, qubit: int, bit: int) -> float:
    """Probability that the given qubit reads ``bit`` (0 = spin-up)."""
    rho = reduced_qubit_density(sv, qubit)
    return float(np.real(rho[bit, bit]))
