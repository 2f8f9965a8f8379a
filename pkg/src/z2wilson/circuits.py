"""Gate-level circuit representation, executor, census, and text export.

A circuit acts on the link register (qubits 0 .. n_links-1) plus ancilla
and matter qubits appended above it.  Four gate kinds exist:

    PauliExp(P, theta)                  e^{i theta P}
    ControlledPauliExp(c, basis, P, t)  e^{i t P} on the designated control
                                        branch ("z": spin-up, "x-": |->)
    Measure(q)                          projective Z measurement
    ResetAncilla(q, bit)                measure, then flip to the target bit

Builders may also record an exact scalar ``global_phase`` (compensations
that are not worth a gate) and a ``phase_log`` of phases their gate
sequences imprint on the transported component of the state; the executor
applies the global phase, so circuit equality against direct operator
construction is exact, not just up-to-phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import Lattice
from .statevec import (PauliString, StateVector, _bit_set, _compress_above,
                       _qubit_blocks, _single_qubit_exp,
                       controlled_pauli_exp_inplace, pauli_exp_inplace)


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class PauliExp:
    string: PauliString
    theta: float


@dataclass(frozen=True)
class ControlledPauliExp:
    control: int
    basis: str          # "z" (fires on spin-up) or "x-" (fires on |->)
    string: PauliString
    theta: float

    def __post_init__(self):
        if self.basis not in ("z", "x-"):
            raise CircuitError(f"unknown control basis {self.basis!r}")
        if self.control in self.string.support:
            raise CircuitError(
                f"control {self.control} overlaps gate support")


@dataclass(frozen=True)
class Measure:
    qubit: int


@dataclass(frozen=True)
class ResetAncilla:
    qubit: int
    target_bit: int

    def __post_init__(self):
        if self.target_bit not in (0, 1):
            raise CircuitError(f"reset target must be 0 or 1")


Gate = PauliExp | ControlledPauliExp | Measure | ResetAncilla


@dataclass
class Circuit:
    """Gate list over links plus allocated work qubits.

    ``ancilla_init[q]`` is the computational bit each work qubit starts in
    (0 = spin-up).  Builders emit gates; execution happens in
    :func:`run_circuit`.
    """

    n_link_qubits: int
    gates: list[Gate] = field(default_factory=list)
    ancilla_init: dict[int, int] = field(default_factory=dict)
    ancilla_roles: dict[int, str] = field(default_factory=dict)
    matter_qubit_map: dict[int, int] = field(default_factory=dict)
    global_phase: float = 0.0
    phase_log: list[tuple[str, complex]] = field(default_factory=list)

    @property
    def n_qubits(self) -> int:
        return self.n_link_qubits + len(self.ancilla_init)

    @property
    def ancilla_count(self) -> int:
        return len(self.ancilla_init)

    def alloc_ancilla(self, initial_bit: int = 0, role: str = "ancilla") -> int:
        q = self.n_qubits
        self.ancilla_init[q] = int(initial_bit)
        self.ancilla_roles[q] = role
        return q

    def add(self, gate: Gate) -> None:
        top = max((q for q, _ in self._gate_support(gate)), default=0)
        if top >= self.n_qubits:
            raise CircuitError(f"gate touches qubit {top} outside register "
                               f"of {self.n_qubits}")
        self.gates.append(gate)

    @staticmethod
    def _gate_support(gate: Gate):
        if isinstance(gate, PauliExp):
            return [(q, ax) for q, ax in gate.string.terms]
        if isinstance(gate, ControlledPauliExp):
            return [(gate.control, "C")] + list(gate.string.terms)
        return [(gate.qubit, "M")]

    def add_phase(self, phase_radians: float) -> None:
        self.global_phase += phase_radians

    def log_phase(self, label: str, value: complex) -> None:
        self.phase_log.append((label, complex(value)))

    def net_logged_phase(self) -> complex:
        out = 1.0 + 0.0j
        for _, value in self.phase_log:
            out *= value
        return out


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def extend_with_ancillas(link_sv: StateVector, circuit: Circuit) -> StateVector:
    """Tensor the declared ancilla basis states above the link register."""
    if link_sv.n_qubits != circuit.n_link_qubits:
        raise CircuitError(
            f"link register mismatch: state has {link_sv.n_qubits}, circuit "
            f"expects {circuit.n_link_qubits}")
    n_total = circuit.n_qubits
    offset = 0
    for q, bit in circuit.ancilla_init.items():
        if bit:
            offset |= 1 << q
    amps = np.zeros(1 << n_total, dtype=np.complex128)
    base = 1 << link_sv.n_qubits
    amps[offset: offset + base] = link_sv.amps
    return StateVector(n_total, amps)


def _measure_bit(amps: np.ndarray, qubit: int, n: int, rng) -> int:
    is_one = _bit_set(n, qubit)
    p1 = float(np.sum(np.abs(amps[is_one]) ** 2))
    if p1 < 1e-12:
        outcome = 0
    elif p1 > 1 - 1e-12:
        outcome = 1
    elif rng is None:
        raise CircuitError(
            f"measurement of qubit {qubit} is probabilistic (p1={p1:.3g}) "
            "and no RNG was provided")
    else:
        outcome = int(rng.random() < p1)
    keep = is_one if outcome else ~is_one
    amps[~keep] = 0.0
    norm = np.sqrt(p1 if outcome else 1.0 - p1)
    amps /= norm
    return outcome


def _run_controlled_group(amps: np.ndarray, gates: list[ControlledPauliExp],
                          n: int) -> None:
    """Apply a run of controlled gates sharing one (control, basis).

    The controlled branch is extracted once, the whole inner sequence runs
    on the compressed half-register, and the branch is written back; this
    is gate-for-gate identical to applying each controlled gate alone.
    """
    control, basis = gates[0].control, gates[0].basis
    if len(gates) == 1:
        controlled_pauli_exp_inplace(amps, control, basis, gates[0].string,
                                     gates[0].theta, n)
        return
    if basis == "x-":
        _single_qubit_exp(amps, control, "Y", -np.pi / 4, n)
    view = _qubit_blocks(amps, n, control)[:, 0]
    sub = np.ascontiguousarray(view).reshape(-1)
    for gate in gates:
        pauli_exp_inplace(sub, _compress_above(gate.string, control),
                          gate.theta, n - 1)
    view[...] = sub.reshape(view.shape)
    if basis == "x-":
        _single_qubit_exp(amps, control, "Y", +np.pi / 4, n)


def run_circuit(circuit: Circuit, link_sv: StateVector,
                rng: np.random.Generator | None = None
                ) -> tuple[StateVector, dict[int, int]]:
    """Run the gate list on link_sv extended with the declared ancillas.

    Returns the final full-register state (global phase applied) and the
    measurement outcomes keyed by gate position.  Consecutive controlled
    gates sharing a control and basis are applied through one branch
    extraction (a pure execution detail; the unitary is unchanged).
    """
    sv = extend_with_ancillas(link_sv, circuit)
    n = sv.n_qubits
    outcomes: dict[int, int] = {}
    gates = circuit.gates
    gi = 0
    while gi < len(gates):
        gate = gates[gi]
        if isinstance(gate, PauliExp):
            pauli_exp_inplace(sv.amps, gate.string, gate.theta, n)
            gi += 1
        elif isinstance(gate, ControlledPauliExp):
            run = [gate]
            while (gi + len(run) < len(gates)
                   and isinstance(gates[gi + len(run)], ControlledPauliExp)
                   and gates[gi + len(run)].control == gate.control
                   and gates[gi + len(run)].basis == gate.basis):
                run.append(gates[gi + len(run)])
            _run_controlled_group(sv.amps, run, n)
            gi += len(run)
        elif isinstance(gate, Measure):
            outcomes[gi] = _measure_bit(sv.amps, gate.qubit, n, rng)
            gi += 1
        elif isinstance(gate, ResetAncilla):
            bit = _measure_bit(sv.amps, gate.qubit, n, rng)
            if bit != gate.target_bit:
                pauli_exp_inplace(sv.amps, PauliString({gate.qubit: "X"}),
                                  np.pi / 2, n)
                sv.amps *= -1j   # undo the iX phase: net is a plain flip
            outcomes[gi] = bit
            gi += 1
        else:  # pragma: no cover
            raise CircuitError(f"unknown gate {gate!r}")
    if circuit.global_phase:
        sv.amps *= np.exp(1j * circuit.global_phase)
    return sv, outcomes


def link_register_block(sv: StateVector, circuit: Circuit,
                        ancilla_bits: dict[int, int]) -> np.ndarray:
    """Amplitude block of the link register at fixed ancilla bits."""
    offset = 0
    for q, bit in ancilla_bits.items():
        if bit:
            offset |= 1 << q
    base = 1 << circuit.n_link_qubits
    return sv.amps[offset: offset + base].copy()


def marginal_bit_probability(sv: StateVector, qubit: int, bit: int) -> float:
    sel = _bit_set(sv.n_qubits, qubit)
    if bit == 0:
        sel = ~sel
    return float(np.sum(np.abs(sv.amps[sel]) ** 2))


# ---------------------------------------------------------------------------
# census, gauge check, text export
# ---------------------------------------------------------------------------

def circuit_stats(circuit: Circuit) -> dict[str, int]:
    """Deterministic gate census by kind plus total."""
    counts = {"pauli_exp": 0, "controlled_pauli_exp": 0, "measure": 0,
              "reset": 0}
    for gate in circuit.gates:
        if isinstance(gate, PauliExp):
            counts["pauli_exp"] += 1
        elif isinstance(gate, ControlledPauliExp):
            counts["controlled_pauli_exp"] += 1
        elif isinstance(gate, Measure):
            counts["measure"] += 1
        else:
            counts["reset"] += 1
    counts["total"] = sum(counts.values())
    return counts


def star_commutation_report(circuit: Circuit, lattice: Lattice
                            ) -> tuple[int, list[str]]:
    """Symbolic gauge check over pure link-register gates.

    Every gate supported entirely on the link register must commute with
    every vertex star string.  Gates that touch ancilla or matter qubits
    realize gauge-invariant blocks only in composition and are skipped
    here.  Returns (number of gates checked, failure descriptions).
    """
    stars = [PauliString({li: "X" for li in lattice.star(v)})
             for v in range(lattice.n_vertices)]
    checked = 0
    failures: list[str] = []
    link_set = set(range(lattice.n_links))
    for gi, gate in enumerate(circuit.gates):
        if not isinstance(gate, PauliExp):
            continue
        if not gate.string.support <= link_set:
            continue
        checked += 1
        for v, star in enumerate(stars):
            if not gate.string.commutes_with(star):
                failures.append(
                    f"gate {gi} ({gate.string}) anticommutes with star {v}")
    return checked, failures


_AXIS_OUT = {"X": "X", "Y": "Y", "Z": "Z"}


def _string_fields(p: PauliString) -> str:
    return " ".join(f"{q}:{_AXIS_OUT[ax]}" for q, ax in p.terms)


def circuit_to_text(circuit: Circuit) -> str:
    """Line-oriented export: PEXP / CPEXP / MEASURE / RESET plus a census
    footer in comment lines."""
    lines = []
    for q, bit in circuit.ancilla_init.items():
        lines.append(f"RESET {q} {bit}")
    for gate in circuit.gates:
        if isinstance(gate, PauliExp):
            lines.append(f"PEXP {gate.theta:.17g} {_string_fields(gate.string)}"
                         .rstrip())
        elif isinstance(gate, ControlledPauliExp):
            basis = "Z" if gate.basis == "z" else "X-"
            lines.append(f"CPEXP {gate.control} {basis} {gate.theta:.17g} "
                         f"{_string_fields(gate.string)}".rstrip())
        elif isinstance(gate, Measure):
            lines.append(f"MEASURE {gate.qubit}")
        else:
            lines.append(f"RESET {gate.qubit} {gate.target_bit}")
    stats = circuit_stats(circuit)
    lines.append(f"# census pauli_exp={stats['pauli_exp']} "
                 f"controlled_pauli_exp={stats['controlled_pauli_exp']} "
                 f"measure={stats['measure']} reset={stats['reset']} "
                 f"total={stats['total']}")
    if circuit.global_phase:
        lines.append(f"# global_phase {circuit.global_phase:.17g}")
    return "\n".join(lines) + "\n"
