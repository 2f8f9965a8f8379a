"""Shared fixtures and independent dense oracles.

The oracle helpers here deliberately avoid the package's kernels: Pauli
strings become explicit Kronecker products and exponentials go through a
Hermitian eigendecomposition, so every comparison against them is a real
cross-check, not a tautology.
"""

import numpy as np
import pytest

from z2wilson.gauge import Z2Model, build_physical_sector, ground_state
from z2wilson.lattice import build_cross

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
S0 = np.eye(2, dtype=complex)
_AXIS = {"X": SX, "Y": SY, "Z": SZ}


def dense_pauli(pauli_string, n_qubits):
    """Kronecker-product matrix of a PauliString (qubit 0 least significant)."""
    ops = dict(pauli_string.terms)
    out = np.array([[1.0]], dtype=complex)
    for q in reversed(range(n_qubits)):
        out = np.kron(out, _AXIS.get(ops.get(q), S0))
    return pauli_string.phase * out


def expm_i_hermitian(h):
    """e^{i h} for Hermitian h via eigendecomposition."""
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(1j * evals)) @ evecs.conj().T


def random_state(n_qubits, rng):
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="session")
def cross_lattice():
    return build_cross()


@pytest.fixture(scope="session")
def cross_model(cross_lattice):
    return Z2Model(cross_lattice, 10.0)


@pytest.fixture(scope="session")
def cross_sector(cross_model):
    return build_physical_sector(cross_model)


@pytest.fixture(scope="session")
def cross_ground(cross_model, cross_sector):
    return ground_state(cross_model, cross_sector)
