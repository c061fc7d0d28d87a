"""Single-photon BB84 reference model: the symmetric attack as a qubit channel.

The optimal symmetric eavesdropping interaction is fully characterized by its
induced parameters (F, D, V) with F + D = 1 and V = F - D; the explicit
two-qubit probe never needs to be constructed.  Bob's marginal after the
attack mixes the transmitted state with its basis complement, F rho_i +
D rho_(1-i), and the coherence surviving in the conjugate basis equals V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PLUS",
    "CROSS",
    "QubitState",
    "SymmetricAttack",
    "bb84_ket",
    "bb84_state",
    "attack_channel_bob",
    "bob_conditionals",
    "eve_conditionals",
    "visibility_of",
]

_TOL = 1e-12

PLUS = "+"
CROSS = "x"

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


@dataclass(frozen=True)
class QubitState:
    """2x2 density matrix, validated Hermitian, unit-trace and PSD."""

    matrix: np.ndarray

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {matrix.shape}")
        if np.max(np.abs(matrix - matrix.conj().T)) > _TOL:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(matrix).real - 1.0) > _TOL or abs(np.trace(matrix).imag) > _TOL:
            raise ValueError("density matrix must have unit trace")
        if np.min(np.linalg.eigvalsh(matrix)) < -_TOL:
            raise ValueError("density matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", matrix)


@dataclass(frozen=True)
class SymmetricAttack:
    """Induced channel parameters of the symmetric attack.

    F is the fidelity of Bob's marginal, D = 1 - F the disturbance and
    V = F - D the surviving coherence; F in [1/2, 1] covers everything from
    no attack (V = 1) to full measurement (V = 0).
    """

    fidelity: float
    disturbance: float
    visibility: float

    def __init__(self, fidelity, disturbance, visibility):
        if abs(fidelity + disturbance - 1.0) > _TOL:
            raise ValueError("fidelity + disturbance must equal 1")
        if abs(visibility - (fidelity - disturbance)) > _TOL:
            raise ValueError("visibility must equal fidelity - disturbance")
        if not 0.5 - _TOL <= fidelity <= 1.0 + _TOL:
            raise ValueError(f"fidelity must lie in [1/2, 1], got {fidelity!r}")
        object.__setattr__(self, "fidelity", float(fidelity))
        object.__setattr__(self, "disturbance", float(disturbance))
        object.__setattr__(self, "visibility", float(visibility))

    @classmethod
    def from_visibility(cls, visibility: float) -> "SymmetricAttack":
        if not 0.0 <= visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {visibility!r}")
        return cls(0.5 * (1.0 + visibility), 0.5 * (1.0 - visibility), visibility)


def bb84_ket(basis: str, bit: int) -> np.ndarray:
    """State vector of the four BB84 signals in computational coordinates."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if basis == PLUS:
        return np.array([1.0, 0.0]) if bit == 0 else np.array([0.0, 1.0])
    if basis == CROSS:
        sign = 1.0 if bit == 0 else -1.0
        return np.array([1.0, sign]) / math.sqrt(2.0)
    raise ValueError(f"basis must be '+' or 'x', got {basis!r}")


def bb84_state(basis: str, bit: int) -> QubitState:
    ket = bb84_ket(basis, bit)
    return QubitState(np.outer(ket, ket.conj()))


def _match_bb84_bit(state: QubitState, basis: str) -> int:
    for bit in (0, 1):
        if np.max(np.abs(state.matrix - bb84_state(basis, bit).matrix)) < 1e-9:
            return bit
    raise ValueError(f"input is not a BB84 basis state of basis {basis!r}")


def attack_channel_bob(state: QubitState, basis: str, attack: SymmetricAttack) -> QubitState:
    """Bob's marginal after the symmetric attack: F rho_i + D rho_(1-i).

    The input must be one of the four BB84 states; the output is diagonal in
    the transmission basis with eigenvalues {F, D}.
    """
    bit = _match_bb84_bit(state, basis)
    same = bb84_state(basis, bit).matrix
    flipped = bb84_state(basis, 1 - bit).matrix
    return QubitState(attack.fidelity * same + attack.disturbance * flipped)


def bob_conditionals(attack: SymmetricAttack) -> np.ndarray:
    """P(j|i) for Bob's standard measurement: (1 + V)/2 on the diagonal."""
    f, d = attack.fidelity, attack.disturbance
    return np.array([[f, d], [d, f]])


def eve_conditionals(attack: SymmetricAttack) -> np.ndarray:
    """P(j|i) for Eve's optimal probe measurement: (1 +- sqrt(1 - V^2))/2."""
    v = attack.visibility
    gain = math.sqrt(max(0.0, 1.0 - v * v))
    c, e = 0.5 * (1.0 + gain), 0.5 * (1.0 - gain)
    return np.array([[c, e], [e, c]])


def visibility_of(state: QubitState, basis: str) -> float:
    """Coherence of a state transmitted in ``basis``: twice the off-diagonal
    magnitude in the complementary basis.

    Inverts the attack channel: visibility_of(attack_channel_bob(rho, A),
    basis) recovers A.visibility.
    """
    if basis == CROSS:
        m = state.matrix
    elif basis == PLUS:
        m = _HADAMARD @ state.matrix @ _HADAMARD
    else:
        raise ValueError(f"basis must be '+' or 'x', got {basis!r}")
    return 2.0 * abs(m[0, 1])
