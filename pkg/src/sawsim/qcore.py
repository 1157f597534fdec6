"""Complex statevector storage and elementary gate kernels.

Basis convention, shared by every module in this package: a register of
``n_q`` qubits stores ``N = 2**n_q`` complex amplitudes.  Basis index ``m``
encodes the angle grid point ``theta_m = 2*pi*m/N`` through the binary
expansion ``theta = 2*pi*sum_i alpha_i 2**(-i)``, so qubit ``i`` (1-based)
carries the bit of weight ``2**(n_q - i)`` in ``m``; qubit 1 is the most
significant bit.

Gates are one of

* ``Hadamard(q)``
* ``ControlledPhase(control, target, angle)`` with diagonal
  ``exp(1j*angle)`` on states where both qubits are 1,
* ``PairPhase(i, j, strength, offset_i, offset_j)`` with diagonal
  ``exp(1j*strength*(alpha_i*2**-i + offset_i)*(alpha_j*2**-j + offset_j))``;
  ``i == j`` degenerates to a one-qubit phase (``alpha**2 == alpha``).

All kernels act in O(N) per gate and accept either a single state (shape
``(N,)``) or a stack of column states (shape ``(N, M)``), which is how the
Floquet builder applies one gate to every basis state at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError

_SQRT1_2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class Hadamard:
    q: int


@dataclass(frozen=True)
class ControlledPhase:
    control: int
    target: int
    angle: float


@dataclass(frozen=True)
class PairPhase:
    i: int
    j: int
    strength: float
    offset_i: float
    offset_j: float


Gate = Union[Hadamard, ControlledPhase, PairPhase]


@dataclass
class StateVector:
    """A pure state of ``n_q`` qubits: ``amp[m]`` is the amplitude of basis
    state ``m`` (qubit 1 = most significant bit)."""

    n_q: int
    amp: np.ndarray

    def __post_init__(self):
        if self.n_q < 1:
            raise ConfigurationError(f"need n_q >= 1, got {self.n_q}")
        self.amp = np.asarray(self.amp, dtype=np.complex128)
        if self.amp.shape != (1 << self.n_q,):
            raise ConfigurationError(
                f"amplitude array has shape {self.amp.shape}, "
                f"expected ({1 << self.n_q},)")

    @classmethod
    def basis(cls, n_q: int, index: int = 0) -> "StateVector":
        amp = np.zeros(1 << n_q, dtype=np.complex128)
        amp[index] = 1.0
        return cls(n_q, amp)

    @classmethod
    def random(cls, n_q: int, rng: np.random.Generator) -> "StateVector":
        N = 1 << n_q
        amp = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        return cls(n_q, amp / np.linalg.norm(amp))

    @property
    def dim(self) -> int:
        return 1 << self.n_q

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def copy(self) -> "StateVector":
        return StateVector(self.n_q, self.amp.copy())


def _check_qubit(q: int, n_q: int) -> None:
    if not 1 <= q <= n_q:
        raise ConfigurationError(f"qubit index {q} outside [1, {n_q}]")


def _qubit_bits(q: int, n_q: int) -> np.ndarray:
    """0/1 value of qubit ``q`` for every basis index."""
    m = np.arange(1 << n_q)
    return (m >> (n_q - q)) & 1


def gate_diagonal(g: Gate, n_q: int) -> np.ndarray | None:
    """Length-N diagonal of ``g`` if it is a diagonal gate, else None."""
    if isinstance(g, Hadamard):
        _check_qubit(g.q, n_q)
        return None
    if isinstance(g, ControlledPhase):
        _check_qubit(g.control, n_q)
        _check_qubit(g.target, n_q)
        both = _qubit_bits(g.control, n_q) & _qubit_bits(g.target, n_q)
        return np.exp(1j * g.angle * both)
    if isinstance(g, PairPhase):
        _check_qubit(g.i, n_q)
        _check_qubit(g.j, n_q)
        fi = _qubit_bits(g.i, n_q) * 2.0 ** -g.i + g.offset_i
        fj = _qubit_bits(g.j, n_q) * 2.0 ** -g.j + g.offset_j
        return np.exp(1j * g.strength * fi * fj)
    raise ConfigurationError(f"unknown gate {g!r}")


def apply_hadamard_inplace(arr: np.ndarray, q: int, n_q: int) -> None:
    """Hadamard on qubit ``q``, applied to the row index of ``arr``.

    ``arr`` has shape ``(N,)`` or ``(N, M)``; mutated in place.
    """
    b = n_q - q
    pre = arr.shape[0] >> (b + 1)
    view = arr.reshape(pre, 2, 1 << b, -1)
    a0 = view[:, 0].copy()
    a1 = view[:, 1].copy()
    view[:, 0] = (a0 + a1) * _SQRT1_2
    view[:, 1] = (a0 - a1) * _SQRT1_2


def apply_gate_inplace(arr: np.ndarray, g: Gate, n_q: int) -> None:
    """Apply ``g`` to the row index of ``arr`` (shape (N,) or (N, M))."""
    if isinstance(g, Hadamard):
        _check_qubit(g.q, n_q)
        apply_hadamard_inplace(arr, g.q, n_q)
        return
    d = gate_diagonal(g, n_q)
    if arr.ndim == 1:
        arr *= d
    else:
        arr *= d[:, None]


def apply_gate(state: StateVector, g: Gate) -> StateVector:
    """Return ``g`` applied to ``state``; the input is left untouched."""
    out = state.copy()
    apply_gate_inplace(out.amp, g, state.n_q)
    return out


def gate_matrix(g: Gate, n_q: int) -> np.ndarray:
    """Dense N x N unitary of ``g``, equal to its action on all basis states."""
    N = 1 << n_q
    M = np.eye(N, dtype=np.complex128)
    apply_gate_inplace(M, g, n_q)
    return M


# ---------------------------------------------------------------------------
# quantum Fourier transform
# ---------------------------------------------------------------------------

def qft_gates(n_q: int, inverse: bool = False) -> list[Gate]:
    """Swap-free QFT gate sequence: n_q Hadamards plus n_q(n_q-1)/2
    controlled phases.

    The forward product equals ``P_rev @ F`` where ``F`` is the DFT matrix
    with kernel ``exp(+2j*pi*m*n/N)/sqrt(N)`` and ``P_rev`` the bit-reversal
    permutation; the inverse sequence multiplies to ``F^-1 @ P_rev``.  The
    reversal is undone by index relabeling (`bit_reversal_permutation`), not
    by swap gates, so later gate blocks simply address reversed qubits.
    """
    gates: list[Gate] = []
    for q in range(1, n_q + 1):
        gates.append(Hadamard(q))
        for d in range(2, n_q - q + 2):
            gates.append(ControlledPhase(q + d - 1, q, 2.0 * np.pi / (1 << d)))
    if inverse:
        gates = [
            ControlledPhase(g.control, g.target, -g.angle)
            if isinstance(g, ControlledPhase) else g
            for g in reversed(gates)
        ]
    return gates


def bit_reversal_permutation(n_q: int) -> np.ndarray:
    """Index permutation reversing the qubit order of basis labels."""
    N = 1 << n_q
    perm = np.zeros(N, dtype=np.intp)
    for m in range(N):
        r = 0
        for b in range(n_q):
            r |= ((m >> b) & 1) << (n_q - 1 - b)
        perm[m] = r
    return perm


def qft(state: StateVector, inverse: bool = False) -> StateVector:
    """Discrete Fourier transform of the register.

    Forward maps the theta representation to the momentum representation
    with kernel ``exp(+2j*pi*m*n/N)/sqrt(N)``; ``inverse=True`` applies the
    conjugate transform.
    """
    n_q = state.n_q
    perm = bit_reversal_permutation(n_q)
    out = state.copy()
    if inverse:
        out.amp = out.amp[perm]
        for g in qft_gates(n_q, inverse=True):
            apply_gate_inplace(out.amp, g, n_q)
    else:
        for g in qft_gates(n_q):
            apply_gate_inplace(out.amp, g, n_q)
        out.amp = out.amp[perm]
    return out


def dft_matrix(n_q: int) -> np.ndarray:
    """Dense DFT matrix ``F[m, n] = exp(+2j*pi*m*n/N)/sqrt(N)``."""
    N = 1 << n_q
    m = np.arange(N)
    return np.exp((2j * np.pi / N) * np.outer(m, m)) / np.sqrt(N)
