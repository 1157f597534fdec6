"""Static-imperfection model of the quantum computer hardware.

The hardware is a linear chain of qubits with a time-independent Hamiltonian

    H_s = sum_i (Delta0 + delta_i) sigma_z_i + sum_<i,i+1> J_i sigma_x_i sigma_x_{i+1}

with open boundaries.  Detunings ``delta_i`` are uniform on
``[-delta/2, delta/2]`` and couplings uniform on ``[-J, J]``.  Gates are
instantaneous and perfect; between consecutive gates the register evolves
freely for a time ``tau_g`` under ``H_s``, i.e. by
``E = exp(-1j*H_s*tau_g)``.  Only the products ``eps = delta*tau_g`` and
``rho = J*tau_g`` matter, so ``tau_g = 1`` by default.

The mean splitting ``Delta0`` is fixed to zero: the uniform precession it
generates is assumed removed by refocusing, and the model lives in the
refocused frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractError, NumericError
from .qcore import StateVector, apply_gate_inplace
from .sawtooth import GateSequence

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class ImperfectionParams:
    """Disorder amplitudes of one hardware instance family.

    ``delta`` is the full width of the detuning distribution, ``coupling``
    the half width of the coupling distribution (named J in the glossary).
    """

    delta: float
    coupling: float = 0.0
    tau_g: float = 1.0

    def __post_init__(self):
        if self.delta < 0 or self.coupling < 0:
            raise ConfigurationError("disorder amplitudes must be >= 0")
        if self.tau_g <= 0:
            raise ConfigurationError("tau_g must be > 0")

    @property
    def eps(self) -> float:
        return self.delta * self.tau_g

    @property
    def rho(self) -> float:
        return self.coupling * self.tau_g


@dataclass(frozen=True)
class DisorderRealization:
    """One draw of per-qubit detunings and nearest-neighbor couplings."""

    deltas: np.ndarray      # shape (n_q,), in [-delta/2, delta/2]
    couplings: np.ndarray   # shape (n_q - 1,), in [-J, J]
    seed: tuple             # (master_seed, index) reproducibility token

    @property
    def n_q(self) -> int:
        return len(self.deltas)


def sample_disorder(n_q: int, params: ImperfectionParams, master_seed: int,
                    index) -> DisorderRealization:
    """Uniform disorder draw, a deterministic function of
    ``(master_seed, index)``.  ``index`` may be an int or a tuple of ints.

    The unit draws are made first and scaled by the amplitudes, so the same
    seed yields linearly scaled realizations across amplitudes (used by the
    parametric level-flow output).
    """
    key = (index,) if isinstance(index, int) else tuple(index)
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=key)
    rng = np.random.Generator(np.random.Philox(ss))
    deltas = params.delta * rng.uniform(-0.5, 0.5, n_q)
    couplings = params.coupling * rng.uniform(-1.0, 1.0, max(n_q - 1, 0))
    return DisorderRealization(deltas, couplings, (master_seed, key))


def sigma_z_field_diagonal(deltas: np.ndarray) -> np.ndarray:
    """Diagonal of ``sum_i delta_i sigma_z_i`` in the computational basis."""
    n_q = len(deltas)
    m = np.arange(1 << n_q)
    h = np.zeros(1 << n_q)
    for i in range(1, n_q + 1):
        alpha = (m >> (n_q - i)) & 1
        h += deltas[i - 1] * (1 - 2 * alpha)
    return h


def build_static_hamiltonian(r: DisorderRealization,
                             delta0: float = 0.0) -> np.ndarray:
    """Dense real-symmetric N x N matrix of the hardware Hamiltonian."""
    n_q = r.n_q
    N = 1 << n_q
    m = np.arange(N)
    H = np.zeros((N, N))
    H[m, m] = sigma_z_field_diagonal(r.deltas + delta0)
    for i in range(1, n_q):
        mask = (1 << (n_q - i)) | (1 << (n_q - i - 1))
        H[m, m ^ mask] += r.couplings[i - 1]
    return H


@dataclass
class InterGatePropagator:
    """``E = exp(-1j*H_s*tau_g)``, either as a pure phase diagonal (the
    coupling-free fast path) or as a dense unitary with the eigensystem of
    ``H_s`` cached."""

    tau_g: float
    phases: np.ndarray | None = None        # diagonal path
    matrix: np.ndarray | None = None        # dense path
    eigenvalues: np.ndarray | None = None
    eigenvectors: np.ndarray | None = None

    @property
    def is_diagonal(self) -> bool:
        return self.phases is not None

    @property
    def dim(self) -> int:
        arr = self.phases if self.is_diagonal else self.matrix
        return arr.shape[0]

    def apply_inplace(self, arr: np.ndarray) -> np.ndarray:
        """Multiply ``arr`` (shape (N,) or (N, M)) by E; may reuse or
        replace the buffer, callers must use the return value."""
        if self.is_diagonal:
            arr *= self.phases if arr.ndim == 1 else self.phases[:, None]
            return arr
        return self.matrix @ arr

    def dense(self) -> np.ndarray:
        if self.is_diagonal:
            return np.diag(self.phases)
        return self.matrix


def make_propagator(H_s: np.ndarray, tau_g: float) -> InterGatePropagator:
    """Exponentiate the hardware Hamiltonian once per realization.

    Diagonal ``H_s`` (no couplings) short-circuits to an O(N) phase vector;
    otherwise a dense eigen-decomposition is computed and cached.
    """
    H_s = np.asarray(H_s)
    herm = np.abs(H_s - H_s.conj().T).max() if H_s.size else 0.0
    if herm > HERMITICITY_TOL:
        raise ContractError(f"H_s not Hermitian: residual {herm:.2e}")
    diag = np.real(np.diag(H_s))
    if not np.any(H_s - np.diag(diag)):
        return InterGatePropagator(tau_g, phases=np.exp(-1j * diag * tau_g))
    try:
        w, V = np.linalg.eigh(H_s)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolve of H_s failed: {exc}") from exc
    E = (V * np.exp(-1j * w * tau_g)) @ V.conj().T
    resid = np.abs(E @ E.conj().T - np.eye(len(w))).max()
    if resid > 1e-10:
        raise NumericError(f"propagator unitarity residual {resid:.2e}")
    return InterGatePropagator(tau_g, matrix=E, eigenvalues=w, eigenvectors=V)


def diagonal_propagator(r: DisorderRealization,
                        tau_g: float) -> InterGatePropagator:
    """Coupling-free propagator built without materializing H_s densely."""
    if np.any(r.couplings):
        raise ContractError("diagonal path requires zero couplings")
    h = sigma_z_field_diagonal(r.deltas)
    return InterGatePropagator(tau_g, phases=np.exp(-1j * h * tau_g))


def run_perturbed_iteration(state: StateVector, seq: GateSequence,
                            E: InterGatePropagator) -> StateVector:
    """One map iteration on imperfect hardware: each gate of ``seq`` in
    order, followed by one inter-gate propagation.  Exactly
    ``3*n_q**2 + n_q`` propagator applications, none before the first gate.
    """
    if E.dim != state.dim:
        raise ContractError(
            f"propagator dim {E.dim} != state dim {state.dim}")
    out = state.copy()
    amp = out.amp
    for g in seq.gates:
        apply_gate_inplace(amp, g, state.n_q)
        amp = E.apply_inplace(amp)
    out.amp = amp
    return out
