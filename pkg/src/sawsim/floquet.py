"""Floquet operator construction, diagonalization, and parity blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ContractError, NumericError, ResourceError
from .imperfections import InterGatePropagator
from .qcore import apply_hadamard_inplace, gate_diagonal, Hadamard
from .sawtooth import GateSequence, MapParams, MAX_DENSE_QUBITS

UNITARITY_TOL = 1e-9
DEGENERACY_TOL = 1e-6


@dataclass
class FloquetSpectrum:
    """Quasi-energies sorted ascending on [0, 2*pi), eigenvector columns
    aligned with them, plus solver diagnostics (max norms)."""

    quasi_energies: np.ndarray
    eigenvectors: np.ndarray | None
    unitarity_residual: float
    eigen_residual: float

    @property
    def dim(self) -> int:
        return len(self.quasi_energies)


def _sequence_plan(seq: GateSequence):
    """Per-gate apply plan: ('h', qubit) or ('d', diagonal).  Cached on the
    sequence since diagonals are realization-independent."""
    if seq._plan is None:
        n_q = seq.params.n_q
        plan = []
        for g in seq.gates:
            if isinstance(g, Hadamard):
                plan.append(("h", g.q))
            else:
                plan.append(("d", gate_diagonal(g, n_q)))
        seq._plan = plan
    return seq._plan


def build_floquet(p: MapParams, seq: GateSequence,
                  E: InterGatePropagator | None = None,
                  strategy: str = "matrix") -> np.ndarray:
    """Dense one-iteration operator, column m = iteration applied to basis
    state m.

    strategy "matrix" composes the N x N product by alternating gate and
    propagator multiplications (the production path); "columns" evolves each
    basis state separately through `run_perturbed_iteration` and exists to
    cross-check the composition at small sizes.
    """
    if p.n_q > MAX_DENSE_QUBITS:
        raise ResourceError(
            f"n_q={p.n_q} exceeds the dense-matrix cap {MAX_DENSE_QUBITS}")
    if E is not None and E.dim != p.N:
        raise ContractError(f"propagator dim {E.dim} != N={p.N}")
    if strategy == "columns":
        return _build_columns(p, seq, E)
    if strategy != "matrix":
        raise ContractError(f"unknown strategy {strategy!r}")
    n_q = p.n_q
    M = np.eye(p.N, dtype=np.complex128)
    if E is None:
        for kind, x in _sequence_plan(seq):
            if kind == "h":
                apply_hadamard_inplace(M, x, n_q)
            else:
                M *= x[:, None]
        return M
    for kind, x in _sequence_plan(seq):
        if kind == "h":
            apply_hadamard_inplace(M, x, n_q)
        else:
            M *= x[:, None]
        M = E.apply_inplace(M)
    return M


def _build_columns(p: MapParams, seq: GateSequence,
                   E: InterGatePropagator | None) -> np.ndarray:
    from .imperfections import run_perturbed_iteration
    from .qcore import StateVector

    if E is None:
        E = InterGatePropagator(1.0, phases=np.ones(p.N, dtype=np.complex128))
    U = np.empty((p.N, p.N), dtype=np.complex128)
    for m in range(p.N):
        U[:, m] = run_perturbed_iteration(StateVector.basis(p.n_q, m),
                                          seq, E).amp
    return U


def unitarity_residual(U: np.ndarray) -> float:
    N = U.shape[0]
    return float(np.abs(U.conj().T @ U - np.eye(N)).max())


def diagonalize(U: np.ndarray, vectors: bool = True) -> FloquetSpectrum:
    """Full eigensystem of a unitary via complex Schur form.

    For a normal matrix the Schur factor is diagonal, so the Schur basis is
    an orthonormal eigenbasis even inside degenerate clusters (any
    orthonormal basis of a degenerate subspace is acceptable there).
    """
    U = np.asarray(U, dtype=np.complex128)
    u_res = unitarity_residual(U)
    if u_res > 1e-6:
        raise ContractError(f"input not unitary: residual {u_res:.2e}")
    if not vectors:
        try:
            ev = np.linalg.eigvals(U)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"eigensolver failed: {exc}") from exc
        lam = np.sort(np.angle(ev) % (2.0 * np.pi))
        return FloquetSpectrum(lam, None, u_res, np.nan)
    try:
        Tm, Z = scipy.linalg.schur(U, output="complex")
    except Exception as exc:  # LAPACK zgees non-convergence
        raise NumericError(f"Schur decomposition failed: {exc}") from exc
    ev = np.diag(Tm)
    lam = np.angle(ev) % (2.0 * np.pi)
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    V = Z[:, order]
    resid = float(np.linalg.norm(U @ V - V * np.exp(1j * lam)[None, :],
                                 axis=0).max())
    if resid > 1e-8:
        raise NumericError(f"eigen residual {resid:.2e} above contract")
    return FloquetSpectrum(lam, V, u_res, resid)


# ---------------------------------------------------------------------------
# parity symmetry blocks
# ---------------------------------------------------------------------------

def parity_permutation(n_q: int) -> np.ndarray:
    """Index map of the momentum reflection ``n -> -n (mod N)``; the same
    permutation represents the reflection in the angle basis."""
    N = 1 << n_q
    return (-np.arange(N)) % N


def parity_basis(n_q: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of the even/odd reflection subspaces.

    Even combinations (m with -m), including the self-paired m = 0 and
    m = N/2, span N/2 + 1 states; odd combinations span N/2 - 1.
    """
    N = 1 << n_q
    s = 1.0 / np.sqrt(2.0)
    even = np.zeros((N, N // 2 + 1))
    odd = np.zeros((N, N // 2 - 1))
    even[0, 0] = 1.0
    even[N // 2, 1] = 1.0
    for col, m in enumerate(range(1, N // 2)):
        even[m, col + 2] = s
        even[N - m, col + 2] = s
        odd[m, col] = s
        odd[N - m, col] = -s
    return even, odd


def parity_blocks(p: MapParams, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project a parity-symmetric operator onto its even/odd blocks.

    Valid only for the ideal operator at zero shifts; the commutator with
    the reflection is checked and a violation raises `ContractError`.
    """
    perm = parity_permutation(p.n_q)
    comm = np.abs(U[perm][:, perm] - U).max()
    if comm > 1e-8:
        raise ContractError(
            f"operator does not commute with parity: residual {comm:.2e}")
    even, odd = parity_basis(p.n_q)
    U_even = even.T @ U @ even
    U_odd = odd.T @ U @ odd
    for blk in (U_even, U_odd):
        res = unitarity_residual(blk)
        if res > UNITARITY_TOL:
            raise NumericError(f"parity block not unitary: {res:.2e}")
    return U_even, U_odd


# ---------------------------------------------------------------------------
# degenerate band structure
# ---------------------------------------------------------------------------

def quasi_energy_clusters(lam: np.ndarray,
                          tol: float = DEGENERACY_TOL) -> list[np.ndarray]:
    """Group sorted quasi-energies into degenerate clusters on the circle.

    Consecutive values closer than ``tol`` share a cluster; the wraparound
    gap is merged as well.
    """
    lam = np.asarray(lam)
    if len(lam) == 0:
        return []
    splits = np.nonzero(np.diff(lam) > tol)[0]
    groups = np.split(np.arange(len(lam)), splits + 1)
    if len(groups) > 1 and (lam[0] + 2.0 * np.pi - lam[-1]) <= tol:
        groups[0] = np.concatenate([groups[-1], groups[0]])
        groups.pop()
    return [lam[g] for g in groups]


def align_to_largest_cluster(lam: np.ndarray,
                             tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Rotate the spectrum by a global phase so the largest degenerate
    cluster sits at 0.

    Returned values are sorted in [-tol, 2*pi - tol): the reference
    cluster stays contiguous around 0 instead of splitting across the
    wrap, so cluster centers can be compared against target positions
    directly.
    """
    clusters = quasi_energy_clusters(lam, tol)
    largest = max(clusters, key=len)
    ref = np.angle(np.exp(1j * largest).mean())
    return np.sort((lam - ref + tol) % (2.0 * np.pi)) - tol
