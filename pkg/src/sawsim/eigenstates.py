"""Eigenvector diagnostics: overlaps with the ideal eigenbasis, eigenstate
entropy, and Husimi phase-space densities on the torus."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .qcore import StateVector
from .sawtooth import MapParams
from .spectral import crossing_eps

ORTHONORMALITY_TOL = 1e-8


def _check_orthonormal(V: np.ndarray, name: str) -> None:
    N = V.shape[1]
    res = np.abs(V.conj().T @ V - np.eye(N)).max()
    if res > ORTHONORMALITY_TOL:
        raise ContractError(
            f"{name} columns not orthonormal: residual {res:.2e}")


def overlaps(V0: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Overlap matrix ``p[a, b] = |<ideal_b | perturbed_a>|**2``.

    Both inputs are N x N with orthonormal columns, so the result is doubly
    stochastic.  Inside degenerate ideal subspaces the reference columns are
    an arbitrary orthonormal basis of the block.
    """
    V0 = np.asarray(V0)
    V = np.asarray(V)
    if V0.shape != V.shape or V0.shape[0] != V0.shape[1]:
        raise ContractError("eigenvector matrices must both be N x N")
    _check_orthonormal(V0, "ideal eigenvectors")
    _check_orthonormal(V, "perturbed eigenvectors")
    return np.abs(V.conj().T @ V0) ** 2


def entropy(p: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-state mixing entropy ``S_a = -sum_b p[a,b] log2 p[a,b]`` (with
    0 log 0 = 0) and its mean over states.

    S = 0 when a perturbed state coincides with one ideal state, 1 when it
    is an equal mix of two, and n_q when all N ideal states contribute
    equally.
    """
    p = np.asarray(p, dtype=float)
    row_err = np.abs(p.sum(axis=1) - 1.0).max()
    if row_err > 1e-6:
        raise ContractError(f"overlap rows do not sum to 1: {row_err:.2e}")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    S = -terms.sum(axis=1)
    return S, float(S.mean())


def entropy_border(eps: np.ndarray, mean_S: np.ndarray,
                   level: float = 1.0) -> float:
    """Imperfection strength at which the mean eigenstate entropy reaches
    ``level`` (upward log-linear crossing, same interpolation as the
    spacing-statistic border)."""
    return crossing_eps(eps, mean_S, level, rising=True)


# ---------------------------------------------------------------------------
# Husimi densities
# ---------------------------------------------------------------------------

@dataclass
class HusimiGrid:
    """Nonnegative phase-space density on a theta x p grid; cell mass sums
    to one."""

    density: np.ndarray        # shape (n_p, n_theta)
    theta: np.ndarray          # cell centers in [0, 2*pi)
    p: np.ndarray              # cell centers in [-pi, pi)
    squeezing: float           # Delta p / Delta theta
    normalization: float       # applied scale factor


WINDING_IMAGES = 5


def husimi(state: StateVector, params: MapParams,
           n_theta: int | None = None, n_p: int | None = None) -> HusimiGrid:
    """Husimi density of a register state in action-angle variables.

    The state is projected on torus coherent states: periodized Gaussians
    of width ``Delta_theta = Delta_p = sqrt(T/2)`` (squeezing ratio 1,
    minimum uncertainty ``Delta_p * Delta_theta = T/2``) carrying a plane
    wave at the center's momentum.  Periodization is truncated at
    +-5 winding images; Gaussian tails beyond are < 1e-12 at these widths.
    Grid default: ``4*sqrt(N)`` points per axis, capped at 256.
    """
    N = params.N
    default = min(256, int(np.ceil(4 * np.sqrt(N))))
    n_theta = n_theta or default
    n_p = n_p or default
    width = np.sqrt(params.T / 2.0)

    theta_c = 2.0 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    p_c = -np.pi + 2.0 * np.pi * (np.arange(n_p) + 0.5) / n_p
    theta_m = 2.0 * np.pi * np.arange(N) / N

    # d[w, g, m] = theta_m + 2*pi*w - theta_center_g, folded into envelopes
    wind = 2.0 * np.pi * np.arange(-WINDING_IMAGES, WINDING_IMAGES + 1)
    d = theta_m[None, None, :] + wind[:, None, None] - theta_c[None, :, None]
    envelope = np.exp(-d ** 2 / (4.0 * width ** 2))

    density = np.empty((n_p, n_theta))
    amp = state.amp
    for ip, p_bar in enumerate(p_c):
        n_bar = p_bar / params.T
        coh = (envelope * np.exp(1j * n_bar * d)).sum(axis=0)  # (grid, N)
        density[ip] = np.abs(coh @ amp) ** 2

    cell = (2.0 * np.pi / n_theta) * (2.0 * np.pi / n_p)
    total = density.sum() * cell
    density /= total
    return HusimiGrid(density, theta_c, p_c, 1.0, 1.0 / total)
