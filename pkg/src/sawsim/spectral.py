"""Level-spacing statistics: unfolding, random-matrix surmises, crossover
measures, chaos-border extraction, and scaling fits.

Quasi-energies are uniformly dense on the circle, so unfolding is the
trivial rescaling ``s_i = N * gap_i / (2*pi)`` including the wraparound
gap; each spectrum then contributes exactly N spacings of mean 1.

Three reference spacing laws appear:

* ``GOE``   Wigner surmise of the orthogonal ensemble,
  ``P(s) = (pi/2) s exp(-pi s^2/4)``;
* ``GOE2``  superposition of two independent GOE sequences,
  ``P(s) = 1/2 [erfc(sqrt(pi) s/4) (pi s/4) e^{-pi s^2/16} + e^{-pi s^2/8}]``;
* ``GUE``   Wigner surmise of the unitary ensemble,
  ``P(s) = (32 s^2/pi^2) exp(-4 s^2/pi)``.

The crossover parameter ``eta`` locates a sample between GOE2 (eta = 1)
and GUE (eta = 0) by comparing cumulative probabilities at the first
intersection point s0 of the two densities; the companion measure
``eta_tilde`` is the L2 distance of the binned sample density from the
GUE law, used where no analytic small-perturbation limit exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, erfc

from .errors import ContractError, RangeError, StatisticalError

#: First intersection point of the GOE2 and GUE densities (root of
#: P_GOE2(s) = P_GUE(s); 0.50285... in the five-digit literature value).
S0 = 0.5028520129610136


def surmise(kind: str, s) -> np.ndarray:
    """Reference spacing density ``P(s)`` for kind in {GOE, GOE2, GUE}."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ContractError("spacings must be >= 0")
    if kind == "GOE":
        return (np.pi / 2.0) * s * np.exp(-np.pi * s ** 2 / 4.0)
    if kind == "GOE2":
        return 0.5 * (erfc(np.sqrt(np.pi) * s / 4.0)
                      * (np.pi * s / 4.0) * np.exp(-np.pi * s ** 2 / 16.0)
                      + np.exp(-np.pi * s ** 2 / 8.0))
    if kind == "GUE":
        return (32.0 * s ** 2 / np.pi ** 2) * np.exp(-4.0 * s ** 2 / np.pi)
    raise ContractError(f"unknown surmise kind {kind!r}")


def surmise_cdf(kind: str, s) -> np.ndarray:
    """Closed-form CDF of `surmise`."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ContractError("spacings must be >= 0")
    if kind == "GOE":
        return 1.0 - np.exp(-np.pi * s ** 2 / 4.0)
    if kind == "GOE2":
        return 1.0 - np.exp(-np.pi * s ** 2 / 16.0) * erfc(np.sqrt(np.pi) * s / 4.0)
    if kind == "GUE":
        return erf(2.0 * s / np.sqrt(np.pi)) \
            - (4.0 * s / np.pi) * np.exp(-4.0 * s ** 2 / np.pi)
    raise ContractError(f"unknown surmise kind {kind!r}")


_F_GOE2_S0 = float(surmise_cdf("GOE2", S0))
_F_GUE_S0 = float(surmise_cdf("GUE", S0))


@dataclass
class SpacingSample:
    """Normalized spacings pooled over disorder realizations, with the
    provenance of the sweep point they came from."""

    values: np.ndarray
    n_q: int | None = None
    K: float | None = None
    eps: float | None = None
    rho: float | None = None

    @property
    def count(self) -> int:
        return len(self.values)


@dataclass
class CrossoverCurve:
    """Crossover statistic sampled on a strictly increasing eps grid."""

    eps: np.ndarray
    values: np.ndarray
    n_realizations: np.ndarray | None = None

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.eps) != len(self.values):
            raise ContractError("eps and values length mismatch")
        if np.any(np.diff(self.eps) <= 0):
            raise ContractError("eps grid must be strictly increasing")


def spacings(lam: np.ndarray) -> np.ndarray:
    """Unfolded nearest-neighbor spacings of one sorted quasi-energy
    spectrum on [0, 2*pi), wraparound gap included; the N values sum to N.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(np.diff(lam) < 0):
        raise ContractError("quasi-energies must be sorted ascending")
    if len(lam) and (lam[0] < 0 or lam[-1] >= 2.0 * np.pi):
        raise ContractError("quasi-energies must lie in [0, 2*pi)")
    N = len(lam)
    gaps = np.empty(N)
    gaps[:-1] = np.diff(lam)
    gaps[-1] = lam[0] + 2.0 * np.pi - lam[-1]
    return gaps * (N / (2.0 * np.pi))


def _sample_values(sample) -> np.ndarray:
    values = sample.values if isinstance(sample, SpacingSample) else sample
    return np.asarray(values, dtype=float)


def eta(sample, min_count: int = 100) -> float:
    """Crossover parameter between the GOE2 law (1) and the GUE law (0).

    Uses the cumulative form [F_emp(s0) - F_GUE(s0)] / [F_GOE2(s0) -
    F_GUE(s0)], algebraically identical to the density-integral definition
    but free of binning.
    """
    values = _sample_values(sample)
    if len(values) < min_count:
        raise StatisticalError(
            f"sample of {len(values)} below the statistical floor {min_count}")
    f_emp = float(np.mean(values <= S0))
    return (f_emp - _F_GUE_S0) / (_F_GOE2_S0 - _F_GUE_S0)


def eta_tilde(sample, min_count: int = 100, bin_width: float = 0.1,
              s_max: float = 5.0) -> float:
    """L2 distance of the sample's spacing density from the GUE law.

    The density is estimated on a histogram of the given bin width over
    [0, s_max]; mass beyond s_max is folded into the last bin.
    """
    values = _sample_values(sample)
    if len(values) < min_count:
        raise StatisticalError(
            f"sample of {len(values)} below the statistical floor {min_count}")
    edges = np.arange(0.0, s_max + bin_width / 2, bin_width)
    clipped = np.minimum(values, s_max - bin_width * 1e-9)
    hist, _ = np.histogram(clipped, bins=edges)
    density = hist / (len(values) * bin_width)
    centers = 0.5 * (edges[1:] + edges[:-1])
    diff = density - surmise("GUE", centers)
    return float(np.sqrt(np.sum(diff ** 2) * bin_width))


def crossing_eps(eps: np.ndarray, values: np.ndarray, level: float,
                 rising: bool = False) -> float:
    """Log-linear interpolation (in log eps) of the first crossing of
    ``level``; downward crossing by default, upward with ``rising=True``."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    v = (values - level) if rising else (level - values)
    if len(v) and v[0] == 0:
        return float(eps[0])
    for i in range(len(v) - 1):
        if v[i] < 0 <= v[i + 1]:
            if v[i + 1] == 0:
                return float(eps[i + 1])
            t = -v[i] / (v[i + 1] - v[i])
            return float(np.exp((1 - t) * np.log(eps[i]) + t * np.log(eps[i + 1])))
    raise RangeError(
        "curve does not cross the requested level; widen the eps grid")


def eps_chi(curve: CrossoverCurve, threshold: float = 0.2) -> float:
    """Chaos border: the eps at which the crossover statistic first drops
    through ``threshold`` (log-linear interpolation between grid points)."""
    return crossing_eps(curve.eps, curve.values, threshold)


# ---------------------------------------------------------------------------
# scaling-law fits
# ---------------------------------------------------------------------------

@dataclass
class ScalingFit:
    """Least-squares fit of a border scaling law in log space."""

    model: str
    constant: float
    base2_slope: float | None
    residual_rms: float
    n_q: np.ndarray = field(default_factory=lambda: np.empty(0))
    model_values: np.ndarray = field(default_factory=lambda: np.empty(0))


def fit_scaling(points, model: str) -> ScalingFit:
    """Fit border points (n_q, eps_chi) to a scaling law.

    Models: "ergodic" is ``C * 2^(-n_q/2) * n_q^(-5/2)``, "integrable" is
    ``C * n_q^(-5/2)``, and "free-exponent" is ``C * 2^(a*n_q) * n_q^(-5/2)``
    returning the per-qubit base-2 slope ``a``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise ContractError("need at least 3 (n_q, eps_chi) points")
    nq = pts[:, 0]
    eps = pts[:, 1]
    if np.any(eps <= 0):
        raise ContractError("eps_chi must be positive")
    y = np.log2(eps) + 2.5 * np.log2(nq)  # remove the polynomial factor
    if model == "ergodic":
        c = float(2.0 ** np.mean(y + 0.5 * nq))
        slope = None
        fit_y = np.log2(c) - 0.5 * nq
    elif model == "integrable":
        c = float(2.0 ** np.mean(y))
        slope = None
        fit_y = np.full_like(nq, np.log2(c))
    elif model == "free-exponent":
        a, b = np.polyfit(nq, y, 1)
        slope = float(a)
        c = float(2.0 ** b)
        fit_y = a * nq + b
    else:
        raise ContractError(f"unknown scaling model {model!r}")
    resid = float(np.sqrt(np.mean((y - fit_y) ** 2)))
    model_values = 2.0 ** (fit_y - 2.5 * np.log2(nq))
    return ScalingFit(model, c, slope, resid, nq, model_values)


# ---------------------------------------------------------------------------
# synthetic samplers (calibration oracles)
# ---------------------------------------------------------------------------

def sample_surmise(kind: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n spacings from a reference law.

    GOE uses the closed-form inverse CDF; GUE uses the exact chi_3
    representation ``s = sqrt(pi/8) * |N(0,1)^3|``; GOE2 superposes two
    independent GOE level sequences (component mean spacing 2) and returns
    the nearest-neighbor spacings of the merged sequence.
    """
    if kind == "GOE":
        u = rng.uniform(size=n)
        return np.sqrt(-4.0 * np.log1p(-u) / np.pi)
    if kind == "GUE":
        return np.sqrt(np.pi / 8.0) * np.linalg.norm(
            rng.standard_normal((n, 3)), axis=1)
    if kind == "GOE2":
        m = n + 400
        sp1 = 2.0 * sample_surmise("GOE", m, rng)
        sp2 = 2.0 * sample_surmise("GOE", m, rng)
        levels = np.sort(np.concatenate([
            np.cumsum(sp1), np.cumsum(sp2) + rng.uniform(0.0, 2.0)]))
        s = np.diff(levels)[200:-199]  # drop edge transients
        return s[:n]
    raise ContractError(f"unknown surmise kind {kind!r}")
