"""Experiment orchestration: seeded disorder sweeps, border studies,
persistence, and output emission.

Determinism contract: every statistic is a pure function of the experiment
config and master seed.  Per-realization generators are derived from
``SeedSequence(master_seed, spawn_key=(n_q, eps_index, realization))`` with
the counter-based Philox engine, tasks are reduced in fixed index order,
and BLAS pools are pinned to one thread inside sweep tasks, so results are
bit-for-bit reproducible and independent of the worker count.

Interrupted sweeps resume from per-point ``.npz`` checkpoints keyed by the
config hash; a resumed run reproduces the uninterrupted record exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from contextlib import nullcontext
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .errors import (
    ConfigurationError,
    MissingArtifactError,
    RangeError,
)
from .eigenstates import entropy, entropy_border, overlaps
from .floquet import build_floquet, diagonalize
from .imperfections import (
    ImperfectionParams,
    build_static_hamiltonian,
    diagonal_propagator,
    make_propagator,
    sample_disorder,
)
from .sawtooth import MAX_DENSE_QUBITS, compile_iteration, make_params
from .spectral import (
    CrossoverCurve,
    ScalingFit,
    crossing_eps,
    eta,
    eta_tilde,
    fit_scaling,
    spacings,
)

RNG_NAME = "philox"
STATISTICS = ("eta", "eta_tilde", "entropy")
COUPLING_RULES = ("zero", "equal")


def realization_budget(n_q: int, target: int = 10_000) -> int:
    """Disorder realizations per sweep point so that realizations x 2**n_q
    is about ``target`` quasi-energies, clamped to [3, 1000]."""
    return int(min(1000, max(3, round(target / 2 ** n_q))))


def log_grid(eps_min: float, eps_max: float, per_decade: int = 8) -> np.ndarray:
    """Logarithmic eps grid with a fixed number of points per decade."""
    if eps_min <= 0 or eps_max <= eps_min:
        raise ConfigurationError("need 0 < eps_min < eps_max")
    n = int(math.floor(per_decade * math.log10(eps_max / eps_min))) + 1
    return eps_min * 10.0 ** (np.arange(n) / per_decade)


@dataclass(frozen=True)
class ExperimentConfig:
    K: float
    n_q: int
    eps_grid: tuple = ()
    coupling: str = "zero"          # "zero": J = 0;  "equal": J = delta
    tau_g: float = 1.0
    theta0: float = 0.0
    phi: float = 0.0
    n_realizations: int | None = None   # None: the 10^4-eigenvalue rule
    master_seed: int = 0
    statistic: str = "eta"
    threshold: float = 0.2
    regime: str = ""
    out_dir: str | None = None
    threads: int = 1

    def __post_init__(self):
        for name in ("K", "tau_g", "theta0", "phi", "threshold"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "n_q", int(self.n_q))
        if not 2 <= self.n_q <= MAX_DENSE_QUBITS:
            raise ConfigurationError(
                f"n_q={self.n_q} outside [2, {MAX_DENSE_QUBITS}]")
        if self.statistic not in STATISTICS:
            raise ConfigurationError(f"unknown statistic {self.statistic!r}")
        if self.coupling not in COUPLING_RULES:
            raise ConfigurationError(f"unknown coupling rule {self.coupling!r}")
        grid = tuple(float(e) for e in self.eps_grid)
        if any(e < 0 for e in grid) or any(
                b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigurationError("eps grid must be ascending and >= 0")
        object.__setattr__(self, "eps_grid", grid)
        if self.n_realizations is not None and self.n_realizations < 1:
            raise ConfigurationError("n_realizations must be >= 1")

    @property
    def resolved_realizations(self) -> int:
        if self.n_realizations is not None:
            return self.n_realizations
        return realization_budget(self.n_q)


def config_hash(cfg: ExperimentConfig) -> str:
    """Hash of the physics-affecting fields (output and threading fields
    are excluded)."""
    payload = {
        "K": cfg.K, "n_q": cfg.n_q, "eps_grid": list(cfg.eps_grid),
        "coupling": cfg.coupling, "tau_g": cfg.tau_g,
        "theta0": cfg.theta0, "phi": cfg.phi,
        "n_realizations": cfg.resolved_realizations,
        "master_seed": cfg.master_seed, "statistic": cfg.statistic,
        "threshold": cfg.threshold,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunRecord:
    """Results and provenance of one sweep."""

    config: dict
    config_hash: str
    points: list[dict]                      # eps, value, stderr, n_realizations
    spacing_checksums: dict[int, str]
    wall_clock: float
    version: str = __version__
    rng: str = RNG_NAME
    degenerate_reference: bool = False       # entropy vs a degenerate ideal basis
    artifacts: dict = field(default_factory=dict, repr=False)


# ---------------------------------------------------------------------------
# per-task computation (top level so it pickles into worker processes)
# ---------------------------------------------------------------------------

_PLAN_CACHE: dict = {}
_IDEAL_CACHE: dict = {}


def _blas_single_thread():
    try:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(limits=1)
    except Exception:
        return nullcontext()


def _cached_sequence(K, n_q, theta0, phi):
    key = (K, n_q, theta0, phi)
    if key not in _PLAN_CACHE:
        _PLAN_CACHE[key] = compile_iteration(make_params(K, n_q, theta0, phi))
    return _PLAN_CACHE[key]


def _cached_ideal_vectors(K, n_q, theta0, phi):
    """Ideal eigenbasis (Schur, orthonormal) plus a degeneracy flag."""
    key = (K, n_q, theta0, phi)
    if key not in _IDEAL_CACHE:
        p = make_params(K, n_q, theta0, phi)
        U0 = build_floquet(p, _cached_sequence(K, n_q, theta0, phi))
        spec = diagonalize(U0)
        gaps = np.diff(spec.quasi_energies)
        degenerate = bool(len(gaps) and gaps.min() < 1e-6)
        _IDEAL_CACHE[key] = (spec.eigenvectors, degenerate)
    return _IDEAL_CACHE[key]


def _sweep_task(task: tuple):
    """One (eps point, realization): build the perturbed Floquet operator,
    diagonalize, return unfolded spacings (and the mean eigenstate entropy
    when requested)."""
    (K, n_q, theta0, phi, tau_g, coupling, eps, master_seed,
     eps_idx, r_idx, want_entropy) = task
    with _blas_single_thread():
        seq = _cached_sequence(K, n_q, theta0, phi)
        p = make_params(K, n_q, theta0, phi)
        delta = eps / tau_g
        imp = ImperfectionParams(
            delta=delta, coupling=(delta if coupling == "equal" else 0.0),
            tau_g=tau_g)
        real = sample_disorder(n_q, imp, master_seed, (n_q, eps_idx, r_idx))
        if eps == 0.0:
            E = None
        elif coupling == "zero":
            E = diagonal_propagator(real, tau_g)
        else:
            E = make_propagator(build_static_hamiltonian(real), tau_g)
        U = build_floquet(p, seq, E)
        if not want_entropy:
            spec = diagonalize(U, vectors=False)
            return spacings(spec.quasi_energies), None
        spec = diagonalize(U, vectors=True)
        V0, _ = _cached_ideal_vectors(K, n_q, theta0, phi)
        _, mean_S = entropy(overlaps(V0, spec.eigenvectors))
        return spacings(spec.quasi_energies), mean_S


def _run_tasks(tasks: list[tuple], threads: int, n_q: int):
    if threads <= 1 or len(tasks) <= 1:
        return [_sweep_task(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    # cap workers so concurrent dense tasks stay inside a ~2 GB budget
    per_task = 6 * 16 * (1 << n_q) ** 2
    cap = max(1, int(2e9 / per_task))
    workers = min(threads, cap, len(tasks))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_task, tasks, chunksize=1))


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _point_path(out_dir: str, h: str, n_q: int, eps_idx: int) -> str:
    return os.path.join(out_dir, "points", f"{h}_nq{n_q}_e{eps_idx}.npz")


def _statistic_and_stderr(cfg: ExperimentConfig, spac: np.ndarray,
                          entropies: np.ndarray | None):
    """Point statistic plus a delete-one-realization jackknife error.

    The jackknife replicas are computed incrementally from per-realization
    counts (eta) or histograms (eta_tilde), which is exact for these
    statistics and avoids rebuilding the pooled sample N_D times.
    """
    from .spectral import _F_GOE2_S0, _F_GUE_S0, S0, surmise

    n_real, n_per = spac.shape
    if cfg.statistic == "entropy":
        value = float(entropies.mean())
        err = float(entropies.std(ddof=1) / np.sqrt(n_real)) if n_real > 1 else 0.0
        return value, err
    pooled = spac.reshape(-1)
    stat = eta if cfg.statistic == "eta" else eta_tilde
    value = float(stat(pooled))
    if n_real <= 1:
        return value, 0.0
    if cfg.statistic == "eta":
        counts = (spac <= S0).sum(axis=1)
        jack = (((counts.sum() - counts) / (spac.size - n_per)) - _F_GUE_S0) \
            / (_F_GOE2_S0 - _F_GUE_S0)
    else:
        edges = np.arange(0.0, 5.0001, 0.1)
        clipped = np.minimum(spac, 5.0 - 1e-10)
        hists = np.stack([np.histogram(row, bins=edges)[0] for row in clipped])
        rest = hists.sum(axis=0)[None, :] - hists
        dens = rest / ((spac.size - n_per) * 0.1)
        ref = surmise("GUE", 0.5 * (edges[1:] + edges[:-1]))
        jack = np.sqrt((((dens - ref) ** 2) * 0.1).sum(axis=1))
    err = float(np.sqrt((n_real - 1) * np.mean((jack - jack.mean()) ** 2)))
    return value, err


def run_sweep(cfg: ExperimentConfig) -> RunRecord:
    """Sweep the statistic over the eps grid, averaging the stated number
    of disorder realizations per point; per-point results are checkpointed
    so interrupted sweeps resume."""
    if not cfg.eps_grid:
        raise ConfigurationError("empty eps grid")
    h = config_hash(cfg)
    t0 = time.perf_counter()
    n_real = cfg.resolved_realizations
    want_entropy = cfg.statistic == "entropy"

    points = []
    checksums = {}
    pooled_store = {}
    entropy_store = {}
    for eps_idx, eps in enumerate(cfg.eps_grid):
        path = _point_path(cfg.out_dir, h, cfg.n_q, eps_idx) if cfg.out_dir else None
        spac = entropies = None
        if path and os.path.exists(path):
            with np.load(path) as dat:
                spac = dat["spacings"]
                entropies = dat["entropies"] if "entropies" in dat else None
        if spac is None or (want_entropy and entropies is None):
            tasks = [
                (cfg.K, cfg.n_q, cfg.theta0, cfg.phi, cfg.tau_g, cfg.coupling,
                 eps, cfg.master_seed, eps_idx, r, want_entropy)
                for r in range(n_real)
            ]
            results = _run_tasks(tasks, cfg.threads, cfg.n_q)
            spac = np.stack([r[0] for r in results])
            entropies = (np.array([r[1] for r in results])
                         if want_entropy else None)
            if path:
                os.makedirs(os.path.dirname(path), exist_ok=True)
                payload = {"spacings": spac, "eps": eps}
                if entropies is not None:
                    payload["entropies"] = entropies
                np.savez(path, **payload)
        value, err = _statistic_and_stderr(cfg, spac, entropies)
        points.append({"eps": float(eps), "value": value, "stderr": err,
                       "n_realizations": int(spac.shape[0])})
        pooled = spac.reshape(-1)
        pooled_store[eps_idx] = pooled
        if entropies is not None:
            entropy_store[eps_idx] = entropies
        checksums[eps_idx] = hashlib.sha256(
            np.ascontiguousarray(pooled).tobytes()).hexdigest()[:16]

    degenerate = False
    if want_entropy:
        _, degenerate = _cached_ideal_vectors(
            cfg.K, cfg.n_q, cfg.theta0, cfg.phi)

    record = RunRecord(
        config=json.loads(json.dumps(cfg.__dict__, default=list)),
        config_hash=h,
        points=points,
        spacing_checksums=checksums,
        wall_clock=time.perf_counter() - t0,
        degenerate_reference=degenerate,
        artifacts={"pooled_spacings": pooled_store,
                   "entropies": entropy_store},
    )
    if cfg.out_dir:
        _write_record(cfg.out_dir, record)
    return record


def _write_record(out_dir: str, record: RunRecord) -> None:
    os.makedirs(out_dir, exist_ok=True)
    meta = {k: v for k, v in record.__dict__.items() if k != "artifacts"}
    path = os.path.join(out_dir, f"record_{record.config_hash}.json")
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)


def sweep_curve(record: RunRecord) -> CrossoverCurve:
    eps = np.array([pt["eps"] for pt in record.points])
    val = np.array([pt["value"] for pt in record.points])
    n = np.array([pt["n_realizations"] for pt in record.points])
    return CrossoverCurve(eps, val, n)


def dump_spectra_binary(lam: np.ndarray, path: str, cfg_hash: str) -> str:
    """Raw spectra as flat little-endian float64 with a JSON sidecar
    carrying the dimensions and the config hash."""
    arr = np.ascontiguousarray(np.atleast_2d(lam), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(arr.tobytes())
    sidecar = {"dtype": "<f8", "shape": list(arr.shape),
               "config_hash": cfg_hash, "order": "C"}
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=1)
    return path


# ---------------------------------------------------------------------------
# border studies
# ---------------------------------------------------------------------------

@dataclass
class BorderStudy:
    rows: list[dict]                 # n_q, eps_chi, stderr, n_realizations
    fit: ScalingFit | None
    records: list[RunRecord]

    def table(self) -> np.ndarray:
        return np.array([[r["n_q"], r["eps_chi"]] for r in self.rows])


def _border_stderr(curve: CrossoverCurve, stderrs: np.ndarray,
                   threshold: float, center: float) -> float:
    """Half-range of the crossing when the curve shifts by +-stderr."""
    lo = hi = center
    for sign in (-1.0, 1.0):
        try:
            x = crossing_eps(curve.eps, curve.values + sign * stderrs, threshold)
            lo, hi = min(lo, x), max(hi, x)
        except RangeError:
            continue
    return 0.5 * (hi - lo)


def run_border_study(base: ExperimentConfig, nq_values, eps_grids,
                     model: str | None, auto_widen: int = 2) -> BorderStudy:
    """Chaos border versus qubit count plus the scaling fit.

    ``eps_grids`` maps n_q to its eps grid (or is one grid for all).  When a
    sweep does not span the threshold the grid is widened by a decade on the
    needed side, at most ``auto_widen`` times, before the range error
    propagates.  The fit is skipped (``fit = None``) when ``model`` is None
    or fewer than three sizes are studied.
    """
    rows = []
    records = []
    for n_q in nq_values:
        grid = np.asarray(eps_grids[n_q] if isinstance(eps_grids, dict)
                          else eps_grids, dtype=float)
        for attempt in range(auto_widen + 1):
            cfg = replace(base, n_q=int(n_q), eps_grid=tuple(grid),
                          n_realizations=base.n_realizations)
            record = run_sweep(cfg)
            curve = sweep_curve(record)
            try:
                border = crossing_eps(curve.eps, curve.values, base.threshold)
                break
            except RangeError:
                if attempt == auto_widen:
                    raise
                per_decade = max(
                    1, round(1.0 / np.mean(np.diff(np.log10(grid)))))
                if curve.values[-1] > base.threshold:   # extend to larger eps
                    ext = log_grid(grid[-1], grid[-1] * 10, per_decade)[1:]
                    grid = np.concatenate([grid, ext])
                else:                                    # extend to smaller eps
                    ext = log_grid(grid[0] / 10, grid[0], per_decade)[:-1]
                    grid = np.concatenate([ext, grid])
        stderrs = np.array([pt["stderr"] for pt in record.points])
        rows.append({
            "n_q": int(n_q),
            "eps_chi": border,
            "stderr": _border_stderr(curve, stderrs, base.threshold, border),
            "n_realizations": int(record.points[0]["n_realizations"]),
        })
        records.append(record)
    fit = None
    if model is not None and len(rows) >= 3:
        fit = fit_scaling([(r["n_q"], r["eps_chi"]) for r in rows], model)
        by_nq = {int(nq): mv for nq, mv in zip(fit.n_q, fit.model_values)}
        for r in rows:
            r["model_value"] = float(by_nq[r["n_q"]])
    else:
        for r in rows:
            r["model_value"] = float("nan")
    return BorderStudy(rows, fit, records)


def entropy_border_from_record(record: RunRecord, level: float = 1.0) -> float:
    curve = sweep_curve(record)
    return entropy_border(curve.eps, curve.values, level)


# ---------------------------------------------------------------------------
# parametric level flow (fixed disorder shape, scaled amplitude)
# ---------------------------------------------------------------------------

def run_level_flow(cfg: ExperimentConfig, realization_index: int = 0):
    """Quasi-energy spectra on the eps grid for one fixed disorder shape.

    The same (master_seed, index) is drawn at every eps, so the unit
    disorder pattern is constant and only its amplitude scales; the rows
    trace the parametric flow of the levels.
    """
    lam_rows = []
    for eps in cfg.eps_grid:
        task_imp = ImperfectionParams(
            delta=eps / cfg.tau_g,
            coupling=(eps / cfg.tau_g if cfg.coupling == "equal" else 0.0),
            tau_g=cfg.tau_g)
        real = sample_disorder(cfg.n_q, task_imp, cfg.master_seed,
                               (cfg.n_q, realization_index))
        p = make_params(cfg.K, cfg.n_q, cfg.theta0, cfg.phi)
        seq = _cached_sequence(cfg.K, cfg.n_q, cfg.theta0, cfg.phi)
        if eps == 0.0:
            E = None
        elif cfg.coupling == "zero":
            E = diagonal_propagator(real, cfg.tau_g)
        else:
            E = make_propagator(build_static_hamiltonian(real), cfg.tau_g)
        spec = diagonalize(build_floquet(p, seq, E), vectors=False)
        lam_rows.append(spec.quasi_energies)
    return np.asarray(cfg.eps_grid), np.stack(lam_rows)


# ---------------------------------------------------------------------------
# output emission
# ---------------------------------------------------------------------------

def emit_outputs(record: RunRecord, what: str, out_dir: str) -> list[str]:
    """Write the requested artifact of ``record`` as CSV plus a JSON
    manifest entry; returns the created file paths."""
    from .spectral import surmise

    os.makedirs(out_dir, exist_ok=True)
    files = []
    if what == "eta-curve":
        path = os.path.join(out_dir, f"curve_{record.config_hash}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps", "value", "stderr", "n_realizations"])
            for pt in record.points:
                w.writerow([pt["eps"], pt["value"], pt["stderr"],
                            pt["n_realizations"]])
        files.append(path)
    elif what == "spacing-hist":
        pooled = record.artifacts.get("pooled_spacings")
        if not pooled:
            raise MissingArtifactError("record holds no pooled spacings")
        edges = np.arange(0.0, 5.0001, 0.1)
        centers = 0.5 * (edges[1:] + edges[:-1])
        for idx, sample in pooled.items():
            hist, _ = np.histogram(np.minimum(sample, 4.99999), bins=edges)
            dens = hist / (len(sample) * 0.1)
            path = os.path.join(
                out_dir, f"spacing_hist_{record.config_hash}_e{idx}.csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["s_bin_center", "density_empirical",
                            "density_GOE2", "density_GUE"])
                for c, d, g2, gu in zip(centers, dens,
                                        surmise("GOE2", centers),
                                        surmise("GUE", centers)):
                    w.writerow([f"{c:.3f}", f"{d:.8f}", f"{g2:.8f}", f"{gu:.8f}"])
            files.append(path)
    elif what == "border-table":
        study = record.artifacts.get("border_study")
        if study is None:
            raise MissingArtifactError("record holds no border study")
        path = os.path.join(out_dir, "border_table.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n_q", "eps_chi", "stderr", "model_value"])
            for r in study.rows:
                w.writerow([r["n_q"], r["eps_chi"], r["stderr"],
                            r["model_value"]])
        files.append(path)
    elif what == "husimi-grid":
        grid = record.artifacts.get("husimi")
        if grid is None:
            raise MissingArtifactError("record holds no Husimi grid")
        path = os.path.join(out_dir, "husimi.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "p", "density"])
            for ip, pv in enumerate(grid.p):
                for it, tv in enumerate(grid.theta):
                    w.writerow([f"{tv:.6f}", f"{pv:.6f}",
                                f"{grid.density[ip, it]:.10e}"])
        files.append(path)
    elif what == "levels-vs-eps":
        flow = record.artifacts.get("level_flow")
        if flow is None:
            raise MissingArtifactError("record holds no level flow")
        eps_grid, lam = flow
        path = os.path.join(out_dir, "levels_vs_eps.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps"] + [f"lam_{i+1}" for i in range(lam.shape[1])])
            for e, row in zip(eps_grid, lam):
                w.writerow([e] + [f"{x:.12f}" for x in row])
        files.append(path)
    else:
        raise MissingArtifactError(f"unknown artifact kind {what!r}")

    manifest_path = os.path.join(out_dir, "manifest.json")
    manifest = {}
    if os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    manifest.setdefault("runs", {})[record.config_hash] = {
        "config": record.config,
        "version": record.version,
        "rng": record.rng,
        "files": sorted(set(manifest.get("runs", {})
                            .get(record.config_hash, {})
                            .get("files", [])) | {os.path.basename(f)
                                                  for f in files}),
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return files
