"""Command-line interface.

Subcommands: spectrum, sweep, border, husimi, classical, calibrate.
Flags override values loaded from an optional JSON config file; results go
to --out as CSV files plus a JSON manifest.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .eigenstates import husimi
from .errors import SawsimError
from .floquet import build_floquet, diagonalize
from .harness import (
    ExperimentConfig,
    RunRecord,
    config_hash,
    emit_outputs,
    log_grid,
    run_border_study,
    run_sweep,
)
from .imperfections import (
    ImperfectionParams,
    build_static_hamiltonian,
    diagonal_propagator,
    make_propagator,
    sample_disorder,
)
from .sawtooth import compile_iteration, diffusive_fraction, make_params
from .spectral import eta, eta_tilde, sample_surmise, surmise


def _parse_eps_grid(spec: str) -> tuple:
    """Grid spec "min:max:per-decade", or a comma list of values."""
    if ":" in spec:
        lo, hi, per = spec.split(":")
        return tuple(log_grid(float(lo), float(hi), int(per)))
    return tuple(float(x) for x in spec.split(","))


def _add_common(sub):
    sub.add_argument("--config", help="JSON file with ExperimentConfig fields")
    sub.add_argument("--K", type=float)
    sub.add_argument("--nq", type=int)
    sub.add_argument("--eps-grid", help="min:max:per-decade or v1,v2,...")
    sub.add_argument("--coupling", choices=("zero", "equal"))
    sub.add_argument("--theta0", type=float)
    sub.add_argument("--phi", type=float)
    sub.add_argument("--tau-g", type=float, dest="tau_g")
    sub.add_argument("--realizations", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--stat", choices=("eta", "eta-tilde", "entropy"))
    sub.add_argument("--threshold", type=float)
    sub.add_argument("--out", default="out")
    sub.add_argument("--threads", type=int)


def _build_config(args, **overrides) -> ExperimentConfig:
    fields: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            fields.update(json.load(fh))
    mapping = {
        "K": args.K, "n_q": args.nq,
        "eps_grid": _parse_eps_grid(args.eps_grid) if args.eps_grid else None,
        "coupling": args.coupling, "theta0": args.theta0, "phi": args.phi,
        "tau_g": args.tau_g, "n_realizations": args.realizations,
        "master_seed": args.seed,
        "statistic": args.stat.replace("-", "_") if args.stat else None,
        "threshold": args.threshold, "out_dir": args.out,
        "threads": args.threads,
    }
    for key, val in mapping.items():
        if val is not None:
            fields[key] = val
    fields.update(overrides)
    if isinstance(fields.get("eps_grid"), str):
        fields["eps_grid"] = _parse_eps_grid(fields["eps_grid"])
    fields.setdefault("K", float(np.sqrt(2.0)))
    fields.setdefault("n_q", 4)
    fields.setdefault("eps_grid", ())
    return ExperimentConfig(**fields)


def cmd_spectrum(args) -> int:
    cfg = _build_config(args)
    eps = cfg.eps_grid[0] if cfg.eps_grid else 0.0
    p = make_params(cfg.K, cfg.n_q, cfg.theta0, cfg.phi)
    seq = compile_iteration(p)
    if eps == 0.0:
        E = None
    else:
        delta = eps / cfg.tau_g
        imp = ImperfectionParams(
            delta, delta if cfg.coupling == "equal" else 0.0, cfg.tau_g)
        real = sample_disorder(cfg.n_q, imp, cfg.master_seed, (cfg.n_q, 0, 0))
        E = (diagonal_propagator(real, cfg.tau_g) if cfg.coupling == "zero"
             else make_propagator(build_static_hamiltonian(real), cfg.tau_g))
    spec = diagonalize(build_floquet(p, seq, E), vectors=False)
    record = RunRecord(
        config=json.loads(json.dumps(cfg.__dict__, default=list)),
        config_hash=config_hash(cfg), points=[], spacing_checksums={},
        wall_clock=0.0,
        artifacts={"level_flow": (np.array([eps]),
                                  spec.quasi_energies[None, :])})
    files = emit_outputs(record, "levels-vs-eps", args.out)
    if args.binary:
        from .harness import dump_spectra_binary
        import os
        files.append(dump_spectra_binary(
            spec.quasi_energies,
            os.path.join(args.out, f"spectrum_{record.config_hash}.bin"),
            record.config_hash))
    print(f"N={p.N} quasi-energies at eps={eps:g} -> {files[0]}")
    print(f"unitarity residual {spec.unitarity_residual:.2e}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _build_config(args)
    record = run_sweep(cfg)
    files = emit_outputs(record, "eta-curve", args.out)
    files += emit_outputs(record, "spacing-hist", args.out)
    for pt in record.points:
        print(f"eps={pt['eps']:.4e}  {cfg.statistic}={pt['value']:.4f} "
              f"+- {pt['stderr']:.4f}  (N_D={pt['n_realizations']})")
    print(f"wrote {len(files)} files to {args.out}")
    return 0


def cmd_border(args) -> int:
    base = _build_config(args, n_q=args.nq_range[0])
    nq_values = list(range(args.nq_range[0], args.nq_range[1] + 1))
    grids = {}
    for n_q in nq_values:
        if args.eps_grid:
            grids[n_q] = np.asarray(_parse_eps_grid(args.eps_grid))
        else:
            center = args.center_const * 2.0 ** (-n_q / 2) * n_q ** -2.5
            grids[n_q] = log_grid(center / 10 ** 0.75, center * 10 ** 0.75, 8)
    study = run_border_study(base, nq_values, grids, args.model)
    record = study.records[-1]
    record.artifacts["border_study"] = study
    files = emit_outputs(record, "border-table", args.out)
    for row in study.rows:
        print(f"n_q={row['n_q']}  eps_chi={row['eps_chi']:.4e} "
              f"+- {row['stderr']:.1e}  model={row['model_value']:.4e}")
    fit = study.fit
    slope = "" if fit.base2_slope is None else f"  slope/qubit={fit.base2_slope:.3f}"
    print(f"fit[{fit.model}] constant={fit.constant:.3f}{slope} "
          f"rms={fit.residual_rms:.3f}")
    print(f"wrote {files[0]}")
    return 0


def cmd_husimi(args) -> int:
    cfg = _build_config(args)
    eps = cfg.eps_grid[0] if cfg.eps_grid else 0.0
    p = make_params(cfg.K, cfg.n_q, cfg.theta0, cfg.phi)
    seq = compile_iteration(p)
    if eps == 0.0:
        E = None
    else:
        delta = eps / cfg.tau_g
        imp = ImperfectionParams(
            delta, delta if cfg.coupling == "equal" else 0.0, cfg.tau_g)
        real = sample_disorder(cfg.n_q, imp, cfg.master_seed, (cfg.n_q, 0, 0))
        E = (diagonal_propagator(real, cfg.tau_g) if cfg.coupling == "zero"
             else make_propagator(build_static_hamiltonian(real), cfg.tau_g))
    spec = diagonalize(build_floquet(p, seq, E))
    from .qcore import StateVector
    state = StateVector(cfg.n_q, spec.eigenvectors[:, args.state_index])
    grid = husimi(state, p, args.grid, args.grid)
    record = RunRecord(
        config=json.loads(json.dumps(cfg.__dict__, default=list)),
        config_hash=config_hash(cfg), points=[], spacing_checksums={},
        wall_clock=0.0, artifacts={"husimi": grid})
    files = emit_outputs(record, "husimi-grid", args.out)
    lam = spec.quasi_energies[args.state_index]
    print(f"eigenstate {args.state_index} (quasi-energy {lam:.6f}) -> {files[0]}")
    return 0


def cmd_classical(args) -> int:
    frac = diffusive_fraction(args.K, args.samples, args.steps,
                              args.threshold, args.seed)
    print(f"diffusive fraction at K={args.K:g}: {frac:.4f}  "
          f"({args.samples} samples, {args.steps} steps)")
    return 0


def cmd_calibrate(args) -> int:
    """Self-test of the crossover statistics on synthetic ensembles."""
    rng = np.random.default_rng(args.seed)
    n = args.samples
    checks = []
    v = eta(sample_surmise("GUE", n, rng))
    checks.append(("eta on GUE draws ~ 0", v, abs(v) <= 0.02))
    v = eta(sample_surmise("GOE2", n, rng))
    checks.append(("eta on superposed-GOE draws ~ 1", v, abs(v - 1) <= 0.02))
    v = eta_tilde(sample_surmise("GUE", n, rng))
    checks.append(("eta_tilde on GUE draws ~ 0", v, v <= 0.03))
    from scipy.integrate import quad
    ok_norm = True
    for kind in ("GOE", "GOE2", "GUE"):
        tot, _ = quad(lambda s: surmise(kind, s), 0, np.inf)
        mean, _ = quad(lambda s: s * surmise(kind, s), 0, np.inf)
        ok_norm &= abs(tot - 1) < 1e-8 and abs(mean - 1) < 1e-8
    checks.append(("surmises normalized with mean 1", float(ok_norm), ok_norm))
    failed = 0
    for label, value, ok in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {value:.4f}")
        failed += not ok
    return 1 if failed else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="sawsim",
        description="Quantum sawtooth-map simulation with static hardware "
                    "imperfections and Floquet spectral statistics")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="one Floquet build + diagonalize")
    _add_common(sp)
    sp.add_argument("--binary", action="store_true",
                    help="also dump the raw spectrum as little-endian "
                         "float64 with a JSON sidecar")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("sweep", help="statistic vs eps")
    _add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("border", help="eps_chi vs n_q plus scaling fit")
    _add_common(sp)
    sp.add_argument("--nq-range", type=lambda s: tuple(int(x) for x in s.split(":")),
                    default=(4, 7), help="lo:hi inclusive")
    sp.add_argument("--model", choices=("ergodic", "integrable", "free-exponent"),
                    default="ergodic")
    sp.add_argument("--center-const", type=float, default=4.3,
                    help="constant of the grid-centering law C 2^-nq/2 nq^-2.5")
    sp.set_defaults(func=cmd_border)

    sp = sub.add_parser("husimi", help="Husimi grid of one eigenstate")
    _add_common(sp)
    sp.add_argument("--state-index", type=int, default=0)
    sp.add_argument("--grid", type=int, default=None)
    sp.set_defaults(func=cmd_husimi)

    sp = sub.add_parser("classical", help="classical diffusive fraction")
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--steps", type=int, default=10_000)
    sp.add_argument("--threshold", type=float, default=0.2)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_classical)

    sp = sub.add_parser("calibrate", help="synthetic-ensemble self-test")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_calibrate)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SawsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
