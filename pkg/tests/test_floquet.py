"""Floquet operator construction, diagonalization, and parity blocks."""

import numpy as np
import pytest

from sawsim import (
    ContractError,
    ImperfectionParams,
    build_floquet,
    build_static_hamiltonian,
    compile_iteration,
    diagonalize,
    make_params,
    make_propagator,
    oracle_floquet,
    parity_blocks,
    quasi_energy_clusters,
    sample_disorder,
    spacings,
)
from sawsim.floquet import align_to_largest_cluster, unitarity_residual
from sawsim.imperfections import diagonal_propagator
from sawsim.spectral import surmise_cdf

from conftest import random_unitary


class TestBuildFloquet:
    @pytest.mark.parametrize("n_q", [3, 5, 6])
    def test_ideal_build_matches_oracle(self, n_q):
        p = make_params(np.sqrt(2), n_q)
        U = build_floquet(p, compile_iteration(p))
        np.testing.assert_allclose(U, oracle_floquet(p), atol=1e-10)

    def test_unitary_under_disorder(self):
        p = make_params(np.sqrt(2), 5)
        seq = compile_iteration(p)
        r = sample_disorder(5, ImperfectionParams(1e-2, 1e-2), 5, 0)
        E = make_propagator(build_static_hamiltonian(r), 1.0)
        U = build_floquet(p, seq, E)
        assert unitarity_residual(U) < 1e-9

    @pytest.mark.parametrize("coupling", [0.0, 1e-3])
    def test_matrix_and_column_strategies_agree(self, coupling):
        p = make_params(-0.1, 5, 0.1, 0.3)
        seq = compile_iteration(p)
        r = sample_disorder(5, ImperfectionParams(1e-3, coupling), 31, 2)
        E = (diagonal_propagator(r, 1.0) if coupling == 0.0
             else make_propagator(build_static_hamiltonian(r), 1.0))
        U_mat = build_floquet(p, seq, E, strategy="matrix")
        U_col = build_floquet(p, seq, E, strategy="columns")
        np.testing.assert_allclose(U_mat, U_col, atol=1e-12)

    def test_integrable_band_values(self):
        # six bands at multiples of 2*pi/6 once the global phase is removed
        p = make_params(-1.0, 5)
        spec = diagonalize(build_floquet(p, compile_iteration(p)),
                           vectors=False)
        aligned = align_to_largest_cluster(spec.quasi_energies)
        clusters = quasi_energy_clusters(aligned)
        assert len(clusters) == 6
        centers = sorted(np.median(c) for c in clusters)
        np.testing.assert_allclose(centers,
                                   np.arange(6) * (2 * np.pi / 6), atol=1e-6)


class TestDiagonalize:
    def test_identity(self):
        spec = diagonalize(np.eye(8, dtype=complex))
        np.testing.assert_allclose(spec.quasi_energies, 0.0, atol=0)

    def test_diagonal_unitary(self, rng):
        mu = rng.uniform(0, 2 * np.pi, 32)
        spec = diagonalize(np.diag(np.exp(1j * mu)))
        np.testing.assert_allclose(spec.quasi_energies,
                                   np.sort(mu % (2 * np.pi)), atol=1e-12)

    def test_reconstruction_of_random_unitary(self, rng):
        U = random_unitary(64, rng)
        spec = diagonalize(U)
        V = spec.eigenvectors
        R = V @ np.diag(np.exp(1j * spec.quasi_energies)) @ V.conj().T
        assert np.abs(U - R).max() < 1e-9
        assert spec.eigen_residual < 1e-8
        assert np.abs(V.conj().T @ V - np.eye(64)).max() < 1e-8

    def test_orthonormal_inside_degenerate_clusters(self):
        p = make_params(-1.0, 5)
        spec = diagonalize(oracle_floquet(p))
        V = spec.eigenvectors
        assert np.abs(V.conj().T @ V - np.eye(p.N)).max() < 1e-8

    def test_rejects_non_unitary(self, rng):
        with pytest.raises(ContractError):
            diagonalize(rng.standard_normal((8, 8)) + 0j)

    def test_spectrum_invariant_under_permutation(self, rng):
        U = random_unitary(32, rng)
        perm = rng.permutation(32)
        lam1 = diagonalize(U, vectors=False).quasi_energies
        lam2 = diagonalize(U[perm][:, perm], vectors=False).quasi_energies
        np.testing.assert_allclose(lam1, lam2, atol=1e-9)


class TestParityBlocks:
    def test_block_dimensions(self):
        p = make_params(np.sqrt(2), 4)
        ue, uo = parity_blocks(p, oracle_floquet(p))
        assert ue.shape == (9, 9) and uo.shape == (7, 7)

    def test_merged_block_spectra_match_full_spectrum(self):
        p = make_params(np.sqrt(2), 5)
        U = oracle_floquet(p)
        ue, uo = parity_blocks(p, U)
        merged = np.sort(np.concatenate([
            np.angle(np.linalg.eigvals(ue)) % (2 * np.pi),
            np.angle(np.linalg.eigvals(uo)) % (2 * np.pi)]))
        full = diagonalize(U, vectors=False).quasi_energies
        np.testing.assert_allclose(merged, full, atol=1e-9)

    def test_perturbation_breaks_the_symmetry(self):
        p = make_params(np.sqrt(2), 5)
        seq = compile_iteration(p)
        r = sample_disorder(5, ImperfectionParams(1e-2), 9, 0)
        U = build_floquet(p, seq, diagonal_propagator(r, 1.0))
        with pytest.raises(ContractError):
            parity_blocks(p, U)

    def test_shifts_break_the_symmetry(self):
        p = make_params(np.sqrt(2), 5, theta0=0.3)
        with pytest.raises(ContractError):
            parity_blocks(p, oracle_floquet(p))


@pytest.mark.slow
def test_single_symmetry_class_follows_goe():
    """Even-block spacing statistics in the ergodic regime sit closest to
    the one-class orthogonal law (large size, one deterministic operator)."""
    p = make_params(np.sqrt(2), 11)
    ue, _ = parity_blocks(p, build_floquet(p, compile_iteration(p)))
    lam = np.sort(np.angle(np.linalg.eigvals(ue)) % (2 * np.pi))
    s = np.sort(spacings(lam))
    emp = np.arange(1, len(s) + 1) / len(s)
    dist = {kind: np.abs(emp - surmise_cdf(kind, s)).max()
            for kind in ("GOE", "GOE2", "GUE")}
    assert dist["GOE"] < dist["GOE2"]
    assert dist["GOE"] < dist["GUE"]
    assert dist["GOE"] < 0.08
