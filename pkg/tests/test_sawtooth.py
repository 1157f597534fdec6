"""Map parameterization, gate compilation vs the dense oracle, and the
classical map."""

import numpy as np
import pytest

import mpmath

from sawsim import (
    ClassicalState,
    ConfigurationError,
    classical_step,
    compile_iteration,
    diffusive_fraction,
    gate_matrix,
    ideal_kick_phases,
    ideal_rotation_phases,
    make_params,
    oracle_floquet,
)
from sawsim.errors import ResourceError
from sawsim.floquet import build_floquet, diagonalize, quasi_energy_clusters
from sawsim.sawtooth import momentum_labels

SHIFT = np.sqrt(2) / 5


class TestMakeParams:
    def test_forced_by_definitions(self):
        p = make_params(np.sqrt(2), 4)
        assert p.N == 16
        assert p.T == 2 * np.pi / 16
        assert abs(p.k * p.T - p.K) < 1e-12
        assert p.T * p.N == 2 * np.pi

    def test_nine_qubits(self):
        p = make_params(-1.0, 9)
        assert p.N == 512 and p.T == 2 * np.pi / 512

    def test_shifted_params_accepted(self):
        p = make_params(-0.1, 11, SHIFT, SHIFT)
        assert p.theta0 == p.phi == SHIFT

    def test_rejects_single_qubit(self):
        with pytest.raises(ConfigurationError):
            make_params(1.0, 1)

    def test_momentum_labels_range(self):
        n = momentum_labels(5)
        assert n.min() == -16 and n.max() == 15
        assert len(np.unique(n)) == 32


def _mp_kick_phase(p, m):
    theta = 2 * mpmath.mpf(mpmath.pi) * m / p.N
    arg = mpmath.mpf(p.k) * (theta + mpmath.mpf(p.theta0) - mpmath.pi) ** 2 / 2
    return complex(mpmath.cos(arg) + 1j * mpmath.sin(arg))


def _mp_rotation_phase(p, n):
    arg = -mpmath.mpf(p.T) * (n + mpmath.mpf(p.phi)) ** 2 / 2
    return complex(mpmath.cos(arg) + 1j * mpmath.sin(arg))


class TestIdealPhases:
    def test_zero_kick_strength(self):
        p = make_params(0.0, 4)
        np.testing.assert_allclose(ideal_kick_phases(p), 1.0, atol=0)

    def test_kick_center_entry_is_one(self):
        p = make_params(np.sqrt(2), 4)
        assert ideal_kick_phases(p)[p.N // 2] == 1.0  # theta == pi

    def test_kick_against_high_precision_oracle(self):
        mpmath.mp.dps = 40
        p = make_params(np.sqrt(2), 4)
        got = ideal_kick_phases(p)
        want = np.array([_mp_kick_phase(p, m) for m in range(p.N)])
        np.testing.assert_allclose(got, want, atol=1e-13)

    def test_rotation_zero_momentum_entry(self):
        p = make_params(np.sqrt(2), 4)
        assert ideal_rotation_phases(p)[0] == 1.0  # n = 0, phi = 0

    def test_rotation_even_in_momentum_without_shift(self):
        p = make_params(-0.1, 5)
        rot = ideal_rotation_phases(p)
        n = momentum_labels(5)
        for m in range(1, p.N):
            if n[m] == -p.N // 2:
                continue
            partner = np.nonzero(n == -n[m])[0][0]
            assert rot[m] == rot[partner]

    def test_rotation_against_high_precision_oracle(self):
        mpmath.mp.dps = 40
        p = make_params(np.sqrt(2), 4, phi=SHIFT)
        got = ideal_rotation_phases(p)
        want = np.array([_mp_rotation_phase(p, n)
                         for n in momentum_labels(4)])
        np.testing.assert_allclose(got, want, atol=1e-13)


class TestCompileIteration:
    def test_gate_count(self):
        seq = compile_iteration(make_params(np.sqrt(2), 4))
        assert len(seq) == 52
        assert seq.tags.count("kick") == 16
        assert seq.tags.count("rotation") == 16

    def test_kick_block_product_equals_ideal_diagonal(self):
        p = make_params(np.sqrt(2), 4)
        seq = compile_iteration(p)
        prod = np.eye(p.N, dtype=complex)
        for g, tag in zip(seq.gates, seq.tags):
            if tag == "kick":
                prod = gate_matrix(g, p.n_q) @ prod
        np.testing.assert_allclose(
            prod, np.diag(ideal_kick_phases(p)), atol=1e-10)

    def test_kick_block_gates_commute(self, rng):
        # permuting the diagonal kick gates cannot change the ideal product
        p = make_params(-0.1, 4, theta0=0.3)
        seq = compile_iteration(p)
        kick = [g for g, t in zip(seq.gates, seq.tags) if t == "kick"]
        ref = np.eye(p.N, dtype=complex)
        for g in kick:
            ref = gate_matrix(g, p.n_q) @ ref
        perm = rng.permutation(len(kick))
        shuffled = np.eye(p.N, dtype=complex)
        for idx in perm:
            shuffled = gate_matrix(kick[idx], p.n_q) @ shuffled
        np.testing.assert_allclose(shuffled, ref, atol=1e-12)

    def test_full_product_matches_oracle(self):
        p = make_params(np.sqrt(2), 4)
        np.testing.assert_allclose(
            build_floquet(p, compile_iteration(p)), oracle_floquet(p),
            atol=1e-10)

    @pytest.mark.parametrize("K", [np.sqrt(2), -0.1, -1.0])
    @pytest.mark.parametrize("shift", [0.0, SHIFT])
    @pytest.mark.parametrize("n_q", [2, 3, 5, 6])
    def test_oracle_equivalence_grid(self, K, shift, n_q):
        p = make_params(K, n_q, shift, shift)
        np.testing.assert_allclose(
            build_floquet(p, compile_iteration(p)), oracle_floquet(p),
            atol=1e-10)


class TestOracleFloquet:
    def test_zero_kick_is_pure_rotation(self):
        from sawsim.qcore import dft_matrix
        p = make_params(0.0, 4)
        F = dft_matrix(4)
        want = F.conj().T @ np.diag(ideal_rotation_phases(p)) @ F
        np.testing.assert_allclose(oracle_floquet(p), want, atol=1e-12)

    def test_columns_unit_norm(self):
        U = oracle_floquet(make_params(np.sqrt(2), 5))
        np.testing.assert_allclose(
            np.linalg.norm(U, axis=0), 1.0, atol=1e-12)

    def test_six_degenerate_bands_at_K_minus_one(self):
        U = oracle_floquet(make_params(-1.0, 6))
        spec = diagonalize(U, vectors=False)
        assert len(quasi_energy_clusters(spec.quasi_energies)) == 6

    def test_parity_commutes_at_zero_shift(self):
        from sawsim.floquet import parity_permutation
        p = make_params(np.sqrt(2), 5)
        U = oracle_floquet(p)
        perm = parity_permutation(5)
        assert np.abs(U[perm][:, perm] - U).max() < 1e-10

    def test_resource_cap(self):
        with pytest.raises(ResourceError):
            oracle_floquet(MapParamsStub())


class MapParamsStub:
    n_q = 13
    N = 1 << 13


class TestClassicalMap:
    def test_fixed_point(self):
        s = classical_step(ClassicalState(0.0, np.pi), K=np.sqrt(2))
        assert s.p == 0.0 and s.theta == np.pi

    @pytest.mark.parametrize("K,period", [(-1.0, 6), (-2.0, 4), (-3.0, 3)])
    def test_global_periodicity(self, K, period, rng):
        for _ in range(300):
            start = ClassicalState(rng.uniform(-np.pi, np.pi),
                                   rng.uniform(0, 2 * np.pi))
            s = start
            for _ in range(period):
                s = classical_step(s, K)
            assert abs(s.p - start.p) < 1e-9
            assert abs(s.theta - start.theta) < 1e-9

    def test_chaotic_orbit_fills_momentum_range(self):
        s = ClassicalState(0.1, 2.0)
        lo = hi = s.p
        for _ in range(20000):
            s = classical_step(s, np.sqrt(2))
            lo, hi = min(lo, s.p), max(hi, s.p)
        assert lo < -0.95 * np.pi and hi > 0.95 * np.pi


class TestDiffusiveFraction:
    def test_periodic_map_has_no_diffusion(self):
        assert diffusive_fraction(-1.0, 1000, 2000, rng_seed=3) == 0.0

    def test_quasi_integrable_fraction(self):
        frac = diffusive_fraction(-0.1, 4000, 10000, rng_seed=5)
        assert 0.09 <= frac <= 0.15

    def test_infinite_threshold(self):
        assert diffusive_fraction(-0.1, 500, 500,
                                  threshold=np.inf, rng_seed=1) == 0.0

    def test_sample_floor(self):
        with pytest.raises(ConfigurationError):
            diffusive_fraction(-0.1, 50, 100)
