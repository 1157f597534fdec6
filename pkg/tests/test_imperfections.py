"""Disorder sampling, the hardware Hamiltonian, and the inter-gate
propagator."""

import numpy as np
import pytest

from sawsim import (
    ContractError,
    ImperfectionParams,
    build_static_hamiltonian,
    compile_iteration,
    make_params,
    make_propagator,
    oracle_floquet,
    run_perturbed_iteration,
    sample_disorder,
)
from sawsim.imperfections import diagonal_propagator

from conftest import random_state


class TestSampleDisorder:
    def test_zero_amplitudes(self):
        r = sample_disorder(5, ImperfectionParams(0.0, 0.0), 1, 0)
        assert not r.deltas.any() and not r.couplings.any()

    def test_deterministic(self):
        p = ImperfectionParams(1e-3, 1e-3)
        a = sample_disorder(6, p, 42, (6, 3, 17))
        b = sample_disorder(6, p, 42, (6, 3, 17))
        np.testing.assert_array_equal(a.deltas, b.deltas)
        np.testing.assert_array_equal(a.couplings, b.couplings)
        c = sample_disorder(6, p, 42, (6, 3, 18))
        assert (a.deltas != c.deltas).any()

    def test_uniform_law(self):
        # delta_i uniform on [-delta/2, delta/2]: mean 0, full range covered
        p = ImperfectionParams(2.0)
        draws = np.array([
            sample_disorder(2, p, 7, i).deltas[0] for i in range(100_000)])
        assert abs(draws.mean()) < 0.01
        assert draws.min() >= -1.0 and draws.max() <= 1.0
        assert draws.min() < -0.99 and draws.max() > 0.99

    def test_amplitude_scaling_with_same_seed(self):
        # same (seed, index) scales linearly with the amplitudes
        a = sample_disorder(4, ImperfectionParams(1.0, 1.0), 9, 2)
        b = sample_disorder(4, ImperfectionParams(0.5, 0.5), 9, 2)
        np.testing.assert_allclose(a.deltas, 2 * b.deltas, atol=1e-15)


class TestStaticHamiltonian:
    def test_single_qubit_detuning(self):
        r = sample_disorder(1, ImperfectionParams(0.0), 1, 0)
        r = type(r)(np.array([0.37]), np.empty(0), r.seed)
        H = build_static_hamiltonian(r)
        np.testing.assert_allclose(np.linalg.eigvalsh(H), [-0.37, 0.37],
                                   atol=1e-14)

    def test_diagonal_when_uncoupled(self):
        r = sample_disorder(4, ImperfectionParams(0.5), 11, 1)
        H = build_static_hamiltonian(r)
        assert not (H - np.diag(np.diag(H))).any()
        # entries are the signed sums of the detunings
        m = np.arange(16)
        signs = np.array([1 - 2 * ((m >> (4 - i)) & 1) for i in range(1, 5)])
        np.testing.assert_allclose(np.diag(H), signs.T @ r.deltas, atol=1e-14)

    def test_two_qubit_pure_coupling_spectrum(self):
        # 4x4 oracle: H = g * sigma_x sigma_x has eigenvalues {+-g, +-g}
        g = 0.7
        r = sample_disorder(2, ImperfectionParams(0.0), 1, 0)
        r = type(r)(np.zeros(2), np.array([g]), r.seed)
        H = build_static_hamiltonian(r)
        oracle = np.zeros((4, 4))
        oracle[0, 3] = oracle[3, 0] = oracle[1, 2] = oracle[2, 1] = g
        np.testing.assert_allclose(H, oracle, atol=0)
        np.testing.assert_allclose(np.linalg.eigvalsh(H), [-g, -g, g, g],
                                   atol=1e-14)

    def test_traceless(self, rng):
        for _ in range(20):
            r = sample_disorder(5, ImperfectionParams(1.0, 1.0),
                                int(rng.integers(1 << 30)), 0)
            H = build_static_hamiltonian(r)
            assert abs(np.trace(H)) < 1e-10


def _taylor_expm(H, tau, terms=50):
    """Scaled-and-squared truncated series for exp(-1j*H*tau)."""
    A = -1j * H * tau
    s = max(0, int(np.ceil(np.log2(max(np.abs(A).sum(axis=1).max(), 1e-30)))) + 1)
    A = A / (1 << s)
    E = np.eye(len(H), dtype=complex)
    term = np.eye(len(H), dtype=complex)
    for k in range(1, terms + 1):
        term = term @ A / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


class TestPropagator:
    def test_zero_time_is_identity(self, rng):
        r = sample_disorder(3, ImperfectionParams(1.0, 1.0), 5, 0)
        E = make_propagator(build_static_hamiltonian(r), 0.0)
        np.testing.assert_allclose(E.dense(), np.eye(8), atol=1e-14)

    def test_group_property(self):
        r = sample_disorder(3, ImperfectionParams(0.3, 0.3), 6, 1)
        H = build_static_hamiltonian(r)
        fwd = make_propagator(H, 1.0).dense()
        back = make_propagator(H, -1.0).dense()
        np.testing.assert_allclose(fwd @ back, np.eye(8), atol=1e-11)

    def test_against_taylor_series_oracle(self):
        r = sample_disorder(3, ImperfectionParams(0.8, 0.8), 12, 4)
        H = build_static_hamiltonian(r)
        E = make_propagator(H, 1.0)
        np.testing.assert_allclose(E.dense(), _taylor_expm(H, 1.0),
                                   atol=1e-10)
        assert E.eigenvalues is not None  # eigensystem cached

    def test_unitary_and_real_spectrum(self):
        r = sample_disorder(4, ImperfectionParams(1.0, 1.0), 3, 2)
        E = make_propagator(build_static_hamiltonian(r), 1.0)
        M = E.dense()
        assert np.abs(M @ M.conj().T - np.eye(16)).max() < 1e-10
        assert np.isrealobj(E.eigenvalues)

    def test_fast_path_matches_dense_path(self):
        r = sample_disorder(4, ImperfectionParams(0.01), 8, 5)
        fast = diagonal_propagator(r, 1.0)
        dense = make_propagator(build_static_hamiltonian(r), 1.0)
        assert fast.is_diagonal and dense.is_diagonal
        np.testing.assert_allclose(fast.phases, dense.phases, atol=1e-12)

    def test_rejects_non_hermitian(self):
        H = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ContractError):
            make_propagator(H, 1.0)


class TestPerturbedIteration:
    def test_identity_propagator_matches_ideal(self, rng):
        p = make_params(np.sqrt(2), 4)
        seq = compile_iteration(p)
        from sawsim.imperfections import InterGatePropagator
        E = InterGatePropagator(1.0, phases=np.ones(16, dtype=complex))
        st = random_state(4, rng)
        got = run_perturbed_iteration(st, seq, E)
        np.testing.assert_allclose(got.amp, oracle_floquet(p) @ st.amp,
                                   atol=1e-12)

    def test_zero_disorder_matches_oracle(self, rng):
        p = make_params(-0.1, 4, 0.2, 0.4)
        seq = compile_iteration(p)
        r = sample_disorder(4, ImperfectionParams(0.0), 3, 1)
        E = diagonal_propagator(r, 1.0)
        st = random_state(4, rng)
        got = run_perturbed_iteration(st, seq, E)
        np.testing.assert_allclose(got.amp, oracle_floquet(p) @ st.amp,
                                   atol=1e-10)

    def test_norm_preserved_under_disorder(self, rng):
        p = make_params(np.sqrt(2), 5)
        seq = compile_iteration(p)
        r = sample_disorder(5, ImperfectionParams(1e-3, 1e-3), 21, 0)
        E = make_propagator(build_static_hamiltonian(r), 1.0)
        for _ in range(5):
            st = run_perturbed_iteration(random_state(5, rng), seq, E)
            assert abs(st.norm() - 1.0) < 1e-9

    def test_dimension_mismatch(self, rng):
        p = make_params(np.sqrt(2), 4)
        seq = compile_iteration(p)
        r = sample_disorder(3, ImperfectionParams(1e-3), 2, 0)
        with pytest.raises(ContractError):
            run_perturbed_iteration(random_state(4, rng), seq,
                                    diagonal_propagator(r, 1.0))

    def test_linear_convergence_to_ideal(self):
        # deviation from the ideal operator scales linearly in eps
        from sawsim.floquet import build_floquet
        p = make_params(np.sqrt(2), 4)
        seq = compile_iteration(p)
        U0 = oracle_floquet(p)
        devs = []
        for eps in (1e-8, 1e-7):
            r = sample_disorder(4, ImperfectionParams(eps), 17, 0)
            U = build_floquet(p, seq, diagonal_propagator(r, 1.0))
            devs.append(np.abs(U - U0).max())
        ratio = devs[1] / devs[0]
        assert 10 / 3 <= ratio <= 30
