import math

import numpy as np
import pytest

from entdist import linalg, states
from conftest import loop_partial_trace, random_hermitian


def test_kron_identities():
    assert np.array_equal(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    got = linalg.kron(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    assert np.array_equal(got, np.diag([0.0, 1.0, 0.0, 0.0]))


def test_kron_spectrum_is_product_of_spectra(rng):
    for _ in range(10):
        a = states.random_density((1, 2), seed=int(rng.integers(2**31))).matrix
        b = states.random_density((1, 2), seed=int(rng.integers(2**31))).matrix
        k = linalg.kron(a, b)
        assert abs(np.trace(k) - 1.0) < 1e-12
        ev_a = np.linalg.eigvalsh(a)
        ev_b = np.linalg.eigvalsh(b)
        products = np.sort(np.outer(ev_a, ev_b).ravel())
        assert np.allclose(np.sort(np.linalg.eigvalsh(k)), products, atol=1e-12)


def test_partial_trace_of_product():
    rho = states.random_density((1, 2), seed=1).matrix
    tau = states.random_density((1, 2), seed=2).matrix
    got = linalg.partial_trace(np.kron(rho, tau), (2, 2), "A")
    assert np.max(np.abs(got - rho)) < 1e-12
    got_b = linalg.partial_trace(np.kron(rho, tau), (2, 2), "B")
    assert np.max(np.abs(got_b - tau)) < 1e-12


def test_partial_trace_bell_is_maximally_mixed():
    bell = states.bell_state().matrix
    for keep in ("A", "B"):
        assert np.max(np.abs(linalg.partial_trace(bell, (2, 2), keep) - np.eye(2) / 2)) < 1e-12


def test_partial_trace_against_loop_oracle():
    # the pure member of the mixing family has marginal spectrum {0.2, 0.8}
    m = states.example4_state(1.0).matrix
    fast = linalg.partial_trace(m, (2, 2), "A")
    slow = loop_partial_trace(m, (2, 2), "A")
    assert np.max(np.abs(fast - slow)) < 1e-14
    assert abs(np.trace(fast).real - 1.0) < 1e-12
    assert np.allclose(np.linalg.eigvalsh(fast), [0.2, 0.8], atol=1e-12)


def test_partial_trace_preserves_trace(rng):
    for _ in range(20):
        m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        for keep in ("A", "B"):
            red = linalg.partial_trace(m, (2, 3), keep)
            assert abs(np.trace(red) - np.trace(m)) < 1e-12


def test_partial_transpose_involution(rng):
    for dims in ((2, 2), (2, 3)):
        d = dims[0] * dims[1]
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        for sub in ("A", "B"):
            twice = linalg.partial_transpose(
                linalg.partial_transpose(m, dims, sub), dims, sub
            )
            assert np.array_equal(twice, m)  # pure entry permutation


def test_partial_transpose_bell_spectrum():
    g = linalg.partial_transpose(states.bell_state().matrix, (2, 2), "B")
    assert np.allclose(np.linalg.eigvalsh(g), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_partial_transpose_of_product_states_stays_positive(rng):
    for _ in range(10):
        a = states.random_density((1, 2), seed=int(rng.integers(2**31))).matrix
        b = states.random_density((1, 3), seed=int(rng.integers(2**31))).matrix
        g = linalg.partial_transpose(np.kron(a, b), (2, 3), "B")
        assert np.linalg.eigvalsh(g)[0] > -1e-12


def test_eig_hermitian_sorting_and_rank_one():
    dec = linalg.eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(dec.eigenvalues, [1.0, 2.0, 3.0])
    dec = linalg.eig_hermitian(states.bell_state().matrix)
    assert np.allclose(dec.eigenvalues, [0.0, 0.0, 0.0, 1.0], atol=1e-12)


def test_eig_hermitian_reconstruction(rng):
    for _ in range(50):
        n = int(rng.integers(2, 33))
        m = random_hermitian(rng, n)
        dec = linalg.eig_hermitian(m)
        u, vals = dec.eigenvectors, dec.eigenvalues
        resid = np.linalg.norm((u * vals) @ u.conj().T - m) / max(1.0, np.linalg.norm(m))
        assert resid < 1e-10
        assert np.linalg.norm(u.conj().T @ u - np.eye(n)) < 1e-10


def test_eig_hermitian_deterministic(rng):
    m = random_hermitian(rng, 6)
    d1 = linalg.eig_hermitian(m)
    d2 = linalg.eig_hermitian(m.copy())
    assert np.array_equal(d1.eigenvalues, d2.eigenvalues)
    assert np.array_equal(d1.eigenvectors, d2.eigenvectors)


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        linalg.eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_matrix_abs_and_support_log():
    assert np.allclose(linalg.matrix_abs(np.diag([1.0, -2.0])), np.diag([1.0, 2.0]))
    got = linalg.matrix_log_on_support(np.diag([0.5, 0.5, 0.0, 0.0]))
    assert np.allclose(got, np.diag([-1.0, -1.0, 0.0, 0.0]), atol=1e-12)


def test_exp_log_round_trip(rng):
    rho = states.random_density((2, 2), seed=7).matrix
    back = linalg.matrix_exp(linalg.matrix_log(rho))
    assert np.max(np.abs(back - rho)) < 1e-9


def test_matrix_function_rejects_undefined_values():
    with pytest.raises(ValueError):
        linalg.matrix_function(np.diag([1.0, 0.0]), np.log)


def test_trace_norm_values(rng):
    rho = states.random_density((2, 2), seed=3).matrix
    assert abs(linalg.trace_norm(rho) - 1.0) < 1e-12
    # spectrum of bell - 1/4: {3/4, -1/4 x3}, moduli sum to 3/2
    m = states.bell_state().matrix - np.eye(4) / 4
    assert abs(linalg.trace_norm(m) - 1.5) < 1e-12


def test_trace_norm_unitary_invariance(rng):
    for _ in range(10):
        a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        u = states.haar_unitary(5, rng)
        v = states.haar_unitary(5, rng)
        assert abs(linalg.trace_norm(a) - linalg.trace_norm(u @ a @ v)) < 1e-10


def test_relative_entropy_basic():
    rho = states.random_density((1, 3), seed=5).matrix
    assert abs(linalg.relative_entropy(rho, rho)) < 1e-10
    # classical KL oracle on diagonals
    kl = 0.5 * math.log2(0.5 / 0.25) + 0.5 * math.log2(0.5 / 0.75)
    got = linalg.relative_entropy(np.diag([0.5, 0.5]), np.diag([0.25, 0.75]))
    assert abs(got - kl) < 1e-12
    assert abs(got - 0.2075187496394219) < 1e-12


def test_relative_entropy_support_violation():
    v1 = np.array([1.0, 0.0])
    v2 = np.array([1.0, 1.0]) / math.sqrt(2.0)
    assert linalg.relative_entropy(np.outer(v1, v1), np.outer(v2, v2)) == math.inf


def test_relative_entropy_joint_convexity(rng):
    for _ in range(20):
        seeds = rng.integers(2**31, size=4)
        r1 = states.random_density((1, 3), seed=int(seeds[0])).matrix
        r2 = states.random_density((1, 3), seed=int(seeds[1])).matrix
        s1 = states.random_density((1, 3), seed=int(seeds[2])).matrix
        s2 = states.random_density((1, 3), seed=int(seeds[3])).matrix
        lam = float(rng.uniform())
        mixed = linalg.relative_entropy(
            lam * r1 + (1 - lam) * r2, lam * s1 + (1 - lam) * s2
        )
        combo = lam * linalg.relative_entropy(r1, s1) + (1 - lam) * linalg.relative_entropy(
            r2, s2
        )
        assert mixed <= combo + 1e-9


def test_log_gradient_diagonal_and_identity():
    sigma = np.diag([0.3, 0.7]).astype(complex)
    rho = np.diag([0.6, 0.4]).astype(complex)
    got = linalg.log_gradient(sigma, rho)
    assert np.allclose(got, -np.diag([0.3 / 0.6, 0.7 / 0.4]), atol=1e-12)
    rho = states.random_density((1, 4), seed=9).matrix
    assert np.max(np.abs(linalg.log_gradient(rho, rho) + np.eye(4))) < 1e-10


def test_log_gradient_matches_finite_differences(rng):
    for _ in range(5):
        sigma = states.random_density((2, 2), seed=int(rng.integers(2**31))).matrix
        rho = states.random_density((2, 2), seed=int(rng.integers(2**31))).matrix
        g = linalg.log_gradient(sigma, rho)
        h = random_hermitian(rng, 4)
        h /= np.linalg.norm(h)
        eps = 1e-6

        def f(m):
            return -float(np.real(np.trace(sigma @ linalg.matrix_log(m))))

        fd = (f(rho + eps * h) - f(rho - eps * h)) / (2 * eps)
        an = float(np.real(np.trace(g @ h)))
        assert abs(fd - an) < 1e-5 * max(1.0, abs(an))


def test_lemma6_trace_norm_inequality_small(rng):
    for _ in range(100):
        n = int(rng.integers(2, 9))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = random_hermitian(rng, n)
        lhs = linalg.trace_norm(a @ b @ a.conj().T)
        rhs = linalg.trace_norm(a.conj().T @ a @ linalg.matrix_abs(b))
        assert lhs <= rhs + 1e-10 * max(1.0, rhs)


def test_permute_factors_regroups_tensor_products(rng):
    a = states.random_density((1, 2), seed=21).matrix
    b = states.random_density((1, 3), seed=22).matrix
    c = states.random_density((1, 2), seed=23).matrix
    m = np.kron(np.kron(a, b), c)
    swapped = linalg.permute_factors(m, (2, 3, 2), (2, 0, 1))
    assert np.max(np.abs(swapped - np.kron(np.kron(c, a), b))) < 1e-14
