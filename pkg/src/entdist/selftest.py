"""Seeded property suites runnable from the command line.

Each suite draws deterministic random instances and checks one proven
property with certificate-aware slack: the trace-norm operator
inequality, monotonicity under local instruments, convexity, strong
additivity of the reversed relative-entropy measure, and optimality of
the Helstrom test. Violations are counted, never silently tolerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hypotest, linalg, measures, states


@dataclass
class SuiteResult:
    name: str
    checked: int
    failed: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failed == 0


def _random_square(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def suite_lemma6(seed: int, count: int) -> SuiteResult:
    """||A B A^dagger||_1 <= ||A^dagger A |B| ||_1 for Hermitian B."""
    rng = np.random.default_rng(seed)
    failed = 0
    for _ in range(count):
        n = int(rng.integers(2, 9))
        a = _random_square(rng, n)
        b = linalg.hermitize(_random_square(rng, n))
        lhs = linalg.trace_norm(a @ b @ a.conj().T)
        rhs = linalg.trace_norm(a.conj().T @ a @ linalg.matrix_abs(b))
        if lhs > rhs + 1e-10 * max(1.0, rhs):
            failed += 1
    return SuiteResult("lemma6-trace-norm-inequality", count, failed)


def suite_monotonicity(seed: int, count: int, gap_tol: float, feas_tol: float) -> SuiteResult:
    """E(sigma) >= sum p_i E(sigma_i) for the trace-norm measure."""
    rng = np.random.default_rng(seed)
    failed = 0
    for k in range(count):
        sigma = states.random_density((2, 2), seed=int(rng.integers(2**31)))
        instr = states.random_instrument(2, int(rng.integers(2, 4)), seed=int(rng.integers(2**31)))
        rep = measures.verify_monotonicity(
            "ET", sigma, instr, gap_tol=gap_tol, feas_tol=feas_tol
        )
        if not rep.passed:
            failed += 1
    return SuiteResult("monotonicity-trace-norm", count, failed)


def suite_convexity(seed: int, count: int, gap_tol: float, feas_tol: float) -> SuiteResult:
    """Mixing does not increase the trace-norm measure."""
    rng = np.random.default_rng(seed)
    failed = 0
    for _ in range(count):
        s1 = states.random_density((2, 2), seed=int(rng.integers(2**31)))
        s2 = states.random_density((2, 2), seed=int(rng.integers(2**31)))
        lam = float(rng.uniform())
        rep = measures.verify_convexity("ET", s1, s2, lam, gap_tol=gap_tol, feas_tol=feas_tol)
        if not rep.passed:
            failed += 1
    return SuiteResult("convexity-trace-norm", count, failed)


def suite_strong_additivity(seed: int, count: int) -> SuiteResult:
    """E(sigma (x) sigma) = 2 E(sigma) for the reversed relative entropy."""
    rng = np.random.default_rng(seed)
    failed = 0
    details = []
    for _ in range(count):
        sigma = _random_npt_two_qubit(rng)
        single = measures.rev_rel_entropy_measure(sigma)
        double = measures.rev_rel_entropy_measure(
            tensor_pair_state(sigma, sigma), gap_tol_bits=1e-4, max_iter=300
        )
        dev = abs(double.value - 2.0 * single.value)
        allowed = 1e-3 + double.gap + 2.0 * single.gap
        details.append(f"dev={dev:.2e} allowed={allowed:.2e}")
        if dev > allowed:
            failed += 1
    return SuiteResult("strong-additivity-reversed", count, failed, "; ".join(details))


def suite_helstrom(seed: int, count: int) -> SuiteResult:
    """No sampled test beats the Helstrom bias."""
    rng = np.random.default_rng(seed)
    failed = 0
    for _ in range(count):
        d = int(rng.integers(2, 5))
        omega = states.random_density((1, d), seed=int(rng.integers(2**31)))
        xi = states.random_density((1, d), seed=int(rng.integers(2**31)))
        best = hypotest.helstrom_test(omega, xi)
        bound = 1.0 - best.alpha - best.beta
        for _ in range(50):
            vals = rng.uniform(0.0, 1.0, d)
            u = states.haar_unitary(d, rng)
            e = u @ np.diag(vals) @ u.conj().T
            res = hypotest.error_probabilities(omega, xi, e)
            if 1.0 - res.alpha - res.beta > bound + 1e-10:
                failed += 1
                break
    return SuiteResult("helstrom-optimality", count, failed)


def _random_npt_two_qubit(rng: np.random.Generator) -> states.DensityMatrix:
    """Rejection-sample a full-rank two-qubit state with a clearly negative
    partial transpose."""
    while True:
        s = states.random_density((2, 2), seed=int(rng.integers(2**31)))
        if states.ppt_min_eigenvalue(s) < -1e-2 and np.linalg.eigvalsh(s.matrix)[0] > 1e-3:
            return s


def tensor_pair_state(s1: states.DensityMatrix, s2: states.DensityMatrix) -> states.DensityMatrix:
    """sigma1 (x) sigma2 arranged on the (A1 A2 | B1 B2) bipartite cut."""
    m = np.kron(s1.matrix, s2.matrix)
    dims = s1.dims + s2.dims  # A1 B1 A2 B2
    m = linalg.permute_factors(m, dims, (0, 2, 1, 3))
    return states.validate(m, (s1.dims[0] * s2.dims[0], s1.dims[1] * s2.dims[1]))


def run_selftest(
    seed: int = 0,
    sizes: int = 20,
    gap_tol: float = 1e-8,
    feas_tol: float = 1e-9,
    echo=print,
) -> list[SuiteResult]:
    """Run every suite at the given scale; deterministic per seed."""
    echo(
        f"selftest seed={seed} sizes={sizes} gap-tol={gap_tol:g} feas-tol={feas_tol:g}"
    )
    results = [
        suite_lemma6(seed, max(10, sizes * 10)),
        suite_monotonicity(seed + 1, max(2, sizes // 2), gap_tol, feas_tol),
        suite_convexity(seed + 2, max(2, sizes // 4), gap_tol, feas_tol),
        suite_strong_additivity(seed + 3, max(1, sizes // 20)),
        suite_helstrom(seed + 4, max(5, sizes * 2)),
    ]
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        extra = f"  ({r.detail})" if r.detail and not r.passed else ""
        echo(f"[{tag}] {r.name}: {r.checked - r.failed}/{r.checked} checks{extra}")
    return results
