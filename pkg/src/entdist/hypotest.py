"""Binary quantum hypothesis testing: optimal tests and error trade-offs.

A dichotomic test is an operator E with 0 <= E <= 1; accepting the null
state omega on outcome E gives error probabilities

    alpha = tr[omega (1 - E)]      (rejecting omega although it holds)
    beta  = tr[xi E]               (accepting omega although xi holds).

Provided here: the single-copy Helstrom test, randomized
Neyman-Pearson tests on n-fold tensor powers (minimal beta at a type-I
level), the finite-n decay-rate table that approaches the relative
entropy, and the faster-than-exponential construction against a pure
alternative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .states import DensityMatrix

#: largest matrix dimension the tensor-power routines will build.
MAX_POWER_DIM = 4096

#: eigenvalues of omega^n - t xi^n within this of zero form the
#: randomization boundary of the threshold test.
BOUNDARY_BAND = 1e-11


@dataclass(frozen=True)
class HypothesisTestResult:
    """A test operator with its two error probabilities."""

    test: np.ndarray
    alpha: float
    beta: float


@dataclass(frozen=True)
class SteinRow:
    n: int
    beta_star: float
    rate_bits: float


@dataclass(frozen=True)
class SteinTable:
    """Per-copy type-II error decay rates against the asymptotic target."""

    rows: tuple[SteinRow, ...]
    target_bits: float
    epsilon: float


def _check_test_operator(e: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    e = linalg._as_array(e)
    if np.max(np.abs(e - e.conj().T)) > tol:
        raise ValueError("test operator must be Hermitian")
    vals = np.linalg.eigvalsh(linalg.hermitize(e))
    if vals[0] < -tol or vals[-1] > 1.0 + tol:
        raise ValueError(
            f"test operator outside [0, 1]: spectrum in [{vals[0]:.3e}, {vals[-1]:.6f}]"
        )
    return linalg.hermitize(e)


def error_probabilities(
    omega: DensityMatrix, xi: DensityMatrix, e: np.ndarray
) -> HypothesisTestResult:
    """Evaluate both error probabilities of a test operator."""
    if omega.matrix.shape != xi.matrix.shape or omega.matrix.shape != np.shape(
        linalg._as_array(e)
    ):
        raise ValueError("state and test dimensions must agree")
    e = _check_test_operator(e)
    alpha = float(np.real(np.trace(omega.matrix @ (np.eye(e.shape[0]) - e))))
    beta = float(np.real(np.trace(xi.matrix @ e)))
    return HypothesisTestResult(e, alpha, beta)


def helstrom_test(omega: DensityMatrix, xi: DensityMatrix) -> HypothesisTestResult:
    """Projector onto the strictly positive eigenspace of omega - xi.

    Maximizes the bias 1 - alpha - beta over all tests; the maximum
    equals half the trace-norm distance of the pair.
    """
    if omega.dims != xi.dims:
        raise ValueError("states must share dimensions")
    vals, vecs = linalg.eig_hermitian(omega.matrix - xi.matrix)
    cols = vecs[:, vals > 0.0]
    e = cols @ cols.conj().T
    return error_probabilities(omega, xi, e)


def tensor_power(m: np.ndarray, n: int, max_dim: int = MAX_POWER_DIM) -> np.ndarray:
    """n-fold Kronecker power with a hard dimension guard."""
    if n < 1:
        raise ValueError("power must be at least 1")
    if m.shape[0] ** n > max_dim:
        raise ValueError(
            f"tensor power dimension {m.shape[0]}**{n} exceeds the {max_dim} limit"
        )
    out = m
    for _ in range(n - 1):
        out = np.kron(out, m)
    return out


def _threshold_test(w: np.ndarray, x: np.ndarray, t: float):
    """Spectral split of w - t*x into positive part and boundary band."""
    vals, vecs = np.linalg.eigh(linalg.hermitize(w - t * x))
    pos = vecs[:, vals > BOUNDARY_BAND]
    zero = vecs[:, np.abs(vals) <= BOUNDARY_BAND]
    p_pos = pos @ pos.conj().T
    p_zero = zero @ zero.conj().T
    return p_pos, p_zero


def neyman_pearson(
    omega: DensityMatrix, xi: DensityMatrix, n: int, epsilon: float
) -> tuple[float, HypothesisTestResult]:
    """Minimal type-II error on n copies at type-I level epsilon.

    The optimal test is the threshold projector onto the positive part of
    omega^(x)n - t xi^(x)n plus a scalar randomization weight on the
    boundary eigenspace; t is found by bisection so the achieved alpha
    equals epsilon to 1e-10. No valid test with alpha <= epsilon does
    better on beta.
    """
    if omega.dims != xi.dims:
        raise ValueError("states must share dimensions")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    w = tensor_power(omega.matrix, n)
    x = tensor_power(xi.matrix, n)
    dim = w.shape[0]

    # beta = 0 branch: tests supported on ker(xi^n)
    xvals, xvecs = np.linalg.eigh(x)
    ker = xvecs[:, xvals <= linalg.SUPPORT_CLIP]
    if ker.shape[1]:
        e0 = ker @ ker.conj().T
        hit = float(np.real(np.trace(w @ e0)))
        if 1.0 - hit <= epsilon and hit > 0.0:
            c = (1.0 - epsilon) / hit
            e = linalg.hermitize(c * e0)
            alpha = 1.0 - c * hit
            beta = float(np.real(np.trace(x @ e)))
            return beta, HypothesisTestResult(e, alpha, beta)

    def alpha_plain(t: float) -> float:
        p_pos, _ = _threshold_test(w, x, t)
        return 1.0 - float(np.real(np.trace(w @ p_pos)))

    t_lo, t_hi = 0.0, 1.0
    for _ in range(200):
        if alpha_plain(t_hi) > epsilon:
            break
        t_lo = t_hi
        t_hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the Neyman-Pearson threshold")

    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        if mid == t_lo or mid == t_hi:
            break
        if alpha_plain(mid) > epsilon:
            t_hi = mid
        else:
            t_lo = mid

    for t in (0.5 * (t_lo + t_hi), t_hi, t_lo):
        p_pos, p_zero = _threshold_test(w, x, t)
        a0 = 1.0 - float(np.real(np.trace(w @ p_pos)))
        r0 = float(np.real(np.trace(w @ p_zero)))
        if a0 - r0 <= epsilon + 1e-12 <= a0 + 1e-12:
            q = 0.0 if r0 <= 0.0 else min(max((a0 - epsilon) / r0, 0.0), 1.0)
            e = linalg.hermitize(p_pos + q * p_zero)
            alpha = 1.0 - float(np.real(np.trace(w @ e)))
            beta = float(np.real(np.trace(x @ e)))
            if abs(alpha - epsilon) > 1e-10:
                continue
            return beta, HypothesisTestResult(e, alpha, beta)
    raise RuntimeError(
        f"randomized threshold test failed to reach alpha = {epsilon}; "
        f"bracket [{t_lo}, {t_hi}]"
    )


def stein_table(
    omega: DensityMatrix, xi: DensityMatrix, epsilon: float, n_max: int
) -> SteinTable:
    """beta*_n and its per-copy decay rate for n = 1..n_max.

    The asymptotic target is minus the relative entropy (in bits); it is
    reported as -inf when omega's support leaks out of xi's, in which
    case the rates diverge and the pure-alternative construction applies.
    """
    target = -linalg.relative_entropy(omega.matrix, xi.matrix)
    rows = []
    for n in range(1, n_max + 1):
        beta_star, _ = neyman_pearson(omega, xi, n, epsilon)
        rate = math.log2(beta_star) / n if beta_star > 0.0 else -math.inf
        rows.append(SteinRow(n, beta_star, rate))
    return SteinTable(tuple(rows), target, epsilon)


def pure_state_divergence(
    omega: DensityMatrix, xi: DensityMatrix, n: int
) -> tuple[float, float]:
    """Errors of the test 1 - xi^(x)n against a pure alternative xi.

    Gives beta = 0 at every n with alpha = tr[omega xi]^n, so the optimal
    type-II error hits exactly zero at a finite number of copies. Checked
    against the explicit tensor-power evaluation whenever the powers fit
    the dimension guard.
    """
    vals = np.linalg.eigvalsh(xi.matrix)
    if vals[-1] < 1.0 - 1e-10:
        raise ValueError("the alternative state must be pure")
    if np.max(np.abs(omega.matrix - xi.matrix)) <= 1e-12:
        raise ValueError("states must differ")
    overlap = float(np.real(np.trace(omega.matrix @ xi.matrix)))
    alpha = overlap**n
    beta = 0.0
    if xi.dim**n <= MAX_POWER_DIM:
        w = tensor_power(omega.matrix, n)
        xp = tensor_power(xi.matrix, n)
        e = np.eye(w.shape[0]) - xp
        alpha_exp = float(np.real(np.trace(w @ (np.eye(w.shape[0]) - e))))
        beta_exp = float(np.real(np.trace(xp @ e)))
        if abs(alpha_exp - alpha) > 1e-10 or abs(beta_exp) > 1e-10:
            raise RuntimeError(
                f"tensor-power verification failed: alpha {alpha_exp} vs {alpha}, "
                f"beta {beta_exp}"
            )
    return alpha, beta
