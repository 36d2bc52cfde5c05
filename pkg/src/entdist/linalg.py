"""Dense complex linear algebra for bipartite operators.

Tensor-structure manipulation (Kronecker products, partial trace and
partial transpose), deterministic Hermitian spectral decompositions,
matrix functions, trace norms, quantum relative entropy and the gradient
of the matrix logarithm. Everything operates on plain complex128
``numpy`` arrays; all functions are pure.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

LN2 = math.log(2.0)

#: eigenvalues inside (-SUPPORT_CLIP, SUPPORT_CLIP) are treated as zero
#: when deciding supports.
SUPPORT_CLIP = 1e-12

#: support(rho) is considered contained in support(sigma) when
#: tr[(1 - P_sigma) rho] does not exceed this.
SUPPORT_LEAK_TOL = 1e-10

#: |lambda_i - lambda_j| below this switches a divided difference of the
#: logarithm to the derivative 1/lambda_i (removes 0/0).
DEGENERACY_TOL = 1e-12


def _as_array(m) -> np.ndarray:
    """Accept a bare array or anything carrying a ``.matrix`` attribute."""
    m = getattr(m, "matrix", m)
    return np.asarray(m, dtype=np.complex128)


def hermitize(m: np.ndarray) -> np.ndarray:
    """Hermitian part (m + m^dagger)/2."""
    return (m + m.conj().T) / 2.0


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = _as_array(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol * max(1.0, float(np.max(np.abs(m)))))


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def kron(a, b) -> np.ndarray:
    """Kronecker product; the first factor is the outer (left) index."""
    return np.kron(_as_array(a), _as_array(b))


def _check_bipartite(m: np.ndarray, dims: tuple[int, int]) -> None:
    da, db = dims
    if m.shape != (da * db, da * db):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")


def partial_trace(m, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Reduce a bipartite operator to one subsystem.

    Parameters
    ----------
    m : array of shape (dA*dB, dA*dB)
    dims : (dA, dB)
    keep : "A" or "B", the subsystem kept.
    """
    m = _as_array(m)
    _check_bipartite(m, dims)
    da, db = dims
    t = m.reshape(da, db, da, db)
    k = keep.upper()
    if k == "A":
        return np.einsum("abcb->ac", t)
    if k == "B":
        return np.einsum("abad->bd", t)
    raise ValueError("keep must be 'A' or 'B'")


def partial_transpose(m, dims: tuple[int, int], subsystem: str = "B") -> np.ndarray:
    """Transpose one tensor factor of a bipartite operator (an involution)."""
    m = _as_array(m)
    _check_bipartite(m, dims)
    da, db = dims
    t = m.reshape(da, db, da, db)
    s = subsystem.upper()
    if s == "B":
        t = t.transpose(0, 3, 2, 1)
    elif s == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError("subsystem must be 'A' or 'B'")
    return t.reshape(da * db, da * db)


def permute_factors(m, dims: tuple[int, ...], perm: tuple[int, ...]) -> np.ndarray:
    """Reorder tensor factors of an operator on a multi-factor space.

    ``perm[k]`` names the old factor placed at position k of the output;
    used e.g. to regroup sigma (x) sigma from (A1 B1 A2 B2) into the
    (A1 A2)(B1 B2) bipartite cut.
    """
    m = _as_array(m)
    n = len(dims)
    d = int(np.prod(dims))
    if m.shape != (d, d):
        raise ValueError("matrix does not match dims")
    if sorted(perm) != list(range(n)):
        raise ValueError("perm must be a permutation of the factors")
    t = m.reshape(dims + dims)
    axes = tuple(perm) + tuple(p + n for p in perm)
    new_dims = tuple(dims[p] for p in perm)
    d_new = int(np.prod(new_dims))
    return t.transpose(axes).reshape(d_new, d_new)


class SpectralDecomposition(NamedTuple):
    """Eigenvalues in ascending order and a unitary of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eig_hermitian(m, check_tol: float = 1e-10) -> SpectralDecomposition:
    """Deterministic spectral decomposition of a Hermitian matrix.

    The input is symmetrized before solving; inputs farther than
    ``check_tol`` from Hermitian are rejected. Eigenvalues come out
    ascending and each eigenvector's largest-modulus component is made
    real positive so repeated runs agree to the bit.
    """
    m = _as_array(m)
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    if np.max(np.abs(m - m.conj().T)) > check_tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(hermitize(m))
    anchor = np.argmax(np.abs(vecs), axis=0)
    phases = vecs[anchor, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(phases) > 0, phases / np.abs(phases), 1.0)
    vecs = vecs / phases[np.newaxis, :]
    return SpectralDecomposition(vals, vecs)


def matrix_function(m, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    vals, vecs = eig_hermitian(m)
    with np.errstate(all="ignore"):
        fvals = np.asarray(f(vals), dtype=np.float64)
    if not np.all(np.isfinite(fvals)):
        raise ValueError("scalar function undefined on part of the spectrum")
    return (vecs * fvals) @ vecs.conj().T


def matrix_abs(m) -> np.ndarray:
    """|m| = (m^dagger m)^(1/2) for Hermitian m, via |eigenvalues|."""
    return matrix_function(m, np.abs)


def matrix_log(m) -> np.ndarray:
    """Natural-log matrix logarithm; requires a strictly positive spectrum."""
    vals, vecs = eig_hermitian(m)
    if np.min(vals) <= 0.0:
        raise ValueError("matrix_log requires a positive definite input")
    return (vecs * np.log(vals)) @ vecs.conj().T


def matrix_log_on_support(m, base: float = 2.0, clip: float = SUPPORT_CLIP) -> np.ndarray:
    """Logarithm restricted to the support; off-support directions map to 0.

    Eigenvalues at or below ``clip`` are treated as off-support.
    """
    vals, vecs = eig_hermitian(m)
    out = np.zeros_like(vals)
    on = vals > clip
    out[on] = np.log(vals[on]) / math.log(base)
    return (vecs * out) @ vecs.conj().T


def matrix_exp(m) -> np.ndarray:
    return matrix_function(m, np.exp)


def support_projector(m, clip: float = SUPPORT_CLIP) -> tuple[np.ndarray, int]:
    """Projector onto the span of eigenvectors with eigenvalue > clip."""
    vals, vecs = eig_hermitian(m)
    cols = vecs[:, vals > clip]
    return cols @ cols.conj().T, cols.shape[1]


def trace_norm(m) -> float:
    """Sum of singular values; Hermitian inputs take the |eigenvalue| path."""
    m = _as_array(m)
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    if np.max(np.abs(m - m.conj().T)) <= 1e-10 * max(1.0, scale):
        return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(m)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def relative_entropy(rho, sigma) -> float:
    """Quantum relative entropy tr[rho log2 rho - rho log2 sigma] in bits.

    Returns ``math.inf`` when the support of rho leaks out of the support
    of sigma by more than the support tolerance. Off-support eigenvalues
    of either argument are excluded per the clipping policy.
    """
    rho = _as_array(rho)
    sigma = _as_array(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("relative_entropy needs equal dimensions")
    svals, svecs = eig_hermitian(sigma)
    on = svals > SUPPORT_CLIP
    off_cols = svecs[:, ~on]
    leak = float(np.real(np.einsum("ij,ji->", off_cols.conj().T @ rho, off_cols)))
    if leak > SUPPORT_LEAK_TOL:
        return math.inf
    rvals, rvecs = eig_hermitian(rho)
    ron = rvals > SUPPORT_CLIP
    plogp = float(np.sum(rvals[ron] * np.log(rvals[ron])))
    # tr[rho log sigma] over sigma's support only; the off-support overlap
    # is below SUPPORT_LEAK_TOL and dropped.
    diag = np.real(np.einsum("ij,jk,ki->i", svecs.conj().T, rho, svecs))
    plogs = float(np.sum(diag[on] * np.log(svals[on])))
    return (plogp - plogs) / LN2


def log_divided_differences(eigvals: np.ndarray) -> np.ndarray:
    """First divided differences of the natural log at the given eigenvalues.

    Entry (i, j) is (log l_i - log l_j)/(l_i - l_j), with 1/l_i on (near-)
    degenerate pairs.
    """
    lam = np.asarray(eigvals, dtype=np.float64)
    if np.min(lam) <= 0.0:
        raise ValueError("divided differences of log need positive eigenvalues")
    diff = lam[:, None] - lam[None, :]
    close = np.abs(diff) < DEGENERACY_TOL
    safe = np.where(close, 1.0, diff)
    phi = (np.log(lam)[:, None] - np.log(lam)[None, :]) / safe
    inv = 1.0 / lam
    phi[close] = 0.5 * (inv[:, None] + inv[None, :])[close]
    return phi


def log_gradient(sigma, rho) -> np.ndarray:
    """Gradient of rho -> -tr[sigma log rho] at rho, natural-log units.

    Daleckii-Krein form: with rho = U diag(l) U^dagger, the gradient is
    -U (Phi o (U^dagger sigma U)) U^dagger where Phi holds the first
    divided differences of log. Requires rho positive definite.
    """
    sigma = _as_array(sigma)
    vals, vecs = eig_hermitian(rho)
    if np.min(vals) <= 0.0:
        raise ValueError("log_gradient requires a full-rank density matrix")
    phi = log_divided_differences(vals)
    sig_t = vecs.conj().T @ sigma @ vecs
    g = -(vecs @ (phi * sig_t) @ vecs.conj().T)
    return hermitize(g)
