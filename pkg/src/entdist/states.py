"""Validated bipartite density matrices and local quantum operations.

Provides the ``DensityMatrix`` value type, the feasible-set description
(PPT states sharing a given state's marginals), named reference states,
seeded random state/instrument generators, Kraus instruments acting on
subsystem A, and the JSON state-file format used by the CLI.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import linalg


class StateValidationError(ValueError):
    """Raised when a matrix fails to validate as a quantum state."""


@dataclass(frozen=True)
class DensityMatrix:
    """A validated bipartite quantum state.

    ``matrix`` is Hermitian, positive semidefinite and unit trace within
    tolerance; ``dims`` is the (dA, dB) subsystem dimension pair. Use
    :func:`validate` to construct from raw data.
    """

    matrix: np.ndarray
    dims: tuple[int, int]

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    def marginal(self, keep: str) -> np.ndarray:
        return linalg.partial_trace(self.matrix, self.dims, keep)

    def __eq__(self, other) -> bool:  # value semantics for tests
        return (
            isinstance(other, DensityMatrix)
            and self.dims == other.dims
            and np.array_equal(self.matrix, other.matrix)
        )


def validate(m, dims: tuple[int, int], tol: float = 1e-8) -> DensityMatrix:
    """Validate a matrix as a density operator on the given bipartition.

    Drifts below ``tol`` (slight non-Hermiticity, trace off 1, eigenvalues
    barely below 0) are repaired by symmetrizing, renormalizing and
    clipping; anything beyond is rejected.
    """
    m = linalg._as_array(m)
    da, db = dims
    if da < 1 or db < 1 or m.shape != (da * db, da * db):
        raise StateValidationError(f"matrix shape {m.shape} does not match dims {dims}")
    if not np.all(np.isfinite(m)):
        raise StateValidationError("matrix has non-finite entries")
    herm_dev = float(np.max(np.abs(m - m.conj().T)))
    if herm_dev > tol:
        raise StateValidationError(f"not Hermitian: deviation {herm_dev:.3e} > {tol:.1e}")
    m = linalg.hermitize(m)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > tol:
        raise StateValidationError(f"trace {tr!r} differs from 1 beyond {tol:.1e}")
    m = m / tr
    vals = np.linalg.eigvalsh(m)
    if vals[0] < -tol:
        raise StateValidationError(f"not positive semidefinite: min eigenvalue {vals[0]:.3e}")
    if vals[0] < -1e-10:
        # repairable negativity: clip the spectrum and renormalize
        vals_c, vecs = np.linalg.eigh(m)
        vals_c = np.clip(vals_c, 0.0, None)
        m = (vecs * vals_c) @ vecs.conj().T
        m = linalg.hermitize(m / float(np.trace(m).real))
    m.setflags(write=False)
    return DensityMatrix(m, (da, db))


def is_ppt(s: DensityMatrix, tol: float = 1e-10) -> bool:
    """True iff the partial transpose has no eigenvalue below -tol."""
    return ppt_min_eigenvalue(s) >= -tol


def ppt_min_eigenvalue(s: DensityMatrix) -> float:
    g = linalg.partial_transpose(s.matrix, s.dims, "B")
    return float(np.linalg.eigvalsh(linalg.hermitize(g))[0])


@dataclass(frozen=True)
class FeasibleSetSpec:
    """The optimization domain: PPT states, optionally sharing marginals.

    ``anchor`` supplies the dimensions and, when ``constrain_marginals``
    is set, the marginal equality constraints. The product of the
    anchor's marginals is always a member, so the set is never empty.
    """

    anchor: DensityMatrix
    constrain_marginals: bool = True
    ppt: bool = True

    def interior_point(self) -> DensityMatrix:
        if self.constrain_marginals:
            return product_of_marginals(self.anchor)
        d = self.anchor.dim
        return validate(np.eye(d) / d, self.anchor.dims)


def bell_state() -> DensityMatrix:
    """|phi+><phi+| on two qubits."""
    v = np.zeros(4, dtype=np.complex128)
    v[0] = v[3] = 1.0 / math.sqrt(2.0)
    return validate(np.outer(v, v.conj()), (2, 2))


def example4_state(p: float) -> DensityMatrix:
    """The two-qubit family p|psi><psi| + (1-p) 1/4 with
    |psi> = (|0,0> + (1+i)|0,1> + (1-i)|1,0>)/sqrt(5)."""
    if not 0.0 <= p <= 1.0:
        raise StateValidationError("p must lie in [0, 1]")
    v = np.array([1.0, 1.0 + 1.0j, 1.0 - 1.0j, 0.0], dtype=np.complex128) / math.sqrt(5.0)
    m = p * np.outer(v, v.conj()) + (1.0 - p) * np.eye(4) / 4.0
    return validate(m, (2, 2))


def example4_ppt_threshold() -> float:
    """Mixing weight at which the family crosses the PPT boundary.

    Root of the minimum partial-transpose eigenvalue in p; the curve is
    concave with a single sign change on [0, 1].
    """

    def min_eig(p: float) -> float:
        return ppt_min_eigenvalue(example4_state(p))

    return float(brentq(min_eig, 0.0, 1.0, xtol=1e-14))


def product_of_marginals(s: DensityMatrix) -> DensityMatrix:
    """sigma_A (x) sigma_B: the canonical feasible point of the marginal set."""
    return validate(np.kron(s.marginal("A"), s.marginal("B")), s.dims)


def swap_subsystems(s: DensityMatrix) -> DensityMatrix:
    """Exchange the roles of A and B."""
    m = linalg.permute_factors(s.matrix, s.dims, (1, 0))
    return validate(m, (s.dims[1], s.dims[0]))


def random_density(dims: tuple[int, int], rank: int | None = None, seed: int = 0) -> DensityMatrix:
    """Seeded random state: partial trace of a Haar-random pure state on an
    extension of dimension ``rank`` (defaults to full rank)."""
    da, db = dims
    d = da * db
    rank = d if rank is None else int(rank)
    if not 1 <= rank:
        raise StateValidationError("rank must be positive")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return validate(m / float(np.trace(m).real), dims)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with the standard phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class LocalInstrument:
    """Kraus operators A_1..A_N on subsystem A with sum A_i^dagger A_i = 1."""

    kraus: tuple[np.ndarray, ...]
    completeness_tol: float = field(default=1e-10, compare=False)

    def __post_init__(self):
        if not self.kraus:
            raise StateValidationError("instrument needs at least one Kraus operator")
        da = self.kraus[0].shape[0]
        total = sum(a.conj().T @ a for a in self.kraus)
        if np.max(np.abs(total - np.eye(da))) > self.completeness_tol:
            raise StateValidationError("Kraus operators do not satisfy completeness")

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def completeness_residual(self) -> float:
        da = self.dim
        total = sum(a.conj().T @ a for a in self.kraus)
        return float(np.max(np.abs(total - np.eye(da))))


def random_instrument(da: int, n_outcomes: int, seed: int = 0) -> LocalInstrument:
    """Instrument from a Haar unitary on an (n_outcomes*dA)-dim space,
    sliced into dA-row blocks of its first dA columns."""
    if n_outcomes < 1:
        raise StateValidationError("need at least one outcome")
    rng = np.random.default_rng(seed)
    u = haar_unitary(n_outcomes * da, rng)
    blocks = tuple(np.ascontiguousarray(u[i * da:(i + 1) * da, :da]) for i in range(n_outcomes))
    return LocalInstrument(blocks)


def apply_instrument(s: DensityMatrix, instrument: LocalInstrument):
    """Selective application on subsystem A.

    Returns [(p_i, state_i)] with p_i = tr[(A_i (x) 1) sigma (A_i (x) 1)^dagger];
    outcomes below probability 1e-12 are dropped.
    """
    da, db = s.dims
    if instrument.dim != da:
        raise StateValidationError("instrument dimension does not match subsystem A")
    out = []
    for a in instrument.kraus:
        k = np.kron(a, np.eye(db))
        m = k @ s.matrix @ k.conj().T
        p = float(np.trace(m).real)
        if p < 1e-12:
            continue
        out.append((p, validate(m / p, s.dims)))
    return out


def feasibility_report(rho: np.ndarray, fs: FeasibleSetSpec) -> dict:
    """Diagnostics of membership in the feasible set (all absolute)."""
    s = fs.anchor
    rho = linalg._as_array(rho)
    rep = {
        "trace_dev": abs(float(np.trace(rho).real) - 1.0),
        "herm_dev": float(np.max(np.abs(rho - rho.conj().T))),
        "min_eig": float(np.linalg.eigvalsh(linalg.hermitize(rho))[0]),
    }
    if fs.ppt:
        g = linalg.partial_transpose(rho, s.dims, "B")
        rep["ppt_min_eig"] = float(np.linalg.eigvalsh(linalg.hermitize(g))[0])
    if fs.constrain_marginals:
        rep["marginal_dev_a"] = float(
            np.max(np.abs(linalg.partial_trace(rho, s.dims, "A") - s.marginal("A")))
        )
        rep["marginal_dev_b"] = float(
            np.max(np.abs(linalg.partial_trace(rho, s.dims, "B") - s.marginal("B")))
        )
    return rep


def marginal_support_isometries(s: DensityMatrix, clip: float = linalg.SUPPORT_CLIP):
    """Isometries onto the supports of the two marginals.

    Returns (V_a, V_b) with orthonormal columns spanning supp(sigma_A)
    and supp(sigma_B). Compressing through V_a (x) V_b is exact for every
    problem whose feasible states share sigma's marginals.
    """
    outs = []
    for keep in ("A", "B"):
        vals, vecs = linalg.eig_hermitian(s.marginal(keep))
        outs.append(np.ascontiguousarray(vecs[:, vals > clip]))
    return outs[0], outs[1]


def compress_to_marginal_support(s: DensityMatrix):
    """Restrict a state to supp(sigma_A) (x) supp(sigma_B).

    Returns (compressed_state, embed) where ``embed`` maps an operator on
    the compressed space back to the original space. When both marginals
    are full rank the state is returned unchanged with an identity embed.
    """
    va, vb = marginal_support_isometries(s)
    da, db = s.dims
    if va.shape[1] == da and vb.shape[1] == db:
        return s, lambda m: m
    v = np.kron(va, vb)
    m = v.conj().T @ s.matrix @ v
    comp = validate(m, (va.shape[1], vb.shape[1]))

    def embed(x: np.ndarray) -> np.ndarray:
        return v @ x @ v.conj().T

    return comp, embed


# ---------------------------------------------------------------------------
# state file format: {"dims": [dA, dB], "re": [[...]], "im": [[...]]}

def write_state_json(path: str, s: DensityMatrix) -> None:
    """Write the row-major JSON state format with 17 significant digits."""

    def fmt(x: float) -> str:
        return format(float(x), ".17g")

    def rows(a: np.ndarray) -> str:
        return "[" + ",".join("[" + ",".join(fmt(x) for x in row) + "]" for row in a) + "]"

    with open(path, "w") as fh:
        fh.write(
            '{"dims":[%d,%d],"re":%s,"im":%s}\n'
            % (s.dims[0], s.dims[1], rows(s.matrix.real), rows(s.matrix.imag))
        )


def read_state_json(path: str, tol: float = 1e-8) -> DensityMatrix:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StateValidationError(f"not a valid state file: {exc}") from exc
    try:
        dims = tuple(int(d) for d in obj["dims"])
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj["im"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise StateValidationError(f"malformed state file: {exc}") from exc
    if len(dims) != 2 or re.ndim != 2 or re.shape != im.shape:
        raise StateValidationError("state file fields have inconsistent shapes")
    return validate(re + 1j * im, dims, tol=tol)  # type: ignore[arg-type]
