"""Dense primal-dual interior-point solver for small Hermitian SDPs.

Problems are stated over block-diagonal complex Hermitian matrix
variables with real linear equality constraints in the trace inner
product:

    minimize    sum_b tr[C_b X_b]
    subject to  sum_b tr[A_ib X_b] = rhs_i    (i = 1..m)
                X_b  positive semidefinite.

The solver follows the Nesterov-Todd scaled central path with a
Mehrotra predictor-corrector step and a fraction-to-boundary rule
(tau = 0.98). Also provided are the problem builders for the feasible
set of PPT states with prescribed marginals: the trace-norm distance
program, the linear-minimization oracle, and the support-obstruction
program.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_triangular
from threadpoolctl import threadpool_limits

from . import linalg
from .states import DensityMatrix, FeasibleSetSpec, compress_to_marginal_support


class SolverError(RuntimeError):
    """Hard numerical failure of the interior-point iteration."""


def trace_dot(a: np.ndarray, b: np.ndarray) -> float:
    """Real trace inner product of two Hermitian matrices."""
    return float(np.real(np.sum(a * b.T)))


@lru_cache(maxsize=32)
def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of n x n Hermitian matrices, stacked (n^2, n, n).

    Diagonal units first, then the symmetric and antisymmetric pairs.
    """
    out = np.zeros((n * n, n, n), dtype=np.complex128)
    k = 0
    for a in range(n):
        out[k, a, a] = 1.0
        k += 1
    r = 1.0 / np.sqrt(2.0)
    for a in range(n):
        for b in range(a + 1, n):
            out[k, a, b] = r
            out[k, b, a] = r
            k += 1
            out[k, a, b] = -1j * r
            out[k, b, a] = 1j * r
            k += 1
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def traceless_hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the traceless Hermitians, stacked (n^2-1, n, n)."""
    full = hermitian_basis(n)
    out = np.zeros((n * n - 1, n, n), dtype=np.complex128)
    k = 0
    for j in range(1, n):
        # diag(1,...,1,-j,0,...)/sqrt(j(j+1))
        d = np.zeros(n)
        d[:j] = 1.0
        d[j] = -j
        out[k] = np.diag(d / np.sqrt(j * (j + 1.0)))
        k += 1
    out[k:] = full[n:]
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SdpProblem:
    """Standard-form block SDP data.

    ``a_stacks[b]`` has shape (m, n_b, n_b) holding constraint i's
    coefficient on block b; all coefficient matrices are Hermitian.
    """

    block_dims: tuple[int, ...]
    objective: tuple[np.ndarray, ...]
    a_stacks: tuple[np.ndarray, ...]
    rhs: np.ndarray

    def __post_init__(self):
        m = len(self.rhs)
        for nb, c, a in zip(self.block_dims, self.objective, self.a_stacks):
            if c.shape != (nb, nb) or a.shape != (m, nb, nb):
                raise ValueError("inconsistent problem dimensions")
            if np.max(np.abs(c - c.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(c))):
                raise ValueError("objective block is not Hermitian")
            dev = np.max(np.abs(a - a.conj().transpose(0, 2, 1)))
            if dev > 1e-12 * max(1.0, float(np.max(np.abs(a))) if a.size else 1.0):
                raise ValueError("constraint matrix is not Hermitian")

    @property
    def n_constraints(self) -> int:
        return len(self.rhs)

    @property
    def a_flats(self) -> tuple[np.ndarray, ...]:
        """Constraint stacks reshaped to (m, n_b^2), cached per problem."""
        cached = getattr(self, "_a_flats", None)
        if cached is None:
            cached = tuple(
                np.ascontiguousarray(a.reshape(self.n_constraints, -1)) for a in self.a_stacks
            )
            object.__setattr__(self, "_a_flats", cached)
        return cached


@dataclass
class SdpSolution:
    """Primal-dual certificate returned by :func:`solve`.

    ``gap`` is the complementarity <X, S> (absolute, objective units);
    the residuals are the usual relative feasibility measures. On
    ``status == "optimal"`` the gap and residuals meet the requested
    tolerances.
    """

    primal: tuple[np.ndarray, ...]
    dual: np.ndarray
    dual_slacks: tuple[np.ndarray, ...]
    objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    status: str
    iter_log: list = field(default_factory=list, repr=False)


def _apply_a(a_flats, x_blocks) -> np.ndarray:
    out = 0.0
    for a, x in zip(a_flats, x_blocks):
        out = out + np.real(a @ np.conj(x).ravel())
    return np.asarray(out)


def _apply_at(a_flats, dims, y) -> list[np.ndarray]:
    return [(y @ a).reshape(nb, nb) for a, nb in zip(a_flats, dims)]


def _chol_lower(m: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None


def _max_step(chol_l: np.ndarray, delta: np.ndarray) -> float:
    """sup {alpha : X + alpha*Delta >= 0} given X = L L^dagger."""
    k = solve_triangular(chol_l, delta, lower=True, check_finite=False)
    k = solve_triangular(chol_l, k.conj().T, lower=True, check_finite=False).conj().T
    w = np.linalg.eigvalsh(linalg.hermitize(k))
    lo = float(w[0])
    if lo >= -1e-16:
        return np.inf
    return -1.0 / lo


def solve(
    problem: SdpProblem,
    gap_tol: float = 1e-8,
    feas_tol: float = 1e-9,
    max_iter: int = 200,
    warm_start: SdpSolution | None = None,
    objective_override: tuple[np.ndarray, ...] | None = None,
) -> SdpSolution:
    """Run the interior-point iteration to certificate-grade accuracy.

    The objective is internally normalized by its largest entry so the
    stopping test is relative for badly scaled objectives and absolute
    for unit-scale ones; reported quantities are in original units.
    ``objective_override`` swaps the objective blocks without rebuilding
    the (already validated) constraint data; the oracle loops lean on it.

    Raises
    ------
    SolverError
        On a hard numerical failure of the Newton system. Plain
        non-convergence is reported through ``status`` instead.
    """
    # the blocks are small; threaded BLAS only adds sync overhead and
    # the contract promises a single-threaded deterministic solve
    with threadpool_limits(limits=1):
        return _solve_inner(problem, gap_tol, feas_tol, max_iter, warm_start, objective_override)


def _solve_inner(
    problem: SdpProblem,
    gap_tol: float,
    feas_tol: float,
    max_iter: int,
    warm_start: SdpSolution | None,
    objective_override: tuple[np.ndarray, ...] | None = None,
) -> SdpSolution:
    dims = problem.block_dims
    nu = float(sum(dims))
    a_stacks = problem.a_stacks
    a_flats = problem.a_flats
    rhs = problem.rhs
    m = problem.n_constraints

    objective = problem.objective
    if objective_override is not None:
        objective = tuple(linalg.hermitize(np.asarray(c, dtype=np.complex128))
                          for c in objective_override)
        if any(c.shape != (nb, nb) for c, nb in zip(objective, dims)):
            raise ValueError("objective override does not match block dimensions")
    obj_scale = max(1.0, max(float(np.max(np.abs(c))) for c in objective))
    c_blocks = [np.asarray(c, dtype=np.complex128) / obj_scale for c in objective]
    norm_b = float(np.linalg.norm(rhs))
    norm_c = float(np.sqrt(sum(np.linalg.norm(c) ** 2 for c in c_blocks)))

    eta_p = max(1.0, 1.5 * float(np.max(np.abs(rhs))) if m else 1.0)
    xs = [eta_p * np.eye(nb, dtype=np.complex128) for nb in dims]
    ss = [1.5 * np.eye(nb, dtype=np.complex128) for nb in dims]
    y = np.zeros(m)
    if warm_start is not None and warm_start.primal[0].shape == (dims[0], dims[0]):
        blend = 0.9
        xs = [
            linalg.hermitize(blend * w + (1 - blend) * eta_p * np.eye(nb))
            for w, nb in zip(warm_start.primal, dims)
        ]
        ss = [
            linalg.hermitize(blend * (w / obj_scale) + (1 - blend) * 1.5 * np.eye(nb))
            for w, nb in zip(warm_start.dual_slacks, dims)
        ]
        y = warm_start.dual.copy() / obj_scale

    tau = 0.98
    iter_log: list[tuple] = []
    best = None
    best_score = np.inf
    status = "max_iterations"
    it = 0

    for it in range(max_iter):
        rp = rhs - _apply_a(a_flats, xs)
        aty = _apply_at(a_flats, dims, y)
        rd = [c - s - at for c, s, at in zip(c_blocks, ss, aty)]
        pobj = sum(trace_dot(c, x) for c, x in zip(c_blocks, xs))
        dobj = float(rhs @ y)
        gap = sum(trace_dot(x, s) for x, s in zip(xs, ss))
        rp_rel = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        rd_rel = float(np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rd))) / (1.0 + norm_c)
        iter_log.append((it, pobj * obj_scale, dobj * obj_scale, gap * obj_scale, rp_rel, rd_rel))

        score = max(gap / gap_tol, rp_rel / feas_tol, rd_rel / feas_tol)
        if score < best_score:
            best_score = score
            best = ([x.copy() for x in xs], y.copy(), [s.copy() for s in ss])
        if gap <= gap_tol and rp_rel <= feas_tol and rd_rel <= feas_tol:
            status = "optimal"
            break

        mu = gap / nu

        # Nesterov-Todd scaling per block: W = G G^dagger with
        # G = L V Sigma^(-1/2) from the SVD R^dagger L = U Sigma V^dagger,
        # X = L L^dagger, S = R R^dagger. Both scaled variables equal
        # diag(Sigma).
        ls, rs, gs, ws, sigmas = [], [], [], [], []
        failed = False
        for x, s in zip(xs, ss):
            l = _chol_lower(x)
            r = _chol_lower(s)
            if l is None or r is None:
                failed = True
                break
            u, sv, vh = np.linalg.svd(r.conj().T @ l)
            sv = np.maximum(sv, 1e-150)
            g = l @ vh.conj().T / np.sqrt(sv)[np.newaxis, :]
            ls.append(l)
            rs.append(r)
            gs.append(g)
            ws.append(g @ g.conj().T)
            sigmas.append(sv)
        if failed:
            status = "stalled"
            break

        # Schur complement M_ij = sum_b tr[A_i W A_j W]
        mm = np.zeros((m, m))
        for a, aflat, w in zip(a_stacks, a_flats, ws):
            wa = (w[np.newaxis] @ a) @ w
            mm += np.real(aflat @ wa.conj().reshape(m, -1).T)
        mm = 0.5 * (mm + mm.T)
        ridge = 0.0

        def schur_solve(v: np.ndarray) -> np.ndarray:
            nonlocal ridge
            for attempt in range(4):
                try:
                    return np.linalg.solve(mm + ridge * np.eye(m), v)
                except np.linalg.LinAlgError:
                    ridge = max(1e-13 * float(np.mean(np.diag(mm))), 10.0 * ridge)
                    ridge *= 10.0**attempt
            raise SolverError(
                f"Schur system solve failed at iteration {it}: "
                f"diag range [{np.min(np.diag(mm)):.3e}, {np.max(np.diag(mm)):.3e}], "
                f"gap {gap:.3e}, residuals ({rp_rel:.3e}, {rd_rel:.3e})"
            )

        def newton_step(d_blocks):
            """Solve the KKT system for complementarity right-hand side D."""
            gdg = [g @ d @ g.conj().T for g, d in zip(gs, d_blocks)]
            wrw = [w @ r @ w for w, r in zip(ws, rd)]
            base = [linalg.hermitize(t - u) for t, u in zip(gdg, wrw)]
            rhs_y = rp - _apply_a(a_flats, base)
            dy = schur_solve(rhs_y)
            atdy = _apply_at(a_flats, dims, dy)
            dss = [linalg.hermitize(r - at) for r, at in zip(rd, atdy)]
            dxs = [
                linalg.hermitize(bb + w @ at @ w)
                for bb, w, at in zip(base, ws, atdy)
            ]
            return dxs, dy, dss

        # predictor (affine scaling) direction: D = -Sigma
        d_aff = [np.diag(-sv).astype(np.complex128) for sv in sigmas]
        dx_a, dy_a, ds_a = newton_step(d_aff)

        ap = min((_max_step(l, dx) for l, dx in zip(ls, dx_a)), default=np.inf)
        ad = min((_max_step(r, ds) for r, ds in zip(rs, ds_a)), default=np.inf)
        ap_aff = min(1.0, ap)
        ad_aff = min(1.0, ad)
        mu_aff = sum(
            trace_dot(x + ap_aff * dx, s + ad_aff * ds)
            for x, dx, s, ds in zip(xs, dx_a, ss, ds_a)
        ) / nu
        sigma_c = min(1.0, max(1e-10, (max(mu_aff, 0.0) / mu) ** 3))

        # combined corrector-centering direction
        d_comb = []
        for g, sv, dx, ds in zip(gs, sigmas, dx_a, ds_a):
            ginv_dx = np.linalg.solve(g, dx)
            dxt = np.linalg.solve(g, ginv_dx.conj().T).conj().T  # G^-1 dX G^-dagger
            dst = g.conj().T @ ds @ g
            h_aff = 0.5 * (dxt @ dst + dst @ dxt)
            rhs_c = sigma_c * mu * np.eye(len(sv)) - np.diag(sv**2) - h_aff
            denom = 0.5 * (sv[:, None] + sv[None, :])
            d_comb.append(rhs_c / denom)
        dx, dy, ds = newton_step(d_comb)

        ap = min((_max_step(l, d) for l, d in zip(ls, dx)), default=np.inf)
        ad = min((_max_step(r, d) for r, d in zip(rs, ds)), default=np.inf)
        alpha_p = min(1.0, tau * ap)
        alpha_d = min(1.0, tau * ad)
        if alpha_p < 1e-8 and alpha_d < 1e-8:
            status = "stalled"
            break

        for b in range(len(dims)):
            xs[b] = linalg.hermitize(xs[b] + alpha_p * dx[b])
            ss[b] = linalg.hermitize(ss[b] + alpha_d * ds[b])
        y = y + alpha_d * dy
        if not all(np.all(np.isfinite(x)) for x in xs):
            raise SolverError(f"iterates lost finiteness at iteration {it}")

    if status != "optimal" and best is not None:
        xs, y, ss = best

    rp = rhs - _apply_a(a_flats, xs)
    aty = _apply_at(a_flats, dims, y)
    rd_final = [c - s - at for c, s, at in zip(c_blocks, ss, aty)]
    pobj = sum(trace_dot(c, x) for c, x in zip(c_blocks, xs)) * obj_scale
    dobj = float(rhs @ y) * obj_scale
    gap = sum(trace_dot(x, s) for x, s in zip(xs, ss)) * obj_scale
    rp_rel = float(np.linalg.norm(rp)) / (1.0 + norm_b)
    rd_rel = (
        float(np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rd_final)))
        / (1.0 + norm_c)
    )

    return SdpSolution(
        primal=tuple(xs),
        dual=y * obj_scale,
        dual_slacks=tuple(s * obj_scale for s in ss),
        objective=pobj,
        dual_objective=dobj,
        gap=gap,
        primal_residual=rp_rel,
        dual_residual=rd_rel,
        iterations=it + 1,
        status=status,
        iter_log=iter_log,
    )


# ---------------------------------------------------------------------------
# problem builders for the PPT-with-prescribed-marginals feasible set


def _zeros_stack(m: int, n: int) -> np.ndarray:
    return np.zeros((m, n, n), dtype=np.complex128)


def _pt_stack(stack: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    da, db = dims
    m = stack.shape[0]
    return (
        stack.reshape(m, da, db, da, db).transpose(0, 1, 4, 3, 2).reshape(m, da * db, da * db)
    )


def _feasible_set_rows(fs: FeasibleSetSpec):
    """Constraint rows pinning trace, marginals and the PPT coupling.

    Returns (rows_rho, rows_gamma, rhs) where the gamma rows are None when
    the PPT block is disabled.
    """
    sigma = fs.anchor
    da, db = sigma.dims
    n = da * db
    rows_rho = []
    rhs = []

    eye = np.eye(n, dtype=np.complex128)
    rows_rho.append(eye[np.newaxis])
    rhs.append(1.0)

    if fs.constrain_marginals:
        sa = sigma.marginal("A")
        sb = sigma.marginal("B")
        fa = traceless_hermitian_basis(da)
        fb = traceless_hermitian_basis(db)
        if len(fa):
            ka = np.einsum("mij,kl->mikjl", fa, np.eye(db)).reshape(len(fa), n, n)
            rows_rho.append(ka)
            rhs.extend(np.real(np.einsum("mij,ji->m", fa, sa)))
        if len(fb):
            kb = np.einsum("ik,mjl->mijkl", np.eye(da), fb).reshape(len(fb), n, n)
            rows_rho.append(kb)
            rhs.extend(np.real(np.einsum("mij,ji->m", fb, sb)))

    m_feas = sum(r.shape[0] for r in rows_rho)
    rows_gamma = None
    if fs.ppt:
        basis = hermitian_basis(n)
        coup_rho = _pt_stack(basis, sigma.dims)
        coup_gamma = -basis
        rows_rho.append(coup_rho)
        rows_gamma = np.concatenate([_zeros_stack(m_feas, n), coup_gamma])
        rhs.extend(np.zeros(n * n))

    return np.concatenate(rows_rho), rows_gamma, np.asarray(rhs, dtype=np.float64)


def build_lmo_problem(gradient: np.ndarray, fs: FeasibleSetSpec) -> SdpProblem:
    """min tr[G rho] over the feasible set (the Frank-Wolfe oracle)."""
    sigma = fs.anchor
    n = sigma.dim
    g = linalg.hermitize(linalg._as_array(gradient))
    if g.shape != (n, n):
        raise ValueError("gradient dimension does not match the anchor state")
    rows_rho, rows_gamma, rhs = _feasible_set_rows(fs)
    if rows_gamma is None:
        return SdpProblem((n,), (g,), (rows_rho,), rhs)
    zero = np.zeros((n, n), dtype=np.complex128)
    return SdpProblem((n, n), (g, zero), (rows_rho, rows_gamma), rhs)


def build_support_problem(sigma: DensityMatrix) -> SdpProblem:
    """min tr[(1 - P_sigma) rho] over PPT states with sigma's marginals.

    A strictly positive optimum certifies that no feasible state lives on
    sigma's support (the reversed-relative-entropy measure is infinite).
    Internally restricted to the marginal supports so the interior-point
    iteration keeps a strictly feasible start; the optimal value is
    unchanged by that restriction.
    """
    comp, _ = compress_to_marginal_support(sigma)
    proj, _rank = linalg.support_projector(comp.matrix)
    obj = linalg.hermitize(np.eye(comp.dim) - proj)
    return build_lmo_problem(obj, FeasibleSetSpec(comp))


def build_trace_norm_problem(sigma: DensityMatrix, fs: FeasibleSetSpec | None = None) -> SdpProblem:
    """min tr[P + Q] with P - Q = sigma - rho over the feasible set.

    Four blocks (rho, rho^Gamma, P, Q); the partial transpose is coupled
    through entrywise equalities on a Hermitian basis. The optimum equals
    the minimal trace-norm distance from sigma to the feasible set.
    """
    if fs is None:
        fs = FeasibleSetSpec(sigma)
    if fs.anchor is not sigma and not np.array_equal(fs.anchor.matrix, sigma.matrix):
        raise ValueError("feasible set must be anchored at sigma")
    n = sigma.dim
    rows_rho, rows_gamma, rhs = _feasible_set_rows(fs)
    m_feas = rows_rho.shape[0]

    basis = hermitian_basis(n)
    msplit = basis.shape[0]
    split_rhs = np.real(np.einsum("mij,ji->m", basis, sigma.matrix))

    rho_rows = np.concatenate([rows_rho, basis])
    p_rows = np.concatenate([_zeros_stack(m_feas, n), basis])
    q_rows = np.concatenate([_zeros_stack(m_feas, n), -basis])
    rhs_all = np.concatenate([rhs, split_rhs])

    eye = np.eye(n, dtype=np.complex128)
    zero = np.zeros((n, n), dtype=np.complex128)
    if rows_gamma is not None:
        gamma_rows = np.concatenate([rows_gamma, _zeros_stack(msplit, n)])
        return SdpProblem(
            (n, n, n, n),
            (zero, zero, eye, eye),
            (rho_rows, gamma_rows, p_rows, q_rows),
            rhs_all,
        )
    return SdpProblem((n, n, n), (zero, eye, eye), (rho_rows, p_rows, q_rows), rhs_all)
