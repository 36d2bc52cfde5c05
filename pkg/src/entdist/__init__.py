"""Entanglement measures as minimal distances to PPT states with
matching marginals, solved by a dense interior-point SDP engine and
Frank-Wolfe, plus their hypothesis-testing interpretation."""

from .linalg import (
    SpectralDecomposition,
    eig_hermitian,
    kron,
    log_gradient,
    matrix_abs,
    matrix_function,
    matrix_log,
    partial_trace,
    partial_transpose,
    permute_factors,
    relative_entropy,
    trace_norm,
)
from .measures import (
    MEASURES,
    MeasureError,
    MeasureResult,
    rel_entropy_measure,
    rel_entropy_of_entanglement,
    rev_rel_entropy_measure,
    trace_distance_measure,
    verify_convexity,
    verify_monotonicity,
)
from .hypotest import (
    HypothesisTestResult,
    SteinTable,
    error_probabilities,
    helstrom_test,
    neyman_pearson,
    pure_state_divergence,
    stein_table,
)
from .sdp import (
    SdpProblem,
    SdpSolution,
    SolverError,
    build_lmo_problem,
    build_support_problem,
    build_trace_norm_problem,
    solve,
)
from .states import (
    DensityMatrix,
    FeasibleSetSpec,
    LocalInstrument,
    StateValidationError,
    apply_instrument,
    bell_state,
    example4_ppt_threshold,
    example4_state,
    is_ppt,
    product_of_marginals,
    random_density,
    random_instrument,
    read_state_json,
    swap_subsystems,
    validate,
    write_state_json,
)

__version__ = "0.1.0"
