"""Polytope-based cutting-plane minimization with online accuracy certificates.

The package solves convex minimization over solids with inexact first-order
oracles, computes certificates that bound the optimality gap at runtime by
solving a small LP over the localizer rows, and recovers near-feasible,
near-optimal primal points from Lagrange dual runs.
"""

from .certificate import (
    Certificate,
    CertificateDiagnostics,
    DegenerateCertificate,
    ExecutionProtocol,
    InfeasibleLambda,
    PolytopeLocalizer,
    RowOrigin,
    StepKind,
    ZeroVector,
    build_certificate_lp,
    certificate_from_lambda,
    diagnostics,
    induced_solution,
    residual,
)
from .engines import (
    DegenerateCut,
    DriveResult,
    EllipsoidEngine,
    EngineStall,
    RunTrace,
    VaidyaEngine,
    VaidyaParams,
    drive,
    initial_box,
    make_engine,
    run,
)
from .geometry import (
    Box,
    DimensionMismatch,
    Domain,
    EuclideanBall,
    NonnegPCap,
    Polytope,
    Separator,
    UnsupportedOperation,
)
from .lp_solver import Infeasible, LpInstance, LpSolution, Unbounded, max_linear_over_polytope, solve
from .numerics import NotPositiveDefinite, cholesky_solve, holder_conjugate, norm
from .oracle import (
    DeltaOracleOutput,
    DualProblem,
    InnerSolverFailure,
    IterationLimit,
    QuadraticInnerProblem,
    benchmark_oracle,
    dual_oracle,
    make_benchmark_oracle,
    quadratic_dual_problem,
    reference_inner_solver,
)
from .primal_dual import MissingPayload, PrimalRecovery, build_dual_cmp, positive_part_norm, recover

__all__ = [name for name in dir() if not name.startswith("_")]
