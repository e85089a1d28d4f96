"""Certificate-based primal recovery for Lagrange dual runs.

After solving the dual with a certificate-capable engine, the weighted average
of the recorded inner minimizers is a near-feasible, near-optimal primal
point: both its constraint violation (in the conjugate norm) and its objective
gap are bounded by the certificate residual over the dual domain plus the
inner solver's accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificate import Certificate, ExecutionProtocol, StepKind, residual
from .geometry import Domain, NonnegPCap
from .numerics import as_vector, holder_conjugate, norm
from .oracle import DeltaOracleOutput, DualProblem, dual_oracle


class MissingPayload(ValueError):
    """A productive step lacks the inner minimizer needed for recovery."""


@dataclass(frozen=True)
class PrimalRecovery:
    u_hat: np.ndarray
    violation: float
    primal_value: float
    eps_cert_over_x: float
    delta: float


def positive_part_norm(v, q: float) -> float:
    """q-norm of the vector with negative components replaced by zero."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return norm(np.maximum(as_vector(v), 0.0), q)


def recover(cert: Certificate, protocol: ExecutionProtocol,
            problem: DualProblem, domain_x: Domain) -> PrimalRecovery:
    """Recover the primal point u_hat = sum of xi_t * u_t over productive steps."""
    for t in protocol.productive_indices():
        if protocol.step(t).payload is None:
            raise MissingPayload(f"productive step {t} has no inner minimizer")
    u_hat = None
    for t, weight in cert.weights.items():
        step = protocol.step(t)
        if step.kind is not StepKind.PRODUCTIVE:
            continue
        term = weight * step.payload
        u_hat = term if u_hat is None else u_hat + term
    if u_hat is None:
        raise MissingPayload("certificate carries no productive weight")
    q = holder_conjugate(problem.p_norm)
    return PrimalRecovery(u_hat=u_hat,
                          violation=positive_part_norm(problem.g(u_hat), q),
                          primal_value=float(problem.f(u_hat)),
                          eps_cert_over_x=residual(cert, protocol, domain_x),
                          delta=problem.delta)


def build_dual_cmp(problem: DualProblem, dim: int):
    """The dual minimization domain {x >= 0 : ||x||_p <= L + 1} and its oracle."""
    domain = NonnegPCap(problem.p_norm, problem.bound + 1.0, dim)

    def oracle(x) -> DeltaOracleOutput:
        return dual_oracle(problem, x)

    return domain, oracle
