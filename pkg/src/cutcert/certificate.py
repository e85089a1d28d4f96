"""Execution protocols, localizer bookkeeping, and accuracy certificates.

A run produces an ordered protocol of search points with cut vectors, split
into productive and nonproductive steps.  The localizer keeps one row per
surviving constraint together with the step that created it, so certificate
weights can always be traced back to protocol steps even after rows are
dropped.  Certificates come out of a small LP over the current rows; their
residual over a containing solid upper-bounds the optimality gap of the
induced solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import Domain
from .lp_solver import LpInstance
from .numerics import as_vector

WEIGHT_FLOOR = 1e-12
LAMBDA_NEG_TOL = 1e-10
EQUALITY_RTOL = 1e-8
INTERVAL_TOL = 1e-8


class ZeroVector(ValueError):
    """A protocol step was recorded with a zero cut vector."""


class DegenerateCertificate(RuntimeError):
    """No productive weight mass yet; keep iterating and try again later."""


class InfeasibleLambda(RuntimeError):
    """The supplied multipliers violate the certificate LP constraints."""


class StepKind(Enum):
    PRODUCTIVE = "P"
    NONPRODUCTIVE = "N"


@dataclass(frozen=True)
class ProtocolStep:
    index: int
    point: np.ndarray
    direction: np.ndarray
    kind: StepKind
    value: float | None = None
    payload: np.ndarray | None = None


class ExecutionProtocol:
    """Ordered record of search points and cut vectors, indices starting at 1."""

    def __init__(self):
        self.steps: list[ProtocolStep] = []

    def record_step(self, point, direction, kind: StepKind,
                    value: float | None = None, payload=None) -> ProtocolStep:
        direction = as_vector(direction)
        if not np.any(direction != 0.0):
            raise ZeroVector("cut vector must be nonzero")
        if kind is StepKind.PRODUCTIVE and value is None:
            raise ValueError("productive steps carry an objective value")
        step = ProtocolStep(index=len(self.steps) + 1,
                            point=as_vector(point),
                            direction=direction,
                            kind=kind,
                            value=value,
                            payload=None if payload is None else as_vector(payload))
        self.steps.append(step)
        return step

    def step(self, index: int) -> ProtocolStep:
        return self.steps[index - 1]

    def productive_indices(self) -> list[int]:
        return [s.index for s in self.steps if s.kind is StepKind.PRODUCTIVE]

    def nonproductive_indices(self) -> list[int]:
        return [s.index for s in self.steps if s.kind is StepKind.NONPRODUCTIVE]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


class RowOrigin(Enum):
    INITIAL = "initial"
    PRODUCTIVE = "productive"
    NONPRODUCTIVE = "nonproductive"


@dataclass(frozen=True)
class LocalizerRow:
    normal: np.ndarray
    offset: float
    origin: RowOrigin
    step: int | None = None


class PolytopeLocalizer:
    """Constraint rows a_i x <= b_i with per-row origin metadata."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[LocalizerRow] = []

    def add_row(self, normal, offset: float, origin: RowOrigin,
                step: int | None = None) -> None:
        if origin is not RowOrigin.INITIAL and step is None:
            raise ValueError("cut rows must reference the step that created them")
        self.rows.append(LocalizerRow(normal=as_vector(normal, dim=self.dim),
                                      offset=float(offset), origin=origin, step=step))

    def drop_row(self, position: int) -> LocalizerRow:
        return self.rows.pop(position)

    def matrix(self) -> np.ndarray:
        return np.array([row.normal for row in self.rows])

    def offsets(self) -> np.ndarray:
        return np.array([row.offset for row in self.rows])

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class Certificate:
    """Step weights from LP multipliers: xi_{t(i)} = lambda_i / d_tau.

    ``weights`` maps step indices to weights for every surviving cut row;
    steps not listed have weight zero.  Productive weights sum to one.
    """

    weights: dict[int, float]
    lam: np.ndarray
    d_tau: float
    D_tau: float
    eq_residual: float = 0.0


def build_certificate_lp(localizer: PolytopeLocalizer) -> LpInstance:
    """LP over the current rows:  max sum of lambda_i * ||a_i|| over productive
    rows  s.t.  lambda >= 0,  A^T lambda = 0,  b^T lambda in [0, 2]."""
    if len(localizer) == 0:
        raise ValueError("localizer has no rows")
    a = localizer.matrix()
    objective = np.array([
        float(np.linalg.norm(row.normal)) if row.origin is RowOrigin.PRODUCTIVE else 0.0
        for row in localizer.rows
    ])
    return LpInstance(objective=objective,
                      eq_matrix=a.T,
                      eq_rhs=np.zeros(localizer.dim),
                      interval_vec=localizer.offsets(),
                      interval_lo=0.0,
                      interval_hi=2.0)


def certificate_from_lambda(lam, localizer: PolytopeLocalizer) -> Certificate:
    """Convert feasible LP multipliers into a certificate.

    Feasibility is checked within solver-level tolerances; weights below the
    negativity tolerance raise, smaller violations are clamped to zero.
    """
    lam = as_vector(lam, dim=len(localizer))
    if lam.size and float(np.min(lam)) < -LAMBDA_NEG_TOL:
        raise InfeasibleLambda(f"negative multiplier {float(np.min(lam)):.3e}")
    lam = np.maximum(lam, 0.0)
    a = localizer.matrix()
    b = localizer.offsets()
    norms = np.linalg.norm(a, axis=1)
    eq_residual = float(np.max(np.abs(a.T @ lam))) if lam.size else 0.0
    eq_allow = EQUALITY_RTOL * (1.0 + float(np.sum(lam)) * float(np.max(norms, initial=0.0)))
    if eq_residual > eq_allow:
        raise InfeasibleLambda(f"A^T lambda residual {eq_residual:.3e} > {eq_allow:.3e}")
    interval = float(b @ lam)
    if interval < -INTERVAL_TOL or interval > 2.0 + INTERVAL_TOL:
        raise InfeasibleLambda(f"b^T lambda = {interval:.6e} outside [0, 2]")

    d_tau = sum(float(lam[i]) for i, row in enumerate(localizer.rows)
                if row.origin is RowOrigin.PRODUCTIVE)
    if d_tau <= WEIGHT_FLOOR:
        raise DegenerateCertificate("no productive multiplier mass")
    big_d = sum(float(lam[i]) * float(norms[i])
                for i, row in enumerate(localizer.rows)
                if row.origin is RowOrigin.PRODUCTIVE)
    weights: dict[int, float] = {}
    for i, row in enumerate(localizer.rows):
        if row.origin is RowOrigin.INITIAL:
            continue
        if row.step in weights:
            raise ValueError(f"two localizer rows reference step {row.step}")
        weights[row.step] = float(lam[i]) / d_tau
    return Certificate(weights=weights, lam=lam, d_tau=d_tau, D_tau=big_d,
                       eq_residual=eq_residual)


def residual(cert: Certificate, protocol: ExecutionProtocol, domain_b: Domain) -> float:
    """max over B of the aggregated linearization  sum_t xi_t <e_t, x_t - x>."""
    if not cert.weights:
        return 0.0
    some_step = protocol.step(next(iter(cert.weights)))
    aggregated = np.zeros_like(some_step.direction)
    base = 0.0
    for t, weight in cert.weights.items():
        step = protocol.step(t)
        aggregated += weight * step.direction
        base += weight * float(step.direction @ step.point)
    return base + domain_b.support(-aggregated).value


def induced_solution(cert: Certificate, protocol: ExecutionProtocol) -> np.ndarray:
    """Convex combination of productive search points weighted by xi."""
    point = None
    for t, weight in cert.weights.items():
        step = protocol.step(t)
        if step.kind is not StepKind.PRODUCTIVE:
            continue
        contribution = weight * step.point
        point = contribution if point is None else point + contribution
    if point is None:
        raise DegenerateCertificate("certificate has no productive weight")
    return point


@dataclass(frozen=True)
class CertificateDiagnostics:
    d_tau: float
    D_tau: float
    eps_tau: float
    eps_cert: float
    two_over_d: float
    w_tau: float
    variation_bound: float | None
    eq_residual: float


def diagnostics(cert: Certificate, protocol: ExecutionProtocol,
                domain_x: Domain, domain_b: Domain) -> CertificateDiagnostics:
    """Residual plus the runtime bound family: 2/d, and when eps_tau = 2/D is
    below the inscribed radius of X, the variation bound eps_tau*W/(r - eps_tau)."""
    eps_cert = residual(cert, protocol, domain_b)
    w_tau = -math.inf
    for t in protocol.productive_indices():
        step = protocol.step(t)
        gap = domain_x.support(step.direction).value - float(step.direction @ step.point)
        w_tau = max(w_tau, gap)
    eps_tau = 2.0 / cert.D_tau
    r_hat = domain_x.inscribed_radius()
    variation = eps_tau / (r_hat - eps_tau) * w_tau if eps_tau < r_hat else None
    return CertificateDiagnostics(d_tau=cert.d_tau,
                                  D_tau=cert.D_tau,
                                  eps_tau=eps_tau,
                                  eps_cert=eps_cert,
                                  two_over_d=2.0 / cert.d_tau,
                                  w_tau=w_tau,
                                  variation_bound=variation,
                                  eq_residual=cert.eq_residual)
