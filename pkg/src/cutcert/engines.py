"""Cutting-plane engines and the loop that drives them against an oracle.

Two engines are provided.  The Vaidya engine keeps a polytope localizer and
re-centers on the volumetric barrier after every row change; it is the engine
that supports certificates.  The ellipsoid engine is a classical central-cut
baseline used for optimality-gap comparisons only.

Each driver iteration queries the feasible set at the current point: interior
points get a subgradient cut from the objective oracle (productive step),
outside points get a separator cut (nonproductive step).  The feasibility test
together with the follow-up query counts as one oracle interrogation, so the
call budget equals the iteration count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import lp_solver
from .certificate import (
    Certificate,
    CertificateDiagnostics,
    DegenerateCertificate,
    ExecutionProtocol,
    PolytopeLocalizer,
    RowOrigin,
    StepKind,
    build_certificate_lp,
    certificate_from_lambda,
    diagnostics,
    induced_solution,
)
from .geometry import Box, Domain
from .numerics import NotPositiveDefinite, as_vector, cholesky_solve


class EngineStall(RuntimeError):
    """The engine lost its strictly interior point and cannot recover."""


class DegenerateCut(RuntimeError):
    """A cut direction collapsed to numerical zero in the ellipsoid metric."""


@dataclass(frozen=True)
class VaidyaParams:
    """Knobs of the practical volumetric-center method.

    ``drop_threshold`` is the leverage level below which the least relevant
    row is removed instead of adding the new cut.  ``cut_depth`` scales how
    far a new cut is relaxed outward from the query point: the offset is
    <e, x> + cut_depth * sqrt(e^T H^-1 e), which pins the new row's leverage
    at the current center to 1 / (1 + cut_depth^2).
    """

    drop_threshold: float = 5e-3
    cut_depth: float = 1.0
    newton_tol: float = 1e-8
    stall_decrement: float = 1e-4
    max_newton_steps: int = 50


class VaidyaEngine:
    """Volumetric-center cutting-plane engine over a polytope localizer.

    Once the localizer shrinks to floating-point resolution (the method has
    converged as far as doubles allow), the engine freezes: the localizer and
    query point stop changing, later cuts are ignored, and ``frozen_at``
    records the step where that happened.  A frozen engine still yields valid
    protocol steps and certificates.
    """

    supports_certificates = True

    def __init__(self, localizer: PolytopeLocalizer, start, params: VaidyaParams | None = None):
        self.localizer = localizer
        self.params = params or VaidyaParams()
        self.x = as_vector(start, dim=localizer.dim)
        self.frozen_at: int | None = None
        if np.min(self.margins()) <= 0:
            raise EngineStall("starting point is not strictly interior")

    @classmethod
    def from_box(cls, lower, upper, params: VaidyaParams | None = None) -> "VaidyaEngine":
        lower = as_vector(lower)
        upper = as_vector(upper, dim=lower.shape[0])
        n = lower.shape[0]
        localizer = PolytopeLocalizer(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            localizer.add_row(e, float(upper[i]), RowOrigin.INITIAL)
            localizer.add_row(-e, float(-lower[i]), RowOrigin.INITIAL)
        # The volumetric center of a box is its midpoint, so no initial Newton.
        return cls(localizer, (lower + upper) / 2.0, params)

    def margins(self) -> np.ndarray:
        return self.localizer.offsets() - self.localizer.matrix() @ self.x

    def observe_cut(self, direction, step_index: int, kind: StepKind) -> None:
        """Drop the least-leveraged row or insert the new cut, then re-center."""
        if self.frozen_at is not None:
            return
        saved_rows = list(self.localizer.rows)
        saved_x = self.x.copy()
        try:
            self._apply_cut(direction, step_index, kind)
        except (EngineStall, NotPositiveDefinite) as exc:
            self.localizer.rows = saved_rows
            self.x = saved_x
            if np.min(self.margins()) > 0:
                self.frozen_at = step_index
                return
            raise EngineStall(f"interior point lost: {exc}") from exc

    def _apply_cut(self, direction, step_index: int, kind: StepKind) -> None:
        direction = as_vector(direction, dim=self.localizer.dim)
        a = self.localizer.matrix()
        b = self.localizer.offsets()
        slack = b - a @ self.x
        scaled = a / slack[:, None]
        gram = _symmetrized(scaled.T @ scaled)
        projected = cholesky_solve(gram, scaled.T)
        leverage = np.einsum("ij,ji->i", scaled, projected)

        if len(self.localizer) > self.localizer.dim + 1 \
                and float(np.min(leverage)) < self.params.drop_threshold:
            self.localizer.drop_row(int(np.argmin(leverage)))
        else:
            gamma = float(direction @ cholesky_solve(gram, direction))
            offset = float(direction @ self.x) + self.params.cut_depth * math.sqrt(gamma)
            origin = RowOrigin.PRODUCTIVE if kind is StepKind.PRODUCTIVE \
                else RowOrigin.NONPRODUCTIVE
            self.localizer.add_row(direction, offset, origin, step_index)
        self._recenter()

    def _recenter(self) -> None:
        """Damped Newton on the volumetric barrier V = 0.5 log det H(x).

        Targets a Newton decrement of ``newton_tol``.  Late in a run the
        decrement bottoms out at its floating-point floor above that target;
        an iterate whose decrement stopped improving is accepted as centered
        provided it is below ``stall_decrement``, otherwise the engine stalls.
        """
        a = self.localizer.matrix()
        b = self.localizer.offsets()
        x = self.x
        tol = self.params.newton_tol
        previous = math.inf
        for _ in range(self.params.max_newton_steps):
            slack = b - a @ x
            if np.min(slack) <= 0:
                raise EngineStall("iterate escaped the localizer")
            scaled = a / slack[:, None]
            gram = _symmetrized(scaled.T @ scaled)
            try:
                projected = cholesky_solve(gram, scaled.T)
                overlap = scaled @ projected
                leverage = np.diag(overlap).copy()
                grad = scaled.T @ leverage
                hessian = _symmetrized(
                    3.0 * (scaled.T * leverage) @ scaled
                    - 2.0 * scaled.T @ ((overlap * overlap) @ scaled))
                step_dir = -cholesky_solve(hessian, grad)
            except NotPositiveDefinite as exc:
                raise EngineStall(f"barrier curvature lost rank: {exc}") from exc
            decrement_sq = float(-grad @ step_dir)
            decrement = math.sqrt(max(decrement_sq, 0.0))
            if decrement <= tol:
                self.x = x
                return
            if decrement >= 0.9 * previous:
                if decrement <= self.params.stall_decrement:
                    self.x = x
                    return
                raise EngineStall(
                    f"Newton decrement stagnated at {decrement:.3e}")
            previous = decrement
            value = _half_logdet(gram)
            if value is None:
                raise EngineStall("barrier matrix is not positive definite")
            step = min(1.0, 1.0 / (1.0 + decrement))
            accepted = False
            for _ in range(60):
                candidate = x + step * step_dir
                cand_slack = b - a @ candidate
                if np.min(cand_slack) > 0:
                    cand_scaled = a / cand_slack[:, None]
                    cand_value = _half_logdet(cand_scaled.T @ cand_scaled)
                    if cand_value is not None \
                            and cand_value <= value - 0.25 * step * decrement_sq:
                        accepted = True
                        break
                step *= 0.5
            if not accepted:
                if decrement <= self.params.stall_decrement:
                    self.x = x
                    return
                raise EngineStall("Newton backtracking failed to make progress")
            x = candidate
        raise EngineStall(
            f"Newton decrement did not reach {tol:.1e} "
            f"in {self.params.max_newton_steps} steps")


def _symmetrized(matrix: np.ndarray) -> np.ndarray:
    # Matmul products of symmetric form pick up fp asymmetry; fold it out.
    return (matrix + matrix.T) / 2.0


def _half_logdet(gram: np.ndarray) -> float | None:
    sign, logdet = np.linalg.slogdet(gram)
    if sign <= 0:
        return None
    return 0.5 * float(logdet)


class EllipsoidEngine:
    """Central-cut ellipsoid updates; a gap baseline without certificates."""

    supports_certificates = False

    def __init__(self, center, shape):
        self.x = as_vector(center)
        self.shape = np.asarray(shape, dtype=float)
        self.dim = self.x.shape[0]
        if self.dim < 2:
            raise ValueError("the central-cut update needs dimension >= 2")

    @classmethod
    def from_box(cls, lower, upper) -> "EllipsoidEngine":
        lower = as_vector(lower)
        upper = as_vector(upper, dim=lower.shape[0])
        half = (upper - lower) / 2.0
        radius = float(np.linalg.norm(half))
        return cls((lower + upper) / 2.0, radius**2 * np.eye(lower.shape[0]))

    def observe_cut(self, direction, step_index: int, kind: StepKind) -> None:
        direction = as_vector(direction, dim=self.dim)
        he = self.shape @ direction
        ehe = float(direction @ he)
        if ehe <= 1e-14:
            raise DegenerateCut(f"cut norm in ellipsoid metric is {ehe:.3e}")
        n = self.dim
        self.x = self.x - he / ((n + 1) * math.sqrt(ehe))
        shape = (n**2 / (n**2 - 1.0)) * (self.shape - (2.0 / (n + 1)) * np.outer(he, he) / ehe)
        self.shape = (shape + shape.T) / 2.0

    def contains(self, point, slack: float = 0.0) -> bool:
        d = as_vector(point, dim=self.dim) - self.x
        return float(d @ np.linalg.solve(self.shape, d)) <= 1.0 + slack


@dataclass(frozen=True)
class CertificateSnapshot:
    step: int
    certificate: Certificate | None
    diagnostics: CertificateDiagnostics | None
    induced_point: np.ndarray | None
    lp_status: str
    note: str = ""


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    oracle_calls: int
    kind: StepKind
    best_value: float | None
    wall_ms: float
    snapshot: CertificateSnapshot | None = None


@dataclass
class RunTrace:
    records: list[TraceRecord] = field(default_factory=list)
    termination: str = "budget"
    optimal_point: np.ndarray | None = None
    lp_solves: int = 0
    engine_frozen_at: int | None = None


@dataclass
class DriveResult:
    trace: RunTrace
    protocol: ExecutionProtocol
    engine: VaidyaEngine | EllipsoidEngine
    residual_domain: Domain | None

    @property
    def localizer(self) -> PolytopeLocalizer | None:
        return getattr(self.engine, "localizer", None)


def initial_box(domain: Domain, inflate: float = 0.01) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounding box of the domain, inflated about its center."""
    lower, upper = domain.bounding_box()
    center = (lower + upper) / 2.0
    half = (upper - lower) / 2.0 * (1.0 + inflate)
    return center - half, center + half


def make_engine(method: str, domain: Domain,
                params: VaidyaParams | None = None):
    """Build an engine plus the initial localizer box for residual evaluation."""
    lower, upper = initial_box(domain)
    box = Box(lower, upper)
    if method == "vaidya":
        return VaidyaEngine.from_box(lower, upper, params), box
    if method == "ellipsoid":
        return EllipsoidEngine.from_box(lower, upper), box
    raise ValueError(f"unknown method {method!r}")


def drive(engine, domain: Domain, oracle, budget: int,
          cert_every: int = 0, lp_alpha: float = 0.5, lp_pivot_limit: int = 20000,
          residual_domain: Domain | None = None, iteration_hook=None) -> DriveResult:
    """Run the cutting-plane loop for ``budget`` oracle interrogations.

    ``cert_every`` > 0 schedules certificate computation every that many
    iterations (certificate-capable engines only), with residuals evaluated
    over ``residual_domain``.  ``iteration_hook(t, engine)`` runs after every
    engine update; tests use it to watch localizer state.
    """
    want_certificates = cert_every > 0 and engine.supports_certificates
    if want_certificates and residual_domain is None:
        raise ValueError("certificate schedule needs a residual domain")
    protocol = ExecutionProtocol()
    trace = RunTrace()
    best: float | None = None
    started = time.perf_counter()

    for t in range(1, budget + 1):
        x = engine.x
        if domain.contains_interior(x):
            out = oracle(x)
            direction = as_vector(out.subgradient)
            if not np.any(direction != 0.0):
                trace.termination = "zero_subgradient"
                trace.optimal_point = x.copy()
                break
            protocol.record_step(x, direction, StepKind.PRODUCTIVE,
                                 value=out.value, payload=out.payload)
            best = out.value if best is None else min(best, out.value)
            kind = StepKind.PRODUCTIVE
        else:
            separator = domain.separate(x)
            direction = separator.direction
            protocol.record_step(x, direction, StepKind.NONPRODUCTIVE)
            kind = StepKind.NONPRODUCTIVE

        engine.observe_cut(direction, t, kind)

        snapshot = None
        if want_certificates and t % cert_every == 0:
            snapshot = _certificate_snapshot(engine.localizer, protocol, t,
                                             domain, residual_domain,
                                             lp_alpha, lp_pivot_limit)
            trace.lp_solves += 1
        wall_ms = (time.perf_counter() - started) * 1e3
        trace.records.append(TraceRecord(iteration=t, oracle_calls=t, kind=kind,
                                         best_value=best, wall_ms=wall_ms,
                                         snapshot=snapshot))
        if iteration_hook is not None:
            iteration_hook(t, engine)

    trace.engine_frozen_at = getattr(engine, "frozen_at", None)
    return DriveResult(trace=trace, protocol=protocol, engine=engine,
                       residual_domain=residual_domain)


def _certificate_snapshot(localizer, protocol, step, domain_x, domain_b,
                          lp_alpha, lp_pivot_limit) -> CertificateSnapshot:
    instance = build_certificate_lp(localizer)
    solution = lp_solver.solve(instance, alpha=lp_alpha, pivot_limit=lp_pivot_limit)
    try:
        cert = certificate_from_lambda(solution.lam, localizer)
    except DegenerateCertificate:
        return CertificateSnapshot(step=step, certificate=None, diagnostics=None,
                                   induced_point=None, lp_status=solution.status,
                                   note="no certificate yet")
    diag = diagnostics(cert, protocol, domain_x, domain_b)
    induced = induced_solution(cert, protocol)
    return CertificateSnapshot(step=step, certificate=cert, diagnostics=diag,
                               induced_point=induced, lp_status=solution.status)


def run(method: str, domain: Domain, oracle, budget: int,
        cert_every: int = 0, lp_alpha: float = 0.5,
        vaidya_params: VaidyaParams | None = None,
        iteration_hook=None) -> DriveResult:
    """Construct the engine for ``method`` over ``domain`` and drive it."""
    engine, box = make_engine(method, domain, vaidya_params)
    return drive(engine, domain, oracle, budget, cert_every=cert_every,
                 lp_alpha=lp_alpha, residual_domain=box,
                 iteration_hook=iteration_hook)
