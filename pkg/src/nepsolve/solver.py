"""Jacobi-type descent Newton iteration with prediction-based line search.

Each iteration solves the block system

    [ H1   t*M1 ] [d1]     [g1]
    [ t*M2  H2  ] [d2] = - [g2]

where H_i is a positive definite surrogate of player i's own Hessian block
and M_i is that player's mixed block, zeroed out as a safeguard once the
player is stationary and the step is small. A single step length t is then
backtracked simultaneously for both players: every trial t changes the
system, so the direction is re-solved before the six acceptance
inequalities are checked. The inequalities compare each player's progress
against the objective parameterized by the *predicted* decision of the
opponent (x_other + t*d_other), not the current one.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .core import NonFiniteEvaluation, classify_point, evaluate_residual
from .linalg import SingularMatrixError, SpdSurrogate, assemble_block_system, lu_solve, modified_cholesky


class HessianStrategy(Enum):
    MODIFIED_EXACT = "modified-exact"
    IDENTITY = "identity"
    USER_SUPPLIED = "user-supplied"


class SolveStatus(Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    MAX_ITERATIONS = "max-iterations"
    LINE_SEARCH_FAILURE = "line-search-failure"


@dataclass(frozen=True)
class SolverConfig:
    """Scalar parameters of the iteration.

    alpha is the Armijo constant, theta the angle constant, gamma the
    gradient/direction ratio constant, and tau the safeguard threshold: a
    stationary player's mixed block is zeroed only once t <= tau.
    """

    alpha: float = 1e-6
    theta: float = 0.01
    gamma: float = 1e-6
    tau: float = 0.99
    grad_tol: float = 1e-4
    max_iter: int = 1000
    t_min: float = 1e-18
    divergence_radius: float = 1e8
    eps_stationary: float = 1e-12
    chol_floor: float = 1e-8
    eps_psd: float = 1e-8
    hessian_strategy: HessianStrategy = HessianStrategy.MODIFIED_EXACT
    user_h1: Optional[np.ndarray] = None
    user_h2: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        for name in ("theta", "gamma", "grad_tol", "t_min", "divergence_radius", "chol_floor", "eps_psd"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.eps_stationary < 0:
            raise ValueError("eps_stationary must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.hessian_strategy is HessianStrategy.USER_SUPPLIED and (
            self.user_h1 is None or self.user_h2 is None
        ):
            raise ValueError("user-supplied strategy needs user_h1 and user_h2")


@dataclass(frozen=True)
class Direction:
    d1: np.ndarray
    d2: np.ndarray
    t_used_in_system: float


@dataclass(frozen=True)
class LineSearchCertificate:
    """Outcome of the six acceptance inequalities at the accepted step."""

    t: float
    checks: tuple  # six booleans, players 1 then 2: armijo, angle, ratio
    backtracks: int
    singular_halvings: int

    @property
    def accepted(self):
        return all(self.checks)


@dataclass(frozen=True)
class IterateRecord:
    k: int
    x1: np.ndarray
    x2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    t: float
    d1: np.ndarray
    d2: np.ndarray
    certificate: Optional[LineSearchCertificate]


@dataclass(frozen=True)
class SolveReport:
    status: SolveStatus
    final_x1: np.ndarray
    final_x2: np.ndarray
    final_residual: float
    iterations: int
    trajectory: tuple
    classification: object = None
    problem: object = None
    config: object = None
    solver: str = "descent-newton"


def safeguard_mixed_blocks(g1_norm, g2_norm, t, config, mixed1, mixed2):
    """Zero a player's mixed block once that player is stationary and t <= tau."""
    if t <= 0:
        raise ValueError("t must be positive")
    M1 = mixed1 if (g1_norm > config.eps_stationary or t > config.tau) else np.zeros_like(mixed1)
    M2 = mixed2 if (g2_norm > config.eps_stationary or t > config.tau) else np.zeros_like(mixed2)
    return M1, M2


def _exact_surrogate(block, floor):
    # Nearly positive semidefinite blocks get the minimal diagonal shift, so
    # Newton curvature survives untouched (a null Hessian becomes floor*I).
    # Blocks with genuine negative curvature fall back to the identity: a
    # barely-shifted indefinite block is nearly singular and produces huge
    # directions that the line search then has to shrink away.
    block = 0.5 * (block + block.T)
    min_eig = float(np.linalg.eigvalsh(block)[0])
    if min_eig < -floor:
        return SpdSurrogate(np.eye(block.shape[0]), 0.0, floor)
    return modified_cholesky(block, floor)


def build_surrogates(problem, x1, x2, config):
    """Positive definite per-player Hessian surrogates for one iteration."""
    strategy = config.hessian_strategy
    if strategy is HessianStrategy.MODIFIED_EXACT:
        h11 = problem.hessian11(x1, x2)
        h22 = problem.hessian22(x1, x2)
        if not (np.all(np.isfinite(h11)) and np.all(np.isfinite(h22))):
            raise NonFiniteEvaluation("Hessian oracle returned a non-finite value")
        return (
            _exact_surrogate(h11, config.chol_floor),
            _exact_surrogate(h22, config.chol_floor),
        )
    if strategy is HessianStrategy.IDENTITY:
        return (
            SpdSurrogate(np.eye(problem.n1), 0.0, config.chol_floor),
            SpdSurrogate(np.eye(problem.n2), 0.0, config.chol_floor),
        )
    return (
        modified_cholesky(config.user_h1, config.chol_floor),
        modified_cholesky(config.user_h2, config.chol_floor),
    )


def compute_direction(problem, x1, x2, g1, g2, H1, H2, t, config, mixed1=None, mixed2=None):
    """Solve the safeguarded block system for the tentative step length t.

    Raises SingularMatrixError when the assembled matrix fails the pivot
    test; the iteration then halves t and retries. The mixed blocks may be
    passed in to avoid re-evaluating them on retries (they depend on the
    iterate only, not on t).
    """
    if mixed1 is None:
        mixed1 = problem.mixed12_f1(x1, x2)
    if mixed2 is None:
        mixed2 = problem.mixed21_f2(x1, x2)
    g1n = float(np.linalg.norm(g1))
    g2n = float(np.linalg.norm(g2))
    M1, M2 = safeguard_mixed_blocks(g1n, g2n, t, config, mixed1, mixed2)
    system = assemble_block_system(H1, H2, M1, M2, t)
    rhs = -np.concatenate([g1, g2])
    d = lu_solve(system, rhs)
    return Direction(d1=d[: problem.n1], d2=d[problem.n1 :], t_used_in_system=t)


def check_inequalities(problem, x1, x2, g1, g2, direction, t, config):
    """Evaluate the six acceptance inequalities for a trial step.

    Player 1 is judged against f1 parameterized at the predicted opponent
    decision x2 + t*d2, player 2 against f2 at x1 + t*d1: an Armijo
    decrease, an angle condition keeping the direction away from orthogonal
    to the predicted gradient, and a lower bound on the direction size
    relative to that gradient (vacuous for a stationary player).

    Raises NonFiniteEvaluation if any evaluation is non-finite; the caller
    treats that as a rejected trial and notes possible divergence.
    """
    d1, d2 = direction.d1, direction.d2
    y1 = x1 + t * d1
    y2 = x2 + t * d2

    p1 = problem.gradient1(x1, y2)
    p2 = problem.gradient2(y1, x2)
    f1_trial = problem.value1(y1, y2)
    f1_pred = problem.value1(x1, y2)
    f2_trial = problem.value2(y1, y2)
    f2_pred = problem.value2(y1, x2)
    values = np.concatenate([p1, p2, [f1_trial, f1_pred, f2_trial, f2_pred]])
    if not np.all(np.isfinite(values)):
        raise NonFiniteEvaluation("non-finite evaluation at a trial point")

    d1n = float(np.linalg.norm(d1))
    d2n = float(np.linalg.norm(d2))
    p1n = float(np.linalg.norm(p1))
    p2n = float(np.linalg.norm(p2))
    g1n = float(np.linalg.norm(g1))
    g2n = float(np.linalg.norm(g2))
    slope1 = float(p1 @ d1)
    slope2 = float(p2 @ d2)

    checks = (
        f1_trial <= f1_pred + config.alpha * t * slope1,
        slope1 <= -config.theta * p1n * d1n,
        config.gamma * p1n * g1n <= d1n * g1n,
        f2_trial <= f2_pred + config.alpha * t * slope2,
        slope2 <= -config.theta * p2n * d2n,
        config.gamma * p2n * g2n <= d2n * g2n,
    )
    return LineSearchCertificate(t=t, checks=checks, backtracks=0, singular_halvings=0)


def _diverged_report(problem, config, x1, x2, trajectory, k):
    return SolveReport(
        status=SolveStatus.DIVERGED,
        final_x1=x1,
        final_x2=x2,
        final_residual=float("inf"),
        iterations=k,
        trajectory=tuple(trajectory),
        classification=None,
        problem=problem,
        config=config,
    )


def solve(problem, x0_1, x0_2, config=None):
    """Run the iteration from (x0_1, x0_2) until a terminal status.

    Per iteration: evaluate gradients and stop on convergence, divergence or
    the iteration cap; build the Hessian surrogates once; then with t reset
    to 1, repeatedly safeguard the mixed blocks, solve the block system
    (halving t when it is singular) and test the six inequalities, halving t
    on rejection, until a step is accepted or t falls below t_min.

    All failure modes are statuses on the report, never exceptions.
    """
    config = config or SolverConfig()
    x1 = np.atleast_1d(np.asarray(x0_1, dtype=float)).copy()
    x2 = np.atleast_1d(np.asarray(x0_2, dtype=float)).copy()
    if x1.shape != (problem.n1,) or x2.shape != (problem.n2,):
        raise ValueError("start point does not match problem dimensions")

    trajectory = []
    k = 0
    while True:
        if max(np.max(np.abs(x1)), np.max(np.abs(x2))) > config.divergence_radius:
            return _diverged_report(problem, config, x1, x2, trajectory, k)
        try:
            res = evaluate_residual(problem, x1, x2)
        except NonFiniteEvaluation:
            return _diverged_report(problem, config, x1, x2, trajectory, k)
        if res.norm <= config.grad_tol:
            return SolveReport(
                status=SolveStatus.CONVERGED,
                final_x1=x1,
                final_x2=x2,
                final_residual=res.norm,
                iterations=k,
                trajectory=tuple(trajectory),
                classification=classify_point(
                    problem, x1, x2, config.grad_tol, eps_psd=config.eps_psd
                ),
                problem=problem,
                config=config,
            )
        if k >= config.max_iter:
            return SolveReport(
                status=SolveStatus.MAX_ITERATIONS,
                final_x1=x1,
                final_x2=x2,
                final_residual=res.norm,
                iterations=k,
                trajectory=tuple(trajectory),
                classification=None,
                problem=problem,
                config=config,
            )

        try:
            H1, H2 = build_surrogates(problem, x1, x2, config)
            mixed1 = problem.mixed12_f1(x1, x2)
            mixed2 = problem.mixed21_f2(x1, x2)
            if not (np.all(np.isfinite(mixed1)) and np.all(np.isfinite(mixed2))):
                raise NonFiniteEvaluation("mixed Hessian block is non-finite")
        except NonFiniteEvaluation:
            return _diverged_report(problem, config, x1, x2, trajectory, k)

        t = 1.0
        backtracks = 0
        singular_halvings = 0
        nonfinite_seen = False
        accepted = None
        while True:
            try:
                direction = compute_direction(
                    problem, x1, x2, res.g1, res.g2, H1, H2, t, config,
                    mixed1=mixed1, mixed2=mixed2,
                )
            except SingularMatrixError:
                singular_halvings += 1
                t *= 0.5
                if t < config.t_min:
                    break
                continue
            try:
                cert = check_inequalities(
                    problem, x1, x2, res.g1, res.g2, direction, t, config
                )
                rejected = not cert.accepted
            except NonFiniteEvaluation:
                nonfinite_seen = True
                rejected = True
                cert = None
            if not rejected:
                accepted = (direction, cert)
                break
            backtracks += 1
            t *= 0.5
            if t < config.t_min:
                break

        if accepted is None:
            if nonfinite_seen:
                return _diverged_report(problem, config, x1, x2, trajectory, k)
            return SolveReport(
                status=SolveStatus.LINE_SEARCH_FAILURE,
                final_x1=x1,
                final_x2=x2,
                final_residual=res.norm,
                iterations=k,
                trajectory=tuple(trajectory),
                classification=None,
                problem=problem,
                config=config,
            )

        direction, cert = accepted
        cert = replace(cert, backtracks=backtracks, singular_halvings=singular_halvings)
        trajectory.append(
            IterateRecord(
                k=k,
                x1=x1,
                x2=x2,
                g1=res.g1,
                g2=res.g2,
                t=t,
                d1=direction.d1,
                d2=direction.d2,
                certificate=cert,
            )
        )
        x1 = x1 + t * direction.d1
        x2 = x2 + t * direction.d2
        k += 1
