"""Comparison solvers: Newton with unit step on the stacked first-order
system, and the exact Jacobi iteration that re-solves each player's own
stationarity equation against the opponent's current decision."""

import numpy as np

from .core import NonFiniteEvaluation, classify_point, evaluate_residual
from .linalg import SingularMatrixError, lu_solve
from .solver import IterateRecord, SolveReport, SolveStatus, SolverConfig


class InnerSolveFailure(RuntimeError):
    """A per-player stationarity solve is undefined or did not converge."""


def newton_kkt_step(problem, x1, x2):
    """Unit Newton step for the stacked first-order system.

    Uses the true (possibly indefinite) per-player Hessian blocks; raises
    SingularMatrixError when the full matrix fails the pivot test.
    """
    res = evaluate_residual(problem, x1, x2)
    K = np.block(
        [
            [problem.hessian11(x1, x2), problem.mixed12_f1(x1, x2)],
            [problem.mixed21_f2(x1, x2), problem.hessian22(x1, x2)],
        ]
    )
    if not np.all(np.isfinite(K)):
        raise NonFiniteEvaluation("Hessian oracle returned a non-finite value")
    d = lu_solve(K, -np.concatenate([res.g1, res.g2]))
    return d[: problem.n1], d[problem.n1 :]


def _inner_newton_root(grad, hess, z0, tol, max_iter=100):
    """Damped Newton root find for one player's stationarity equation.

    Backtracks on the squared gradient norm. Raises InnerSolveFailure when
    the per-player Hessian block is singular (the iteration is undefined)
    or progress stalls.
    """
    z = np.asarray(z0, dtype=float).copy()
    for _ in range(max_iter):
        g = grad(z)
        if not np.all(np.isfinite(g)):
            raise NonFiniteEvaluation("non-finite gradient in inner solve")
        if np.linalg.norm(g) <= tol:
            return z
        try:
            p = lu_solve(hess(z), -g)
        except SingularMatrixError as err:
            raise InnerSolveFailure(
                "per-player Hessian block is singular; the step is undefined"
            ) from err
        phi = float(g @ g)
        s = 1.0
        while s >= 1e-12:
            g_trial = grad(z + s * p)
            if np.all(np.isfinite(g_trial)) and float(g_trial @ g_trial) <= phi * (1.0 - 1e-4 * s):
                break
            s *= 0.5
        else:
            raise InnerSolveFailure("inner line search stalled")
        z = z + s * p
    g = grad(z)
    if np.linalg.norm(g) <= tol:
        return z
    raise InnerSolveFailure("inner Newton did not converge")


def exact_jacobi_step(problem, x1, x2, inner_tol=1e-10):
    """One simultaneous best-response-style update.

    x1_new solves grad of f1(., x2) = 0 and x2_new solves grad of
    f2(x1, .) = 0, both from the current coordinates against the opponent's
    *current* decision; the pair is then adopted jointly.
    """
    if inner_tol <= 0:
        raise ValueError("inner_tol must be positive")
    x1_new = _inner_newton_root(
        lambda z: problem.gradient1(z, x2),
        lambda z: problem.hessian11(z, x2),
        x1,
        inner_tol,
    )
    x2_new = _inner_newton_root(
        lambda z: problem.gradient2(x1, z),
        lambda z: problem.hessian22(x1, z),
        x2,
        inner_tol,
    )
    return x1_new, x2_new


def _run_loop(problem, x0_1, x0_2, config, stepper, solver_name):
    config = config or SolverConfig()
    x1 = np.atleast_1d(np.asarray(x0_1, dtype=float)).copy()
    x2 = np.atleast_1d(np.asarray(x0_2, dtype=float)).copy()
    if x1.shape != (problem.n1,) or x2.shape != (problem.n2,):
        raise ValueError("start point does not match problem dimensions")

    trajectory = []
    k = 0
    while True:
        if max(np.max(np.abs(x1)), np.max(np.abs(x2))) > config.divergence_radius:
            status, res_norm, classification = SolveStatus.DIVERGED, float("inf"), None
            break
        try:
            res = evaluate_residual(problem, x1, x2)
        except NonFiniteEvaluation:
            status, res_norm, classification = SolveStatus.DIVERGED, float("inf"), None
            break
        if res.norm <= config.grad_tol:
            status, res_norm = SolveStatus.CONVERGED, res.norm
            classification = classify_point(
                problem, x1, x2, config.grad_tol, eps_psd=config.eps_psd
            )
            break
        if k >= config.max_iter:
            status, res_norm, classification = SolveStatus.MAX_ITERATIONS, res.norm, None
            break
        try:
            x1_next, x2_next = stepper(x1, x2)
        except NonFiniteEvaluation:
            status, res_norm, classification = SolveStatus.DIVERGED, float("inf"), None
            break
        trajectory.append(
            IterateRecord(
                k=k,
                x1=x1,
                x2=x2,
                g1=res.g1,
                g2=res.g2,
                t=1.0,
                d1=x1_next - x1,
                d2=x2_next - x2,
                certificate=None,
            )
        )
        x1, x2 = x1_next, x2_next
        k += 1

    return SolveReport(
        status=status,
        final_x1=x1,
        final_x2=x2,
        final_residual=res_norm,
        iterations=k,
        trajectory=tuple(trajectory),
        classification=classification,
        problem=problem,
        config=config,
        solver=solver_name,
    )


def solve_newton_kkt(problem, x0_1, x0_2, config=None):
    """Iterate unit Newton steps on the stacked system until termination.

    SingularMatrixError propagates: a singular full matrix leaves the method
    undefined at the iterate.
    """

    def stepper(x1, x2):
        d1, d2 = newton_kkt_step(problem, x1, x2)
        return x1 + d1, x2 + d2

    return _run_loop(problem, x0_1, x0_2, config, stepper, "newton-kkt")


def solve_exact_jacobi(problem, x0_1, x0_2, config=None, inner_tol=1e-10):
    """Iterate simultaneous per-player stationarity solves until termination.

    InnerSolveFailure propagates (e.g. a null per-player Hessian makes the
    update undefined).
    """

    def stepper(x1, x2):
        return exact_jacobi_step(problem, x1, x2, inner_tol=inner_tol)

    return _run_loop(problem, x0_1, x0_2, config, stepper, "exact-jacobi")
