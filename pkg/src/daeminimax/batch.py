"""Direct block least-squares solution of the whole-horizon problem.

The entire trajectory x = (x_0, ..., x_tau) is stacked into one vector
and the weighted residual functional

    I(x)  = <Q1 L x, L x> + <Q2 (y - H x), y - H x>
    I1(x) = <Q1 L x, L x> + <Q2 H x, H x>

is minimized in one shot, where L holds the descriptor dynamics
(F_k on the block diagonal, -C_{k-1} on the subdiagonal), H stacks the
output maps and Q1, Q2 are the block-diagonal budget weights.  This is
mathematically the same problem the recursive estimator solves step by
step, computed by an independent route, which makes it the reference
implementation the recursion is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NumericalBreakdown
from .linalg import as_vector, pinv, symmetrize
from .model import DescriptorModel

__all__ = [
    "BatchProblem",
    "BatchSolution",
    "assemble",
    "objective",
    "homogeneous_objective",
    "solve",
    "value_function",
    "decomposition_check",
]


@dataclass(frozen=True)
class BatchProblem:
    """Stacked operators and data for one horizon.

    L is ((tau+1) m, (tau+1) n), H is ((tau+1) p, (tau+1) n), Q1 and Q2
    are the block-diagonal weights, y the stacked measurement vector.
    """

    L: np.ndarray
    H: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    y: np.ndarray
    n: int
    m: int
    p: int
    tau: int


@dataclass(frozen=True)
class BatchSolution:
    """Minimum-norm minimizer of I, its value, and the normal matrix."""

    xstack: np.ndarray
    minI: float
    normal_matrix: np.ndarray


def assemble(model: DescriptorModel, ys) -> BatchProblem:
    """Stack the model and measurements into one least-squares problem."""
    tau, n, m, p = model.tau, model.n, model.m, model.p
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if ys.shape[0] == 1 and p == 1 and tau + 1 > 1:
        ys = ys.reshape(-1, 1)
    if ys.shape != (tau + 1, p):
        raise DimensionMismatch(
            f"measurements: got shape {ys.shape}, expected {(tau + 1, p)}"
        )
    steps = tau + 1
    L = np.zeros((steps * m, steps * n))
    H = np.zeros((steps * p, steps * n))
    Q1 = np.zeros((steps * m, steps * m))
    Q2 = np.zeros((steps * p, steps * p))
    for k in range(steps):
        L[k * m : (k + 1) * m, k * n : (k + 1) * n] = model.F[k]
        if k >= 1:
            L[k * m : (k + 1) * m, (k - 1) * n : k * n] = -model.C[k - 1]
        H[k * p : (k + 1) * p, k * n : (k + 1) * n] = model.H[k]
        Q1[k * m : (k + 1) * m, k * m : (k + 1) * m] = model.S[k]
        Q2[k * p : (k + 1) * p, k * p : (k + 1) * p] = model.R[k]
    return BatchProblem(L=L, H=H, Q1=Q1, Q2=Q2, y=ys.reshape(-1), n=n, m=m, p=p, tau=tau)


def objective(problem: BatchProblem, x) -> float:
    """I(x), the weighted residual of the stacked trajectory x."""
    x = _stacked(problem, x)
    Lx = problem.L @ x
    res = problem.y - problem.H @ x
    return float(Lx @ (problem.Q1 @ Lx) + res @ (problem.Q2 @ res))


def homogeneous_objective(problem: BatchProblem, x) -> float:
    """I1(x), the same functional with the measurement data removed."""
    x = _stacked(problem, x)
    Lx = problem.L @ x
    Hx = problem.H @ x
    return float(Lx @ (problem.Q1 @ Lx) + Hx @ (problem.Q2 @ Hx))


def _stacked(problem: BatchProblem, x) -> np.ndarray:
    x = as_vector(x, "xstack")
    want = (problem.tau + 1) * problem.n
    if x.shape != (want,):
        raise DimensionMismatch(f"xstack: got shape {x.shape}, expected ({want},)")
    return x


def solve(problem: BatchProblem, rank_tol: float = 0.0) -> BatchSolution:
    """Minimum-norm minimizer of I via the normal equations.

    xstack = pinv(L' Q1 L + H' Q2 H) (H' Q2 y); the normal matrix is kept
    on the solution so callers can verify the optimality residual.
    """
    N = symmetrize(problem.L.T @ problem.Q1 @ problem.L + problem.H.T @ problem.Q2 @ problem.H)
    rhs = problem.H.T @ (problem.Q2 @ problem.y)
    xstack = pinv(N, rank_tol) @ rhs
    value = objective(problem, xstack)
    if not np.isfinite(value) or not np.all(np.isfinite(xstack)):
        raise NumericalBreakdown("batch solve produced non-finite values")
    return BatchSolution(xstack=xstack, minI=float(value), normal_matrix=N)


def _weighted_stack(problem: BatchProblem):
    # Cholesky square roots turn I(x) into a plain residual norm:
    # I(x) = ||M x - d||^2 with M = [W1 L; W2 H], d = [0; W2 y].
    W1 = np.linalg.cholesky(problem.Q1).T
    W2 = np.linalg.cholesky(problem.Q2).T
    M = np.vstack([W1 @ problem.L, W2 @ problem.H])
    d = np.concatenate([np.zeros(problem.L.shape[0]), W2 @ problem.y])
    return M, d


def value_function(problem: BatchProblem, q, rank_tol: float = 0.0) -> float:
    """Minimum of I over trajectories whose final state is pinned to q.

    Minimizes over x_0..x_{tau-1} by dense least squares with the last
    state block held at q.  As a function of q this is the quadratic
    <P_tau q, q> - 2 <r_tau, q> + alpha_tau the recursion maintains.
    """
    q = as_vector(q, "q")
    if q.shape != (problem.n,):
        raise DimensionMismatch(f"q: got shape {q.shape}, expected ({problem.n},)")
    M, d = _weighted_stack(problem)
    free = problem.tau * problem.n
    rhs = d - M[:, free:] @ q
    if free == 0:
        residual = -rhs
    else:
        Mz = M[:, :free]
        z = np.linalg.lstsq(Mz, rhs, rcond=rank_tol if rank_tol > 0 else None)[0]
        residual = Mz @ z - rhs
    return float(residual @ residual)


def decomposition_check(problem: BatchProblem, solution: BatchSolution, x) -> float:
    """Residual of the identity I(xstack - x) = I1(x) + I(xstack).

    The identity holds exactly when ``solution.xstack`` satisfies the
    normal equations (the cross terms cancel), so the returned value
    measures how far the solver is from optimality; it should sit at
    roundoff level for any probe x.
    """
    x = _stacked(problem, x)
    lhs = objective(problem, solution.xstack - x)
    rhs = homogeneous_objective(problem, x) + solution.minI
    return float(abs(lhs - rhs))
