"""Descriptor-model data types, validation, simulation and the ODE embedding.

The model is the time-varying implicit linear recursion

    F[0] x_0 = f_0
    F[k+1] x_{k+1} - C[k] x_k = f_{k+1},      k = 0 .. tau-1
    y_k = H[k] x_k + g_k,                     k = 0 .. tau

with F[k], C[k] of shape (m, n), H[k] of shape (p, n), and positive
definite weights S[k] (m, m) and R[k] (p, p) defining the uncertainty
budget  sum_k (<S_k f_k, f_k> + <R_k g_k, g_k>) <= 1.

F need not be square or invertible, so the recursion may pin down only
part of the next state; simulation takes an explicit free component to
select one trajectory out of the affine solution set at each step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InconsistentDynamics
from .linalg import pinv, qform

__all__ = [
    "SIM_RESIDUAL_TOL",
    "DescriptorModel",
    "Trajectory",
    "ValidationReport",
    "validate",
    "simulate",
    "budget",
    "augment_ode",
    "truncate",
]

# Absolute residual above which a simulated step has no exact solution.
SIM_RESIDUAL_TOL = 1e-9


def _matrix_tuple(seq, name: str):
    try:
        return tuple(np.atleast_2d(np.asarray(mat, dtype=float)) for mat in seq)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"{name}: not a sequence of numeric matrices") from exc


@dataclass(frozen=True)
class DescriptorModel:
    """Implicit linear model over a finite horizon, with budget weights.

    Attributes
    ----------
    n, m, p : int
        State, equation and output dimensions.
    tau : int
        Horizon; matrices F, H, S, R have tau+1 entries, C has tau.
    F, C, H, S, R : tuple of numpy.ndarray
        Matrix sequences as described in the module docstring.
    """

    n: int
    m: int
    p: int
    tau: int
    F: tuple
    C: tuple
    H: tuple
    S: tuple
    R: tuple

    @classmethod
    def from_sequences(cls, F, C, H, S, R) -> "DescriptorModel":
        """Build a model from matrix sequences, inferring (n, m, p, tau).

        Dimensions come from the leading matrices; later entries are not
        checked here, so :func:`validate` can report every mismatch.
        """
        F = _matrix_tuple(F, "F")
        C = _matrix_tuple(C, "C")
        H = _matrix_tuple(H, "H")
        S = _matrix_tuple(S, "S")
        R = _matrix_tuple(R, "R")
        if not F or not H:
            raise DimensionMismatch("F and H must have at least one entry")
        m, n = F[0].shape
        p = H[0].shape[0]
        return cls(n=n, m=m, p=p, tau=len(F) - 1, F=F, C=C, H=H, S=S, R=R)

    @classmethod
    def constant(cls, F, C, H, S, R, tau: int) -> "DescriptorModel":
        """Build a time-invariant model by replicating one matrix of each kind."""
        if tau < 0:
            raise DimensionMismatch("tau must be nonnegative")
        return cls.from_sequences(
            [F] * (tau + 1), [C] * tau, [H] * (tau + 1), [S] * (tau + 1), [R] * (tau + 1)
        )


@dataclass(frozen=True)
class Trajectory:
    """One realization of the model: states, inputs, noises and outputs.

    Arrays are stacked with one row per step k = 0..tau: ``states`` is
    (tau+1, n), ``inputs`` (tau+1, m), ``noises`` and ``outputs`` (tau+1, p).
    """

    states: np.ndarray
    inputs: np.ndarray
    noises: np.ndarray
    outputs: np.ndarray


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`: empty ``issues`` means the model is usable."""

    issues: tuple

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        return "ok" if self.ok else "; ".join(self.issues)


def _check_weight(issues, mat, name, dim):
    if mat.shape != (dim, dim):
        issues.append(
            f"{name} dimension mismatch: got {mat.shape}, expected {(dim, dim)}"
        )
        return
    if not np.all(np.isfinite(mat)):
        issues.append(f"{name} has non-finite entries")
        return
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(mat).max()))):
        issues.append(f"{name} not symmetric")
        return
    smallest = float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[0])
    if smallest <= 0.0:
        issues.append(f"{name} not positive definite (min eigenvalue {smallest:.3g})")


def validate(model: DescriptorModel) -> ValidationReport:
    """Check shapes, finiteness and weight positivity; never raises.

    Every finding is reported, so a single call lists all dimension
    mismatches and all non-positive-definite weights at once.
    """
    issues = []
    n, m, p, tau = model.n, model.m, model.p, model.tau
    if min(n, m, p) < 1 or tau < 0:
        issues.append(f"bad dimensions n={n} m={m} p={p} tau={tau}")
    for name, seq, count in (
        ("F", model.F, tau + 1),
        ("C", model.C, tau),
        ("H", model.H, tau + 1),
        ("S", model.S, tau + 1),
        ("R", model.R, tau + 1),
    ):
        if len(seq) != count:
            issues.append(f"{name} has {len(seq)} entries, expected {count}")
    for name, seq, shape in (("F", model.F, (m, n)), ("C", model.C, (m, n)), ("H", model.H, (p, n))):
        for k, mat in enumerate(seq):
            if mat.shape != shape:
                issues.append(
                    f"{name}_{k} dimension mismatch: got {mat.shape}, expected {shape}"
                )
            elif not np.all(np.isfinite(mat)):
                issues.append(f"{name}_{k} has non-finite entries")
    for k, mat in enumerate(model.S):
        _check_weight(issues, mat, f"S_{k}", m)
    for k, mat in enumerate(model.R):
        _check_weight(issues, mat, f"R_{k}", p)
    return ValidationReport(issues=tuple(issues))


def _input_rows(value, count: int, dim: int, name: str) -> np.ndarray:
    if value is None:
        return np.zeros((count, dim))
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        if dim == 1:
            arr = arr.reshape(-1, 1)
        elif count == 1:
            arr = arr.reshape(1, -1)
    if arr.shape != (count, dim):
        raise DimensionMismatch(f"{name}: got shape {arr.shape}, expected {(count, dim)}")
    return arr


def simulate(model: DescriptorModel, f, g, w=None) -> Trajectory:
    """Roll the implicit recursion forward, selecting one exact trajectory.

    Each step solves ``F[k+1] x_{k+1} = C[k] x_k + f_{k+1}`` in the least
    squares sense and adds the projection of ``w_{k+1}`` onto the null
    space of ``F[k+1]``:

        x_{k+1} = pinv(F) (C x_k + f_{k+1}) + (I - pinv(F) F) w_{k+1}

    so the free component ``w`` chooses among the (possibly many) exact
    solutions.  When F is square and invertible the step does not depend
    on ``w`` at all.  Outputs are noiseless in the model sense:
    ``y_k = H[k] x_k + g_k`` exactly.

    Parameters
    ----------
    f : array_like
        Inputs, shape (tau+1, m); ``f[0]`` is the initial-condition datum.
    g : array_like
        Output noises, shape (tau+1, p).
    w : array_like, optional
        Free components, shape (tau+1, n); zeros when omitted.

    Raises
    ------
    InconsistentDynamics
        If at some step the right side lies outside the range of F and no
        exact solution exists (residual above ``SIM_RESIDUAL_TOL``).
    """
    tau, n, m, p = model.tau, model.n, model.m, model.p
    f = _input_rows(f, tau + 1, m, "f")
    g = _input_rows(g, tau + 1, p, "g")
    w = _input_rows(w, tau + 1, n, "w")

    states = np.zeros((tau + 1, n))
    eye = np.eye(n)
    for k in range(tau + 1):
        Fk = model.F[k]
        rhs = f[0] if k == 0 else model.C[k - 1] @ states[k - 1] + f[k]
        Fp = pinv(Fk)
        x = Fp @ rhs + (eye - Fp @ Fk) @ w[k]
        residual = float(np.linalg.norm(Fk @ x - rhs))
        if residual > SIM_RESIDUAL_TOL:
            raise InconsistentDynamics(
                f"step {k}: no exact solution, residual {residual:.3e}"
            )
        states[k] = x
    outputs = np.vstack([model.H[k] @ states[k] + g[k] for k in range(tau + 1)])
    return Trajectory(states=states, inputs=f.copy(), noises=g.copy(), outputs=outputs)


def budget(model: DescriptorModel, f, g) -> float:
    """Value of the uncertainty functional sum_k <S_k f_k, f_k> + <R_k g_k, g_k>.

    The model guarantees hold when this does not exceed 1; the value is
    reported as-is and never clamped.
    """
    f = _input_rows(f, model.tau + 1, model.m, "f")
    g = _input_rows(g, model.tau + 1, model.p, "g")
    total = 0.0
    for k in range(model.tau + 1):
        total += qform(model.S[k], f[k]) + qform(model.R[k], g[k])
    return float(total)


def _seq_of(value, count: int, name: str):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"{name}: not a matrix or uniform matrix sequence") from exc
    if arr.ndim == 3:
        if arr.shape[0] != count:
            raise DimensionMismatch(f"{name}: got {arr.shape[0]} matrices, expected {count}")
        return [arr[i] for i in range(count)]
    return [np.atleast_2d(arr)] * count


def augment_ode(A, output_map, S, R, tau: int | None = None) -> DescriptorModel:
    """Embed an explicit recursion with unknown drive into descriptor form.

    The plant  ``q_{k+1} = A_k q_k + v_k``, observed via ``output_map``,
    with the drive v wholly unknown, becomes a descriptor model on the
    doubled state x_k = (q_k, v_k):

        F_k = [I 0],   C_k = [A_k I],   H_k = [output_map_k 0]

    Only the initial condition datum f_0 = q_0 and output noise remain in
    the budget (weights S and R); the drive rides in the unweighted half
    of the state, so those directions stay unobservable by construction.

    Each matrix argument may be a single matrix (time-invariant, requires
    ``tau``) or a stacked sequence: A with tau entries, the others tau+1.
    """
    if tau is None:
        for value, offset in ((output_map, -1), (S, -1), (R, -1), (A, 0)):
            arr = np.asarray(value, dtype=float)
            if arr.ndim == 3:
                tau = arr.shape[0] + offset
                break
        else:
            raise DimensionMismatch("tau is required when all arguments are single matrices")
    A = _seq_of(A, tau, "A")
    output_map = _seq_of(output_map, tau + 1, "output_map")
    S = _seq_of(S, tau + 1, "S")
    R = _seq_of(R, tau + 1, "R")
    n = S[0].shape[0]
    for Ak in A:
        if Ak.shape != (n, n):
            raise DimensionMismatch(f"A must be {n}-by-{n}, got {Ak.shape}")
    if output_map[0].shape[1] != n:
        raise DimensionMismatch(
            f"output_map has {output_map[0].shape[1]} columns, expected {n}"
        )
    eye = np.eye(n)
    zero = np.zeros((n, n))
    F = [np.hstack([eye, zero])] * (tau + 1)
    C = [np.hstack([Ak, eye]) for Ak in A]
    H = [np.hstack([Hk, np.zeros((Hk.shape[0], n))]) for Hk in output_map]
    return DescriptorModel.from_sequences(F, C, H, S, R)


def truncate(model: DescriptorModel, tau: int) -> DescriptorModel:
    """Restriction of the model to the shorter horizon 0..tau."""
    if not 0 <= tau <= model.tau:
        raise DimensionMismatch(f"cannot truncate horizon {model.tau} to {tau}")
    return DescriptorModel(
        n=model.n,
        m=model.m,
        p=model.p,
        tau=tau,
        F=model.F[: tau + 1],
        C=model.C[:tau],
        H=model.H[: tau + 1],
        S=model.S[: tau + 1],
        R=model.R[: tau + 1],
    )
