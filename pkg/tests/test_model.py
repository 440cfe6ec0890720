"""Model container, validation, simulation, budget, ODE augmentation."""

import numpy as np
import pytest

from conftest import feasible_data, random_model
from daeminimax.errors import DimensionMismatch, InconsistentDynamics
from daeminimax.model import (
    DescriptorModel,
    augment_ode,
    budget,
    simulate,
    truncate,
    validate,
)


def scalar_chain(tau=1):
    one = np.array([[1.0]])
    return DescriptorModel.constant(one, one, one, one, one, tau)


def test_constant_constructor_shapes():
    model = scalar_chain(3)
    assert (model.n, model.m, model.p, model.tau) == (1, 1, 1, 3)
    assert len(model.F) == len(model.H) == 4
    assert len(model.C) == 3
    assert len(model.S) == len(model.R) == 4


def test_from_sequences_infers_dimensions():
    rng = np.random.default_rng(5)
    model = random_model(rng, n=3, m=2, p=1, tau=4)
    assert (model.n, model.m, model.p, model.tau) == (3, 2, 1, 4)


def test_validate_accepts_random_model():
    rng = np.random.default_rng(6)
    report = validate(random_model(rng))
    assert report.ok, str(report)


def test_validate_reports_shape_mismatch():
    model = scalar_chain(2)
    bad = DescriptorModel.from_sequences(
        model.F, model.C,
        [np.array([[1.0]]), np.array([[1.0, 0.0]]), np.array([[1.0]])],
        model.S, model.R,
    )
    report = validate(bad)
    assert not report.ok
    assert any("H_1" in issue for issue in report.issues)


def test_validate_reports_indefinite_weight():
    model = scalar_chain(1)
    bad = DescriptorModel.from_sequences(
        model.F, model.C, model.H,
        [np.array([[-1.0]]), np.array([[1.0]])],
        model.R,
    )
    report = validate(bad)
    assert not report.ok
    assert any("S_0" in issue and "positive definite" in issue
               for issue in report.issues)


def test_validate_reports_asymmetric_weight():
    rng = np.random.default_rng(8)
    model = random_model(rng, n=2, m=2, p=2, tau=1)
    R = [np.array([[1.0, 0.5], [0.0, 1.0]])] * 2
    bad = DescriptorModel.from_sequences(model.F, model.C, model.H, model.S, R)
    report = validate(bad)
    assert not report.ok


def test_simulate_zero_inputs_gives_zero_trajectory():
    model = scalar_chain(3)
    traj = simulate(model, np.zeros((4, 1)), np.zeros((4, 1)))
    assert np.all(traj.states == 0.0)
    assert np.all(traj.outputs == 0.0)


def test_simulate_scalar_chain_worked():
    # x_0 = f_0, x_{k+1} = x_k + f_{k+1}; y_k = x_k + g_k.
    model = scalar_chain(2)
    f = np.array([[1.0], [2.0], [-0.5]])
    g = np.array([[0.1], [0.0], [0.0]])
    traj = simulate(model, f, g)
    assert np.allclose(traj.states.ravel(), [1.0, 3.0, 2.5], atol=1e-15)
    assert np.allclose(traj.outputs.ravel(), [1.1, 3.0, 2.5], atol=1e-15)


def test_simulate_satisfies_dynamics_residual():
    rng = np.random.default_rng(9)
    for _ in range(20):
        model = random_model(rng)
        xs, f, g, _ = feasible_data(rng, model)
        traj = simulate(model, f, g, w=xs)
        for k in range(model.tau + 1):
            prev = traj.states[k - 1] if k else None
            lhs = model.F[k] @ traj.states[k]
            if k:
                lhs = lhs - model.C[k - 1] @ prev
            assert np.linalg.norm(lhs - f[k]) <= 1e-8


def test_simulate_free_component_fills_nullspace():
    # F = (1 0): the second state coordinate is unconstrained and must
    # come from the w sequence's projection onto the null space.
    F = np.array([[1.0, 0.0]])
    C = np.zeros((1, 2))
    H = np.array([[1.0, 0.0]])
    one = np.array([[1.0]])
    model = DescriptorModel.constant(F, C, H, one, one, 1)
    f = np.array([[2.0], [3.0]])
    g = np.zeros((2, 1))
    w = np.array([[0.0, 7.0], [0.0, -4.0]])
    traj = simulate(model, f, g, w=w)
    assert np.allclose(traj.states, [[2.0, 7.0], [3.0, -4.0]], atol=1e-12)


def test_simulate_rejects_inconsistent_dynamics():
    # Second equation row reads 0 = f_k[1]; a nonzero datum there is
    # unsatisfiable for every state.
    F = np.array([[1.0], [0.0]])
    C = np.zeros((2, 1))
    H = np.array([[1.0]])
    one = np.array([[1.0]])
    model = DescriptorModel.constant(F, C, H, np.eye(2), one, 1)
    f = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(InconsistentDynamics):
        simulate(model, f, np.zeros((2, 1)))


def test_budget_is_weighted_square_sum():
    model = scalar_chain(1)
    f = np.array([[1.0], [2.0]])
    g = np.array([[3.0], [0.0]])
    assert budget(model, f, g) == pytest.approx(1.0 + 4.0 + 9.0, abs=1e-15)


def test_budget_weights_enter():
    one = np.array([[1.0]])
    model = DescriptorModel.constant(
        one, one, one, np.array([[2.0]]), np.array([[0.5]]), 1
    )
    f = np.array([[1.0], [1.0]])
    g = np.array([[2.0], [0.0]])
    assert budget(model, f, g) == pytest.approx(2.0 + 2.0 + 2.0, abs=1e-15)


def test_augment_ode_block_structure():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    Htilde = np.array([[1.0, 0.0]])
    model = augment_ode(A, Htilde, np.eye(2), np.array([[1.0]]), tau=3)
    assert (model.n, model.m, model.p, model.tau) == (4, 2, 1, 3)
    eye2 = np.eye(2)
    assert np.array_equal(model.F[1], np.hstack([eye2, np.zeros((2, 2))]))
    assert np.array_equal(model.C[1], np.hstack([A, eye2]))
    assert np.array_equal(model.H[1], np.hstack([Htilde, np.zeros((1, 2))]))


def test_augment_ode_reproduces_ode_trajectory():
    # Drive injected through the free half of the state: the first two
    # state components must equal the driven ODE trajectory to 1e-12.
    rng = np.random.default_rng(10)
    A = np.array([[0.1, -0.2], [0.28, -0.1]])
    tau = 12
    v0 = np.array([0.1, 0.1])
    drives = rng.normal(size=(tau + 1, 2))
    p = np.zeros((tau + 1, 2))
    p[0] = v0
    for k in range(tau):
        p[k + 1] = A @ p[k] + drives[k]

    model = augment_ode(A, np.array([[1.0, 0.0]]), np.eye(2),
                        np.array([[1.0]]), tau=tau)
    f = np.zeros((tau + 1, 2))
    f[0] = v0
    w = np.zeros((tau + 1, 4))
    w[:, 2:] = drives
    traj = simulate(model, f, np.zeros((tau + 1, 1)), w=w)
    assert np.max(np.abs(traj.states[:, :2] - p)) <= 1e-12


def test_augment_ode_time_varying_and_tau_inference():
    A = [np.eye(2) * (k + 1) for k in range(3)]
    H = [np.array([[1.0, float(k)]]) for k in range(4)]
    S = [np.eye(2)] * 4
    R = [np.array([[1.0]])] * 4
    model = augment_ode(A, H, S, R)
    assert model.tau == 3
    assert np.array_equal(model.C[2][:, :2], 3 * np.eye(2))


def test_augment_ode_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        augment_ode(
            np.eye(2),
            np.array([[1.0, 0.0, 0.0]]),  # output map for a 3-state plant
            np.eye(2),
            np.array([[1.0]]),
            tau=2,
        )


def test_truncate():
    rng = np.random.default_rng(11)
    model = random_model(rng, n=2, m=2, p=1, tau=6)
    short = truncate(model, 2)
    assert short.tau == 2
    assert np.array_equal(short.F[2], model.F[2])
    with pytest.raises(DimensionMismatch):
        truncate(model, 7)
