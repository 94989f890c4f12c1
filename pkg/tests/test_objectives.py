import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drsub.core import DimensionError
from drsub.instances import gen_quadratic_uniform, gen_revenue_graph, gen_softmax, revenue_objective
from drsub.objectives import (
    QuadraticObjective,
    RevenueObjective,
    ScaledObjective,
    ShiftedObjective,
    SingularKernelError,
    SoftmaxObjective,
    ZeroObjective,
    dr_diagnostic,
    fd_gradient,
    stochastic_gradient,
)
from drsub.verify import positive_hessian_quadratic


def test_quadratic_example_values():
    F = QuadraticObjective(-np.eye(2), np.zeros(2))
    assert F.value([1.0, 1.0]) == -1.0
    assert F.value([0.0, 0.0]) == 0.0
    assert np.array_equal(F.gradient([0.5, 0.25]), [-0.5, -0.25])
    assert F.smoothness == 1.0


def test_quadratic_rejects_bad_hessian():
    with pytest.raises(ValueError):
        QuadraticObjective([[0.0, 1.0], [1.0, 0.0]], [0, 0])
    with pytest.raises(ValueError):
        QuadraticObjective([[0.0, -1.0], [-2.0, 0.0]], [0, 0])
    with pytest.raises(DimensionError):
        QuadraticObjective(-np.eye(2), [0, 0, 0])
    with pytest.raises(DimensionError):
        QuadraticObjective(-np.eye(2), [0, 0]).value([1.0])


def test_softmax_endpoints():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(4, 4))
    L = B @ B.T + 0.1 * np.eye(4)
    F = SoftmaxObjective(L)
    assert F.value(np.zeros(4)) == pytest.approx(0.0, abs=1e-14)
    assert F.value(np.ones(4)) == pytest.approx(np.linalg.slogdet(L)[1], abs=1e-12)


def test_softmax_singular():
    F = SoftmaxObjective(np.zeros((2, 2)))
    with pytest.raises(SingularKernelError):
        F.value([1.0, 0.0])
    with pytest.raises(SingularKernelError):
        F.gradient([1.0, 1.0])
    with pytest.raises(SingularKernelError):
        F.values([[0.2, 0.2], [1.0, 1.0]])


def test_softmax_rejects_indefinite():
    with pytest.raises(ValueError):
        SoftmaxObjective([[1.0, 2.0], [2.0, 1.0]])


def test_revenue_single_edge():
    F = RevenueObjective(2, [[0, 1, 1.0]], 0.5)
    assert F.value([1.0, 0.0]) == pytest.approx(0.5, abs=1e-15)
    assert F.value([0.0, 0.0]) == 0.0
    assert F.value([1.0, 1.0]) == pytest.approx(0.5, abs=1e-15)


def test_revenue_validation():
    with pytest.raises(ValueError):
        RevenueObjective(2, [[0, 0, 1.0]], 0.5)
    with pytest.raises(ValueError):
        RevenueObjective(2, [[0, 1, 1.0]], 1.0)
    with pytest.raises(ValueError):
        RevenueObjective(2, [[0, 2, 1.0]], 0.5)
    with pytest.raises(ValueError):
        RevenueObjective(2, [[0, 1, 1.0]], 0.5).value([-0.1, 0.0])


def _objectives():
    Fq, _ = gen_quadratic_uniform(5, 3, 0)
    Fs, _ = gen_softmax(5, 3, 0, eig_range=(0.2, 1.5))
    Fr = revenue_objective(gen_revenue_graph(5, 0, avg_degree=3.0), p=0.3)
    return [Fq, Fs, Fr]


@pytest.mark.parametrize("k", range(3))
def test_gradient_matches_finite_differences(k):
    F = _objectives()[k]
    rng = np.random.default_rng(k)
    for _ in range(20):
        x = rng.uniform(0.05, 0.95, 5)
        g, fd = F.gradient(x), fd_gradient(F, x)
        assert np.max(np.abs(g - fd)) <= 1e-4 * max(1.0, np.max(np.abs(g)))


@pytest.mark.parametrize("k", range(3))
def test_batched_values_match(k):
    F = _objectives()[k]
    X = np.random.default_rng(9).uniform(0, 1, (30, 5))
    assert np.allclose(F.values(X), [F.value(x) for x in X], rtol=1e-12, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_quadratic_is_dr(seed):
    F, P = gen_quadratic_uniform(4, 3, seed % 1000)
    rep = dr_diagnostic(F, P.u, 50, np.random.default_rng(seed))
    assert rep.max_violation <= 1e-9


def test_revenue_triangle_is_dr():
    F = RevenueObjective(3, [[0, 1, 1.0], [1, 2, 0.5], [0, 2, 0.8]], 0.3)
    rep = dr_diagnostic(F, np.ones(3), 2000, np.random.default_rng(0))
    assert rep.passed and rep.max_violation <= 1e-9


def test_smoothness_estimate_brackets_true_constant():
    F, P = gen_quadratic_uniform(4, 3, 1)
    rep = dr_diagnostic(F, P.u, 2000, np.random.default_rng(0))
    assert rep.beta_hat <= F.smoothness + 1e-12
    assert rep.beta_hat >= 0.5 * F.smoothness


def test_injected_violation_detected():
    F = positive_hessian_quadratic()
    rep = dr_diagnostic(F, np.ones(F.dim), 200, np.random.default_rng(0))
    assert not rep.passed
    x, y = rep.witness
    assert np.all(y <= x)
    assert np.max(F.gradient(x) - F.gradient(y)) == pytest.approx(rep.max_violation)


def test_dr_diagnostic_trials_checked():
    with pytest.raises(ValueError):
        dr_diagnostic(ZeroObjective(2), np.ones(2), 0, np.random.default_rng(0))


def test_stochastic_gradient_unbiased_and_seeded():
    F = _objectives()[0]
    x = np.full(5, 0.3)
    g = np.array([stochastic_gradient(F, x, np.random.default_rng(s), 0.5) for s in range(4000)])
    assert np.max(np.abs(g.mean(axis=0) - F.gradient(x))) <= 4 * 0.5 / np.sqrt(4000)
    a = stochastic_gradient(F, x, np.random.default_rng(3), 0.5)
    b = stochastic_gradient(F, x, np.random.default_rng(3), 0.5)
    assert np.array_equal(a, b)
    assert np.array_equal(stochastic_gradient(F, x, None, 0.0), F.gradient(x))
    with pytest.raises(ValueError):
        stochastic_gradient(F, x, np.random.default_rng(0), -1.0)


def test_scaled_and_shifted():
    F = QuadraticObjective(-np.eye(2), np.array([1.0, 2.0]))
    s = np.array([2.0, 0.5])
    G = ScaledObjective(F, s)
    y = np.array([0.3, 0.7])
    assert G.value(y) == pytest.approx(F.value(s * y))
    assert np.allclose(G.gradient(y), fd_gradient(G, y), atol=1e-8)
    assert np.allclose(G.values([y]), [G.value(y)])
    with pytest.raises(ValueError):
        ScaledObjective(F, [1.0, 0.0])
    S = ShiftedObjective(F, 3.0)
    assert S.value(y) == F.value(y) + 3.0
    assert np.array_equal(S.gradient(y), F.gradient(y))
