import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drsub.instances import gen_quadratic_exponential, gen_quadratic_uniform, revenue_polytopes
from drsub.oracles import (
    ProjectionError,
    lmo,
    project,
    project_dykstra,
    project_simplex_iterative,
    project_simplex_sorted,
)
from drsub.polytope import Polytope, box, contains, scaled_simplex


def exact_projection(P, x0):
    """Reference projection by enumerating active sets of all constraints."""
    n = P.n
    G = np.vstack([P.A, -np.eye(n), np.eye(n)])
    h = np.concatenate([P.b, np.zeros(n), P.u])
    best = None
    for k in range(n + 1):
        for S in itertools.combinations(range(G.shape[0]), k):
            S = list(S)
            Gs = G[S]
            if k and np.linalg.matrix_rank(Gs) < k:
                continue
            if k:
                lam = np.linalg.solve(Gs @ Gs.T, Gs @ x0 - h[S])
                if np.any(lam < -1e-12):
                    continue
                x = x0 - Gs.T @ lam
            else:
                x = x0
            if np.all(G @ x <= h + 1e-10):
                d = np.linalg.norm(x - x0)
                if best is None or d < best[0] - 1e-14:
                    best = (d, x)
    return best[1]


def pgd_projection(P, x0, iters=20000):
    """Independent reference: projected gradient on the dual of the projection QP."""
    A, b, u = P.A, P.b, P.u
    lam = np.zeros(P.m)
    L = np.linalg.norm(A, 2) ** 2 + 1e-12
    for _ in range(iters):
        x = np.clip(x0 - A.T @ lam, 0.0, u)
        lam = np.maximum(lam + (A @ x - b) / L, 0.0)
    return np.clip(x0 - A.T @ lam, 0.0, u)


def test_lmo_examples():
    assert np.allclose(lmo(scaled_simplex(2), [0.2, 0.9]), [0.0, 1.0])
    assert np.allclose(lmo(box([1, 1, 1]), [1.0, -2.0, 0.0]), [1.0, 0.0, 0.0])
    P = scaled_simplex(3)
    v = lmo(P, np.zeros(3))
    assert contains(P, v, 1e-12)
    assert np.array_equal(v, lmo(P, np.zeros(3)))


def test_lmo_certificate():
    rng = np.random.default_rng(0)
    _, P = gen_quadratic_uniform(5, 4, 0)
    for _ in range(30):
        c = rng.normal(size=5)
        v = lmo(P, c)
        assert contains(P, v, 1e-9)
        X = rng.uniform(0, 1, (2000, 5)) * P.u
        X = X[np.all(X @ P.A.T <= P.b, axis=1)]
        assert np.all(X @ c <= c @ v + 1e-9)


def test_projection_examples():
    P = scaled_simplex(2)
    assert np.allclose(project(P, [0.8, 0.6]), [0.6, 0.4], atol=1e-12)
    Q = Polytope([[1.0, 0.0]], [0.5], [1.0, 1.0])
    assert np.allclose(project(Q, [0.9, 0.2]), [0.5, 0.2], atol=1e-10)
    assert np.array_equal(project(P, [-1.0, -3.0]), [0.0, 0.0])
    assert np.allclose(project(scaled_simplex(1), [2.5]), [1.0])
    assert np.allclose(project_dykstra(scaled_simplex(1), [2.5]), [1.0])


def test_projection_of_feasible_point_is_identity():
    P = scaled_simplex(3)
    x = np.array([0.2, 0.3, 0.1])
    assert np.array_equal(project(P, x), x)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1), st.floats(0.1, 5.0))
def test_simplex_projections_agree(n, seed, radius):
    x = np.random.default_rng(seed).normal(scale=2.0, size=n)
    a = project_simplex_sorted(x, radius)
    b = project_simplex_iterative(x, radius)
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(x)))
    assert np.all(a >= 0) and a.sum() <= radius + 1e-12


def test_simplex_projection_idempotent():
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = rng.normal(size=7)
        y = project_simplex_sorted(x)
        assert np.allclose(project_simplex_sorted(y), y, atol=1e-15)


def test_simplex_radius_checked():
    with pytest.raises(ValueError):
        project_simplex_sorted([1.0], radius=0.0)
    with pytest.raises(ValueError):
        project_simplex_iterative([1.0], radius=-1.0)


def test_dykstra_matches_active_set_enumeration():
    rng = np.random.default_rng(11)
    polys = [revenue_polytopes(3)[0], gen_quadratic_uniform(3, 2, 1)[1], gen_quadratic_exponential(3, 2, 2)[1]]
    for P in polys:
        for _ in range(60):
            x0 = rng.normal(scale=1.5, size=3) + 0.5
            ref = exact_projection(P, x0)
            assert np.max(np.abs(project_dykstra(P, x0) - ref)) <= 1e-8


def test_dykstra_matches_dual_gradient_reference():
    rng = np.random.default_rng(5)
    for n in (2, 8, 20):
        _, P = gen_quadratic_uniform(n, n, n)
        for _ in range(3):
            x0 = rng.normal(size=n) + 0.5
            assert np.max(np.abs(project_dykstra(P, x0) - pgd_projection(P, x0))) <= 1e-6


def test_projection_pythagorean():
    rng = np.random.default_rng(4)
    P = revenue_polytopes(4)[0]
    for _ in range(50):
        x = rng.normal(size=4)
        px = project(P, x)
        w = rng.dirichlet(np.ones(4)) * rng.uniform(0.25, 1.0)
        assert (x - px) @ (w - px) <= 1e-7


def test_dykstra_idempotent():
    _, P = gen_quadratic_uniform(5, 5, 3)
    x = project_dykstra(P, np.full(5, 2.0))
    assert np.max(np.abs(project_dykstra(P, x) - x)) <= 1e-9


def test_dykstra_cap_raises():
    P = revenue_polytopes(5)[0]
    with pytest.raises(ProjectionError) as info:
        project_dykstra(P, np.full(5, 3.0), max_iter=1)
    assert info.value.residual >= 0
