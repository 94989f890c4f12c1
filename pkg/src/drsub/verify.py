"""Numeric property suites for DR-submodular objectives and the oracles.

Each suite returns a :class:`SuiteResult` with the worst observed violation
(positive means the property failed by that much) and a witness.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .algorithms import frank_wolfe, product_bound_slack
from .core import join, meet
from .instances import gen_quadratic_uniform, gen_revenue_graph, gen_softmax, revenue_objective, revenue_polytopes
from .lp import OPTIMAL, lp_solve
from .objectives import QuadraticObjective, ShiftedObjective, dr_diagnostic, fd_gradient
from .oracles import lmo, project, project_dykstra, project_simplex_iterative, project_simplex_sorted
from .polytope import Polytope, contains_many, scaled_simplex

FAMILIES = ("quadratic", "softmax", "revenue")


@dataclass
class SuiteResult:
    name: str
    worst: float
    tol: float
    trials: int
    seed: int
    witness: object = None

    @property
    def passed(self):
        return self.worst <= self.tol

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} worst={self.worst:.3e} tol={self.tol:.1e} trials={self.trials} seed={self.seed}"


def family_instance(family, n=5, seed=0):
    """An objective of the given family that is DR-submodular and nonnegative on [0, 1]^n."""
    if family == "quadratic":
        F, _ = gen_quadratic_uniform(n, n, seed)
        u = np.ones(n)
        lb = 0.5 * u @ F.H @ u + np.minimum(F.h, 0.0) @ u + F.c
        return F.with_offset(F.c - min(lb, 0.0))
    if family == "softmax":
        F, _ = gen_softmax(n, n, seed, eig_range=(0.2, 1.5))
        return ShiftedObjective(F, -F.box_lower_bound())
    if family == "revenue":
        # (1 - p)^x >= 1/2 on [0, 1] keeps the Hessian diagonal nonpositive
        g = gen_revenue_graph(n, seed, avg_degree=min(3.0, n - 1))
        return revenue_objective(g, p=0.3)
    raise ValueError(f"unknown family {family!r}")


def lattice_identity(trials, seed, n=6):
    """``x v y - z* == (x + z) v y - (z v z*)`` with ``z* = (x v y) - x``."""
    rng = np.random.default_rng(seed)
    worst, wit = 0.0, None
    for _ in range(trials):
        x, y, z = rng.uniform(0, 1, (3, n)) * rng.uniform(0, 3)
        zs = join(x, y) - x
        lhs = join(x, y) - zs
        rhs = join(x + z, y) - join(z, zs)
        err = float(np.max(np.abs(lhs - rhs)))
        if err > worst:
            worst, wit = err, (x, y, z)
    return SuiteResult("lattice_identity", worst, 1e-12, trials, seed, wit)


def gradient_lattice_bound(F, trials, seed, tol=1e-7, name=None):
    """``<grad F(x), y - x> >= F(x v y) + F(x ^ y) - 2 F(x)`` on [0, 1]^n."""
    rng = np.random.default_rng(seed)
    worst, wit = -np.inf, None
    for _ in range(trials):
        x, y = rng.uniform(0, 1, (2, F.dim))
        gap = F.value(join(x, y)) + F.value(meet(x, y)) - 2 * F.value(x) - F.gradient(x) @ (y - x)
        if gap > worst:
            worst, wit = float(gap), (x, y)
    return SuiteResult(name or "gradient_lattice_bound", worst, tol, trials, seed, wit)


def four_term_bound(F, trials, seed, tol=1e-7, name=None):
    """``F(x v y) + F(x ^ y) + F(z* v z) + F(z* ^ z) >= F(y)``, with x + z kept in the box."""
    rng = np.random.default_rng(seed)
    worst, wit = -np.inf, None
    for _ in range(trials):
        x = rng.uniform(0, 1, F.dim)
        z = rng.uniform(0, 1, F.dim) * (1 - x)
        y = rng.uniform(0, 1, F.dim)
        zs = join(x, y) - x
        lhs = F.value(join(x, y)) + F.value(meet(x, y)) + F.value(join(zs, z)) + F.value(meet(zs, z))
        gap = F.value(y) - lhs
        if gap > worst:
            worst, wit = float(gap), (x, y, z)
    return SuiteResult(name or "four_term_bound", worst, tol, trials, seed, wit)


def join_lower_bound(F, trials, seed, tol=1e-7, name=None):
    """``F(x v y) >= (1 - ||x||_inf) F(y)`` for nonnegative F."""
    rng = np.random.default_rng(seed)
    worst, wit = -np.inf, None
    for _ in range(trials):
        x = rng.uniform(0, 1, F.dim) * rng.uniform(0, 1)
        y = rng.uniform(0, 1, F.dim)
        gap = (1 - np.max(x)) * F.value(y) - F.value(join(x, y))
        if gap > worst:
            worst, wit = float(gap), (x, y)
    return SuiteResult(name or "join_lower_bound", worst, tol, trials, seed, wit)


def gradient_check(F, trials, seed, tol=1e-4, h=1e-5, name=None):
    """Relative error of the analytic gradient against central differences at interior points."""
    rng = np.random.default_rng(seed)
    worst, wit = 0.0, None
    for _ in range(trials):
        x = rng.uniform(0.05, 0.95, F.dim)
        g = F.gradient(x)
        fd = fd_gradient(F, x, h)
        err = float(np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12))
        if err > worst:
            worst, wit = err, x
    return SuiteResult(name or "gradient", worst, tol, trials, seed, wit)


def dr_suite(F, trials, seed, tol=1e-7, u=None, name=None):
    u = np.ones(F.dim) if u is None else u
    rep = dr_diagnostic(F, u, trials, np.random.default_rng(seed))
    return SuiteResult(name or "dr", rep.max_violation, tol, trials, seed, rep.witness)


def nonnegativity(F, P, samples, seed, tol=1e-7, name=None):
    """Worst negative value of F over random points of a down-closed P."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, (samples, P.n)) * P.u
    load = (X @ P.A.T / P.b).max(axis=1) if P.m else np.zeros(samples)
    X = X * np.minimum(1.0, 1.0 / np.maximum(load, 1e-300))[:, None]
    vals = F.values(X)
    i = int(np.argmin(vals))
    return SuiteResult(name or "nonnegativity", float(max(-vals[i], 0.0)), tol, samples, seed, X[i])


def random_feasible(P, rng, k):
    """Random points of P as convex combinations of LMO vertices."""
    V = np.array([lmo(P, rng.standard_normal(P.n)) for _ in range(max(k, 2 * P.n))])
    W = rng.dirichlet(np.ones(V.shape[0]), size=k)
    return W @ V


def pythagorean(P, trials, seed, tol=1e-7, name=None):
    """``||proj(x) - z|| <= ||x - z||`` for random x and feasible z."""
    rng = np.random.default_rng(seed)
    Z = random_feasible(P, rng, trials)
    worst, wit = -np.inf, None
    for z in Z:
        x = rng.normal(0.5, 1.0, P.n) * P.u
        gap = np.linalg.norm(project(P, x) - z) - np.linalg.norm(x - z)
        if gap > worst:
            worst, wit = float(gap), (x, z)
    return SuiteResult(name or "pythagorean", worst, tol, trials, seed, wit)


def projection_agreement(n, trials, seed, tol=1e-8):
    """Sorted, iterative and Dykstra projections onto the unit simplex agree."""
    rng = np.random.default_rng(seed)
    P = scaled_simplex(n)
    worst, wit = 0.0, None
    for _ in range(trials):
        x = rng.normal(0.0, rng.choice([0.1, 1.0, 3.0]), n) + rng.choice([0.0, 0.5])
        a = project_simplex_sorted(x)
        err = max(np.max(np.abs(a - project_simplex_iterative(x))),
                  np.max(np.abs(a - project_dykstra(P, x))))
        if err > worst:
            worst, wit = float(err), x
    return SuiteResult(f"projection_agreement[n={n}]", worst, tol, trials, seed, wit)


def enumerate_lp(A, b, lower, upper, c):
    """Max of ``c.x`` over all basic feasible points, by brute force over active sets."""
    A, b, c = np.atleast_2d(np.asarray(A, float)), np.asarray(b, float), np.asarray(c, float)
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    n = c.size
    G = np.vstack([A, -np.eye(n), np.eye(n)])
    h = np.concatenate([b, -lower, upper])
    best = -np.inf
    subsets = np.array(list(itertools.combinations(range(G.shape[0]), n)))
    M = G[subsets]
    rhs = h[subsets]
    ok = np.abs(np.linalg.det(M)) > 1e-10
    if not np.any(ok):
        return best
    X = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(X @ G.T <= h + 1e-9, axis=1)
    if np.any(feas):
        best = float(np.max(X[feas] @ c))
    return best


def random_lp(rng):
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    A = rng.normal(size=(m, n))
    b = rng.uniform(-0.5, 2.0, size=m)
    lower = np.zeros(n)
    upper = rng.uniform(0.5, 2.0, size=n)
    c = rng.normal(size=n)
    return A, b, lower, upper, c


def lp_vs_enumeration(trials, seed, tol=1e-8):
    rng = np.random.default_rng(seed)
    worst, wit, solved = 0.0, None, 0
    for _ in range(trials):
        A, b, lo, up, c = random_lp(rng)
        sol = lp_solve(A, b, lo, up, c)
        ref = enumerate_lp(A, b, lo, up, c)
        if sol.status != OPTIMAL:
            err = 0.0 if ref == -np.inf else np.inf
        else:
            solved += 1
            err = abs(sol.objective - ref)
        if err > worst:
            worst, wit = err, (A, b, lo, up, c)
    return SuiteResult("lp_vs_enumeration", worst, tol, trials, seed, wit)


def product_bound_runs(trials, seed, n=4, T=100):
    """Product bound on live Frank-Wolfe runs over normalised instances."""
    from .instances import normalized

    worst, wit = -np.inf, None
    for k in range(trials):
        F, P = normalized(*gen_quadratic_uniform(n, n, seed + k))
        traj = frank_wolfe(F, P, T)
        viol = -product_bound_slack(traj)
        if viol > worst:
            worst, wit = viol, seed + k
    return SuiteResult("product_bound", worst, 1e-9, trials, seed, wit)


def run_all(trials=1000, seed=0, n=5, families=FAMILIES, fw_runs=5, include=None):
    """Run every suite; returns a list of SuiteResult."""
    if trials < 1:
        raise ValueError("trials must be >= 1 (no evidence otherwise)")
    out = [lattice_identity(trials, seed)]
    for fam in families:
        F = family_instance(fam, n, seed)
        out.append(gradient_lattice_bound(F, trials, seed, name=f"gradient_lattice_bound[{fam}]"))
        out.append(four_term_bound(F, trials, seed, name=f"four_term_bound[{fam}]"))
        out.append(join_lower_bound(F, trials, seed, name=f"join_lower_bound[{fam}]"))
        out.append(gradient_check(F, min(trials, 100), seed, name=f"gradient[{fam}]"))
        out.append(dr_suite(F, trials, seed, name=f"dr[{fam}]"))
    for extra in include or ():
        out.append(dr_suite(extra, trials, seed, name="dr[injected]"))
    out.append(product_bound_runs(fw_runs, seed))
    general, down_closed = revenue_polytopes(n)
    _, Pq = gen_quadratic_uniform(n, n, seed)
    for label, P in (("simplex", down_closed), ("general", general), ("quadratic", Pq)):
        out.append(pythagorean(P, min(trials, 300), seed, name=f"pythagorean[{label}]"))
    out.append(projection_agreement(10, trials, seed))
    out.append(lp_vs_enumeration(min(trials, 200), seed))
    return out


def positive_hessian_quadratic(n=4, seed=0):
    """A quadratic with one positive off-diagonal Hessian entry (not DR-submodular)."""
    rng = np.random.default_rng(seed)
    H = -rng.uniform(0, 1, (n, n))
    H = np.triu(H) + np.triu(H, 1).T
    H[0, 1] = H[1, 0] = 2.0
    return QuadraticObjective(H, np.ones(n), 0.0, check=False)
