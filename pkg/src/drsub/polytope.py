"""Halfspace-plus-box polytopes ``{x : A x <= b, 0 <= x <= u}``."""

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, as_point
from .lp import OPTIMAL, lp_solve


class InfeasiblePolytopeError(ValueError):
    pass


class Polytope:
    """Immutable convex domain ``{x : A x <= b, 0 <= x <= u}``.

    Lower-bound constraints such as ``sum(x) >= 0.25`` are encoded as
    negated rows. Nonemptiness is certified by one LP solve at
    construction.
    """

    def __init__(self, A, b, u, check=True):
        u = np.asarray(u, dtype=np.float64).ravel().copy()
        n = u.shape[0]
        A = np.asarray(A, dtype=np.float64).reshape(-1, n).copy()
        b = np.asarray(b, dtype=np.float64).ravel().copy()
        if b.shape[0] != A.shape[0]:
            raise DimensionError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        if n < 1:
            raise ValueError("polytope needs at least one dimension")
        if not np.all(np.isfinite(u)) or np.any(u <= 0):
            raise ValueError("box upper bounds must be finite and strictly positive")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("A and b must be finite")
        for arr in (A, b, u):
            arr.setflags(write=False)
        self.A, self.b, self.u = A, b, u
        if check:
            sol = lp_solve(A, b, np.zeros(n), u, np.zeros(n))
            if sol.status != OPTIMAL:
                raise InfeasiblePolytopeError("polytope is empty")

    @property
    def n(self):
        return self.u.shape[0]

    @property
    def m(self):
        return self.A.shape[0]

    def __repr__(self):
        return f"Polytope(n={self.n}, m={self.m})"

    def __eq__(self, other):
        if not isinstance(other, Polytope):
            return NotImplemented
        return (
            self.A.shape == other.A.shape
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.u, other.u)
        )

    __hash__ = None

    def contains(self, x, tol=0.0):
        return contains(self, x, tol)


@dataclass(frozen=True)
class PolytopeReport:
    diameter_bound: float
    is_down_closed_sufficient: bool
    contains_origin: bool
    min_inf_norm_point: np.ndarray


def contains(P, x, tol=0.0):
    """True iff ``A x <= b + tol`` and ``-tol <= x <= u + tol``."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    x = as_point(x, P.n)
    if np.any(x < -tol) or np.any(x > P.u + tol):
        return False
    return bool(np.all(P.A @ x <= P.b + tol))


def contains_many(P, X, tol=0.0):
    """Vectorised membership for the rows of `X`."""
    X = np.asarray(X, dtype=np.float64)
    ok = np.all((X >= -tol) & (X <= P.u + tol), axis=1)
    if P.m:
        ok &= np.all(X @ P.A.T <= P.b + tol, axis=1)
    return ok


def tight_upper_bounds(A, b):
    """Tightest box implied by a strictly positive system: ``u_j = min_i b_i / A_ij``."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64).ravel()
    if b.shape[0] != A.shape[0]:
        raise DimensionError("A and b row counts differ")
    if np.any(A <= 0):
        raise ValueError("tight_upper_bounds needs strictly positive A")
    if np.any(b <= 0):
        raise ValueError("tight_upper_bounds needs strictly positive b")
    return np.min(b[:, None] / A, axis=0)


def diameter_bound(P):
    """``||u||_2``, the box diagonal; an upper bound on the polytope diameter."""
    return float(np.linalg.norm(P.u))


def down_closed_sufficient(P):
    """Syntactic test: nonnegative ``A`` and ``b`` (with the 0 lower box) imply down-closed."""
    return bool(np.all(P.A >= 0) and np.all(P.b >= 0))


def min_inf_norm_point(P):
    """A feasible point minimising ``max_i x_i``.

    Solves ``min t  s.t.  A x <= b, x_i - t <= 0, 0 <= x <= u, 0 <= t <= max(u)``.
    """
    n, m = P.n, P.m
    A = np.zeros((m + n, n + 1))
    A[:m, :n] = P.A
    A[m:, :n] = np.eye(n)
    A[m:, n] = -1.0
    b = np.concatenate([P.b, np.zeros(n)])
    lower = np.zeros(n + 1)
    upper = np.concatenate([P.u, [P.u.max()]])
    c = np.zeros(n + 1)
    c[n] = 1.0
    sol = lp_solve(A, b, lower, upper, c, sense="min")
    if sol.status != OPTIMAL:
        raise InfeasiblePolytopeError("polytope is empty")
    return sol.x[:n]


def report(P):
    x0 = min_inf_norm_point(P)
    return PolytopeReport(
        diameter_bound=diameter_bound(P),
        is_down_closed_sufficient=down_closed_sufficient(P),
        contains_origin=contains(P, np.zeros(P.n), 1e-12),
        min_inf_norm_point=x0,
    )


def box(u):
    """Box-only polytope ``0 <= x <= u``."""
    u = np.asarray(u, dtype=np.float64).ravel()
    return Polytope(np.zeros((0, u.shape[0])), np.zeros(0), u)


def scaled_simplex(n, radius=1.0, u=None):
    """``{x >= 0 : sum(x) <= radius}`` intersected with the box (default ``u = radius``)."""
    u = np.full(n, float(radius)) if u is None else u
    return Polytope(np.ones((1, n)), [float(radius)], u)


def simplex_radius(P):
    """Return r if `P` is ``{x >= 0, sum x <= r}`` with a redundant box, else None."""
    if P.m != 1:
        return None
    row = P.A[0]
    a = row[0]
    if a <= 0 or not np.all(row == a) or P.b[0] <= 0:
        return None
    r = P.b[0] / a
    if np.all(P.u >= r):
        return float(r)
    return None
