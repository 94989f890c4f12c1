"""Linear maximization and Euclidean projection oracles over a Polytope."""

import math

import numpy as np

from .core import as_point
from .lp import OPTIMAL, LpError, lp_solve
from .polytope import contains, simplex_radius


class ProjectionError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def lmo(P, c):
    """Return a vertex of `P` maximising ``<c, v>``."""
    c = as_point(c, P.n)
    sol = lp_solve(P.A, P.b, np.zeros(P.n), P.u, c, sense="max")
    if sol.status != OPTIMAL:
        raise LpError(f"linear maximization oracle failed with status {sol.status}")
    return sol.x


def project_simplex_sorted(x, radius=1.0):
    """Projection onto ``{y >= 0, sum(y) <= radius}`` by sorting, O(n log n).

    With entries sorted in decreasing order the projection has the form
    ``(x_1 - d_j, ..., x_j - d_j, 0, ..., 0)`` where
    ``d_j = (x_1 + ... + x_j - radius) / j`` and j is the largest index with
    ``x_j - d_j > 0``.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    x = as_point(x)
    clamped = np.maximum(x, 0.0)
    if clamped.sum() <= radius:
        return clamped
    xs = np.sort(x)[::-1]
    cs = np.cumsum(xs)
    j = np.arange(1, x.size + 1)
    delta = (cs - radius) / j
    k = np.flatnonzero(xs - delta > 0)[-1]
    return np.maximum(x - delta[k], 0.0)


def project_simplex_iterative(x, radius=1.0):
    """Projection onto ``{y >= 0, sum(y) <= radius}`` by repeated clamp-and-shift.

    Each pass zeroes the negative entries, then subtracts from every positive
    entry the common shift that brings their sum down to `radius`. The
    support shrinks every pass that produces a negative entry, so at most
    n + 1 passes are needed.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    y = as_point(x).copy()
    for _ in range(y.size + 1):
        np.maximum(y, 0.0, out=y)
        s = y.sum()
        if s <= radius:
            return y
        nz = y > 0
        y[nz] -= (s - radius) / np.count_nonzero(nz)
        if y.min() >= 0:
            return y
    raise ProjectionError("iterative simplex projection did not terminate", float(np.abs(y.sum() - radius)))


def dykstra_cap(n, m, tol=1e-10):
    return 10 * n * (m + 1) * math.ceil(math.log10(1.0 / tol))


def _kkt_point(x0, Ar, br, u, hs, lo, hi):
    n = x0.size
    G = np.vstack([Ar[hs], -np.eye(n)[lo], np.eye(n)[hi]])
    h = np.concatenate([br[hs], np.zeros(lo.size), u[hi]])
    if G.shape[0] == 0:
        return None
    lam = np.linalg.lstsq(G @ G.T, G @ x0 - h, rcond=None)[0]
    if np.any(lam < -1e-12):
        return None
    y = x0 - G.T @ lam
    if np.any(Ar @ y > br + 1e-12) or np.any(y < -1e-12) or np.any(y > u + 1e-12):
        return None
    if np.max(np.abs(G @ y - h)) > 1e-10:
        return None
    return np.clip(y, 0.0, u)


def _active_set_finish(x0, x, incs, Ar, br, u):
    """Exact projection onto the constraints that look active in the Dykstra state.

    Two guesses are tried: constraints carrying a nonzero increment, and
    constraints nearly tight at x. Returns None unless a KKT point is found.
    """
    hs = np.flatnonzero(np.any(incs[:-1] != 0, axis=1))
    lo = np.flatnonzero(incs[-1] < 0)
    hi = np.flatnonzero(incs[-1] > 0)
    y = _kkt_point(x0, Ar, br, u, hs, lo, hi)
    if y is not None:
        return y
    eps = 1e-7
    tight = np.flatnonzero(Ar @ x >= br - eps * (1.0 + np.abs(br)))
    lo = np.flatnonzero(x <= eps * u)
    hi = np.flatnonzero(x >= u * (1 - eps))
    return _kkt_point(x0, Ar, br, u, tight, lo, hi)


def project_dykstra(P, x, tol=1e-10, max_iter=None):
    """Dykstra's alternating projections onto the halfspaces of `P` and its box.

    Stops when a full sweep moves the iterate by less than `tol`, or when the
    constraints Dykstra has identified as active yield an exact KKT point.
    """
    x0 = as_point(x, P.n)
    x = x0.copy()
    A, b, u = P.A, P.b, P.u
    if P.m == 0:
        return np.clip(x, 0.0, u)
    if max_iter is None:
        max_iter = dykstra_cap(P.n, P.m, tol)
    sq = np.einsum("ij,ij->i", A, A)
    rows = [i for i in range(P.m) if sq[i] > 0]
    Ar, br = A[rows], b[rows]
    incs = np.zeros((len(rows) + 1, P.n))
    # The iterate can sit still for many sweeps while the increments keep
    # changing, so the settle test looks at the whole state.
    stages = np.empty((len(rows) + 1, P.n))
    prev = np.full_like(stages, np.inf)
    prev_incs = np.full_like(incs, np.inf)
    for sweep in range(max_iter):
        for k, i in enumerate(rows):
            z = x + incs[k]
            viol = A[i] @ z - b[i]
            y = z - (viol / sq[i]) * A[i] if viol > 0 else z
            incs[k] = z - y
            x = stages[k] = y
        z = x + incs[-1]
        y = np.clip(z, 0.0, u)
        incs[-1] = z - y
        x = stages[-1] = y
        if sweep % 5 == 4:
            done = _active_set_finish(x0, x, incs, Ar, br, u)
            if done is not None:
                return done
        moved = max(
            np.max(np.linalg.norm(stages - prev, axis=1)),
            np.max(np.linalg.norm(incs - prev_incs, axis=1)),
        )
        if moved < tol:
            return x
        prev, stages = stages, prev
        prev_incs[:] = incs
    residual = float(np.max(np.maximum(A @ x - b, 0.0), initial=0.0))
    raise ProjectionError(f"Dykstra projection hit iteration cap {max_iter}", residual)


def project(P, x):
    """Euclidean projection of `x` onto `P`."""
    x = as_point(x, P.n)
    if contains(P, x):
        return x.copy()
    r = simplex_radius(P)
    if r is not None:
        return project_simplex_sorted(x, r)
    return project_dykstra(P, x)
