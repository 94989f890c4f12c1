"""Dense bounded-variable simplex.

Solves ``max (or min) c.x  s.t.  A x <= b,  lower <= x <= upper`` with a
two-phase tableau method. Upper bounds are handled implicitly by bound
flipping (substituting ``y = w - y'``), so nonbasic variables always sit at
zero in the working coordinates. Pivoting uses Bland's rule with lowest-index
tie-breaking, which makes results deterministic and rules out cycling.

The solver is small and allocation-per-call; it has no global state.
"""

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-10
_COST_TOL = 1e-10
_FEAS_TOL = 1e-8


class LpError(RuntimeError):
    """Raised when the simplex loop hits its iteration guard."""


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective: float
    status: str
    iterations: int = 0


class _Tableau:
    # Row 0 holds -reduced costs and the current objective value; rows 1..m
    # hold B^{-1}[A | I | art] and the basic values. Last column is the rhs.

    def __init__(self, T, basis, ub):
        self.T = T
        self.basis = basis
        self.ub = ub
        self.flipped = np.zeros(T.shape[1] - 1, dtype=bool)
        self.iterations = 0

    @property
    def ncols(self):
        return self.T.shape[1] - 1

    def flip(self, j):
        T = self.T
        T[:, -1] -= T[:, j] * self.ub[j]
        T[:, j] *= -1.0
        self.flipped[j] = not self.flipped[j]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[r, j] = 1.0
        self.basis[r - 1] = j

    def set_objective(self, cost, const=0.0):
        # cost is in working (possibly flipped) coordinates
        T = self.T
        cb = cost[self.basis]
        body = T[1:, :-1]
        T[0, :-1] = -(cost - cb @ body)
        T[0, self.basis] = 0.0
        T[0, -1] = const + cb @ T[1:, -1]

    def run(self, allowed, max_iter):
        """Iterate to optimality over columns flagged in `allowed`."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.iterations >= max_iter:
                raise LpError(
                    f"simplex iteration guard exceeded ({max_iter} iterations); "
                    f"basis={self.basis.tolist()} objective={T[0, -1]:.6g}"
                )
            red = -T[0, :-1]
            is_basic = np.zeros(self.ncols, dtype=bool)
            is_basic[self.basis] = True
            cand = np.flatnonzero(allowed & ~is_basic & (red > _COST_TOL))
            if cand.size == 0:
                return OPTIMAL
            j = int(cand[0])
            col = T[1:, j]
            beta = T[1:, -1]
            ubb = self.ub[self.basis]

            ratios = np.full(m, np.inf)
            to_upper = np.zeros(m, dtype=bool)
            pos = col > _PIVOT_TOL
            ratios[pos] = np.maximum(beta[pos], 0.0) / col[pos]
            neg = (col < -_PIVOT_TOL) & np.isfinite(ubb)
            ratios[neg] = np.maximum(ubb[neg] - beta[neg], 0.0) / -col[neg]
            to_upper[neg] = True

            theta = ratios.min() if m else np.inf
            own = self.ub[j]
            self.iterations += 1
            if own < theta - 1e-12 or (not np.isfinite(theta) and np.isfinite(own)):
                self.flip(j)
                continue
            if not np.isfinite(theta):
                return UNBOUNDED
            ties = np.flatnonzero(ratios <= theta + 1e-12)
            i = int(ties[np.argmin(self.basis[ties])])
            r = i + 1
            if to_upper[i]:
                self.flip(int(self.basis[i]))
            self.pivot(r, j)


def lp_solve(A, b, lower, upper, c, sense="max", max_iter=None):
    """Solve a box-bounded LP with the simplex method.

    Parameters
    ----------
    A : (m, n) array
    b : (m,) array
    lower, upper : (n,) arrays of finite bounds
    c : (n,) objective coefficients
    sense : {"max", "min"}
    max_iter : iteration guard per phase, default ``50 * (m + n) + 100``

    Returns
    -------
    LpSolution
        ``status`` is one of ``"optimal"``, ``"infeasible"``, ``"unbounded"``.
        For non-optimal statuses ``x`` is empty and ``objective`` is nan.
    """
    c = np.asarray(c, dtype=np.float64).ravel()
    n = c.shape[0]
    A = np.asarray(A, dtype=np.float64).reshape(-1, n)
    b = np.asarray(b, dtype=np.float64).ravel()
    lower = np.asarray(lower, dtype=np.float64).ravel()
    upper = np.asarray(upper, dtype=np.float64).ravel()
    m = A.shape[0]
    if b.shape[0] != m or lower.shape[0] != n or upper.shape[0] != n:
        raise ValueError("inconsistent LP dimensions")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ValueError("lp_solve requires finite variable bounds")
    if sense not in ("max", "min"):
        raise ValueError(f"unknown sense {sense!r}")
    empty = LpSolution(np.empty(0), float("nan"), INFEASIBLE)
    width = upper - lower
    if np.any(width < -_FEAS_TOL):
        return empty
    width = np.maximum(width, 0.0)
    if max_iter is None:
        max_iter = 50 * (m + n) + 100

    rhs = b - A @ lower
    neg = rhs < 0
    k = int(neg.sum())
    N = n + m + k
    T = np.zeros((m + 1, N + 1))
    sign = np.where(neg, -1.0, 1.0)
    T[1:, :n] = A * sign[:, None]
    T[1:, n:n + m] = np.diag(sign)
    T[1:, -1] = np.abs(rhs)
    basis = np.arange(n, n + m)
    art_rows = np.flatnonzero(neg)
    for a, i in enumerate(art_rows):
        T[i + 1, n + m + a] = 1.0
        basis[i] = n + m + a
    ub = np.concatenate([width, np.full(m + k, np.inf)])
    tab = _Tableau(T, basis, ub)

    if k:
        cost1 = np.zeros(N)
        cost1[n + m:] = -1.0
        tab.set_objective(cost1)
        tab.run(np.ones(N, dtype=bool), max_iter)
        if tab.T[0, -1] < -_FEAS_TOL * max(1.0, np.abs(rhs).max()):
            return LpSolution(np.empty(0), float("nan"), INFEASIBLE, tab.iterations)
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = np.ones(m + 1, dtype=bool)
        for r in range(1, m + 1):
            if tab.basis[r - 1] < n + m:
                continue
            row = tab.T[r, :n + m]
            nz = np.flatnonzero(np.abs(row) > 1e-9)
            if nz.size:
                tab.pivot(r, int(nz[0]))
            else:
                keep[r] = False
        rows = np.flatnonzero(keep)
        tab.T = np.delete(tab.T[rows], np.s_[n + m:N], axis=1)
        tab.basis = tab.basis[rows[1:] - 1]
        tab.ub = tab.ub[:n + m]
        tab.flipped = tab.flipped[:n + m]
        N = n + m

    cmax = np.abs(c).max() if n else 0.0
    scale = cmax if cmax > 0 else 1.0
    cw = np.zeros(N)
    cw[:n] = (c if sense == "max" else -c) / scale
    const = float(np.sum(cw[tab.flipped] * tab.ub[tab.flipped]))
    cw[tab.flipped] = -cw[tab.flipped]
    tab.set_objective(cw, const)
    status = tab.run(np.ones(N, dtype=bool), max_iter + tab.iterations)
    if status != OPTIMAL:
        return LpSolution(np.empty(0), float("nan"), status, tab.iterations)

    y = np.zeros(N)
    y[tab.basis] = tab.T[1:, -1]
    y = np.where(tab.flipped, tab.ub - y, y)
    x = lower + np.clip(y[:n], 0.0, width)
    return LpSolution(x, float(c @ x), OPTIMAL, tab.iterations)
