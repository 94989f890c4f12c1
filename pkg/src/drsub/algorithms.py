"""Frank-Wolfe, online stochastic gradient ascent, projected gradient ascent,
and a brute-force grid oracle for reference optima."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import harmonic_number
from .objectives import dr_diagnostic, stochastic_gradient
from .oracles import lmo, project
from .polytope import contains_many, diameter_bound, down_closed_sufficient, min_inf_norm_point

DELTA = math.log(3.0) / 2.0
FW_RATIO_FLOOR = 1.0 / (3.0 * math.sqrt(3.0))


class NonFiniteGradientError(FloatingPointError):
    pass


class GridBudgetError(ValueError):
    pass


@dataclass
class Trajectory:
    """Per-iteration record of one run.

    ``iterates[0]`` is the start point; ``iterates[t]`` is the point after
    iteration t (offline) or the point played at step t + 1 (online).
    """

    iterates: list = field(default_factory=list)
    values: list = field(default_factory=list)
    oracle_outputs: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def x(self):
        return self.iterates[-1]

    @property
    def final_value(self):
        return self.values[-1]

    def cumulative(self):
        return np.cumsum(self.values)


def fw_step_sizes(T, delta=DELTA):
    """``eta_t = delta / (t H_T)`` for t = 1..T."""
    return delta / (np.arange(1, T + 1) * harmonic_number(T))


def _finite(g, t):
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradientError(f"non-finite gradient at iteration t={t}")
    return g


def frank_wolfe(F, P, T, delta=DELTA, x1=None):
    """Frank-Wolfe with harmonic step sizes for non-monotone DR-submodular F.

    Starts from the feasible point of least infinity norm and takes T
    convex-combination steps ``x <- (1 - eta_t) x + eta_t v_t`` where v_t
    maximises the linearisation at the current point.
    """
    if T < 2:
        raise ValueError("frank_wolfe needs T >= 2")
    x = min_inf_norm_point(P) if x1 is None else np.asarray(x1, dtype=np.float64).copy()
    eta = fw_step_sizes(T, delta)
    traj = Trajectory(meta={"algorithm": "frank_wolfe", "T": T, "delta": delta,
                            "D": diameter_bound(P)})
    traj.iterates.append(x.copy())
    traj.values.append(F.value(x))
    for t in range(1, T + 1):
        start = time.perf_counter()
        g = _finite(F.gradient(x), t)
        v = lmo(P, g)
        x = (1.0 - eta[t - 1]) * x + eta[t - 1] * v
        traj.wall_times.append(time.perf_counter() - start)
        traj.iterates.append(x)
        traj.values.append(F.value(x))
        traj.oracle_outputs.append(v)
        traj.step_sizes.append(float(eta[t - 1]))
    return traj


def product_bound_slack(traj, u=None):
    """Worst slack of ``u_i - x_i^t >= (u_i - x_i^1) prod_{t' <= t} (1 - eta_t')`` over i, t.

    With u = 1 this is the textbook form; a general box is the same bound in
    rescaled coordinates. Negative return values are violations.
    """
    X = np.asarray(traj.iterates)
    u = np.ones(X.shape[1]) if u is None else np.asarray(u, dtype=np.float64)
    prod = np.concatenate([[1.0], np.cumprod(1.0 - np.asarray(traj.step_sizes))])
    lhs = u - X
    rhs = (u - X[0])[None, :] * prod[:, None]
    return float(np.min(lhs - rhs))


def estimate_gradient_bound(F, P, sigma=0.0, trials=200, seed=0):
    """G from sampled gradient norms over the box, inflated by ``3 sigma sqrt(n)`` under noise."""
    rep = dr_diagnostic(F, P.u, trials, np.random.default_rng(seed))
    return rep.G_hat + 3.0 * sigma * math.sqrt(F.dim)


def _default_D_G(F, P, D, G, sigma):
    if D is None:
        D = diameter_bound(P)
    if G is None:
        G = estimate_gradient_bound(F, P, sigma)
    if G <= 0:
        G = 1.0
    return D, G


def online_sga(stream, P, T, D, G, sigma=0.0, seed=0, x1=None, allow_non_down_closed=False):
    """Online stochastic gradient ascent with ``eta_t = D / (G sqrt(t))``.

    ``values[t-1]`` is the reward ``F^t(x^t)``; ``iterates`` has T + 1 rows.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if D <= 0 or G <= 0:
        raise ValueError("D and G must be positive")
    if not (allow_non_down_closed or down_closed_sufficient(P)):
        raise ValueError("online_sga requires a down-closed polytope (pass allow_non_down_closed to override)")
    rng = np.random.default_rng(seed)
    x = min_inf_norm_point(P) if x1 is None else np.asarray(x1, dtype=np.float64).copy()
    traj = Trajectory(meta={"algorithm": "online_sga", "T": T, "D": D, "G": G,
                            "sigma": sigma, "seed": seed})
    traj.iterates.append(x.copy())
    for t in range(1, T + 1):
        start = time.perf_counter()
        Ft = stream.next(t)
        traj.values.append(Ft.value(x))
        g = _finite(stochastic_gradient(Ft, x, rng, sigma), t)
        eta = D / (G * math.sqrt(t))
        x = project(P, x + eta * g)
        traj.wall_times.append(time.perf_counter() - start)
        traj.iterates.append(x)
        traj.oracle_outputs.append(g)
        traj.step_sizes.append(eta)
    return traj


def projected_gradient_ascent(F, P, T, step_schedule=None, D=None, G=None, x1=None):
    """Offline projected gradient ascent baseline.

    ``step_schedule(t)`` defaults to ``D / (G sqrt(t))``; no approximation
    guarantee is claimed on general polytopes.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if step_schedule is None:
        D, G = _default_D_G(F, P, D, G, 0.0)
        step_schedule = lambda t: D / (G * math.sqrt(t))
    x = min_inf_norm_point(P) if x1 is None else np.asarray(x1, dtype=np.float64).copy()
    traj = Trajectory(meta={"algorithm": "projected_gradient_ascent", "T": T, "D": D, "G": G})
    traj.iterates.append(x.copy())
    traj.values.append(F.value(x))
    for t in range(1, T + 1):
        start = time.perf_counter()
        g = _finite(F.gradient(x), t)
        eta = float(step_schedule(t))
        x = project(P, x + eta * g)
        traj.wall_times.append(time.perf_counter() - start)
        traj.iterates.append(x)
        traj.values.append(F.value(x))
        traj.oracle_outputs.append(g)
        traj.step_sizes.append(eta)
    return traj


@dataclass
class GridResult:
    x: np.ndarray
    value: float
    grid_value: float
    grid_x: np.ndarray
    spacing: float
    points: int

    def gap_bound(self, beta, G):
        """Documented suboptimality ``beta n s^2 / 2 + G s sqrt(n)`` (down-closed P)."""
        n = self.x.size
        return beta * n * self.spacing ** 2 / 2.0 + G * self.spacing * math.sqrt(n)


def _grid_points(P, spacing, budget, chunk=200_000):
    """Yield chunks of feasible grid points ``{0, s, 2s, ...}^n`` inside P.

    Coordinates are fixed one at a time and prefixes that can no longer be
    completed inside P are pruned. Prefixes are kept as uint16 grid indices.
    """
    n, A, b, u = P.n, P.A, P.b, P.u
    tol = 1e-12
    sizes = [int(math.floor(u[j] / spacing + 1e-9)) + 1 for j in range(n)]
    if max(sizes) > np.iinfo(np.uint16).max:
        raise GridBudgetError(f"spacing {spacing} is too fine for the box")
    # lower bound on what coordinates d.. can still add to each row
    neg = np.minimum(A, 0.0) * u
    rest = np.concatenate([np.cumsum(neg[:, ::-1], axis=1)[:, ::-1], np.zeros((A.shape[0], 1))], axis=1)

    def too_big():
        return GridBudgetError(
            f"grid exceeds {budget} candidate points at spacing {spacing}; "
            "use a smaller n or a larger spacing"
        )

    def expand(pre, d):
        k = sizes[d]
        idx = np.arange(k, dtype=np.uint16)
        return np.hstack([np.repeat(pre, k, axis=0), np.tile(idx, pre.shape[0])[:, None]])

    prefix = np.zeros((1, 0), dtype=np.uint16)
    for d in range(n - 1):
        step = max(1, chunk // sizes[d])
        kept, total = [], 0
        for s in range(0, prefix.shape[0], step):
            ext = expand(prefix[s:s + step], d)
            partial = (ext * spacing) @ A[:, :d + 1].T
            ext = ext[np.all(partial + rest[:, d + 1] <= b + tol, axis=1)]
            total += ext.shape[0]
            if total > budget:
                raise too_big()
            kept.append(ext)
        prefix = np.vstack(kept)
    step = max(1, chunk // sizes[-1])
    total = 0
    for s in range(0, prefix.shape[0], step):
        X = expand(prefix[s:s + step], n - 1) * spacing
        X = X[contains_many(P, X, tol)]
        total += X.shape[0]
        if total > budget:
            raise too_big()
        yield X


def _polish(F, P, x, steps, spacing):
    # monotone projected gradient: a step is kept only if it improves F
    fx = F.value(x)
    eta = spacing
    for _ in range(steps):
        g = F.gradient(x)
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        y = project(P, x + (eta / gn) * g)
        fy = F.value(y)
        if fy > fx:
            x, fx = y, fy
            eta *= 1.5
        else:
            eta *= 0.5
            if eta < 1e-12:
                break
    return x, fx


def grid_oracle(F, P, spacing, budget=10**7, polish_steps=200):
    """Best value of F on the membership-filtered grid, then a local polish.

    Stands in for a global solver at desk scale. For a down-closed P the
    grid best is within ``beta n s^2 / 2 + G s sqrt(n)`` of the optimum; the
    polish can only improve on it.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    best_v, best_x, count = -np.inf, None, 0
    for X in _grid_points(P, spacing, budget):
        if X.shape[0] == 0:
            continue
        count += X.shape[0]
        vals = F.values(X)
        i = int(np.argmax(vals))
        if vals[i] > best_v:
            best_v, best_x = float(vals[i]), X[i].copy()
    if best_x is None:
        raise GridBudgetError(f"no grid point at spacing {spacing} lies in the polytope")
    x, v = (best_x, best_v) if polish_steps <= 0 else _polish(F, P, best_x, polish_steps, spacing)
    return GridResult(x=x, value=max(v, best_v), grid_value=best_v, grid_x=best_x,
                      spacing=spacing, points=count)


def grid_size_estimate(P, spacing, samples=20_000):
    """Monte Carlo estimate of the number of grid points inside P."""
    sizes = np.floor(P.u / spacing + 1e-9) + 1
    X = np.random.default_rng(0).uniform(0.0, 1.0, (samples, P.n)) * P.u
    return float(np.prod(sizes) * np.mean(contains_many(P, X)))


def grid_oracle_auto(F, P, spacing, budget=10**7, factors=(1.0, 1.25, 2.0, 2.5), polish_steps=200):
    """Grid oracle at the finest spacing in ``spacing * factors`` that fits the budget.

    Spacings whose estimated grid is well over budget are skipped without
    enumeration. Returns None when every spacing exceeds the budget; the
    spacing used is recorded on the result.
    """
    for k in factors:
        if grid_size_estimate(P, spacing * k) > 1.5 * budget:
            continue
        try:
            return grid_oracle(F, P, spacing * k, budget=budget, polish_steps=polish_steps)
        except GridBudgetError:
            continue
    return None
