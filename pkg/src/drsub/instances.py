"""Seeded instance generators, graph loading and online revenue streams."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import LinearConstraint, minimize

from .objectives import QuadraticObjective, RevenueObjective, ScaledObjective, SoftmaxObjective
from .polytope import Polytope, scaled_simplex, tight_upper_bounds

log = logging.getLogger(__name__)

MU = 0.01
FAMILIES = (
    "quadratic_uniform",
    "quadratic_exponential",
    "softmax_uniform",
    "softmax_exponential",
    "revenue_synthetic",
    "revenue_graph",
)


@dataclass
class GeneratorSpec:
    family: str
    n: int
    m: int = 0
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}")


@dataclass
class WeightedGraph:
    n: int
    edges: list
    dropped_self_loops: int = 0

    def edge_array(self):
        return np.array(self.edges, dtype=np.float64).reshape(-1, 3)


def _constraint_matrix(rng, n, m, dist):
    if dist == "uniform":
        return rng.uniform(MU, MU + 1.0, size=(m, n))
    if dist == "exponential":
        return rng.exponential(scale=4.0, size=(m, n)) + MU
    raise ValueError(f"unknown distribution {dist!r}")


def _mirror_upper(M):
    U = np.triu(M)
    return U + np.triu(U, 1).T


def _down_closed_starts(rng, A, b, u, k):
    # random points of a down-closed polytope: sample the box, shrink onto it
    X = rng.uniform(0.0, 1.0, size=(k, u.size)) * u
    load = X @ A.T / b
    shrink = np.minimum(1.0, 1.0 / np.maximum(load.max(axis=1), 1e-300))
    return X * shrink[:, None]


def approx_minimizer(H, h, P, rng, starts=20):
    """Multi-start local minimisation of ``0.5 x'Hx + h'x`` over a down-closed P.

    Stands in for a global QP solver; only used to set the nonnegativity offset.
    """
    cons = [LinearConstraint(P.A, -np.inf, P.b)] if P.m else []
    bounds = list(zip(np.zeros(P.n), P.u))
    fun = lambda x: 0.5 * x @ H @ x + h @ x
    jac = lambda x: H @ x + h
    best_x, best_f = np.zeros(P.n), 0.0
    for x0 in _down_closed_starts(rng, P.A, P.b, P.u, starts):
        res = minimize(fun, x0, jac=jac, bounds=bounds, constraints=cons, method="SLSQP",
                       options={"maxiter": 2000, "ftol": 1e-12})
        x = np.clip(res.x, 0.0, P.u)
        if P.m and np.any(P.A @ x > P.b + 1e-9):
            continue
        f = fun(x)
        if f < best_f:
            best_x, best_f = x, f
    return best_x, float(best_f)


def quadratic_instance(H, P, rng, starts=20):
    """Build the non-monotone, nonnegative quadratic on P from H.

    ``h = -0.2 H'u`` and ``c = -f(x_hat) + 0.1 |f(x_hat)|`` where x_hat is an
    approximate minimiser of the offset-free quadratic over P.
    """
    h = -0.2 * H.T @ P.u
    x_hat, f_hat = approx_minimizer(H, h, P, rng, starts)
    c = -f_hat + 0.1 * abs(f_hat)
    F = QuadraticObjective(H, h, c)
    F.info = {"x_hat": x_hat, "f_hat": f_hat}
    return F


def _quadratic(n, m, seed, dist, polytope=None):
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if polytope not in (None, "generated", "simplex"):
        raise ValueError(f"quadratic polytope must be 'generated' or 'simplex', got {polytope!r}")
    rng = np.random.default_rng(seed)
    if dist == "uniform":
        H = _mirror_upper(rng.uniform(-1.0, 0.0, size=(n, n)))
    else:
        H = -_mirror_upper(rng.exponential(scale=1.0, size=(n, n)))
    A = _constraint_matrix(rng, n, m, dist)
    b = np.ones(m)
    if polytope == "simplex":
        P = scaled_simplex(n)
    else:
        P = Polytope(A, b, tight_upper_bounds(A, b))
    return quadratic_instance(H, P, rng), P


def gen_quadratic_uniform(n, m, seed, polytope=None):
    """Quadratic with H ~ U[-1, 0] (symmetric), A ~ U[0.01, 1.01], b = 1.

    ``polytope="simplex"`` swaps the random constraints for the unit simplex
    ``{x >= 0, sum(x) <= 1}``; the offset c is then fitted on that set.
    """
    return _quadratic(n, m, seed, "uniform", polytope)


def gen_quadratic_exponential(n, m, seed, polytope=None):
    """Quadratic with -H ~ Exp(1) (symmetric), A ~ Exp(0.25) + 0.01, b = 1."""
    return _quadratic(n, m, seed, "exponential", polytope)


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))


def gen_softmax(n, m, seed, dist="uniform", eig_range=(0.0, 1.5)):
    """Softmax-extension instance: ``L = U diag(d) U'`` with d ~ U[eig_range].

    Constraints as for the quadratic family of the same distribution with
    ``b = 2``. The box is capped at 1 because the extension lives on [0, 1]^n.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    d = rng.uniform(eig_range[0], eig_range[1], size=n)
    U = random_orthogonal(rng, n)
    L = (U * d) @ U.T
    L = 0.5 * (L + L.T)
    A = _constraint_matrix(rng, n, m, dist)
    b = np.full(m, 2.0)
    u = np.minimum(tight_upper_bounds(A, b), 1.0)
    F = SoftmaxObjective(L)
    F.info = {"eigenvalues": d}
    return F, Polytope(A, b, u)


def gen_revenue_graph(n, seed, avg_degree=8.0, weights=(0.4, 0.6, 0.8, 1.0)):
    """Erdos-Renyi graph with trust-level style edge weights."""
    rng = np.random.default_rng(seed)
    prob = min(1.0, avg_degree / max(n - 1, 1))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < prob
    w = rng.choice(np.asarray(weights, dtype=np.float64), size=int(keep.sum()))
    edges = [(int(i), int(j), float(x)) for i, j, x in zip(iu[keep], ju[keep], w)]
    return WeightedGraph(n, edges)


def revenue_objective(g, p=1e-4):
    return RevenueObjective(g.n, g.edge_array(), p)


def load_graph(path, index_base="auto"):
    """Read a whitespace-separated edge list ``i j [w]``.

    Lines starting with ``#`` or ``%`` are comments. ``index_base`` is 0, 1 or
    "auto" (1-based when no index 0 occurs). Edges are symmetrised and
    duplicates summed; self-loops are dropped and counted.
    """
    raw = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s[0] in "#%":
                continue
            parts = s.split()
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 'i j [w]', got {s!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed edge {s!r}") from None
            if w < 0 or not np.isfinite(w):
                raise ValueError(f"{path}:{lineno}: edge weight must be finite and >= 0")
            raw.append((lineno, i, j, w))
    if not raw:
        raise ValueError(f"{path}: empty graph")
    if index_base == "auto":
        index_base = 0 if min(min(i, j) for _, i, j, _ in raw) == 0 else 1
    if index_base not in (0, 1):
        raise ValueError(f"index_base must be 0, 1 or 'auto', got {index_base!r}")
    merged = {}
    loops = 0
    n = 0
    for lineno, i, j, w in raw:
        i, j = i - index_base, j - index_base
        if i < 0 or j < 0:
            raise ValueError(f"{path}:{lineno}: negative vertex index after base adjustment")
        n = max(n, i + 1, j + 1)
        if i == j:
            loops += 1
            continue
        key = (min(i, j), max(i, j))
        merged[key] = merged.get(key, 0.0) + w
    if loops:
        log.warning("%s: dropped %d self-loop(s)", path, loops)
    edges = [(i, j, w) for (i, j), w in sorted(merged.items())]
    return WeightedGraph(n, edges, loops)


def write_graph(g, path):
    with open(path, "w") as fh:
        for i, j, w in g.edges:
            fh.write(f"{i} {j} {w!r}\n")


def normalized(F, P):
    """Rescale ``x = u * y`` so the box becomes [0, 1]^n; values are unchanged."""
    Pn = Polytope(P.A * P.u, P.b, np.ones(P.n), check=False)
    return ScaledObjective(F, P.u), Pn


def revenue_polytopes(n):
    """Return ``(general, down_closed)``: ``0.25 <= sum x <= 1`` and ``sum x <= 1``, both with u = 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ones = np.ones((1, n))
    general = Polytope(np.vstack([ones, -ones]), [1.0, -0.25], np.ones(n))
    down_closed = Polytope(ones, [1.0], np.ones(n))
    return general, down_closed


class OnlineStream:
    """Sequence of objectives ``F^1..F^T``; ``next(t)`` is pure in t, so streams replay."""

    def __init__(self, T):
        self.T = int(T)

    def next(self, t):
        raise NotImplementedError

    def __iter__(self):
        for t in range(1, self.T + 1):
            yield self.next(t)


class FixedStream(OnlineStream):
    """The same objective at every step."""

    def __init__(self, F, T):
        super().__init__(T)
        self.F = F
        self.dim = F.dim

    def next(self, t):
        return self.F


class RevenueBatchStream(OnlineStream):
    """At step t, unit weights on edges whose endpoints both lie in a random batch V^t."""

    def __init__(self, g, batch_vertices, T, p, seed):
        super().__init__(T)
        if not 0 <= batch_vertices <= g.n:
            raise ValueError("batch_vertices must lie in [0, n]")
        self.g = g
        self.dim = g.n
        self.batch_vertices = int(batch_vertices)
        self.p = float(p)
        self.seed = int(seed)
        E = g.edge_array()
        self._i = E[:, 0].astype(np.int64)
        self._j = E[:, 1].astype(np.int64)

    def batch(self, t):
        rng = np.random.default_rng([self.seed, int(t)])
        return np.sort(rng.choice(self.g.n, size=self.batch_vertices, replace=False))

    def next(self, t):
        mask = np.zeros(self.g.n, dtype=bool)
        mask[self.batch(t)] = True
        keep = mask[self._i] & mask[self._j]
        edges = np.column_stack([self._i[keep], self._j[keep], np.ones(int(keep.sum()))])
        return RevenueObjective(self.g.n, edges, self.p)

    def averaged_objective(self):
        """``(1/T) sum_t F^t``: the revenue objective with edge weights = inclusion frequency."""
        counts = np.zeros(self._i.size)
        for t in range(1, self.T + 1):
            mask = np.zeros(self.g.n, dtype=bool)
            mask[self.batch(t)] = True
            counts += mask[self._i] & mask[self._j]
        edges = np.column_stack([self._i, self._j, counts / self.T])
        return RevenueObjective(self.g.n, edges, self.p)


def gen_online_batches(g, batch_vertices, T, p, seed):
    return RevenueBatchStream(g, batch_vertices, T, p, seed)


def generate(spec):
    """Dispatch a GeneratorSpec to its generator; returns ``(objective, polytope)``."""
    prm = spec.params
    if spec.family == "quadratic_uniform":
        return gen_quadratic_uniform(spec.n, spec.m, spec.seed, prm.get("polytope"))
    if spec.family == "quadratic_exponential":
        return gen_quadratic_exponential(spec.n, spec.m, spec.seed, prm.get("polytope"))
    if spec.family in ("softmax_uniform", "softmax_exponential"):
        dist = spec.family.split("_")[1]
        return gen_softmax(spec.n, spec.m, spec.seed, dist)
    p = float(prm.get("p", 1e-4))
    if spec.family == "revenue_synthetic":
        g = gen_revenue_graph(spec.n, spec.seed, float(prm.get("avg_degree", 8.0)))
    else:
        g = load_graph(prm["graph"], prm.get("index_base", "auto"))
    general, down_closed = revenue_polytopes(g.n)
    P = down_closed if prm.get("polytope", "general") == "down_closed" else general
    return revenue_objective(g, p), P
