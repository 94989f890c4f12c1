"""DR-submodular objectives: quadratic, DPP softmax extension, graph revenue.

Every objective exposes ``dim``, ``value(x)``, ``gradient(x)`` and a batched
``values(X)`` used by the grid oracle. Stochastic gradients are produced by
adding isotropic Gaussian noise to the exact gradient.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import DimensionError, as_point


class SingularKernelError(ValueError):
    pass


class Objective:
    """Base class. Subclasses implement ``value`` and ``gradient``."""

    dim = 0
    gradient_bound = None
    smoothness = None

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.array([self.value(x) for x in X])

    def _check(self, x):
        return as_point(x, self.dim)

    def __call__(self, x):
        return self.value(x)


class QuadraticObjective(Objective):
    """``f(x) = 0.5 x'Hx + h'x + c`` with symmetric, entrywise nonpositive H."""

    def __init__(self, H, h, c=0.0, check=True):
        H = np.asarray(H, dtype=np.float64)
        h = np.asarray(h, dtype=np.float64).ravel()
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] != h.shape[0]:
            raise DimensionError(f"H shape {H.shape} incompatible with h length {h.shape[0]}")
        if check:
            if not np.array_equal(H, H.T):
                raise ValueError("H must be symmetric")
            if np.any(H > 0):
                raise ValueError("H must be entrywise nonpositive for DR-submodularity")
        self.H, self.h, self.c = H, h, float(c)
        self.dim = h.shape[0]
        self.smoothness = float(np.max(np.abs(np.linalg.eigvalsh(H)))) if check else None
        self.info = {}

    def value(self, x):
        x = self._check(x)
        return float(0.5 * x @ self.H @ x + self.h @ x + self.c)

    def gradient(self, x):
        x = self._check(x)
        return self.H @ x + self.h

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return 0.5 * np.einsum("ij,ij->i", X @ self.H, X) + X @ self.h + self.c

    def with_offset(self, c):
        q = QuadraticObjective.__new__(QuadraticObjective)
        q.__dict__.update(self.__dict__)
        q.c = float(c)
        q.info = dict(self.info)
        return q


class SoftmaxObjective(Objective):
    """DPP softmax extension ``log det(diag(x)(L - I) + I) + offset`` on [0, 1]^n.

    The gradient is ``diag((L - I) M(x)^{-1})`` with ``M(x) = diag(x)(L - I) + I``,
    computed from a single LU solve.
    """

    def __init__(self, L, offset=0.0):
        L = np.asarray(L, dtype=np.float64)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise DimensionError(f"L must be square, got {L.shape}")
        if not np.allclose(L, L.T, atol=1e-12):
            raise ValueError("L must be symmetric")
        eig = np.linalg.eigvalsh(L)
        if eig.min() < -1e-9:
            raise ValueError(f"L must be positive semidefinite (min eigenvalue {eig.min():.3g})")
        self.L = L
        self.dim = L.shape[0]
        self.offset = float(offset)
        self._K = L - np.eye(self.dim)
        self.eigenvalues = eig
        self.info = {}

    def _matrix(self, x):
        return x[:, None] * self._K + np.eye(self.dim)

    def _slogdet(self, x):
        sign, logdet = np.linalg.slogdet(self._matrix(x))
        if sign <= 0 or logdet < -690.0:
            raise SingularKernelError(f"diag(x)(L - I) + I is numerically singular at x={x.tolist()}")
        return logdet

    def value(self, x):
        return float(self._slogdet(self._check(x)) + self.offset)

    def gradient(self, x):
        x = self._check(x)
        M = self._matrix(x)
        try:
            Z = np.linalg.solve(M.T, self._K.T)
        except np.linalg.LinAlgError as exc:
            raise SingularKernelError(f"factorization failed at x={x.tolist()}") from exc
        return np.diagonal(Z).copy()

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(X.shape[0])
        eye = np.eye(self.dim)
        for s in range(0, X.shape[0], 50_000):
            chunk = X[s:s + 50_000]
            M = chunk[:, :, None] * self._K[None] + eye
            sign, logdet = np.linalg.slogdet(M)
            if np.any(sign <= 0):
                bad = chunk[np.flatnonzero(sign <= 0)[0]]
                raise SingularKernelError(f"singular kernel matrix at x={bad.tolist()}")
            out[s:s + chunk.shape[0]] = logdet
        return out + self.offset

    def box_lower_bound(self):
        """A constant ``lb`` with ``log det M(x) >= lb`` for all x in [0, 1]^n.

        ``det M(x)`` is the multilinear extension of the principal minors
        ``det L_S``, each at least ``min(1, lambda_min)^n``.
        """
        lam = max(self.eigenvalues.min(), 1e-300)
        return self.dim * min(0.0, float(np.log(lam)))


class RevenueObjective(Objective):
    """Expected word-of-mouth revenue on an undirected weighted graph.

    ``f(x) = sum_{i != j} w_ij (1 - q_i) q_j`` with ``q_i = (1 - p)^{x_i}``.
    Each undirected edge contributes both ordered terms, i.e.
    ``w (q_i + q_j - 2 q_i q_j)``. Work per call is O(|E|).
    """

    def __init__(self, n, edges, p):
        if not 0.0 < p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {p}")
        edges = np.asarray(edges, dtype=np.float64).reshape(-1, 3)
        self.dim = int(n)
        self.src = edges[:, 0].astype(np.int64)
        self.dst = edges[:, 1].astype(np.int64)
        self.w = edges[:, 2].copy()
        if np.any(self.src == self.dst):
            raise ValueError("self-loops are not allowed")
        if np.any(self.w < 0):
            raise ValueError("edge weights must be nonnegative")
        if edges.shape[0] and (min(self.src.min(), self.dst.min()) < 0 or max(self.src.max(), self.dst.max()) >= n):
            raise ValueError("edge index out of range")
        self.p = float(p)
        self._log1mp = float(np.log1p(-p))
        self.info = {}

    def _q(self, x):
        return np.exp(self._log1mp * x)

    def value(self, x):
        x = self._check(x)
        if np.any(x < 0):
            raise ValueError("revenue objective needs x >= 0")
        q = self._q(x)
        qi, qj = q[self.src], q[self.dst]
        return float(np.sum(self.w * (qi + qj - 2.0 * qi * qj)))

    def gradient(self, x):
        x = self._check(x)
        q = self._q(x)
        qi, qj = q[self.src], q[self.dst]
        acc = np.bincount(self.src, weights=self.w * (1.0 - 2.0 * qj), minlength=self.dim)
        acc += np.bincount(self.dst, weights=self.w * (1.0 - 2.0 * qi), minlength=self.dim)
        return self._log1mp * q * acc

    def values(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Q = np.exp(self._log1mp * X)
        qi, qj = Q[:, self.src], Q[:, self.dst]
        return (qi + qj - 2.0 * qi * qj) @ self.w


class ShiftedObjective(Objective):
    """``F(x) + offset``; used to make an objective nonnegative on a box."""

    def __init__(self, base, offset):
        self.base = base
        self.offset = float(offset)
        self.dim = base.dim

    def value(self, x):
        return self.base.value(x) + self.offset

    def gradient(self, x):
        return self.base.gradient(x)

    def values(self, X):
        return self.base.values(X) + self.offset


class ScaledObjective(Objective):
    """``F(scale * x)``: the objective seen in box-normalised coordinates."""

    def __init__(self, base, scale):
        self.base = base
        self.scale = np.asarray(scale, dtype=np.float64).ravel()
        if self.scale.shape[0] != base.dim or np.any(self.scale <= 0):
            raise ValueError("scale must be a positive vector of the objective's dimension")
        self.dim = base.dim
        self.info = getattr(base, "info", {})

    def value(self, x):
        return self.base.value(self._check(x) * self.scale)

    def gradient(self, x):
        return self.scale * self.base.gradient(self._check(x) * self.scale)

    def values(self, X):
        return self.base.values(np.atleast_2d(X) * self.scale)


class ZeroObjective(Objective):
    def __init__(self, n):
        self.dim = int(n)

    def value(self, x):
        self._check(x)
        return 0.0

    def gradient(self, x):
        return np.zeros(self.dim)

    def values(self, X):
        return np.zeros(np.atleast_2d(X).shape[0])


def stochastic_gradient(F, x, rng, sigma=0.0):
    """Unbiased gradient estimate ``grad F(x) + sigma * N(0, I)``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    g = F.gradient(x)
    if sigma == 0:
        return g
    return g + sigma * rng.standard_normal(g.shape[0])


def fd_gradient(F, x, h=1e-5):
    """Central finite-difference gradient."""
    x = as_point(x, F.dim)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (F.value(x + e) - F.value(x - e)) / (2 * h)
    return g


@dataclass
class DRReport:
    max_violation: float
    beta_hat: float
    G_hat: float
    trials: int
    witness: tuple = field(default=None, repr=False)

    @property
    def passed(self):
        return self.max_violation <= 1e-7


def dr_diagnostic(F, u, trials, rng):
    """Sample ordered pairs ``y <= x`` in ``[0, u]`` and probe gradient antitonicity.

    Reports the worst entrywise violation of ``grad F(x) <= grad F(y)``
    together with sampled estimates of the smoothness constant (largest
    gradient difference quotient) and the gradient bound (largest gradient
    norm seen).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    u = np.asarray(u, dtype=np.float64).ravel()
    worst, beta, G = -np.inf, 0.0, 0.0
    witness = None
    for _ in range(trials):
        y = rng.uniform(0.0, 1.0, u.size) * u
        x = y + rng.uniform(0.0, 1.0, u.size) * (u - y)
        gx, gy = F.gradient(x), F.gradient(y)
        v = float(np.max(gx - gy))
        if v > worst:
            worst, witness = v, (x, y)
        d = np.linalg.norm(x - y)
        if d > 0:
            beta = max(beta, np.linalg.norm(gx - gy) / d)
        G = max(G, np.linalg.norm(gx), np.linalg.norm(gy))
    return DRReport(max(worst, 0.0), float(beta), float(G), trials, witness)
