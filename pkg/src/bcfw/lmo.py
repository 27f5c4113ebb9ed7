"""Linear minimization oracles for the constraint sets of the experiments.

Every set exposes ``lmo(c)`` returning a minimizer of ``<c, v>`` over the
set, its Euclidean ``diameter`` and a tolerant membership test
``contains(x, tol)``. :class:`ProductDomain` combines them and keeps one
call counter per component.

The spectraplex and nuclear-ball oracles need an extreme eigenpair of a
symmetric matrix. :func:`min_eigenpair` computes it with restarted Lanczos
(full reorthogonalization) on a deterministic start vector; the projected
tridiagonal problem is solved by Sturm-sequence bisection followed by
shifted inverse iteration.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .core import BlockVector, as_index_set

__all__ = [
    "ConvergenceError",
    "Box",
    "LinfBall",
    "Spectraplex",
    "NuclearBall",
    "ProductDomain",
    "lmo_box",
    "lmo_linf_ball",
    "lmo_spectraplex",
    "lmo_nuclear_ball",
    "lmo_product",
    "min_eigenpair",
    "top_singular_triple",
    "diameter",
    "contains",
]

DEFAULT_TOL = 1e-8

ArrayOrScalar = Union[float, np.ndarray]


class ConvergenceError(RuntimeError):
    """An iterative eigensolver hit its iteration cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


# --------------------------------------------------------------------------
# extreme eigenpairs


def _gershgorin_radius(S: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(S), axis=1))) if S.size else 0.0


def _sturm_count(alpha: np.ndarray, beta2: np.ndarray, x: float, pivmin: float) -> int:
    # number of eigenvalues of the tridiagonal (alpha, beta) strictly below x
    count = 0
    d = alpha[0] - x
    if abs(d) < pivmin:
        d = -pivmin
    if d < 0:
        count += 1
    for j in range(1, len(alpha)):
        d = alpha[j] - x - beta2[j - 1] / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0:
            count += 1
    return count


def _tridiag_min_eig(alpha: np.ndarray, beta: np.ndarray) -> float:
    k = len(alpha)
    if k == 1:
        return float(alpha[0])
    off = np.abs(beta)
    rad = np.zeros(k)
    rad[:-1] += off
    rad[1:] += off
    lo = float(np.min(alpha - rad))
    hi = float(np.max(alpha + rad))
    scale = max(abs(lo), abs(hi), 1e-300)
    beta2 = beta * beta
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(beta2)))
    hi = min(hi, float(np.min(alpha)))  # Cauchy interlacing: lambda_min <= min(alpha)
    eps = np.finfo(float).eps
    while hi - lo > 2 * eps * scale:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sturm_count(alpha, beta2, mid, pivmin) >= 1:
            hi = mid
        else:
            lo = mid
    return lo


def _tridiag_solve_spd(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # Thomas algorithm; the caller shifts below the spectrum so no pivoting is needed
    k = len(diag)
    c = np.zeros(k)
    d = np.zeros(k)
    denom = diag[0]
    c[0] = off[0] / denom if k > 1 else 0.0
    d[0] = rhs[0] / denom
    for j in range(1, k):
        denom = diag[j] - off[j - 1] * c[j - 1]
        if j < k - 1:
            c[j] = off[j] / denom
        d[j] = (rhs[j] - off[j - 1] * d[j - 1]) / denom
    y = np.zeros(k)
    y[-1] = d[-1]
    for j in range(k - 2, -1, -1):
        y[j] = d[j] - c[j] * y[j + 1]
    return y


def _tridiag_min_eigvec(alpha: np.ndarray, beta: np.ndarray, theta: float) -> np.ndarray:
    k = len(alpha)
    scale = max(float(np.max(np.abs(alpha))), float(np.max(np.abs(beta), initial=0.0)))
    if k == 1 or scale == 0.0:
        return np.ones(k) / math.sqrt(k)
    shift = theta - 1e-9 * scale
    y = np.linspace(1.0, 2.0, k)
    y /= np.linalg.norm(y)
    for _ in range(4):
        y = _tridiag_solve_spd(alpha - shift, beta, y)
        nrm = np.linalg.norm(y)
        if not np.isfinite(nrm) or nrm == 0.0:
            break
        y /= nrm
    return y


def _lanczos(S: np.ndarray, q0: np.ndarray, k: int, small: float):
    n = S.shape[0]
    Q = np.zeros((n, k))
    alpha = np.zeros(k)
    beta = np.zeros(max(k - 1, 0))
    q = q0
    for j in range(k):
        Q[:, j] = q
        w = S @ q
        alpha[j] = q @ w
        basis = Q[:, : j + 1]
        w = w - basis @ (basis.T @ w)
        w = w - basis @ (basis.T @ w)
        if j == k - 1:
            break
        b = float(np.linalg.norm(w))
        if b > small:
            beta[j] = b
            q = w / b
            continue
        # invariant subspace reached; continue from a fresh orthogonal direction
        beta[j] = 0.0
        q = None
        for p in range(n):
            e = np.zeros(n)
            e[p] = 1.0
            e = e - basis @ (basis.T @ e)
            e = e - basis @ (basis.T @ e)
            ne = np.linalg.norm(e)
            if ne > 0.1:
                q = e / ne
                break
        if q is None:
            return Q[:, : j + 1], alpha[: j + 1], beta[:j]
    return Q, alpha, beta


def min_eigenpair(S: np.ndarray, tol: float = 1e-10, maxiter: int | None = None):
    """Smallest eigenvalue and a unit eigenvector of the symmetric matrix ``S``.

    Parameters
    ----------
    S : ndarray, shape (n, n)
        Symmetric matrix (symmetry is not checked).
    tol : float
        Target for the residual ``||S u - theta u||`` relative to
        ``max(1, ||S||_inf)``.
    maxiter : int, optional
        Cap on matrix-vector products. Defaults to
        ``10 n log(n) + 1000``.

    Returns
    -------
    theta : float
        Rayleigh quotient of the returned vector.
    u : ndarray, shape (n,)

    Raises
    ------
    ConvergenceError
        If the residual target is not met within ``maxiter`` products.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {S.shape}")
    n = S.shape[0]
    if n == 1:
        return float(S[0, 0]), np.ones(1)
    if maxiter is None:
        maxiter = int(10 * n * math.log(n)) + 1000
    scale = max(1.0, _gershgorin_radius(S))
    target = tol * scale
    k = min(n, 40)
    q = np.ones(n) / math.sqrt(n)
    used = 0
    best = None
    while used < maxiter:
        Q, alpha, beta = _lanczos(S, q, k, 1e-12 * scale)
        used += len(alpha)
        theta = _tridiag_min_eig(alpha, beta)
        y = _tridiag_min_eigvec(alpha, beta, theta)
        u = Q @ y
        u /= np.linalg.norm(u)
        Su = S @ u
        theta = float(u @ Su)
        residual = float(np.linalg.norm(Su - theta * u))
        if residual <= target:
            return theta, u
        if best is not None and residual >= 0.5 * best:
            # stagnation: nudge the restart vector deterministically
            u = u + 1e-3 * np.cos(np.arange(n) + used)
            u /= np.linalg.norm(u)
        best = residual if best is None else min(best, residual)
        q = u
    raise ConvergenceError("Lanczos did not reach the eigen-residual target", best)


def top_singular_triple(c: np.ndarray, tol: float = 1e-10, maxiter: int | None = None):
    """Largest singular value with left/right singular vectors of ``c``.

    The right vector comes from the top eigenvector of ``c^T c``; the left
    one is ``c v / ||c v||``. For ``c = 0`` the vectors are ``None``.
    """
    c = np.asarray(c, dtype=np.float64)
    if not np.any(c):
        return 0.0, None, None
    gram = c.T @ c
    _, v = min_eigenpair(-gram, tol=tol, maxiter=maxiter)
    cv = c @ v
    sigma = float(np.linalg.norm(cv))
    return sigma, cv / sigma, v


# --------------------------------------------------------------------------
# oracles


def lmo_box(c: np.ndarray, lower: ArrayOrScalar, upper: ArrayOrScalar) -> np.ndarray:
    """Vertex of ``[lower, upper]`` minimizing ``<c, v>``; ties go to ``lower``."""
    c = np.asarray(c, dtype=np.float64)
    return np.where(c < 0, np.broadcast_to(upper, c.shape), np.broadcast_to(lower, c.shape)).astype(np.float64)


def lmo_linf_ball(c: np.ndarray, r: float) -> np.ndarray:
    """``-r sign(c)`` with ``sign(0) = +1``."""
    c = np.asarray(c, dtype=np.float64)
    return np.where(c < 0, r, -r).astype(np.float64)


def lmo_spectraplex(c: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Rank-one projector onto a minimal eigenvector of ``(c + c^T) / 2``."""
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"spectraplex LMO needs a square matrix, got {c.shape}")
    _, u = min_eigenpair(0.5 * (c + c.T), tol=tol)
    return np.outer(u, u)


def lmo_nuclear_ball(c: np.ndarray, r: float, tol: float = 1e-10) -> np.ndarray:
    """``-r u1 v1^T`` for the top singular pair of ``c`` (zero matrix if ``c = 0``)."""
    c = np.asarray(c, dtype=np.float64)
    sigma, u, v = top_singular_triple(c, tol=tol)
    if u is None:
        return np.zeros_like(c)
    return -r * np.outer(u, v)


# --------------------------------------------------------------------------
# constraint sets


@dataclass(frozen=True)
class Box:
    """Entrywise bounds ``lower <= x <= upper`` on an array of ``shape``."""

    shape: tuple[int, ...]
    lower: ArrayOrScalar
    upper: ArrayOrScalar

    def __post_init__(self):
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), self.shape)
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), self.shape)
        if not np.all(lo < hi):
            raise ValueError("Box requires lower < upper entrywise")

    def lmo(self, c):
        return lmo_box(c, self.lower, self.upper)

    @property
    def diameter(self) -> float:
        width = np.broadcast_to(np.asarray(self.upper, float) - np.asarray(self.lower, float), self.shape)
        return float(np.linalg.norm(width))

    def contains(self, x, tol=DEFAULT_TOL) -> bool:
        x = np.asarray(x)
        return x.shape == tuple(self.shape) and bool(
            np.all(x >= np.asarray(self.lower) - tol) and np.all(x <= np.asarray(self.upper) + tol)
        )


@dataclass(frozen=True)
class LinfBall:
    shape: tuple[int, ...]
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def lmo(self, c):
        return lmo_linf_ball(c, self.radius)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius * math.sqrt(math.prod(self.shape))

    def contains(self, x, tol=DEFAULT_TOL) -> bool:
        x = np.asarray(x)
        return x.shape == tuple(self.shape) and float(np.max(np.abs(x), initial=0.0)) <= self.radius + tol


@dataclass(frozen=True)
class Spectraplex:
    """Symmetric PSD ``n x n`` matrices with unit trace."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("spectraplex side length must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    def lmo(self, c):
        return lmo_spectraplex(c)

    @property
    def diameter(self) -> float:
        return math.sqrt(2.0) if self.n > 1 else 0.0

    def contains(self, x, tol=DEFAULT_TOL) -> bool:
        x = np.asarray(x)
        if x.shape != self.shape:
            return False
        if float(np.max(np.abs(x - x.T))) > tol:
            return False
        if abs(float(np.trace(x)) - 1.0) > tol:
            return False
        return float(np.linalg.eigvalsh(0.5 * (x + x.T))[0]) >= -tol


@dataclass(frozen=True)
class NuclearBall:
    shape: tuple[int, int]
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if len(self.shape) != 2:
            raise ValueError("nuclear-norm ball lives on matrices")

    def lmo(self, c):
        return lmo_nuclear_ball(c, self.radius)

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x, tol=DEFAULT_TOL) -> bool:
        x = np.asarray(x)
        if x.shape != tuple(self.shape):
            return False
        return float(np.sum(np.linalg.svd(x, compute_uv=False))) <= self.radius + tol


ConstraintSet = Union[Box, LinfBall, Spectraplex, NuclearBall]


def diameter(cset) -> float:
    return cset.diameter


def contains(cset, x, tol: float = DEFAULT_TOL) -> bool:
    return cset.contains(x, tol)


# --------------------------------------------------------------------------
# products


@dataclass
class ProductDomain:
    """Cartesian product of constraint sets with per-oracle call counters."""

    sets: Sequence
    counts: list[int] = field(init=False)

    def __post_init__(self):
        self.sets = list(self.sets)
        if not self.sets:
            raise ValueError("a product domain needs at least one set")
        self.counts = [0] * len(self.sets)
        self._lock = threading.Lock()
        self.diameters = [float(s.diameter) for s in self.sets]
        self.diameter = math.sqrt(sum(d * d for d in self.diameters))

    @property
    def m(self) -> int:
        return len(self.sets)

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        return [tuple(s.shape) for s in self.sets]

    def reset_counts(self) -> None:
        with self._lock:
            self.counts = [0] * len(self.sets)

    def lmo(self, i: int, c: np.ndarray, count: bool = True) -> np.ndarray:
        v = self.sets[i].lmo(c)
        if count:
            with self._lock:
                self.counts[i] += 1
        return v

    def lmo_product(self, g: BlockVector, J: Iterable[int], count: bool = True) -> dict[int, np.ndarray]:
        J = as_index_set(J, self.m)
        return {i: self.lmo(i, g.blocks[i], count=count) for i in J}

    def contains(self, x: BlockVector, tol: float = DEFAULT_TOL) -> bool:
        return len(x.blocks) == self.m and all(s.contains(b, tol) for s, b in zip(self.sets, x.blocks))

    def block_violations(self, x: BlockVector, tol: float = DEFAULT_TOL) -> list[int]:
        return [i for i, (s, b) in enumerate(zip(self.sets, x.blocks)) if not s.contains(b, tol)]


def lmo_product(g: BlockVector, J: Iterable[int], domain: ProductDomain, count: bool = True) -> dict[int, np.ndarray]:
    """Per-component LMOs of ``g`` for the blocks in ``J``."""
    return domain.lmo_product(g, J, count=count)
