"""Smooth objectives on block vectors.

Users plug in their own problems by subclassing :class:`SmoothObjective`
(or by passing any object with ``value``, ``gradient`` and an optional
``lipschitz`` attribute). Two objectives from the experiments ship here:
the squared distance between two blocks, and a difference of convex
quadratics acting on a stack of row blocks and one matrix block.
"""

from __future__ import annotations

import numpy as np

from .core import BlockShapeError, BlockVector


class SmoothObjective:
    """Interface for differentiable objectives.

    Subclasses implement :meth:`value` and :meth:`gradient`; ``lipschitz``
    holds a smoothness constant when one is known.
    """

    lipschitz: float | None = None

    def value(self, x: BlockVector) -> float:
        raise NotImplementedError

    def gradient(self, x: BlockVector) -> BlockVector:
        raise NotImplementedError


class QuadraticDistance(SmoothObjective):
    """``f(x) = 0.5 ||x^0 - x^1||^2`` on two blocks of equal shape."""

    lipschitz = 2.0

    @staticmethod
    def _check(x: BlockVector) -> None:
        if len(x.blocks) != 2 or x.blocks[0].shape != x.blocks[1].shape:
            raise BlockShapeError("QuadraticDistance needs two blocks of equal shape")

    def value(self, x):
        self._check(x)
        d = x.blocks[0] - x.blocks[1]
        return 0.5 * float(np.vdot(d, d))

    def gradient(self, x):
        self._check(x)
        d = x.blocks[0] - x.blocks[1]
        return BlockVector([d, -d], copy=False)


def cqd_lipschitz(A: np.ndarray, B: np.ndarray) -> float:
    """Frobenius norm of ``A - B``."""
    return float(np.linalg.norm(np.asarray(A, float) - np.asarray(B, float)))


class CollatedQuadraticDifference(SmoothObjective):
    """``f(x) = 0.5 (<X, X A> - <X, X B>)`` with ``X`` the collated matrix.

    ``x`` has ``n + 1`` blocks: ``n`` row vectors of length ``n`` followed
    by one ``n x n`` matrix. Stacking them gives the ``2n x n`` matrix ``X``.
    With ``M = A - B`` the gradient is ``X M`` split back into blocks.
    """

    def __init__(self, A: np.ndarray, B: np.ndarray):
        A = np.asarray(A, dtype=np.float64)
        B = np.asarray(B, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise ValueError("A and B must be square matrices of the same size")
        self.A = A
        self.B = B
        self.n = A.shape[0]
        self.M = A - B
        self.lipschitz = cqd_lipschitz(A, B)

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        n = self.n
        return [(n,)] * n + [(n, n)]

    def is_indefinite(self) -> bool:
        w = np.linalg.eigvalsh(0.5 * (self.M + self.M.T))
        return bool(w[0] < 0 < w[-1])

    def collate(self, x: BlockVector) -> np.ndarray:
        n = self.n
        if len(x.blocks) != n + 1:
            raise BlockShapeError(f"expected {n + 1} blocks, got {len(x.blocks)}")
        for i, b in enumerate(x.blocks[:n]):
            if b.shape != (n,):
                raise BlockShapeError(f"row block {i} has shape {b.shape}, expected ({n},)")
        if x.blocks[n].shape != (n, n):
            raise BlockShapeError(f"matrix block has shape {x.blocks[n].shape}")
        return np.vstack([np.stack(x.blocks[:n]), x.blocks[n]])

    def decollate(self, X: np.ndarray) -> BlockVector:
        n = self.n
        return BlockVector([X[i].copy() for i in range(n)] + [X[n:].copy()], copy=False)

    def value(self, x):
        X = self.collate(x)
        return 0.5 * float(np.vdot(X, X @ self.M))

    def gradient(self, x):
        return self.decollate(self.collate(x) @ self.M)


def finite_diff_check(obj, x: BlockVector, h: float = 1e-5) -> float:
    """Largest relative discrepancy between ``obj.gradient`` and central differences.

    Each coordinate's error is scaled by ``max(1, ||grad||_inf)``.
    """
    g = obj.gradient(x).flatten()
    y = x.copy()
    fd = np.empty_like(g)
    pos = 0
    for b in y.blocks:
        flat = b.reshape(-1)
        for j in range(flat.size):
            old = flat[j]
            flat[j] = old + h
            fp = obj.value(y)
            flat[j] = old - h
            fm = obj.value(y)
            flat[j] = old
            fd[pos] = (fp - fm) / (2.0 * h)
            pos += 1
    scale = max(1.0, float(np.max(np.abs(g), initial=0.0)))
    return float(np.max(np.abs(fd - g), initial=0.0)) / scale


def psd_project(W: np.ndarray) -> np.ndarray:
    """Nearest symmetric PSD matrix to ``W`` in Frobenius norm."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("psd_project needs a square matrix")
    S = 0.5 * (W + W.T)
    w, V = np.linalg.eigh(S)
    P = (V * np.clip(w, 0.0, None)) @ V.T
    return 0.5 * (P + P.T)
