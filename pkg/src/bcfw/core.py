"""Block-structured points of a product space.

A :class:`BlockVector` holds one dense float64 array per component. Block
indices are 0-based throughout the package.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class BlockShapeError(ValueError):
    """Raised when block counts or block shapes disagree."""


def as_index_set(indices: Iterable[int], m: int) -> tuple[int, ...]:
    """Normalize ``indices`` to a sorted tuple of distinct block indices.

    Raises
    ------
    ValueError
        If the set is empty or an index falls outside ``range(m)``.
    """
    out = tuple(sorted(set(int(i) for i in indices)))
    if not out:
        raise ValueError("block index set must be nonempty")
    if out[0] < 0 or out[-1] >= m:
        raise ValueError(f"block indices {out} out of range for m={m}")
    return out


class BlockVector:
    """A point ``x = (x^0, ..., x^{m-1})`` of a direct sum of spaces.

    Each block is a float64 vector or matrix. The number of blocks and
    their shapes are fixed at construction.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: Sequence[np.ndarray], copy: bool = True):
        if len(blocks) == 0:
            raise BlockShapeError("a BlockVector needs at least one block")
        arrs = []
        for b in blocks:
            a = np.array(b, dtype=np.float64) if copy else np.asarray(b, dtype=np.float64)
            if a.ndim not in (1, 2):
                raise BlockShapeError("blocks must be vectors or matrices")
            if not np.all(np.isfinite(a)):
                raise ValueError("BlockVector entries must be finite")
            arrs.append(a)
        self.blocks = arrs

    @classmethod
    def wrap(cls, blocks: Sequence[np.ndarray]) -> "BlockVector":
        """Wrap existing float64 arrays without copying or validation."""
        obj = cls.__new__(cls)
        obj.blocks = list(blocks)
        return obj

    @classmethod
    def zeros(cls, shapes: Sequence[tuple[int, ...]]) -> "BlockVector":
        return cls([np.zeros(s) for s in shapes], copy=False)

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        return [b.shape for b in self.blocks]

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.blocks[i]

    def __iter__(self):
        return iter(self.blocks)

    def copy(self) -> "BlockVector":
        return BlockVector.wrap([b.copy() for b in self.blocks])

    def flatten(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.blocks])

    def __sub__(self, other: "BlockVector") -> "BlockVector":
        _check_shapes(self, other)
        return BlockVector([a - b for a, b in zip(self.blocks, other.blocks)], copy=False)

    def __add__(self, other: "BlockVector") -> "BlockVector":
        _check_shapes(self, other)
        return BlockVector([a + b for a, b in zip(self.blocks, other.blocks)], copy=False)

    def __mul__(self, alpha: float) -> "BlockVector":
        return BlockVector([alpha * b for b in self.blocks], copy=False)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"BlockVector(shapes={self.shapes})"


def _check_shapes(x: BlockVector, y: BlockVector) -> None:
    if len(x.blocks) != len(y.blocks):
        raise BlockShapeError(f"block counts differ: {len(x.blocks)} vs {len(y.blocks)}")
    for i, (a, b) in enumerate(zip(x.blocks, y.blocks)):
        if a.shape != b.shape:
            raise BlockShapeError(f"block {i}: shape {a.shape} vs {b.shape}")


def inner(x: BlockVector, y: BlockVector) -> float:
    """Sum of blockwise Euclidean/Frobenius inner products."""
    _check_shapes(x, y)
    return float(sum(np.vdot(a, b) for a, b in zip(x.blocks, y.blocks)))


def norm_sq_on(x: BlockVector, J: Iterable[int]) -> float:
    """Squared norm of the part of ``x`` living in the blocks ``J``."""
    return float(sum(np.vdot(x.blocks[i], x.blocks[i]) for i in J))


def norm_sq(x: BlockVector) -> float:
    return norm_sq_on(x, range(len(x.blocks)))


def blend_block(x: BlockVector, i: int, v_i: np.ndarray, gamma: float) -> None:
    """Replace block ``i`` of ``x`` in place by ``(1 - gamma) x^i + gamma v^i``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma={gamma} outside [0, 1]")
    xi = x.blocks[i]
    if xi.shape != np.shape(v_i):
        raise BlockShapeError(f"block {i}: shape {xi.shape} vs {np.shape(v_i)}")
    if gamma == 0.0:
        return
    if gamma == 1.0:
        xi[...] = v_i
        return
    xi += gamma * (v_i - xi)


def blended(x: BlockVector, i: int, v_i: np.ndarray, gamma: float) -> BlockVector:
    """Copying variant of :func:`blend_block`."""
    y = x.copy()
    blend_block(y, i, v_i, gamma)
    return y
