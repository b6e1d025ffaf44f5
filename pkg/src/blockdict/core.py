"""Block-structured vectors, dictionaries, and support handling.

Block indices are 1-based everywhere in the public API and in serialized
output; internal storage is plain 0-based numpy. All types are immutable
after construction and all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SUPPORT_TOL = 1e-9

# A block support: strictly increasing 1-based block indices.
Support = tuple[int, ...]


@dataclass(frozen=True)
class BlockStructure:
    """Shape parameters of the block-sparse model.

    A code vector has K contiguous blocks of height alpha (flat length
    K*alpha, or a K*alpha x beta matrix when beta > 1) of which at most
    s blocks are nonzero.
    """

    K: int
    alpha: int
    s: int
    beta: int = 1

    def __post_init__(self):
        for name in ("K", "alpha", "s", "beta"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ValueError(f"{name} must be an integer, got {v!r}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        if self.beta < 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        if not 1 <= self.s <= self.K:
            raise ValueError(f"s must satisfy 1 <= s <= K, got s={self.s}, K={self.K}")

    @property
    def total_dim(self) -> int:
        return self.K * self.alpha

    def block_slice(self, i: int) -> slice:
        """Flat-index slice of block i (1-based)."""
        if not 1 <= i <= self.K:
            raise IndexError(f"block index {i} out of range 1..{self.K}")
        return slice((i - 1) * self.alpha, i * self.alpha)


def as_support(indices, K: int) -> Support:
    """Normalize a collection of 1-based block indices to a sorted tuple.

    Raises ValueError on duplicates or indices outside 1..K.
    """
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise ValueError(f"support has duplicate indices: {sorted(idx)}")
    for i in idx:
        if not 1 <= i <= K:
            raise ValueError(f"block index {i} out of range 1..{K}")
    return tuple(sorted(idx))


def _as_readonly_matrix(data) -> np.ndarray:
    arr = np.array(data, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must all be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BlockDict:
    """A dense P x K*alpha dictionary viewed as K column-blocks of width alpha."""

    structure: BlockStructure
    data: np.ndarray

    def __post_init__(self):
        arr = _as_readonly_matrix(self.data)
        if arr.shape[1] != self.structure.total_dim:
            raise ValueError(
                f"dictionary has {arr.shape[1]} columns, "
                f"expected K*alpha = {self.structure.total_dim}"
            )
        object.__setattr__(self, "data", arr)

    @property
    def ambient_dim(self) -> int:
        return self.data.shape[0]

    def block(self, i: int) -> np.ndarray:
        """Columns of block i (1-based), shape (P, alpha)."""
        return self.data[:, self.structure.block_slice(i)]

    def restrict(self, support) -> np.ndarray:
        """Columns of the blocks in `support` (sorted), shape (P, len*alpha)."""
        sup = as_support(support, self.structure.K)
        if not sup:
            return self.data[:, :0]
        return np.hstack([self.block(i) for i in sup])

    def with_block(self, i: int, block: np.ndarray) -> BlockDict:
        """A copy of this dictionary with block i replaced."""
        block = np.asarray(block, dtype=float)
        if block.shape != (self.ambient_dim, self.structure.alpha):
            raise ValueError(
                f"replacement block has shape {block.shape}, "
                f"expected {(self.ambient_dim, self.structure.alpha)}"
            )
        data = self.data.copy()
        data[:, self.structure.block_slice(i)] = block
        return BlockDict(self.structure, data)

    def block_ranks(self, tol: float = 1e-10) -> tuple[int, ...]:
        """Numerical rank of each block (singular values > tol * largest)."""
        ranks = []
        for i in range(1, self.structure.K + 1):
            svals = np.linalg.svd(self.block(i), compute_uv=False)
            top = svals[0] if svals.size else 0.0
            ranks.append(int(np.sum(svals > tol * top)) if top > 0 else 0)
        return tuple(ranks)


@dataclass(frozen=True)
class BlockSparseVec:
    """A flat K*alpha vector whose nonzero entries live in at most s blocks."""

    structure: BlockStructure
    values: np.ndarray
    support: Support

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.shape[0] != self.structure.total_dim:
            raise ValueError(
                f"vector has length {vals.shape[0]}, "
                f"expected K*alpha = {self.structure.total_dim}"
            )
        if vals.size and not np.all(np.isfinite(vals)):
            raise ValueError("vector entries must all be finite")
        vals.setflags(write=False)
        sup = as_support(self.support, self.structure.K)
        if len(sup) > self.structure.s:
            raise ValueError(
                f"support size {len(sup)} exceeds sparsity level s={self.structure.s}"
            )
        for i in range(1, self.structure.K + 1):
            blk = vals[self.structure.block_slice(i)]
            if i in sup:
                if not np.any(np.abs(blk) > 0):
                    raise ValueError(f"block {i} is in the support but is all zero")
            elif np.any(blk != 0):
                raise ValueError(f"block {i} is outside the support but nonzero")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "support", sup)

    @classmethod
    def from_values(cls, structure: BlockStructure, values, tol: float = 0.0) -> BlockSparseVec:
        """Build a block-sparse vector, detecting the support at tolerance tol.

        Entries in blocks whose max magnitude is <= tol are zeroed out.
        """
        vals = np.array(values, dtype=float).reshape(-1)
        if vals.shape[0] != structure.total_dim:
            raise ValueError(
                f"vector has length {vals.shape[0]}, expected {structure.total_dim}"
            )
        sup = block_support(vals, structure, tol=tol)
        clean = np.zeros_like(vals)
        for i in sup:
            clean[structure.block_slice(i)] = vals[structure.block_slice(i)]
        return cls(structure, clean, sup)


def make_indicator(structure: BlockStructure, i: int, j: int) -> BlockSparseVec:
    """Unit vector with a single 1 at entry j of block i (both 1-based).

    Equals the Kronecker product of the i-th standard basis vector of
    length K with the j-th standard basis vector of length alpha.
    """
    if not 1 <= i <= structure.K:
        raise IndexError(f"block index {i} out of range 1..{structure.K}")
    if not 1 <= j <= structure.alpha:
        raise IndexError(f"within-block index {j} out of range 1..{structure.alpha}")
    values = np.zeros(structure.total_dim)
    values[(i - 1) * structure.alpha + (j - 1)] = 1.0
    return BlockSparseVec(structure, values, (i,))


def block_support(v, structure: BlockStructure, tol: float = DEFAULT_SUPPORT_TOL) -> Support:
    """Indices of blocks whose max-magnitude entry exceeds tol (1-based)."""
    if tol < 0:
        raise ValueError(f"tol must be nonnegative, got {tol}")
    vals = np.asarray(v, dtype=float).reshape(-1)
    if vals.shape[0] != structure.total_dim:
        raise ValueError(
            f"vector has length {vals.shape[0]}, expected K*alpha = {structure.total_dim}"
        )
    per_block = np.abs(vals).reshape(structure.K, structure.alpha).max(axis=1)
    return tuple(int(i) + 1 for i in np.nonzero(per_block > tol)[0])


def split_columns(code, structure: BlockStructure) -> list[np.ndarray]:
    """Split a K*alpha x beta code matrix into its beta columns.

    Reduces the beta > 1 model to beta independent flat vectors;
    stacking the outputs column-wise reproduces the input.
    """
    arr = np.asarray(code, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.shape != (structure.total_dim, structure.beta):
        raise ValueError(
            f"code has shape {arr.shape}, expected "
            f"{(structure.total_dim, structure.beta)}"
        )
    return [arr[:, c].copy() for c in range(structure.beta)]
