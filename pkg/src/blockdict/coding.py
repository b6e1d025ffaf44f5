"""Block-sparse coding: greedy block-OMP and an exhaustive oracle.

Both methods report the residual as ||y - A x||_2 relative to ||y||_2
(absolute when y = 0) and break ties toward the lowest block indices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import BlockDict, BlockSparseVec
from .errors import CapacityError, RankError
from .rip import DEFAULT_ENUMERATION_CAP

DEFAULT_CODING_TOL = 1e-10

METHOD_OMP = "block-omp"
METHOD_EXHAUSTIVE = "exhaustive-oracle"


@dataclass(frozen=True)
class CodingResult:
    """A block-sparse code for a measurement vector."""

    code: BlockSparseVec
    residual_norm: float
    method: str

    def to_dict(self) -> dict:
        return {
            "support": list(self.code.support),
            "coefficients": self.code.values.tolist(),
            "residual_norm": self.residual_norm,
            "method": self.method,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _solve_on_support(
    A: BlockDict, y: np.ndarray, support, check_rank: bool = False
) -> tuple[np.ndarray, float]:
    """Least squares on the given blocks; returns (full code vector, abs residual)."""
    cols = A.restrict(support)
    sol, _, rank, _ = np.linalg.lstsq(cols, y, rcond=None)
    if check_rank and rank < cols.shape[1]:
        raise RankError(
            f"selected sub-dictionary on blocks {tuple(support)} is rank-deficient "
            f"(rank {rank} < {cols.shape[1]} columns)"
        )
    values = np.zeros(A.structure.total_dim)
    for pos, i in enumerate(sorted(support)):
        values[A.structure.block_slice(i)] = sol[
            pos * A.structure.alpha : (pos + 1) * A.structure.alpha
        ]
    return values, float(np.linalg.norm(y - cols @ sol))


def _relative(abs_residual: float, y_norm: float) -> float:
    return abs_residual if y_norm == 0 else abs_residual / y_norm


def block_omp(
    A: BlockDict, y, s: int | None = None, tol: float = DEFAULT_CODING_TOL
) -> CodingResult:
    """Greedy block orthogonal matching pursuit.

    Repeatedly selects the block whose columns correlate most with the
    current residual (Euclidean norm of the block of A^T r; ties go to the
    lowest index), re-solves least squares on all selected blocks, and
    stops once s blocks are selected, the relative residual falls to tol,
    or no block correlates with the residual at all.

    Parameters
    ----------
    A : BlockDict
        Dictionary; every block should have full column rank.
    y : array of length A.ambient_dim
    s : int, optional
        Maximum number of blocks to select; defaults to A.structure.s.
    tol : float
        Relative-residual stopping tolerance.

    Raises
    ------
    RankError
        When the selected sub-dictionary is rank-deficient.
    """
    s = A.structure.s if s is None else int(s)
    if not 1 <= s <= A.structure.K:
        raise ValueError(f"s must satisfy 1 <= s <= K, got s={s}, K={A.structure.K}")
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != A.ambient_dim:
        raise ValueError(
            f"measurement has length {y.shape[0]}, expected {A.ambient_dim}"
        )
    y_norm = float(np.linalg.norm(y))
    values = np.zeros(A.structure.total_dim)
    abs_res = y_norm
    if y_norm == 0:
        code = BlockSparseVec.from_values(A.structure, values, tol=0.0)
        return CodingResult(code, 0.0, METHOD_OMP)

    selected: list[int] = []
    residual = y.copy()
    while len(selected) < s and _relative(abs_res, y_norm) > tol:
        correlations = A.data.T @ residual
        scores = np.linalg.norm(
            correlations.reshape(A.structure.K, A.structure.alpha), axis=1
        )
        scores[[i - 1 for i in selected]] = -1.0
        best = int(np.argmax(scores))  # first max wins: lowest block index
        if scores[best] <= 0.0:
            break
        selected.append(best + 1)
        values, abs_res = _solve_on_support(A, y, selected, check_rank=True)
        residual = y - A.data @ values

    code = BlockSparseVec.from_values(A.structure, values, tol=0.0)
    return CodingResult(code, _relative(abs_res, y_norm), METHOD_OMP)


def exhaustive_code(
    A: BlockDict,
    y,
    s: int | None = None,
    tol: float = DEFAULT_CODING_TOL,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> CodingResult:
    """Minimum-residual s-block-sparse code by enumerating every support.

    Solves least squares on each of the C(K, s) size-s supports and keeps
    the smallest residual; supports whose residual is within tol of the
    minimum count as tied, and the lexicographically smallest tied support
    wins.

    Raises
    ------
    CapacityError
        When C(K, s) exceeds cap.
    """
    s = A.structure.s if s is None else int(s)
    if not 1 <= s <= A.structure.K:
        raise ValueError(f"s must satisfy 1 <= s <= K, got s={s}, K={A.structure.K}")
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != A.ambient_dim:
        raise ValueError(
            f"measurement has length {y.shape[0]}, expected {A.ambient_dim}"
        )
    K = A.structure.K
    total = math.comb(K, s)
    if total > cap:
        raise CapacityError(
            f"C({K}, {s}) = {total} supports exceeds the enumeration cap {cap}"
        )
    y_norm = float(np.linalg.norm(y))
    if y_norm == 0:
        code = BlockSparseVec.from_values(A.structure, np.zeros(A.structure.total_dim), tol=0.0)
        return CodingResult(code, 0.0, METHOD_EXHAUSTIVE)

    supports = list(combinations(range(1, K + 1), s))
    residuals = np.empty(total)
    for idx, sup in enumerate(supports):
        cols = A.restrict(sup)
        sol, _, _, _ = np.linalg.lstsq(cols, y, rcond=None)
        residuals[idx] = np.linalg.norm(y - cols @ sol)
    best_res = residuals.min()
    # first support (lexicographic order) within the tie window
    winner = int(np.nonzero(residuals <= best_res + tol * y_norm)[0][0])
    values, abs_res = _solve_on_support(A, y, supports[winner])
    code = BlockSparseVec.from_values(A.structure, values, tol=0.0)
    return CodingResult(code, _relative(abs_res, y_norm), METHOD_EXHAUSTIVE)
