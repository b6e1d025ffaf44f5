"""Span algebra over column-blocks.

Subspaces are carried as orthonormal bases obtained from the SVD with a
relative rank tolerance. Span equality is decided through principal
angles; two spans of equal dimension are equal when every principal
cosine is at least 1 - tol, i.e. every principal angle is below
arccos(1 - tol) ~ sqrt(2 tol).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import BlockDict, as_support
from .errors import CapacityError
from .rip import DEFAULT_ENUMERATION_CAP

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class SubspaceBasis:
    """An orthonormal basis for a subspace of R^ambient_dim."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        arr = np.array(self.basis, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != self.ambient_dim:
            raise ValueError(
                f"basis must be {self.ambient_dim} x dim, got shape {arr.shape}"
            )
        if arr.shape[1]:
            gram = arr.T @ arr
            if not np.allclose(gram, np.eye(arr.shape[1]), atol=1e-8):
                raise ValueError("basis columns are not orthonormal")
        arr.setflags(write=False)
        object.__setattr__(self, "basis", arr)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def orthonormal_basis(M, tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Orthonormal basis of the column span of M.

    Rank is the number of singular values above tol times the largest;
    an all-zero or empty M yields a dimension-0 basis.
    """
    arr = np.asarray(M, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {arr.shape}")
    if arr.shape[1] == 0:
        return SubspaceBasis(arr.shape[0], arr[:, :0])
    U, svals, _ = np.linalg.svd(arr, full_matrices=False)
    top = svals[0] if svals.size else 0.0
    rank = int(np.sum(svals > tol * top)) if top > 0 else 0
    return SubspaceBasis(arr.shape[0], U[:, :rank])


def principal_cosines(Q1: SubspaceBasis, Q2: SubspaceBasis) -> np.ndarray:
    """Cosines of the principal angles between two subspaces, descending."""
    if Q1.ambient_dim != Q2.ambient_dim:
        raise ValueError(
            f"ambient dimensions differ: {Q1.ambient_dim} vs {Q2.ambient_dim}"
        )
    if Q1.dim == 0 or Q2.dim == 0:
        return np.empty(0)
    cos = np.linalg.svd(Q1.basis.T @ Q2.basis, compute_uv=False)
    return np.clip(cos, 0.0, 1.0)


def spans_equal(M1, M2, tol: float = DEFAULT_RANK_TOL) -> bool:
    """Whether the column spans of M1 and M2 coincide.

    True iff both spans have the same dimension d (at rank tolerance tol)
    and all d principal cosines are >= 1 - tol.
    """
    Q1 = M1 if isinstance(M1, SubspaceBasis) else orthonormal_basis(M1, tol)
    Q2 = M2 if isinstance(M2, SubspaceBasis) else orthonormal_basis(M2, tol)
    if Q1.ambient_dim != Q2.ambient_dim:
        raise ValueError(
            f"ambient dimensions differ: {Q1.ambient_dim} vs {Q2.ambient_dim}"
        )
    if Q1.dim != Q2.dim:
        return False
    if Q1.dim == 0:
        return True
    return bool(principal_cosines(Q1, Q2).min() >= 1.0 - tol)


def subspace_intersection(M1, M2, tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Orthonormal basis of the intersection of two column spans.

    Principal vectors whose cosine is >= 1 - tol are kept; a dimension-0
    intersection is a valid (empty) basis, never an error.
    """
    Q1 = M1 if isinstance(M1, SubspaceBasis) else orthonormal_basis(M1, tol)
    Q2 = M2 if isinstance(M2, SubspaceBasis) else orthonormal_basis(M2, tol)
    if Q1.ambient_dim != Q2.ambient_dim:
        raise ValueError(
            f"ambient dimensions differ: {Q1.ambient_dim} vs {Q2.ambient_dim}"
        )
    if Q1.dim == 0 or Q2.dim == 0:
        return SubspaceBasis(Q1.ambient_dim, Q1.basis[:, :0])
    U, cos, _ = np.linalg.svd(Q1.basis.T @ Q2.basis)
    keep = np.clip(cos, 0.0, 1.0) >= 1.0 - tol
    return SubspaceBasis(Q1.ambient_dim, Q1.basis @ U[:, : int(np.sum(keep))])


def check_lemma1(
    A: BlockDict,
    s: int | None = None,
    tol: float = DEFAULT_RANK_TOL,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> bool:
    """Whether all distinct size-s block supports of A span distinct subspaces.

    This is the span-separation property that a restricted isometry
    constant below 1 at level 2s guarantees.

    Raises CapacityError when C(K, s)^2 exceeds cap.
    """
    s = A.structure.s if s is None else int(s)
    K = A.structure.K
    if not 1 <= s <= K:
        raise ValueError(f"s must satisfy 1 <= s <= K, got s={s}, K={K}")
    n_supports = math.comb(K, s)
    if n_supports * n_supports > cap:
        raise CapacityError(
            f"C({K}, {s})^2 = {n_supports ** 2} pairs exceeds the enumeration cap {cap}"
        )
    supports = list(combinations(range(1, K + 1), s))
    bases = [orthonormal_basis(A.restrict(sup), tol) for sup in supports]
    for a, b in combinations(range(len(supports)), 2):
        if spans_equal(bases[a], bases[b], tol):
            return False
    return True


def check_lemma2(A: BlockDict, S, S2, tol: float = DEFAULT_RANK_TOL) -> bool:
    """Whether Span{A_S} intersected with Span{A_S2} equals Span{A_(S & S2)}.

    Both supports must have size s. Disjoint supports make the right-hand
    span trivial, so the check passes exactly when the computed
    intersection has dimension 0.
    """
    s = A.structure.s
    sup1 = as_support(S, A.structure.K)
    sup2 = as_support(S2, A.structure.K)
    if len(sup1) != s or len(sup2) != s:
        raise ValueError(
            f"both supports must have size s={s}, got {len(sup1)} and {len(sup2)}"
        )
    inter = subspace_intersection(A.restrict(sup1), A.restrict(sup2), tol)
    common = tuple(sorted(set(sup1) & set(sup2)))
    if not common:
        return inter.dim == 0
    return spans_equal(inter, orthonormal_basis(A.restrict(common), tol), tol)
