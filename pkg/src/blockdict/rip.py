"""Block restricted isometry constants.

For a support T the constant is delta_T = max(lmax(G) - 1, 1 - lmin(G))
where G is the Gram matrix of the columns of the blocks in T, so that
(1 - delta) ||x||^2 <= ||A x||^2 <= (1 + delta) ||x||^2 holds for every x
supported on T. The level-t constant is the max of delta_T over all
t-element supports, computed by exact enumeration or bounded from below
by seeded sampling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import BlockDict, Support, as_support
from .errors import CapacityError

DEFAULT_ENUMERATION_CAP = 10**6

MODE_EXACT = "exact-enumeration"
MODE_SAMPLED = "sampled-lower-bound"


@dataclass(frozen=True)
class RipReport:
    """Result of a level-t restricted isometry computation."""

    level: int
    delta: float
    mode: str
    worst_support: Support
    supports_examined: int

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "delta": self.delta,
            "mode": self.mode,
            "worst_support": list(self.worst_support),
            "supports_examined": self.supports_examined,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def rip_constant_for_support(A: BlockDict, T) -> float:
    """Restricted isometry constant of the columns of A restricted to blocks T.

    The value is invariant under reordering of T. Eigenvalues are reported
    as computed; values within floating error of the unit interval boundary
    are not rounded.
    """
    sup = as_support(T, A.structure.K)
    if not sup:
        raise ValueError("support must be nonempty")
    cols = A.restrict(sup)
    gram = cols.T @ cols
    eigs = np.linalg.eigvalsh(gram)
    return float(max(eigs[-1] - 1.0, 1.0 - eigs[0]))


def rip_constant_exact(
    A: BlockDict, t: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> RipReport:
    """Level-t constant by enumerating all C(K, t) supports.

    Parameters
    ----------
    A : BlockDict
    t : int
        Support size to examine, 1 <= t <= K.
    cap : int
        Refuse enumeration when C(K, t) exceeds this count.

    Returns
    -------
    RipReport
        delta is the max over supports; worst_support is the first support
        (in lexicographic order) attaining it.

    Raises
    ------
    CapacityError
        If C(K, t) > cap; use `rip_lower_bound_sampled` instead.
    """
    K = A.structure.K
    if not 1 <= t <= K:
        raise ValueError(f"level t must satisfy 1 <= t <= K, got t={t}, K={K}")
    total = math.comb(K, t)
    if total > cap:
        raise CapacityError(
            f"C({K}, {t}) = {total} supports exceeds the enumeration cap {cap}; "
            "use rip_lower_bound_sampled"
        )
    best = -np.inf
    worst: Support = ()
    for sup in combinations(range(1, K + 1), t):
        d = rip_constant_for_support(A, sup)
        if d > best:
            best = d
            worst = sup
    return RipReport(t, float(best), MODE_EXACT, worst, total)


def rip_lower_bound_sampled(
    A: BlockDict, t: int, n_samples: int, seed: int
) -> RipReport:
    """Lower bound on the level-t constant from sampled supports.

    Draws distinct supports uniformly at random (deterministically from
    `seed`) and maximizes over them, so the result never exceeds the exact
    constant. When n_samples >= C(K, t) every support is examined and the
    bound is tight.
    """
    K = A.structure.K
    if not 1 <= t <= K:
        raise ValueError(f"level t must satisfy 1 <= t <= K, got t={t}, K={K}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    total = math.comb(K, t)
    best = -np.inf
    worst: Support = ()
    if n_samples >= total:
        for sup in combinations(range(1, K + 1), t):
            d = rip_constant_for_support(A, sup)
            if d > best:
                best = d
                worst = sup
        examined = total
    else:
        rng = np.random.default_rng(seed)
        seen: set[Support] = set()
        while len(seen) < n_samples:
            sup = tuple(sorted(int(i) + 1 for i in rng.choice(K, size=t, replace=False)))
            if sup in seen:
                continue
            seen.add(sup)
            d = rip_constant_for_support(A, sup)
            if d > best:
                best = d
                worst = sup
        examined = len(seen)
    return RipReport(t, float(best), MODE_SAMPLED, worst, examined)
