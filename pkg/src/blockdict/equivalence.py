"""Dictionary equivalence up to block permutation and block-diagonal mixing.

Two block dictionaries A and B are equivalent when A equals B after
permuting whole blocks and multiplying each block by an invertible
alpha x alpha matrix. `recover_equivalence` produces a certificate for
that relation by matching block spans and solving per-block least
squares; `construct_kappa` probes the support-to-support correspondence
induced by exact block-sparse coding.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .coding import DEFAULT_CODING_TOL, exhaustive_code
from .core import BlockDict, BlockStructure, Support, as_support
from .errors import HypothesisViolationError, RankError
from .rip import (
    DEFAULT_ENUMERATION_CAP,
    RipReport,
    rip_constant_exact,
    rip_lower_bound_sampled,
)
from .subspace import DEFAULT_RANK_TOL, orthonormal_basis, spans_equal

DEFAULT_CERTIFICATE_TOL = 1e-6
DEFAULT_INVERTIBILITY_TOL = 1e-8

STATUS_EQUIVALENT = "equivalent"
STATUS_NOT_EQUIVALENT = "not-equivalent"
STATUS_AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class BlockPermutation:
    """A bijection on block indices 1..K, stored as the tuple (pi(1), ..., pi(K))."""

    K: int
    pi: tuple[int, ...]

    def __post_init__(self):
        pi = tuple(int(v) for v in self.pi)
        if len(pi) != self.K or sorted(pi) != list(range(1, self.K + 1)):
            raise ValueError(f"pi must be a permutation of 1..{self.K}, got {pi}")
        object.__setattr__(self, "pi", pi)

    @classmethod
    def identity(cls, K: int) -> BlockPermutation:
        return cls(K, tuple(range(1, K + 1)))

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.K:
            raise IndexError(f"block index {i} out of range 1..{self.K}")
        return self.pi[i - 1]

    def inverse(self) -> BlockPermutation:
        inv = [0] * self.K
        for i, v in enumerate(self.pi, start=1):
            inv[v - 1] = i
        return BlockPermutation(self.K, tuple(inv))


@dataclass(frozen=True)
class BlockDiagonal:
    """K square alpha x alpha blocks acting block-wise on code vectors."""

    structure: BlockStructure
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        alpha = self.structure.alpha
        if len(self.blocks) != self.structure.K:
            raise ValueError(
                f"expected {self.structure.K} blocks, got {len(self.blocks)}"
            )
        frozen = []
        for idx, blk in enumerate(self.blocks, start=1):
            arr = np.array(blk, dtype=float)
            if arr.shape != (alpha, alpha):
                raise ValueError(
                    f"block {idx} has shape {arr.shape}, expected {(alpha, alpha)}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"block {idx} has non-finite entries")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "blocks", tuple(frozen))

    def is_invertible(self, tol: float = DEFAULT_INVERTIBILITY_TOL) -> bool:
        """All blocks have smallest singular value above tol times the largest."""
        for blk in self.blocks:
            svals = np.linalg.svd(blk, compute_uv=False)
            if svals[0] == 0 or svals[-1] <= tol * svals[0]:
                return False
        return True

    def dense(self) -> np.ndarray:
        """The full K*alpha x K*alpha block-diagonal matrix."""
        n = self.structure.total_dim
        out = np.zeros((n, n))
        for i in range(self.structure.K):
            sl = self.structure.block_slice(i + 1)
            out[sl, sl] = self.blocks[i]
        return out


@dataclass(frozen=True)
class MatchReport:
    """Outcome of span-matching the blocks of A against the blocks of B."""

    status: str
    permutation: BlockPermutation | None
    matches: dict[int, tuple[int, ...]]
    unmatched: tuple[int, ...]
    ambiguous: tuple[int, ...]


@dataclass(frozen=True)
class EquivalenceCertificate:
    """A witness (permutation, block transforms, residual) for A ~ B."""

    status: str
    permutation: BlockPermutation | None
    diagonal: BlockDiagonal | None
    residual: float | None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "pi": list(self.permutation.pi) if self.permutation else None,
            "D_blocks": (
                [blk.tolist() for blk in self.diagonal.blocks] if self.diagonal else None
            ),
            "residual": self.residual,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _check_same_shape(A: BlockDict, B: BlockDict) -> None:
    if A.ambient_dim != B.ambient_dim:
        raise ValueError(
            f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}"
        )
    if (A.structure.K, A.structure.alpha) != (B.structure.K, B.structure.alpha):
        raise ValueError(
            f"block structures differ: K={A.structure.K}, alpha={A.structure.alpha} "
            f"vs K={B.structure.K}, alpha={B.structure.alpha}"
        )


def match_blocks(A: BlockDict, B: BlockDict, tol: float = DEFAULT_RANK_TOL) -> MatchReport:
    """Match each block of A to the block of B spanning the same subspace.

    Every block of A must match exactly one block of B, and no two blocks
    of A may land on the same target. Blocks with several span-equal
    targets mark the report ambiguous (B has duplicated spans, which a
    restricted isometry constant below 1 rules out); blocks with none, or
    a non-injective assignment, mark it not-equivalent.
    """
    _check_same_shape(A, B)
    K = A.structure.K
    a_bases = [orthonormal_basis(A.block(i), tol) for i in range(1, K + 1)]
    b_bases = [orthonormal_basis(B.block(j), tol) for j in range(1, K + 1)]
    matches: dict[int, tuple[int, ...]] = {}
    for i in range(1, K + 1):
        matches[i] = tuple(
            j for j in range(1, K + 1) if spans_equal(a_bases[i - 1], b_bases[j - 1], tol)
        )
    unmatched = tuple(i for i in range(1, K + 1) if len(matches[i]) == 0)
    ambiguous = tuple(i for i in range(1, K + 1) if len(matches[i]) > 1)
    if ambiguous:
        return MatchReport(STATUS_AMBIGUOUS, None, matches, unmatched, ambiguous)
    if unmatched:
        return MatchReport(STATUS_NOT_EQUIVALENT, None, matches, unmatched, ambiguous)
    targets = [matches[i][0] for i in range(1, K + 1)]
    if len(set(targets)) != K:
        return MatchReport(STATUS_NOT_EQUIVALENT, None, matches, unmatched, ambiguous)
    return MatchReport(
        "matched", BlockPermutation(K, tuple(targets)), matches, unmatched, ambiguous
    )


def solve_block_transform(
    A_block, B_block, rank_tol: float = DEFAULT_RANK_TOL
) -> tuple[np.ndarray, float]:
    """Least-squares alpha x alpha transform M minimizing ||A_block - B_block M||_F.

    Returns (M, relative Frobenius residual). Raises RankError when
    B_block is column-rank-deficient.
    """
    A_block = np.asarray(A_block, dtype=float)
    B_block = np.asarray(B_block, dtype=float)
    if A_block.shape != B_block.shape or A_block.ndim != 2:
        raise ValueError(
            f"blocks must share shape P x alpha, got {A_block.shape} and {B_block.shape}"
        )
    svals = np.linalg.svd(B_block, compute_uv=False)
    if svals[0] == 0 or svals[-1] <= rank_tol * svals[0]:
        raise RankError("target block is rank-deficient")
    M, _, _, _ = np.linalg.lstsq(B_block, A_block, rcond=None)
    err = float(np.linalg.norm(A_block - B_block @ M, "fro"))
    denom = float(np.linalg.norm(A_block, "fro"))
    return M, (err if denom == 0 else err / denom)


def recover_equivalence(
    A: BlockDict,
    B: BlockDict,
    tol: float = DEFAULT_CERTIFICATE_TOL,
    span_tol: float = DEFAULT_RANK_TOL,
    invertibility_tol: float = DEFAULT_INVERTIBILITY_TOL,
) -> EquivalenceCertificate:
    """Recover a permutation and block transforms carrying B onto A.

    Matches block spans, then solves one least-squares transform per
    matched pair. The certificate is `equivalent` only when the matching
    is a bijection, every transform is invertible, and the worst relative
    block residual is at most tol. Match failures surface as certificate
    statuses, never exceptions.
    """
    report = match_blocks(A, B, span_tol)
    if report.status != "matched":
        return EquivalenceCertificate(report.status, None, None, None)
    perm = report.permutation
    blocks = []
    residual = 0.0
    for i in range(1, A.structure.K + 1):
        M, rel = solve_block_transform(A.block(i), B.block(perm(i)), span_tol)
        blocks.append(M)
        residual = max(residual, rel)
    diag = BlockDiagonal(A.structure, tuple(blocks))
    ok = diag.is_invertible(invertibility_tol) and residual <= tol
    status = STATUS_EQUIVALENT if ok else STATUS_NOT_EQUIVALENT
    return EquivalenceCertificate(status, perm, diag, float(residual))


def apply_transform(B: BlockDict, perm: BlockPermutation, D: BlockDiagonal) -> BlockDict:
    """The dictionary whose block i equals B_{perm(i)} @ D_i."""
    if perm.K != B.structure.K:
        raise ValueError(f"permutation is on {perm.K} blocks, dictionary has {B.structure.K}")
    if (D.structure.K, D.structure.alpha) != (B.structure.K, B.structure.alpha):
        raise ValueError("block-diagonal structure does not match the dictionary")
    data = np.empty_like(B.data)
    for i in range(1, B.structure.K + 1):
        data[:, B.structure.block_slice(i)] = B.block(perm(i)) @ D.blocks[i - 1]
    return BlockDict(B.structure, data)


def make_equivalent_dict(
    A: BlockDict, perm: BlockPermutation, D: BlockDiagonal
) -> BlockDict:
    """Build B with apply_transform(B, perm, D) equal to A.

    Block perm(i) of B is A_i @ inv(D_i); D must be invertible.
    """
    if perm.K != A.structure.K:
        raise ValueError(f"permutation is on {perm.K} blocks, dictionary has {A.structure.K}")
    if not D.is_invertible():
        raise ValueError("all transform blocks must be invertible")
    data = np.empty_like(A.data)
    for i in range(1, A.structure.K + 1):
        data[:, A.structure.block_slice(perm(i))] = A.block(i) @ np.linalg.inv(
            D.blocks[i - 1]
        )
    return BlockDict(A.structure, data)


def compose_transforms(
    p1: BlockPermutation,
    D1: BlockDiagonal,
    p2: BlockPermutation,
    D2: BlockDiagonal,
) -> tuple[BlockPermutation, BlockDiagonal]:
    """The single transform equal to applying (p1, D1) then (p2, D2).

    apply_transform(apply_transform(B, p1, D1), p2, D2) equals
    apply_transform(B, q, F) for the returned (q, F).
    """
    if p1.K != p2.K:
        raise ValueError("permutations act on different block counts")
    q = BlockPermutation(p1.K, tuple(p1(p2(i)) for i in range(1, p1.K + 1)))
    blocks = tuple(
        D1.blocks[p2(i) - 1] @ D2.blocks[i - 1] for i in range(1, p1.K + 1)
    )
    return q, BlockDiagonal(D1.structure, blocks)


@dataclass(frozen=True)
class KappaResult:
    """Support correspondence found by probing one source support."""

    source: Support
    kappa: Support
    consistent: bool
    probe_supports: tuple[Support, ...]

    def to_dict(self) -> dict:
        return {
            "support": list(self.source),
            "kappa": list(self.kappa),
            "consistent": self.consistent,
            "probe_supports": [list(p) for p in self.probe_supports],
        }


def construct_kappa(
    A: BlockDict,
    B: BlockDict,
    S,
    n_probes: int = 8,
    seed: int = 0,
    tol: float = 1e-8,
) -> KappaResult:
    """Find the B-support spanning the same measurements as the A-blocks in S.

    Draws n_probes random coefficient vectors supported on S (stream
    derived from seed and S), measures y = A t, and exactly codes each y
    in B at block-sparsity |S|. If every probe decodes to the same
    support, that support is returned with the consistency flag set;
    otherwise the majority support is returned with the flag cleared.

    Raises
    ------
    HypothesisViolationError
        When some probe admits no |S|-block-sparse code in B within tol:
        B cannot reproduce A's measurements on this support.
    """
    _check_same_shape(A, B)
    sup = as_support(S, A.structure.K)
    if not sup:
        raise ValueError("support must be nonempty")
    if n_probes < 1:
        raise ValueError(f"n_probes must be >= 1, got {n_probes}")
    rng = np.random.default_rng([int(seed), *sup])
    probe_supports: list[Support] = []
    for p in range(n_probes):
        t = np.zeros(A.structure.total_dim)
        for i in sup:
            t[A.structure.block_slice(i)] = rng.standard_normal(A.structure.alpha)
        y = A.data @ t
        result = exhaustive_code(B, y, s=len(sup), tol=min(tol, DEFAULT_CODING_TOL))
        if result.residual_norm > tol:
            raise HypothesisViolationError(
                f"probe {p} on support {sup} has no {len(sup)}-block-sparse code in B "
                f"(relative residual {result.residual_norm:.3e} > {tol:.1e})"
            )
        probe_supports.append(result.code.support)
    counts = Counter(probe_supports)
    consistent = len(counts) == 1
    # majority support; ties go to the lexicographically smallest
    top = max(counts.values())
    winner = min(sup_ for sup_, c in counts.items() if c == top)
    return KappaResult(sup, winner, consistent, tuple(probe_supports))


@dataclass(frozen=True)
class TheoremReport:
    """End-to-end identifiability check for a dictionary pair."""

    rip: RipReport
    hypothesis_supports: tuple[dict, ...]
    hypothesis_holds: bool
    certificate: EquivalenceCertificate
    kappa_singletons: tuple[dict, ...]
    agreement: bool | None

    def to_dict(self) -> dict:
        return {
            "rip": self.rip.to_dict(),
            "hypothesis": {
                "supports_checked": len(self.hypothesis_supports),
                "holds": self.hypothesis_holds,
                "details": list(self.hypothesis_supports),
            },
            "conclusion": self.certificate.to_dict(),
            "agreement": {
                "kappa_singletons": list(self.kappa_singletons),
                "pi": list(self.certificate.permutation.pi)
                if self.certificate.permutation
                else None,
                "equal": self.agreement,
            },
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def verify_theorem_instance(
    A: BlockDict,
    B: BlockDict,
    s: int | None = None,
    n_probes: int = 8,
    seed: int = 0,
    tol: float = DEFAULT_CERTIFICATE_TOL,
    probe_tol: float = 1e-8,
    max_supports: int = 128,
    rip_cap: int = DEFAULT_ENUMERATION_CAP,
) -> TheoremReport:
    """Check that block-sparse representability of B implies equivalence to A.

    The report carries (1) the restricted isometry constant of A at level
    min(2s, K), (2) a hypothesis section probing construct_kappa on a
    family of size-s supports (all of them when there are at most
    max_supports, else a seeded sample), (3) the recovered equivalence
    certificate, and (4) whether kappa restricted to singletons equals the
    recovered permutation. All findings are report fields; probe failures
    are recorded, not raised.
    """
    _check_same_shape(A, B)
    s = A.structure.s if s is None else int(s)
    K = A.structure.K
    if not 1 <= s <= K:
        raise ValueError(f"s must satisfy 1 <= s <= K, got s={s}, K={K}")

    level = min(2 * s, K)
    if math.comb(K, level) <= rip_cap:
        rip = rip_constant_exact(A, level, cap=rip_cap)
    else:
        rip = rip_lower_bound_sampled(A, level, n_samples=200, seed=seed)

    total = math.comb(K, s)
    if total <= max_supports:
        family = list(combinations(range(1, K + 1), s))
    else:
        rng = np.random.default_rng(seed)
        picked: set[Support] = set()
        while len(picked) < max_supports:
            picked.add(
                tuple(sorted(int(i) + 1 for i in rng.choice(K, size=s, replace=False)))
            )
        family = sorted(picked)

    hypothesis: list[dict] = []
    holds = True
    for sup in family:
        try:
            res = construct_kappa(A, B, sup, n_probes=n_probes, seed=seed, tol=probe_tol)
            entry = {
                "support": list(sup),
                "kappa": list(res.kappa),
                "consistent": res.consistent,
            }
            holds = holds and res.consistent
        except HypothesisViolationError as exc:
            entry = {"support": list(sup), "error": str(exc)}
            holds = False
        hypothesis.append(entry)

    certificate = recover_equivalence(A, B, tol)

    singles: list[dict] = []
    singleton_map: dict[int, Support] = {}
    for i in range(1, K + 1):
        try:
            res = construct_kappa(A, B, (i,), n_probes=n_probes, seed=seed, tol=probe_tol)
            singles.append(
                {"support": [i], "kappa": list(res.kappa), "consistent": res.consistent}
            )
            if res.consistent:
                singleton_map[i] = res.kappa
        except HypothesisViolationError as exc:
            singles.append({"support": [i], "error": str(exc)})

    if certificate.permutation is None or len(singleton_map) < K:
        agreement = None if certificate.permutation is None else False
    else:
        agreement = all(
            singleton_map[i] == (certificate.permutation(i),) for i in range(1, K + 1)
        )

    return TheoremReport(rip, tuple(hypothesis), holds, certificate, tuple(singles), agreement)
