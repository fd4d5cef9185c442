"""Partitions, multi-indices and the counting constants that index powersums.

Partitions index products of scalar powersums, ``p_lambda = prod_i p_{lambda_i}``.
Multi-indices (weak compositions of length ``D``) index the multisymmetric
powersums.  Multi-indices are plain tuples of ints throughout the package.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Optional, Sequence, Tuple

MultiIndex = Tuple[int, ...]


@dataclass(frozen=True, order=True)
class Partition:
    """Non-increasing tuple of positive integers; the empty partition is allowed."""

    parts: Tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 1 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"partition parts must be non-increasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: int) -> "Partition":
        """Build a partition from parts given in any order."""
        return cls(tuple(sorted(parts, reverse=True)))

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def multiplicities(self) -> dict:
        return dict(Counter(self.parts))

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __str__(self):
        return "{" + ",".join(map(str, self.parts)) + "}"


def _as_parts(lam) -> Tuple[int, ...]:
    return lam.parts if isinstance(lam, Partition) else Partition.of(*lam).parts


def partitions(n: int, max_part: Optional[int] = None) -> Iterator[Partition]:
    """Yield every partition of ``n`` in reverse lexicographic order."""
    if n < 0:
        return
    if max_part is None:
        max_part = n
    if n == 0:
        yield Partition()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield Partition((first,) + rest.parts)


def partitions_up_to(n: int) -> list:
    """All partitions of weight ``0..n``, ordered by weight."""
    return [lam for w in range(n + 1) for lam in partitions(w)]


def z_constant(lam) -> int:
    """``prod_t n_t!`` where ``n_t`` is the multiplicity of ``t`` in ``lam``.

    This is the squared norm of ``p_lam`` for *normalized* powersums, which is
    why no ``prod t^{n_t}`` factor appears.
    """
    out = 1
    for mult in Counter(_as_parts(lam)).values():
        out *= math.factorial(mult)
    return out


def weight(alpha: Sequence[int]) -> int:
    return sum(alpha)


def inf_norm(alpha: Sequence[int]) -> int:
    return max(alpha, default=0)


def enumerate_multi_indices(
    D: int, w_min: int, w_max: int, inf_max: Optional[int] = None
) -> list:
    """Exact enumeration of ``{alpha in N^D : w_min <= |alpha| <= w_max}``.

    Ordered by weight, then lexicographically by components.  ``inf_max``
    additionally caps every component.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    if w_min < 0 or w_max < w_min:
        raise ValueError("need 0 <= w_min <= w_max")
    out = []
    for w in range(w_min, w_max + 1):
        out.extend(_compositions(D, w, inf_max))
    return out


def _compositions(D: int, w: int, cap: Optional[int]) -> list:
    # weak compositions of w into D parts, lexicographic ascending
    if D == 1:
        return [(w,)] if cap is None or w <= cap else []
    top = w if cap is None else min(w, cap)
    out = []
    for first in range(top + 1):
        for rest in _compositions(D - 1, w - first, cap):
            out.append((first,) + rest)
    return out


def cube_indices(D: int, cap: int) -> list:
    """Non-zero multi-indices with every component in ``0..cap``, weight-ordered."""
    idx = [a for a in product(range(cap + 1), repeat=D) if any(a)]
    idx.sort(key=lambda a: (sum(a), a))
    return idx


def count_exact_weight(D: int, w: int) -> int:
    """Number of ``alpha in N^D`` with ``|alpha| = w``."""
    if D < 1 or w < 0:
        raise ValueError("need D >= 1 and w >= 0")
    return math.comb(w + D - 1, w)


def l_star(N: int, D: int) -> int:
    """Size of the algebraic powersum basis, constant polynomial excluded."""
    return math.comb(N + D, N) - 1


def d_hat(N: int, D: int) -> int:
    """Effective dimension ``min(D, floor(sqrt(N/2)))``."""
    if N < 1 or D < 1:
        raise ValueError("need N >= 1 and D >= 1")
    return min(D, math.isqrt(N // 2))


def canonical_pair(alpha: Sequence[int], beta: Sequence[int]) -> Tuple[MultiIndex, MultiIndex]:
    """Order an unordered pair ``{alpha, beta}`` so that equal sets compare equal."""
    a, b = tuple(alpha), tuple(beta)
    return (a, b) if a <= b else (b, a)
