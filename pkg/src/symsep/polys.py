"""Normalized powersums, their products, and multisymmetric powersums.

All evaluators broadcast over leading batch axes.  Scalar powersums take
``x`` of shape ``(..., N)``; multisymmetric ones take ``X`` of shape
``(..., D, M)`` whose columns are the set elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .algebra import MultiIndex, Partition, canonical_pair


def ipow(x, k: int) -> np.ndarray:
    """``x**k`` for integer ``k >= 0`` by repeated squaring on the complex value.

    Unlike angle arithmetic this stays exact at ``x = 0``.
    """
    if k < 0:
        raise ValueError("exponent must be non-negative")
    x = np.asarray(x)
    result = np.ones_like(x, dtype=np.result_type(x, complex))
    base = x.astype(result.dtype, copy=True)
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def powersum(k: int, x) -> np.ndarray:
    """``(1/sqrt(k)) sum_n x_n^k``; ``p_0 = 1``."""
    x = np.asarray(x)
    if k == 0:
        return np.ones(x.shape[:-1], dtype=complex)
    if k < 0:
        raise ValueError("k must be >= 0")
    return ipow(x, k).sum(axis=-1) / math.sqrt(k)


def powersum_partition(lam: Union[Partition, Sequence[int]], x) -> np.ndarray:
    """``prod_i p_{lam_i}(x)``; the empty partition gives 1."""
    x = np.asarray(x)
    out = np.ones(x.shape[:-1], dtype=complex)
    for part in lam:
        out = out * powersum(part, x)
    return out


def monomial(alpha: Sequence[int], q) -> np.ndarray:
    """``prod_d q_d^{alpha_d}`` over the last axis of ``q``."""
    q = np.asarray(q)
    if q.shape[-1] != len(alpha):
        raise ValueError(f"monomial of length {len(alpha)} applied to vector of length {q.shape[-1]}")
    out = np.ones(q.shape[:-1], dtype=complex)
    for d, a in enumerate(alpha):
        if a:
            out = out * ipow(q[..., d], a)
    return out


def _column_monomials(alpha: Sequence[int], X: np.ndarray) -> np.ndarray:
    if X.ndim < 2 or X.shape[-2] != len(alpha):
        raise ValueError(f"multi-index of length {len(alpha)} incompatible with input shape {X.shape}")
    out = np.ones(X.shape[:-2] + X.shape[-1:], dtype=complex)
    for d, a in enumerate(alpha):
        if a:
            out = out * ipow(X[..., d, :], a)
    return out


def multi_powersum(alpha: Sequence[int], X) -> np.ndarray:
    """``(1/sqrt|alpha|) sum_n prod_d x_{dn}^{alpha_d}``; ``alpha = 0`` gives 1."""
    X = np.asarray(X)
    w = sum(alpha)
    if w == 0:
        if X.ndim < 2 or X.shape[-2] != len(alpha):
            raise ValueError(f"multi-index of length {len(alpha)} incompatible with input shape {X.shape}")
        return np.ones(X.shape[:-2], dtype=complex)
    return _column_monomials(alpha, X).sum(axis=-1) / math.sqrt(w)


def pair_product(alpha: Sequence[int], beta: Sequence[int], X) -> np.ndarray:
    """``p_alpha(X) p_beta(X)``."""
    return multi_powersum(alpha, X) * multi_powersum(beta, X)


def multi_powersum_table(indices, X) -> np.ndarray:
    """Stack ``p_alpha(X)`` for every ``alpha`` in ``indices`` along a new last axis."""
    X = np.asarray(X)
    return np.stack([multi_powersum(a, X) for a in indices], axis=-1)


@dataclass(frozen=True)
class PowersumProductTerm:
    """One coefficient in a powersum-product expansion.

    ``indices`` is a ``Partition`` in the scalar case or an unordered pair of
    multi-indices, stored sorted so that ``{a, b}`` and ``{b, a}`` coincide.
    """

    indices: Union[Partition, tuple]
    coefficient: complex

    @classmethod
    def pair(cls, alpha: MultiIndex, beta: MultiIndex, coefficient) -> "PowersumProductTerm":
        return cls(canonical_pair(alpha, beta), coefficient)

    def evaluate(self, X) -> np.ndarray:
        if isinstance(self.indices, Partition):
            return complex(self.coefficient) * powersum_partition(self.indices, X)
        alpha, beta = self.indices
        return complex(self.coefficient) * pair_product(alpha, beta, X)


def evaluate_expansion(terms, X) -> np.ndarray:
    X = np.asarray(X)
    out = 0.0
    for term in terms:
        out = out + term.evaluate(X)
    return out
