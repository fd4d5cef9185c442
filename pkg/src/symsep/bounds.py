"""Lower bounds on approximating symmetric targets with width-``L`` singleton pooling.

Every bound reduces to truncating a diagonal coefficient matrix to rank ``L``:
the squared Frobenius error is the total mass minus the ``L`` largest squared
entries.  ``rank_lemma_oracle`` checks the inequality that links that matrix
error to function-space error, exactly, in coefficient space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .algebra import Partition, count_exact_weight, enumerate_multi_indices
from .hardfn import HardFnSpec, g_coeff_sq_bound, g_terms
from .inner import RegimeError, exact_star_pair, exact_V
from .sampling import as_rng


@dataclass(frozen=True)
class DiagonalSpectrum:
    """Diagonal entries as ``(index, magnitude)`` pairs, in enumeration order."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((idx, float(m)) for idx, m in self.entries)
        if any(m < 0 for _, m in entries):
            raise ValueError("magnitudes must be non-negative")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_magnitudes(cls, magnitudes: Sequence[float]) -> "DiagonalSpectrum":
        return cls(tuple(enumerate(magnitudes)))

    @property
    def total_sq(self) -> float:
        return math.fsum(m * m for _, m in self.entries)

    def __len__(self):
        return len(self.entries)

    def largest(self, L: int) -> tuple:
        """The ``L`` entries of largest magnitude; ties keep enumeration order."""
        order = sorted(range(len(self.entries)), key=lambda i: -self.entries[i][1])
        return tuple(self.entries[i] for i in order[:L])


def rank_trunc_error_sq(spec: DiagonalSpectrum, L: int) -> float:
    """Squared Frobenius distance from the diagonal matrix to its best rank-``L`` truncation."""
    if L < 0:
        raise ValueError("L must be >= 0")
    kept = math.fsum(m * m for _, m in spec.largest(L))
    return max(spec.total_sq - kept, 0.0)


def bound_1d(N: int, L: int) -> float:
    """``max(0, 1 - 2L/N)`` for one-dimensional sets of even size ``N``."""
    if N < 2 or N % 2:
        raise ValueError("N must be a positive even integer")
    if L < 0:
        raise ValueError("L must be >= 0")
    return max(0.0, 1.0 - 2.0 * L / N)


def bound_1d_spectral(N: int, L: int) -> float:
    """The same bound derived from an identity spectrum of ``N/2`` entries, normalized."""
    k = N // 2
    spec = DiagonalSpectrum.from_magnitudes([1.0] * k)
    return rank_trunc_error_sq(spec, L) / spec.total_sq


def simple_highd_T(N: int, D: int) -> int:
    """Number of indices of weight exactly ``N/2`` in dimension ``D``."""
    return count_exact_weight(D, N // 2)


def bound_simple_highd(N: int, D: int, L: int, clamp: bool = True) -> float:
    """``1/6 - L/(6T)`` for the simple high-dimensional target, ``T = #{|alpha| = N/2}``."""
    if N % 2:
        raise ValueError("N must be even")
    if min(N // 2, D - 1) < 2:
        raise RegimeError("need min(N/2, D - 1) >= 2")
    if L < 0:
        raise ValueError("L must be >= 0")
    T = simple_highd_T(N, D)
    value = 1.0 / 6.0 - L / (6.0 * T)
    return max(0.0, value) if clamp else value


def hard_spectrum(spec: HardFnSpec) -> DiagonalSpectrum:
    """Entries ``2 |g_alpha| / ||g||_A`` of the normalized coefficient matrix."""
    if spec.a_norm is None:
        raise RegimeError("hard spectrum needs d_hat^2 <= N/2")
    return DiagonalSpectrum(tuple((a, 2.0 * abs(float(c)) / spec.a_norm) for a, c in g_terms(spec)))


class HardBound(NamedTuple):
    exact: float
    closed_form_raw: float
    closed_form: float


def hard_threshold(N: int, d_hat: int) -> float:
    """Width ``(1/24) N^-2 (16/15)^(2 d_hat)`` under which the bound is at least ``1/12``."""
    return (1.0 / 24.0) * N ** -2 * (16.0 / 15.0) ** (2 * d_hat)


def bound_hard_highd(spec: HardFnSpec, L: int) -> HardBound:
    """Exact spectral bound and its closed-form relaxation for the hard function."""
    if L < 0:
        raise ValueError("L must be >= 0")
    exact = 0.5 * rank_trunc_error_sq(hard_spectrum(spec), L)
    # the closed form replaces every kept entry by the largest possible one
    closed = 1.0 / 6.0 - 2.0 * L * g_coeff_sq_bound(spec)
    return HardBound(exact, closed, max(0.0, closed))


@dataclass(frozen=True)
class SeparationCurve:
    N: int
    D: int
    d_hat: int
    rows: tuple = field(default=())


def separation_curve(spec: HardFnSpec, L_grid: Sequence[int]) -> SeparationCurve:
    rows = tuple((int(L), bound_hard_highd(spec, int(L)).exact) for L in sorted(L_grid))
    return SeparationCurve(spec.N, spec.D, spec.d_hat, rows)


# --------------------------------------------------------------------------
# rank inequality oracle


def _unordered_pairs(T: int) -> list:
    return [(t, s) for t in range(T) for s in range(t, T)]


def pair_gram(basis: str, T: int) -> np.ndarray:
    """Exact Gram matrix of ``p_t p_s`` (``t <= s``) in the chosen basis.

    ``"star"`` uses the first ``T`` two-dimensional multi-indices of weight
    ``<= 3`` under the star form (with ``N = 6``); ``"V"`` uses scalar powersums
    ``p_1 .. p_T`` under the finite Hall product with ``N = 2T``.
    """
    pairs = _unordered_pairs(T)
    G = np.empty((len(pairs), len(pairs)))
    if basis == "star":
        idx = enumerate_multi_indices(2, 1, 3)
        if T > len(idx):
            raise ValueError(f"star basis supports T <= {len(idx)}")
        idx = idx[:T]
        for i, (a, b) in enumerate(pairs):
            for j, (c, d) in enumerate(pairs):
                G[i, j] = exact_star_pair(idx[a], idx[b], idx[c], idx[d], 6)
    elif basis == "V":
        for i, (a, b) in enumerate(pairs):
            lam = Partition.of(a + 1, b + 1)
            for j, (c, d) in enumerate(pairs):
                G[i, j] = exact_V(lam, Partition.of(c + 1, d + 1), 2 * T)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return G


def _pair_coefficients(M: np.ndarray) -> np.ndarray:
    # coefficient of p_t p_s in (1/2) sum_{t,s} M_ts p_t p_s
    T = M.shape[0]
    return np.array([M[t, s] if t != s else 0.5 * M[t, t] for t, s in _unordered_pairs(T)])


def rank_lemma_sides(C: np.ndarray, V: np.ndarray, G: np.ndarray, gram: np.ndarray) -> tuple:
    """``(||f - g||^2, (1/2) ||C^T V C - G||_F^2)`` for one instance.

    ``f = sum_{l <= l'} V_ll' / (1 + [l = l']) phi_l phi_l'`` with
    ``phi_l = sum_t C_lt p_t`` and ``g = (1/2) sum_ts G_ts p_t p_s``.
    """
    M = C.T @ V @ C
    u = _pair_coefficients(M - G)
    lhs = float(u @ gram @ u)
    rhs = 0.5 * float(np.sum((M - G) ** 2))
    return lhs, rhs


@dataclass(frozen=True)
class RankOracleReport:
    T: int
    L: int
    trials: int
    violations: int
    min_ratio: float
    worst_gap: float
    basis: str


def rank_lemma_oracle(T: int, L: int, trials: int, rng=None, basis: str = "star",
                      tol: float = 1e-9) -> RankOracleReport:
    """Check the rank inequality on random symmetric instances.

    A violation is ``lhs < rhs - tol``.  ``worst_gap`` is the smallest ``lhs - rhs``.
    """
    if T < 1 or L < 1:
        raise ValueError("need T >= 1 and L >= 1")
    rng = as_rng(rng)
    gram = pair_gram(basis, T)
    violations, min_ratio, worst = 0, math.inf, math.inf
    for _ in range(trials):
        C = rng.standard_normal((L, T))
        A = rng.standard_normal((L, L))
        V = 0.5 * (A + A.T)
        G = np.diag(rng.standard_normal(T))
        lhs, rhs = rank_lemma_sides(C, V, G, gram)
        worst = min(worst, lhs - rhs)
        if rhs > 0:
            min_ratio = min(min_ratio, lhs / rhs)
        if lhs < rhs - tol:
            violations += 1
    return RankOracleReport(T, L, trials, violations, min_ratio, worst, basis)
