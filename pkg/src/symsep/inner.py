"""Closed forms and Monte Carlo estimators for the powersum inner products.

Five bilinear forms are supported:

``V``       expectation over CUE eigenvalues (finite-variable Hall product)
``S``       expectation over i.i.d. uniform points of the torus ``(S^1)^D``
``A``       expectation over the structured input ``X(y, q, r)``
``A_zero``  the same with ``r = 0``
``star``    ``A - 2 A_zero``; an inner product only on the pairwise span

Monte Carlo errors are batch-means standard errors.  Batches are formed from
consecutive emitted states *within* one chain, so chain autocorrelation is
accounted for; batch means from different chains are independent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import Partition, z_constant
from .polys import powersum, powersum_partition
from .sampling import CUEChain, as_rng, assemble_input, default_burn_in, default_thin, sample_uniform_circle

DEFAULT_BATCH = 100
MAX_CHAINS = 64


class RegimeError(ValueError):
    """Raised when a closed form is requested outside the range where it holds."""


class InnerProductKind(str, enum.Enum):
    V = "V"
    S = "S"
    A = "A"
    A_ZERO = "A_zero"
    STAR = "star"


# --------------------------------------------------------------------------
# estimates


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo mean with batch-means standard errors.

    ``mean`` may be a complex scalar or an array; the standard errors of its
    real and imaginary parts are kept separately.
    """

    mean: complex
    stderr_re: float
    stderr_im: float
    samples: int
    n_batches: int
    seed: Optional[int] = None

    @property
    def stderr(self):
        return np.maximum(self.stderr_re, self.stderr_im)

    def z_scores(self, expected):
        """Per-component deviation in units of standard error (``inf`` if se = 0 and dev != 0)."""
        dev = np.asarray(self.mean) - expected
        with np.errstate(divide="ignore", invalid="ignore"):
            zr = np.where(np.abs(dev.real) == 0, 0.0, np.abs(dev.real) / self.stderr_re)
            zi = np.where(np.abs(dev.imag) == 0, 0.0, np.abs(dev.imag) / self.stderr_im)
        return np.maximum(zr, zi)

    def agrees(self, expected, k: float = 5.0, atol: float = 1e-12):
        """``|dev| <= k * stderr + atol`` on both real and imaginary parts.

        ``atol`` only absorbs floating-point roundoff when an estimator has
        zero variance.
        """
        dev = np.asarray(self.mean) - expected
        ok_re = np.abs(dev.real) <= k * np.asarray(self.stderr_re) + atol
        ok_im = np.abs(dev.imag) <= k * np.asarray(self.stderr_im) + atol
        return ok_re & ok_im

    def conj(self) -> "MCEstimate":
        return replace(self, mean=np.conj(self.mean))

    def merge(self, other: "MCEstimate") -> "MCEstimate":
        """Pool two estimates built from independent batches of equal size."""
        a, b = _BatchStats.from_estimate(self), _BatchStats.from_estimate(other)
        pooled = a.combine(b)
        return pooled.estimate(self.samples + other.samples, seed=self.seed)

    def __getitem__(self, item) -> "MCEstimate":
        return MCEstimate(
            mean=np.asarray(self.mean)[item],
            stderr_re=np.asarray(self.stderr_re)[item],
            stderr_im=np.asarray(self.stderr_im)[item],
            samples=self.samples,
            n_batches=self.n_batches,
            seed=self.seed,
        )


@dataclass
class _BatchStats:
    count: int
    mean: np.ndarray
    m2_re: np.ndarray
    m2_im: np.ndarray

    @classmethod
    def of(cls, batch_means: np.ndarray) -> "_BatchStats":
        bm = np.asarray(batch_means, dtype=complex)
        mean = bm.mean(axis=0)
        dev = bm - mean
        return cls(bm.shape[0], mean, (dev.real ** 2).sum(axis=0), (dev.imag ** 2).sum(axis=0))

    @classmethod
    def from_estimate(cls, est: MCEstimate) -> "_BatchStats":
        nb = est.n_batches
        scale = nb * (nb - 1)
        return cls(nb, np.asarray(est.mean, dtype=complex),
                   np.asarray(est.stderr_re) ** 2 * scale, np.asarray(est.stderr_im) ** 2 * scale)

    def combine(self, other: "_BatchStats") -> "_BatchStats":
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        w = self.count * other.count / n
        return _BatchStats(n, mean,
                           self.m2_re + other.m2_re + delta.real ** 2 * w,
                           self.m2_im + other.m2_im + delta.imag ** 2 * w)

    def estimate(self, samples: int, seed=None) -> MCEstimate:
        nb = self.count
        if nb >= 2:
            se_re = np.sqrt(self.m2_re / (nb - 1) / nb)
            se_im = np.sqrt(self.m2_im / (nb - 1) / nb)
        else:
            se_re = np.full(np.shape(self.mean), np.inf)
            se_im = np.full(np.shape(self.mean), np.inf)
        mean = self.mean
        if np.ndim(mean) == 0:
            mean, se_re, se_im = complex(mean), float(se_re), float(se_im)
        return MCEstimate(mean, se_re, se_im, samples, nb, seed)


def batch_means(values, batch_size: int = DEFAULT_BATCH) -> MCEstimate:
    """Batch-means estimate from raw draws.

    ``values`` has shape ``(T, ...)`` for one chain or ``(chains, T, ...)``
    when ``chains_axis`` data is stacked; pass the latter as a 3-d or higher
    array only through :func:`batch_means_chains`.
    """
    v = np.asarray(values)
    return batch_means_chains(v[None], batch_size)


def batch_means_chains(values, batch_size: int = DEFAULT_BATCH) -> MCEstimate:
    """Batch means over an array of shape ``(chains, T, ...)``; tail draws that do not fill a batch are dropped."""
    v = np.asarray(values)
    chains, T = v.shape[:2]
    nb = T // batch_size
    if nb == 0:
        raise ValueError(f"need at least {batch_size} draws per chain")
    used = v[:, : nb * batch_size].reshape((chains, nb, batch_size) + v.shape[2:])
    bm = used.mean(axis=2).reshape((chains * nb,) + v.shape[2:])
    return _BatchStats.of(bm).estimate(chains * nb * batch_size)


def effective_sample_size(values, batch_size: int = DEFAULT_BATCH) -> float:
    """Smallest batch-means effective sample size over the components of ``values``.

    Real and imaginary parts are treated as separate components.  The only
    input is ``(chains, T, ...)`` draws.
    """
    v = np.asarray(values)
    est = batch_means_chains(v, batch_size)
    flat = v.reshape((-1,) + v.shape[2:])
    n = est.samples
    ess = []
    for part, se in ((flat.real, est.stderr_re), (flat.imag, est.stderr_im)):
        var = part.var(axis=0, ddof=1)
        se2 = np.asarray(se) ** 2
        mask = se2 > 0
        if np.any(mask):
            ess.append(np.min(var[mask] / se2[mask]))
    return float(min(ess)) if ess else float(n)


# --------------------------------------------------------------------------
# sampling plans


def _plan(samples: int, batch_size: int, chains: Optional[int]):
    if samples < 1:
        raise ValueError("samples must be >= 1")
    b = min(batch_size, max(1, samples // 20))
    if chains is None:
        chains = min(MAX_CHAINS, max(1, samples // (10 * b)))
    per_chain_batches = math.ceil(samples / (chains * b))
    return b, chains, per_chain_batches


def _block_stream(kind, N, D, b, chains, blocks, rng, burn_in, thin):
    """Yield sample blocks with leading shape ``(chains, b)`` for the given kind."""
    kind = InnerProductKind(kind)
    if kind is InnerProductKind.S:
        for _ in range(blocks):
            yield sample_uniform_circle(rng, (chains, b, D))
        return
    if N is None:
        raise ValueError(f"N is required for kind {kind.value}")
    chain = CUEChain(N, rng, chains=chains)
    chain.tune(default_burn_in(N) if burn_in is None else burn_in)
    thin = default_thin(N) if thin is None else thin
    for _ in range(blocks):
        theta = np.empty((chains, b, N))
        for t in range(b):
            chain.sweep(max(thin, 1))
            theta[:, t] = chain.theta
        if kind is InnerProductKind.V:
            yield np.exp(1j * theta)
            continue
        if D is None:
            raise ValueError(f"D is required for kind {kind.value}")
        q = sample_uniform_circle(rng, (chains, b, D))
        if kind is InnerProductKind.A_ZERO:
            yield assemble_input(theta, q, None)
            continue
        r = sample_uniform_circle(rng, (chains, b, D))
        X = assemble_input(theta, q, r)
        if kind is InnerProductKind.A:
            yield X
        else:
            # star pairs the A draw with the same (y, q) and r zeroed
            yield X, assemble_input(theta, q, None)


def mc_reduce(
    reducer: Callable,
    kind,
    samples: int,
    rng=None,
    *,
    N: Optional[int] = None,
    D: Optional[int] = None,
    burn_in: Optional[int] = None,
    thin: Optional[int] = None,
    batch_size: int = DEFAULT_BATCH,
    chains: Optional[int] = None,
) -> MCEstimate:
    """Core estimator loop.

    ``reducer(block)`` receives inputs with leading shape ``(chains, b)`` and
    must return per-chain batch means of shape ``(chains, ...)``.  For
    ``kind="star"`` a block is the pair ``(X_A, X_A_zero)``.
    """
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = as_rng(rng)
    b, chains, blocks = _plan(samples, batch_size, chains)
    stats = None
    for block in _block_stream(kind, N, D, b, chains, blocks, rng, burn_in, thin):
        s = _BatchStats.of(reducer(block))
        stats = s if stats is None else stats.combine(s)
    return stats.estimate(chains * blocks * b, seed=seed)


def _inner_integrand(f, g, kind):
    kind = InnerProductKind(kind)
    if kind is InnerProductKind.STAR:
        def integrand(block):
            xa, x0 = block
            return f(xa) * np.conj(g(xa)) - 2.0 * f(x0) * np.conj(g(x0))
    else:
        def integrand(block):
            return f(block) * np.conj(g(block))
    return integrand


def mc_inner(f, g, kind, samples: int, rng=None, **kwargs) -> MCEstimate:
    """Monte Carlo estimate of ``E[f(X) conj(g(X))]`` under ``kind``.

    ``f`` and ``g`` must broadcast over leading batch axes.  They receive unit
    complex points ``e^{i theta}`` of shape ``(..., N)`` for ``V``, torus points
    ``(..., D)`` for ``S`` and set inputs ``(..., D, 2N)`` otherwise.  For
    ``star`` the estimate is of ``A - 2 A_zero`` on paired draws.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    integrand = _inner_integrand(f, g, kind)

    def reducer(block):
        vals = integrand(block)
        vals = np.broadcast_to(vals, _lead_shape(block))
        return vals.mean(axis=1)

    return mc_reduce(reducer, kind, samples, rng, **kwargs)


def _lead_shape(block):
    arr = block[0] if isinstance(block, tuple) else block
    return arr.shape[:2]


def mc_gram(features: Callable, kind, samples: int, rng=None, **kwargs) -> MCEstimate:
    """Estimate the matrix ``E[F_i conj(F_j)]`` for a vector of features.

    ``features(block)`` returns shape ``(chains, b, K)``.
    """
    kind_ = InnerProductKind(kind)

    def gram(F):
        return np.matmul(np.swapaxes(F, 1, 2), np.conj(F)) / F.shape[1]

    if kind_ is InnerProductKind.STAR:
        def reducer(block):
            xa, x0 = block
            return gram(features(xa)) - 2.0 * gram(features(x0))
    else:
        def reducer(block):
            return gram(features(block))

    return mc_reduce(reducer, kind, samples, rng, **kwargs)


# --------------------------------------------------------------------------
# closed forms


def exact_V(lam, mu, N: int) -> Optional[int]:
    """``<p_lam, p_mu>_V = z_lam 1[lam = mu]``, or ``None`` when ``|lam| > N``.

    Above degree ``N`` the orthogonality relation no longer holds, so no
    value is claimed.
    """
    lam = lam if isinstance(lam, Partition) else Partition.of(*lam)
    mu = mu if isinstance(mu, Partition) else Partition.of(*mu)
    if lam.weight > N:
        return None
    return z_constant(lam) if lam == mu else 0


def exact_S(alpha, beta) -> int:
    if len(alpha) != len(beta):
        raise ValueError("multi-indices must have equal length")
    return int(tuple(alpha) == tuple(beta))


def _check_pair_regime(N: Optional[int], *indices) -> None:
    for a in indices:
        w = sum(a)
        if w < 1 or (N is not None and 2 * w > N):
            bound = "N/2" if N is not None else "inf"
            raise RegimeError(f"index {tuple(a)} has weight {w}, outside [1, {bound}]")


def _weights_match(a, b, c, d) -> bool:
    return sorted((sum(a), sum(b))) == sorted((sum(c), sum(d)))


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def exact_A_pair(alpha, beta, gamma, delta, N: int) -> int:
    """``<p_a p_b, p_c p_d>_A`` for index weights in ``[1, N/2]``."""
    _check_pair_regime(N, alpha, beta, gamma, delta)
    a, b, c, d = map(tuple, (alpha, beta, gamma, delta))
    if not _weights_match(a, b, c, d):
        return 0
    return 2 * (1 + (sum(a) == sum(b))) * (
        (_vadd(a, b) == _vadd(c, d)) + ((a, b) == (c, d)) + ((a, b) == (d, c))
    )


def exact_A_zero_pair(alpha, beta, gamma, delta, N: int) -> int:
    """``<p_a p_b, p_c p_d>_{A_zero}`` for index weights in ``[1, N/2]``."""
    _check_pair_regime(N, alpha, beta, gamma, delta)
    a, b, c, d = map(tuple, (alpha, beta, gamma, delta))
    if not _weights_match(a, b, c, d):
        return 0
    return (1 + (sum(a) == sum(b))) * (_vadd(a, b) == _vadd(c, d))


def exact_star_pair(alpha, beta, gamma, delta, N: Optional[int] = None) -> int:
    """Diagonal values 0/2/4/8 of the star form on pairwise powersums.

    Checked against ``A - 2 A_zero`` in the tests; computed here from the case
    table directly.
    """
    _check_pair_regime(N, alpha, beta, gamma, delta)
    a, b, c, d = map(tuple, (alpha, beta, gamma, delta))
    if sorted((a, b)) != sorted((c, d)):
        return 0
    if sum(a) != sum(b):
        return 2
    return 8 if a == b else 4


def exact_pair_gram(indices, kind, N: int) -> np.ndarray:
    """Closed-form Gram matrix on ``[(a, b) for a in indices for b in indices]``."""
    fn = {InnerProductKind.A: exact_A_pair, InnerProductKind.A_ZERO: exact_A_zero_pair,
          InnerProductKind.STAR: exact_star_pair}[InnerProductKind(kind)]
    pairs = [(a, b) for a in indices for b in indices]
    G = np.empty((len(pairs), len(pairs)))
    for i, (a, b) in enumerate(pairs):
        for j, (c, d) in enumerate(pairs):
            G[i, j] = fn(a, b, c, d, N)
    return G


def projection_orthogonality_probe(t: int, t2: int, ks: Sequence[int], N: int, samples: int,
                                   rng=None, **kwargs) -> MCEstimate:
    """MC estimate of ``<p_t p_t2, prod_i p_{k_i}>_V``.

    Zero unless ``ks`` has length two and matches ``{t, t2}``.
    """
    if t + t2 > N:
        raise RegimeError("need t + t2 <= N")
    left = Partition.of(t, t2)
    right = Partition.of(*ks)
    return mc_inner(lambda z: powersum_partition(left, z),
                    lambda z: powersum_partition(right, z),
                    InnerProductKind.V, samples, rng, N=N, **kwargs)


def probe_expected(t: int, t2: int, ks: Sequence[int]) -> int:
    left = Partition.of(t, t2)
    return z_constant(left) if Partition.of(*ks) == left else 0


def powersum_features(partitions, z) -> np.ndarray:
    """Stack ``p_lam(z)`` for each partition along the last axis."""
    cache = {}

    def p(k):
        if k not in cache:
            cache[k] = powersum(k, z)
        return cache[k]

    out = []
    for lam in partitions:
        v = np.ones(np.shape(z)[:-1], dtype=complex)
        for part in lam:
            v = v * p(part)
        out.append(v)
    return np.stack(out, axis=-1)
