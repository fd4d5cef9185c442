"""The truncated Blaschke factor and the pairwise hard function built from it.

With ``r = 1/4`` the Blaschke factor ``mu(xi) = (xi - r) / (r xi - 1)`` maps the
unit circle to itself.  Its truncation of order ``t`` is the polynomial

    mu_t(xi) = (1 - (r xi)^t) mu(xi) = (r - xi) (1 + r xi + ... + (r xi)^(t-1)),

evaluated here in the factored form so no pole is ever touched.  The product
``h(z) = prod_i mu_d(z_i)`` summed over all ordered pairs of set elements gives
the hard function ``g``, whose expansion contains only squared multisymmetric
powersums ``p_alpha^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .algebra import cube_indices, d_hat as default_d_hat
from .inner import RegimeError
from .polys import pair_product
from .sampling import TWO_PI, as_rng, sample_uniform_circle

R = Fraction(1, 4)
EXACT_COEFF_MAX_T = 16
MU_LIPSCHITZ = 6.0
H_LIPSCHITZ = 12.0


def mobius(xi):
    """Blaschke factor with its zero at ``r``; raises at the pole ``xi = 4``."""
    xi = np.asarray(xi)
    denom = float(R) * xi - 1.0
    if np.any(denom == 0):
        raise ValueError("pole of the Blaschke factor at xi = 1/r = 4")
    return (xi - float(R)) / denom


def mobius_trunc(t: int, xi):
    """Order-``t`` truncation via Horner on ``(r - xi) sum_{k<t} (r xi)^k``.

    Preserves the input precision, so extended-precision arguments stay extended.
    """
    if t < 1:
        raise ValueError("truncation order must be >= 1")
    xi = np.asarray(xi)
    r = float(R)
    w = r * xi
    acc = np.ones_like(w)
    for _ in range(t - 1):
        acc = acc * w + 1.0
    return (r - xi) * acc


def mobius_trunc_coeff(t: int, a: int, exact: Optional[bool] = None):
    """Coefficient of ``xi^a`` in the order-``t`` truncation.

    Returned as a ``Fraction`` when ``t <= 16`` (or ``exact=True``), else a float.
    """
    if t < 1:
        raise ValueError("truncation order must be >= 1")
    if a < 0:
        raise ValueError("degree must be >= 0")
    if exact is None:
        exact = t <= EXACT_COEFF_MAX_T
    r = R if exact else float(R)
    if a == 0:
        return r
    if a < t:
        return -(r ** (a - 1) - r ** (a + 1))
    if a == t:
        return -(r ** (t - 1))
    return r * 0


def mobius_trunc_norm_sq(t: int, exact: Optional[bool] = None):
    """``sum_a coeff(t, a)^2``, the squared torus norm of the truncation."""
    return sum(mobius_trunc_coeff(t, a, exact) ** 2 for a in range(t + 1))


def h_eval(z, d_hat: int):
    """``prod_i mu_{d_hat}(z_i)`` over the last axis, which must have length ``d_hat``."""
    z = np.asarray(z)
    if z.shape[-1] != d_hat:
        raise ValueError(f"expected {d_hat} coordinates, got {z.shape[-1]}")
    return np.prod(mobius_trunc(d_hat, z), axis=-1)


def in_regime(N: int, d_hat: int) -> bool:
    """Every supported index has weight at most ``N/2``."""
    return 2 * d_hat * d_hat <= N


@dataclass(frozen=True)
class HardFnSpec:
    """Parameters of the hard function.

    ``N`` is half the set size (inputs have ``2N`` columns); only the first
    ``d_hat`` of the ``D`` coordinates enter.

    ``normalizer`` is ``sqrt(12 sum_alpha g_alpha^2)``, always computed.  It
    equals ``||g||_A`` when every supported index is in the closed-form regime,
    and only then is it also stored as ``a_norm``; otherwise ``a_norm`` is
    ``None`` and ``normalizer`` is just a fixed scale.
    """

    N: int
    D: int
    d_hat: Optional[int] = None

    def __post_init__(self):
        if self.N < 1 or self.D < 1:
            raise ValueError("need N >= 1 and D >= 1")
        d = default_d_hat(self.N, self.D) if self.d_hat is None else int(self.d_hat)
        if not 1 <= d <= self.D:
            raise ValueError(f"d_hat must lie in [1, D={self.D}], got {d}")
        object.__setattr__(self, "d_hat", d)

    @cached_property
    def normalizer(self) -> float:
        return math.sqrt(float(12 * sum(c * c for _, c in g_terms(self))))

    @cached_property
    def a_norm(self) -> Optional[float]:
        return self.normalizer if self.in_regime else None

    @property
    def in_regime(self) -> bool:
        return in_regime(self.N, self.d_hat)

    @property
    def constant(self) -> float:
        return -4.0 * self.N ** 2 * float(R) ** self.d_hat


def _check_input(spec: HardFnSpec, X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim < 2 or X.shape[-2:] != (spec.D, 2 * spec.N):
        raise ValueError(f"expected input of shape (..., {spec.D}, {2 * spec.N}), got {X.shape}")
    return X


def g_eval(spec: HardFnSpec, X, chunk: int = 256):
    """``-4 N^2 r^d + sum_{n, n'} h(x_n o x_n')`` over all ordered pairs, ``n = n'`` included."""
    X = _check_input(spec, X)
    d = spec.d_hat
    lead = X.shape[:-2]
    flat = X[..., :d, :].reshape((-1, d, 2 * spec.N))
    out = np.empty(flat.shape[0], dtype=np.result_type(flat, complex))
    for s in range(0, flat.shape[0], chunk):
        x = flat[s:s + chunk]
        z = x[:, :, :, None] * x[:, :, None, :]
        out[s:s + chunk] = np.prod(mobius_trunc(d, z), axis=1).sum(axis=(1, 2))
    out = out + spec.constant
    return out.reshape(lead) if lead else out[0]


def _check_alpha(spec: HardFnSpec, alpha) -> tuple:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != spec.d_hat:
        raise ValueError(f"index must have d_hat={spec.d_hat} components, got {len(alpha)}")
    if any(a < 0 for a in alpha):
        raise ValueError("index components must be >= 0")
    if not any(alpha):
        raise ValueError("the zero index carries no coefficient: the constant term cancels it")
    return alpha


def g_coeff(spec: HardFnSpec, alpha: Sequence[int], exact: Optional[bool] = None):
    """Coefficient of ``p_alpha^2`` in ``g``: ``|alpha| prod_i coeff(d_hat, alpha_i)``."""
    alpha = _check_alpha(spec, alpha)
    out = sum(alpha)
    for a in alpha:
        out = out * mobius_trunc_coeff(spec.d_hat, a, exact)
    return out


def g_terms(spec: HardFnSpec, exact: Optional[bool] = None) -> list:
    """``[(alpha, g_alpha)]`` over all indices with ``1 <= max(alpha) <= d_hat``."""
    return [(a, g_coeff(spec, a, exact)) for a in cube_indices(spec.d_hat, spec.d_hat)]


def g_a_norm_sq(spec: HardFnSpec, exact: Optional[bool] = None):
    """``12 sum_alpha g_alpha^2`` from the exact enumeration.

    Valid only when ``d_hat^2 <= N/2``; otherwise some term leaves the regime
    of the pair orthogonality relation and a ``RegimeError`` is raised.
    """
    if not in_regime(spec.N, spec.d_hat):
        raise RegimeError(f"need d_hat^2 <= N/2, got d_hat={spec.d_hat}, N={spec.N}")
    return 12 * sum(c * c for _, c in g_terms(spec, exact))


def g_a_norm_sq_range(spec: HardFnSpec) -> tuple:
    """Interval ``[1, 3 N^2 (1 + 2^-d_hat)]`` that must contain the squared norm."""
    return 1.0, 3.0 * spec.N ** 2 * (1.0 + 2.0 ** -spec.d_hat)


def g_coeff_sq_bound(spec: HardFnSpec) -> float:
    """``N^2 (1 - r^2)^(2 d_hat)``."""
    return spec.N ** 2 * (1.0 - float(R) ** 2) ** (2 * spec.d_hat)


def g_eval_expansion(spec: HardFnSpec, X):
    """``g`` evaluated through its powersum expansion instead of the pair sum."""
    X = _check_input(spec, X)
    Xd = X[..., :spec.d_hat, :]
    out = 0.0
    for alpha, c in g_terms(spec):
        if c:
            out = out + float(c) * pair_product(alpha, alpha, Xd)
    return out


def g_prime_eval(spec: HardFnSpec, X, chunk: int = 256):
    """``g / spec.normalizer``, which is ``g / ||g||_A`` in the closed-form regime."""
    return g_eval(spec, X, chunk) / spec.normalizer


def sample_torus_input(rng, count, D: int, N: int) -> np.ndarray:
    """``count`` inputs of shape ``(D, 2N)`` with i.i.d. unit-modulus entries."""
    shape = (count,) if np.isscalar(count) else tuple(count)
    return sample_uniform_circle(rng, shape + (D, 2 * N))


# --------------------------------------------------------------------------
# Lipschitz probes

PERTURBATION_SCALES = (1e-4, 1e-2, 1e-1, 1.0, math.pi)


class LipschitzProbe(NamedTuple):
    ratio: float
    bound: float
    pairs: int


def lipschitz_bound(N: int, D: int) -> float:
    """``48 N sqrt(2 N D)``, with the Frobenius norm on ``D x 2N`` inputs."""
    return 48.0 * N * math.sqrt(2.0 * N * D)


def _perturbed_pairs(rng, shape, scale):
    x = sample_uniform_circle(rng, shape)
    phase = rng.uniform(-scale, scale, size=shape)
    return x, x * np.exp(1j * phase)


def _scales_split(M: int):
    per = [M // len(PERTURBATION_SCALES)] * len(PERTURBATION_SCALES)
    per[-1] += M - sum(per)
    return per


def lipschitz_probe(spec: HardFnSpec, M: int, rng=None) -> LipschitzProbe:
    """Largest ``|g(X) - g(Y)| / ||X - Y||_F`` over ``M`` sampled torus pairs.

    Pairs are drawn at several perturbation scales so both the local slope and
    far-apart behaviour are explored.  Coincident pairs are skipped.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = as_rng(rng)
    best, used = 0.0, 0
    for count, scale in zip(_scales_split(M), PERTURBATION_SCALES):
        if count == 0:
            continue
        X, Y = _perturbed_pairs(rng, (count, spec.D, 2 * spec.N), scale)
        diff = np.sqrt((np.abs(X - Y) ** 2).sum(axis=(-2, -1)))
        keep = diff > 0
        if not np.any(keep):
            continue
        num = np.abs(g_eval(spec, X[keep]) - g_eval(spec, Y[keep]))
        best = max(best, float(np.max(num / diff[keep])))
        used += int(keep.sum())
    return LipschitzProbe(best, lipschitz_bound(spec.N, spec.D), used)


def mobius_trunc_lipschitz_probe(t: int, M: int, rng=None) -> float:
    """Largest ``|mu_t(a) - mu_t(b)| / |a - b|`` over ``M`` unit-circle pairs."""
    rng = as_rng(rng)
    best = 0.0
    for count, scale in zip(_scales_split(M), PERTURBATION_SCALES):
        if count == 0:
            continue
        a, b = _perturbed_pairs(rng, count, scale)
        diff = np.abs(a - b)
        keep = diff > 0
        ratio = np.abs(mobius_trunc(t, a[keep]) - mobius_trunc(t, b[keep])) / diff[keep]
        best = max(best, float(ratio.max(initial=0.0)))
    return best


def h_lipschitz_probe(d_hat: int, M: int, rng=None) -> float:
    """Largest ``|h(z) - h(w)| / ||z - w||_1`` over ``M`` torus pairs of length ``d_hat``."""
    rng = as_rng(rng)
    best = 0.0
    for count, scale in zip(_scales_split(M), PERTURBATION_SCALES):
        if count == 0:
            continue
        z, w = _perturbed_pairs(rng, (count, d_hat), scale)
        diff = np.abs(z - w).sum(axis=-1)
        keep = diff > 0
        ratio = np.abs(h_eval(z[keep], d_hat) - h_eval(w[keep], d_hat)) / diff[keep]
        best = max(best, float(ratio.max(initial=0.0)))
    return best


def circle_sup(fn, points: int = 4096) -> float:
    """``max |fn|`` on ``points`` equispaced points of the unit circle."""
    xi = np.exp(1j * TWO_PI * np.arange(points) / points)
    return float(np.max(np.abs(fn(xi))))
