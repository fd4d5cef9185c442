"""Pairwise networks that represent or approximate the normalized hard function.

The exact network uses the activations ``xi -> xi^2`` and the truncated
Blaschke factor.  Products come from the polarization identity
``xi * w = ((xi + w)^2 - xi^2 - w^2) / 2``.  The approximate network swaps both
activations for surrogates, such as the shallow ``exp`` networks built from
root-of-unity filters.

Inputs are ``(..., D, 2N)`` arrays with unit-modulus entries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np

from .hardfn import R, HardFnSpec, mobius_trunc
from .sampling import as_rng

SCHEMA_VERSION = 1
CERTIFIED_RADIUS = 3.0


def _pi(dtype) -> np.floating:
    real = np.finfo(dtype).dtype.type
    return np.arccos(real(-1))


# --------------------------------------------------------------------------
# activations and products


@dataclass(frozen=True)
class ActivationPair:
    """Squaring and truncated-Blaschke surrogates with a claimed uniform error on ``|xi| <= 3``."""

    f1: Callable
    f2: Callable
    epsilon: float
    name: str = "custom"
    J: Optional[int] = None

    @classmethod
    def exact(cls, d_hat: int) -> "ActivationPair":
        return cls(np.square, lambda xi: mobius_trunc(d_hat, xi), 0.0, name="exact")

    @classmethod
    def exp(cls, d_hat: int, epsilon: float, J: Optional[int] = None) -> "ActivationPair":
        """Exp-activation surrogates with ``J`` chosen so both errors are at most ``epsilon``."""
        J = choose_J(d_hat, epsilon) if J is None else J
        params = ExpNetParams(J, d_hat)
        return cls(params.f1_net, params.f2_net, epsilon, name="exp", J=J)


def star(f1, xi, w):
    """Polarized product ``(f1(xi + w) - f1(xi) - f1(w)) / 2``."""
    return 0.5 * (f1(xi + w) - f1(xi) - f1(w))


def epsilon_cap(d_hat: int) -> float:
    """Largest activation error for which the layerwise error analysis applies."""
    return min(1.0 / 100.0, 1.0 / (12.0 * d_hat * d_hat))


def tree_depth(d_hat: int) -> int:
    return max(0, math.ceil(math.log2(d_hat))) if d_hat > 1 else 0


def tree_layers(values, mul) -> list:
    """Pairwise product tree over axis 0, padded with ones to a power of two.

    Returns every layer, leaves first; the last layer has a single entry.
    """
    values = np.asarray(values)
    width = 1 << tree_depth(values.shape[0])
    if width > values.shape[0]:
        pad = np.ones((width - values.shape[0],) + values.shape[1:], dtype=values.dtype)
        values = np.concatenate([values, pad], axis=0)
    layers = [values]
    while values.shape[0] > 1:
        values = mul(values[0::2], values[1::2])
        layers.append(values)
    return layers


def psi_layers(x, x2, d_hat: int, act: Optional[ActivationPair] = None) -> list:
    """Intermediate values ``[z, Z1, Z2, ...]`` of the pair feature.

    The coordinate axis is last on input and first in every returned layer.
    ``act=None`` uses exact multiplication and the exact truncated factor.
    """
    x = np.moveaxis(np.asarray(x)[..., :d_hat], -1, 0)
    x2 = np.moveaxis(np.asarray(x2)[..., :d_hat], -1, 0)
    if act is None:
        z = x * x2
        Z1 = mobius_trunc(d_hat, z)
        mul = np.multiply
    else:
        if act.epsilon > epsilon_cap(d_hat):
            raise ValueError(f"activation error {act.epsilon:g} exceeds min(1/100, 1/(12 d^2)) = {epsilon_cap(d_hat):g}")

        def mul(a, b):
            return star(act.f1, a, b)

        z = mul(x, x2)
        Z1 = act.f2(z)
    return [z] + tree_layers(Z1, mul)


def psi_exact(x, x2, d_hat: int):
    """``h(x o x2)`` computed through the exact multiplication tree."""
    return psi_layers(x, x2, d_hat)[-1][0]


def psi_approx(act: ActivationPair, x, x2, d_hat: int):
    """The same tree with every product replaced by ``star`` and the factor by ``f2``."""
    return psi_layers(x, x2, d_hat, act)[-1][0]


def psi_error_bound(d_hat: int, epsilon: float) -> float:
    return 3.0 * d_hat * d_hat * epsilon


def net_error_bound(N: int, d_hat: int, epsilon: float) -> float:
    """``18 N^2 d_hat^2 epsilon``."""
    return 18.0 * N * N * d_hat * d_hat * epsilon


def budget_epsilon(N: int, d_hat: int, eps_target: float) -> float:
    """Activation error that keeps the network error within ``eps_target``."""
    return eps_target / (18.0 * N * N * d_hat * d_hat)


# --------------------------------------------------------------------------
# the pairwise network


@dataclass(frozen=True)
class PairwiseNet:
    """Width-one pairwise pooling network ``rho(sum_{n,n'} psi(x_n, x_n'))``.

    ``activations=None`` gives the exact construction.
    """

    spec: HardFnSpec
    activations: Optional[ActivationPair] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.activations is not None and self.activations.epsilon > epsilon_cap(self.spec.d_hat):
            raise ValueError("activation error above min(1/100, 1/(12 d^2))")

    @property
    def exact(self) -> bool:
        return self.activations is None

    @property
    def tree_depth(self) -> int:
        return tree_depth(self.spec.d_hat)

    @property
    def J(self) -> Optional[int]:
        return None if self.activations is None else self.activations.J

    def pooled(self, X, chunk: int = 128):
        """``sum_{n, n'} psi(x_n, x_n')`` over all ordered pairs."""
        X = np.asarray(X)
        s = self.spec
        if X.ndim < 2 or X.shape[-2:] != (s.D, 2 * s.N):
            raise ValueError(f"expected input of shape (..., {s.D}, {2 * s.N}), got {X.shape}")
        lead = X.shape[:-2]
        flat = np.swapaxes(X[..., :s.d_hat, :].reshape((-1, s.d_hat, 2 * s.N)), -1, -2)
        out = np.empty(flat.shape[0], dtype=np.result_type(flat, complex))
        for i in range(0, flat.shape[0], chunk):
            cols = flat[i:i + chunk]
            x = cols[:, :, None, :]
            x2 = cols[:, None, :, :]
            out[i:i + chunk] = psi_layers(x, x2, s.d_hat, self.activations)[-1][0].sum(axis=(1, 2))
        return out.reshape(lead) if lead else out[0]

    def rho(self, xi):
        s = self.spec
        scale = 4.0 * s.N * s.N
        rd = float(R) ** s.d_hat
        if self.activations is None:
            return (xi - scale * rd) / s.normalizer
        return (scale / s.normalizer) * (star(self.activations.f1, xi / scale, 1.0) - rd)

    def __call__(self, X, chunk: int = 128):
        return self.rho(self.pooled(X, chunk))

    def error_bound(self) -> float:
        if self.activations is None:
            return 0.0
        return net_error_bound(self.spec.N, self.spec.d_hat, self.activations.epsilon)

    def layers(self) -> list:
        """Layer list with neuron counts; an exact activation counts as one neuron."""
        d = self.spec.d_hat
        sq = 1 if self.activations is None else self.activations.J
        mu = 1 if self.activations is None else 2 * d * self.activations.J
        out = [{"name": "pair_products", "nodes": d, "neurons": 3 * d * sq}]
        out.append({"name": "blaschke", "nodes": d, "neurons": d * mu})
        width = 1 << self.tree_depth
        for k in range(1, self.tree_depth + 1):
            nodes = width >> k
            out.append({"name": f"tree_{k}", "nodes": nodes, "neurons": 3 * nodes * sq})
        # the additive constant in rho is one extra neuron
        out.append({"name": "readout", "nodes": 1, "neurons": 3 * sq + 1})
        return out

    def ledger(self) -> dict:
        layers = self.layers()
        out = {
            "depth": len(layers),
            "width": max(layer["neurons"] for layer in layers),
            "neurons": sum(layer["neurons"] for layer in layers),
            "tree_depth": self.tree_depth,
        }
        if self.activations is not None and self.activations.J is not None:
            params = ExpNetParams(self.activations.J, self.spec.d_hat)
            out.update(params.weight_ledger())
        return out

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "N": self.spec.N,
            "D": self.spec.D,
            "d_hat": self.spec.d_hat,
            "a_norm": self.spec.a_norm,
            "normalizer": self.spec.normalizer,
            "activation": "exact" if self.activations is None else self.activations.name,
            "epsilon": 0.0 if self.activations is None else self.activations.epsilon,
            "J": self.J,
            "seed": self.seed,
            "layers": self.layers(),
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PairwiseNet":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
        spec = HardFnSpec(doc["N"], doc["D"], doc["d_hat"])
        kind = doc["activation"]
        if kind == "exact":
            act = None
        elif kind == "exp":
            act = ActivationPair.exp(spec.d_hat, doc["epsilon"], J=doc["J"])
        else:
            raise ValueError(f"cannot rebuild activation {kind!r}")
        return cls(spec, act, doc["seed"])


def net_eval(net: PairwiseNet, X):
    return net(X)


def budgeted_exp_net(spec: HardFnSpec, eps_target: float, seed: Optional[int] = None) -> PairwiseNet:
    """Exp-activation network whose error bound is ``eps_target``."""
    eps = budget_epsilon(spec.N, spec.d_hat, eps_target)
    return PairwiseNet(spec, ActivationPair.exp(spec.d_hat, eps), seed)


# --------------------------------------------------------------------------
# exp-activation constructions


def unity_sum(J: int, i: int, dtype=complex) -> complex:
    """``(1/J) sum_j gamma^(i j)`` with ``gamma = exp(2 pi i / J)``."""
    if J < 1:
        raise ValueError("J must be >= 1")
    gamma = roots_of_unity(J, dtype)
    return gamma[(i * np.arange(J)) % J].mean()


def unity_filter(J: int, i: int) -> int:
    """1 when ``i`` is a multiple of ``J``, else 0, read off the numeric root sum."""
    return int(round(abs(unity_sum(J, i))))


def roots_of_unity(J: int, dtype=complex) -> np.ndarray:
    real = np.finfo(dtype).dtype.type
    angles = 2 * _pi(dtype) * np.arange(J, dtype=real) / real(J)
    return (np.cos(angles) + 1j * np.sin(angles)).astype(dtype)


@dataclass(frozen=True)
class ShallowExpNet:
    """``xi -> sum_m c_m exp(a_m xi + b_m)``."""

    inner: np.ndarray
    bias: np.ndarray
    outer: np.ndarray

    @property
    def neurons(self) -> int:
        return int(self.inner.shape[0])

    def __call__(self, xi):
        xi = np.asarray(xi)
        pre = xi[..., None] * self.inner + self.bias
        return np.exp(pre) @ self.outer


@dataclass(frozen=True)
class ExpNetParams:
    """Root-of-unity order ``J`` and polynomial degree ``D_eff``; ``r = 1/4``.

    ``dtype`` selects the complex precision, e.g. ``np.clongdouble`` when an
    error below double roundoff has to be resolved.
    """

    J: int
    D_eff: int
    dtype: type = complex
    r: float = field(default=float(R), init=False)

    def __post_init__(self):
        if self.D_eff < 1:
            raise ValueError("D_eff must be >= 1")
        if self.J <= self.D_eff:
            raise ValueError(f"need J > D_eff, got J={self.J}, D_eff={self.D_eff}")

    @cached_property
    def gamma(self) -> np.ndarray:
        return roots_of_unity(self.J, self.dtype)

    def _filter_weights(self, k: int) -> np.ndarray:
        # gamma^(-k j) / J, reducing the exponent mod J first
        real = np.finfo(self.dtype).dtype.type
        return np.conj(self.gamma[(k * np.arange(self.J)) % self.J]) / real(self.J)

    def fk_net(self, k: int) -> ShallowExpNet:
        if not 0 <= k < self.J:
            raise ValueError(f"need 0 <= k < J, got k={k}")
        real = np.finfo(self.dtype).dtype.type
        return ShallowExpNet(self.gamma * real(self.r), np.zeros(self.J, self.dtype), self._filter_weights(k))

    @cached_property
    def f1_net(self) -> ShallowExpNet:
        # (2/r^2) f^(2)
        if self.J <= 2:
            raise ValueError("the squaring surrogate needs J > 2")
        base = self.fk_net(2)
        real = np.finfo(self.dtype).dtype.type
        return ShallowExpNet(base.inner, base.bias, base.outer * (real(2) / real(self.r) ** 2))

    @cached_property
    def f2_net(self) -> ShallowExpNet:
        """``r sum_{k<D} k! f^(k) - sum_{1<=k<=D} (k!/r) f^(k)`` with ``k!`` moved into the bias."""
        real = np.finfo(self.dtype).dtype.type
        r = real(self.r)
        inner, bias, outer = [], [], []
        blocks = [(k, r) for k in range(self.D_eff)] + [(k, -1 / r) for k in range(1, self.D_eff + 1)]
        for k, scale in blocks:
            net = self.fk_net(k)
            inner.append(net.inner)
            bias.append(np.full(self.J, log_factorial(k, real), dtype=self.dtype))
            outer.append(net.outer * scale)
        return ShallowExpNet(np.concatenate(inner), np.concatenate(bias), np.concatenate(outer))

    def weight_ledger(self) -> dict:
        f2 = self.f2_net
        f1 = self.f1_net
        return {
            "J": self.J,
            "neurons_f1": f1.neurons,
            "neurons_f2": f2.neurons,
            "max_inner_weight": float(max(np.abs(f1.inner).max() + np.abs(f1.bias).max(),
                                          np.abs(f2.inner).max() + np.abs(f2.bias).max())),
            "max_outer_weight": float(max(np.abs(f1.outer).max(), np.abs(f2.outer).max())),
            "inner_weight_bound": log_factorial(self.D_eff) + self.r,
        }


def log_factorial(k: int, real=float):
    """``log k!`` as a sum of logs, so no factorial is ever formed."""
    return real(math.fsum(math.log(i) for i in range(2, k + 1)))


def exp_fk(params: ExpNetParams, k: int, xi):
    """``f^(k)(xi) = sum_j gamma^(-k j)/J exp(gamma^j r xi)``, close to ``(r xi)^k / k!``."""
    return params.fk_net(k)(xi)


def exp_f1(params: ExpNetParams, xi):
    return params.f1_net(xi)


def exp_f2(params: ExpNetParams, xi):
    return params.f2_net(xi)


def fk_error_bound(J: int) -> float:
    """``(4/J!) (3/4)^J``, computed in log space."""
    return math.exp(math.log(4.0) - math.lgamma(J + 1) + J * math.log(0.75))


def f1_error_bound(J: int) -> float:
    return 32.0 * fk_error_bound(J)


def f2_error_bound(J: int, D_eff: int) -> float:
    return 17 * D_eff * 0.75 ** J


def choose_J(D_eff: int, epsilon: float) -> int:
    """Smallest ``J > max(D_eff, 2)`` whose two error bounds are both at most ``epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    J = max(D_eff, 2) + 1
    while max(f2_error_bound(J, D_eff), f1_error_bound(J)) > epsilon:
        J += 1
    return J


# --------------------------------------------------------------------------
# sup-norm probe


class SupProbe(NamedTuple):
    error: float
    resolution: float
    points: int


def disk_probe_points(radius: float, grid_points: int, rng=None, dtype=complex) -> tuple:
    """Boundary circle, interior polar grid and random fill in ``|xi| <= radius``.

    Half of the points lie on the boundary, where the bounds of interest are
    attained; a quarter form a polar grid; the rest are uniform in the disk.
    Returns ``(points, resolution)`` with the largest deterministic spacing.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if grid_points < 4:
        raise ValueError("need at least 4 points")
    rng = as_rng(rng)
    real = np.finfo(dtype).dtype.type
    pi = _pi(dtype)
    R_ = real(radius)
    nb = grid_points // 2
    K = max(1, math.isqrt(grid_points // 4))
    boundary = R_ * np.exp(1j * (2 * pi * np.arange(nb, dtype=real) / real(nb))).astype(dtype)
    radii = R_ * np.arange(K, dtype=real) / real(K)
    angles = 2 * pi * np.arange(K, dtype=real) / real(K)
    polar = (radii[:, None] * np.exp(1j * angles[None, :])).ravel().astype(dtype)
    m = grid_points - nb - K * K
    rr = R_ * np.sqrt(rng.uniform(size=m)).astype(real)
    tt = (2 * pi) * rng.uniform(size=m).astype(real)
    fill = (rr * np.exp(1j * tt)).astype(dtype)
    pts = np.concatenate([boundary, polar, fill])
    resolution = max(2 * math.pi * radius / nb, radius / K, 2 * math.pi * radius * (K - 1) / K / K)
    return pts, resolution


def sup_error_probe(fn, target, radius: float = CERTIFIED_RADIUS, grid_points: int = 4096,
                    rng=None, dtype=complex) -> SupProbe:
    """``max |fn - target|`` over the probe points; a lower estimate of the true sup."""
    pts, resolution = disk_probe_points(radius, grid_points, rng, dtype)
    err = np.abs(np.asarray(fn(pts)) - np.asarray(target(pts)))
    return SupProbe(float(np.max(err)), resolution, int(pts.size))


def activation_sup_errors(act: ActivationPair, d_hat: int, grid_points: int = 4096, rng=None) -> tuple:
    """Probed ``(sup|f1 - xi^2|, sup|f2 - mu_d|)`` on ``|xi| <= 3``."""
    e1 = sup_error_probe(act.f1, np.square, grid_points=grid_points, rng=rng)
    e2 = sup_error_probe(act.f2, lambda xi: mobius_trunc(d_hat, xi), grid_points=grid_points, rng=rng)
    return e1, e2
