"""Random streams, the CUE eigenvalue sampler and structured set inputs.

The CUE eigenvalue law has density proportional to ``|V(e^{i theta})|^2`` on the
torus.  It is sampled here with a Metropolis-Hastings chain over the angles
using single-coordinate uniform proposals.  The chain object is vectorized:
one ``CUEChain`` advances ``chains`` independent Markov chains in lock-step,
each with its own state, so batch-means error estimates can be formed within
each chain.
"""

from __future__ import annotations

import hashlib
import math
from typing import Iterator, Optional

import numpy as np

TWO_PI = 2.0 * math.pi
TARGET_ACCEPTANCE = 0.4


def _key_to_int(key) -> int:
    digest = hashlib.sha256(repr(key).encode()).digest()
    return int.from_bytes(digest[:4], "little")


def derive_rng(seed: int, *keys) -> np.random.Generator:
    """Generator for the sub-stream ``keys`` of the 64-bit root ``seed``.

    Keys are hashed with SHA-256 (never Python's salted ``hash``) so the same
    ``(seed, keys)`` always reproduces the same stream.
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=tuple(_key_to_int(k) for k in keys))
    return np.random.default_rng(ss)


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_uniform_circle(rng, count) -> np.ndarray:
    """``count`` i.i.d. points uniform on the unit circle (``count`` may be a shape)."""
    rng = as_rng(rng)
    return np.exp(1j * rng.uniform(0.0, TWO_PI, size=count))


def log_vandermonde_sq(theta) -> np.ndarray:
    """``sum_{i<j} log|e^{i theta_j} - e^{i theta_i}|^2`` over the last axis.

    Returns ``-inf`` where two angles coincide.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[-1]
    if n < 2:
        return np.zeros(theta.shape[:-1])
    i, j = np.triu_indices(n, k=1)
    diff = theta[..., j] - theta[..., i]
    # |e^{ia} - e^{ib}|^2 = 4 sin^2((a - b)/2)
    with np.errstate(divide="ignore"):
        terms = 2.0 * np.log(np.abs(2.0 * np.sin(0.5 * diff)))
    return terms.sum(axis=-1)


class CUEChain:
    """Vectorized Metropolis-Hastings sampler for CUE eigenvalue angles.

    Parameters
    ----------
    N : int
        Number of eigenvalues.
    rng : Generator or seed
        Source of randomness; owned by this chain.
    chains : int
        Number of independent chains advanced together.
    step_scale : float
        Half-width of the uniform angle proposal.  Capped at ``pi``, where the
        proposal is uniform on the circle.
    """

    def __init__(self, N: int, rng=None, chains: int = 1, step_scale: float = 1.0):
        if N < 1:
            raise ValueError("N must be >= 1")
        if chains < 1:
            raise ValueError("chains must be >= 1")
        self.N = N
        self.chains = chains
        self.rng = as_rng(rng)
        self.step_scale = min(float(step_scale), math.pi)
        # start near the density maximum: equispaced angles, random rotation and jitter
        base = TWO_PI * np.arange(N) / N
        rot = self.rng.uniform(0.0, TWO_PI, size=(chains, 1))
        jitter = self.rng.uniform(-0.1, 0.1, size=(chains, N)) * (math.pi / N)
        self.theta = np.mod(base[None, :] + rot + jitter, TWO_PI)
        self.log_density = log_vandermonde_sq(self.theta)
        self.accepted = 0
        self.proposed = 0
        self._coord = 0
        self._others = [np.delete(np.arange(N), i) for i in range(N)]

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0

    def step(self) -> None:
        """One single-coordinate update in every chain (systematic scan)."""
        i = self._coord
        self._coord = (i + 1) % self.N
        if self.N == 1:
            # constant density: every proposal is accepted
            prop = self.theta[:, 0] + self.rng.uniform(-self.step_scale, self.step_scale, self.chains)
            self.theta[:, 0] = np.mod(prop, TWO_PI)
            self.accepted += self.chains
            self.proposed += self.chains
            return
        old = self.theta[:, i]
        new = np.mod(old + self.rng.uniform(-self.step_scale, self.step_scale, self.chains), TWO_PI)
        others = self.theta[:, self._others[i]]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = 2.0 * np.log(np.abs(2.0 * np.sin(0.5 * (new[:, None] - others)))).sum(axis=1)
            t_old = 2.0 * np.log(np.abs(2.0 * np.sin(0.5 * (old[:, None] - others)))).sum(axis=1)
            delta = t_new - t_old
        log_u = np.log(self.rng.uniform(size=self.chains))
        accept = log_u < delta  # never true when delta is -inf or nan
        self.theta[accept, i] = new[accept]
        self.log_density[accept] += delta[accept]
        self.accepted += int(accept.sum())
        self.proposed += self.chains

    def sweep(self, count: int = 1) -> None:
        for _ in range(count * self.N):
            self.step()

    def tune(self, sweeps: int) -> None:
        """Burn-in with step-size adaptation toward 40% acceptance.

        Adaptation happens only here; once burn-in ends the kernel is fixed.
        """
        for _ in range(sweeps):
            acc0, prop0 = self.accepted, self.proposed
            self.sweep()
            rate = (self.accepted - acc0) / max(self.proposed - prop0, 1)
            self.step_scale = min(math.pi, self.step_scale * math.exp(rate - TARGET_ACCEPTANCE))
        self.accepted = 0
        self.proposed = 0

    def recompute_log_density(self) -> np.ndarray:
        return log_vandermonde_sq(self.theta)

    def drift(self) -> float:
        """Largest gap between the tracked and the recomputed log density."""
        return float(np.max(np.abs(self.log_density - self.recompute_log_density())))


def default_burn_in(N: int) -> int:
    return 10 * N * N


def default_thin(N: int) -> int:
    return N


def cue_sampler(
    N: int,
    rng=None,
    burn_in: Optional[int] = None,
    thin: Optional[int] = None,
    chains: int = 1,
) -> Iterator[np.ndarray]:
    """Endless stream of CUE angle draws, one ``(chains, N)`` array per emission.

    ``burn_in`` and ``thin`` are counted in sweeps (``N`` single-coordinate
    steps each); defaults are ``10 N^2`` and ``N``.
    """
    burn_in = default_burn_in(N) if burn_in is None else burn_in
    thin = default_thin(N) if thin is None else thin
    chain = CUEChain(N, rng, chains=chains)
    chain.tune(burn_in)
    while True:
        chain.sweep(max(thin, 1))
        yield chain.theta.copy()


def sample_cue_angles(N, per_chain, rng=None, chains=1, burn_in=None, thin=None) -> np.ndarray:
    """``(chains, per_chain, N)`` array of consecutive emitted CUE states."""
    stream = cue_sampler(N, rng, burn_in=burn_in, thin=thin, chains=chains)
    out = np.empty((chains, per_chain, N))
    for t in range(per_chain):
        out[:, t, :] = next(stream)
    return out


def assemble_input(y, q, r=None) -> np.ndarray:
    """Structured set input with columns ``q_d e^{i y_n}`` then ``r_d e^{i y_n}``.

    ``y`` holds ``N`` angles, ``q`` and ``r`` length-``D`` complex vectors; leading
    axes broadcast as a batch.  ``r=None`` means ``r = 0``.  Returns an array of
    shape ``(..., D, 2N)``.
    """
    y = np.asarray(y, dtype=float)
    q = np.asarray(q, dtype=complex)
    if r is None:
        r = np.zeros_like(q)
    r = np.asarray(r, dtype=complex)
    if q.shape[-1] != r.shape[-1]:
        raise ValueError(f"q and r must have the same length, got {q.shape[-1]} and {r.shape[-1]}")
    if y.ndim == 0:
        raise ValueError("y must be a vector of angles")
    ey = np.exp(1j * y)[..., None, :]
    return np.concatenate([q[..., :, None] * ey, r[..., :, None] * ey], axis=-1)
