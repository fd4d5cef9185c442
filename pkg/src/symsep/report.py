"""Verification, bound and approximation sections of a run report.

Each section is a dict with a ``rows`` list and a ``status``.  Rows that test
an inequality carry the measured value, the bound and the margin; a positive
margin means the check passed.  Every random stream is derived from the run
seed and the row identity, so a report is a pure function of its config.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import __version__
from .algebra import enumerate_multi_indices, partitions_up_to, z_constant
from .bounds import (bound_1d, bound_hard_highd, bound_simple_highd, hard_threshold,
                     rank_lemma_oracle, simple_highd_T)
from .config import EXACT_TOL, MC_FLOOR, MC_SIGMAS, RunConfig
from .hardfn import (R, HardFnSpec, circle_sup, g_a_norm_sq, g_a_norm_sq_range, g_coeff_sq_bound,
                     g_eval, g_eval_expansion, g_terms, h_lipschitz_probe, lipschitz_probe,
                     mobius_trunc, mobius_trunc_lipschitz_probe, mobius_trunc_norm_sq,
                     sample_torus_input, H_LIPSCHITZ, MU_LIPSCHITZ)
from .inner import (InnerProductKind, RegimeError, exact_A_pair, exact_A_zero_pair,
                    exact_pair_gram, exact_star_pair, mc_gram, mc_inner, powersum_features)
from .nets import (ActivationPair, PairwiseNet, activation_sup_errors,
                   budget_epsilon, choose_J, log_factorial, net_error_bound)
from .polys import multi_powersum_table
from .sampling import derive_rng

SCHEMA_VERSION = 1
PASS, FAIL, SKIP = "pass", "fail", "skipped"


class _Checks:
    """Row collector; ``corrupt`` names one identity whose reference value is deliberately shifted."""

    def __init__(self, corrupt: Optional[str] = None):
        self.rows = []
        self.corrupt = corrupt

    def _shift(self, identity: str) -> float:
        return 1.0 if identity == self.corrupt else 0.0

    def upper(self, identity: str, measured: float, bound: float, **extra):
        """Pass when ``measured <= bound``."""
        bound = bound - self._shift(identity) * (abs(bound) + 1.0)
        margin = bound - measured
        self._add(identity, PASS if margin >= 0 else FAIL, measured, bound, margin, extra)

    def lower(self, identity: str, measured: float, bound: float, **extra):
        """Pass when ``measured >= bound``."""
        bound = bound + self._shift(identity) * (abs(bound) + 1.0)
        margin = measured - bound
        self._add(identity, PASS if margin >= 0 else FAIL, measured, bound, margin, extra)

    def exact(self, identity: str, measured, expected, tol: float = EXACT_TOL, **extra):
        expected = expected + self._shift(identity)
        dev = float(abs(measured - expected))
        status = PASS if (dev <= tol if tol else measured == expected) else FAIL
        self._add(identity, status, _num(measured), _num(expected), tol - dev, dict(extra, deviation=dev))

    def mc(self, identity: str, est, expected, **extra):
        """Every component within ``5`` standard errors (plus a roundoff floor)."""
        expected = np.asarray(expected) + self._shift(identity)
        ok = est.agrees(expected, MC_SIGMAS, MC_FLOOR)
        z = float(np.max(est.z_scores(expected)))
        dev = float(np.max(np.abs(np.asarray(est.mean) - expected)))
        extra = dict(extra, max_deviation=dev, max_stderr=float(np.max(est.stderr)),
                     samples=est.samples, batches=est.n_batches)
        self._add(identity, PASS if bool(np.all(ok)) else FAIL, z, MC_SIGMAS, MC_SIGMAS - z, extra)

    def skip(self, identity: str, reason: str):
        self._add(identity, SKIP, None, None, None, {"note": reason})

    def _add(self, identity, status, measured, bound, margin, extra):
        row = {"identity": identity, "status": status, "measured": measured, "bound": bound, "margin": margin}
        row.update(extra)
        self.rows.append(row)

    def section(self, name: str, **extra) -> dict:
        failed = any(r["status"] == FAIL for r in self.rows)
        out = {"section": name, "status": FAIL if failed else PASS, "rows": self.rows}
        out.update(extra)
        return out


def _num(value):
    if isinstance(value, Fraction):
        return str(value)
    return value


def _spec(cfg: RunConfig) -> HardFnSpec:
    return HardFnSpec(cfg.N, cfg.D, cfg.d_hat)


def _mc_kwargs(cfg: RunConfig) -> dict:
    return {"burn_in": cfg.burn_in, "thin": cfg.thin}


def pair_feature_fn(indices) -> Callable:
    """Features ``p_a p_b`` over all ordered pairs of ``indices``, in row-major order."""
    K = len(indices)

    def features(X):
        P = multi_powersum_table(indices, X)
        return (P[..., :, None] * P[..., None, :]).reshape(P.shape[:-1] + (K * K,))

    return features


# --------------------------------------------------------------------------
# verify


def _verify_inner(cfg: RunConfig, checks: _Checks) -> None:
    N, D = cfg.N, cfg.D
    parts = partitions_up_to(min(N, 4))
    est = mc_gram(lambda z: powersum_features(parts, z), InnerProductKind.V, cfg.mc_samples,
                  derive_rng(cfg.seed, "hall-orthogonality"), N=N, **_mc_kwargs(cfg))
    expected = np.diag([float(z_constant(lam)) for lam in parts])
    checks.mc("hall-orthogonality", est, expected, features=len(parts))

    w = min(2, N // 2)
    if w < 1:
        checks.skip("pair-orthogonality", "needs N >= 2")
        return
    indices = enumerate_multi_indices(D, 1, w)
    est = mc_gram(pair_feature_fn(indices), InnerProductKind.A, cfg.mc_samples,
                  derive_rng(cfg.seed, "pair-orthogonality"), N=N, D=D, **_mc_kwargs(cfg))
    checks.mc("pair-orthogonality", est, exact_pair_gram(indices, InnerProductKind.A, N),
              features=len(indices) ** 2)

    scan = enumerate_multi_indices(D, 1, min(N // 2, 4) if D <= 2 else min(N // 2, 2))
    worst, off_diag = 0, 0
    for a in scan:
        for b in scan:
            for c in scan:
                for d in scan:
                    s = exact_star_pair(a, b, c, d, N)
                    worst = max(worst, abs(s - (exact_A_pair(a, b, c, d, N) - 2 * exact_A_zero_pair(a, b, c, d, N))))
                    if sorted((a, b)) != sorted((c, d)) and s != 0:
                        off_diag += 1
    checks.exact("star-consistency", worst, 0, tol=0, quadruples=len(scan) ** 4)
    checks.exact("star-diagonal", off_diag, 0, tol=0, quadruples=len(scan) ** 4)

    GA = exact_pair_gram(indices, InnerProductKind.A, N)
    GS = exact_pair_gram(indices, InnerProductKind.STAR, N)
    rng = derive_rng(cfg.seed, "norm-domination")
    gap = math.inf
    for _ in range(100):
        h = rng.standard_normal(GA.shape[0])
        qa, qs = h @ GA @ h, h @ GS @ h
        gap = min(gap, qa - qs, qs)
    checks.lower("norm-domination", float(gap), -EXACT_TOL, vectors=100)


def _verify_blaschke(cfg: RunConfig, checks: _Checks) -> None:
    worst = max(abs(mobius_trunc_norm_sq(t) - (1 + R ** (2 * t))) for t in range(1, 13))
    checks.exact("blaschke-norm", worst, 0, tol=0, orders="1..12")
    excess = max(circle_sup(lambda xi, t=t: mobius_trunc(t, xi)) - (1 + 0.25 ** t) for t in range(1, 13))
    checks.upper("blaschke-sup", excess, EXACT_TOL, orders="1..12")
    lip = max(mobius_trunc_lipschitz_probe(t, 10000, derive_rng(cfg.seed, "blaschke-lipschitz", t))
              for t in range(1, 13))
    checks.upper("blaschke-lipschitz", lip, MU_LIPSCHITZ, pairs=10000)


def _verify_hard(cfg: RunConfig, checks: _Checks) -> None:
    spec = _spec(cfg)
    N, d = spec.N, spec.d_hat
    lip = h_lipschitz_probe(d, 10000, derive_rng(cfg.seed, "product-lipschitz"))
    checks.upper("product-lipschitz", lip, H_LIPSCHITZ, pairs=10000)

    coeff_max = max(float(c) ** 2 for _, c in g_terms(spec))
    checks.upper("hard-coefficient-bound", coeff_max, g_coeff_sq_bound(spec))

    X = sample_torus_input(derive_rng(cfg.seed, "coefficient-duality"), 50, spec.D, N)
    dev = float(np.max(np.abs(g_eval(spec, X) - g_eval_expansion(spec, X))))
    checks.upper("coefficient-duality", dev, EXACT_TOL, inputs=50)

    count = min(cfg.mc_samples, 10000)
    X = sample_torus_input(derive_rng(cfg.seed, "hard-sup"), count, spec.D, N)
    checks.upper("hard-sup", float(np.max(np.abs(g_eval(spec, X)))), 12.0 * N * N, inputs=count)

    probe = lipschitz_probe(spec, min(cfg.mc_samples, 2000), derive_rng(cfg.seed, "hard-lipschitz"))
    checks.upper("hard-lipschitz", probe.ratio, probe.bound, pairs=probe.pairs)

    try:
        norm_sq = float(g_a_norm_sq(spec))
    except RegimeError as exc:
        checks.skip("hard-norm-range", str(exc))
        checks.skip("hard-norm-mc", str(exc))
        return
    lo, hi = g_a_norm_sq_range(spec)
    checks.lower("hard-norm-range", norm_sq, lo, upper=hi)
    checks.upper("hard-norm-range-upper", norm_sq, hi)
    est = mc_inner(lambda X: g_eval(spec, X), lambda X: g_eval(spec, X), InnerProductKind.A,
                   cfg.mc_samples, derive_rng(cfg.seed, "hard-norm-mc"), N=N, D=spec.D, **_mc_kwargs(cfg))
    checks.mc("hard-norm-mc", est, norm_sq, exact=norm_sq)


def _verify_rank(cfg: RunConfig, checks: _Checks) -> None:
    for L in (1, 2, 3):
        rep = rank_lemma_oracle(6, L, 100, derive_rng(cfg.seed, "rank-inequality", L))
        checks.upper(f"rank-inequality-L{L}", rep.violations, 0, min_ratio=rep.min_ratio, trials=rep.trials)


def verify_section(cfg: RunConfig, corrupt: Optional[str] = None) -> dict:
    checks = _Checks(corrupt)
    _verify_inner(cfg, checks)
    _verify_blaschke(cfg, checks)
    _verify_hard(cfg, checks)
    _verify_rank(cfg, checks)
    return checks.section("verify")


# --------------------------------------------------------------------------
# bounds


def bounds_section(cfg: RunConfig, corrupt: Optional[str] = None) -> dict:
    spec = _spec(cfg)
    checks = _Checks(corrupt)
    table = []
    threshold = hard_threshold(spec.N, spec.d_hat)
    simple_ok = cfg.N % 2 == 0 and min(cfg.N // 2, cfg.D - 1) >= 2
    for L in sorted(set(cfg.L_grid)):
        row = {"L": L}
        row["one_dim"] = bound_1d(cfg.N, L) if cfg.N % 2 == 0 else None
        row["simple"] = bound_simple_highd(cfg.N, cfg.D, L) if simple_ok else None
        row["simple_raw"] = bound_simple_highd(cfg.N, cfg.D, L, clamp=False) if simple_ok else None
        if spec.in_regime:
            hb = bound_hard_highd(spec, L)
            row.update(hard_exact=hb.exact, hard_closed_raw=hb.closed_form_raw, hard_closed=hb.closed_form,
                       below_threshold=L <= threshold)
        else:
            row.update(hard_exact=None, hard_closed_raw=None, hard_closed=None, below_threshold=None)
        table.append(row)

    if spec.in_regime:
        checks.exact("hard-bound-at-zero", bound_hard_highd(spec, 0).exact, 1.0 / 6.0, tol=1e-12)
        worst = min(r["hard_exact"] - r["hard_closed_raw"] for r in table)
        checks.lower("hard-exact-dominates-closed", worst, 0.0)
        below = [r["hard_exact"] for r in table if r["below_threshold"]]
        if below:
            checks.lower("hard-constant-below-threshold", min(below), 1.0 / 12.0)
    else:
        checks.skip("hard-bound-at-zero", "needs d_hat^2 <= N/2")
    for key in ("one_dim", "simple", "hard_exact"):
        vals = [r[key] for r in table if r[key] is not None]
        if vals:
            rise = max((b - a for a, b in zip(vals, vals[1:])), default=0.0)
            checks.upper(f"monotone-{key.replace('_', '-')}", rise, 0.0)
    if cfg.N % 4 == 0:
        checks.exact("one-dim-quarter-width", bound_1d(cfg.N, cfg.N // 4), 0.5, tol=0)
    return checks.section("bounds", table=table, threshold=threshold,
                          simple_T=simple_highd_T(cfg.N, cfg.D) if simple_ok else None)


# --------------------------------------------------------------------------
# approx


def approx_section(cfg: RunConfig, corrupt: Optional[str] = None) -> dict:
    spec = _spec(cfg)
    checks = _Checks(corrupt)
    N, d = spec.N, spec.d_hat
    X = sample_torus_input(derive_rng(cfg.seed, "approx-inputs"), cfg.approx_samples, spec.D, N)
    target = g_eval(spec, X) / spec.normalizer

    exact_net = PairwiseNet(spec, seed=cfg.seed)
    checks.upper("exact-network", float(np.max(np.abs(exact_net(X) - target))), EXACT_TOL,
                 inputs=cfg.approx_samples)

    eps = budget_epsilon(N, d, cfg.epsilon_target)
    J = cfg.J if cfg.J is not None else choose_J(d, eps)
    act = ActivationPair.exp(d, eps, J=J)
    e1, e2 = activation_sup_errors(act, d, rng=derive_rng(cfg.seed, "activation-probe"))
    checks.upper("squaring-surrogate", e1.error, eps, resolution=e1.resolution, points=e1.points)
    checks.upper("blaschke-surrogate", e2.error, eps, resolution=e2.resolution, points=e2.points)

    net = PairwiseNet(spec, act, seed=cfg.seed)
    err = float(np.max(np.abs(net(X) - target)))
    checks.upper("exp-network", err, cfg.epsilon_target, budget=net_error_bound(N, d, eps),
                 inputs=cfg.approx_samples)
    ledger = net.ledger()
    checks.upper("inner-weight-bound", ledger["max_inner_weight"], log_factorial(d) + 0.25 + EXACT_TOL)
    return checks.section("approx", activation_epsilon=eps, J=J, ledger=ledger,
                          in_regime=spec.in_regime, normalizer=spec.normalizer)


SECTIONS = {"verify": verify_section, "bounds": bounds_section, "approx": approx_section}


def build_report(cfg: RunConfig, sections, corrupt: Optional[str] = None) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "version": __version__, "config": cfg.to_dict(), "sections": {}}
    for name in sections:
        out["sections"][name] = SECTIONS[name](cfg, corrupt)
    failed = any(s["status"] == FAIL for s in out["sections"].values())
    out["status"] = FAIL if failed else PASS
    return out
