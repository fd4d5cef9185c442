import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from symsep.algebra import cube_indices
from symsep.hardfn import (HardFnSpec, circle_sup, g_a_norm_sq, g_a_norm_sq_range, g_coeff,
                           g_coeff_sq_bound, g_eval, g_eval_expansion, g_prime_eval, g_terms, h_eval,
                           h_lipschitz_probe, lipschitz_bound, lipschitz_probe, mobius, mobius_trunc,
                           mobius_trunc_coeff, mobius_trunc_lipschitz_probe, mobius_trunc_norm_sq,
                           sample_torus_input)
from symsep.inner import RegimeError, mc_inner
from symsep.sampling import derive_rng

r = 0.25


def fft_coefficients(t, size=64):
    # oracle: Fourier coefficients of the truncation sampled on roots of unity
    xi = np.exp(2j * np.pi * np.arange(size) / size)
    # fft uses exp(-2 pi i k n / size), which picks out the coefficient of xi^k
    return np.fft.fft(mobius_trunc(t, xi)) / size


def poly_coefficients(t):
    # oracle: expand (r - xi) * sum_k (r xi)^k with numpy polynomial arithmetic
    geom = np.array([r ** k for k in range(t)])
    return np.polynomial.polynomial.polymul([r, -1.0], geom)


class TestMobius:
    def test_examples(self):
        assert mobius(1.0) == pytest.approx(-1.0)
        assert mobius(r) == 0

    def test_unit_modulus_on_circle(self):
        xi = np.exp(1j * np.linspace(0, 2 * np.pi, 1000))
        np.testing.assert_allclose(np.abs(mobius(xi)), 1.0, atol=1e-14)

    def test_pole(self):
        with pytest.raises(ValueError):
            mobius(4.0)


class TestTruncation:
    def test_examples(self):
        xi = np.array([0.3 + 0.1j, -2.0])
        np.testing.assert_allclose(mobius_trunc(1, xi), r - xi)
        assert mobius_trunc(2, 1.0) == pytest.approx(-15 / 16)
        assert mobius_trunc(5, 0.0) == pytest.approx(r)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            mobius_trunc(0, 1.0)

    @pytest.mark.parametrize("t", range(1, 13))
    def test_sup_on_circle(self, t):
        assert circle_sup(lambda xi: mobius_trunc(t, xi)) <= 1 + r ** t + 1e-14

    @pytest.mark.parametrize("t", [1, 2, 3, 6])
    def test_close_to_untruncated(self, t):
        xi = np.exp(1j * np.random.default_rng(t).uniform(0, 2 * np.pi, 1000))
        assert np.max(np.abs(mobius_trunc(t, xi) - mobius(xi))) <= r ** t + 1e-14

    def test_preserves_long_double(self):
        xi = np.array([0.5 + 0.5j], dtype=np.clongdouble)
        assert mobius_trunc(3, xi).dtype == np.clongdouble

    @pytest.mark.parametrize("t", range(1, 9))
    def test_lipschitz(self, t):
        assert mobius_trunc_lipschitz_probe(t, 10000, derive_rng(0, "mu", t)) <= 6.0


class TestCoefficients:
    def test_table(self):
        assert mobius_trunc_coeff(2, 0) == Fraction(1, 4)
        assert mobius_trunc_coeff(2, 1) == Fraction(-15, 16)
        assert mobius_trunc_coeff(2, 2) == Fraction(-1, 4)
        assert mobius_trunc_coeff(2, 3) == 0

    @pytest.mark.parametrize("t", range(1, 10))
    def test_against_polynomial_and_fft(self, t):
        coeffs = [float(mobius_trunc_coeff(t, a)) for a in range(t + 3)]
        poly = np.concatenate([poly_coefficients(t), [0.0, 0.0]])
        np.testing.assert_allclose(coeffs, poly, atol=1e-15)
        fft = fft_coefficients(t)[: t + 3]
        np.testing.assert_allclose(coeffs, fft.real, atol=1e-14)

    @pytest.mark.parametrize("t", range(1, 13))
    def test_norm_exact(self, t):
        assert mobius_trunc_norm_sq(t) == 1 + Fraction(1, 4) ** (2 * t)

    def test_norm_two(self):
        assert mobius_trunc_norm_sq(2) == Fraction(257, 256)

    def test_float_fallback(self):
        c = mobius_trunc_coeff(20, 3)
        assert isinstance(c, float)
        assert mobius_trunc_norm_sq(20) == pytest.approx(1 + 0.25 ** 40, rel=1e-14)

    def test_negative_degree(self):
        with pytest.raises(ValueError):
            mobius_trunc_coeff(2, -1)


class TestProduct:
    def test_example(self):
        assert h_eval(np.array([1.0, 1.0]), 2) == pytest.approx(225 / 256)

    def test_length(self):
        with pytest.raises(ValueError):
            h_eval(np.ones(3), 2)

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_sup(self, d):
        z = sample_torus_input(d, 5000, d, 1)[..., 0]
        assert np.max(np.abs(h_eval(z, d))) <= 1 + 2.0 ** -d

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_lipschitz(self, d):
        assert h_lipschitz_probe(d, 10000, derive_rng(1, "h", d)) <= 12.0


class TestHardFunction:
    def test_all_ones_example(self):
        spec = HardFnSpec(1, 2, d_hat=2)
        assert g_eval(spec, np.ones((2, 2))) == pytest.approx(3.265625)

    def test_shape_check(self):
        spec = HardFnSpec(2, 1)
        with pytest.raises(ValueError):
            g_eval(spec, np.ones((1, 3)))

    def test_batched_shapes(self):
        spec = HardFnSpec(2, 1)
        X = sample_torus_input(0, (3, 5), 1, 2)
        assert g_eval(spec, X).shape == (3, 5)

    @given(st.permutations(range(8)))
    def test_permutation_invariant(self, perm):
        spec = HardFnSpec(4, 2, d_hat=2)
        X = sample_torus_input(3, 1, 2, 4)[0]
        assert g_eval(spec, X[:, list(perm)]) == pytest.approx(g_eval(spec, X), abs=1e-12)

    @pytest.mark.parametrize("N,D", [(8, 2), (18, 3), (2, 1)])
    def test_sup_bound(self, N, D):
        spec = HardFnSpec(N, D)
        X = sample_torus_input(derive_rng(N, "sup"), 2000, D, N)
        assert np.max(np.abs(g_eval(spec, X))) <= 12 * N * N

    def test_only_first_d_hat_rows(self):
        spec = HardFnSpec(2, 3, d_hat=1)
        X = sample_torus_input(4, 1, 3, 2)[0]
        Y = X.copy()
        Y[1:] = 1.0
        assert g_eval(spec, X) == g_eval(spec, Y)

    def test_d_hat_range(self):
        with pytest.raises(ValueError):
            HardFnSpec(8, 2, d_hat=3)


class TestHardCoefficients:
    def test_example(self):
        spec = HardFnSpec(8, 2)
        assert g_coeff(spec, (1, 1)) == Fraction(225, 128)

    def test_zero_index(self):
        with pytest.raises(ValueError):
            g_coeff(HardFnSpec(8, 2), (0, 0))

    def test_large_component(self):
        assert g_coeff(HardFnSpec(8, 2), (3, 1)) == 0

    def test_length(self):
        with pytest.raises(ValueError):
            g_coeff(HardFnSpec(8, 2), (1,))

    @pytest.mark.parametrize("d", [1, 2])
    def test_against_fft_of_product(self, d):
        # oracle: d-dimensional FFT of h on a grid of roots of unity
        size = 8
        grid = np.exp(2j * np.pi * np.arange(size) / size)
        mesh = np.stack(np.meshgrid(*([grid] * d), indexing="ij"), axis=-1)
        H = np.fft.fftn(h_eval(mesh, d)) / size ** d
        spec = HardFnSpec(2 * d * d, d)
        for alpha in cube_indices(d, d):
            assert float(g_coeff(spec, alpha)) == pytest.approx(sum(alpha) * H[alpha].real, abs=1e-13)

    @pytest.mark.parametrize("N,D,d", [(1, 1, 1), (2, 1, 1), (3, 2, 2), (4, 2, 2), (4, 3, 2)])
    def test_duality(self, N, D, d):
        spec = HardFnSpec(N, D, d_hat=d)
        X = sample_torus_input(derive_rng(N, D, d), 50, D, N)
        np.testing.assert_allclose(g_eval(spec, X), g_eval_expansion(spec, X), atol=1e-10)

    def test_coefficients_do_not_depend_on_n(self):
        a = g_terms(HardFnSpec(8, 2))
        b = g_terms(HardFnSpec(16, 2, d_hat=2))
        assert a == b
        X = sample_torus_input(9, 20, 2, 16)
        spec = HardFnSpec(16, 2, d_hat=2)
        np.testing.assert_allclose(g_eval(spec, X), g_eval_expansion(spec, X), atol=1e-10)

    @pytest.mark.parametrize("N,D", [(2, 1), (8, 2), (18, 3), (32, 4)])
    def test_coefficient_bound(self, N, D):
        spec = HardFnSpec(N, D)
        assert max(float(c) ** 2 for _, c in g_terms(spec)) <= g_coeff_sq_bound(spec)


class TestNorm:
    # frozen from the FFT coefficient oracle above
    FROZEN = {1: Fraction(12), 2: Fraction(210483, 4096), 3: Fraction(485006018787, 4294967296)}

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_frozen(self, d):
        spec = HardFnSpec(2 * d * d, d)
        assert g_a_norm_sq(spec) == self.FROZEN[d]

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_oracle_reproduces_frozen(self, d):
        size = 8
        grid = np.exp(2j * np.pi * np.arange(size) / size)
        mesh = np.stack(np.meshgrid(*([grid] * d), indexing="ij"), axis=-1)
        H = np.fft.fftn(h_eval(mesh, d)) / size ** d
        total = sum((sum(a) * H[a].real) ** 2 for a in cube_indices(d, d))
        assert 12 * total == pytest.approx(float(self.FROZEN[d]), rel=1e-12)

    @pytest.mark.parametrize("N,D", [(2, 1), (8, 2), (18, 3), (32, 4)])
    def test_range(self, N, D):
        spec = HardFnSpec(N, D)
        lo, hi = g_a_norm_sq_range(spec)
        assert lo <= g_a_norm_sq(spec) <= hi

    def test_regime(self):
        spec = HardFnSpec(4, 2, d_hat=2)
        with pytest.raises(RegimeError):
            g_a_norm_sq(spec)
        assert spec.a_norm is None
        assert spec.normalizer == pytest.approx(math.sqrt(float(self.FROZEN[2])))

    def test_g_prime_scaling(self):
        spec = HardFnSpec(8, 2)
        X = sample_torus_input(1, 10, 2, 8)
        np.testing.assert_allclose(g_prime_eval(spec, X), g_eval(spec, X) / spec.a_norm)
        assert np.max(np.abs(g_prime_eval(spec, X))) <= 12 * 64

    def test_unit_norm_mc(self):
        spec = HardFnSpec(2, 1)
        gp = lambda X: g_prime_eval(spec, X)
        est = mc_inner(gp, gp, "A", 40000, derive_rng(0, "gprime"), N=2, D=1)
        assert est.agrees(1.0)


class TestLipschitz:
    def test_probe_within_bound(self):
        spec = HardFnSpec(8, 2)
        probe = lipschitz_probe(spec, 1000, 0)
        assert 0 <= probe.ratio <= probe.bound == lipschitz_bound(8, 2)
        assert probe.pairs == 1000

    def test_bad_count(self):
        with pytest.raises(ValueError):
            lipschitz_probe(HardFnSpec(2, 1), 0)

    def test_small_perturbation_matches_finite_difference(self):
        spec = HardFnSpec(4, 2, d_hat=2)
        X = sample_torus_input(7, 1, 2, 4)[0]
        d, n = 1, 3

        def rotated(h):
            Y = X.copy()
            Y[d, n] *= np.exp(1j * h)
            return Y

        step = 1e-5
        slope = abs(g_eval(spec, rotated(step)) - g_eval(spec, rotated(-step))) / (2 * step)
        tiny = 1e-8
        ratio = abs(g_eval(spec, rotated(tiny)) - g_eval(spec, X)) / np.linalg.norm(rotated(tiny) - X)
        assert ratio == pytest.approx(slope, rel=1e-4)
