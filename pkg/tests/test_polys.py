import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from symsep.algebra import Partition
from symsep.polys import (PowersumProductTerm, evaluate_expansion, ipow, monomial, multi_powersum,
                          multi_powersum_table, pair_product, powersum, powersum_partition)


def naive_multi_powersum(alpha, X):
    D, M = X.shape
    total = 0j
    for n in range(M):
        v = 1 + 0j
        for d in range(D):
            v *= X[d, n] ** alpha[d]
        total += v
    return total / math.sqrt(sum(alpha))


class TestScalar:
    @given(st.integers(0, 20))
    def test_ipow_matches_power(self, k):
        x = np.array([0.3 + 0.4j, -1.0, 0.0, 1j])
        np.testing.assert_allclose(ipow(x, k), x ** k, rtol=1e-12, atol=1e-300)

    def test_ipow_zero_base(self):
        assert ipow(np.array(0.0), 0) == 1 and ipow(np.array(0.0), 3) == 0

    def test_ipow_negative(self):
        with pytest.raises(ValueError):
            ipow(1.0, -1)

    def test_powersum_normalization(self):
        x = np.array([1.0, 1.0, 1.0, 1.0])
        assert powersum(1, x) == 4
        assert powersum(4, x) == pytest.approx(2.0)
        assert powersum(0, x) == 1

    def test_partition_product(self):
        x = np.exp(1j * np.array([0.1, 0.7, 2.0]))
        lam = Partition.of(2, 1, 1)
        np.testing.assert_allclose(powersum_partition(lam, x), powersum(2, x) * powersum(1, x) ** 2)
        assert powersum_partition(Partition(), x) == 1

    def test_batched(self):
        x = np.exp(1j * np.arange(12.0).reshape(3, 4))
        assert powersum(2, x).shape == (3,)


class TestMulti:
    def test_against_naive(self):
        rng = np.random.default_rng(0)
        X = np.exp(1j * rng.uniform(0, 6.3, size=(3, 5)))
        for alpha in [(1, 0, 0), (2, 1, 0), (0, 3, 1), (1, 1, 1)]:
            assert multi_powersum(alpha, X) == pytest.approx(naive_multi_powersum(alpha, X), abs=1e-12)

    def test_zero_index(self):
        X = np.ones((2, 3))
        assert multi_powersum((0, 0), X) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            multi_powersum((1, 2, 0), np.ones((2, 4)))
        with pytest.raises(ValueError):
            multi_powersum((0, 0, 0), np.ones((2, 4)))
        with pytest.raises(ValueError):
            monomial((1, 2), np.ones(3))

    def test_monomial(self):
        q = np.array([2.0, 1j])
        assert monomial((2, 3), q) == pytest.approx(4 * (-1j))

    @given(st.permutations(range(6)))
    def test_permutation_invariance(self, perm):
        rng = np.random.default_rng(1)
        X = np.exp(1j * rng.uniform(0, 6.3, size=(2, 6)))
        a, b = (2, 1), (0, 1)
        np.testing.assert_allclose(pair_product(a, b, X[:, list(perm)]), pair_product(a, b, X), atol=1e-12)

    def test_table(self):
        X = np.exp(1j * np.arange(8.0).reshape(2, 4))
        idx = [(1, 0), (0, 2), (1, 1)]
        T = multi_powersum_table(idx, X)
        assert T.shape == (3,)
        np.testing.assert_allclose(T, [multi_powersum(a, X) for a in idx])


class TestExpansion:
    def test_pair_term_is_canonical(self):
        t1 = PowersumProductTerm.pair((1, 0), (0, 1), 2.0)
        t2 = PowersumProductTerm.pair((0, 1), (1, 0), 2.0)
        assert t1 == t2

    def test_evaluate(self):
        X = np.exp(1j * np.arange(6.0).reshape(2, 3))
        terms = [PowersumProductTerm.pair((1, 0), (1, 0), 2.0), PowersumProductTerm.pair((0, 1), (1, 1), -1j)]
        expected = 2 * pair_product((1, 0), (1, 0), X) - 1j * pair_product((0, 1), (1, 1), X)
        np.testing.assert_allclose(evaluate_expansion(terms, X), expected)

    def test_partition_term(self):
        x = np.exp(1j * np.arange(3.0))
        term = PowersumProductTerm(Partition.of(1, 1), 0.5)
        np.testing.assert_allclose(term.evaluate(x), 0.5 * powersum(1, x) ** 2)
