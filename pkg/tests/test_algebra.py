import math
from collections import Counter
from itertools import product

import pytest
from hypothesis import given, strategies as st

from symsep.algebra import (Partition, canonical_pair, count_exact_weight, cube_indices, d_hat,
                            enumerate_multi_indices, inf_norm, l_star, partitions, partitions_up_to,
                            weight, z_constant)


def brute_partitions(n):
    # every non-increasing tuple of positive parts summing to n
    out = set()
    for k in range(1, n + 1):
        for parts in product(range(1, n + 1), repeat=k):
            if sum(parts) == n:
                out.add(tuple(sorted(parts, reverse=True)))
    return out


class TestPartition:
    def test_of_sorts(self):
        assert Partition.of(1, 3, 2).parts == (3, 2, 1)

    def test_rejects_bad_parts(self):
        with pytest.raises(ValueError):
            Partition((1, 2))
        with pytest.raises(ValueError):
            Partition((2, 0))

    def test_empty(self):
        lam = Partition()
        assert lam.weight == 0 and lam.length == 0 and str(lam) == "{}"

    def test_multiplicities(self):
        assert Partition.of(2, 1, 1).multiplicities() == {2: 1, 1: 2}


class TestPartitions:
    @pytest.mark.parametrize("n", range(0, 8))
    def test_matches_brute_force(self, n):
        got = [lam.parts for lam in partitions(n)]
        if n == 0:
            assert got == [()]
        else:
            assert set(got) == brute_partitions(n)
        assert len(got) == len(set(got))

    def test_counts(self):
        assert [len(list(partitions(n))) for n in range(10)] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30]

    def test_up_to_four_has_twelve(self):
        assert len(partitions_up_to(4)) == 12


class TestConstants:
    def test_z_examples(self):
        assert z_constant(Partition.of(1, 1)) == 2
        assert z_constant(Partition.of(2, 1)) == 1
        assert z_constant((1, 1, 1, 1)) == 24
        assert z_constant(Partition()) == 1

    @given(st.lists(st.integers(1, 5), max_size=8))
    def test_z_is_product_of_factorials(self, parts):
        expected = math.prod(math.factorial(m) for m in Counter(parts).values())
        assert z_constant(Partition.of(*parts)) == expected

    def test_d_hat(self):
        assert d_hat(8, 2) == 2
        assert d_hat(18, 5) == 3
        assert d_hat(4, 3) == 1
        assert d_hat(2, 1) == 1

    def test_l_star(self):
        assert l_star(2, 1) == 2
        assert l_star(4, 2) == math.comb(6, 4) - 1

    def test_weight_and_norm(self):
        assert weight((1, 2, 0)) == 3 and inf_norm((1, 2, 0)) == 2


class TestMultiIndices:
    @given(st.integers(1, 4), st.integers(0, 5))
    def test_exact_weight_count(self, D, w):
        brute = sum(1 for a in product(range(w + 1), repeat=D) if sum(a) == w)
        assert count_exact_weight(D, w) == brute
        assert len(enumerate_multi_indices(D, w, w)) == brute

    def test_order_is_weight_then_lex(self):
        idx = enumerate_multi_indices(2, 1, 2)
        assert idx == [(0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]

    def test_n8_d2_has_fourteen(self):
        assert len(enumerate_multi_indices(2, 1, 4)) == 14

    def test_inf_cap(self):
        idx = enumerate_multi_indices(3, 0, 6, inf_max=1)
        assert all(max(a) <= 1 for a in idx) and len(idx) == 8

    def test_cube(self):
        cube = cube_indices(2, 2)
        assert len(cube) == 8 and (0, 0) not in cube
        assert [sum(a) for a in cube] == sorted(sum(a) for a in cube)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            enumerate_multi_indices(0, 0, 1)
        with pytest.raises(ValueError):
            enumerate_multi_indices(2, 3, 1)

    @given(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.tuples(st.integers(0, 3), st.integers(0, 3)))
    def test_canonical_pair_symmetric(self, a, b):
        assert canonical_pair(a, b) == canonical_pair(b, a)
