"""
Tests for exponent vectors, monomial orders and weight vectors
"""

import os
import sys
from functools import cmp_to_key
from itertools import combinations, product

import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "../.."))

from inobody.errors import DimensionError, DomainError
from inobody.monomial import (
    check_expvec,
    deglex_compare,
    deglex_key,
    dehomogenize,
    homogenize,
    lex_compare,
    monomials_of_degree,
    weight,
    weight_vector,
)


class TestOrders:
    """Test lex and deglex"""

    def test_lex_first_coordinate_decides(self):
        """x1 is the most significant variable"""
        assert lex_compare((1, 0, 0), (0, 5, 5)) == 1
        assert lex_compare((0, 1, 1), (0, 1, 2)) == -1
        assert lex_compare((2, 2), (2, 2)) == 0

    def test_deglex_degree_first(self):
        """Lower total degree is smaller regardless of lex"""
        assert deglex_compare((0, 3), (2, 0)) == 1
        assert deglex_compare((1, 1), (2, 0)) == -1

    def test_length_mismatch(self):
        """Comparisons need equal lengths"""
        with pytest.raises(DimensionError):
            lex_compare((1,), (1, 0))

    def test_deglex_key_matches_compare(self):
        """Sorting by key and by comparator agree"""
        vecs = [(2, 0), (0, 1), (1, 1), (0, 0), (0, 3)]
        assert sorted(vecs, key=deglex_key) == sorted(vecs, key=cmp_to_key(deglex_compare))

    @pytest.mark.parametrize("compare", [lex_compare, deglex_compare])
    def test_total_orders(self, compare):
        """Both comparators are reflexive only on equal vectors, antisymmetric, total and transitive"""
        vecs = [v for d in range(3) for v in monomials_of_degree(3, d)]
        for a in vecs:
            for b in vecs:
                assert (compare(a, b) == 0) == (a == b)
                assert compare(a, b) == -compare(b, a)
        for a, b, c in product(vecs, repeat=3):
            if compare(a, b) < 0 and compare(b, c) < 0:
                assert compare(a, c) < 0


class TestWeights:
    """Test the lex-realizing weight vector"""

    def test_weight_vector(self):
        """w_d = ((d+1)^(n-1), ..., 1)"""
        assert weight_vector(3, 2) == (9, 3, 1)
        assert weight_vector(1, 5) == (1,)

    @pytest.mark.parametrize("n,d", [(2, 3), (3, 2), (4, 2)])
    def test_weight_realizes_lex(self, n, d):
        """On degree-d monomials, comparing weights equals comparing lex"""
        w = weight_vector(n, d)
        for a, b in combinations(monomials_of_degree(n, d), 2):
            assert (weight(a, w) > weight(b, w)) == (lex_compare(a, b) > 0)

    def test_bad_parameters(self):
        """n >= 1, d >= 0"""
        with pytest.raises(DomainError):
            weight_vector(0, 1)


class TestExpVec:
    """Test validation and homogenization"""

    def test_negative_rejected(self):
        """Exponents are nonnegative"""
        with pytest.raises(DomainError):
            check_expvec((1, -1))

    def test_homogenize_roundtrip(self):
        """homogenize appends the missing degree"""
        assert homogenize((1, 2), 5) == (1, 2, 2)
        assert dehomogenize(homogenize((1, 2), 5)) == (1, 2)
        with pytest.raises(DomainError):
            homogenize((3, 3), 5)

    def test_monomials_sorted_and_counted(self):
        """C(d+n-1, n-1) monomials in strictly ascending lex"""
        monos = monomials_of_degree(3, 3)
        assert len(monos) == 10
        assert monos[0] == (0, 0, 3)
        assert monos[-1] == (3, 0, 0)
        assert all(lex_compare(a, b) < 0 for a, b in zip(monos, monos[1:]))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
