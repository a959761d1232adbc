"""
Tests for flag valuations, valuative sets and NObody approximations
"""

import json
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "../.."))

import inobody.flagval as flagval
from inobody.borel import DiscreteSet, is_borel_fixed_set
from inobody.errors import DimensionError, DomainError, GenericityError, ParseError
from inobody.exactlin import RatMatrix, random_invertible
from inobody.flagval import (
    FlagChart,
    FormSpace,
    complete_system,
    dehomogenized,
    form_degree,
    form_ring,
    form_terms,
    generic_valuative_set,
    jet_derivative,
    make_form,
    nobody_approximation,
    parse_forms,
    partial_jet_separates,
    power_system,
    product_system,
    valuative_set,
    valuative_vector,
)
from inobody.monomial import monomials_of_degree
from inobody.polytope import hull, simplex_polytope


def x1_squared_and_x1x2():
    return FormSpace.from_forms(3, 2, [make_form(3, [(1, (2, 0, 0))]), make_form(3, [(1, (1, 1, 0))])])


class TestForms:
    """Test form construction"""

    def test_ring_needs_variables(self):
        """At least one variable"""
        with pytest.raises(DimensionError):
            form_ring(0)

    def test_make_form_terms(self):
        """Coefficients are exact and terms sorted by exponent"""
        f = make_form(2, [(1, (1, 1)), ("1/2", (2, 0))])
        assert form_degree(f) == 2
        assert form_terms(f) == [(Fraction(1), (1, 1)), (Fraction(1, 2), (2, 0))]

    def test_inhomogeneous(self):
        """Mixed degrees are not a form"""
        with pytest.raises(DomainError):
            form_degree(make_form(2, [(1, (1, 0)), (1, (1, 1))]))

    def test_bad_exponent(self):
        """Exponent vectors must fit the ring"""
        with pytest.raises(DimensionError):
            make_form(2, [(1, (1, 0, 0))])


class TestFormSpace:
    """Test spaces of forms"""

    def test_complete_rank(self):
        """All quadrics in 3 variables form a 6-dimensional space"""
        assert FormSpace.complete(3, 2).rank == 6

    def test_from_forms_drops_dependent(self):
        """Dependent generators do not add rank"""
        f = make_form(2, [(1, (1, 0))])
        g = make_form(2, [(2, (1, 0))])
        assert FormSpace.from_forms(2, 1, [f, g]).rank == 1

    def test_dependent_basis_rejected(self):
        """Stored bases are independent"""
        with pytest.raises(DomainError):
            FormSpace(2, 1, RatMatrix.from_rows([[1, 0], [2, 0]]))

    def test_forms_roundtrip(self):
        """forms() spans the same space"""
        space = x1_squared_and_x1x2()
        assert FormSpace.from_forms(3, 2, space.forms()) == space


class TestCharts:
    """Test flag charts and valuations"""

    def test_chart_validation(self):
        """Charts are square and invertible"""
        with pytest.raises(DomainError):
            FlagChart(RatMatrix.from_rows([[1, 1], [1, 1]]))
        with pytest.raises(DimensionError):
            FlagChart(RatMatrix.from_rows([[1, 0]]))

    def test_identity_valuation(self):
        """In the standard chart the valuation is the lex-smallest exponent"""
        f = make_form(2, [(1, (1, 1)), (1, (0, 2))])
        assert valuative_vector(f, FlagChart.identity(2)) == (0, 2)

    def test_zero_form(self):
        """The zero form has no valuation"""
        with pytest.raises(DomainError):
            valuative_vector(form_ring(2).zero, FlagChart.identity(2))

    def test_identity_valuative_set(self):
        """x1^2 and x1 x2 keep their exponents in the standard chart"""
        s = valuative_set(x1_squared_and_x1x2(), FlagChart.identity(3))
        assert set(s) == {(2, 0, 0), (1, 1, 0)}

    def test_chart_axis(self):
        """axis(j) is row j of the chart matrix"""
        g = RatMatrix.from_rows([[1, 0], [5, 1]])
        assert FlagChart(g).axis(2) == (5, 1)

    def test_complete_space_gives_all_monomials(self):
        """A complete space has every monomial as a value in any chart"""
        s = valuative_set(FormSpace.complete(3, 2), FlagChart.random(3, seed=1))
        assert set(s) == set(monomials_of_degree(3, 2))

    def test_valuation_is_multiplicative(self):
        """nu(f h) = nu(f) + nu(h) in a fixed chart"""
        rng = np.random.default_rng(31)
        for k in range(20):
            chart = FlagChart.random(3, seed=k, bound=50)
            monos = monomials_of_degree(3, 2)
            f, h = (
                make_form(3, ((int(c), m) for c, m in zip(row, monos) if c))
                for row in rng.integers(-2, 2, size=(2, 6), endpoint=True)
            )
            if not f or not h:
                continue
            expected = tuple(a + b for a, b in zip(valuative_vector(f, chart), valuative_vector(h, chart)))
            assert valuative_vector(f * h, chart) == expected

    def test_valuative_set_ignores_basis(self):
        """Any invertible recombination of the basis rows gives the same valuative set"""
        rng = np.random.default_rng(32)
        chart = FlagChart.random(3, seed=4, bound=50)
        for _ in range(10):
            forms = [
                make_form(3, ((int(c), m) for c, m in zip(row, monomials_of_degree(3, 2)) if c))
                for row in rng.integers(-2, 2, size=(3, 6), endpoint=True)
            ]
            space = FormSpace.from_forms(3, 2, forms)
            if not space.rank:
                continue
            mix = random_invertible(space.rank, bound=5, seed=int(rng.integers(0, 1000)))
            recombined = FormSpace(3, 2, mix @ space.basis)
            assert valuative_set(recombined, chart) == valuative_set(space, chart)


class TestGenericValuativeSet:
    """Test the seeded generic engine"""

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_hand_derived_case(self, seed):
        """span{x1^2, x1 x2} has generic values {(0,0,2), (0,1,1)}"""
        result = generic_valuative_set(x1_squared_and_x1x2(), seed)
        assert set(result.points) == {(0, 0, 2), (0, 1, 1)}
        assert result.certificate.borel
        assert result.certificate.master_seed == seed
        assert len(result.certificate.seeds) == 3

    def test_deterministic(self):
        """Same seed, same certificate and output"""
        a = generic_valuative_set(x1_squared_and_x1x2(), 42)
        b = generic_valuative_set(x1_squared_and_x1x2(), 42)
        assert json.dumps(a.to_json()) == json.dumps(b.to_json())

    def test_disagreeing_charts_exhaust_retries(self, monkeypatch):
        """Charts that never agree raise GenericityError"""
        answers = iter(DiscreteSet.of([(k, 0)], 2) for k in range(1000))
        monkeypatch.setattr(flagval, "valuative_set", lambda v, chart: next(answers))
        with pytest.raises(GenericityError):
            generic_valuative_set(FormSpace.complete(2, 1), 7, retry_cap=2)

    def test_trials_positive(self):
        """At least one chart per attempt"""
        with pytest.raises(DomainError):
            generic_valuative_set(FormSpace.complete(2, 1), 7, trials=0)

    @pytest.mark.slow
    def test_random_subspaces(self):
        """Random subspaces of forms of degree <= 4 in <= 4 variables get Borel certificates"""
        rng = np.random.default_rng(2024)
        for k in range(100):
            n = int(rng.integers(2, 4, endpoint=True))
            d = int(rng.integers(1, 4, endpoint=True))
            monos = monomials_of_degree(n, d)
            r = int(rng.integers(1, min(4, len(monos)), endpoint=True))
            coeffs = rng.integers(-3, 3, size=(r, len(monos)), endpoint=True)
            space = FormSpace.from_forms(n, d, [make_form(n, ((int(c), m) for c, m in zip(row, monos))) for row in coeffs])
            if space.rank == 0:
                continue
            result = generic_valuative_set(space, 1000 + k)
            assert len(result.points) == space.rank
            assert is_borel_fixed_set(dehomogenized(result.points))


class TestGradedSystems:
    """Test graded systems and NObody approximations"""

    def test_complete_system_body(self):
        """Complete linear systems in 3 variables give the standard triangle"""
        approx = nobody_approximation(complete_system(3, 2), 11)
        assert approx.body == simplex_polytope([1, 1])
        assert approx.hull_at(1) == simplex_polytope([1, 1])
        assert not approx.nesting_violations
        assert not approx.borel_violations

    def test_power_system(self):
        """Powers of one form give a single point"""
        approx = nobody_approximation(power_system(make_form(2, [(1, (1, 0))]), 2), 3)
        assert approx.body == hull([(0,)])

    def test_product_system(self):
        """V^m for V = span{x1, x2} in 3 variables gives the segment to (0, 1)"""
        v = FormSpace.from_forms(3, 1, [make_form(3, [(1, (1, 0, 0))]), make_form(3, [(1, (0, 1, 0))])])
        system = product_system(v, 2)
        assert system.piece(2).rank == 3
        approx = nobody_approximation(system, 5)
        assert approx.body == hull([(0, 0), (0, 1)])

    def test_fractional_degree_skips_pieces(self):
        """With t = 1/2 only even m have integral degree"""
        system = complete_system(2, 4, t=Fraction(1, 2))
        assert [m for m, _ in system.spaces] == [2, 4]

    def test_all_zero(self):
        """An all-zero system has no body"""
        system = flagval.GradedValuativeSystem(2, Fraction(1), ((1, FormSpace.zero(2, 1)),))
        with pytest.raises(DomainError):
            nobody_approximation(system, 1)


class TestJets:
    """Test jet separation and jet derivatives"""

    def test_complete_space_separates(self):
        """All forms restrict onto every coordinate subspace"""
        for i in (1, 2, 3):
            assert partial_jet_separates(FormSpace.complete(3, 2), i, seed=9)

    def test_single_square(self):
        """x1^2 alone is not onto all quadrics but is onto the restriction to z_1 = 0"""
        w = FormSpace.from_forms(2, 2, [make_form(2, [(1, (2, 0))])])
        assert not partial_jet_separates(w, 1, seed=4)
        assert partial_jet_separates(w, 2, seed=4)

    def test_index_range(self):
        """Index lies in 1..n"""
        with pytest.raises(DimensionError):
            partial_jet_separates(FormSpace.complete(2, 1), 3, seed=1)

    def test_derivatives(self):
        """Derivative along a variable or a direction"""
        R = form_ring(2)
        x1, x2 = R.gens
        f = x1**2 * x2
        assert jet_derivative(f, 1) == 2 * x1 * x2
        assert jet_derivative(f, (1, 1)) == 2 * x1 * x2 + x1**2
        with pytest.raises(DimensionError):
            jet_derivative(f, 3)

    def test_derivative_along_chart_axis_lowers_last_value(self):
        """Differentiating along the last chart axis moves a value by -e_n"""
        chart = FlagChart.random(3, seed=21)
        f = make_form(3, [(1, (2, 0, 0))])
        value = valuative_vector(f, chart)
        derived = valuative_vector(jet_derivative(f, chart.axis(3)), chart)
        assert derived == (value[0], value[1], value[2] - 1)


class TestParsing:
    """Test generator file formats"""

    def test_text_format(self):
        """One polynomial per line with a variables header and comments"""
        space = parse_forms("variables: 3\n# quadrics\nx1**2\nx1*x2  # mixed\n")
        assert (space.n, space.d, space.rank) == (3, 2, 2)
        assert space == x1_squared_and_x1x2()

    def test_variable_count_inferred(self):
        """Without a header the largest index wins"""
        assert parse_forms("x1*x3").n == 3

    def test_json_format(self):
        """JSON generators with p/q coefficients"""
        text = json.dumps({"variables": 3, "generators": [[["1/1", [2, 0, 0]]], [["2/1", [1, 1, 0]]]]})
        assert parse_forms(text) == x1_squared_and_x1x2()

    def test_errors(self):
        """Empty, mixed-degree and malformed input"""
        for text in ("", "# nothing\n", "x1\nx1*x2", "x1 +* x2", '{"variables": 2}', "variables: two\nx1"):
            with pytest.raises(ParseError):
                parse_forms(text)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
