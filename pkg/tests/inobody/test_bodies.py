"""
Tests for family bodies, infinitesimal successive minima and their bounds
"""

import json
import os
import sys
from dataclasses import replace
from fractions import Fraction

import pytest

# Add repo root to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "../.."))

from inobody.bodies import (
    BUILDERS,
    VERY_GENERAL_CHECKS,
    FamilySpec,
    build_family,
    curve_seshadri_interval,
    default_samples,
    epsilons_from_body,
    load_fixture_overrides,
    restricted_volume,
    reverify,
    simplicial_check,
    slice_volume_integral,
    variational_epsilons,
    width_function,
)
from inobody.errors import BodyError, DomainError, ParseError
from inobody.polytope import box, gamma_polytope, hull, simplex_polytope, slice, unstraighten


def build(family, **params):
    return build_family(FamilySpec(family, params), seed=11)


class TestEpsilons:
    """Test reading minima off a tilted body"""

    def test_blowup_body(self):
        """hull{(0,0),(7,0),(3,2),(1,1)} has eps = (1, 7)"""
        assert epsilons_from_body(hull([(0, 0), (7, 0), (3, 2), (1, 1)])) == (1, 7)

    def test_inverted_simplex(self):
        """Unstraightened simplex(eps) gives eps back"""
        eps = (Fraction(12, 7), Fraction(7, 4), Fraction(2))
        assert epsilons_from_body(unstraighten(simplex_polytope(eps))) == eps

    def test_origin_missing(self):
        """The origin must lie in the body"""
        with pytest.raises(BodyError):
            epsilons_from_body(hull([(1, 0), (2, 0), (1, 1)]))

    def test_no_diagonal(self):
        """eps_1 = 0 is rejected"""
        with pytest.raises(BodyError):
            epsilons_from_body(hull([(0, 0), (2, 0), (2, 1)]))


class TestFamilies:
    """Test the family builders against known bodies"""

    @pytest.mark.parametrize("family", sorted(BUILDERS))
    def test_default_parameters_pass(self, family):
        """Every family with default parameters passes its verdicts"""
        report = build(family)
        assert report.unexpected_failures == []

    def test_product_curves(self):
        """simplex(1, ..., n) with vol n!"""
        report = build("product-curves", n=3)
        assert report.epsilons == (1, 2, 3)
        assert report.vol == 6
        assert report.straightened == simplex_polytope([1, 2, 3])
        assert simplicial_check(report)

    def test_quadric(self):
        """simplex(1, ..., 1, 2) with vol 2"""
        report = build("quadric", n=3)
        assert report.epsilons == (1, 1, 2)
        assert report.vol == 2

    def test_sym_power(self):
        """simplex(1, ..., 1) with vol 1"""
        report = build("sym-power", n=2)
        assert report.epsilons == (1, 1)
        assert report.vol == 1

    def test_proj_space(self):
        """The t = 1 slice is simplex_1 and the straightened body is simplex(1, 1, 1)"""
        report = build("proj-space", n=3)
        assert report.tilted == hull([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 0, 1)])
        assert report.straightened == simplex_polytope([1, 1, 1])
        assert report.vol == 1
        assert report.verdict_map["nobody_nested"]

    @pytest.mark.parametrize("n,a", [(2, 2), (3, 2), (2, 3)])
    def test_blowup_pn(self, n, a):
        """Gamma(a-1, a, ..., a) with vol a^n - 1"""
        report = build("blowup-pn", n=n, a=a)
        assert report.straightened == gamma_polytope([a - 1] + [a] * (n - 1))
        assert report.vol == a**n - 1
        assert report.epsilons == (a - 1,) + (a,) * (n - 1)
        assert not simplicial_check(report)

    def test_blowup_p2(self):
        """u = 3, v = 1 gives eps = (1, 7) and vol 15"""
        report = build("blowup-p2", u=3, v=1)
        assert report.tilted == hull([(0, 0), (7, 0), (3, 2), (1, 1)])
        assert report.straightened == hull([(0, 0), (0, 7), (2, 1), (1, 0)])
        assert report.epsilons == (1, 7)
        assert report.vol == 15
        assert not report.very_general
        assert not any(name in report.verdict_map for name in VERY_GENERAL_CHECKS)

    def test_p1xp1_flags(self):
        """Generic flag gives simplex(1, 2), special flag the unit square"""
        generic = build("p1xp1-generic")
        special = build("p1xp1-special")
        assert generic.straightened == simplex_polytope([1, 2])
        assert special.straightened == box([1, 1])
        assert generic.epsilons == special.epsilons == (1, 2)
        assert generic.vol == special.vol == 2
        assert not special.verdict_map["lower_simplex"]
        assert "lower_simplex" in special.expected_failures

    def test_picard_one(self):
        """simplex(eps, mu) with vol eps * mu"""
        report = build("picard-one", epsilon="1/2", mu=3)
        assert report.epsilons == (Fraction(1, 2), 3)
        assert report.vol == Fraction(3, 2)

    def test_jacobian_nonhyper(self):
        """eps = (12/7, 7/4, 2), vol 6, simplicial"""
        report = build("jacobian-nonhyper")
        assert report.epsilons == (Fraction(12, 7), Fraction(7, 4), Fraction(2))
        assert report.vol == 6
        verdict = simplicial_check(report)
        assert verdict.simplicial
        assert verdict.body_matches

    def test_jacobian_hyper(self):
        """No body; declared minima are not simplicial and the local product stays below vol"""
        report = build("jacobian-hyper")
        assert report.tilted is None
        verdict = simplicial_check(report)
        assert not verdict.simplicial
        assert verdict.body_matches is None
        assert verdict.consistent
        assert report.verdict_map["local_product_below_vol"]

    def test_parameter_errors(self):
        """Out-of-range parameters raise DomainError"""
        cases = [
            ("product-curves", {"n": 7}),
            ("product-curves", {"n": "3/2"}),
            ("quadric", {"n": 1}),
            ("blowup-pn", {"a": 1}),
            ("blowup-p2", {"u": 1, "v": 2}),
            ("picard-one", {"epsilon": 3, "mu": 2}),
            ("no-such-family", {}),
        ]
        for family, params in cases:
            with pytest.raises(DomainError):
                build(family, **params)

    def test_to_json(self):
        """Reports serialize exactly"""
        data = build("blowup-p2").to_json()
        assert data["epsilons"] == ["1/1", "7/1"]
        assert data["params"] == {"u": "3", "v": "1"}
        assert json.loads(json.dumps(data)) == data
        assert build("jacobian-hyper").to_json()["tilted"] is None


class TestSlices:
    """Test the vertical-slice verdicts"""

    @pytest.mark.parametrize(
        "family,params",
        [("product-curves", {"n": 3}), ("blowup-pn", {"n": 3, "a": 2}), ("jacobian-nonhyper", {})],
    )
    def test_slice_verdicts_hold(self, family, params):
        """Borel slices, slice bounds, agreeing readings, restricted volumes and homogeneity"""
        verdicts = build(family, **params).verdict_map
        for name in ("slices_borel", "slice_bounds", "epsilon_readings_agree", "slice_volume_integral", "homogeneous"):
            assert verdicts[name], name

    def test_product_curves_slices(self):
        """At nu_1 = 1 the slice is simplex(1, 1); at nu_1 = 2 it is simplex(1/2, 2)"""
        tilted = build("product-curves", n=3).tilted
        assert slice(tilted, 0, 1) == simplex_polytope([1, 1])
        assert slice(tilted, 0, 2) == simplex_polytope([Fraction(1, 2), 2])

    def test_blowup_pn_slices_are_gamma(self):
        """Bl_p P^3 with a = 2: the nu_1 = t slice is Gamma(min(t, 1), t)"""
        tilted = build("blowup-pn", n=3, a=2).tilted
        assert slice(tilted, 0, Fraction(1, 2)) == gamma_polytope([Fraction(1, 2), Fraction(1, 2)])
        assert slice(tilted, 0, Fraction(3, 2)) == gamma_polytope([1, Fraction(3, 2)])

    def test_variational_readings(self):
        """max{t : w_(i+1)(t) = t} recovers the minima"""
        assert variational_epsilons(build("jacobian-nonhyper").tilted) == (
            Fraction(12, 7),
            Fraction(7, 4),
            Fraction(2),
        )
        assert variational_epsilons(build("blowup-pn", n=3, a=2).tilted) == (1, 2, 2)
        assert variational_epsilons(build("blowup-p2").tilted) == (1, 7)

    def test_restricted_volumes(self):
        """Bl_p P^2 with a = 2 has restricted volume min(t, 1) and total 2 * (1/2 + 1) = 3"""
        tilted = build("blowup-pn", n=2, a=2).tilted
        assert [restricted_volume(tilted, t) for t in (Fraction(1, 2), 1, Fraction(3, 2))] == [Fraction(1, 2), 1, 1]
        assert slice_volume_integral(tilted) == 3
        assert slice_volume_integral(build("jacobian-nonhyper").tilted) == 6

    def test_surface_model_checks(self):
        """Slice lengths equal P_t.E and doubling L doubles the body"""
        verdicts = build("blowup-p2").verdict_map
        assert verdicts["restricted_volume_matches"]
        assert verdicts["model_homogeneous"]
        assert verdicts["slices_borel"]
        assert verdicts["slice_bounds"]

    def test_special_flag_breaks_slices(self):
        """The special flag on P1 x P1 gives the slice [1/2, 1] at t = 3/2, which is not Borel-fixed"""
        report = build("p1xp1-special")
        assert slice(report.tilted, 0, Fraction(3, 2)) == hull([(Fraction(1, 2),), (1,)])
        verdicts = report.verdict_map
        assert not verdicts["slices_borel"]
        assert not verdicts["slice_bounds"]
        assert {"slices_borel", "slice_bounds"} <= report.expected_failures
        assert verdicts["epsilon_readings_agree"]
        assert verdicts["slice_volume_integral"]


class TestSimplicial:
    """Test the simplicial characterization"""

    def test_inconsistent_declaration(self):
        """A simplicial declaration that disagrees with the minima is inconsistent"""
        report = replace(build("jacobian-hyper"), declared_simplicial=True)
        assert not simplicial_check(report).consistent

    def test_gamma_is_not_simplicial(self):
        """Gamma(1, 2) has vol 3 > 2"""
        verdict = simplicial_check(build("blowup-pn", n=2, a=2))
        assert not verdict.simplicial
        assert verdict.body_matches is False
        assert verdict.consistent


class TestBounds:
    """Test the bound verification and the very-general gate"""

    def test_reverify_very_general_on_special_point(self):
        """Forcing very-general checks on blowup-p2 breaks them, all as expected failures"""
        report = reverify(build("blowup-p2"), very_general=True)
        verdicts = report.verdict_map
        assert not verdicts["borel"]
        assert not verdicts["widths_equal_eps"]
        assert not verdicts["width_nonincreasing"]
        assert report.unexpected_failures == []

    def test_reverify_keeps_other_verdicts(self):
        """Very-general checks can be dropped again"""
        report = reverify(reverify(build("product-curves"), True), False)
        assert "borel" not in report.verdict_map
        assert report.verdict_map["lower_simplex"]


class TestCurveSeshadri:
    """Test the curve-Seshadri interval"""

    def test_nonhyper_is_tight(self):
        """lower = upper = 3"""
        assert curve_seshadri_interval(build("jacobian-nonhyper")) == (3, 3)

    def test_hyper_interval(self):
        """[45/16, 3] from the local minima"""
        assert curve_seshadri_interval(build("jacobian-hyper")) == (Fraction(45, 16), 3)

    def test_product_curves(self):
        """n = 3 gives [2, 2]"""
        assert curve_seshadri_interval(build("product-curves", n=3)) == (2, 2)

    def test_special_point_skips_slice_term(self):
        """blowup-p2 uses eps_1 only: [1, 15/7]"""
        assert curve_seshadri_interval(build("blowup-p2")) == (1, Fraction(15, 7))

    def test_inverted_interval(self):
        """A lower bound above vol/mu is an error"""
        with pytest.raises(BodyError):
            curve_seshadri_interval(build("jacobian-hyper"), eps_loc=[3, 3, 2])


class TestWidthFunctions:
    """Test slice-width functions"""

    def test_default_samples(self):
        """0, each eps and the midpoints"""
        report = build("product-curves", n=3)
        assert default_samples(report) == [0, Fraction(1, 2), 1, Fraction(3, 2), 2, Fraction(5, 2), 3]

    def test_product_curves_widths(self):
        """w_2(t) = min(t, (3 - t)/2) with no violations"""
        report = build("product-curves", n=3)
        profile = width_function(report, 2, [0, 1, 2, 3])
        assert profile.samples == ((0, 0), (1, 1), (2, Fraction(1, 2)), (3, 0))
        assert profile.violations == ()

    def test_blowup_width_increases(self):
        """On blowup-p2 w_2 keeps increasing past eps_1, flagged only when forced very general"""
        report = build("blowup-p2")
        profile = width_function(report, 2, [0, 1, 2, 3, 7])
        assert [w for _, w in profile.samples] == [0, 1, Fraction(3, 2), 2, 0]
        assert profile.violations == ()
        forced = replace(report, very_general=True)
        assert "increasing" in width_function(forced, 2, [0, 1, 2, 3, 7]).violations

    def test_errors(self):
        """Index range, sample range and missing bodies"""
        report = build("product-curves", n=3)
        with pytest.raises(DomainError):
            width_function(report, 1)
        with pytest.raises(DomainError):
            width_function(report, 2, [4])
        with pytest.raises(BodyError):
            width_function(build("jacobian-hyper"), 2)


class TestFixtures:
    """Test fixture overrides"""

    def test_override_breaks_declared_volume(self):
        """A wrong declared volume shows up as a failed verdict"""
        fixtures = load_fixture_overrides('{"jacobian-nonhyper": {"vol": "7/1"}}')
        report = build_family(FamilySpec("jacobian-nonhyper"), fixtures=fixtures)
        assert report.unexpected_failures == ["declared_volume"]

    def test_override_hyper_simplicial_flag(self):
        """Declaring the hyperelliptic minima simplicial is inconsistent"""
        fixtures = load_fixture_overrides('{"jacobian-hyper": {"simplicial": true}}')
        report = build_family(FamilySpec("jacobian-hyper"), fixtures=fixtures)
        assert report.unexpected_failures == ["simplicial_consistent"]

    def test_malformed(self):
        """Unknown tags and broken JSON raise ParseError"""
        for text in ("{", '{"bogus": {}}', "[1]", '{"jacobian-hyper": 3}'):
            with pytest.raises(ParseError):
                load_fixture_overrides(text)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
