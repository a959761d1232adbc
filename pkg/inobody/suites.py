"""
Verification batteries behind `inobody verify`

Implements:
1. borel: counting bounds, width monotonicity and shape bounds on random
   closures; slice-volume monotonicity on random Borel bodies; the
   three-dimensional non-Borel witness
2. flagval: cardinality and Borel certificates of generic valuative sets on
   random subspaces; a hand-derived valuative set; NObody nesting
3. surfzar: iterative Zariski decomposition against subset enumeration on
   random models; the blow-up profile
4. bodies: every family verdict, the forced very-general failures, and the
   curve-Seshadri intervals of the Jacobian fixtures
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from inobody.bodies import FIXTURES, FamilySpec, Fixture, build_family, curve_seshadri_interval, reverify
from inobody.borel import (
    counting_bounds,
    hull_candidates,
    is_borel_fixed_body,
    random_closure,
    shape_bounds,
    slice_volume_profile,
    widths,
)
from inobody.errors import DomainError, InobodyError, ZariskiError
from inobody.exactlin import RatMatrix, format_rat, split_seed
from inobody.flagval import FormSpace, complete_system, generic_valuative_set, make_form, nobody_approximation
from inobody.monomial import monomials_of_degree
from inobody.polytope import hull, simplex_polytope
from inobody.surfzar import SurfaceModel, blowup_p2_model, negative_part_on_E, zariski_bruteforce, zariski_decompose

SUITES = ("borel", "flagval", "surfzar", "bodies")

CLOSURES = 1000
BOREL_BODIES = 100
SUBSPACES = 100
ZARISKI_MODELS = 500

FAMILY_CASES = (
    ("product-curves", {"n": 2}),
    ("product-curves", {"n": 3}),
    ("product-curves", {"n": 4}),
    ("sym-power", {"n": 3}),
    ("quadric", {"n": 3}),
    ("proj-space", {"n": 3}),
    ("blowup-pn", {"n": 2, "a": 2}),
    ("blowup-pn", {"n": 3, "a": 2}),
    ("blowup-pn", {"n": 3, "a": 3}),
    ("blowup-p2", {"u": 3, "v": 1}),
    ("blowup-p2", {"u": 1, "v": 1}),
    ("p1xp1-generic", {}),
    ("p1xp1-special", {}),
    ("picard-one", {"epsilon": 1, "mu": 2}),
    ("jacobian-nonhyper", {}),
    ("jacobian-hyper", {}),
)

logger = logging.getLogger("inobody.suites")


def _payload(value):
    """JSON-ready copy with exact rationals as "p/q" strings."""
    if isinstance(value, Fraction):
        return format_rat(value)
    if isinstance(value, Mapping):
        return {str(k): _payload(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_payload(v) for v in value]
    if hasattr(value, "to_json"):
        return _payload(value.to_json())
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    return repr(value)


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    counterexample: object = None

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "counterexample": _payload(self.counterexample)}


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    seed: int
    results: tuple[PropertyResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> list[str]:
        return [r.name for r in self.results if not r.passed]

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "results": [r.to_json() for r in self.results],
        }


def _first_failure(name: str, cases, check: Callable) -> PropertyResult:
    """Run check on every case; check returns None or a counterexample."""
    for case in cases:
        try:
            bad = check(case)
        except InobodyError as e:
            bad = {"case": case, "error": str(e)}
        if bad is not None:
            return PropertyResult(name, False, bad)
    return PropertyResult(name, True)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(split_seed(seed, stream, 1)[0])


def borel_suite(seed: int) -> list[PropertyResult]:
    rng = _rng(seed, 1)
    closures = [
        random_closure(rng, int(rng.integers(1, 3, endpoint=True)), 3, int(rng.integers(1, 3, endpoint=True)))
        for _ in range(CLOSURES)
    ]

    def counting(s):
        lower, upper = counting_bounds(s)
        return None if lower <= len(s) <= upper else {"points": s.to_json(), "bounds": [lower, upper]}

    def monotone(s):
        w = widths(s)
        return None if all(a <= b for a, b in zip(w, w[1:])) else {"points": s.to_json(), "widths": w}

    def shapes(s):
        if s.dim < 2:
            return None
        bounds = shape_bounds(hull(hull_candidates(s).points))
        return None if bounds else {"points": s.to_json()}

    body_rng = _rng(seed, 2)
    bodies = []
    while len(bodies) < BOREL_BODIES:
        s = random_closure(body_rng, int(body_rng.integers(2, 3, endpoint=True)), 3, 2)
        p = hull(hull_candidates(s).points)
        if p.is_full_dimensional:
            bodies.append(p)

    def slice_monotone(p):
        top = widths(p)[-1]
        samples = [top * k / 8 for k in range(9)]
        profile = slice_volume_profile(p, samples)
        return None if profile.monotone else {"body": p.to_json(), "profile": profile.to_json()}

    witness_body = hull([*simplex_polytope([1, 2, 3]).vertices, (1, 1, 1)])
    check = is_borel_fixed_body(witness_body)
    witness_ok = not check and (Fraction(1), Fraction(0), Fraction(2)) in check.images

    return [
        _first_failure("counting_bounds", closures, counting),
        _first_failure("widths_monotone", closures, monotone),
        _first_failure("shape_bounds", closures, shapes),
        _first_failure("slice_volume_monotone", bodies, slice_monotone),
        PropertyResult("non_borel_witness", witness_ok, None if witness_ok else {"images": check.images}),
    ]


def _random_space(rng: np.random.Generator) -> FormSpace:
    n = int(rng.integers(2, 4, endpoint=True))
    d = int(rng.integers(1, 4, endpoint=True))
    monos = monomials_of_degree(n, d)
    r = int(rng.integers(1, min(4, len(monos)), endpoint=True))
    while True:
        coeffs = rng.integers(-3, 3, size=(r, len(monos)), endpoint=True)
        forms = [make_form(n, ((int(c), m) for c, m in zip(row, monos) if c)) for row in coeffs]
        space = FormSpace.from_forms(n, d, forms)
        if space.rank:
            return space


def flagval_suite(seed: int) -> list[PropertyResult]:
    rng = _rng(seed, 3)
    spaces = [(k, _random_space(rng)) for k in range(SUBSPACES)]

    def certificate(case):
        k, space = case
        result = generic_valuative_set(space, split_seed(seed, 100 + k, 1)[0])
        if len(result.points) != space.rank or not result.certificate.borel:
            return {"space": k, "rank": space.rank, "points": result.points.to_json()}
        return None

    expected = {(0, 0, 2), (0, 1, 1)}
    hand = FormSpace.from_forms(3, 2, [make_form(3, [(1, (2, 0, 0))]), make_form(3, [(1, (1, 1, 0))])])

    def hand_case(s):
        points = set(generic_valuative_set(hand, s).points.points)
        return None if points == expected else {"seed": s, "points": sorted(points)}

    approx = nobody_approximation(complete_system(3, 2), seed)
    nested = not approx.nesting_violations and not approx.borel_violations
    return [
        _first_failure("valuative_certificate", spaces, certificate),
        _first_failure("hand_derived_valuative_set", split_seed(seed, 4, 3), hand_case),
        PropertyResult(
            "nobody_nesting",
            nested,
            None if nested else {"nesting": approx.nesting_violations, "borel": approx.borel_violations},
        ),
    ]


def random_surface_model(rng: np.random.Generator) -> tuple[SurfaceModel, tuple[Fraction, ...]]:
    """A class H of positive square, k curves with E.E = -1, and a big-ish class a*H + effective."""
    k = int(rng.integers(2, 8, endpoint=True))
    names = ("H", "E", *(f"C{i}" for i in range(2, k)))
    size = len(names)
    gram = [[Fraction(0)] * size for _ in range(size)]
    gram[0][0] = Fraction(int(rng.integers(1, 4, endpoint=True)))
    gram[1][1] = Fraction(-1)
    for i in range(2, size):
        gram[i][i] = Fraction(-int(rng.integers(1, 3, endpoint=True)))
    for i in range(size):
        for j in range(i + 1, size):
            gram[i][j] = gram[j][i] = Fraction(int(rng.integers(0, 1, endpoint=True)))
    d = (Fraction(int(rng.integers(2, 5, endpoint=True))), *(Fraction(int(x)) for x in rng.integers(0, 2, size=size - 1, endpoint=True)))
    model = SurfaceModel(
        classes=names,
        gram=RatMatrix.from_rows(gram),
        pullback=d,
        curves=names[1:],
    )
    return model, d


def surfzar_suite(seed: int) -> list[PropertyResult]:
    rng = _rng(seed, 5)
    compared = 0
    attempts = 0
    mismatch = None
    while compared < ZARISKI_MODELS and attempts < 50 * ZARISKI_MODELS and mismatch is None:
        attempts += 1
        model, d = random_surface_model(rng)
        try:
            fast = zariski_decompose(model, d)
        except ZariskiError:
            continue
        compared += 1
        try:
            slow = zariski_bruteforce(model, d)
        except ZariskiError as e:
            mismatch = {"model": model.to_json(), "class": d, "error": str(e)}
            break
        if slow != fast:
            mismatch = {"model": model.to_json(), "class": d, "iterative": fast.to_json(model), "oracle": slow.to_json(model)}
    if mismatch is None and compared < ZARISKI_MODELS:
        mismatch = {"compared": compared, "attempts": attempts}

    profile = negative_part_on_E(blowup_p2_model(3, 1))
    profile_ok = profile.breakpoints == (Fraction(1), Fraction(3), Fraction(7)) and profile.mu == 7
    return [
        PropertyResult("oracle_equivalence", mismatch is None, mismatch),
        PropertyResult("blowup_profile", profile_ok, None if profile_ok else profile.to_json()),
        PropertyResult("upper_boundary_concave", profile.upper_boundary_concave(), None),
        PropertyResult("profile_continuous", profile.is_continuous(), None),
    ]


def bodies_suite(seed: int, fixtures: Mapping[str, Fixture] | None = None) -> list[PropertyResult]:
    fixtures = fixtures or FIXTURES
    results = []
    reports = {}
    for family, params in FAMILY_CASES:
        label = f"family:{family}" + "".join(f":{k}={v}" for k, v in params.items())
        try:
            report = build_family(FamilySpec(family, params), seed, fixtures)
        except InobodyError as e:
            results.append(PropertyResult(label, False, {"error": str(e)}))
            continue
        reports.setdefault(family, report)
        failed = report.unexpected_failures
        results.append(PropertyResult(label, not failed, {"failed": failed} if failed else None))

    if "blowup-p2" in reports:
        forced = reverify(reports["blowup-p2"], very_general=True)
        flagged = [name for name in ("borel", "gamma_upper") if forced.verdict_map.get(name)]
        results.append(PropertyResult("special_point_breaks_very_general_bounds", not flagged, flagged or None))

    intervals = {
        "jacobian-nonhyper": (Fraction(3), Fraction(3)),
        "jacobian-hyper": (Fraction(45, 16), Fraction(3)),
    }
    for family, expected in intervals.items():
        if family not in reports:
            continue
        try:
            got = curve_seshadri_interval(reports[family])
        except InobodyError as e:
            results.append(PropertyResult(f"curve_seshadri:{family}", False, {"error": str(e)}))
            continue
        results.append(PropertyResult(f"curve_seshadri:{family}", got == expected, None if got == expected else got))
    return results


def run_suite(name: str, seed: int, fixtures: Mapping[str, Fixture] | None = None) -> SuiteReport:
    """
    Run one battery, or all of them for name "all".

    Raises:
        DomainError: unknown suite name
    """
    if name != "all" and name not in SUITES:
        raise DomainError(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    names = SUITES if name == "all" else (name,)
    results: list[PropertyResult] = []
    for suite in names:
        started = time.perf_counter()
        if suite == "bodies":
            batch = bodies_suite(seed, fixtures)
        else:
            batch = {"borel": borel_suite, "flagval": flagval_suite, "surfzar": surfzar_suite}[suite](seed)
        results.extend(PropertyResult(f"{suite}.{r.name}", r.passed, r.counterexample) for r in batch)
        logger.info(
            "Suite finished",
            extra={"suite": suite, "failed": [r.name for r in batch if not r.passed], "seconds": time.perf_counter() - started},
        )
    return SuiteReport(name, seed, tuple(results))
