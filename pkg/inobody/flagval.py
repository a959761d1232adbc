"""
Flag valuations of homogeneous forms

Implements:
1. Forms as sympy polynomials over QQ with lex order, plus text/JSON parsing
2. FormSpace (dense coefficient rows over the lex-ascending monomial basis)
3. FlagChart substitution x = g^T z and the valuation vector nu^h
4. Valuative sets by lex-ordered row reduction, and the generic engine with
   agreement-across-charts and Borel certificates
5. Graded valuative systems and their NObody approximation
6. Partial jet separation and jet differentiation
"""

from __future__ import annotations

import json
import logging
import math
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

from sympy import Symbol, SympifyError, sympify
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing, ring

from inobody.borel import DiscreteSet, is_borel_fixed_body, is_borel_fixed_set
from inobody.errors import DimensionError, DomainError, GenericityError, ParseError
from inobody.exactlin import (
    DEFAULT_BOUND,
    RatMatrix,
    det,
    format_rat,
    parse_rat,
    random_unit_lower_triangular,
    rank,
    rref,
    split_seed,
    to_rat,
)
from inobody.monomial import ExpVec, dehomogenize, monomials_of_degree
from inobody.polytope import RationalPolytope, hull, hull_union, is_subset, scale

DEFAULT_TRIALS = 3
RETRY_CAP = 5
MAX_BASIS = 20000

logger = logging.getLogger("inobody.flagval")


@lru_cache(maxsize=None)
def form_ring(n: int) -> PolyRing:
    """QQ[x1, ..., xn] with lex order."""
    if n < 1:
        raise DimensionError(f"need at least one variable, got {n}")
    return ring(",".join(f"x{i}" for i in range(1, n + 1)), QQ, lex)[0]


def _to_qq(value: Fraction):
    return QQ(value.numerator, value.denominator)


def _to_fraction(coeff) -> Fraction:
    return Fraction(int(coeff.numerator), int(coeff.denominator))


def make_form(n: int, terms: Iterable[tuple[object, Sequence[int]]]) -> PolyElement:
    """Build a form from (coefficient, exponent vector) pairs."""
    R = form_ring(n)
    coeffs: dict[ExpVec, Fraction] = {}
    for coeff, exps in terms:
        key = tuple(int(e) for e in exps)
        if len(key) != n or any(e < 0 for e in key):
            raise DimensionError(f"exponent vector {list(exps)} does not fit {n} variables")
        coeffs[key] = coeffs.get(key, Fraction(0)) + to_rat(coeff)
    return R.from_dict({k: _to_qq(c) for k, c in coeffs.items() if c != 0})


def form_degree(f: PolyElement) -> int:
    """Degree of a nonzero homogeneous form."""
    degrees = {sum(m) for m in f.monoms()}
    if len(degrees) != 1:
        raise DomainError(f"not a nonzero homogeneous form: {f}")
    return degrees.pop()


def form_terms(f: PolyElement) -> list[tuple[Fraction, ExpVec]]:
    return [(_to_fraction(c), tuple(m)) for m, c in sorted(f.terms())]


def form_to_json(f: PolyElement) -> list:
    return [[format_rat(c), list(m)] for c, m in form_terms(f)]


@lru_cache(maxsize=None)
def _basis(n: int, d: int) -> tuple[tuple[ExpVec, ...], dict[ExpVec, int]]:
    if math.comb(d + n - 1, n - 1) > MAX_BASIS:
        raise DomainError(f"{math.comb(d + n - 1, n - 1)} monomials of degree {d} in {n} variables exceed {MAX_BASIS}")
    monos = tuple(monomials_of_degree(n, d))
    return monos, {m: k for k, m in enumerate(monos)}


@dataclass(frozen=True)
class FormSpace:
    """
    Space of degree-d forms in n variables.

    basis rows are linearly independent coefficient vectors over
    monomials_of_degree(n, d). A space of rank 0 is allowed.
    """

    n: int
    d: int
    basis: RatMatrix

    def __post_init__(self):
        monos, _ = _basis(self.n, self.d)
        if self.basis.ncols != len(monos):
            raise DimensionError(f"basis rows have {self.basis.ncols} entries, expected {len(monos)}")
        if rank(self.basis) != self.basis.nrows:
            raise DomainError("basis rows are linearly dependent")

    @property
    def rank(self) -> int:
        return self.basis.nrows

    @property
    def monomials(self) -> tuple[ExpVec, ...]:
        return _basis(self.n, self.d)[0]

    @classmethod
    def complete(cls, n: int, d: int) -> FormSpace:
        return cls(n, d, RatMatrix.identity(len(_basis(n, d)[0])))

    @classmethod
    def zero(cls, n: int, d: int) -> FormSpace:
        return cls(n, d, RatMatrix((), len(_basis(n, d)[0])))

    @classmethod
    def from_forms(cls, n: int, d: int, forms: Iterable[PolyElement]) -> FormSpace:
        """Span of the given forms; the stored basis is the nonzero part of their rref."""
        monos, index = _basis(n, d)
        rows = []
        for f in forms:
            row = [Fraction(0)] * len(monos)
            for m, c in f.terms():
                if sum(m) != d:
                    raise DomainError(f"form {f} is not homogeneous of degree {d}")
                row[index[tuple(m)]] = _to_fraction(c)
            rows.append(tuple(row))
        reduced, pivots = rref(RatMatrix(tuple(rows), len(monos)))
        return cls(n, d, RatMatrix(reduced.entries[: len(pivots)], len(monos)))

    def forms(self) -> list[PolyElement]:
        monos = self.monomials
        return [make_form(self.n, ((c, m) for c, m in zip(row, monos) if c != 0)) for row in self.basis.entries]


@dataclass(frozen=True)
class FlagChart:
    """Linear change of coordinates x = g^T z; its flag is the standard one in z."""

    g: RatMatrix

    def __post_init__(self):
        if self.g.nrows != self.g.ncols:
            raise DimensionError(f"chart matrix must be square, got {self.g.shape}")
        if det(self.g) == 0:
            raise DomainError("chart matrix is singular")

    @property
    def n(self) -> int:
        return self.g.nrows

    @classmethod
    def identity(cls, n: int) -> FlagChart:
        return cls(RatMatrix.identity(n))

    @classmethod
    def random(cls, n: int, seed: int | None, bound: int = DEFAULT_BOUND) -> FlagChart:
        return cls(random_unit_lower_triangular(n, bound, seed))

    def axis(self, j: int) -> tuple[Fraction, ...]:
        """Direction of the j-th chart coordinate (1-based): d/dz_j acts as this derivative in x."""
        return self.g.row(j - 1)

    def linear_forms(self) -> tuple[PolyElement, ...]:
        R = form_ring(self.n)
        z = R.gens
        return tuple(
            sum((_to_qq(self.g[j, i]) * z[j] for j in range(self.n) if self.g[j, i] != 0), R.zero) for i in range(self.n)
        )

    def apply(self, f: PolyElement) -> PolyElement:
        """f(g^T z), written in the same ring with x_k read as z_k."""
        R = form_ring(self.n)
        if f.ring != R:
            raise DimensionError(f"form lives in {f.ring}, chart acts on {self.n} variables")
        lin = self.linear_forms()
        result = R.zero
        for m, c in f.terms():
            term = R(c)
            for k, e in enumerate(m):
                if e:
                    term *= lin[k] ** e
            result += term
        return result


@lru_cache(maxsize=256)
def _monomial_images(chart: FlagChart, d: int) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
    """For each basis monomial, its image under the chart as sparse (column, coefficient) pairs."""
    monos, index = _basis(chart.n, d)
    R = form_ring(chart.n)
    images = []
    for m in monos:
        image = chart.apply(R.from_dict({m: QQ(1)}))
        images.append(tuple(sorted((index[tuple(e)], _to_fraction(c)) for e, c in image.terms())))
    return tuple(images)


def transformed_rows(v: FormSpace, chart: FlagChart) -> RatMatrix:
    """Coefficient rows of the basis forms after substitution."""
    if chart.n != v.n:
        raise DimensionError(f"chart on {chart.n} variables applied to forms in {v.n}")
    images = _monomial_images(chart, v.d)
    size = len(images)
    rows = []
    for row in v.basis.entries:
        out = [Fraction(0)] * size
        for k, c in enumerate(row):
            if c:
                for col, coeff in images[k]:
                    out[col] += c * coeff
        rows.append(tuple(out))
    return RatMatrix(tuple(rows), size)


def valuative_vector(f: PolyElement, chart: FlagChart) -> ExpVec:
    """Exponent of the lex-smallest monomial of f(g^T z)."""
    if not f:
        raise DomainError("valuation of the zero form")
    image = chart.apply(f)
    return tuple(int(e) for e in min(image.monoms()))


def valuative_set(v: FormSpace, chart: FlagChart) -> DiscreteSet:
    """
    The set of nu^h values taken on v.

    Rows are reduced with columns scanned in ascending lex order, so the
    pivots are the distinct lex-smallest exponents of a suitable basis.
    """
    reduced, pivots = rref(transformed_rows(v, chart))
    monos = v.monomials
    return DiscreteSet.of((monos[p] for p in pivots), v.n)


@dataclass(frozen=True)
class GenericityCertificate:
    master_seed: int
    attempt: int
    seeds: tuple[int, ...]
    bound: int
    borel: bool

    def to_json(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "attempt": self.attempt,
            "seeds": list(self.seeds),
            "bound": self.bound,
            "borel": self.borel,
        }


@dataclass(frozen=True)
class ValuativeResult:
    points: DiscreteSet
    certificate: GenericityCertificate

    def to_json(self) -> dict:
        return {"valuative_set": self.points.to_json(), "certificate": self.certificate.to_json()}


def dehomogenized(s: DiscreteSet) -> DiscreteSet:
    """Drop the homogenizing coordinate; Borel moves act on what remains."""
    return DiscreteSet.of((dehomogenize(p) for p in s.points), s.dim - 1)


def generic_valuative_set(
    v: FormSpace,
    seed: int,
    trials: int = DEFAULT_TRIALS,
    bound: int = DEFAULT_BOUND,
    retry_cap: int = RETRY_CAP,
) -> ValuativeResult:
    """
    Valuative set for a general flag.

    Samples `trials` random unit lower-triangular charts per attempt. An
    attempt is accepted when all charts agree and the dehomogenized set is
    Borel-fixed.

    Raises:
        GenericityError: no attempt accepted within retry_cap
    """
    if trials < 1:
        raise DomainError(f"need at least one trial, got {trials}")
    for attempt in range(retry_cap):
        seeds = split_seed(seed, attempt, trials)
        sets = [valuative_set(v, FlagChart.random(v.n, s, bound)) for s in seeds]
        if any(s != sets[0] for s in sets[1:]):
            logger.warning("Random charts disagree; resampling", extra={"attempt": attempt, "seed": seed})
            continue
        check = is_borel_fixed_set(dehomogenized(sets[0]))
        if not check:
            logger.warning(
                "Valuative set not Borel-fixed; resampling",
                extra={"attempt": attempt, "point": check.point, "move": check.move},
            )
            continue
        logger.debug("Generic valuative set accepted", extra={"attempt": attempt, "size": len(sets[0])})
        return ValuativeResult(sets[0], GenericityCertificate(seed, attempt, tuple(seeds), bound, True))
    raise GenericityError(f"no agreeing Borel-fixed valuative set after {retry_cap} attempts (seed {seed})")


@dataclass(frozen=True)
class GradedValuativeSystem:
    """Spaces A_m of degree m*t, indexed by m >= 1."""

    n: int
    t: Fraction
    spaces: tuple[tuple[int, FormSpace], ...]

    def __post_init__(self):
        for m, space in self.spaces:
            if m < 1:
                raise DomainError(f"graded pieces are indexed by m >= 1, got {m}")
            if space.n != self.n:
                raise DimensionError(f"piece {m} has {space.n} variables, expected {self.n}")
            if Fraction(space.d) != m * self.t:
                raise DomainError(f"piece {m} has degree {space.d}, expected {m * self.t}")

    def piece(self, m: int) -> FormSpace | None:
        return dict(self.spaces).get(m)


def complete_system(n: int, m_max: int, t=1) -> GradedValuativeSystem:
    """All forms of degree m*t, for every m with m*t integral."""
    t = to_rat(t)
    spaces = tuple((m, FormSpace.complete(n, int(m * t))) for m in range(1, m_max + 1) if (m * t).denominator == 1)
    return GradedValuativeSystem(n, t, spaces)


def power_system(f: PolyElement, m_max: int) -> GradedValuativeSystem:
    """A_m spanned by f^m."""
    n = f.ring.ngens
    d = form_degree(f)
    spaces = tuple((m, FormSpace.from_forms(n, m * d, [f**m])) for m in range(1, m_max + 1))
    return GradedValuativeSystem(n, Fraction(d), spaces)


def product_system(v: FormSpace, m_max: int) -> GradedValuativeSystem:
    """A_m = V^m, spanned by m-fold products of basis forms."""
    basis = v.forms()
    spaces = []
    for m in range(1, m_max + 1):
        products = [math.prod(combo, start=form_ring(v.n).one) for combo in combinations_with_replacement(basis, m)]
        spaces.append((m, FormSpace.from_forms(v.n, m * v.d, products)))
    return GradedValuativeSystem(v.n, Fraction(v.d), tuple(spaces))


@dataclass(frozen=True)
class NObodyApproximation:
    per_m: tuple[tuple[int, RationalPolytope], ...]
    body: RationalPolytope
    nesting_violations: tuple[tuple[int, int], ...]
    borel_violations: tuple[int, ...]
    certificates: tuple[tuple[int, GenericityCertificate], ...]

    def hull_at(self, m: int) -> RationalPolytope | None:
        return dict(self.per_m).get(m)


def nobody_approximation(
    system: GradedValuativeSystem,
    seed: int,
    m_max: int | None = None,
    trials: int = DEFAULT_TRIALS,
    bound: int = DEFAULT_BOUND,
) -> NObodyApproximation:
    """
    Scaled hulls (1/m) hull(Gamma_m) for a general flag, and the hull of their union.

    Nesting P_m <= P_dm and Borel-fixedness of every P_m are checked and any
    violation is recorded.

    Raises:
        DomainError: every piece up to m_max is zero
    """
    per_m: dict[int, RationalPolytope] = {}
    certificates = []
    for m, space in system.spaces:
        if (m_max is not None and m > m_max) or space.rank == 0:
            continue
        master = split_seed(seed, m, 1)[0]
        result = generic_valuative_set(space, master, trials, bound)
        gamma_m = hull(dehomogenize(p) for p in result.points.points)
        per_m[m] = scale(gamma_m, Fraction(1, m))
        certificates.append((m, result.certificate))
    if not per_m:
        raise DomainError("all graded pieces are zero")

    nesting = [(m, k) for m in per_m for k in per_m if k != m and k % m == 0 and not is_subset(per_m[m], per_m[k])]
    borel_bad = [m for m, p in per_m.items() if not is_borel_fixed_body(p)]
    if nesting or borel_bad:
        logger.warning("NObody approximation violations", extra={"nesting": nesting, "borel": borel_bad})

    body = None
    for p in per_m.values():
        body = p if body is None else hull_union(body, p)
    return NObodyApproximation(
        tuple(sorted(per_m.items())), body, tuple(sorted(nesting)), tuple(sorted(borel_bad)), tuple(certificates)
    )


def _restriction_surjects(w: FormSpace, i: int, chart: FlagChart) -> bool:
    rows = transformed_rows(w, chart)
    keep = [k for k, m in enumerate(w.monomials) if all(e == 0 for e in m[: i - 1])]
    restricted = RatMatrix(tuple(tuple(row[k] for k in keep) for row in rows.entries), len(keep))
    return rank(restricted) == math.comb(w.d + w.n - i, w.n - i)


def partial_jet_separates(
    w: FormSpace,
    i: int,
    seed: int,
    bound: int = DEFAULT_BOUND,
    retry_cap: int = RETRY_CAP,
) -> bool:
    """
    Whether w restricted to a general codimension-(i-1) linear subspace is onto.

    The subspace is z_1 = ... = z_{i-1} = 0 in a random chart; two charts must
    agree.
    """
    if not 1 <= i <= w.n:
        raise DimensionError(f"index {i} outside 1..{w.n}")
    if w.rank == 0:
        return False
    for attempt in range(retry_cap):
        first, second = (_restriction_surjects(w, i, FlagChart.random(w.n, s, bound)) for s in split_seed(seed, attempt, 2))
        if first == second:
            return first
        logger.warning("Jet separation charts disagree; resampling", extra={"attempt": attempt, "index": i})
    raise GenericityError(f"jet separation undecided after {retry_cap} attempts (seed {seed})")


def jet_derivative(f: PolyElement, direction: int | Sequence) -> PolyElement:
    """
    Derivative of f along a variable (1-based index) or a direction vector.

    The result may be zero.
    """
    R = f.ring
    if isinstance(direction, int):
        if not 1 <= direction <= R.ngens:
            raise DimensionError(f"variable index {direction} outside 1..{R.ngens}")
        return f.diff(R.gens[direction - 1])
    coeffs = [to_rat(c) for c in direction]
    if len(coeffs) != R.ngens:
        raise DimensionError(f"direction of length {len(coeffs)} for {R.ngens} variables")
    return sum((_to_qq(c) * f.diff(x) for c, x in zip(coeffs, R.gens) if c != 0), R.zero)


_VARIABLES = re.compile(r"x(\d+)")


def parse_forms(text: str) -> FormSpace:
    """
    Parse generators from JSON or text.

    JSON: {"variables": n, "generators": [[["p/q", [exps]], ...], ...]}.
    Text: one polynomial in x1..xn per line, '#' comments, optional first
    line "variables: n".
    """
    body = text.strip()
    if not body:
        raise ParseError("no generators")
    if body.startswith("{"):
        n, forms = _parse_json_forms(body)
    else:
        n, forms = _parse_text_forms(body)
    forms = [f for f in forms if f]
    if not forms:
        raise ParseError("no nonzero generators")
    try:
        degrees = {form_degree(f) for f in forms}
    except DomainError as e:
        raise ParseError(str(e)) from e
    if len(degrees) != 1:
        raise ParseError(f"generators have different degrees {sorted(degrees)}")
    return FormSpace.from_forms(n, degrees.pop(), forms)


def _parse_json_forms(body: str) -> tuple[int, list[PolyElement]]:
    try:
        data = json.loads(body)
        n = int(data["variables"])
        forms = [make_form(n, ((parse_rat(c), e) for c, e in gen)) for gen in data["generators"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed forms JSON: {e}") from e
    return n, forms


def _parse_text_forms(body: str) -> tuple[int, list[PolyElement]]:
    lines = [line.split("#", 1)[0].strip() for line in body.splitlines()]
    lines = [line for line in lines if line]
    n = None
    if lines and lines[0].lower().startswith("variables"):
        try:
            n = int(lines.pop(0).split(":", 1)[1])
        except (IndexError, ValueError) as e:
            raise ParseError("malformed 'variables: n' header") from e
    if not lines:
        raise ParseError("no generators")
    if n is None:
        n = max((int(k) for line in lines for k in _VARIABLES.findall(line)), default=1)
    if n < 1:
        raise ParseError(f"invalid variable count {n}")
    R = form_ring(n)
    names = {f"x{i}": Symbol(f"x{i}") for i in range(1, n + 1)}
    forms = []
    for line in lines:
        try:
            forms.append(R.from_expr(sympify(line, locals=names)))
        except (SympifyError, ValueError, TypeError) as e:
            raise ParseError(f"cannot read {line!r} as a polynomial in x1..x{n}") from e
    return n, forms
