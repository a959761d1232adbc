"""
Exact rational convex polytopes

Implements:
1. RationalPolytope carrying both vertex and halfspace descriptions
2. Exact convex hulls and vertex enumeration through PPL polyhedra
3. Volume, slices, projections, Minkowski sums, intersections
4. The straightening map S and its inverse
5. Coordinate simplices, Gamma polytopes, boxes and their tilted versions
6. JSON round trip with "p/q" rationals

PPL works on integer generators and constraints; rationals are scaled to a
common denominator on the way in and come back as fractions.Fraction.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product

import ppl

from inobody.errors import DimensionError, DomainError, ParseError
from inobody.exactlin import RatMatrix, dot, format_rat, parse_rat, rank, to_rat, to_vector

MAX_DIM = 6

Point = tuple[Fraction, ...]

logger = logging.getLogger("inobody.polytope")


def _lcm_of_denominators(values: Iterable[Fraction]) -> int:
    den = 1
    for x in values:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return den


def _primitive_factor(v: Sequence[Fraction]) -> Fraction:
    """Positive factor turning v into a primitive integer vector."""
    den = _lcm_of_denominators(v)
    g = 0
    for x in v:
        g = math.gcd(g, int(x * den))
    if g == 0:
        return Fraction(1)
    return Fraction(den, g)


@dataclass(frozen=True, order=True)
class Halfspace:
    """normal . x <= offset"""

    normal: tuple[Fraction, ...]
    offset: Fraction

    @classmethod
    def normalized(cls, normal: Iterable, offset) -> Halfspace:
        normal = to_vector(normal)
        offset = to_rat(offset)
        factor = _primitive_factor(normal)
        return cls(tuple(x * factor for x in normal), offset * factor)

    def slack(self, x: Sequence) -> Fraction:
        return self.offset - dot(self.normal, x)

    def contains(self, x: Sequence) -> bool:
        return dot(self.normal, x) <= self.offset

    def tight(self, x: Sequence) -> bool:
        return dot(self.normal, x) == self.offset

    def to_json(self) -> dict:
        return {"normal": [format_rat(a) for a in self.normal], "offset": format_rat(self.offset)}


@dataclass(frozen=True)
class RationalPolytope:
    """
    Bounded convex polytope in Q^dim.

    vertices are sorted and are exactly the extreme points; they alone decide
    equality. halfspaces are irredundant, primitive-integer normalized and
    sorted. A lower-dimensional polytope lists each equation of its affine
    hull as a pair of opposite halfspaces, so its halfspace list is one valid
    choice among several. The empty polytope has no vertices and the single
    halfspace 0 . x <= -1.
    """

    dim: int
    vertices: tuple[Point, ...]
    halfspaces: tuple[Halfspace, ...] = field(compare=False)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def contains(self, x: Sequence) -> bool:
        if self.is_empty:
            return False
        point = to_vector(x)
        if len(point) != self.dim:
            raise DimensionError(f"point of length {len(point)} tested against a {self.dim}-dimensional polytope")
        return all(h.contains(point) for h in self.halfspaces)

    @cached_property
    def affine_dim(self) -> int:
        if self.is_empty:
            return -1
        if self.dim == 0:
            return 0
        return _polyhedron_of_points(self.dim, self.vertices).affine_dimension()

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.dim

    def tight_halfspaces(self, x: Sequence) -> list[Halfspace]:
        return [h for h in self.halfspaces if h.tight(x)]

    @cached_property
    def edges(self) -> tuple[tuple[Point, Point], ...]:
        """Vertex pairs spanning an edge; computed for full-dimensional polytopes only."""
        if not self.is_full_dimensional:
            raise DimensionError("edges are only enumerated for full-dimensional polytopes")
        tight = {v: frozenset(i for i, h in enumerate(self.halfspaces) if h.tight(v)) for v in self.vertices}
        result = []
        for u, v in combinations(self.vertices, 2):
            common = tight[u] & tight[v]
            if len(common) < self.dim - 1:
                continue
            normals = RatMatrix(tuple(self.halfspaces[i].normal for i in sorted(common)), self.dim)
            if rank(normals) == self.dim - 1:
                result.append((u, v))
        return tuple(result)

    def width(self, coord: int) -> Fraction:
        """Maximum of one coordinate over the polytope."""
        if self.is_empty:
            raise DomainError("width of the empty polytope")
        return max(v[coord] for v in self.vertices)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "vertices": [[format_rat(x) for x in v] for v in self.vertices],
            "halfspaces": [h.to_json() for h in self.halfspaces],
        }

    @classmethod
    def from_json(cls, data: dict) -> RationalPolytope:
        """Rebuild a polytope, rejecting data whose two descriptions disagree."""
        try:
            dim = int(data["dim"])
            vertices = [tuple(parse_rat(x) for x in v) for v in data["vertices"]]
            halfspaces = [
                (tuple(parse_rat(a) for a in h["normal"]), parse_rat(h["offset"])) for h in data["halfspaces"]
            ]
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed polytope JSON: {e}") from e
        rebuilt = empty(dim) if not vertices else hull(vertices)
        if rebuilt.dim != dim or rebuilt.vertices != tuple(sorted(set(vertices))):
            raise ParseError("vertex list is not the vertex set of its hull")
        try:
            carved = from_halfspaces(dim, halfspaces)
        except DomainError as e:
            raise ParseError(f"halfspace description is unbounded: {e}") from e
        if carved != rebuilt:
            raise ParseError("vertex and halfspace descriptions do not describe the same polytope")
        return rebuilt


def empty(dim: int) -> RationalPolytope:
    _check_dim(dim)
    return RationalPolytope(dim, (), (Halfspace((Fraction(0),) * dim, Fraction(-1)),))


def _check_dim(dim: int) -> None:
    if not 0 <= dim <= MAX_DIM:
        raise DimensionError(f"ambient dimension must be between 0 and {MAX_DIM}, got {dim}")


def _linear(coefficients: Sequence[int], variables: Sequence[ppl.Variable]) -> ppl.Linear_Expression:
    expr = ppl.Linear_Expression()
    for c, x in zip(coefficients, variables):
        if c:
            expr += c * x
    return expr


def _polyhedron_of_points(dim: int, points: Iterable[Point]) -> ppl.C_Polyhedron:
    variables = [ppl.Variable(i) for i in range(dim)]
    gs = ppl.Generator_System()
    for p in points:
        den = _lcm_of_denominators(p)
        gs.insert(ppl.point(_linear([int(x * den) for x in p], variables), den))
    poly = ppl.C_Polyhedron(dim, "empty")
    poly.add_generators(gs)
    return poly


def _polyhedron_of_halfspaces(dim: int, halfspaces: Iterable[Halfspace]) -> ppl.C_Polyhedron:
    variables = [ppl.Variable(i) for i in range(dim)]
    poly = ppl.C_Polyhedron(dim, "universe")
    for h in halfspaces:
        den = _lcm_of_denominators((*h.normal, h.offset))
        poly.add_constraint(_linear([int(-a * den) for a in h.normal], variables) + int(h.offset * den) >= 0)
    return poly


def _from_polyhedron(dim: int, poly: ppl.C_Polyhedron) -> RationalPolytope:
    """Read vertices and irredundant halfspaces off a bounded PPL polyhedron."""
    if poly.is_empty():
        return empty(dim)
    if not poly.is_bounded():
        raise DomainError("halfspaces describe an unbounded region")
    variables = [ppl.Variable(i) for i in range(dim)]
    vertices = []
    for g in poly.minimized_generators():
        if g.is_point():
            den = int(g.divisor())
            vertices.append(tuple(Fraction(int(g.coefficient(x)), den) for x in variables))
    halfspaces = []
    for c in poly.minimized_constraints():
        # PPL constraints read a . x + b >= 0 (or == 0)
        a = [Fraction(int(c.coefficient(x))) for x in variables]
        b = Fraction(int(c.inhomogeneous_term()))
        if not any(a):
            continue
        halfspaces.append(Halfspace.normalized([-x for x in a], b))
        if c.is_equality():
            halfspaces.append(Halfspace.normalized(a, -b))
    return _assemble(dim, vertices, halfspaces)


def _assemble(dim: int, vertices: Iterable[Point], halfspaces: Iterable[Halfspace]) -> RationalPolytope:
    return RationalPolytope(dim, tuple(sorted(set(vertices))), tuple(sorted(set(halfspaces))))


def hull(points: Iterable[Sequence]) -> RationalPolytope:
    """
    Convex hull of finitely many rational points.

    Args:
        points: Nonempty collection of equal-length rational vectors

    Returns:
        Polytope with minimal vertex list and irredundant halfspaces
    """
    pts = sorted({to_vector(p) for p in points})
    if not pts:
        raise DomainError("hull of an empty point list; use empty(dim) for the empty polytope")
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise DimensionError("points of different dimensions")
    _check_dim(dim)
    if dim == 0:
        return RationalPolytope(0, ((),), ())
    return _from_polyhedron(dim, _polyhedron_of_points(dim, pts))


def from_halfspaces(dim: int, halfspaces: Iterable) -> RationalPolytope:
    """
    Polytope {x : a . x <= b} from (normal, offset) pairs or Halfspace objects.

    Raises:
        DomainError: If the region is nonempty and unbounded
    """
    _check_dim(dim)
    constraints: list[Halfspace] = []
    for item in halfspaces:
        normal, offset = (item.normal, item.offset) if isinstance(item, Halfspace) else item
        normal = to_vector(normal)
        offset = to_rat(offset)
        if len(normal) != dim:
            raise DimensionError(f"halfspace normal of length {len(normal)} in dimension {dim}")
        if not any(normal):
            if offset < 0:
                return empty(dim)
            continue
        constraints.append(Halfspace(normal, offset))
    if dim == 0:
        return RationalPolytope(0, ((),), ())
    return _from_polyhedron(dim, _polyhedron_of_halfspaces(dim, constraints))


def volume(p: RationalPolytope) -> Fraction:
    """Exact volume in the ambient dimension; 0 unless full-dimensional."""
    if p.is_empty:
        return Fraction(0)
    if p.dim == 0:
        return Fraction(1)
    if not p.is_full_dimensional:
        return Fraction(0)
    if p.dim == 1:
        return p.vertices[-1][0] - p.vertices[0][0]

    # Cone decomposition from the first vertex: vol = (1/n) sum_F h_F vol(F), with
    # each facet measured through its shadow along a coordinate it is not parallel to.
    origin = p.vertices[0]
    total = Fraction(0)
    for h in p.halfspaces:
        height = h.offset - dot(h.normal, origin)
        if height == 0:
            continue
        j = next(k for k, a in enumerate(h.normal) if a != 0)
        shadow = [tuple(x - o for k, (x, o) in enumerate(zip(v, origin)) if k != j) for v in p.vertices if h.tight(v)]
        total += height / abs(h.normal[j]) * volume(hull(shadow))
    return total / p.dim


def slice(p: RationalPolytope, coord: int, value) -> RationalPolytope:
    """
    Intersect with {x_coord = value} and drop that coordinate.

    Returns:
        Polytope in dimension dim - 1, possibly empty
    """
    if not 0 <= coord < p.dim:
        raise DimensionError(f"coordinate {coord} out of range for dimension {p.dim}")
    t = to_rat(value)
    if p.is_empty:
        return empty(p.dim - 1)
    reduced = [(h.normal[:coord] + h.normal[coord + 1 :], h.offset - h.normal[coord] * t) for h in p.halfspaces]
    return from_halfspaces(p.dim - 1, reduced)


def project_drop(p: RationalPolytope, coord: int) -> RationalPolytope:
    if not 0 <= coord < p.dim:
        raise DimensionError(f"coordinate {coord} out of range for dimension {p.dim}")
    if p.is_empty:
        return empty(p.dim - 1)
    return hull(v[:coord] + v[coord + 1 :] for v in p.vertices)


def _same_dim(p: RationalPolytope, q: RationalPolytope) -> None:
    if p.dim != q.dim:
        raise DimensionError(f"polytopes of dimensions {p.dim} and {q.dim}")


def minkowski_sum(p: RationalPolytope, q: RationalPolytope) -> RationalPolytope:
    _same_dim(p, q)
    if p.is_empty or q.is_empty:
        return empty(p.dim)
    return hull(tuple(a + b for a, b in zip(u, v)) for u in p.vertices for v in q.vertices)


def hull_union(p: RationalPolytope, q: RationalPolytope) -> RationalPolytope:
    _same_dim(p, q)
    if p.is_empty:
        return q
    if q.is_empty:
        return p
    return hull(p.vertices + q.vertices)


def intersection(p: RationalPolytope, q: RationalPolytope) -> RationalPolytope:
    _same_dim(p, q)
    if p.is_empty or q.is_empty:
        return empty(p.dim)
    return from_halfspaces(p.dim, p.halfspaces + q.halfspaces)


def scale(p: RationalPolytope, factor) -> RationalPolytope:
    c = to_rat(factor)
    if c < 0:
        raise DomainError(f"negative scaling factor {c}")
    if p.is_empty:
        return p
    return hull(tuple(c * x for x in v) for v in p.vertices)


def translate(p: RationalPolytope, shift: Sequence) -> RationalPolytope:
    s = to_vector(shift)
    if len(s) != p.dim:
        raise DimensionError(f"shift of length {len(s)} for a {p.dim}-dimensional polytope")
    if p.is_empty:
        return p
    return hull(tuple(a + b for a, b in zip(v, s)) for v in p.vertices)


def is_subset(p: RationalPolytope, q: RationalPolytope) -> bool:
    """p is contained in q."""
    _same_dim(p, q)
    return all(q.contains(v) for v in p.vertices)


def lattice_points(p: RationalPolytope) -> list[tuple[int, ...]]:
    """Integer points of p, sorted."""
    if p.is_empty:
        return []
    ranges = []
    for k in range(p.dim):
        lo = math.ceil(min(v[k] for v in p.vertices))
        hi = math.floor(max(v[k] for v in p.vertices))
        ranges.append(range(lo, hi + 1))
    return [x for x in product(*ranges) if p.contains(x)]


@dataclass(frozen=True)
class StraightenMap:
    """
    S(v) = (v_2, ..., v_n, v_1 - v_2 - ... - v_n), unimodular.

    The inverse is S^-1(a) = (a_1 + ... + a_n, a_1, ..., a_{n-1}).
    """

    dim: int

    def apply_point(self, v: Sequence) -> Point:
        v = self._check(v)
        if self.dim == 1:
            return v
        return (*v[1:], v[0] - sum(v[1:], Fraction(0)))

    def invert_point(self, a: Sequence) -> Point:
        a = self._check(a)
        if self.dim == 1:
            return a
        return (sum(a, Fraction(0)), *a[:-1])

    def matrix(self) -> RatMatrix:
        return RatMatrix.from_rows(
            [[self.apply_point(tuple(Fraction(int(i == j)) for i in range(self.dim)))[k] for j in range(self.dim)]
             for k in range(self.dim)]
        )

    def apply(self, p: RationalPolytope) -> RationalPolytope:
        self._check_polytope(p)
        return p if p.is_empty else hull(self.apply_point(v) for v in p.vertices)

    def invert(self, p: RationalPolytope) -> RationalPolytope:
        self._check_polytope(p)
        return p if p.is_empty else hull(self.invert_point(v) for v in p.vertices)

    def _check(self, v: Sequence) -> Point:
        v = to_vector(v)
        if len(v) != self.dim:
            raise DimensionError(f"vector of length {len(v)} for a {self.dim}-dimensional straightening map")
        return v

    def _check_polytope(self, p: RationalPolytope) -> None:
        if p.dim != self.dim:
            raise DimensionError(f"polytope of dimension {p.dim} for a {self.dim}-dimensional straightening map")


def straighten(p: RationalPolytope) -> RationalPolytope:
    return StraightenMap(p.dim).apply(p)


def unstraighten(p: RationalPolytope) -> RationalPolytope:
    return StraightenMap(p.dim).invert(p)


def _params(t: Iterable) -> tuple[Fraction, ...]:
    values = to_vector(t)
    if not values:
        raise DimensionError("at least one parameter required")
    _check_dim(len(values))
    if any(x < 0 for x in values):
        raise DomainError(f"parameters must be nonnegative, got {[str(x) for x in values]}")
    return values


def _positivity(n: int) -> list[tuple[tuple[Fraction, ...], Fraction]]:
    return [(tuple(Fraction(-int(i == j)) for j in range(n)), Fraction(0)) for i in range(n)]


def simplex_polytope(t: Iterable) -> RationalPolytope:
    """hull(0, t_1 e_1, ..., t_n e_n)."""
    values = _params(t)
    n = len(values)
    if any(x == 0 for x in values):
        corners = [tuple(values[i] if i == j else Fraction(0) for j in range(n)) for i in range(n)]
        return hull([(Fraction(0),) * n, *corners])
    diagonal = (tuple(1 / x for x in values), Fraction(1))
    return from_halfspaces(n, [*_positivity(n), diagonal])


def gamma_polytope(t: Iterable) -> RationalPolytope:
    """{x >= 0 : x_1 + ... + x_i <= t_i for every i}."""
    values = _params(t)
    n = len(values)
    partial = [(tuple(Fraction(int(j <= i)) for j in range(n)), values[i]) for i in range(n)]
    return from_halfspaces(n, [*_positivity(n), *partial])


def box(t: Iterable) -> RationalPolytope:
    values = _params(t)
    n = len(values)
    upper = [(tuple(Fraction(int(i == j)) for j in range(n)), values[i]) for i in range(n)]
    return from_halfspaces(n, [*_positivity(n), *upper])


def inverted_simplex(t: Iterable) -> RationalPolytope:
    return unstraighten(simplex_polytope(t))


def inverted_gamma(t: Iterable) -> RationalPolytope:
    return unstraighten(gamma_polytope(t))
