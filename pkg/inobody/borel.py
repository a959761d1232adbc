"""
Borel-fixed sets and shapes

Implements:
1. DiscreteSet and the Borel move family f_1, ..., f_k
2. The Borel predicate and breadth-first Borel closure of finite sets
3. Widths, axis widths and the counting bounds on |S|
4. The vertex test for Borel-fixed convex bodies via the crush maps B_i
5. Simplex/Gamma bounds of Borel-fixed shapes
6. Diagonal slice-volume profiles
7. Hull candidates: the points of a finite set that can be hull vertices
"""

from __future__ import annotations

import logging
import math
from collections import deque
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from inobody.errors import BorelError, DimensionError, DomainError, InobodyError, ParseError
from inobody.exactlin import format_rat, to_rat, to_vector
from inobody.monomial import ExpVec, check_expvec
from inobody.polytope import (
    RationalPolytope,
    gamma_polytope,
    hull,
    is_subset,
    lattice_points,
    simplex_polytope,
    slice,
    unstraighten,
    volume,
)

logger = logging.getLogger("inobody.borel")


@dataclass(frozen=True)
class DiscreteSet:
    """Finite set of nonnegative lattice points in Z^dim."""

    dim: int
    points: frozenset[ExpVec] = field(default_factory=frozenset)

    def __post_init__(self):
        for p in self.points:
            if len(p) != self.dim:
                raise DimensionError(f"point {p} in a {self.dim}-dimensional set")
            check_expvec(p)

    @classmethod
    def of(cls, points: Iterable[Sequence[int]], dim: int | None = None) -> DiscreteSet:
        pts = [check_expvec(p) for p in points]
        if dim is None:
            if not pts:
                raise DimensionError("dimension required for an empty set")
            dim = len(pts[0])
        return cls(dim, frozenset(pts))

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, point) -> bool:
        return tuple(point) in self.points

    def __iter__(self) -> Iterator[ExpVec]:
        return iter(sorted(self.points))

    def to_json(self) -> dict:
        return {"dim": self.dim, "points": [list(p) for p in self]}

    @classmethod
    def from_json(cls, data: dict) -> DiscreteSet:
        try:
            return cls.of((tuple(p) for p in data["points"]), int(data["dim"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed discrete set JSON: {e}") from e


@dataclass(frozen=True)
class BorelMove:
    """f_i = -e_i + e_{i+1} for i < dim, f_dim = -e_dim (1-based index)."""

    index: int
    dim: int

    def apply(self, point: Sequence[int]) -> ExpVec | None:
        """Image of a lattice point, or None when it leaves the orthant."""
        i = self.index - 1
        if point[i] == 0:
            return None
        moved = list(point)
        moved[i] -= 1
        if self.index < self.dim:
            moved[i + 1] += 1
        return tuple(moved)


def borel_moves(dim: int) -> list[BorelMove]:
    return [BorelMove(i, dim) for i in range(1, dim + 1)]


def crush(a: Sequence, index: int) -> tuple[Fraction, ...]:
    """B_i: move all of coordinate i onto coordinate i + 1 (the last coordinate is simply zeroed)."""
    a = to_vector(a)
    i = index - 1
    out = list(a)
    out[i] = Fraction(0)
    if index < len(a):
        out[i + 1] = a[i] + a[i + 1]
    return tuple(out)


@dataclass(frozen=True)
class BorelCheck:
    is_borel: bool
    point: ExpVec | None = None
    move: int | None = None
    image: ExpVec | None = None

    def __bool__(self) -> bool:
        return self.is_borel


def is_borel_fixed_set(s: DiscreteSet) -> BorelCheck:
    """Every admissible single move of every point stays in s; reports the first counterexample."""
    moves = borel_moves(s.dim)
    for p in s:
        for move in moves:
            q = move.apply(p)
            if q is not None and q not in s.points:
                return BorelCheck(False, p, move.index, q)
    return BorelCheck(True)


def borel_closure(points: Iterable[Sequence[int]], dim: int | None = None) -> DiscreteSet:
    """Smallest Borel-fixed superset, by breadth-first expansion over moves."""
    start = [check_expvec(p) for p in points]
    if dim is None:
        if not start:
            raise DimensionError("dimension required for the closure of no points")
        dim = len(start[0])
    moves = borel_moves(dim)
    seen = set(start)
    queue = deque(start)
    while queue:
        p = queue.popleft()
        for move in moves:
            q = move.apply(p)
            if q is not None and q not in seen:
                seen.add(q)
                queue.append(q)
    return DiscreteSet.of(seen, dim)


def axis_widths(s: DiscreteSet) -> tuple[int, ...]:
    """max{a : a e_i in s} per coordinate."""
    result = []
    for i in range(s.dim):
        on_axis = [p[i] for p in s.points if all(x == 0 for j, x in enumerate(p) if j != i)]
        result.append(max(on_axis, default=0))
    return tuple(result)


def widths(obj: DiscreteSet | RationalPolytope) -> tuple[Fraction, ...]:
    """
    Coordinate-wise maxima of a nonempty set or body.

    For Borel-fixed discrete sets the result is checked against the axis
    widths and for monotonicity.
    """
    if isinstance(obj, RationalPolytope):
        if obj.is_empty:
            raise DomainError("widths of the empty polytope")
        return tuple(obj.width(i) for i in range(obj.dim))
    if not obj.points:
        raise DomainError("widths of an empty set")
    result = tuple(Fraction(max(p[i] for p in obj.points)) for i in range(obj.dim))
    if is_borel_fixed_set(obj):
        if tuple(int(w) for w in result) != axis_widths(obj):
            raise InobodyError(f"widths {result} differ from axis widths {axis_widths(obj)} on a Borel-fixed set")
        if any(a > b for a, b in zip(result, result[1:])):
            raise InobodyError(f"widths {result} of a Borel-fixed set are not nondecreasing")
    return result


def counting_bounds(s: DiscreteSet) -> tuple[int, int]:
    """
    Bounds on |s| from its widths.

    Returns:
        (1 + sum_i C(w_i + n - i - 1, n - i), prod_i (w_i + 1)) with n = dim + 1
    """
    check = is_borel_fixed_set(s)
    if not check:
        raise BorelError(f"not Borel-fixed: move f_{check.move} sends {check.point} to {check.image}")
    w = [int(x) for x in widths(s)]
    n = s.dim + 1
    lower = 1 + sum(math.comb(w[i - 1] + n - i - 1, n - i) for i in range(1, n))
    upper = math.prod(x + 1 for x in w)
    if not lower <= len(s) <= upper:
        raise InobodyError(f"counting bounds violated: {lower} <= {len(s)} <= {upper} fails")
    return lower, upper


def hull_candidates(s: DiscreteSet) -> DiscreteSet:
    """
    Points of s that can be vertices of its convex hull.

    A point that is the midpoint of two other points of s along a unit
    direction or a Borel move is never extreme, so hull(hull_candidates(s))
    equals hull(s) while handing far fewer points to the hull.
    """
    directions = [tuple(int(i == j) for j in range(s.dim)) for i in range(s.dim)]
    for i in range(s.dim - 1):
        directions.append(tuple(1 if j == i else -1 if j == i + 1 else 0 for j in range(s.dim)))

    def interior(p: ExpVec) -> bool:
        for d in directions:
            ahead = tuple(a + b for a, b in zip(p, d))
            behind = tuple(a - b for a, b in zip(p, d))
            if ahead in s.points and behind in s.points:
                return True
        return False

    return DiscreteSet(s.dim, frozenset(p for p in s.points if not interior(p)))


def union(s: DiscreteSet, t: DiscreteSet) -> DiscreteSet:
    _same(s, t)
    return DiscreteSet(s.dim, s.points | t.points)


def intersection(s: DiscreteSet, t: DiscreteSet) -> DiscreteSet:
    _same(s, t)
    return DiscreteSet(s.dim, s.points & t.points)


def minkowski_sum(s: DiscreteSet, t: DiscreteSet) -> DiscreteSet:
    _same(s, t)
    return DiscreteSet(s.dim, frozenset(tuple(a + b for a, b in zip(p, q)) for p in s.points for q in t.points))


def _same(s: DiscreteSet, t: DiscreteSet) -> None:
    if s.dim != t.dim:
        raise DimensionError(f"sets of dimensions {s.dim} and {t.dim}")


def lattice_set(p: RationalPolytope) -> DiscreteSet:
    """Lattice points of a polytope in the nonnegative orthant."""
    _check_orthant(p)
    return DiscreteSet.of(lattice_points(p), p.dim)


def _check_orthant(p: RationalPolytope) -> None:
    if p.is_empty:
        raise DomainError("empty polytope")
    if any(x < 0 for v in p.vertices for x in v):
        raise DomainError("polytope leaves the nonnegative orthant")


@dataclass(frozen=True)
class BodyCheck:
    """Outcome of the vertex test; witnesses are (vertex, crush index, image outside the body)."""

    is_borel: bool
    witnesses: tuple[tuple[tuple[Fraction, ...], int, tuple[Fraction, ...]], ...] = ()

    def __bool__(self) -> bool:
        return self.is_borel

    @property
    def images(self) -> list[tuple[Fraction, ...]]:
        return [w[2] for w in self.witnesses]


def is_borel_fixed_body(p: RationalPolytope) -> BodyCheck:
    """
    Decide Borel-fixedness of a convex body at its vertices.

    Each crush map B_i is linear, so B_i(p) is the hull of the crushed vertices.
    """
    _check_orthant(p)
    witnesses = []
    for v in p.vertices:
        for i in range(1, p.dim + 1):
            image = crush(v, i)
            if not p.contains(image):
                witnesses.append((v, i, image))
    if witnesses:
        logger.debug("Body is not Borel-fixed", extra={"witnesses": len(witnesses)})
    return BodyCheck(not witnesses, tuple(witnesses))


@dataclass(frozen=True)
class ShapeBounds:
    lower: RationalPolytope
    upper: RationalPolytope
    lower_contained: bool
    upper_contains: bool
    volume_bounded: bool

    def __bool__(self) -> bool:
        return self.lower_contained and self.upper_contains and self.volume_bounded


def shape_bounds(p: RationalPolytope) -> ShapeBounds:
    """simplex(w(p)) <= p <= Gamma(w(p)) and prod(w)/k! <= vol(p) <= prod(w), for Borel-fixed p."""
    check = is_borel_fixed_body(p)
    if not check:
        raise BorelError(f"not a Borel-fixed body: crush images {check.images} fall outside")
    w = widths(p)
    lower = simplex_polytope(w)
    upper = gamma_polytope(w)
    vol = volume(p)
    top = math.prod(w, start=Fraction(1))
    return ShapeBounds(
        lower=lower,
        upper=upper,
        lower_contained=is_subset(lower, p),
        upper_contains=is_subset(p, upper),
        volume_bounded=top / math.factorial(p.dim) <= vol <= top,
    )


@dataclass(frozen=True)
class SliceProfile:
    samples: tuple[tuple[Fraction, Fraction], ...]
    window: tuple[Fraction, Fraction]
    monotone: bool

    def to_json(self) -> dict:
        return {
            "samples": [[format_rat(t), format_rat(v)] for t, v in self.samples],
            "window": [format_rat(x) for x in self.window],
            "monotone": self.monotone,
        }


def slice_volume_profile(p: RationalPolytope, samples: Iterable) -> SliceProfile:
    """
    Volumes of the diagonal sections p cap {a_1 + ... + a_k = t}.

    Each section is measured after dropping its last coordinate, i.e. as the
    nu_1 = t slice of the tilted body. The profile must be nonincreasing on
    [w_{k-1}, w_k).
    """
    check = is_borel_fixed_body(p)
    if not check:
        raise BorelError(f"not a Borel-fixed body: crush images {check.images} fall outside")
    w = widths(p)
    top = w[-1]
    ts = sorted({to_rat(t) for t in samples})
    for t in ts:
        if not 0 <= t <= top:
            raise DomainError(f"sample {t} outside [0, {top}]")

    tilted = unstraighten(p)
    values = tuple((t, volume(slice(tilted, 0, t))) for t in ts)
    start = w[-2] if p.dim > 1 else Fraction(0)
    window = [v for t, v in values if start <= t < top]
    monotone = all(a >= b for a, b in zip(window, window[1:]))
    if not monotone:
        logger.warning("Slice-volume profile increases on its monotone window", extra={"window": (str(start), str(top))})
    return SliceProfile(values, (start, top), monotone)


def random_closure(rng: np.random.Generator, dim: int, max_coord: int, generators: int) -> DiscreteSet:
    """Borel closure of a few random lattice points with entries in [0, max_coord]."""
    draws = rng.integers(0, max_coord, size=(generators, dim), endpoint=True)
    return borel_closure((tuple(int(x) for x in row) for row in draws), dim)
