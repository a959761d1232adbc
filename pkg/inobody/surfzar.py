"""
Zariski decompositions on blow-up surfaces

Implements:
1. SurfaceModel: named classes, exact Gram matrix, candidate negative curves,
   and the ray L_t = pi^*L - tE
2. Iterative Zariski decomposition (support growth to a fixed point) and the
   exhaustive subset oracle
3. The piecewise-linear function t -> N(L_t).E, walked over support-stability
   intervals with exact breakpoints
4. The two-dimensional body under the graph of t -> t - N(L_t).E
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from inobody.errors import DimensionError, DomainError, ParseError, ZariskiError
from inobody.exactlin import RatMatrix, det, dot, format_rat, parse_rat, solve, to_rat, to_vector
from inobody.polytope import RationalPolytope, hull

DEFAULT_T_CAP = Fraction(10**6)

logger = logging.getLogger("inobody.surfzar")

Pair = tuple[Fraction, Fraction]
ZERO_PAIR: Pair = (Fraction(0), Fraction(0))


@dataclass(frozen=True)
class SurfaceModel:
    """
    Intersection data on a blown-up surface.

    classes span the model and carry the Gram matrix; curves name the
    candidate negative curves (a subset of classes); pullback holds the
    coefficients of pi^*L in the class basis.
    """

    classes: tuple[str, ...]
    gram: RatMatrix
    pullback: tuple[Fraction, ...]
    exceptional: str = "E"
    curves: tuple[str, ...] = ()
    volume: Fraction | None = None

    def __post_init__(self):
        k = len(self.classes)
        if len(set(self.classes)) != k:
            raise DomainError(f"duplicate class names in {self.classes}")
        if self.gram.shape != (k, k):
            raise DimensionError(f"Gram matrix of shape {self.gram.shape} for {k} classes")
        if any(self.gram[i, j] != self.gram[j, i] for i in range(k) for j in range(i)):
            raise DomainError("Gram matrix is not symmetric")
        if len(self.pullback) != k:
            raise DimensionError(f"pullback has {len(self.pullback)} coefficients for {k} classes")
        if self.exceptional not in self.classes:
            raise DomainError(f"exceptional class {self.exceptional!r} is not among {self.classes}")
        e = self.index(self.exceptional)
        if self.gram[e, e] != -1:
            raise DomainError(f"E.E must be -1, got {self.gram[e, e]}")
        if not self.curves:
            object.__setattr__(self, "curves", self.classes)
        unknown = set(self.curves) - set(self.classes)
        if unknown:
            raise DomainError(f"curves {sorted(unknown)} are not model classes")

    def index(self, name: str) -> int:
        return self.classes.index(name)

    @property
    def curve_indices(self) -> tuple[int, ...]:
        return tuple(self.index(c) for c in self.curves)

    def unit(self, name: str) -> tuple[Fraction, ...]:
        i = self.index(name)
        return tuple(Fraction(int(j == i)) for j in range(len(self.classes)))

    def intersect(self, a: Sequence, b: Sequence) -> Fraction:
        return dot(a, self.gram.apply(b))

    def ray(self, t) -> tuple[Fraction, ...]:
        """Coefficients of L_t = pi^*L - tE."""
        t = to_rat(t)
        e = self.index(self.exceptional)
        return tuple(c - t if j == e else c for j, c in enumerate(self.pullback))

    def to_json(self) -> dict:
        data = {
            "classes": list(self.classes),
            "curves": list(self.curves),
            "exceptional": self.exceptional,
            "gram": self.gram.to_json(),
            "pullback": [format_rat(c) for c in self.pullback],
        }
        if self.volume is not None:
            data["volume"] = format_rat(self.volume)
        return data

    @classmethod
    def from_json(cls, data: dict | str) -> SurfaceModel:
        try:
            if isinstance(data, str):
                data = json.loads(data)
            classes = tuple(str(c) for c in data["classes"])
            gram = RatMatrix.from_json(data["gram"], len(classes))
            pullback = tuple(parse_rat(c) for c in data["pullback"])
            volume = parse_rat(data["volume"]) if data.get("volume") is not None else None
            return cls(
                classes=classes,
                gram=gram,
                pullback=pullback,
                exceptional=str(data.get("exceptional", "E")),
                curves=tuple(str(c) for c in data.get("curves", ())),
                volume=volume,
            )
        except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as e:
            raise ParseError(f"malformed surface model: {e}") from e


def blowup_p2_model(u, v) -> SurfaceModel:
    """
    P^2 blown up at p, then at a point x on the exceptional curve F over p.

    Classes are the strict transforms of the line through p and x and of F,
    plus the new exceptional curve E. pi^*L = (u+v) l + u F + (2u+v) E.
    """
    u, v = to_rat(u), to_rat(v)
    if not u >= v > 0:
        raise DomainError(f"need u >= v > 0, got u={u}, v={v}")
    gram = RatMatrix.from_rows([[-1, 0, 1], [0, -2, 1], [1, 1, -1]])
    return SurfaceModel(
        classes=("l", "F", "E"),
        gram=gram,
        pullback=(u + v, u, 2 * u + v),
        exceptional="E",
        volume=u * u + 2 * u * v,
    )


def picard_one_model(self_intersection) -> SurfaceModel:
    """A class H with H.H given, blown up once; E is the only candidate curve."""
    h = to_rat(self_intersection)
    if h <= 0:
        raise DomainError(f"H.H must be positive, got {h}")
    return SurfaceModel(
        classes=("H", "E"),
        gram=RatMatrix.from_rows([[h, 0], [0, -1]]),
        pullback=(Fraction(1), Fraction(0)),
        exceptional="E",
        curves=("E",),
        volume=h,
    )


@dataclass(frozen=True)
class ZariskiResult:
    positive: tuple[Fraction, ...]
    negative: tuple[tuple[str, Fraction], ...]

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.negative)

    def multiplicity(self, name: str) -> Fraction:
        return dict(self.negative).get(name, Fraction(0))

    def to_json(self, model: SurfaceModel) -> dict:
        return {
            "positive": {c: format_rat(x) for c, x in zip(model.classes, self.positive)},
            "negative": {c: format_rat(x) for c, x in self.negative},
            "support": list(self.support),
        }


def is_negative_definite(m: RatMatrix) -> bool:
    """Leading principal minors alternate in sign, starting negative."""
    for k in range(1, m.nrows + 1):
        minor = RatMatrix(tuple(row[:k] for row in m.entries[:k]), k)
        if (-1) ** k * det(minor) <= 0:
            return False
    return True


def _restrict(model: SurfaceModel, support: Sequence[int]) -> RatMatrix:
    return RatMatrix(tuple(tuple(model.gram[i, j] for j in support) for i in support), len(support))


def _decompose(
    model: SurfaceModel, d0: Sequence[Fraction], d1: Sequence[Fraction]
) -> tuple[list[int], list[Pair], tuple[Fraction, ...], tuple[Fraction, ...]]:
    """
    Iterative support growth on the class d0 + eps*d1, eps -> 0+.

    Every scalar is a (value, slope) pair compared lexicographically. With a
    zero slope vector this is the plain decomposition of d0.
    """
    support: list[int] = []
    coeffs: list[Pair] = []
    gd0, gd1 = model.gram.apply(d0), model.gram.apply(d1)
    p0, p1 = tuple(d0), tuple(d1)
    while True:
        if support:
            g = _restrict(model, support)
            if not is_negative_definite(g):
                names = [model.classes[i] for i in support]
                raise ZariskiError(f"support {names} is not negative definite")
            c0 = solve(g, [gd0[i] for i in support])
            c1 = solve(g, [gd1[i] for i in support])
            coeffs = list(zip(c0, c1))
            q0, q1 = list(d0), list(d1)
            for i, a, b in zip(support, c0, c1):
                q0[i] -= a
                q1[i] -= b
            p0, p1 = tuple(q0), tuple(q1)
        gp0, gp1 = model.gram.apply(p0), model.gram.apply(p1)
        new = [i for i in model.curve_indices if i not in support and (gp0[i], gp1[i]) < ZERO_PAIR]
        if not new:
            break
        logger.debug("Growing support", extra={"added": [model.classes[i] for i in new]})
        support = sorted(support + new)

    for i, c in zip(support, coeffs):
        if c <= ZERO_PAIR:
            raise ZariskiError(f"multiplicity of {model.classes[i]} is not positive")
    square = (dot(p0, gp0), 2 * dot(p0, gp1))
    if square < ZERO_PAIR:
        raise ZariskiError("positive part has negative self-intersection; class is not pseudoeffective in the model")
    return support, coeffs, p0, p1


def zariski_decompose(model: SurfaceModel, d: Sequence) -> ZariskiResult:
    """
    Zariski decomposition of a class by iterative support growth.

    Raises:
        ZariskiError: no valid decomposition within the listed curves
    """
    d = to_vector(d)
    if len(d) != len(model.classes):
        raise DimensionError(f"class has {len(d)} coefficients, model has {len(model.classes)} classes")
    support, coeffs, p0, _ = _decompose(model, d, (Fraction(0),) * len(d))
    return ZariskiResult(p0, tuple((model.classes[i], c[0]) for i, c in zip(support, coeffs)))


def decompose_at(model: SurfaceModel, t) -> ZariskiResult:
    return zariski_decompose(model, model.ray(t))


def zariski_bruteforce(model: SurfaceModel, d: Sequence) -> ZariskiResult:
    """Try every subset of curves as the support; exactly one may be valid."""
    d = to_vector(d)
    gd = model.gram.apply(d)
    curves = model.curve_indices
    found = []
    for r in range(len(curves) + 1):
        for support in combinations(curves, r):
            g = _restrict(model, support)
            if support and det(g) == 0:
                continue
            c = solve(g, [gd[i] for i in support]) if support else ()
            if any(x <= 0 for x in c):
                continue
            p = list(d)
            for i, x in zip(support, c):
                p[i] -= x
            gp = model.gram.apply(p)
            if any(gp[i] < 0 for i in curves) or dot(p, gp) < 0:
                continue
            if support and not is_negative_definite(g):
                continue
            found.append(ZariskiResult(tuple(p), tuple((model.classes[i], x) for i, x in zip(support, c))))
    if not found:
        raise ZariskiError("no subset of the listed curves supports a valid decomposition")
    if len(found) > 1:
        raise ZariskiError(f"{len(found)} valid decompositions; model violates uniqueness")
    return found[0]


@dataclass(frozen=True)
class Piece:
    """N(L_t).E = intercept + slope*t on [start, end] with a fixed support."""

    start: Fraction
    end: Fraction
    slope: Fraction
    intercept: Fraction
    support: tuple[str, ...]

    def __call__(self, t) -> Fraction:
        return self.intercept + self.slope * to_rat(t)


@dataclass(frozen=True)
class PiecewiseLinear:
    pieces: tuple[Piece, ...]

    @property
    def mu(self) -> Fraction:
        return self.pieces[-1].end

    @property
    def breakpoints(self) -> tuple[Fraction, ...]:
        """Piece ends, the last being mu."""
        return tuple(p.end for p in self.pieces)

    def piece_at(self, t) -> Piece:
        t = to_rat(t)
        for p in self.pieces:
            if p.start <= t <= p.end:
                return p
        raise DomainError(f"t = {t} outside [0, {self.mu}]")

    def __call__(self, t) -> Fraction:
        return self.piece_at(t)(t)

    def is_continuous(self) -> bool:
        return all(a(a.end) == b(b.start) for a, b in zip(self.pieces, self.pieces[1:]))

    def upper_boundary_concave(self) -> bool:
        """t - N.E has nonincreasing slopes."""
        slopes = [1 - p.slope for p in self.pieces]
        return all(a >= b for a, b in zip(slopes, slopes[1:]))

    def to_json(self) -> dict:
        return {
            "mu": format_rat(self.mu),
            "breakpoints": [format_rat(b) for b in self.breakpoints],
            "pieces": [
                {
                    "start": format_rat(p.start),
                    "end": format_rat(p.end),
                    "slope": format_rat(p.slope),
                    "intercept": format_rat(p.intercept),
                    "support": list(p.support),
                }
                for p in self.pieces
            ],
        }


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def _quadratic_exit(a: Fraction, b: Fraction, c: Fraction, lo: Fraction, hi: Fraction | None) -> Fraction | None:
    """Smallest r in [lo, hi) after which a + b x + c x^2 turns negative, or None."""

    def q(x):
        return a + b * x + c * x * x

    if q(lo) < 0:
        return lo
    if c == 0:
        if b >= 0:
            return None
        r = -a / b
        return r if hi is None or r < hi else None
    disc = b * b - 4 * a * c
    if disc <= 0:
        return None if c > 0 else lo
    vertex = -b / (2 * c)
    if c > 0:
        if vertex <= lo or (hi is not None and hi <= vertex and q(hi) >= 0):
            return None
    elif hi is not None and q(hi) >= 0:
        return None
    root = _rational_sqrt(disc)
    if root is None:
        raise ZariskiError("positive part reaches zero self-intersection at an irrational t")
    r1, r2 = sorted(((-b - root) / (2 * c), (-b + root) / (2 * c)))
    return r1 if c > 0 else r2


def negative_part_on_E(model: SurfaceModel, t_cap: Fraction = DEFAULT_T_CAP) -> PiecewiseLinear:
    """
    The function t -> N(L_t).E on [0, mu] with exact breakpoints.

    Walks support-stability intervals: on each, multiplicities and P.C are
    affine in t, so the next breakpoint is the first root among them (or the
    first point where P.P reaches 0). At a breakpoint the support is recomputed
    as a right limit; mu is where that fails.

    Raises:
        ZariskiError: L itself has no decomposition, E enters the negative part
            before mu, the walk passes t_cap, or a breakpoint is irrational
    """
    e = model.index(model.exceptional)
    slope_class = tuple(Fraction(-1) if j == e else Fraction(0) for j in range(len(model.classes)))
    gd1 = model.gram.apply(slope_class)

    t = Fraction(0)
    support = _decompose(model, model.ray(0), slope_class)[0]
    pieces: list[Piece] = []
    while True:
        if e in support:
            raise ZariskiError("E lies in the negative part before mu; nonzero lower boundary is not supported")
        d0 = model.pullback
        gd0 = model.gram.apply(d0)
        g = _restrict(model, support)
        c0 = solve(g, [gd0[i] for i in support]) if support else ()
        c1 = solve(g, [gd1[i] for i in support]) if support else ()
        p0 = list(d0)
        p1 = list(slope_class)
        for i, a, b in zip(support, c0, c1):
            p0[i] -= a
            p1[i] -= b
        gp0, gp1 = model.gram.apply(p0), model.gram.apply(p1)

        ends = [-a / b for a, b in zip(c0, c1) if b < 0 and -a / b > t]
        ends += [-gp0[i] / gp1[i] for i in model.curve_indices if i not in support and gp1[i] < 0 and -gp0[i] / gp1[i] > t]
        t_end = min(ends, default=None)
        exit_square = _quadratic_exit(dot(p0, gp0), 2 * dot(p0, gp1), dot(p1, gp1), t, t_end)
        t_next = exit_square if exit_square is not None else t_end
        if t_next is None or t_next > t_cap:
            raise ZariskiError(f"no end of the pseudoeffective range found below t = {t_cap}")

        # N.E = sum of multiplicities times C.E, affine in t
        slope = sum((b * model.gram[i, e] for i, b in zip(support, c1)), Fraction(0))
        intercept = sum((a * model.gram[i, e] for i, a in zip(support, c0)), Fraction(0))
        names = tuple(model.classes[i] for i in support)
        if t_next > t:
            pieces.append(Piece(t, t_next, slope, intercept, names))
            logger.debug("Piece", extra={"start": str(t), "end": str(t_next), "support": names})

        try:
            next_support = _decompose(model, model.ray(t_next), slope_class)[0]
        except ZariskiError:
            break
        if next_support == support and t_next == t:
            raise ZariskiError(f"walk stalled at t = {t}")
        t, support = t_next, next_support

    if not pieces:
        raise ZariskiError("L_t is not big for any t > 0")
    result = PiecewiseLinear(tuple(pieces))
    logger.info("Negative part walked", extra={"mu": str(result.mu), "breakpoints": [str(b) for b in result.breakpoints]})
    return result


def surface_inobody(model: SurfaceModel) -> RationalPolytope:
    """{(t, y) : 0 <= t <= mu, 0 <= y <= t - N(L_t).E}."""
    profile = negative_part_on_E(model)
    points = [(Fraction(0), Fraction(0)), (profile.mu, Fraction(0))]
    for p in profile.pieces:
        for b in (p.start, p.end):
            points.append((b, b - p(b)))
    return hull(points)
