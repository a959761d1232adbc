"""
Exact rational linear algebra

Implements:
1. Rat scalars (fractions.Fraction) with the "p/q" wire format
2. Immutable rational matrices
3. Row reduction over QQ (sympy DomainMatrix) with a caller-chosen column scan order
4. Rank, determinant, square solves and nullspaces
5. Seeded random charts and the per-trial seed splitting rule
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from inobody.errors import DimensionError, DomainError, ParseError

Rat = Fraction

DEFAULT_BOUND = 10**6

logger = logging.getLogger("inobody.exactlin")


def to_rat(value) -> Fraction:
    """
    Coerce an exact scalar to Fraction.

    Floats are refused: every quantity in this library is exact, and a float
    reaching this point is a caller bug.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"not a rational scalar: {value!r}")
    if isinstance(value, (Integral, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        return parse_rat(value)
    raise DomainError(f"not a rational scalar: {value!r}")


def parse_rat(text: str) -> Fraction:
    """Parse "p/q" or "p" into a reduced Fraction."""
    if not isinstance(text, str):
        raise ParseError(f"expected a 'p/q' string, got {text!r}")
    body = text.strip()
    num, sep, den = body.partition("/")
    try:
        if sep:
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"malformed rational {text!r}") from e


def format_rat(value) -> str:
    """Render a rational as "p/q" (q >= 1, always present)."""
    v = to_rat(value)
    return f"{v.numerator}/{v.denominator}"


def to_vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_rat(v) for v in values)


def dot(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


@dataclass(frozen=True)
class RatMatrix:
    """Immutable rectangular matrix of Fractions, stored row-major."""

    entries: tuple[tuple[Fraction, ...], ...]
    ncols: int

    def __post_init__(self):
        for row in self.entries:
            if len(row) != self.ncols:
                raise DimensionError(f"ragged matrix: row of length {len(row)} in a {self.ncols}-column matrix")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable], ncols: int | None = None) -> RatMatrix:
        entries = tuple(to_vector(row) for row in rows)
        if ncols is None:
            if not entries:
                raise DimensionError("column count required for a matrix without rows")
            ncols = len(entries[0])
        return cls(entries, ncols)

    @classmethod
    def identity(cls, n: int) -> RatMatrix:
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> RatMatrix:
        return cls(tuple(tuple(Fraction(0) for _ in range(ncols)) for _ in range(nrows)), ncols)

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, index: tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.entries)

    def transpose(self) -> RatMatrix:
        return RatMatrix(tuple(self.column(j) for j in range(self.ncols)), self.nrows)

    def __matmul__(self, other: RatMatrix) -> RatMatrix:
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = [other.column(j) for j in range(other.ncols)]
        return RatMatrix(tuple(tuple(dot(row, col) for col in cols) for row in self.entries), other.ncols)

    def apply(self, vector: Sequence) -> tuple[Fraction, ...]:
        """Matrix-vector product."""
        return tuple(dot(row, vector) for row in self.entries)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def to_json(self) -> list[list[str]]:
        return [[format_rat(x) for x in row] for row in self.entries]

    @classmethod
    def from_json(cls, data, ncols: int | None = None) -> RatMatrix:
        if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
            raise ParseError("matrix must be a list of rows")
        try:
            return cls.from_rows([[parse_rat(x) for x in row] for row in data], ncols)
        except DimensionError as e:
            raise ParseError(str(e)) from e


def _domain_matrix(rows: Sequence[Sequence[Fraction]], ncols: int) -> DomainMatrix:
    return DomainMatrix([[QQ(x.numerator, x.denominator) for x in row] for row in rows], (len(rows), ncols), QQ)


def _from_domain(dm: DomainMatrix) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(int(x.p), int(x.q)) for x in row) for row in dm.to_Matrix().tolist())


def rref(m: RatMatrix, column_order: Sequence[int] | None = None) -> tuple[RatMatrix, list[int]]:
    """
    Reduced row echelon form with pivots chosen in a given column scan order.

    The columns are permuted into scan order, reduced by sympy over QQ and
    permuted back.

    Args:
        m: Matrix to reduce
        column_order: Permutation of range(m.ncols); natural order when None

    Returns:
        (reduced matrix, pivot columns in scan order). Nonzero rows come first,
        one per pivot, in the order their pivots were found.
    """
    order = list(range(m.ncols)) if column_order is None else [int(c) for c in column_order]
    if sorted(order) != list(range(m.ncols)):
        raise DimensionError(f"column order {order} is not a permutation of 0..{m.ncols - 1}")
    if m.nrows == 0 or m.ncols == 0:
        return m, []

    permuted = [[row[c] for c in order] for row in m.entries]
    reduced, pivots = _domain_matrix(permuted, m.ncols).rref()
    back = [0] * m.ncols
    for position, c in enumerate(order):
        back[c] = position
    rows = tuple(tuple(row[back[c]] for c in range(m.ncols)) for row in _from_domain(reduced))
    return RatMatrix(rows, m.ncols), [order[p] for p in pivots]


def rank(m: RatMatrix) -> int:
    return len(rref(m)[1])


def det(m: RatMatrix) -> Fraction:
    """Determinant over QQ by sympy's fraction-free elimination."""
    n, ncols = m.shape
    if n != ncols:
        raise DimensionError(f"determinant of a non-square {m.shape} matrix")
    if n == 0:
        return Fraction(1)
    value = _domain_matrix(m.entries, n).det()
    return Fraction(int(QQ.numer(value)), int(QQ.denom(value)))


def solve(m: RatMatrix, rhs: Sequence) -> tuple[Fraction, ...]:
    """Solve m·x = rhs for a square nonsingular m."""
    n, ncols = m.shape
    if n != ncols or len(rhs) != n:
        raise DimensionError(f"cannot solve a {m.shape} system with a right-hand side of length {len(rhs)}")
    augmented = RatMatrix(tuple(row + (to_rat(b),) for row, b in zip(m.entries, rhs)), n + 1)
    reduced, pivots = rref(augmented)
    if pivots != list(range(n)):
        raise DimensionError("singular system")
    return tuple(reduced[i, n] for i in range(n))


def nullspace(m: RatMatrix) -> list[tuple[Fraction, ...]]:
    """Basis of {x : m·x = 0}, one vector per free column, read off the natural-order rref."""
    reduced, pivots = rref(m)
    free = [j for j in range(m.ncols) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * m.ncols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -reduced[r, f]
        basis.append(tuple(v))
    return basis


def split_seed(master: int, attempt: int, count: int) -> list[int]:
    """
    Derive `count` independent trial seeds from a master seed.

    The rule is fixed: SeedSequence entropy [master, attempt], 64-bit states.
    """
    if master < 0 or attempt < 0:
        raise DomainError("seeds must be nonnegative")
    states = np.random.SeedSequence([int(master), int(attempt)]).generate_state(count, dtype=np.uint64)
    return [int(s) for s in states]


def random_unit_lower_triangular(n: int, bound: int = DEFAULT_BOUND, seed: int | None = None) -> RatMatrix:
    """
    Sample a unit lower-triangular integer matrix.

    Args:
        n: Dimension (>= 1)
        bound: Strictly-lower entries are uniform in [-bound, bound]
        seed: Seed for numpy's default generator

    Returns:
        n x n RatMatrix with ones on the diagonal
    """
    if n < 1:
        raise DimensionError(f"dimension must be at least 1, got {n}")
    if bound < 1:
        raise DomainError(f"bound must be at least 1, got {bound}")
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        lower = [int(x) for x in rng.integers(-bound, bound, size=i, endpoint=True)]
        rows.append(tuple(Fraction(x) for x in lower) + (Fraction(1),) + (Fraction(0),) * (n - i - 1))
    return RatMatrix(tuple(rows), n)


def random_invertible(n: int, bound: int = DEFAULT_BOUND, seed: int | None = None) -> RatMatrix:
    """Sample an invertible integer matrix with entries in [-bound, bound], resampling singular draws."""
    if n < 1:
        raise DimensionError(f"dimension must be at least 1, got {n}")
    if bound < 1:
        raise DomainError(f"bound must be at least 1, got {bound}")
    rng = np.random.default_rng(seed)
    while True:
        draw = rng.integers(-bound, bound, size=(n, n), endpoint=True)
        m = RatMatrix.from_rows(([int(x) for x in row] for row in draw), n)
        if det(m) != 0:
            return m
        logger.debug("Resampling singular matrix", extra={"n": n, "bound": bound})
