"""
Exponent vectors and monomial orders

Implements:
1. ExpVec validation and (de)homogenization
2. lex and deglex comparisons (variable 1 most significant)
3. The weight vector w_d that realizes lex on degree-d monomials
4. Enumeration of degree-d monomials in ascending lex order
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from itertools import combinations_with_replacement

from inobody.errors import DimensionError, DomainError

ExpVec = tuple[int, ...]
WeightVec = tuple[int, ...]


def check_expvec(values: Iterable[int]) -> ExpVec:
    """Return values as an ExpVec, rejecting negative or non-integer entries."""
    vec = tuple(values)
    for x in vec:
        if isinstance(x, bool) or int(x) != x or x < 0:
            raise DomainError(f"exponent vector entries must be nonnegative integers, got {vec}")
    return tuple(int(x) for x in vec)


def _same_length(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise DimensionError(f"exponent vectors of different lengths: {len(a)} vs {len(b)}")


def lex_compare(a: Sequence[int], b: Sequence[int]) -> int:
    """
    Compare in lex order.

    Returns:
        -1, 0 or 1 as a is smaller, equal or greater. The first differing
        coordinate decides.
    """
    _same_length(a, b)
    for x, y in zip(a, b):
        if x != y:
            return -1 if x < y else 1
    return 0


def deglex_compare(a: Sequence[int], b: Sequence[int]) -> int:
    """Total degree first, lex to break ties."""
    _same_length(a, b)
    da, db = sum(a), sum(b)
    if da != db:
        return -1 if da < db else 1
    return lex_compare(a, b)


def lex_key(a: Sequence[int]) -> tuple[int, ...]:
    return tuple(a)


def deglex_key(a: Sequence[int]) -> tuple[int, ...]:
    return (sum(a), *a)


def weight_vector(n: int, d: int) -> WeightVec:
    """w_d = ((d+1)^(n-1), ..., d+1, 1)."""
    if n < 1 or d < 0:
        raise DomainError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    return tuple((d + 1) ** (n - 1 - i) for i in range(n))


def weight(a: Sequence[int], w: Sequence[int]) -> int:
    _same_length(a, w)
    return sum(x * y for x, y in zip(a, w))


def homogenize(v: Sequence[int], d: int) -> ExpVec:
    """Append d - sum(v) so the result has degree d."""
    vec = check_expvec(v)
    rest = d - sum(vec)
    if rest < 0:
        raise DomainError(f"{vec} has degree {sum(vec)} > {d}")
    return (*vec, rest)


def dehomogenize(v: Sequence[int]) -> ExpVec:
    if not v:
        raise DimensionError("cannot dehomogenize an empty exponent vector")
    return tuple(v[:-1])


def monomials_of_degree(n: int, d: int) -> list[ExpVec]:
    """All exponent vectors of length n and degree d, strictly ascending in lex."""
    if n < 1 or d < 0:
        raise DomainError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    exps = []
    for combo in combinations_with_replacement(range(n), d):
        e = [0] * n
        for var in combo:
            e[var] += 1
        exps.append(tuple(e))
    exps.sort()
    return exps
