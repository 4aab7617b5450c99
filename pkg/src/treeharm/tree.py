"""Breadth-first index arithmetic and Gromov geometry on a q-homogeneous tree.

Vertices are plain ``int`` labels.  The origin is 0, its ``q + 1`` neighbours
are ``1..q+1`` and every other vertex ``k`` has children ``qk+2 .. qk+q+1``.
With this labelling the vertices at depth ``m`` occupy the consecutive block
``cumulative_count(m-1)+1 .. cumulative_count(m)`` and all geometry reduces to
integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

INDEX_BITS = 128
_INDEX_LIMIT = (1 << (INDEX_BITS - 1)) - 1

# |log r - n| below this is treated as r == e^{-n}
LOG_EXACTNESS = 1e-12


@dataclass(frozen=True)
class TreeParams:
    q: int
    max_depth: int = 32

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2:
            raise ValueError(f"branching parameter q must be an integer >= 2, got {self.q!r}")
        if self.max_depth < 0:
            raise ValueError("max_depth must be nonnegative")


@dataclass(frozen=True, order=True)
class DyadicSet:
    """One member of the dyadic family: the whole tree, a sector or a singleton.

    ``vertex`` is 0 for the whole tree.  ``DyadicSet.sector(0)`` returns the
    whole tree, since the sector of the origin is all of X.
    """

    kind: str
    vertex: int = 0

    WHOLE = "whole"
    SECTOR = "sector"
    SINGLETON = "singleton"

    def __post_init__(self):
        if self.kind not in (self.WHOLE, self.SECTOR, self.SINGLETON):
            raise ValueError(f"unknown dyadic kind {self.kind!r}")
        if self.vertex < 0:
            raise ValueError("vertex labels are nonnegative")
        if self.kind == self.WHOLE and self.vertex != 0:
            raise ValueError("the whole tree carries vertex 0")
        if self.kind == self.SECTOR and self.vertex == 0:
            raise ValueError("the sector of the origin is the whole tree; use DyadicSet.whole()")

    @classmethod
    def whole(cls) -> "DyadicSet":
        return cls(cls.WHOLE, 0)

    @classmethod
    def sector(cls, v: int) -> "DyadicSet":
        return cls.whole() if v == 0 else cls(cls.SECTOR, v)

    @classmethod
    def singleton(cls, v: int) -> "DyadicSet":
        return cls(cls.SINGLETON, v)

    @property
    def is_whole(self) -> bool:
        return self.kind == self.WHOLE

    @property
    def is_sector(self) -> bool:
        return self.kind == self.SECTOR

    @property
    def is_singleton(self) -> bool:
        return self.kind == self.SINGLETON

    def __str__(self):
        if self.is_whole:
            return "X"
        if self.is_sector:
            return f"T({self.vertex})"
        return f"{{{self.vertex}}}"


@dataclass(frozen=True)
class GromovBall:
    center: int
    radius: float
    resolved: DyadicSet


def _check_vertex(k: int) -> None:
    if k < 0:
        raise ValueError(f"vertex labels are nonnegative, got {k}")


def cumulative_count(params: TreeParams, m: int) -> int:
    """Number of vertices in the graph ball B(o, m), minus one.

    Raises OverflowError when the value does not fit the signed 128-bit
    index width.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return 0
    q = params.q
    value = (q ** (m + 1) + q**m - q - 1) // (q - 1)
    if value > _INDEX_LIMIT:
        raise OverflowError(f"cumulative_count({m}) exceeds {INDEX_BITS}-bit index width for q={q}")
    return value


def level_range(params: TreeParams, m: int) -> range:
    """Labels of the vertices at depth ``m``."""
    if m == 0:
        return range(0, 1)
    return range(cumulative_count(params, m - 1) + 1, cumulative_count(params, m) + 1)


def depth(params: TreeParams, k: int) -> int:
    _check_vertex(k)
    return _depth(params.q, k)


@lru_cache(maxsize=1 << 16)
def _depth(q: int, k: int) -> int:
    # cumulative_count raises OverflowError before this can run away
    params = TreeParams(q)
    m = 0
    while k > cumulative_count(params, m):
        m += 1
    return m


def parent(params: TreeParams, k: int) -> int:
    _check_vertex(k)
    if k == 0:
        raise ValueError("origin has no predecessor")
    if k <= params.q + 1:
        return 0
    return (k - 2) // params.q


def children(params: TreeParams, k: int) -> list[int]:
    _check_vertex(k)
    q = params.q
    if k == 0:
        return list(range(1, q + 2))
    first = q * k + 2
    if first + q - 1 > _INDEX_LIMIT:
        raise OverflowError("children labels exceed the index width")
    return list(range(first, first + q))


def iterated_parent(params: TreeParams, k: int, ell: int) -> int:
    if ell < 0:
        raise ValueError("power must be nonnegative")
    if ell > depth(params, k):
        raise ValueError("power exceeds depth")
    for _ in range(ell):
        k = parent(params, k)
    return k


def ancestor_at_depth(params: TreeParams, k: int, m: int) -> int:
    """The ancestor of ``k`` lying at depth ``m`` (``k`` itself if m == depth)."""
    return iterated_parent(params, k, depth(params, k) - m)


def ancestors(params: TreeParams, k: int) -> Iterator[int]:
    """``k``, its parent, ..., up to and including the origin."""
    yield k
    while k != 0:
        k = parent(params, k)
        yield k


def in_sector(params: TreeParams, y: int, v: int) -> bool:
    """Whether ``y`` belongs to the sector rooted at ``v``."""
    dv, dy = depth(params, v), depth(params, y)
    if dy < dv:
        return False
    return iterated_parent(params, y, dy - dv) == v


def confluent(params: TreeParams, x: int, y: int) -> int:
    dx, dy = depth(params, x), depth(params, y)
    if dx > dy:
        x = iterated_parent(params, x, dx - dy)
    elif dy > dx:
        y = iterated_parent(params, y, dy - dx)
    while x != y:
        x, y = parent(params, x), parent(params, y)
    return x


def gromov_distance(params: TreeParams, x: int, y: int) -> float:
    if x == y:
        return 0.0
    return math.exp(-depth(params, confluent(params, x, y)))


def _ball_root_depth(r: float) -> int:
    """Smallest d >= 0 with e^{-d} < r, for 0 < r <= 1."""
    t = -math.log(r)
    n = round(t)
    if abs(t - n) <= LOG_EXACTNESS:
        return n + 1
    return math.floor(t) + 1


def gromov_ball(params: TreeParams, x: int, r: float) -> GromovBall:
    """The open ball {y : rho(x, y) < r}, resolved to a singleton, sector or X."""
    if not r > 0:
        raise ValueError("radius must be positive")
    _check_vertex(x)
    if r > 1:
        return GromovBall(x, r, DyadicSet.whole())
    dx = depth(params, x)
    d = _ball_root_depth(r)
    if d > dx:
        return GromovBall(x, r, DyadicSet.singleton(x))
    return GromovBall(x, r, DyadicSet.sector(iterated_parent(params, x, dx - d)))


def distinct_balls(params: TreeParams, x: int) -> list[GromovBall]:
    """All |x|+2 distinct balls centred at ``x``, smallest first.

    Each entry carries the largest radius producing it (``inf`` for X).
    """
    dx = depth(params, x)
    out = [GromovBall(x, math.exp(-dx), DyadicSet.singleton(x))]
    for d in range(dx, 0, -1):
        out.append(GromovBall(x, math.exp(1 - d), DyadicSet.sector(iterated_parent(params, x, dx - d))))
    out.append(GromovBall(x, math.inf, DyadicSet.whole()))
    return out


def vertices_to_depth(params: TreeParams, m: int) -> range:
    return range(cumulative_count(params, m) + 1)
