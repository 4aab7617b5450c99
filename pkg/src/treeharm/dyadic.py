"""The dyadic family: nested partitions of the tree into singletons and sectors.

At scale 0 the family is {X}.  At scale m >= 1 it consists of the singletons
{v} with |v| <= m-1 and the sectors T_v with |v| = m, listed in label order,
so that the k-th member of scale m is built from vertex k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .measure import RATIO_RTOL, MeasureParams, doubling_constant, dyadic_mass
from .tree import (
    DyadicSet,
    TreeParams,
    ancestors,
    children,
    cumulative_count,
    depth,
    parent,
)

__all__ = [
    "DyadicSet",
    "partition_at_scale",
    "refine",
    "dyadic_parent",
    "containing_sets",
    "scales_of",
    "is_member",
    "dyadic_contains",
    "measure_ratio_check",
]


def partition_at_scale(params: TreeParams, m: int) -> Iterator[DyadicSet]:
    """Lazily yield the I_m + 1 members of the scale-m partition."""
    if m < 0:
        raise ValueError("scale must be nonnegative")
    if m == 0:
        yield DyadicSet.whole()
        return
    inner = cumulative_count(params, m - 1)
    for k in range(inner + 1):
        yield DyadicSet.singleton(k)
    for k in range(inner + 1, cumulative_count(params, m) + 1):
        yield DyadicSet.sector(k)


def refine(params: TreeParams, D: DyadicSet) -> list[DyadicSet]:
    if D.is_singleton:
        return [D]
    return [DyadicSet.singleton(D.vertex)] + [DyadicSet.sector(c) for c in children(params, D.vertex)]


def scales_of(params: TreeParams, D: DyadicSet) -> tuple[int, int | None]:
    """Inclusive scale range (first, last) at which D belongs to the family; last None = forever."""
    if D.is_whole:
        return 0, 0
    d = depth(params, D.vertex)
    if D.is_sector:
        return d, d
    return d + 1, None


def is_member(params: TreeParams, D: DyadicSet, m: int) -> bool:
    lo, hi = scales_of(params, D)
    return m >= lo and (hi is None or m <= hi)


def dyadic_parent(params: TreeParams, D: DyadicSet, m: int) -> DyadicSet:
    """The member of scale m-1 containing D, a member of scale m."""
    if m < 1:
        raise ValueError("scale mismatch: scale 0 has no dyadic parent")
    if not is_member(params, D, m):
        raise ValueError(f"scale mismatch: {D} is not a member of scale {m}")
    v = D.vertex
    if D.is_sector:
        return DyadicSet.sector(parent(params, v))
    if m == depth(params, v) + 1:
        return DyadicSet.sector(v)
    return D


def containing_sets(params: TreeParams, x: int) -> list[DyadicSet]:
    """Every dyadic set containing x, smallest first: {x}, T_x, ..., X."""
    out = [DyadicSet.singleton(x)]
    out.extend(DyadicSet.sector(a) for a in ancestors(params, x))
    return out


def dyadic_contains(params: TreeParams, outer: DyadicSet, inner: DyadicSet) -> bool:
    if outer.is_whole:
        return True
    if outer.is_singleton:
        return inner == outer
    v, w = outer.vertex, inner.vertex
    if inner.is_whole:
        return False
    return v in ancestors(params, w)


@dataclass
class RatioReport:
    passed: bool
    constant: float
    max_ratio: float
    witness: tuple[DyadicSet, int] | None
    checks: int
    violations: list[tuple[DyadicSet, int, float]] = field(default_factory=list)


def measure_ratio_check(mp: MeasureParams, max_depth: int, constant: float | None = None) -> RatioReport:
    """mu(D) <= mu(parent) <= C mu(D) for every member of every scale 1..max_depth."""
    C = doubling_constant(mp) if constant is None else constant
    worst, witness, checks = 0.0, None, 0
    violations = []
    for m in range(1, max_depth + 1):
        for D in partition_at_scale(mp.tree, m):
            small = dyadic_mass(mp, D)
            big = dyadic_mass(mp, dyadic_parent(mp.tree, D, m))
            ratio = big / small
            checks += 1
            if ratio > worst:
                worst, witness = ratio, (D, m)
            if small > big or big > C * small * (1 + RATIO_RTOL):
                violations.append((D, m, ratio))
    return RatioReport(not violations, C, worst, witness, checks, violations)
