"""The radial measures q^{-alpha|x|}, exact region arithmetic and doubling checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .tree import (
    DyadicSet,
    TreeParams,
    ancestors,
    children,
    depth,
    gromov_ball,
    parent,
    vertices_to_depth,
)


@dataclass(frozen=True)
class MeasureParams:
    tree: TreeParams
    alpha: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1 for a finite measure, got {self.alpha}")

    @classmethod
    def of(cls, q: int, alpha: float, max_depth: int = 32) -> "MeasureParams":
        return cls(TreeParams(q, max_depth), float(alpha))

    @property
    def q(self) -> int:
        return self.tree.q


# closed forms agree with their identities to this relative precision
RATIO_RTOL = 1e-12


def depth_mass(mp: MeasureParams, n: int) -> float:
    """Mass of a single vertex at depth ``n``."""
    return float(mp.q) ** (-mp.alpha * n)


def sector_factor(mp: MeasureParams) -> float:
    """Ratio mu(T_x)/mu({x}) = 1/(1 - q^{1-alpha}), the same for every x != o."""
    return 1.0 / (1.0 - float(mp.q) ** (1.0 - mp.alpha))


def point_mass(mp: MeasureParams, x: int) -> float:
    return depth_mass(mp, depth(mp.tree, x))


def sector_mass_at_depth(mp: MeasureParams, n: int) -> float:
    if n == 0:
        return total_mass(mp)
    return depth_mass(mp, n) * sector_factor(mp)


def sector_mass(mp: MeasureParams, v: int) -> float:
    if v == 0:
        raise ValueError("the sector of the origin is X; use total_mass")
    return sector_mass_at_depth(mp, depth(mp.tree, v))


def total_mass(mp: MeasureParams) -> float:
    return (1.0 + float(mp.q) ** (-mp.alpha)) * sector_factor(mp)


def dyadic_mass(mp: MeasureParams, D: DyadicSet) -> float:
    if D.is_whole:
        return total_mass(mp)
    if D.is_sector:
        return sector_mass(mp, D.vertex)
    return point_mass(mp, D.vertex)


def doubling_constant(mp: MeasureParams) -> float:
    """max{q^alpha + 1, (1 - q^{1-alpha})^{-1}}."""
    return max(float(mp.q) ** mp.alpha + 1.0, sector_factor(mp))


def origin_ratio(mp: MeasureParams) -> float:
    """mu(X)/mu({o}): the ratio for the ball pair ({o}, X) around the origin.

    This pair is not covered by ``doubling_constant`` and exceeds it when
    alpha is close to 1 (e.g. q=2, alpha=1.5).
    """
    return total_mass(mp)


def sharp_doubling_constant(mp: MeasureParams) -> float:
    """Smallest constant valid for every ball pair, the origin included."""
    return max(doubling_constant(mp), origin_ratio(mp))


# -- regions -----------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Finite disjoint union of sectors and singletons.

    ``sectors`` holds sector roots (0 stands for the whole tree).  Construct
    through :func:`make_region` to obtain the canonical form.
    """

    sectors: frozenset = field(default_factory=frozenset)
    singletons: frozenset = field(default_factory=frozenset)

    @property
    def is_empty(self) -> bool:
        return not self.sectors and not self.singletons


def _covered(params: TreeParams, v: int, roots: frozenset, strict: bool) -> bool:
    it = ancestors(params, v)
    if strict:
        next(it)
    return any(a in roots for a in it)


def make_region(params: TreeParams, sectors: Iterable[int] = (), singletons: Iterable[int] = ()) -> Region:
    """Canonicalize: drop sector roots inside other sectors and covered singletons."""
    roots = frozenset(sectors)
    roots = frozenset(v for v in roots if not _covered(params, v, roots, strict=True))
    points = frozenset(v for v in singletons if not _covered(params, v, roots, strict=False))
    return Region(roots, points)


def is_canonical(params: TreeParams, R: Region) -> bool:
    return make_region(params, R.sectors, R.singletons) == R


def region_of(D: DyadicSet) -> Region:
    if D.is_whole:
        return Region(frozenset({0}), frozenset())
    if D.is_sector:
        return Region(frozenset({D.vertex}), frozenset())
    return Region(frozenset(), frozenset({D.vertex}))


def whole_region() -> Region:
    return Region(frozenset({0}), frozenset())


def region_contains(params: TreeParams, R: Region, x: int) -> bool:
    return x in R.singletons or _covered(params, x, R.sectors, strict=False)


def region_mass(mp: MeasureParams, R: Region) -> float:
    if not is_canonical(mp.tree, R):
        raise ValueError("region not canonical")
    return math.fsum(sector_mass_at_depth(mp, depth(mp.tree, v)) for v in R.sectors) + math.fsum(
        point_mass(mp, v) for v in R.singletons
    )


def complement(params: TreeParams, R: Region) -> Region:
    """X minus R, expressed with singletons and sibling sectors along the spine."""
    if R.is_empty:
        return whole_region()
    spine = set()
    for v in R.sectors | R.singletons:
        spine.update(ancestors(params, v))
    out_sectors, out_points = [], []
    stack = [0]
    while stack:
        u = stack.pop()
        if u in R.sectors:
            continue
        if u not in R.singletons:
            out_points.append(u)
        for c in children(params, u):
            if c in spine:
                stack.append(c)
            else:
                out_sectors.append(c)
    return make_region(params, out_sectors, out_points)


def union(params: TreeParams, R1: Region, R2: Region) -> Region:
    return make_region(params, R1.sectors | R2.sectors, R1.singletons | R2.singletons)


def intersect(params: TreeParams, R1: Region, R2: Region) -> Region:
    return complement(params, union(params, complement(params, R1), complement(params, R2)))


def difference(params: TreeParams, R1: Region, R2: Region) -> Region:
    return intersect(params, R1, complement(params, R2))


def union_all(params: TreeParams, regions: Iterable[Region]) -> Region:
    sectors, points = set(), set()
    for R in regions:
        sectors |= R.sectors
        points |= R.singletons
    return make_region(params, sectors, points)


def same_set(params: TreeParams, R1: Region, R2: Region) -> bool:
    """Set equality, independent of how the parts are grouped."""
    return difference(params, R1, R2).is_empty and difference(params, R2, R1).is_empty


def disjoint(params: TreeParams, R1: Region, R2: Region) -> bool:
    return intersect(params, R1, R2).is_empty


def merge_sectors(params: TreeParams, R: Region) -> Region:
    """Explicit normalization: a singleton plus all its child sectors becomes a sector."""
    sectors, points = set(R.sectors), set(R.singletons)
    changed = True
    while changed:
        changed = False
        for v in sorted(points, reverse=True):
            kids = children(params, v)
            if all(c in sectors for c in kids):
                points.discard(v)
                sectors.difference_update(kids)
                sectors.add(v)
                changed = True
    return make_region(params, sectors, points)


# -- doubling ----------------------------------------------------------------


@dataclass
class DoublingReport:
    passed: bool
    constant: float
    worst_ratio: float
    witness: tuple[int, float] | None
    checks: int
    violations: list[tuple[int, float, float]] = field(default_factory=list)


def default_radius_grid(max_depth: int, points: int = 50, eps: float = 1e-9) -> list[float]:
    """Boundary radii e^{-n} and e^{-n}(1 +- eps), padded with log-spaced radii."""
    grid = set()
    for n in range(max_depth + 2):
        base = math.exp(-n)
        grid.update((base, base * (1 - eps), base * (1 + eps)))
    grid.update((0.6, 1.0, 1.5))
    extra = points - len(grid)
    if extra > 0:
        grid.update(np.geomspace(math.exp(-max_depth - 1), 2.0, extra + 2)[1:-1].tolist())
    return sorted(grid)


def verify_doubling(
    mp: MeasureParams,
    max_depth: int,
    radius_grid: Sequence[float] | None = None,
    constant: float | None = None,
) -> DoublingReport:
    """Check mu(B(x,2r)) <= C mu(B(x,r)) for all |x| <= max_depth and r in the grid.

    ``constant`` defaults to :func:`doubling_constant`.
    """
    grid = default_radius_grid(max_depth) if radius_grid is None else list(radius_grid)
    C = doubling_constant(mp) if constant is None else constant
    worst, witness, checks = 0.0, None, 0
    violations = []
    for x in vertices_to_depth(mp.tree, max_depth):
        for r in grid:
            small = dyadic_mass(mp, gromov_ball(mp.tree, x, r).resolved)
            big = dyadic_mass(mp, gromov_ball(mp.tree, x, 2 * r).resolved)
            ratio = big / small
            checks += 1
            if ratio > worst:
                worst, witness = ratio, (x, r)
            if ratio > C * (1 + RATIO_RTOL):
                violations.append((x, r, ratio))
    return DoublingReport(not violations, C, worst, witness, checks, violations)


# -- reference measures ------------------------------------------------------


@dataclass(frozen=True)
class ReferenceMeasure:
    """Radial measure sigma_0 >= ... >= sigma_N, continued by sigma_{n+1} = t sigma_n."""

    radial_values: tuple
    tail_ratio: float

    def __post_init__(self):
        vals = tuple(float(v) for v in self.radial_values)
        object.__setattr__(self, "radial_values", vals)
        if not vals:
            raise ValueError("at least one radial value is required")
        if any(not v > 0 for v in vals):
            raise ValueError("radial values must be positive")
        if any(b > a for a, b in zip(vals, vals[1:])):
            raise ValueError("radial values must be nonincreasing")
        if not 0 < self.tail_ratio < 1:
            raise ValueError("tail ratio must lie in (0, 1)")

    @classmethod
    def exponential(cls, q: int, alpha: float, head: int = 1) -> "ReferenceMeasure":
        return cls(tuple(float(q) ** (-alpha * n) for n in range(head)), float(q) ** (-alpha))

    def check_finite(self, q: int) -> None:
        if not self.tail_ratio < 1.0 / q:
            raise ValueError(f"tail ratio must be below 1/q = {1.0 / q} for a finite measure")

    @property
    def head_length(self) -> int:
        return len(self.radial_values)

    def value(self, n: int) -> float:
        N = self.head_length - 1
        if n <= N:
            return self.radial_values[n]
        return self.radial_values[N] * self.tail_ratio ** (n - N)

    def sector_mass(self, q: int, n: int) -> float:
        """sigma(T_v) for |v| = n >= 1; geometric tail in closed form."""
        self.check_finite(q)
        N = self.head_length - 1
        tail = 1.0 / (1.0 - q * self.tail_ratio)
        if n >= N:
            return self.value(n) * tail
        head = math.fsum(q**ell * self.radial_values[n + ell] for ell in range(N - n))
        return head + q ** (N - n) * self.radial_values[N] * tail


def optimality_ratio_witness(sigma: ReferenceMeasure, q: int) -> tuple[float, int]:
    """sup over v != o of sigma(T_v)/sigma({v}), with the first depth attaining it."""
    sigma.check_finite(q)
    N = sigma.head_length - 1
    best, where = 1.0 / (1.0 - q * sigma.tail_ratio), max(N, 1)
    for n in range(max(N - 1, 0), 0, -1):
        ratio = sigma.sector_mass(q, n) / sigma.value(n)
        if ratio >= best:
            best, where = ratio, n
    return best, where


def optimality_ratio(sigma: ReferenceMeasure, q: int) -> float:
    return optimality_ratio_witness(sigma, q)[0]


def parent_ratio_witness(sigma: ReferenceMeasure) -> tuple[float, int]:
    """sup_n sigma_n / sigma_{n+1}, with the first n attaining it."""
    vals = sigma.radial_values
    best, where = 1.0 / sigma.tail_ratio, len(vals) - 1
    for n in range(len(vals) - 2, -1, -1):
        ratio = vals[n] / vals[n + 1]
        if ratio >= best:
            best, where = ratio, n
    return best, where


def parent_ratio(sigma: ReferenceMeasure) -> float:
    return parent_ratio_witness(sigma)[0]


@dataclass
class Classification:
    optimal: bool
    parent_bounded: bool
    optimality_ratio: float
    optimality_depth: int
    parent_ratio: float
    parent_depth: int


def classify_reference_measure(
    sigma: ReferenceMeasure,
    q: int,
    optimality_bound: float = 1e6,
    parent_bound: float = math.inf,
) -> Classification:
    """Report both sups and threshold them.

    Both sups are finite for any valid measure; the bounds turn "finite" into a
    practical flag.  ``parent_bound`` defaults to plain finiteness.
    """
    opt, opt_n = optimality_ratio_witness(sigma, q)
    par, par_n = parent_ratio_witness(sigma)
    return Classification(opt <= optimality_bound, par <= parent_bound, opt, opt_n, par, par_n)


def parent_of_vertex_ratio(mp: MeasureParams, x: int) -> float:
    """mu(T_{p(x)})/mu(T_x) for |x| >= 1 (X in place of T_o)."""
    return sector_mass_at_depth(mp, depth(mp.tree, parent(mp.tree, x))) / sector_mass(mp, x)
