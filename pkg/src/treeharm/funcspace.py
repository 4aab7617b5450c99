"""Tail-constant functions and their exact integrals.

A :class:`TailConstantFunction` with boundary depth N stores one complex value
per vertex of the graph ball B(o, N); every vertex deeper than N inherits the
value of its ancestor at depth N.  Such a function is measurable with respect
to the scale-N dyadic partition, so the "cells" of the representation are the
singletons above depth N and the sectors at depth N.  Every sum over the
infinite tree becomes a weighted sum over cells.

Because labels are breadth-first, the vertices at each depth form a contiguous
slice, and the descendants of the depth-d vertices at depth e form equal
consecutive blocks of that slice.  All operations below are vectorized over
those blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .measure import MeasureParams, Region, dyadic_mass, make_region, sector_mass_at_depth
from .tree import DyadicSet, TreeParams, ancestor_at_depth, cumulative_count, depth, level_range


@lru_cache(maxsize=128)
def level_slices(q: int, N: int) -> tuple[slice, ...]:
    params = TreeParams(q)
    return tuple(slice(r.start, r.stop) for r in (level_range(params, d) for d in range(N + 1)))


@lru_cache(maxsize=128)
def depth_array(q: int, N: int) -> np.ndarray:
    out = np.empty(cumulative_count(TreeParams(q), N) + 1, dtype=np.int64)
    for d, sl in enumerate(level_slices(q, N)):
        out[sl] = d
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def cell_weights(q: int, alpha: float, N: int) -> np.ndarray:
    """Measure of each representation cell: mu({x}) above depth N, mu(T_x) at depth N."""
    mp = MeasureParams.of(q, alpha)
    d = depth_array(q, N)
    w = float(q) ** (-alpha * d.astype(float))
    sl = level_slices(q, N)[N]
    w[sl] = sector_mass_at_depth(mp, N)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=128)
def sector_weights(q: int, alpha: float, N: int) -> np.ndarray:
    """mu(T_v) for every |v| <= N, with mu(X) at the origin."""
    mp = MeasureParams.of(q, alpha)
    out = np.array([sector_mass_at_depth(mp, int(d)) for d in depth_array(q, N)])
    out.setflags(write=False)
    return out


def _weights(mp: MeasureParams, N: int) -> np.ndarray:
    return cell_weights(mp.q, mp.alpha, N)


def branching(q: int, d: int) -> int:
    """Number of children of a vertex at depth d."""
    return q + 1 if d == 0 else q


def block_view(arr: np.ndarray, q: int, N: int, d: int, e: int) -> np.ndarray:
    """Level-e entries grouped by their depth-d ancestor: shape (#level d, -1)."""
    sl = level_slices(q, N)
    n_d = sl[d].stop - sl[d].start
    return arr[sl[e]].reshape(n_d, -1)


def subtree_sums(arr: np.ndarray, q: int, N: int) -> np.ndarray:
    """S[v] = sum of arr over the cells inside T_v, for every |v| <= N."""
    S = np.array(arr, copy=True)
    sl = level_slices(q, N)
    for d in range(N - 1, -1, -1):
        S[sl[d]] += block_view(S, q, N, d, d + 1).sum(axis=1)
    return S


def expand_down(level_values: np.ndarray, q: int, d: int) -> np.ndarray:
    """Repeat depth-d values onto depth d+1 (children are consecutive)."""
    return np.repeat(level_values, branching(q, d))


class TailConstantFunction:
    """Complex function on the tree, constant on each sector below its boundary depth."""

    __slots__ = ("tree", "boundary_depth", "values")

    def __init__(self, tree: TreeParams, boundary_depth: int, values):
        if boundary_depth < 0:
            raise ValueError("boundary depth must be nonnegative")
        vals = np.array(values, dtype=complex)
        expected = cumulative_count(tree, boundary_depth) + 1
        if vals.shape != (expected,):
            raise ValueError(f"expected {expected} values for boundary depth {boundary_depth}, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "tree", tree)
        object.__setattr__(self, "boundary_depth", boundary_depth)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("TailConstantFunction is immutable")

    def __eq__(self, other):
        if not isinstance(other, TailConstantFunction):
            return NotImplemented
        return (
            self.tree.q == other.tree.q
            and self.boundary_depth == other.boundary_depth
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"TailConstantFunction(q={self.tree.q}, N={self.boundary_depth}, values={self.values!r})"

    @property
    def q(self) -> int:
        return self.tree.q

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    # constructors

    @classmethod
    def zeros(cls, tree: TreeParams, N: int = 0) -> "TailConstantFunction":
        return cls(tree, N, np.zeros(cumulative_count(tree, N) + 1, dtype=complex))

    @classmethod
    def constant(cls, tree: TreeParams, c: complex, N: int = 0) -> "TailConstantFunction":
        return cls(tree, N, np.full(cumulative_count(tree, N) + 1, c, dtype=complex))

    @classmethod
    def from_support(cls, tree: TreeParams, support: Mapping[int, complex]) -> "TailConstantFunction":
        """Finitely supported function; boundary depth is one below the deepest support vertex."""
        N = max((depth(tree, k) for k in support), default=-1) + 1
        vals = np.zeros(cumulative_count(tree, N) + 1, dtype=complex)
        for k, v in support.items():
            vals[k] = v
        return cls(tree, N, vals)

    @classmethod
    def from_vertex_function(cls, tree: TreeParams, N: int, fn: Callable[[int], complex]) -> "TailConstantFunction":
        return cls(tree, N, [fn(k) for k in range(cumulative_count(tree, N) + 1)])

    @classmethod
    def indicator(cls, tree: TreeParams, D: DyadicSet, N: int | None = None) -> "TailConstantFunction":
        if D.is_whole:
            return cls.constant(tree, 1.0, N or 0)
        need = depth(tree, D.vertex) + (1 if D.is_singleton else 0)
        N = need if N is None else max(N, need)
        f = cls.zeros(tree, N)
        return f.with_values(_indicator_mask(tree, N, D).astype(complex))

    # transforms

    def with_values(self, values) -> "TailConstantFunction":
        return TailConstantFunction(self.tree, self.boundary_depth, values)

    def lift(self, N: int) -> "TailConstantFunction":
        """Same function re-expressed with a deeper boundary."""
        if N < self.boundary_depth:
            raise ValueError("can only push the boundary down")
        vals = self.values
        q = self.q
        for d in range(self.boundary_depth, N):
            last = vals[level_slices(q, d + 1)[d]]
            vals = np.concatenate([vals, expand_down(last, q, d)])
        return TailConstantFunction(self.tree, N, vals)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "TailConstantFunction":
        return self.with_values(fn(self.values))

    def __add__(self, other):
        if isinstance(other, TailConstantFunction):
            a, b = common_depth(self, other)
            return a.with_values(a.values + b.values)
        return self.with_values(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, TailConstantFunction):
            a, b = common_depth(self, other)
            return a.with_values(a.values - b.values)
        return self.with_values(self.values - other)

    def __neg__(self):
        return self.with_values(-self.values)

    def __mul__(self, other):
        if isinstance(other, TailConstantFunction):
            a, b = common_depth(self, other)
            return a.with_values(a.values * b.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.with_values(self.values / c)

    def abs(self) -> "TailConstantFunction":
        return self.with_values(np.abs(self.values))

    def conj(self) -> "TailConstantFunction":
        return self.with_values(np.conj(self.values))


def common_depth(*fs: TailConstantFunction) -> list[TailConstantFunction]:
    N = max(f.boundary_depth for f in fs)
    if len({f.q for f in fs}) != 1:
        raise ValueError("functions live on trees with different q")
    return [f.lift(N) for f in fs]


def _indicator_mask(tree: TreeParams, N: int, D: DyadicSet) -> np.ndarray:
    """Boolean mask of the cells contained in D (D must be a union of scale-N cells)."""
    q = tree.q
    mask = np.zeros(cumulative_count(tree, N) + 1, dtype=bool)
    if D.is_whole:
        mask[:] = True
        return mask
    v = D.vertex
    if D.is_singleton:
        mask[v] = True
        return mask
    dv = depth(tree, v)
    lo = hi = v
    for e in range(dv, N + 1):
        mask[lo : hi + 1] = True
        if e < N:
            lo, hi = q * lo + 2, q * hi + q + 1
    return mask


def cell_mask(f: TailConstantFunction, D: DyadicSet) -> np.ndarray | None:
    """Mask of the cells of f inside D, or None when D lies inside a single cell."""
    N = f.boundary_depth
    if D.is_whole:
        return None if N == 0 else _indicator_mask(f.tree, N, D)
    if depth(f.tree, D.vertex) >= N:
        return None
    return _indicator_mask(f.tree, N, D)


def evaluate(f: TailConstantFunction, x: int) -> complex:
    d = depth(f.tree, x)
    if d > f.boundary_depth:
        x = ancestor_at_depth(f.tree, x, f.boundary_depth)
    return complex(f.values[x])


def integral(mp: MeasureParams, f: TailConstantFunction) -> complex:
    """sum_x f(x) mu(x) over the whole tree."""
    return complex(np.dot(f.values, _weights(mp, f.boundary_depth)))


def lp_norm(mp: MeasureParams, f: TailConstantFunction, p: float) -> float:
    if p < 1:
        raise ValueError("p must be at least 1")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    w = _weights(mp, f.boundary_depth)
    return float(np.dot(a**p, w) ** (1.0 / p))


def average_on(mp: MeasureParams, f: TailConstantFunction, D: DyadicSet) -> complex:
    mask = cell_mask(f, D)
    if mask is None:
        return evaluate(f, D.vertex)
    w = _weights(mp, f.boundary_depth)
    return complex(np.dot(f.values[mask], w[mask]) / dyadic_mass(mp, D))


def oscillation_on(mp: MeasureParams, f: TailConstantFunction, D: DyadicSet, r: float = 1.0) -> float:
    """((1/mu(D)) sum_{x in D} |f(x) - f_D|^r mu(x))^{1/r}."""
    mask = cell_mask(f, D)
    if mask is None:
        return 0.0
    w = _weights(mp, f.boundary_depth)
    vals, ww = f.values[mask], w[mask]
    mean = np.dot(vals, ww) / ww.sum()
    return float((np.dot(np.abs(vals - mean) ** r, ww) / ww.sum()) ** (1.0 / r))


def subtree_averages(mp: MeasureParams, values: np.ndarray, N: int) -> np.ndarray:
    """Average of the cell values over T_v for every |v| <= N (over X at the origin)."""
    w = _weights(mp, N)
    return subtree_sums(values * w, mp.q, N) / sector_weights(mp.q, mp.alpha, N)


def subtree_oscillations(mp: MeasureParams, f: TailConstantFunction, r: float = 1.0) -> np.ndarray:
    """r-mean oscillation of f over T_v (X at the origin) for every |v| <= N.

    Zero for |v| = N, where f is constant on T_v.
    """
    q, N = mp.q, f.boundary_depth
    w = _weights(mp, N)
    means = subtree_averages(mp, f.values, N)
    sw = sector_weights(mp.q, mp.alpha, N)
    out = np.zeros(len(f.values))
    sl = level_slices(q, N)
    for d in range(N):
        m = means[sl[d]][:, None]
        acc = np.zeros(sl[d].stop - sl[d].start)
        for e in range(d, N + 1):
            vals = block_view(f.values, q, N, d, e)
            ww = block_view(w, q, N, d, e)
            acc += (np.abs(vals - m) ** r * ww).sum(axis=1)
        out[sl[d]] = (acc / sw[sl[d]]) ** (1.0 / r)
    return out


@dataclass(frozen=True)
class LevelReport:
    region: Region
    mass: float


_COMPARATORS = {
    ">": np.greater,
    ">=": np.greater_equal,
    "<": np.less,
    "<=": np.less_equal,
}


def level_mask(g: TailConstantFunction, lam: float, comparator: str = ">") -> np.ndarray:
    if not g.is_real:
        raise ValueError("level sets need real values")
    try:
        op = _COMPARATORS[comparator]
    except KeyError:
        raise ValueError(f"comparator must be one of {sorted(_COMPARATORS)}") from None
    return op(g.values.real, lam)


def mask_region(tree: TreeParams, N: int, mask: np.ndarray) -> Region:
    """Region made of the selected cells: singletons above depth N, sectors at depth N."""
    idx = np.flatnonzero(mask)
    boundary_start = level_slices(tree.q, N)[N].start
    sectors = [int(k) for k in idx if k >= boundary_start]
    points = [int(k) for k in idx if k < boundary_start]
    return make_region(tree, sectors, points)


def mask_mass(mp: MeasureParams, N: int, mask: np.ndarray) -> float:
    return float(math.fsum(_weights(mp, N)[mask]))


def level_region(mp: MeasureParams, g: TailConstantFunction, lam: float, comparator: str = ">") -> LevelReport:
    mask = level_mask(g, lam, comparator)
    return LevelReport(mask_region(mp.tree, g.boundary_depth, mask), mask_mass(mp, g.boundary_depth, mask))


def random_function(
    tree: TreeParams,
    N: int,
    rng: np.random.Generator,
    complex_values: bool = False,
    density: float = 1.0,
    scale: float = 1.0,
) -> TailConstantFunction:
    """Random tail-constant function; ``density`` is the fraction of nonzero cells."""
    n = cumulative_count(tree, N) + 1
    vals = rng.uniform(-scale, scale, n).astype(complex)
    if complex_values:
        vals = vals + 1j * rng.uniform(-scale, scale, n)
    if density < 1.0:
        vals[rng.random(n) >= density] = 0
    return TailConstantFunction(tree, N, vals)
