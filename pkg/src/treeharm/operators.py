"""Finitely supported kernels K(z, x) and the integral operators they define.

    (Kf)(z) = sum_x K(z, x) f(x) q^{-alpha |x|}
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .funcspace import TailConstantFunction, depth_array, evaluate, lp_norm
from .hardy_bmo import Atom
from .measure import MeasureParams
from .tree import TreeParams, cumulative_count, depth


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FiniteKernel:
    """Kernel with finitely many nonzero entries, all at depth <= depth_bound."""

    entries: Mapping[tuple[int, int], complex]
    depth_bound: int

    @classmethod
    def from_entries(cls, tree: TreeParams, entries: Mapping[tuple[int, int], complex]) -> "FiniteKernel":
        clean = {(int(z), int(x)): complex(v) for (z, x), v in entries.items() if v != 0}
        bound = max((max(depth(tree, z), depth(tree, x)) for z, x in clean), default=0)
        return cls(clean, bound)

    @classmethod
    def from_matrix(cls, tree: TreeParams, K: np.ndarray) -> "FiniteKernel":
        zs, xs = np.nonzero(K)
        return cls.from_entries(tree, {(int(z), int(x)): K[z, x] for z, x in zip(zs, xs)})

    def matrix(self, tree: TreeParams, B: int | None = None) -> np.ndarray:
        """Dense matrix over the vertices of depth <= B (default depth_bound)."""
        B = self.depth_bound if B is None else B
        n = cumulative_count(tree, B) + 1
        K = np.zeros((n, n), dtype=complex)
        for (z, x), v in self.entries.items():
            K[z, x] = v
        return K

    def __call__(self, z: int, x: int) -> complex:
        return self.entries.get((z, x), 0j)


def adjoint(K: FiniteKernel) -> FiniteKernel:
    """K*(x, y) = conj(K(y, x))."""
    return FiniteKernel({(x, z): complex(np.conj(v)) for (z, x), v in K.entries.items()}, K.depth_bound)


def weighted_identity(mp: MeasureParams, B: int) -> FiniteKernel:
    """K(z, x) = delta_{zx} q^{alpha|x|}, so that Kf = f on depth <= B."""
    n = cumulative_count(mp.tree, B) + 1
    return FiniteKernel({(k, k): float(mp.q) ** (mp.alpha * depth(mp.tree, k)) for k in range(n)}, B)


def apply_operator(mp: MeasureParams, K: FiniteKernel, f: TailConstantFunction) -> TailConstantFunction:
    """Kf as a tail-constant function of boundary depth depth_bound + 1, zero below."""
    B = K.depth_bound
    tree = mp.tree
    n = cumulative_count(tree, B) + 1
    out = np.zeros(cumulative_count(tree, B + 1) + 1, dtype=complex)
    mu = float(mp.q) ** (-mp.alpha * depth_array(mp.q, B).astype(float))
    if f.boundary_depth >= B:
        fx = f.values[:n]
    else:
        fx = f.lift(B).values
    out[:n] = K.matrix(tree) @ (fx * mu)
    return TailConstantFunction(tree, B + 1, out)


def hormander_constant(mp: MeasureParams, K: FiniteKernel) -> float:
    """sup_{v != o} sup_{x,y in T_v} sum_{z not in T_v} |K(z,x) - K(z,y)| mu(z).

    Columns of vertices deeper than depth_bound all vanish, so one zero column
    stands in for every such x.  Sectors rooted below depth_bound + 1 contain
    only zero columns and contribute 0.
    """
    tree = mp.tree
    B = K.depth_bound
    Kd = K.matrix(tree)
    n = Kd.shape[0]
    d = depth_array(mp.q, B)
    mu = float(mp.q) ** (-mp.alpha * d.astype(float))
    best = 0.0
    for v in range(1, n):
        inside = _sector_mask(tree, B, v)
        outside = ~inside
        # columns of T_v plus one zero column for its deep vertices
        cols = np.concatenate([Kd[np.ix_(outside, inside)], np.zeros((outside.sum(), 1))], axis=1)
        diffs = np.abs(cols[:, :, None] - cols[:, None, :])
        best = max(best, float(np.tensordot(mu[outside], diffs, axes=1).max()))
    return best


def _sector_mask(tree: TreeParams, B: int, v: int) -> np.ndarray:
    q = tree.q
    mask = np.zeros(cumulative_count(tree, B) + 1, dtype=bool)
    lo = hi = v
    for _ in range(depth(tree, v), B + 1):
        mask[lo : hi + 1] = True
        lo, hi = q * lo + 2, q * hi + q + 1
    return mask


def _power_top_singular(A: np.ndarray, start: np.ndarray, tol: float, max_iter: int) -> tuple[float, bool]:
    v = start / np.linalg.norm(start)
    est = 0.0
    AH = A.conj().T
    for _ in range(max_iter):
        w = AH @ (A @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0, True
        new = float(np.sqrt(nrm))
        v = w / nrm
        if abs(new - est) <= tol * max(new, 1e-300):
            return new, True
        est = new
    return est, False


def l2_operator_norm(mp: MeasureParams, K: FiniteKernel, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of mu(z)^{1/2} K(z,x) mu(x)^{1/2}, by power iteration on A*A.

    Starts from the normalized all-ones vector; if that start is orthogonal to
    the dominant space, retries from a fixed pseudo-random start.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    Kd = K.matrix(mp.tree)
    if not np.any(Kd):
        return 0.0
    rows = np.flatnonzero(np.any(Kd != 0, axis=1))
    cols = np.flatnonzero(np.any(Kd != 0, axis=0))
    mu = float(mp.q) ** (-mp.alpha * depth_array(mp.q, K.depth_bound).astype(float))
    A = np.sqrt(mu[rows])[:, None] * Kd[np.ix_(rows, cols)] * np.sqrt(mu[cols])[None, :]
    ones = np.ones(len(cols), dtype=complex)
    value, converged = _power_top_singular(A, ones, tol, max_iter)
    if value == 0.0 or np.linalg.norm(A @ ones) < 1e-12 * np.linalg.norm(A):
        alt = np.random.default_rng(0).standard_normal(len(cols)).astype(complex)
        value, converged = _power_top_singular(A, alt, tol, max_iter)
    if not converged:
        warnings.warn(f"power iteration did not converge in {max_iter} iterations", ConvergenceWarning)
    return value


@dataclass
class ProbeReport:
    """Empirical sup over sampled inputs; not a proof of boundedness."""

    label: str
    sup: float
    witness: int | None
    reference_bound: float
    exceeds_reference: bool
    values: list[float] = field(default_factory=list)


def h1_l1_probe(
    mp: MeasureParams,
    K: FiniteKernel,
    atoms: Sequence[Atom],
    c: float = 1.0,
) -> ProbeReport:
    """sup over the given atoms of ||K a||_1, against c (||K||_{2->2} + Hormander constant)."""
    vals = [lp_norm(mp, apply_operator(mp, K, a.function(mp)), 1) for a in atoms]
    k = int(np.argmax(vals)) if vals else None
    sup = vals[k] if vals else 0.0
    ref = c * (l2_operator_norm(mp, K) + hormander_constant(mp, K))
    return ProbeReport("probe: H1 -> L1", sup, k, ref, sup > ref, vals)


@dataclass
class SweepRow:
    p: float
    sup_ratio: float
    witness: int | None


@dataclass
class SweepReport:
    """Empirical L^p ratios; ``flagged`` marks p whose sup exceeds the reference curve."""

    label: str
    rows: list[SweepRow]
    reference: float
    threshold: float
    flagged: list[float]


def lp_ratio_sweep(
    mp: MeasureParams,
    K: FiniteKernel,
    p_list: Sequence[float],
    samples: Sequence[TailConstantFunction],
    threshold: float = 1.0,
    atoms: Sequence[Atom] = (),
) -> SweepReport:
    """Empirical sup of ||Kf||_p / ||f||_p over the samples for each p."""
    for p in p_list:
        if not p > 1:
            raise ValueError("p must exceed 1")
    rows = []
    for p in p_list:
        ratios = []
        for f in samples:
            den = lp_norm(mp, f, p)
            ratios.append(lp_norm(mp, apply_operator(mp, K, f), p) / den if den > 0 else 0.0)
        k = int(np.argmax(ratios)) if ratios else None
        rows.append(SweepRow(p, ratios[k] if ratios else 0.0, k))
    ref = l2_operator_norm(mp, K)
    if atoms:
        ref = max(ref, h1_l1_probe(mp, K, atoms).sup)
    flagged = [r.p for r in rows if r.sup_ratio > ref * threshold + 1e-12 and not math.isclose(r.sup_ratio, ref)]
    return SweepReport("probe: Lp ratios", rows, ref, threshold, flagged)


def random_kernel(
    mp: MeasureParams,
    B: int,
    rng: np.random.Generator,
    density: float = 0.3,
    complex_values: bool = True,
) -> FiniteKernel:
    n = cumulative_count(mp.tree, B) + 1
    K = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if complex_values else 0)
    K = np.where(rng.random((n, n)) < density, K, 0)
    return FiniteKernel.from_matrix(mp.tree, K)


def rank_one_kernel(u: TailConstantFunction, w: TailConstantFunction, B: int) -> FiniteKernel:
    """K(z, x) = u(z) conj(w(x)) on depth <= B."""
    tree = u.tree
    n = cumulative_count(tree, B) + 1
    uz = np.array([evaluate(u, k) for k in range(n)])
    wx = np.array([evaluate(w, k) for k in range(n)])
    return FiniteKernel.from_matrix(tree, np.outer(uz, np.conj(wx)))
