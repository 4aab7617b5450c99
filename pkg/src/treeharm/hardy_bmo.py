"""Atoms, martingale-difference atomic decompositions, BMO norms and the atom pairing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .funcspace import (
    TailConstantFunction,
    _indicator_mask,
    cell_mask,
    cell_weights,
    common_depth,
    integral,
    level_slices,
    lp_norm,
    subtree_averages,
    subtree_oscillations,
)
from .measure import MeasureParams, dyadic_mass, total_mass
from .tree import DyadicSet, cumulative_count

ATOM_TOL = 1e-10


@dataclass(frozen=True)
class Atom:
    """A (1,p)-atom: the constant mu(X)^{-1}, or a mean-zero function on a dyadic set."""

    kind: str
    p: float = math.inf
    D: DyadicSet | None = None
    values: TailConstantFunction | None = None

    CONSTANT = "constant"
    STANDARD = "standard"

    @classmethod
    def constant(cls, p: float = math.inf) -> "Atom":
        return cls(cls.CONSTANT, p)

    @classmethod
    def standard(cls, D: DyadicSet, values: TailConstantFunction, p: float = math.inf) -> "Atom":
        return cls(cls.STANDARD, p, D, values)

    def function(self, mp: MeasureParams) -> TailConstantFunction:
        if self.kind == self.CONSTANT:
            return TailConstantFunction.constant(mp.tree, 1.0 / total_mass(mp))
        return self.values


@dataclass
class AtomCheck:
    valid: bool
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.valid


def _support_ok(f: TailConstantFunction, D: DyadicSet) -> bool:
    mask = cell_mask(f, D)
    if mask is None:
        # D sits inside one cell of f: only the zero function is supported in D
        return D.is_whole or not np.any(f.values)
    return not np.any(f.values[~mask])


def validate_atom(mp: MeasureParams, a: Atom, tol: float = ATOM_TOL) -> AtomCheck:
    diag = []
    if not (a.p > 1):
        diag.append(f"exponent p={a.p} must exceed 1")
    if a.kind == Atom.CONSTANT:
        return AtomCheck(not diag, diag)
    if a.kind != Atom.STANDARD or a.D is None or a.values is None:
        return AtomCheck(False, diag + ["standard atom needs a dyadic set and values"])
    f, D = a.values, a.D
    if not _support_ok(f, D):
        diag.append(f"support not contained in {D}")
    mD = dyadic_mass(mp, D)
    if math.isinf(a.p):
        size, bound = lp_norm(mp, f, math.inf), 1.0 / mD
    else:
        size, bound = lp_norm(mp, f, a.p), mD ** (1.0 / a.p - 1.0)
    if size > bound * (1 + tol):
        diag.append(f"size {size!r} exceeds {bound!r}")
    mean = abs(integral(mp, f))
    if mean > tol * max(1.0, lp_norm(mp, f, 1)):
        diag.append(f"mean {mean!r} does not vanish")
    return AtomCheck(not diag, diag)


@dataclass
class AtomicDecomposition:
    terms: list[tuple[complex, Atom]]

    def coefficient_sum(self) -> float:
        return math.fsum(abs(c) for c, _ in self.terms)

    def reconstruct(self, mp: MeasureParams, N: int) -> TailConstantFunction:
        total = TailConstantFunction.zeros(mp.tree, N)
        for c, a in self.terms:
            total = total + c * a.function(mp)
        return total


def atomic_decompose(mp: MeasureParams, f: TailConstantFunction) -> AtomicDecomposition:
    """Martingale differences along the dyadic scales, rescaled to (1,inf)-atoms.

    f = (integral f) mu(X)^{-1} + sum_{m=1}^{N} (E_m f - E_{m-1} f), and the
    m-th difference splits into mean-zero pieces on the scale-(m-1) sets.
    Only sectors (and X) contribute; on a singleton the difference is 0.
    """
    q, N = mp.q, f.boundary_depth
    terms: list[tuple[complex, Atom]] = []
    c0 = integral(mp, f)
    if c0 != 0:
        terms.append((c0 * 1.0, Atom.constant()))
    if N == 0:
        return AtomicDecomposition(terms)
    means = subtree_averages(mp, f.values, N)
    sl = level_slices(q, N)
    tree = f.tree
    # rounding noise from the averages would otherwise become full-size atoms
    floor = 1e-13 * float(np.abs(f.values).max())
    for m in range(1, N + 1):
        # each depth-(m-1) vertex v: E_m - E_{m-1} on T_v
        for v in range(sl[m - 1].start, sl[m - 1].stop):
            D = DyadicSet.sector(v)
            kids = _children_block(q, m - 1, v)
            piece = np.zeros(cumulative_count(tree, m) + 1, dtype=complex)
            piece[v] = f.values[v] - means[v]
            piece[kids] = means[kids] - means[v]
            scale = np.abs(piece).max()
            if scale <= floor:
                continue
            coef = scale * dyadic_mass(mp, D)
            atom = Atom.standard(D, TailConstantFunction(tree, m, piece / coef))
            terms.append((complex(coef), atom))
    return AtomicDecomposition(terms)


def _children_block(q: int, d: int, v: int) -> slice:
    if d == 0:
        return slice(1, q + 2)
    return slice(q * v + 2, q * v + q + 2)


def h1_norm_upper(mp: MeasureParams, f: TailConstantFunction) -> float:
    """Coefficient sum of the martingale decomposition; an upper bound for the H^1 norm."""
    return atomic_decompose(mp, f).coefficient_sum()


def bmo_oscillation(mp: MeasureParams, f: TailConstantFunction, r: float = 1.0) -> tuple[float, DyadicSet]:
    """sup over dyadic D of the r-mean oscillation, and a set attaining it."""
    if r < 1:
        raise ValueError("r must be at least 1")
    osc = subtree_oscillations(mp, f, r)
    k = int(np.argmax(osc))
    return float(osc[k]), DyadicSet.sector(k)


def bmo_norm(mp: MeasureParams, f: TailConstantFunction, r: float = 1.0) -> float:
    """sup_D r-oscillation + |sum f mu|.

    Singletons and sectors at or below the boundary have zero oscillation, so
    the sup runs over X and the sectors rooted above depth N.
    """
    return bmo_oscillation(mp, f, r)[0] + abs(integral(mp, f))


@dataclass
class InboxingReport:
    passed: bool
    bmo1: float
    bmo_r: float
    r: float


def inboxing_check(mp: MeasureParams, f: TailConstantFunction, r: float) -> InboxingReport:
    if not r > 1:
        raise ValueError("r must exceed 1")
    b1, br = bmo_norm(mp, f, 1.0), bmo_norm(mp, f, r)
    return InboxingReport(b1 <= br * (1 + 1e-12) + 1e-15, b1, br, r)


def duality_pairing(mp: MeasureParams, f: TailConstantFunction, a: Atom) -> complex:
    """sum_x f(x) a(x) mu(x)."""
    check = validate_atom(mp, a)
    if not check:
        raise ValueError("not an atom: " + "; ".join(check.diagnostics))
    g, h = common_depth(f, a.function(mp))
    return complex(np.dot(g.values * h.values, cell_weights(mp.q, mp.alpha, g.boundary_depth)))


def conjugate_exponent(p: float) -> float:
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def random_atom(
    mp: MeasureParams,
    N: int,
    rng: np.random.Generator,
    p: float = math.inf,
    complex_values: bool = False,
) -> Atom:
    """A random standard (1,p)-atom on a random non-singleton dyadic set above depth N."""
    tree = mp.tree
    if N < 1:
        raise ValueError("standard atoms need boundary depth >= 1")
    roots = cumulative_count(tree, N - 1) + 1
    v = int(rng.integers(roots))
    D = DyadicSet.sector(v)
    mask = _indicator_mask(tree, N, D)
    w = cell_weights(mp.q, mp.alpha, N)
    vals = np.zeros(len(mask), dtype=complex)
    vals[mask] = rng.uniform(-1, 1, mask.sum())
    if complex_values:
        vals[mask] += 1j * rng.uniform(-1, 1, mask.sum())
    vals[mask] -= np.dot(vals[mask], w[mask]) / w[mask].sum()
    f = TailConstantFunction(tree, N, vals)
    mD = dyadic_mass(mp, D)
    if math.isinf(p):
        size, bound = lp_norm(mp, f, math.inf), 1.0 / mD
    else:
        size, bound = lp_norm(mp, f, p), mD ** (1.0 / p - 1.0)
    if size == 0:
        return random_atom(mp, N, rng, p, complex_values)
    f = f * (bound / size * rng.uniform(0.5, 1.0))
    return Atom.standard(D, f, p)
