"""Dyadic maximal operators, the S^{phi,eta} family and the Calderon-Zygmund decomposition.

Every operator here maps a tail-constant function of boundary depth N to one of
the same depth: below depth N all dyadic sets containing a vertex are either
inside one constant cell or shared with its depth-N ancestor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .dyadic import containing_sets, refine
from .funcspace import (
    TailConstantFunction,
    _indicator_mask,
    average_on,
    cell_mask,
    cell_weights,
    expand_down,
    integral,
    level_mask,
    level_region,
    level_slices,
    lp_norm,
    mask_mass,
    subtree_averages,
    subtree_oscillations,
)
from .measure import (
    RATIO_RTOL,
    MeasureParams,
    Region,
    complement,
    doubling_constant,
    dyadic_mass,
    make_region,
    region_of,
    same_set,
    total_mass,
    union_all,
)
from .tree import DyadicSet

# weak (1,1) constant of the dyadic maximal operator
MAXIMAL_WEAK_NORM = 1.0


class CZPreconditionError(ValueError):
    """Raised when the CZ level is not above ||f||_1 / mu(X)."""


def _ancestor_max(q: int, N: int, per_vertex: np.ndarray) -> np.ndarray:
    """out[x] = max of per_vertex over x and all its ancestors."""
    out = np.array(per_vertex, dtype=float, copy=True)
    sl = level_slices(q, N)
    for d in range(1, N + 1):
        out[sl[d]] = np.maximum(out[sl[d]], expand_down(out[sl[d - 1]], q, d - 1))
    return out


def hl_maximal(mp: MeasureParams, f: TailConstantFunction) -> TailConstantFunction:
    """Mf(x) = max over dyadic D containing x of the mean of |f| on D."""
    N = f.boundary_depth
    a = np.abs(f.values)
    sector_avgs = subtree_averages(mp, a, N).real
    return f.with_values(np.maximum(a, _ancestor_max(mp.q, N, sector_avgs)))


def sharp_maximal(mp: MeasureParams, f: TailConstantFunction) -> TailConstantFunction:
    """M#f(x) = max over dyadic D containing x of the mean oscillation of f on D."""
    osc = subtree_oscillations(mp, f, 1.0)
    return f.with_values(_ancestor_max(mp.q, f.boundary_depth, osc))


# -- weak type (1,1) ---------------------------------------------------------


@dataclass
class Weak11Report:
    passed: bool
    norm1: float
    worst_quotient: float
    witness_lambda: float | None
    rows: list[tuple[float, float, float]] = field(default_factory=list)


def weak_11_check(mp: MeasureParams, f: TailConstantFunction, lambdas: Sequence[float]) -> Weak11Report:
    """mu({Mf > lam}) <= ||f||_1 / lam for each lam; quotient = lam mu(...)/||f||_1."""
    Mf = hl_maximal(mp, f)
    norm1 = lp_norm(mp, f, 1)
    worst, witness, ok = 0.0, None, True
    rows = []
    for lam in lambdas:
        if not lam > 0:
            raise ValueError("lambda must be positive")
        mass = level_region(mp, Mf, lam, ">").mass
        ok = ok and mass <= norm1 / lam
        quotient = lam * mass / norm1 if norm1 > 0 else 0.0
        rows.append((lam, mass, quotient))
        if quotient > worst:
            worst, witness = quotient, lam
    return Weak11Report(ok, norm1, worst, witness, rows)


# -- S^{phi,eta} -------------------------------------------------------------


@dataclass
class SelectorPair:
    """A choice of dyadic set phi(x) containing x and unimodular weights eta(y, x).

    ``eta`` maps (y, x) to a unit complex number; pairs not listed default to 1.
    For a function of boundary depth N, y ranges over its cells: a vertex y
    deeper than N is looked up through its depth-N ancestor.
    """

    phi: Mapping[int, DyadicSet]
    eta: Mapping[tuple[int, int], complex] | Callable[[int, int], complex] = field(default_factory=dict)

    def weight(self, y: int, x: int) -> complex:
        if callable(self.eta):
            return complex(self.eta(y, x))
        return complex(self.eta.get((y, x), 1.0))

    def validate(self, params, atol: float = 1e-12) -> None:
        for x, D in self.phi.items():
            if D not in containing_sets(params, x):
                raise ValueError(f"phi({x}) = {D} does not contain {x}")
        if not callable(self.eta):
            for key, val in self.eta.items():
                if abs(abs(val) - 1.0) > atol:
                    raise ValueError(f"eta{key} is not unimodular")


def s_phi_eta(mp: MeasureParams, f: TailConstantFunction, sel: SelectorPair) -> TailConstantFunction:
    """S f(x) = (1/mu(phi x)) sum_{y in phi x} (f(y) - f_{phi x}) eta(y, x) mu(y), for |x| <= N."""
    N = f.boundary_depth
    w = cell_weights(mp.q, mp.alpha, N)
    out = np.zeros(len(f.values), dtype=complex)
    masks: dict[DyadicSet, np.ndarray | None] = {}
    for x in range(len(f.values)):
        try:
            D = sel.phi[x]
        except KeyError:
            raise ValueError(f"selector undefined at {x}") from None
        if D not in masks:
            masks[D] = cell_mask(f, D)
        mask = masks[D]
        if mask is None:
            continue
        cells = np.flatnonzero(mask)
        vals, ww = f.values[cells], w[cells]
        mean = np.dot(vals, ww) / ww.sum()
        eta = np.array([sel.weight(int(y), x) for y in cells])
        out[x] = np.dot((vals - mean) * eta, ww) / ww.sum()
    return f.with_values(out)


def optimal_selector(mp: MeasureParams, f: TailConstantFunction) -> SelectorPair:
    """Selector attaining M#f at every |x| <= N.

    phi(x) is the smallest containing set with the largest oscillation;
    eta(y, x) is the phase of conj(f(y) - f_{phi x}).
    """
    N = f.boundary_depth
    osc = subtree_oscillations(mp, f, 1.0)
    phi: dict[int, DyadicSet] = {}
    eta: dict[tuple[int, int], complex] = {}
    w = cell_weights(mp.q, mp.alpha, N)
    for x in range(len(f.values)):
        sets = containing_sets(f.tree, x)
        # singleton has zero oscillation; sector values come from the subtree table
        scores = [0.0] + [float(osc[D.vertex]) for D in sets[1:]]
        D = sets[int(np.argmax(scores))]
        phi[x] = D
        mask = cell_mask(f, D)
        if mask is None:
            continue
        cells = np.flatnonzero(mask)
        vals = f.values[cells]
        mean = np.dot(vals, w[cells]) / w[cells].sum()
        for y, dev in zip(cells, vals - mean):
            eta[(int(y), x)] = np.conj(dev) / abs(dev) if dev != 0 else 1.0
    return SelectorPair(phi, eta)


def random_selector(f: TailConstantFunction, rng: np.random.Generator) -> SelectorPair:
    phi = {}
    for x in range(len(f.values)):
        sets = containing_sets(f.tree, x)
        phi[x] = sets[int(rng.integers(len(sets)))]
    phases = rng.uniform(0, 2 * np.pi, size=(len(f.values), len(f.values)))

    def eta(y, x):
        return np.exp(1j * phases[y, x])

    return SelectorPair(phi, eta)


# -- Calderon-Zygmund --------------------------------------------------------


@dataclass
class CZOutput:
    lam: float
    Q: list[DyadicSet]
    F: Region
    g: TailConstantFunction
    b_parts: list[tuple[DyadicSet, TailConstantFunction]]

    @property
    def b(self) -> TailConstantFunction:
        total = TailConstantFunction.zeros(self.g.tree, self.g.boundary_depth)
        for _, bq in self.b_parts:
            total = total + bq
        return total

    def omega(self, params) -> Region:
        return union_all(params, (region_of(Q) for Q in self.Q))


def cz_threshold(mp: MeasureParams, f: TailConstantFunction) -> float:
    return lp_norm(mp, f, 1) / total_mass(mp)


def cz_decompose(mp: MeasureParams, f: TailConstantFunction, lam: float) -> CZOutput:
    """Stopping-time descent through the dyadic family at level lam.

    A set whose |f|-average exceeds lam is selected into Q; a singleton that
    does not goes to F; otherwise the set is refined.  A set on which f is a
    single constant of modulus <= lam is sent to F whole, which makes the
    descent finite.
    """
    threshold = cz_threshold(mp, f)
    if not lam > threshold:
        raise CZPreconditionError(
            f"level too small for CZ: need lambda > ||f||_1/mu(X) = {threshold!r}, got {lam!r}"
        )
    absf = f.abs()
    Q: list[DyadicSet] = []
    f_sectors, f_points = [], []
    stack = [DyadicSet.whole()]
    while stack:
        D = stack.pop()
        if average_on(mp, absf, D).real > lam:
            Q.append(D)
        elif D.is_singleton:
            f_points.append(D.vertex)
        elif cell_mask(f, D) is None:
            f_sectors.append(D.vertex)
        else:
            stack.extend(reversed(refine(f.tree, D)))
    Q.sort(key=lambda D: (D.vertex, D.kind))

    N = f.boundary_depth
    gvals = np.array(f.values, copy=True)
    b_parts = []
    for D in Q:
        mask = _indicator_mask(f.tree, N, D)
        mean = average_on(mp, f, D)
        gvals[mask] = mean
        bvals = np.where(mask, f.values - mean, 0)
        b_parts.append((D, f.with_values(bvals)))
    F = make_region(f.tree, f_sectors, f_points)
    return CZOutput(lam, Q, F, f.with_values(gvals), b_parts)


@dataclass
class CZReport:
    passed: bool
    checks: dict[str, bool]
    values: dict[str, float]


def verify_cz(mp: MeasureParams, f: TailConstantFunction, out: CZOutput, atol: float = 1e-10) -> CZReport:
    """Check the decomposition properties with the constants C_alpha, 1 + C_alpha^2 and 1 + C_alpha."""
    params = mp.tree
    C = doubling_constant(mp)
    lam = out.lam
    norm1 = lp_norm(mp, f, 1)
    omega = out.omega(params)
    checks, values = {}, {}

    # canonical form drops any set covered by (or equal to) another, so the
    # parts survive one-for-one exactly when they are pairwise disjoint
    U = union_all(params, (region_of(Q) for Q in out.Q))
    checks["Q_disjoint"] = len(U.sectors) + len(U.singletons) == len(out.Q)
    checks["partition"] = same_set(params, complement(params, omega), out.F)

    N = f.boundary_depth
    in_F = np.ones(len(f.values), dtype=bool)
    for Q in out.Q:
        in_F &= ~_indicator_mask(params, N, Q)
    values["max_f_on_F"] = float(np.abs(f.values[in_F]).max(initial=0.0))
    checks["f_bounded_on_F"] = values["max_f_on_F"] <= lam

    absf = f.abs()
    avgs = [average_on(mp, absf, Q).real for Q in out.Q]
    values["max_avg_over_lambda"] = max(avgs, default=0.0) / lam
    values["min_avg_over_lambda"] = min(avgs, default=math.inf) / lam
    checks["avg_lower"] = all(a > lam for a in avgs)
    checks["avg_upper"] = all(a <= C * lam * (1 + RATIO_RTOL) for a in avgs)

    mass_omega = math.fsum(dyadic_mass(mp, Q) for Q in out.Q)
    values["mass_omega"] = mass_omega
    checks["omega_mass"] = mass_omega <= norm1 / lam * (1 + RATIO_RTOL)

    g2 = lp_norm(mp, out.g, 2) ** 2
    values["g_l2_sq_ratio"] = g2 / (lam * norm1) if norm1 else 0.0
    checks["g_l2"] = g2 <= (1 + C**2) * lam * norm1 * (1 + RATIO_RTOL)

    b1 = math.fsum(lp_norm(mp, bq, 1) for _, bq in out.b_parts)
    values["b_l1_ratio"] = b1 / norm1 if norm1 else 0.0
    checks["b_l1"] = b1 <= (1 + C) * norm1 * (1 + RATIO_RTOL)

    recon = out.g + out.b
    values["reconstruction_error"] = float(np.abs(recon.values - f.lift(recon.boundary_depth).values).max())
    checks["reconstruction"] = values["reconstruction_error"] <= atol

    means = [abs(integral(mp, bq)) for _, bq in out.b_parts]
    values["max_b_mean"] = max(means, default=0.0)
    checks["b_mean_zero"] = values["max_b_mean"] < 1e-12 * max(1.0, norm1)

    checks["b_support"] = all(
        not np.any(bq.values[~_indicator_mask(params, N, Q)]) for Q, bq in out.b_parts
    )
    return CZReport(all(checks.values()), checks, values)


# -- good lambda and Fefferman-Stein ----------------------------------------


@dataclass
class GoodLambdaReport:
    passed: bool
    passed_non_strict: bool
    lhs: float
    lhs_non_strict: float
    rhs: float
    constant: float
    lam: float
    gamma: float


def good_lambda_check(
    mp: MeasureParams,
    f: TailConstantFunction,
    lam: float,
    gamma: float,
    constant: float | None = None,
    Mf: TailConstantFunction | None = None,
    Msf: TailConstantFunction | None = None,
) -> GoodLambdaReport:
    """mu({Mf > 2 lam, M#f < gamma lam}) <= C' gamma mu({Mf > lam}), C' = ||M|| C_alpha.

    The variant with M#f <= gamma lam is reported alongside.
    """
    if not (lam > 0 and gamma > 0):
        raise ValueError("lambda and gamma must be positive")
    C = MAXIMAL_WEAK_NORM * doubling_constant(mp) if constant is None else constant
    Mf = hl_maximal(mp, f) if Mf is None else Mf
    Msf = sharp_maximal(mp, f) if Msf is None else Msf
    N = f.boundary_depth
    big = level_mask(Mf, 2 * lam, ">")
    lhs = mask_mass(mp, N, big & level_mask(Msf, gamma * lam, "<"))
    lhs_ns = mask_mass(mp, N, big & level_mask(Msf, gamma * lam, "<="))
    rhs = C * gamma * mask_mass(mp, N, level_mask(Mf, lam, ">"))
    return GoodLambdaReport(lhs <= rhs, lhs_ns <= rhs, lhs, lhs_ns, rhs, C, lam, gamma)


def fefferman_stein_constant(mp: MeasureParams, p: float) -> float:
    """N_p = 2^{(p+1)/p} gamma^{-1} with gamma^{-1} = 2^{p+1} ||M|| C_alpha."""
    return 2 ** ((p + 1) / p) * 2 ** (p + 1) * MAXIMAL_WEAK_NORM * doubling_constant(mp)


@dataclass
class FeffermanSteinReport:
    applicable: bool
    passed: bool
    p: float
    N_p: float
    maximal_norm: float
    function_norm: float
    sharp_norm: float
    maximal_quotient: float
    function_quotient: float


def fefferman_stein_check(mp: MeasureParams, f: TailConstantFunction, p: float) -> FeffermanSteinReport:
    """||Mf||_p <= N_p ||M#f||_p and ||f||_p <= N_p ||M#f||_p.

    When M#f vanishes identically (f constant) the quotients are undefined
    and the report is marked not applicable.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    Np = fefferman_stein_constant(mp, p)
    m = lp_norm(mp, hl_maximal(mp, f), p)
    n = lp_norm(mp, f, p)
    s = lp_norm(mp, sharp_maximal(mp, f), p)
    if s == 0:
        # f constant: only f = 0 satisfies the inequalities
        return FeffermanSteinReport(m == 0, m == 0, p, Np, m, n, s, math.nan, math.nan)
    ok = m <= Np * s and n <= Np * s
    return FeffermanSteinReport(True, ok, p, Np, m, n, s, m / s, n / s)
