"""Randomized and exhaustive verification suites behind ``treeharm verify``.

Each suite returns a JSON-ready dict with ``passed``, the number of checks,
the violations found and the worst observed quotient with its witness.
Per-sample generators come from ``SeedSequence(seed).spawn``, so a sample's
data depends only on the root seed and its index.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import czmax, dyadic, hardy_bmo, measure
from .funcspace import TailConstantFunction, random_function
from .measure import MeasureParams
from .tree import DyadicSet, TreeParams, cumulative_count, depth

DEFAULT_LAMBDA_FACTORS = tuple(np.geomspace(0.02, 1.5, 20).tolist())
DEFAULT_CZ_FACTORS = (1.001, 1.5, 2.0, 5.0, 25.0)
DEFAULT_GAMMAS = (0.01, 0.05, 0.1, 0.25, 0.5)
DEFAULT_PS = (1.5, 2.0, 4.0)
DEFAULT_RS = (2.0, 3.0)
DEFAULT_ATOM_PS = (math.inf, 2.0, 4.0, 1.5)


def clean(obj):
    """Make a report JSON-safe: nan -> None, inf -> "inf", numpy scalars -> Python."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, DyadicSet):
        return str(obj)
    return obj


def sample_rngs(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def sample_function(tree: TreeParams, rng: np.random.Generator, max_boundary: int = 5) -> TailConstantFunction:
    """Random tail-constant function with a random boundary depth, density and value type."""
    N = int(rng.integers(1, max_boundary + 1))
    density = float(rng.choice([1.0, 0.5, 0.15]))
    f = random_function(tree, N, rng, complex_values=bool(rng.integers(2)), density=density)
    if not np.any(f.values):
        f = f.with_values(np.eye(1, len(f.values), 0, dtype=complex)[0])
    return f


def _track(state: dict, quotient: float, witness: dict) -> None:
    if quotient > state["worst"]:
        state["worst"] = quotient
        state["witness"] = witness


def _new_state(name: str, mp: MeasureParams) -> dict:
    return {"suite": name, "q": mp.q, "alpha": mp.alpha, "checks": 0, "violations": [], "worst": 0.0, "witness": None}


def _finish(state: dict) -> dict:
    state["passed"] = not state["violations"]
    state["violation_count"] = len(state["violations"])
    state["violations"] = state["violations"][:20]
    return clean(state)


def suite_doubling(mp: MeasureParams, max_depth: int = 6, radii=None, **_) -> dict:
    rep = measure.verify_doubling(mp, max_depth, radii)
    state = _new_state("doubling", mp)
    state.update(
        checks=rep.checks,
        worst=rep.worst_ratio,
        witness={"x": rep.witness[0], "r": rep.witness[1]} if rep.witness else None,
        constant=rep.constant,
        sharp_constant=measure.sharp_doubling_constant(mp),
        violations=[{"x": x, "r": r, "ratio": ratio} for x, r, ratio in rep.violations],
    )
    return _finish(state)


def suite_dyadic(mp: MeasureParams, max_depth: int = 6, nesting_depth: int = 5, **_) -> dict:
    tree = mp.tree
    state = _new_state("dyadic", mp)
    X = measure.total_mass(mp)
    for m in range(max_depth + 1):
        sets = list(dyadic.partition_at_scale(tree, m))
        counts = _membership_counts(tree, sets, m)
        state["checks"] += 1
        if not np.all(counts == 1):
            state["violations"].append({"scale": m, "issue": "not a partition"})
        mass = math.fsum(measure.dyadic_mass(mp, D) for D in sets)
        if abs(mass - X) > 1e-10 * X:
            state["violations"].append({"scale": m, "issue": "mass", "value": mass})
        # all sets here are rooted at depth <= m + 1, so traces to depth m + 2
        # decide equality; repeated entries would expose overlapping children
        L = m + 2
        for D in sets:
            kids = dyadic.refine(tree, D)
            parts = np.sort(np.concatenate([np.asarray(_members(tree, k, L), dtype=np.int64) for k in kids]))
            whole = np.asarray(_members(tree, D, L), dtype=np.int64)
            state["checks"] += 1
            if not np.array_equal(parts, whole):
                state["violations"].append({"set": str(D), "issue": "refinement"})
            if any(dyadic.dyadic_parent(tree, k, m + 1) != D for k in kids):
                state["violations"].append({"set": str(D), "issue": "dyadic parent"})
    rep = dyadic.measure_ratio_check(mp, max_depth)
    state["checks"] += rep.checks
    state["worst"] = rep.max_ratio
    state["witness"] = {"set": str(rep.witness[0]), "scale": rep.witness[1]} if rep.witness else None
    state["constant"] = rep.constant
    state["violations"] += [{"set": str(D), "scale": m, "ratio": r, "issue": "measure ratio"} for D, m, r in rep.violations]
    bad = nesting_violations(tree, min(nesting_depth, max_depth))
    state["checks"] += 1
    state["violations"] += [{"pair": [str(a), str(b)], "issue": "nesting"} for a, b in bad]
    return _finish(state)


def _membership_counts(tree: TreeParams, sets, m: int) -> np.ndarray:
    """How many members of the family contain each vertex of depth <= m."""
    n = cumulative_count(tree, m) + 1
    counts = np.zeros(n, dtype=int)
    for D in sets:
        counts[list(_members(tree, D, m))] += 1
    return counts


def _members(tree: TreeParams, D: DyadicSet, m: int):
    if D.is_singleton:
        return [D.vertex] if depth(tree, D.vertex) <= m else []
    lo = hi = D.vertex
    out = []
    d = depth(tree, D.vertex)
    q = tree.q
    if D.is_whole:
        return range(cumulative_count(tree, m) + 1)
    while d <= m:
        out.extend(range(lo, hi + 1))
        lo, hi, d = q * lo + 2, q * hi + q + 1, d + 1
    return out


def dyadic_bitmask(tree: TreeParams, D: DyadicSet, m: int) -> int:
    bits = 0
    for k in _members(tree, D, m):
        bits |= 1 << k
    return bits


def nesting_violations(tree: TreeParams, max_depth: int) -> list[tuple[DyadicSet, DyadicSet]]:
    """Pairs of dyadic sets rooted at depth <= max_depth that overlap without nesting.

    Sets are compared through their traces on the ball of radius max_depth+1,
    where every sector rooted at depth <= max_depth still has descendants.
    """
    sets = [DyadicSet.whole()]
    for k in range(cumulative_count(tree, max_depth) + 1):
        sets.append(DyadicSet.singleton(k))
        if k:
            sets.append(DyadicSet.sector(k))
    masks = [dyadic_bitmask(tree, D, max_depth + 1) for D in sets]
    bad = []
    for i in range(len(sets)):
        a = masks[i]
        for j in range(i + 1, len(sets)):
            b = masks[j]
            c = a & b
            if c and c != a and c != b:
                bad.append((sets[i], sets[j]))
    return bad


def suite_weak11(mp, seed=0, samples=200, lambdas=DEFAULT_LAMBDA_FACTORS, max_boundary=5, **_) -> dict:
    state = _new_state("weak11", mp)
    for i, rng in enumerate(sample_rngs(seed, samples)):
        f = sample_function(mp.tree, rng, max_boundary)
        scale = float(np.abs(f.values).max())
        rep = czmax.weak_11_check(mp, f, [c * scale for c in lambdas])
        state["checks"] += len(lambdas)
        for lam, mass, quotient in rep.rows:
            _track(state, quotient, {"sample": i, "lambda": lam})
            if mass > rep.norm1 / lam * (1 + 1e-12):
                state["violations"].append({"sample": i, "lambda": lam, "quotient": quotient})
    return _finish(state)


def cz_levels(mp: MeasureParams, f: TailConstantFunction, factors=DEFAULT_CZ_FACTORS) -> list[float]:
    return [czmax.cz_threshold(mp, f) * c for c in factors]


def suite_czd(mp, seed=0, samples=200, cz_factors=DEFAULT_CZ_FACTORS, max_boundary=5, **_) -> dict:
    state = _new_state("czd", mp)
    C = measure.doubling_constant(mp)
    for i, rng in enumerate(sample_rngs(seed, samples)):
        f = sample_function(mp.tree, rng, max_boundary)
        for lam in cz_levels(mp, f, cz_factors):
            out = czmax.cz_decompose(mp, f, lam)
            rep = czmax.verify_cz(mp, f, out)
            state["checks"] += 1
            _track(state, rep.values["max_avg_over_lambda"] / C, {"sample": i, "lambda": lam})
            if not rep.passed:
                failed = sorted(k for k, ok in rep.checks.items() if not ok)
                state["violations"].append({"sample": i, "lambda": lam, "failed": failed, "values": rep.values})
    state["quotient"] = "max avg_Q|f| / (C_alpha lambda)"
    return _finish(state)


def suite_goodlambda(
    mp, seed=0, samples=200, lambdas=DEFAULT_LAMBDA_FACTORS, gammas=DEFAULT_GAMMAS, max_boundary=5, **_
) -> dict:
    state = _new_state("goodlambda", mp)
    non_strict = 0
    for i, rng in enumerate(sample_rngs(seed, samples)):
        f = sample_function(mp.tree, rng, max_boundary)
        Mf, Msf = czmax.hl_maximal(mp, f), czmax.sharp_maximal(mp, f)
        scale = float(np.abs(f.values).max())
        for c in lambdas:
            for gamma in gammas:
                rep = czmax.good_lambda_check(mp, f, c * scale, gamma, Mf=Mf, Msf=Msf)
                state["checks"] += 1
                if rep.rhs > 0:
                    _track(state, rep.lhs / rep.rhs, {"sample": i, "lambda": rep.lam, "gamma": gamma})
                if not rep.passed:
                    state["violations"].append({"sample": i, "lambda": rep.lam, "gamma": gamma, "lhs": rep.lhs, "rhs": rep.rhs})
                non_strict += not rep.passed_non_strict
    state["non_strict_violations"] = non_strict
    return _finish(state)


def suite_feffermanstein(mp, seed=0, samples=200, ps=DEFAULT_PS, max_boundary=5, **_) -> dict:
    state = _new_state("feffermanstein", mp)
    skipped = 0
    for i, rng in enumerate(sample_rngs(seed, samples)):
        f = sample_function(mp.tree, rng, max_boundary)
        for p in ps:
            rep = czmax.fefferman_stein_check(mp, f, p)
            if not rep.applicable:
                skipped += 1
                continue
            state["checks"] += 1
            q = max(rep.maximal_quotient, rep.function_quotient) / rep.N_p
            _track(state, q, {"sample": i, "p": p, "maximal_quotient": rep.maximal_quotient, "N_p": rep.N_p})
            if not rep.passed:
                state["violations"].append({"sample": i, "p": p})
    state["not_applicable"] = skipped
    state["quotient"] = "max(||Mf||_p, ||f||_p) / (N_p ||M#f||_p)"
    return _finish(state)


def suite_inboxing(mp, seed=0, samples=200, rs=DEFAULT_RS, max_boundary=5, **_) -> dict:
    state = _new_state("inboxing", mp)
    for i, rng in enumerate(sample_rngs(seed, samples)):
        f = sample_function(mp.tree, rng, max_boundary)
        for r in rs:
            rep = hardy_bmo.inboxing_check(mp, f, r)
            state["checks"] += 1
            if rep.bmo_r > 0:
                _track(state, rep.bmo1 / rep.bmo_r, {"sample": i, "r": r})
            if not rep.passed:
                state["violations"].append({"sample": i, "r": r, "bmo1": rep.bmo1, "bmo_r": rep.bmo_r})
    return _finish(state)


def suite_duality(mp, seed=0, samples=500, atom_ps=DEFAULT_ATOM_PS, max_boundary=5, **_) -> dict:
    state = _new_state("duality", mp)
    for i, rng in enumerate(sample_rngs(seed, samples)):
        f = sample_function(mp.tree, rng, max_boundary)
        p = atom_ps[i % len(atom_ps)]
        a = hardy_bmo.random_atom(mp, f.boundary_depth, rng, p, complex_values=bool(rng.integers(2)))
        pairing = abs(hardy_bmo.duality_pairing(mp, f, a))
        bound = hardy_bmo.bmo_norm(mp, f, hardy_bmo.conjugate_exponent(p))
        state["checks"] += 1
        if bound > 0:
            _track(state, pairing / bound, {"sample": i, "p": p})
        if pairing > bound + 1e-9:
            state["violations"].append({"sample": i, "p": p, "pairing": pairing, "bmo": bound})
    return _finish(state)


def suite_supS(mp, seed=0, samples=200, max_boundary=3, selectors=3, **_) -> dict:
    state = _new_state("supS", mp)
    worst_gap = 0.0
    for i, rng in enumerate(sample_rngs(seed, samples)):
        f = sample_function(mp.tree, rng, max_boundary)
        Ms = czmax.sharp_maximal(mp, f).values.real
        for _k in range(selectors):
            S = np.abs(czmax.s_phi_eta(mp, f, czmax.random_selector(f, rng)).values)
            state["checks"] += 1
            if np.any(S > Ms + 1e-12):
                state["violations"].append({"sample": i, "issue": "random selector exceeds M#f"})
            pos = Ms > 0
            if np.any(pos):
                _track(state, float((S[pos] / Ms[pos]).max()), {"sample": i})
        opt = np.abs(czmax.s_phi_eta(mp, f, czmax.optimal_selector(mp, f)).values)
        gap = float(np.abs(opt - Ms).max())
        worst_gap = max(worst_gap, gap)
        state["checks"] += 1
        if gap > 1e-10:
            state["violations"].append({"sample": i, "issue": "optimizer misses M#f", "gap": gap})
    state["optimizer_max_gap"] = worst_gap
    return _finish(state)


SUITES: dict[str, Callable[..., dict]] = {
    "doubling": suite_doubling,
    "dyadic": suite_dyadic,
    "weak11": suite_weak11,
    "czd": suite_czd,
    "goodlambda": suite_goodlambda,
    "feffermanstein": suite_feffermanstein,
    "inboxing": suite_inboxing,
    "duality": suite_duality,
    "supS": suite_supS,
}


def run_suite(name: str, mp: MeasureParams, **kwargs) -> dict:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(mp, **kwargs)
