import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ExplicitTree
from strategies import measure_and_function
from treeharm import funcspace as F
from treeharm.funcspace import TailConstantFunction
from treeharm.measure import MeasureParams, dyadic_mass, region_mass, total_mass
from treeharm.tree import DyadicSet, TreeParams, cumulative_count, depth

TREE2 = TreeParams(2)
MP22 = MeasureParams.of(2, 2.0)


def test_construction_and_shape_checks():
    f = TailConstantFunction.zeros(TREE2, 2)
    assert f.values.shape == (10,)
    with pytest.raises(ValueError, match="expected 4 values"):
        TailConstantFunction(TREE2, 1, [1, 2])
    with pytest.raises(AttributeError):
        f.boundary_depth = 3
    with pytest.raises(ValueError):
        f.values[0] = 1


def test_from_support_boundary_depth():
    f = TailConstantFunction.from_support(TREE2, {0: 1.0})
    assert f.boundary_depth == 1
    assert list(f.values) == [1, 0, 0, 0]
    g = TailConstantFunction.from_support(TREE2, {5: 2.0})
    assert g.boundary_depth == 3
    assert F.evaluate(g, 5) == 2 and F.evaluate(g, 11) == 0


def test_delta_origin_examples():
    f = TailConstantFunction.from_support(TREE2, {0: 1.0})
    assert F.integral(MP22, f) == 1
    assert F.lp_norm(MP22, f, 1) == 1
    assert F.lp_norm(MP22, f, 2) == 1
    assert F.average_on(MP22, f, DyadicSet.whole()) == pytest.approx(0.4)


def test_constant_function_integral():
    for q, a in [(2, 2.0), (3, 1.5)]:
        mp = MeasureParams.of(q, a)
        c = TailConstantFunction.constant(mp.tree, 3.0)
        assert F.integral(mp, c) == pytest.approx(3 * total_mass(mp))
        assert F.oscillation_on(mp, c, DyadicSet.whole()) == 0.0


@settings(max_examples=60, deadline=None)
@given(data=measure_and_function(max_boundary=3))
def test_integrals_and_norms_against_explicit_tree(data):
    mp, f = data
    T = ExplicitTree(mp.q, mp.alpha, f.boundary_depth + 1)
    vals = T.values(f)
    assert F.integral(mp, f) == pytest.approx(T.integral(vals), rel=1e-12, abs=1e-12)
    for p in (1, 1.5, 2, 4, math.inf):
        assert F.lp_norm(mp, f, p) == pytest.approx(T.lp(vals, p), rel=1e-12, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(data=measure_and_function(max_boundary=3), r=st.sampled_from([1.0, 2.0, 3.0]))
def test_averages_and_oscillations_against_explicit_tree(data, r):
    mp, f = data
    T = ExplicitTree(mp.q, mp.alpha, f.boundary_depth + 1)
    vals = T.values(f)
    osc = F.subtree_oscillations(mp, f, r)
    avgs = F.subtree_averages(mp, f.values, f.boundary_depth)
    for v in range(len(f.values)):
        kind = "whole" if v == 0 else "sector"
        D = DyadicSet.sector(v)
        want_avg = T.average(vals, kind, v)
        assert F.average_on(mp, f, D) == pytest.approx(want_avg, rel=1e-10, abs=1e-12)
        assert avgs[v] == pytest.approx(want_avg, rel=1e-10, abs=1e-12)
        want_osc = T.oscillation(vals, kind, v, r)
        assert osc[v] == pytest.approx(want_osc, rel=1e-10, abs=1e-12)
        assert F.oscillation_on(mp, f, D, r) == pytest.approx(want_osc, rel=1e-10, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(data=measure_and_function(max_boundary=3), extra=st.integers(0, 2))
def test_lift_preserves_values_and_integrals(data, extra):
    mp, f = data
    g = f.lift(f.boundary_depth + extra)
    for k in range(len(g.values)):
        assert g.values[k] == F.evaluate(f, k)
    assert F.integral(mp, g) == pytest.approx(F.integral(mp, f), rel=1e-12, abs=1e-14)
    if g.boundary_depth:
        with pytest.raises(ValueError):
            g.lift(g.boundary_depth - 1)


def test_arithmetic_uses_common_depth():
    f = TailConstantFunction.from_support(TREE2, {0: 1.0})
    g = TailConstantFunction.from_support(TREE2, {4: 2.0})
    h = f + g
    assert h.boundary_depth == 3
    assert F.evaluate(h, 0) == 1 and F.evaluate(h, 4) == 2 and F.evaluate(h, 10) == 0
    assert (h - g) == f.lift(3)
    assert (2 * f).values[0] == 2
    assert (f * g) == TailConstantFunction.zeros(TREE2, 3)
    with pytest.raises(ValueError, match="different q"):
        f + TailConstantFunction.zeros(TreeParams(3), 1)


def test_indicator_integrals():
    for D in [DyadicSet.whole(), DyadicSet.sector(4), DyadicSet.singleton(4), DyadicSet.singleton(0)]:
        f = TailConstantFunction.indicator(TREE2, D)
        assert F.integral(MP22, f) == pytest.approx(dyadic_mass(MP22, D))


@settings(max_examples=60, deadline=None)
@given(data=measure_and_function(max_boundary=3, complex_values=False), lam=st.floats(-1, 3))
def test_level_regions_against_explicit_tree(data, lam):
    mp, f = data
    T = ExplicitTree(mp.q, mp.alpha, f.boundary_depth)
    vals = T.values(f).real
    for comp, op in [(">", np.greater), (">=", np.greater_equal), ("<", np.less), ("<=", np.less_equal)]:
        rep = F.level_region(mp, f, lam, comp)
        want = math.fsum(T.weight[op(vals, lam)])
        assert rep.mass == pytest.approx(want, rel=1e-12, abs=1e-15)
        assert region_mass(mp, rep.region) == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_level_set_requires_real_values():
    f = TailConstantFunction.constant(TREE2, 1j)
    with pytest.raises(ValueError, match="real values"):
        F.level_mask(f, 0.0)
    with pytest.raises(ValueError):
        F.level_mask(f.abs(), 0.0, "!=")


def test_random_function_is_seeded():
    a = F.random_function(TREE2, 3, np.random.default_rng(5), complex_values=True, density=0.5)
    b = F.random_function(TREE2, 3, np.random.default_rng(5), complex_values=True, density=0.5)
    assert a == b
    assert a.values.shape == (cumulative_count(TREE2, 3) + 1,)


def test_block_view_groups_descendants():
    q, N = 3, 3
    idx = np.arange(cumulative_count(TreeParams(q), N) + 1)
    blocks = F.block_view(idx, q, N, 1, 3)
    T = ExplicitTree(q, 2.0, N)
    for row, v in zip(blocks, range(1, q + 2)):
        assert sorted(row) == [k for k in T.descendants(v) if T.depth[k] == 3]
    assert all(depth(TreeParams(q), int(k)) == 3 for k in blocks.ravel())
