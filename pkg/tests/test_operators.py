import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ExplicitTree, brute_hormander
from strategies import measure_and_function, measures
from treeharm import operators as O
from treeharm.funcspace import TailConstantFunction, evaluate, lp_norm, random_function
from treeharm.hardy_bmo import Atom, random_atom
from treeharm.measure import MeasureParams
from treeharm.tree import cumulative_count, depth

MP22 = MeasureParams.of(2, 2.0)


def _mu(mp, n):
    return np.array([float(mp.q) ** (-mp.alpha * depth(mp.tree, k)) for k in range(n)])


def test_kernel_basics():
    K = O.FiniteKernel.from_entries(MP22.tree, {(0, 4): 2.0, (1, 1): 0.0})
    assert K.depth_bound == 2
    assert K(0, 4) == 2 and K(1, 1) == 0
    assert K.matrix(MP22.tree).shape == (10, 10)
    assert O.adjoint(K)(4, 0) == 2
    assert O.FiniteKernel.from_entries(MP22.tree, {}).depth_bound == 0


def test_apply_single_entry():
    # K = delta at (0, 4): Kf(0) = f(4) mu(4)
    K = O.FiniteKernel.from_entries(MP22.tree, {(0, 4): 1.0})
    f = TailConstantFunction.from_support(MP22.tree, {4: 3.0})
    g = O.apply_operator(MP22, K, f)
    assert g.boundary_depth == 3
    assert evaluate(g, 0) == pytest.approx(3 / 16)
    assert np.count_nonzero(g.values) == 1


@settings(max_examples=40, deadline=None)
@given(mp=measures(), B=st.integers(0, 3), seed=st.integers(0, 10**6))
def test_weighted_identity_reproduces_f(mp, B, seed):
    rng = np.random.default_rng(seed)
    f = random_function(mp.tree, B, rng, complex_values=True)
    g = O.apply_operator(mp, O.weighted_identity(mp, B), f)
    n = cumulative_count(mp.tree, B) + 1
    assert np.allclose(g.values[:n], f.values, rtol=1e-12, atol=1e-12)
    assert not np.any(g.values[n:])


@settings(max_examples=40, deadline=None)
@given(mp=measures(), B=st.integers(0, 3), seed=st.integers(0, 10**6))
def test_apply_matches_explicit_sum(mp, B, seed):
    rng = np.random.default_rng(seed)
    K = O.random_kernel(mp, B, rng)
    f = random_function(mp.tree, rng.integers(0, 4), rng, complex_values=True)
    g = O.apply_operator(mp, K, f)
    n = cumulative_count(mp.tree, K.depth_bound) + 1
    mu = _mu(mp, n)
    for z in range(n):
        want = sum(K(z, x) * evaluate(f, x) * mu[x] for x in range(n))
        assert evaluate(g, z) == pytest.approx(want, rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(mp=measures(), seed=st.integers(0, 10**6))
def test_adjoint_identity(mp, seed):
    # <Kf, g> = <f, K*g> with the inner product sum f conj(g) mu
    rng = np.random.default_rng(seed)
    K = O.random_kernel(mp, 2, rng)
    B = K.depth_bound
    f = random_function(mp.tree, B, rng, complex_values=True)
    g = random_function(mp.tree, B, rng, complex_values=True)
    n = cumulative_count(mp.tree, B + 1) + 1
    mu = _mu(mp, n)

    def inner(a, b):
        return np.sum(a.lift(B + 1).values * np.conj(b.lift(B + 1).values) * mu)

    lhs = inner(O.apply_operator(mp, K, f), g)
    rhs = inner(f, O.apply_operator(mp, O.adjoint(K), g))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(mp=measures(), seed=st.integers(0, 10**6), a=st.complex_numbers(max_magnitude=5), b=st.complex_numbers(max_magnitude=5))
def test_linearity(mp, seed, a, b):
    rng = np.random.default_rng(seed)
    K = O.random_kernel(mp, 2, rng)
    f = random_function(mp.tree, 2, rng, complex_values=True)
    g = random_function(mp.tree, 3, rng, complex_values=True)
    lhs = O.apply_operator(mp, K, a * f + b * g)
    rhs = a * O.apply_operator(mp, K, f) + b * O.apply_operator(mp, K, g)
    assert np.allclose(lhs.values, rhs.values, rtol=1e-10, atol=1e-10)


def test_hormander_against_brute_force_50_kernels():
    rng = np.random.default_rng(2024)
    for i in range(50):
        mp = MeasureParams.of(int(rng.choice([2, 3])), float(rng.choice([1.2, 1.5, 2.0, 3.0])))
        B = int(rng.integers(0, 3 if mp.q == 3 else 4))
        K = O.random_kernel(mp, B, rng, density=float(rng.uniform(0.1, 0.9)), complex_values=bool(i % 2))
        want = brute_hormander(K.matrix(mp.tree), mp.q, mp.alpha, K.depth_bound)
        assert O.hormander_constant(mp, K) == pytest.approx(want, rel=1e-10, abs=1e-14), (i, mp, B)


def test_hormander_examples():
    assert O.hormander_constant(MP22, O.FiniteKernel.from_entries(MP22.tree, {})) == 0
    # single entry at (0, 1): x = 1 vs a deep y in T_1, z = o outside
    K = O.FiniteKernel.from_entries(MP22.tree, {(0, 1): 5.0})
    assert O.hormander_constant(MP22, K) == pytest.approx(5.0)
    # entries with z inside every sector containing x never count
    K = O.FiniteKernel.from_entries(MP22.tree, {(4, 1): 5.0})
    assert O.hormander_constant(MP22, K) == 0


def test_l2_norm_of_weighted_identity_and_diagonal():
    assert O.l2_operator_norm(MP22, O.weighted_identity(MP22, 3)) == pytest.approx(1.0, rel=1e-9)
    K = O.FiniteKernel.from_entries(MP22.tree, {(0, 0): 2.0, (1, 1): 4.0})
    # singular values 2 and 4 * mu(1) = 1
    assert O.l2_operator_norm(MP22, K) == pytest.approx(2.0, rel=1e-9)
    assert O.l2_operator_norm(MP22, O.FiniteKernel.from_entries(MP22.tree, {})) == 0
    with pytest.raises(ValueError):
        O.l2_operator_norm(MP22, K, tol=0)


@settings(max_examples=30, deadline=None)
@given(mp=measures(), B=st.integers(0, 3), seed=st.integers(0, 10**6))
def test_rank_one_norm(mp, B, seed):
    rng = np.random.default_rng(seed)
    u = random_function(mp.tree, B, rng, complex_values=True)
    w = random_function(mp.tree, B, rng, complex_values=True)
    K = O.rank_one_kernel(u, w, B)
    if not K.entries:
        return
    n = cumulative_count(mp.tree, B) + 1
    mu = _mu(mp, n)
    want = math.sqrt(np.sum(np.abs(u.values[:n]) ** 2 * mu) * np.sum(np.abs(w.values[:n]) ** 2 * mu))
    assert O.l2_operator_norm(mp, K) == pytest.approx(want, rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(mp=measures(), B=st.integers(0, 3), seed=st.integers(0, 10**6))
def test_l2_norm_matches_svd(mp, B, seed):
    rng = np.random.default_rng(seed)
    K = O.random_kernel(mp, B, rng)
    Kd = K.matrix(mp.tree)
    s = np.sqrt(_mu(mp, Kd.shape[0]))
    want = np.linalg.svd(s[:, None] * Kd * s[None, :], compute_uv=False).max() if Kd.size else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", O.ConvergenceWarning)
        got = O.l2_operator_norm(mp, K, tol=1e-13)
    assert got == pytest.approx(want, rel=1e-5)


def test_power_iteration_fallback_when_ones_is_orthogonal():
    # the top singular vector (1, -1) is orthogonal to the all-ones start
    K = O.FiniteKernel.from_entries(MP22.tree, {(0, 0): 1.0, (0, 1): -2.0})
    Kd = K.matrix(MP22.tree)
    s = np.sqrt(_mu(MP22, Kd.shape[0]))
    want = np.linalg.svd(s[:, None] * Kd * s[None, :], compute_uv=False).max()
    assert O.l2_operator_norm(MP22, K) == pytest.approx(want, rel=1e-9)


def test_probe_and_sweep_reports():
    rng = np.random.default_rng(3)
    K = O.random_kernel(MP22, 2, rng)
    atoms = [Atom.constant()] + [random_atom(MP22, 3, rng, p) for p in (math.inf, 2.0)]
    rep = O.h1_l1_probe(MP22, K, atoms)
    assert rep.sup == max(rep.values) and len(rep.values) == 3
    assert rep.reference_bound > 0
    fs = [random_function(MP22.tree, 3, rng) for _ in range(10)]
    sw = O.lp_ratio_sweep(MP22, K, [1.5, 2.0, 4.0], fs)
    assert [r.p for r in sw.rows] == [1.5, 2.0, 4.0]
    two = next(r for r in sw.rows if r.p == 2.0)
    assert two.sup_ratio <= sw.reference * (1 + 1e-9)
    with pytest.raises(ValueError):
        O.lp_ratio_sweep(MP22, K, [1.0], fs)


@settings(max_examples=30, deadline=None)
@given(data=measure_and_function(max_boundary=3), seed=st.integers(0, 10**6))
def test_l2_ratio_never_exceeds_operator_norm(data, seed):
    mp, f = data
    if lp_norm(mp, f, 2) == 0:
        return
    K = O.random_kernel(mp, 2, np.random.default_rng(seed))
    ratio = lp_norm(mp, O.apply_operator(mp, K, f), 2) / lp_norm(mp, f, 2)
    assert ratio <= O.l2_operator_norm(mp, K, tol=1e-13) * (1 + 1e-6) + 1e-12


def test_explicit_tree_used_by_brute_force_is_consistent():
    T = ExplicitTree(2, 2.0, 3)
    assert T.n == cumulative_count(MP22.tree, 3) + 1
