import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ExplicitTree
from strategies import measure_and_function
from treeharm import hardy_bmo as H
from treeharm.funcspace import TailConstantFunction, evaluate, integral, lp_norm
from treeharm.measure import MeasureParams, dyadic_mass, sector_mass, total_mass
from treeharm.tree import DyadicSet

MP22 = MeasureParams.of(2, 2.0)


def test_constant_atom():
    a = H.Atom.constant()
    assert H.validate_atom(MP22, a)
    assert np.allclose(a.function(MP22).values, 0.4)
    assert not H.validate_atom(MP22, H.Atom.constant(p=1.0))


def test_sibling_difference_atom():
    D = DyadicSet.sector(1)
    mD = dyadic_mass(MP22, D)
    a = TailConstantFunction.from_support(MP22.tree, {4: 1.0, 5: -1.0})
    # point masses at depth 2 are equal, so the mean vanishes
    a = a / mD
    assert H.validate_atom(MP22, H.Atom.standard(D, a))
    too_big = H.validate_atom(MP22, H.Atom.standard(D, a * 1.01))
    assert not too_big and "size" in too_big.diagnostics[0]
    outside = H.validate_atom(MP22, H.Atom.standard(DyadicSet.sector(4), a))
    assert not outside and any("support" in d for d in outside.diagnostics)


def test_nonzero_mean_is_not_an_atom():
    a = TailConstantFunction.from_support(MP22.tree, {4: 1.0}) / 10
    check = H.validate_atom(MP22, H.Atom.standard(DyadicSet.sector(1), a))
    assert not check and any("mean" in d for d in check.diagnostics)


def test_sector_atom_with_tail_values():
    # a = +c on T_4, -c on T_5: tail values, mean zero by symmetry
    D = DyadicSet.sector(1)
    c = 1 / dyadic_mass(MP22, D)
    vals = np.zeros(10, dtype=complex)
    vals[4], vals[5] = c, -c
    f = TailConstantFunction(MP22.tree, 2, vals)
    assert H.validate_atom(MP22, H.Atom.standard(D, f))
    for p in (1.5, 2.0, 4.0):
        a = f * (dyadic_mass(MP22, D) ** (1 / p - 1) / lp_norm(MP22, f, p))
        assert H.validate_atom(MP22, H.Atom.standard(D, a, p))


def test_decompose_zero_and_constant():
    assert H.atomic_decompose(MP22, TailConstantFunction.zeros(MP22.tree, 2)).terms == []
    c = TailConstantFunction.constant(MP22.tree, 3.0, 2)
    dec = H.atomic_decompose(MP22, c)
    assert len(dec.terms) == 1
    coef, atom = dec.terms[0]
    assert atom.kind == H.Atom.CONSTANT
    assert coef == pytest.approx(3 * total_mass(MP22))


def test_decompose_delta_origin():
    f = TailConstantFunction.from_support(MP22.tree, {0: 1.0})
    dec = H.atomic_decompose(MP22, f)
    kinds = [a.kind for _, a in dec.terms]
    assert kinds == [H.Atom.CONSTANT, H.Atom.STANDARD]
    assert dec.terms[0][0] == pytest.approx(1.0)
    rec = dec.reconstruct(MP22, 2)
    for x in range(10):
        assert evaluate(rec, x) == pytest.approx(evaluate(f, x), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(data=measure_and_function(max_boundary=4))
def test_decomposition_reconstructs_with_valid_atoms(data):
    mp, f = data
    dec = H.atomic_decompose(mp, f)
    rec = dec.reconstruct(mp, f.boundary_depth + 1)
    assert np.abs(rec.values - f.lift(f.boundary_depth + 1).values).max() < 1e-10
    for _, a in dec.terms:
        assert H.validate_atom(mp, a)
        assert lp_norm(mp, a.function(mp), 1) <= 1 + 1e-12
    assert lp_norm(mp, f, 1) <= H.h1_norm_upper(mp, f) * (1 + 1e-12) + 1e-15


def test_h1_upper_of_an_atom_is_finite():
    a = TailConstantFunction.from_support(MP22.tree, {4: 1.0, 5: -1.0}) / sector_mass(MP22, 1)
    assert 0 < H.h1_norm_upper(MP22, a) < math.inf
    assert H.h1_norm_upper(MP22, TailConstantFunction.zeros(MP22.tree)) == 0


def test_bmo_examples():
    assert H.bmo_norm(MP22, TailConstantFunction.zeros(MP22.tree)) == 0
    c = TailConstantFunction.constant(MP22.tree, -2.0, 1)
    assert H.bmo_norm(MP22, c) == pytest.approx(2 * total_mass(MP22))
    # indicator of T_1: mean 0.2 on X, oscillation (0.8*0.5 + 0.2*2)/2.5
    f = TailConstantFunction.indicator(MP22.tree, DyadicSet.sector(1))
    assert H.bmo_norm(MP22, f) == pytest.approx(0.32 + 0.5, rel=1e-14)
    T = ExplicitTree(2, 2.0, 3)
    assert H.bmo_norm(MP22, f) == pytest.approx(T.bmo(T.values(f)), rel=1e-12)
    assert H.bmo_oscillation(MP22, f)[1] == DyadicSet.whole()
    with pytest.raises(ValueError):
        H.bmo_norm(MP22, f, 0.5)


@settings(max_examples=40, deadline=None)
@given(data=measure_and_function(max_boundary=3), r=st.sampled_from([1.0, 2.0, 3.0]))
def test_bmo_against_explicit_tree(data, r):
    mp, f = data
    T = ExplicitTree(mp.q, mp.alpha, f.boundary_depth + 1)
    assert H.bmo_norm(mp, f, r) == pytest.approx(T.bmo(T.values(f), r), rel=1e-10, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(data=measure_and_function(max_boundary=4), c=st.complex_numbers(max_magnitude=10), r=st.sampled_from([1.0, 2.0]))
def test_bmo_oscillation_ignores_constants(data, c, r):
    mp, f = data
    a = H.bmo_oscillation(mp, f, r)[0]
    b = H.bmo_oscillation(mp, f + c, r)[0]
    assert b == pytest.approx(a, rel=1e-9, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(data=measure_and_function(max_boundary=4), r=st.sampled_from([2.0, 3.0]))
def test_inboxing(data, r):
    mp, f = data
    rep = H.inboxing_check(mp, f, r)
    assert rep.passed
    with pytest.raises(ValueError):
        H.inboxing_check(mp, f, 1.0)


def test_inboxing_sector_indicator():
    f = TailConstantFunction.indicator(MP22.tree, DyadicSet.sector(2))
    rep = H.inboxing_check(MP22, f, 2.0)
    assert rep.passed and rep.bmo1 < rep.bmo_r


def test_pairing_examples():
    a = TailConstantFunction.from_support(MP22.tree, {4: 1.0, 5: -1.0}) / sector_mass(MP22, 1)
    atom = H.Atom.standard(DyadicSet.sector(1), a)
    c = TailConstantFunction.constant(MP22.tree, 7.0)
    assert abs(H.duality_pairing(MP22, c, atom)) < 1e-14
    f = TailConstantFunction.from_support(MP22.tree, {0: 2.0, 9: 1j})
    assert H.duality_pairing(MP22, f, H.Atom.constant()) == pytest.approx(integral(MP22, f) / total_mass(MP22))
    bad = H.Atom.standard(DyadicSet.sector(1), a * 3)
    with pytest.raises(ValueError, match="not an atom"):
        H.duality_pairing(MP22, f, bad)
    assert H.conjugate_exponent(math.inf) == 1.0
    assert H.conjugate_exponent(2.0) == 2.0


@settings(max_examples=100, deadline=None)
@given(
    data=measure_and_function(max_boundary=4, min_boundary=1),
    p=st.sampled_from([math.inf, 4.0, 2.0, 1.5]),
    seed=st.integers(0, 10**6),
)
def test_pairing_bounded_by_bmo(data, p, seed):
    mp, f = data
    atom = H.random_atom(mp, f.boundary_depth, np.random.default_rng(seed), p, complex_values=True)
    assert H.validate_atom(mp, atom)
    assert lp_norm(mp, atom.function(mp), 1) <= 1 + 1e-12
    pairing = abs(H.duality_pairing(mp, f, atom))
    assert pairing <= H.bmo_norm(mp, f, H.conjugate_exponent(p)) + 1e-9


def test_random_atom_needs_depth():
    with pytest.raises(ValueError):
        H.random_atom(MP22, 0, np.random.default_rng(0))
