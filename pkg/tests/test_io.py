import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import measure_and_function
from treeharm import io as tio
from treeharm.czmax import cz_decompose, cz_threshold
from treeharm.hardy_bmo import Atom, atomic_decompose, random_atom
from treeharm.measure import MeasureParams, Region
from treeharm.operators import random_kernel
from treeharm.tree import DyadicSet

MP22 = MeasureParams.of(2, 2.0)


def roundtrip(obj):
    return json.loads(tio.dumps(obj))


@settings(max_examples=60, deadline=None)
@given(data=measure_and_function(max_boundary=4))
def test_function_roundtrip(data):
    mp, f = data
    g, mp2 = tio.function_from_json(roundtrip(tio.function_to_json(f, mp)))
    assert g == f and mp2 == mp


def test_function_rows_may_omit_imaginary_part():
    f, mp = tio.function_from_json({"q": 2, "alpha": 2, "boundary_depth": 1, "values": [[0, 1], [1, 0], [2, 0], [3, 0.5]]})
    assert list(f.values) == [1, 0, 0, 0.5]
    assert mp.alpha == 2.0


@pytest.mark.parametrize(
    "obj, msg",
    [
        ({"alpha": 2, "boundary_depth": 0, "values": [[0, 1]]}, "missing field 'q'"),
        ({"q": 2, "alpha": 0.5, "boundary_depth": 0, "values": [[0, 1]]}, "alpha"),
        ({"q": 2, "alpha": 2, "boundary_depth": -1, "values": []}, "nonnegative"),
        ({"q": 2, "alpha": 2, "boundary_depth": 0, "values": [[1, 1]]}, "below the boundary"),
        ({"q": 2, "alpha": 2, "boundary_depth": 0, "values": [[0, 1], [0, 2]]}, "twice"),
        ({"q": 2, "alpha": 2, "boundary_depth": 1, "values": [[0, 1]]}, "missing for 3"),
        ({"q": 2, "alpha": 2, "boundary_depth": 0, "values": [[0, "x"]]}, "expected a number"),
        ({"q": 2, "alpha": 2, "boundary_depth": 0, "values": [0]}, "bad value row"),
        ({"q": "2", "alpha": 2, "boundary_depth": 0, "values": [[0, 1]]}, "wrong type"),
    ],
)
def test_malformed_functions(obj, msg):
    with pytest.raises(tio.MalformedInputError, match=msg):
        tio.function_from_json(obj)


def test_dyadic_and_region_roundtrip():
    for D in [DyadicSet.whole(), DyadicSet.sector(5), DyadicSet.singleton(0)]:
        assert tio.dyadic_from_json(roundtrip(tio.dyadic_to_json(D))) == D
    R = Region(frozenset({4}), frozenset({0, 5}))
    assert tio.region_from_json(roundtrip(tio.region_to_json(R)), MP22.tree) == R
    with pytest.raises(tio.MalformedInputError, match="unknown dyadic kind"):
        tio.dyadic_from_json({"kind": "ball", "vertex": 1})
    with pytest.raises(tio.MalformedInputError):
        tio.dyadic_from_json({"kind": "sector", "vertex": -1})
    assert tio.dyadic_from_json({"kind": "sector", "vertex": 0}) == DyadicSet.whole()
    with pytest.raises(tio.MalformedInputError, match="canonical"):
        tio.region_from_json({"sectors": [1, 4], "singletons": []}, MP22.tree)


def test_atom_and_decomposition_roundtrip():
    rng = np.random.default_rng(1)
    for p in (math.inf, 2.0):
        a = random_atom(MP22, 3, rng, p, complex_values=True)
        b = tio.atom_from_json(roundtrip(tio.atom_to_json(a, MP22)))
        assert b.kind == a.kind and b.D == a.D and b.p == a.p and b.values == a.values
    c = tio.atom_from_json(roundtrip(tio.atom_to_json(Atom.constant(), MP22)))
    assert c.kind == Atom.CONSTANT and c.p == math.inf
    f = tio.function_from_json({"q": 2, "alpha": 2, "boundary_depth": 0, "values": [[0, 2]]})[0]
    f = f.lift(2) + 0
    dec = atomic_decompose(MP22, f)
    back = tio.decomposition_from_json(roundtrip(tio.decomposition_to_json(dec, MP22)))
    assert [c for c, _ in back.terms] == [c for c, _ in dec.terms]
    with pytest.raises(tio.MalformedInputError, match="unknown atom kind"):
        tio.atom_from_json({"kind": "molecule"})
    with pytest.raises(tio.MalformedInputError):
        tio.decomposition_from_json({"terms": []})


def test_kernel_roundtrip_and_errors():
    K = random_kernel(MP22, 2, np.random.default_rng(0))
    assert tio.kernel_from_json(roundtrip(tio.kernel_to_json(K)), MP22.tree) == K
    K2 = tio.kernel_from_json({"entries": [[0, 1, 2.5]]}, MP22.tree)
    assert K2(0, 1) == 2.5 and K2.depth_bound == 1
    for bad in ({"entries": [[0, -1, 1.0]]}, {"entries": [[0, 1]]}, {"rows": []}):
        with pytest.raises(tio.MalformedInputError):
            tio.kernel_from_json(bad, MP22.tree)


@settings(max_examples=30, deadline=None)
@given(data=measure_and_function(max_boundary=3), factor=st.sampled_from([1.001, 2.0, 10.0]))
def test_cz_roundtrip(data, factor):
    mp, f = data
    t = cz_threshold(mp, f)
    if t == 0:
        return
    out = cz_decompose(mp, f, t * factor)
    back, mp2 = tio.cz_from_json(roundtrip(tio.cz_to_json(out, mp)))
    assert mp2 == mp and back.Q == out.Q and back.F == out.F and back.g == out.g
    assert [(D, b) for D, b in back.b_parts] == out.b_parts


def test_reference_measure_roundtrip():
    obj = {"radial_values": [1.0, 0.25], "tail_ratio": 0.5}
    sigma = tio.reference_from_json(obj)
    assert tio.reference_to_json(sigma) == obj
    with pytest.raises(tio.MalformedInputError):
        tio.reference_from_json({"radial_values": [1.0], "tail_ratio": 5.0})


def test_load_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(tio.MalformedInputError):
        tio.load_json(p)
    with pytest.raises(OSError):
        tio.load_json(tmp_path / "missing.json")


def test_dumps_rejects_nan_and_encodes_numpy():
    assert json.loads(tio.dumps({"x": np.float64(1.5), "n": np.int64(3)})) == {"x": 1.5, "n": 3}
    with pytest.raises(ValueError):
        tio.dumps({"x": float("nan")})
