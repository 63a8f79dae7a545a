import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shatterkit.core import (FunctionClass, Measure, affine_image, dumps_class, load_class, lp_norm, make_rng,
                             parse_csv, parse_json, save_class, split_atoms)
from shatterkit.errors import EmptyInput, InvalidParameter, ParseError

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
normal = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def _classes(elements):
    return st.integers(1, 6).flatmap(
        lambda n: arrays(float, st.tuples(st.integers(1, 6), st.just(n)), elements=elements))


classes = _classes(finite)


def test_csv_two_by_two():
    F = parse_csv("0,0\n1,1")
    assert F.values.tolist() == [[0, 0], [1, 1]]


def test_json_singleton():
    F = parse_json('{"values": [[0]]}')
    assert (F.size, F.n) == (1, 1)


def test_ragged_rows_report_row():
    with pytest.raises(ParseError) as exc:
        parse_csv("1,2\n1,2,3\n")
    assert exc.value.row == 2


def test_non_numeric_reports_coordinates():
    with pytest.raises(ParseError) as exc:
        parse_csv("1,2\n3,x\n")
    assert (exc.value.row, exc.value.col) == (2, 2)


def test_empty_inputs():
    with pytest.raises(EmptyInput):
        parse_csv("")
    with pytest.raises(EmptyInput):
        parse_json("  ")


def test_json_measure_and_labels():
    F = parse_json('{"values": [[1, 2]], "labels": ["a"], "measure": [0.25, 0.75]}')
    assert F.labels == ("a",)
    assert F.measure.weights.tolist() == [0.25, 0.75]


def test_measure_validation():
    with pytest.raises(InvalidParameter):
        Measure([0.5, 0.6])
    with pytest.raises(InvalidParameter):
        Measure([1.5, -0.5])


def test_duplicate_rows_listed():
    F = FunctionClass(np.array([[1.0, 2], [0, 0], [1, 2]]))
    assert F.duplicate_rows == [(0, 2)]


@given(classes, st.sampled_from(["csv", "json"]))
def test_roundtrip_bit_exact(tmp_path_factory, V, fmt):
    F = FunctionClass(V)
    path = tmp_path_factory.mktemp("rt") / f"f.{fmt}"
    save_class(F, path)
    G = load_class(path)
    assert G.values.tobytes() == F.values.tobytes()
    assert dumps_class(G, fmt) == dumps_class(F, fmt)


def test_lp_examples():
    mu2 = Measure.uniform(2)
    assert lp_norm([3, 4], mu2, 2) == pytest.approx(math.sqrt(12.5), rel=1e-15)
    for p in (0.5, 1, 2, 7, math.inf):
        assert lp_norm(np.ones(5), Measure([0.1, 0.2, 0.3, 0.2, 0.2]), p) == pytest.approx(1.0, rel=1e-15)
    # independent summation
    assert lp_norm([2, 0], mu2, 0.5) == pytest.approx((0.5 * math.sqrt(2)) ** 2, rel=1e-15)


@given(arrays(float, st.integers(1, 8), elements=finite), st.floats(1, 10), st.floats(-100, 100))
def test_lp_homogeneous(f, p, c):
    mu = Measure.uniform(f.size)
    base = lp_norm(f, mu, p)
    assert lp_norm(c * f, mu, p) == pytest.approx(abs(c) * base, rel=1e-12, abs=1e-300)


def test_affine_examples():
    F = FunctionClass(np.array([[0.0, 2.0]]))
    assert affine_image(F, 1.0).values.tolist() == [[0, 2]]
    assert affine_image(F, 0.5).values.tolist() == [[0, 1]]


@given(_classes(normal), st.sampled_from([2.0, 0.5, 4.0, -0.25]))
def test_affine_inverse_pair_exact(V, a):
    # exact for powers of two on normal floats; other scales round
    F = FunctionClass(V)
    G = affine_image(affine_image(F, a), 1 / a)
    assert np.array_equal(G.values, F.values)
    assert (G.size, G.n) == (F.size, F.n)


def test_split_atoms_expands_rational_measure():
    F = FunctionClass(np.array([[1.0, 2.0]]))
    G, counts = split_atoms(F, Measure([0.25, 0.75]))
    assert counts.tolist() == [1, 3]
    assert G.values.tolist() == [[1, 2, 2, 2]]


def test_rng_streams_deterministic_and_distinct():
    a = make_rng(7, 1).random(4)
    assert np.array_equal(a, make_rng(7, 1).random(4))
    assert not np.array_equal(a, make_rng(7, 2).random(4))
    with pytest.raises(InvalidParameter):
        make_rng(-1)
