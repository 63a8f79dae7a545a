import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import cell_content_brute
from shatterkit.errors import InvalidParameter, ResourceLimit
from shatterkit.lattice import (EMPTY_CELL, IntegerCell, anchor_range, cconv_contains_cell, cconv_membership,
                                cell_content, cell_content_naive, cell_content_report, comb_dimension_geometric,
                                octants_of_cell)

CROSS = np.array([[0, 2], [2, 0], [0, -2], [-2, 0], [0, 0]], dtype=float)
SQUARE = np.array([[0, 0], [0, 2], [2, 0], [2, 2]], dtype=float)

int_sets = st.integers(1, 4).flatmap(
    lambda n: arrays(float, st.tuples(st.integers(1, 8), st.just(n)), elements=st.integers(0, 4)))


def test_octants_of_segment():
    octs = octants_of_cell(IntegerCell((0,), (0,)))
    assert {(o.vertex, o.signs) for o in octs} == {((0.0,), (-1,)), ((1.0,), (1,))}


def test_octants_of_square_touch_one_vertex_each():
    cell = IntegerCell((0, 1), (0, 0))
    octs = octants_of_cell(cell)
    got = {(o.vertex, o.signs) for o in octs}
    assert got == {((0.0, 0.0), (-1, -1)), ((1.0, 0.0), (1, -1)), ((0.0, 1.0), (-1, 1)), ((1.0, 1.0), (1, 1))}
    for o in octs:
        assert sum(o.contains(v) for v in cell.vertices()) == 1


def test_empty_cell_has_no_octants():
    with pytest.raises(InvalidParameter):
        octants_of_cell(EMPTY_CELL)


def test_cell_examples():
    cube = np.array(list(itertools.product((0, 1), repeat=2)), dtype=float)
    assert cconv_contains_cell(cube, (0, 1), IntegerCell((0, 1), (0, 0)))
    assert not cconv_contains_cell(CROSS, (0, 1), IntegerCell((0, 1), (0, 0)))
    assert cconv_contains_cell(SQUARE, (0, 1), IntegerCell((0, 1), (1, 0)))


def test_membership_examples():
    for x in CROSS:
        assert cconv_membership(CROSS, x)
    assert not cconv_membership(CROSS, np.array([1.0, 1.0]))
    # the closed octant {x <= 0, y >= 2} at (0, 2) misses both points
    assert not cconv_membership(np.array([[0.0, 0], [2, 2]]), np.array([0.0, 2.0]))
    assert cconv_membership(np.array([[0.0, 0], [0, 2], [2, 2]]), np.array([0.0, 2.0]))


def test_cell_content_examples():
    box = np.array(list(itertools.product(range(3), range(2))), dtype=float)
    assert cell_content(box) == 6
    rng = np.random.default_rng(0)
    assert cell_content(rng.uniform(-0.999, 0.999, size=(30, 2))) == 1
    assert cell_content(SQUARE) == 9
    rep = cell_content_report(SQUARE)
    assert rep["total"] == 9
    assert rep["per_rank"] == [1, 4, 4]
    # projections with at least one cell, the empty one included
    assert rep["sigma_count"] == 4


def test_dimension_examples():
    cube = np.array(list(itertools.product((0, 1), repeat=3)), dtype=float)
    v, (sigma, cell) = comb_dimension_geometric(cube)
    assert v == 3 and tuple(sigma) == (0, 1, 2) and cell.anchor == (0, 0, 0)
    assert comb_dimension_geometric(np.eye(4))[0] == 1
    assert comb_dimension_geometric(CROSS)[0] == 1


def test_cell_content_matches_independent_oracle():
    rng = np.random.default_rng(11)
    for _ in range(60):
        A = rng.integers(-1, 4, size=(rng.integers(1, 8), rng.integers(1, 4))).astype(float)
        if rng.random() < 0.3:
            A += rng.uniform(-0.5, 0.5, size=A.shape)
        assert cell_content(A) == cell_content_brute(A) == cell_content_naive(A)


@given(int_sets, st.data())
def test_cell_oracle_equivalence(A, data):
    n = A.shape[1]
    sigma = tuple(sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1))))
    Q = A[:, list(sigma)]
    anchor = tuple(data.draw(st.integers(lo - 1, hi + 1)) for lo, hi in
                   (anchor_range(Q[:, j]) for j in range(len(sigma))))
    cell = IntegerCell(sigma, anchor)
    assert cconv_contains_cell(A, sigma, cell) == all(cconv_membership(Q, v) for v in cell.vertices())


@given(int_sets, st.data())
def test_monotone_under_inclusion(A, data):
    k = data.draw(st.integers(1, len(A)))
    B = A[:k]
    assert cell_content(B) <= cell_content(A)
    assert comb_dimension_geometric(B)[0] <= comb_dimension_geometric(A)[0]


@given(int_sets, st.data())
def test_integer_translation_invariance(A, data):
    shift = np.array(data.draw(st.lists(st.integers(-5, 5), min_size=A.shape[1], max_size=A.shape[1])), float)
    assert cell_content(A + shift) == cell_content(A)
    assert comb_dimension_geometric(A + shift)[0] == comb_dimension_geometric(A)[0]


@given(int_sets)
def test_content_at_least_two_to_the_dimension(A):
    v, _ = comb_dimension_geometric(A)
    assert cell_content(A) >= max(1, 2 ** v)


def test_max_n_guard():
    with pytest.raises(ResourceLimit):
        cell_content(np.zeros((1, 5)), max_n=4)
