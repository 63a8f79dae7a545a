import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import fat_dimension_brute, shattered_brute
from shatterkit.dimension import (ShatterWitness, difference_breakpoints, dimension_profile, fat_dimension,
                                  is_shattered, profile_steps, verify_witness)
from shatterkit.errors import InvalidParameter, ResourceLimit
from shatterkit.lattice import comb_dimension_geometric

small = st.integers(1, 4).flatmap(
    lambda n: arrays(float, st.tuples(st.integers(1, 9), st.just(n)), elements=st.integers(-3, 3)))
ts = st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0])
SQUARE = np.array([[0, 0], [0, 2], [2, 0], [2, 2]], dtype=float)


def test_is_shattered_examples():
    cube = np.array(list(itertools.product((0, 1), repeat=2)), dtype=float)
    w = is_shattered(cube, (0, 1), 1.0)
    assert w is not None and w.levels == (0.0, 0.0)
    assert is_shattered(np.eye(3), (0, 1), 1.0) is None
    assert is_shattered(np.array([[0.0, 0], [1, 1]]), (0, 1), 1.0) is None


def test_fat_dimension_examples():
    for n in range(2, 7):
        for t in (0.1, 0.5, 1.0):
            assert fat_dimension(np.eye(n), t)[0] == 1
        cube = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)
        assert fat_dimension(cube, 1.0)[0] == n
    v, w = fat_dimension(SQUARE, 2.0)
    assert v == 2 and w.levels == (0.0, 0.0)


def test_profile_examples():
    rng = np.random.default_rng(1)
    F = rng.uniform(-1, 1, size=(6, 3))
    diam = np.abs(F[:, None] - F[None]).max()
    assert fat_dimension(F, diam * 1.01)[0] == 0
    assert dimension_profile(np.eye(4), [0.5, 1.0]) == {0.5: 1, 1.0: 1}
    G = np.vstack([SQUARE, [[0.0, 0.0]]])
    assert dimension_profile(G, [1, 2, 3]) == {1: 2, 2: 2, 3: 0}


def test_bad_t():
    with pytest.raises(InvalidParameter):
        fat_dimension(np.eye(2), 0.0)


def test_node_budget_enforced():
    rng = np.random.default_rng(0)
    with pytest.raises(ResourceLimit):
        fat_dimension(rng.integers(0, 2, size=(64, 10)).astype(float), 1.0, node_budget=5)


@given(small, ts)
def test_matches_brute_force(F, t):
    v, w = fat_dimension(F, t)
    assert v == fat_dimension_brute(F, t)
    if v:
        assert verify_witness(F, w)
        assert shattered_brute(F, w.sigma, t)


@given(small)
def test_integer_data_unit_height_is_geometric_dimension(F):
    assert fat_dimension(F, 1.0)[0] == comb_dimension_geometric(F)[0]


@given(small, ts, st.sampled_from([0.25, 2.0, 8.0]), st.integers(-5, 5))
def test_scaling_and_translation(F, t, c, shift):
    v = fat_dimension(F, t)[0]
    assert fat_dimension(c * F, c * t)[0] == v
    assert fat_dimension(F + shift, t)[0] == v


@given(small, ts, ts)
def test_antitone(F, t1, t2):
    lo, hi = sorted((t1, t2))
    assert fat_dimension(F, lo)[0] >= fat_dimension(F, hi)[0]


def test_tampered_witness_rejected():
    v, w = fat_dimension(SQUARE, 2.0)
    assert not verify_witness(SQUARE, ShatterWitness(w.sigma, (1.0, 0.0), 2.0))


@given(small)
def test_steps_describe_the_whole_profile(F):
    steps = profile_steps(F)
    bps = difference_breakpoints(F)
    # v is left-continuous and constant on (d_{j-1}, d_j]
    prev = 0.0
    for d, v in steps:
        for t in (d, (prev + d) / 2):
            if t > 0:
                assert fat_dimension(F, t)[0] == v
        prev = d
    top = float(bps[-1]) if bps.size else 0.0
    assert fat_dimension(F, top + 0.5)[0] == 0
