import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import max_packing_brute
from shatterkit.core import Measure
from shatterkit.errors import InvalidParameter, ResourceLimit
from shatterkit.lorentz import GeneratingFunction
from shatterkit.packing import (BodySpec, box_grid, covering_number, distance_matrix, entropy, entropy_linfty,
                                greedy_cover, kp_entropy_lower, max_clique, packing_number, separated)

L2 = BodySpec("lp", 2.0)
point_sets = st.integers(1, 4).flatmap(
    lambda n: arrays(float, st.tuples(st.integers(1, 9), st.just(n)), elements=st.integers(-3, 3)))
bodies = st.sampled_from([L2, BodySpec("lp", 1.0), BodySpec("lp", math.inf), BodySpec("cube"),
                          BodySpec("lorentz", generator=GeneratingFunction.tower(2))])


def test_packing_examples():
    F = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert packing_number(F, L2, 1.0)[0] == 2
    for n in range(3, 9):
        for t in (math.sqrt(2 / n), 0.3 * math.sqrt(2 / n)):
            N, cert = packing_number(np.eye(n), L2, t)
            assert N == n and cert.exact and cert.verify()
    assert packing_number(np.eye(4), L2, 2.0)[0] == 1


def test_entropy_examples():
    assert entropy(np.eye(4), L2, 0.5) == math.log(4)
    assert entropy(np.array([[1.0, 2.0]]), L2, 0.1) == 0.0
    for n in (3, 5):
        assert entropy_linfty(np.eye(n), 0.5) == math.log(n)
    assert entropy_linfty(np.eye(3), 2.5) == 0.0


def test_kp_examples():
    val, mu = kp_entropy_lower(np.eye(4), 0.5, budget=50, seed=3)
    assert val == math.log(4)
    two = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    assert kp_entropy_lower(two, 0.9, budget=80)[0] == pytest.approx(math.log(2))


def test_kp_at_least_uniform():
    rng = np.random.default_rng(2)
    for _ in range(10):
        F = rng.uniform(-1, 1, size=(8, 4))
        t = 0.4
        assert kp_entropy_lower(F, t, budget=30)[0] >= entropy(F, L2, t)


def test_kp_matches_dense_grid_on_four_atoms():
    # dense grid over the simplex on 4 atoms as an independent search
    F = np.eye(4)
    best = 0.0
    steps = np.arange(0, 21) / 20
    for w in itertools.product(steps, repeat=3):
        if sum(w) <= 1:
            mu = Measure(np.r_[w, 1 - sum(w)].clip(0))
            best = max(best, entropy(F, BodySpec("lp", 2.0, mu), 0.5))
    assert kp_entropy_lower(F, 0.5, budget=100)[0] == pytest.approx(best)


def test_cover_examples():
    assert covering_number(box_grid((3, 2), 0.5), BodySpec("cube"), "greedy") == (6, 6)
    assert covering_number(np.array([[0.2, 0.3], [0.9, 0.1]]), BodySpec("cube")) == (1, 1)
    assert covering_number(np.array([[0.0], [2.0], [4.0]]), BodySpec("cube")) == (3, 3)


def test_box_identity_small():
    for sides in itertools.product(range(4), repeat=2):
        lo, up = covering_number(box_grid(sides, 0.5), BodySpec("cube"))
        assert lo == up == np.prod([max(a, 1) for a in sides])


def test_cap_enforced():
    with pytest.raises(ResourceLimit):
        packing_number(np.arange(50.0).reshape(-1, 1), L2, 0.5, cap=40)
    assert packing_number(np.arange(50.0).reshape(-1, 1), L2, 0.5, mode="greedy")[0] >= 1


def test_bad_inputs():
    with pytest.raises(InvalidParameter):
        packing_number(np.eye(2), L2, 0.0)
    with pytest.raises(InvalidParameter):
        BodySpec("ellipsoid", matrix=np.array([1.0, -1.0]))


def test_ellipsoid_distance():
    body = BodySpec.parse("ellipsoid:4,1", 2)
    D = distance_matrix(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), body)
    assert D[0, 1] == pytest.approx(2.0) and D[0, 2] == pytest.approx(1.0)


@given(point_sets, bodies, st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_exact_packing_matches_brute_force(P, body, t):
    D = distance_matrix(P, body)
    N, cert = packing_number(P, body, t)
    adj = separated(D, t)
    clique = max_clique(adj)
    # brute force over distinct rows; duplicates sit at distance 0
    _, first = np.unique(P, axis=0, return_index=True)
    assert N == len(clique) == max_packing_brute(D[np.ix_(first, first)], t * (1 - 1e-12))
    assert cert.verify()


@given(point_sets, bodies, st.sampled_from([0.5, 1.0, 2.0]))
def test_entropy_antitone(P, body, t):
    assert entropy(P, body, t) >= entropy(P, body, 1.5 * t)


@given(point_sets, st.sampled_from([0.5, 1.0, 2.0]), st.data())
def test_sup_dominates_l2(P, t, data):
    w = np.array(data.draw(st.lists(st.floats(0.01, 1), min_size=P.shape[1], max_size=P.shape[1])))
    mu = Measure(w / w.sum())
    assert entropy_linfty(P, t) >= entropy(P, BodySpec("lp", 2.0, mu), t)


@given(point_sets, bodies, st.sampled_from([0.5, 1.0, 2.0]))
def test_covering_sandwich(P, body, r):
    body = BodySpec(body.kind, body.p, generator=body.generator, radius=r)
    lo, up = covering_number(P, body)
    centers = greedy_cover(P, body)
    assert len(centers) == up
    # every point lies in one of the chosen translates
    if body.kind == "cube":
        ok = [any(np.all((x >= c - 1e-12) & (x <= c + r + 1e-12)) for c in centers) for x in P]
    else:
        ok = [any(body.norm(x - c) <= r * (1 + 1e-12) for c in centers) for x in P]
    assert all(ok)
    assert lo <= up <= len(np.unique(P, axis=0))
    assert covering_number(P, body, "greedy")[1] == up
    # packing at separation 2r never exceeds a cover by r-translates
    if body.kind != "cube":
        strict_pack = packing_number(P, body, 2 * r * (1 + 1e-9))[0]
        assert strict_pack <= up
