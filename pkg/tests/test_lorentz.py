import json
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shatterkit.core import Measure, lp_norm
from shatterkit.errors import InvalidParameter
from shatterkit.lorentz import (GeneratingFunction, LorentzBall, bisect_inverse, comparison_function,
                                double_exp_mean, lorentz_norm, lorentz_norm_bisection, power_law_comparison,
                                tower_norm)
from shatterkit.suites import load_fixtures

vals = st.floats(-1e3, 1e3, allow_nan=False, allow_subnormal=False)
vectors = arrays(float, st.integers(1, 10), elements=vals)
convex_generators = st.one_of(st.floats(1, 6).map(GeneratingFunction.power),
                              st.floats(3, 6).map(GeneratingFunction.tower))
generators = st.one_of(st.floats(1, 6).map(GeneratingFunction.power),
                       st.floats(2, 6).map(GeneratingFunction.tower))


def measures(n):
    return arrays(float, n, elements=st.floats(0.01, 1)).map(lambda w: Measure(w / w.sum()))


def test_norm_examples():
    for phi in (GeneratingFunction.power(1), GeneratingFunction.power(3), GeneratingFunction.tower(2)):
        assert lorentz_norm(np.ones(5), Measure([0.1, 0.2, 0.3, 0.2, 0.2]), phi) == pytest.approx(1.0, rel=1e-15)
    sq = GeneratingFunction.power(2)
    assert lorentz_norm([2, 1], Measure.uniform(2), sq) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert lorentz_norm_bisection([2, 1], Measure.uniform(2), sq) == pytest.approx(math.sqrt(2), rel=1e-9)
    for n in (1, 3, 10):
        f = np.zeros(n)
        f[0] = 1
        assert lorentz_norm(f, Measure.uniform(n), GeneratingFunction.power(1)) == pytest.approx(1 / n, rel=1e-15)


def test_tower_examples():
    mu = Measure.uniform(4)
    assert tower_norm(np.ones(4), mu) == 1.0
    assert tower_norm(2 * np.ones(4), mu, 2.0) == 2.0
    assert tower_norm(np.zeros(4), mu) == 0.0
    with pytest.raises(InvalidParameter):
        tower_norm(np.ones(4), mu, 1.5)


@given(vectors, generators, st.data())
def test_closed_form_matches_bisection(f, phi, data):
    mu = data.draw(measures(f.size))
    a = lorentz_norm(f, mu, phi)
    b = lorentz_norm_bisection(f, mu, phi)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-300)


@given(vectors, generators, st.floats(-50, 50))
def test_homogeneity(f, phi, c):
    mu = Measure.uniform(f.size)
    assert lorentz_norm(c * f, mu, phi) == pytest.approx(abs(c) * lorentz_norm(f, mu, phi), rel=1e-12, abs=1e-300)


def test_triangle_inequality_fails_for_weak_l1():
    # the tail-quantile functional is only a quasi-norm
    mu, phi = Measure.uniform(2), GeneratingFunction.power(1)
    f, g = np.array([1.0, 0.5]), np.array([0.5, 1.0])
    assert lorentz_norm(f, mu, phi) == lorentz_norm(g, mu, phi) == 0.5
    assert lorentz_norm(f + g, mu, phi) == 1.5


@given(vectors, convex_generators, st.data())
def test_quasi_triangle_factor_two(f, phi, data):
    g = data.draw(arrays(float, f.size, elements=vals))
    mu = data.draw(measures(f.size))
    lhs = lorentz_norm(f + g, mu, phi)
    assert lhs <= 2 * (lorentz_norm(f, mu, phi) + lorentz_norm(g, mu, phi)) * (1 + 1e-9) + 1e-300


def test_l2_dominated_by_tower_with_pinned_constant():
    C = load_fixtures()["constants"]["l2_tower_C"]
    rng = np.random.default_rng(5)
    for _ in range(500):
        n = int(rng.integers(1, 40))
        f = rng.standard_cauchy(n) * (rng.random(n) < rng.random())
        mu = Measure(rng.dirichlet(np.ones(n)))
        assert lp_norm(f, mu, 2) <= C * tower_norm(f, mu, 2.0) + 1e-12


def test_generator_basics():
    t2 = GeneratingFunction.tower(2)
    assert t2.is_normalized() and t2(0.5) == 0.5
    assert t2(2.0) == pytest.approx(math.e ** 2)
    assert not t2.is_convex() and GeneratingFunction.tower(3).is_convex()
    for y in (0.3, 1.0, 7.0, 1e6):
        for phi in (t2, GeneratingFunction.power(2.5)):
            assert phi(phi.inverse(y)) == pytest.approx(y, rel=1e-12)
            assert bisect_inverse(phi, y) == pytest.approx(phi.inverse(y), rel=1e-12)
    assert GeneratingFunction.parse("tower:3") == GeneratingFunction.tower(3)
    with pytest.raises(InvalidParameter):
        GeneratingFunction.parse("power:0.5")


def test_table_generator(tmp_path):
    path = tmp_path / "phi.json"
    path.write_text(json.dumps({"t": [1, 2, 3], "phi": [1, 3, 6]}))
    phi = GeneratingFunction.parse(f"table:{path}")
    assert phi(1.5) == 2.0 and phi(4.0) == 9.0
    assert phi.inverse(4.5) == pytest.approx(2.5, rel=1e-12)
    with pytest.raises(InvalidParameter):
        GeneratingFunction.table([1, 2], [2, 3])  # concave kink at 1


def test_double_exp_mean():
    assert double_exp_mean([0, 0], Measure.uniform(2)) == pytest.approx(math.e)


def test_ball():
    B = LorentzBall(GeneratingFunction.tower(2), Measure.uniform(3))
    assert B.contains(np.ones(3)) and not B.contains(1.01 * np.ones(3))


def test_comparison_examples():
    t1, t2 = GeneratingFunction.power(1), GeneratingFunction.power(2)
    assert comparison_function(t1, t2, 0.5) == pytest.approx(4.0, rel=1e-9)
    for phi in (t1, GeneratingFunction.tower(2)):
        assert comparison_function(phi, phi, 1.0) == math.inf


@given(st.sampled_from([(1, 2), (1, 3), (2, 3), (2, 5)]), st.floats(0.05, 0.95))
def test_comparison_power_law_and_lower_bound(pq, t):
    p, q = pq
    val = comparison_function(GeneratingFunction.power(p), GeneratingFunction.power(q), t)
    assert val == pytest.approx(power_law_comparison(p, q, t), rel=1e-6)
    assert val >= 1 / t * (1 - 1e-9)


@given(st.floats(0.05, 0.9), st.floats(2.1, 5))
def test_comparison_at_least_inverse_t_for_towers(t, alpha):
    val = comparison_function(GeneratingFunction.power(1), GeneratingFunction.tower(alpha), t)
    assert val >= 1 / t * (1 - 1e-9)


@given(st.sampled_from([(1, 2), (2, 4), (2, 64)]), st.floats(0.02, 0.98), st.floats(0.02, 0.98))
def test_comparison_nonincreasing_in_t(pq, a, b):
    assume(abs(a - b) > 1e-6)
    lo, hi = sorted((a, b))
    phi, psi = GeneratingFunction.power(pq[0]), GeneratingFunction.power(pq[1])
    assert comparison_function(phi, psi, lo) >= comparison_function(phi, psi, hi) * (1 - 1e-9)
