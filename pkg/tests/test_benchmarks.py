import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asoc.benchmarks import (
    DEFAULT_DIMENSIONS,
    catalog,
    evaluate,
    get_function,
    names,
)

TWO_D = [fn for fn in catalog() if fn.dimension == 2]


def test_catalog_order():
    cat = catalog()
    assert len(cat) == 18
    assert [fn.index for fn in cat] == list(range(1, 19))
    assert cat[1].name == "Sphere"
    assert cat[12].name == "Eggholder"
    assert [fn.key for fn in cat] == names()


def test_default_dimensions():
    cat = {fn.key: fn for fn in catalog()}
    for key, n in DEFAULT_DIMENSIONS.items():
        assert cat[key].dimension == n
    assert cat["sphere"].label == "Sphere (n=10)"
    assert cat["booth"].label == "Booth"


def test_catalog_dimension_overrides():
    cat = {fn.key: fn for fn in catalog(dimension=2, sphere=4)}
    assert cat["sphere"].dimension == 4
    assert cat["rosenbrock"].dimension == 2
    assert cat["styblinski_tang"].dimension == 2
    with pytest.raises(TypeError):
        catalog(booth=3)


@pytest.mark.parametrize("fn", catalog(), ids=lambda f: f.key)
def test_minimizers_reach_declared_minimum(fn):
    assert fn.minimizers
    for m in fn.minimizers:
        assert fn.domain.contains(np.array(m))
        assert abs(fn(np.array(m)) - fn.minimum) <= fn.tolerance


@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_parametric_minima(n):
    for key in ("sphere", "styblinski_tang"):
        fn = get_function(key, n)
        assert abs(fn(np.array(fn.minimizers[0])) - fn.minimum) <= fn.tolerance
    if n >= 2:
        fn = get_function("rosenbrock", n)
        assert fn(np.ones(n)) == 0.0


def test_tolerances_are_tight_where_optima_are_exact():
    loose = {fn.key for fn in catalog() if fn.tolerance > 1e-9}
    assert loose == {"cross_in_tray", "eggholder", "holder_table", "mccormick",
                     "schaffer_n4", "styblinski_tang"}


def test_easom_exact():
    assert abs(evaluate(get_function("easom"), [math.pi, math.pi]) + 1.0) <= 1e-12


@pytest.mark.parametrize(
    "name, dim, x, expected, tol",
    [
        ("ackley", None, [0, 0], 0.0, 1e-12),
        ("goldstein_price", None, [0, -1], 3.0, 1e-12),
        ("eggholder", None, [512, 404.2319], -959.6407, 1e-3),
        ("styblinski_tang", 2, [-2.903534, -2.903534], -78.332, 1e-3),
        ("sphere", 10, np.zeros(10), 0.0, 0.0),
        ("rosenbrock", 3, [1, 1, 1], 0.0, 0.0),
        ("booth", None, [1, 3], 0.0, 0.0),
        ("bukin_n6", None, [-10, 1], 0.0, 1e-12),
        ("levi_n13", None, [1, 1], 0.0, 1e-12),
        ("beale", None, [3, 0.5], 0.0, 0.0),
    ],
)
def test_known_values(name, dim, x, expected, tol):
    assert abs(evaluate(get_function(name, dim), x) - expected) <= tol


def test_hand_values_away_from_optima():
    # direct hand arithmetic
    assert get_function("booth")(np.array([0.0, 0.0])) == 74.0
    assert get_function("matyas")(np.array([1.0, 2.0])) == pytest.approx(0.26 * 5 - 0.48 * 2)
    assert get_function("three_hump_camel")(np.array([1.0, 1.0])) == pytest.approx(
        2 - 1.05 + 1 / 6 + 1 + 1
    )
    assert get_function("rosenbrock", 2)(np.array([0.0, 0.0])) == 1.0
    assert get_function("styblinski_tang", 1)(np.array([0.0])) == 0.0


@pytest.mark.parametrize("fn", TWO_D, ids=lambda f: f.key)
def test_local_minimality(fn):
    rng = np.random.default_rng(2024)
    for m in fn.minimizers:
        center = np.array(m)
        f0 = fn(center)
        directions = rng.standard_normal((100, 2))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = 0.01 * np.sqrt(rng.random(100))
        pts = fn.domain.clip(center + directions * radii[:, None])
        # declared minimizers are rounded, so allow the declared tolerance
        assert all(f0 <= fn(p) + fn.tolerance for p in pts)


finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=10, max_size=10))
def test_sphere_symmetric(xs):
    x = np.array(xs)
    fn = get_function("sphere")
    assert fn(x) == fn(-x)


@settings(max_examples=100, deadline=None)
@given(finite, finite)
def test_two_d_symmetries(a, b):
    matyas = get_function("matyas")
    assert matyas(np.array([a, b])) == pytest.approx(matyas(np.array([b, a])), abs=1e-12)
    ackley = get_function("ackley")
    assert ackley(np.array([a, b])) == pytest.approx(ackley(np.array([-a, -b])), abs=1e-12)
    cit = get_function("cross_in_tray")
    base = cit(np.array([a, b]))
    for sx, sy in ((1, -1), (-1, 1), (-1, -1)):
        assert cit(np.array([sx * a, sy * b])) == pytest.approx(base, abs=1e-12)


def test_evaluate_rejects_bad_input():
    booth = get_function("booth")
    with pytest.raises(ValueError, match="dimension"):
        evaluate(booth, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="outside"):
        evaluate(booth, [11.0, 0.0])
    with pytest.raises(ValueError, match="outside"):
        evaluate(get_function("bukin_n6"), [0.0, 0.0])


def test_lookup():
    assert get_function("Three-hump camel").key == "three_hump_camel"
    assert get_function("LEVI N.13").index == 9
    assert get_function(13).key == "eggholder"
    assert get_function("13").key == "eggholder"
    assert get_function("sphere").dimension == 10
    assert get_function("sphere", 3).dimension == 3
    assert get_function("booth", 2).dimension == 2


def test_lookup_errors():
    with pytest.raises(KeyError, match="sphere"):
        get_function("nosuch")
    with pytest.raises(KeyError):
        get_function(0)
    with pytest.raises(KeyError):
        get_function(19)
    with pytest.raises(ValueError):
        get_function("booth", 3)
    with pytest.raises(ValueError):
        get_function("rosenbrock", 1)
    with pytest.raises(ValueError):
        get_function("sphere", 0)
