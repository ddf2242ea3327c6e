from fractions import Fraction

import pytest

from hlmax.balls import (
    BRANCH, PAIR, SINGLETON, TIP_PAIR, TIPLESS, TRIPLE, WHOLE, average, ball, catalog,
    catalog_json, measure,
)
from hlmax.exceptions import DomainError
from hlmax.families import make_space
from hlmax.space import TestFunction, build_first_gen, build_second_gen, compose, distance

RADII = [Fraction(1, 2), 1, Fraction(3, 2), 2, Fraction(5, 2), 3]


def brute_ball(space, c, r):
    k = space.locate(c)
    return tuple(y for y in range(space.size) if distance(space, k, y) < r)


SPACES = {
    "xtilde1": lambda N: make_space("xtilde1", N),
    "xhat2": lambda N: make_space("xhat", N, "2"),
    "ytilde1": lambda N: make_space("ytilde1", N),
    "yhat2": lambda N: make_space("yhat", N, "2"),
    "composite": lambda N: compose(make_space("xtilde1", N), make_space("ytilde1", N)),
}


@pytest.mark.parametrize("name", sorted(SPACES))
@pytest.mark.parametrize("N", [1, 2, 4, 6])
def test_ball_matches_metric(name, N):
    S = SPACES[name](N)
    if S.size > 400:
        pytest.skip("exhaustive check kept to small spaces")
    for c in range(S.size):
        for r in RADII:
            assert ball(S, c, r).members == brute_ball(S, c, r)


@pytest.mark.parametrize("name", sorted(SPACES))
def test_catalog_complete_and_distinct(name):
    S = SPACES[name](3)
    cat = catalog(S)
    sets = [b.members for b in cat]
    assert len(sets) == len(set(sets))
    expected = {brute_ball(S, c, r) for c in range(S.size) for r in (1, 2, 3)}
    assert set(sets) == expected


def test_catalog_counts_first_gen():
    # tau = (1, 2): 5 singletons, pairs {x1,x11} (= S_1), {x2,x21}, {x2,x22}, S_2, whole
    X = make_space("xtilde1", 2)
    cat = catalog(X)
    assert len(cat) == 10
    kinds = [b.kind for b in cat]
    assert kinds.count(SINGLETON) == 5
    assert kinds.count(PAIR) == 3
    assert kinds.count(BRANCH) == 1
    assert kinds.count(WHOLE) == 1


def test_catalog_counts_second_gen():
    # one branch with a single satellite: triple {y1, y11, y11'} is the whole space
    Y = build_second_gen((1,), lambda n, i: 2, 1)
    cat = catalog(Y)
    assert len(cat) == 6
    kinds = sorted(b.kind for b in cat)
    assert kinds.count(SINGLETON) == 3
    assert TIP_PAIR in kinds and TIPLESS in kinds and TRIPLE in kinds
    assert [b.members for b in cat if b.kind == TIPLESS] == [(0, 1)]


def test_catalog_second_gen_larger():
    Y = make_space("ytilde1", 3)  # tau = 1, 2, 3: 6 satellites
    kinds = [b.kind for b in catalog(Y)]
    assert kinds.count(TIP_PAIR) == 6
    assert kinds.count(TRIPLE) == 6
    assert kinds.count(TIPLESS) == 3   # {y1, y11} has two points but is not a tip pair
    assert kinds.count(WHOLE) == 1


def test_composite_has_single_whole():
    Z = compose(make_space("xtilde1", 2), make_space("ytilde1", 2))
    wholes = [b for b in catalog(Z) if b.kind == WHOLE]
    assert len(wholes) == 1 and len(wholes[0]) == Z.size
    assert ball(Z, "x1", 3).members == tuple(range(Z.size))


def test_ball_shapes():
    X = make_space("xhat", 3, "2")
    assert ball(X, "x2", Fraction(3, 2)).kind == BRANCH
    assert ball(X, "x2,3", Fraction(3, 2)).names(X) == ["x2", "x2,3"]
    Y = make_space("yhat", 2, "2")
    assert ball(Y, "y2,1'", Fraction(3, 2)).kind == TIP_PAIR
    assert ball(Y, "y2,1", Fraction(3, 2)).kind == TRIPLE
    assert ball(Y, "y1", Fraction(1, 2)).names(Y) == ["y1"]
    with pytest.raises(DomainError):
        ball(Y, "y1", 0)


def test_catalog_json():
    import json
    doc = json.loads(catalog_json(make_space("xtilde1", 2)))
    assert {"class": "pair", "members": ["x1", "x1,1"]} in doc


def test_average_examples():
    X = make_space("xtilde1", 2)
    d = TestFunction.delta(X, "x1")
    assert average(X, d, ball(X, "x1", 2)) == Fraction(1, 3)
    c = TestFunction.constant(X, 7)
    for b in catalog(X):
        assert average(X, c, b) == 7
    H = make_space("xhat", 4, "2")
    for n in range(1, 5):
        f = TestFunction.delta(H, f"x{n}")
        assert average(H, f, [f"x{n}", f"x{n},1"]) == Fraction(1, n + 1)
    with pytest.raises(DomainError):
        average(X, d, [])
    assert measure(X, ["x1", "x1,1"]) == 3


def test_average_between_min_and_max():
    Y = make_space("ytilde1", 3)
    vals = [Fraction((7 * k) % 5, 3) for k in range(Y.size)]
    f = TestFunction.from_values(Y, vals)
    for b in catalog(Y):
        part = [vals[k] for k in b.members]
        assert min(part) <= average(Y, f, b) <= max(part)
