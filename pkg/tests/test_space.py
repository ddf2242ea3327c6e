"""Construction, metric and serialization of the truncated spaces."""
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from hlmax import numeric as num
from hlmax.exceptions import ConstructionError, DomainError
from hlmax.families import make_space
from hlmax.space import (
    COMPOSITE, PointId, Space, TestFunction, build_first_gen, build_second_gen, compose,
    distance, halving_defects, total_mass_closed_form,
)


def hand_masses_first(tau, F):
    """Independent recursion with Fractions: d_1 = 1, |S_n| = |S_{n-1}| / 2."""
    out = []
    prev = None
    for n, t in enumerate(tau, start=1):
        ws = [Fraction(F(n, i)) for i in range(1, t + 1)]
        d = Fraction(1) if n == 1 else prev / 2 / (1 + sum(ws))
        out.append([d] + [d * w for w in ws])
        prev = d * (1 + sum(ws))
    return out


def test_first_gen_example_xtilde1():
    X = build_first_gen((1, 2), lambda n, i: 2 ** i, 2)
    assert X.branches[0].d == 1
    assert X.branches[0].mass == 3
    assert X.branches[1].d == Fraction(3, 14)
    assert X.masses[2:] == (Fraction(3, 14), Fraction(3, 7), Fraction(6, 7))


def test_first_gen_example_xhat2():
    X = build_first_gen((4, 4, 5), lambda n, i: n, 3)
    assert X.branches[0].mass == 5
    assert X.branches[1].d == Fraction(5, 18)


def test_single_branch_total():
    X = build_first_gen((3,), lambda n, i: i, 1)
    assert X.total_mass == 1 + 1 + 2 + 3
    Y = build_second_gen((3,), lambda n, i: i, 1)
    assert Y.total_mass == 2 + 1 + 2 + 3


def test_second_gen_examples():
    Y = build_second_gen((1,), lambda n, i: 2, 1)
    assert Y.masses == (1, 1, 2)
    assert Y.total_mass == 4
    Y = build_second_gen((1, 2), lambda n, i: 2 ** i, 2)
    assert Y.branches[0].mass == 4
    assert Y.branches[1].mass == 2
    assert Y.branches[1].d == Fraction(1, 4)


def test_masses_match_hand_recursion():
    tau = (2, 3, 1, 4)
    F = lambda n, i: Fraction(n + i, i)
    X = build_first_gen(tau, F, 4)
    flat = [m for row in hand_masses_first(tau, F) for m in row]
    assert list(X.masses) == flat


def test_invalid_construction():
    with pytest.raises(ConstructionError):
        build_first_gen((0,), lambda n, i: 1, 1)
    with pytest.raises(ConstructionError):
        build_first_gen((2,), lambda n, i: 0, 1)
    with pytest.raises(ConstructionError):
        build_second_gen((1,), lambda n, i: -1, 1)
    with pytest.raises(ConstructionError):
        build_first_gen((1,), lambda n, i: 1, 0)


def test_point_names():
    Y = build_second_gen((2,), lambda n, i: 1, 1)
    names = [str(p) for p in Y.points]
    assert names == ["y1", "y1,1", "y1,2", "y1,1'", "y1,2'"]
    for nm in names:
        assert str(PointId.parse(nm)) == nm
    with pytest.raises(DomainError):
        Y.locate("x1")
    with pytest.raises(DomainError):
        Y.locate("y1,3")


def edges(space):
    """Distance-1 pairs listed straight from the branch descriptions."""
    out = set()
    for b in space.branches:
        c = b.component
        for i in range(1, b.tau + 1):
            out.add(frozenset({f"{c}{b.n}", f"{c}{b.n},{i}"}))
            if b.generation == "second":
                out.add(frozenset({f"{c}{b.n},{i}", f"{c}{b.n},{i}'"}))
    return out


@pytest.mark.parametrize("space", [
    build_first_gen((1, 2, 3), lambda n, i: 1, 3),
    build_second_gen((2, 1, 3), lambda n, i: 1, 3),
    compose(build_first_gen((2,), lambda n, i: 1, 1), build_second_gen((2,), lambda n, i: 1, 1)),
], ids=["first", "second", "composite"])
def test_distance_against_edge_list(space):
    E = edges(space)
    names = [str(p) for p in space.points]
    for a, b in product(names, names):
        expected = 0 if a == b else (1 if frozenset({a, b}) in E else 2)
        assert distance(space, a, b) == expected


def test_distance_examples():
    Z = compose(make_space("xtilde1", 2), make_space("ytilde1", 2))
    assert distance(Z, "x1", "x1,1") == 1
    assert distance(Z, "x2,1", "x2,2") == 2
    assert distance(Z, "y2", "y2,1'") == 2
    assert distance(Z, "x1", "y1") == 2


def test_triangle_inequality_exhaustive():
    for space in (make_space("xtilde1", 3), make_space("ytilde1", 3)):
        P = range(space.size)
        D = [[distance(space, a, b) for b in P] for a in P]
        for a, b, c in product(P, P, P):
            assert D[a][c] <= D[a][b] + D[b][c]


def test_compose():
    X = build_first_gen((2,), lambda n, i: 1, 1)
    Y = build_second_gen((1,), lambda n, i: 2, 1)
    Z = compose(X, Y)
    assert Z.generation == COMPOSITE
    assert Z.size == 6
    assert Z.total_mass == X.total_mass + Y.total_mass
    assert Z.masses == X.masses + Y.masses
    with pytest.raises(ConstructionError):
        compose(Y, X)


@pytest.mark.parametrize("family,p0,N", [
    ("xtilde1", None, 9), ("xhat", "2", 8), ("ytilde1", None, 7), ("yhat", "3/2", 8),
    ("xtilde", "2", 6), ("ytilde", "3/2", 6),
])
def test_halving_and_closed_form(family, p0, N):
    S = make_space(family, N, p0)
    assert halving_defects(S) == []
    assert num.eq(S.total_mass, total_mass_closed_form(S))
    # non-doubling witness: the last root is tiny compared to the first
    assert S.masses[S.branches[-1].root] < S.masses[0] / 2 ** (N - 2)
    assert all(m > 0 for m in S.masses)


def test_rescale():
    X = build_first_gen((2, 2), lambda n, i: 1, 2, scale=3)
    assert X.branches[0].d == 3
    assert X.branches[1].mass == X.branches[0].mass / 2


@pytest.mark.parametrize("family,p0,N", [
    ("xhat", "2", 4), ("ytilde1", None, 3), ("xtilde", "2", 4), ("yhat", "inf", 3),
])
def test_json_round_trip(family, p0, N):
    S = make_space(family, N, p0)
    T = Space.from_json(S.to_json())
    assert T.masses == S.masses
    assert T.generation == S.generation
    assert [b.runs for b in T.branches] == [b.runs for b in S.branches]


def test_json_round_trip_composite():
    Z = compose(make_space("xhat", 3, "3/2"), make_space("ytilde1", 2))
    W = Space.from_dict(Z.to_dict())
    assert W.masses == Z.masses
    assert W.size == Z.size


def test_json_rejects_broken_halving():
    doc = make_space("xtilde1", 3).to_dict()
    doc["branches"][2]["d"] = {"value": "1", "exact": True}
    with pytest.raises(ConstructionError):
        Space.from_dict(doc)


def test_test_function_validation():
    X = make_space("xtilde1", 2)
    with pytest.raises(DomainError):
        TestFunction.from_values(X, [1, 2])
    with pytest.raises(DomainError):
        TestFunction.from_values(X, [1, -1, 0, 0, 0])
    f = TestFunction.from_mapping(X, {"x2,1": 3})
    assert f["x2,1"] == 3 and f.support() == [3]


@given(st.lists(st.integers(1, 4), min_size=1, max_size=5),
       st.lists(st.fractions(min_value=Fraction(1, 8), max_value=8), min_size=1, max_size=4))
def test_halving_property(tau, weights):
    F = lambda n, i: weights[(n + i) % len(weights)]
    for build in (build_first_gen, build_second_gen):
        S = build(tuple(tau), F, len(tau))
        assert halving_defects(S) == []
        assert S.total_mass == total_mass_closed_form(S)
