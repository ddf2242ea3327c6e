from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hlmax import numeric as num
from hlmax.exceptions import DomainError
from hlmax.families import make_space
from hlmax.maximal import centered_maximal, noncentered_maximal
from hlmax.norms import (
    ascend_norm, conjugate_exponent, level_set, lp_norm, random_profile, rng_for, type_ratio,
    weak_lp,
)
from hlmax.space import TestFunction

X1 = make_space("xtilde1", 1)   # x1 of mass 1 and x11 of mass 2
X3 = make_space("xtilde1", 3)
Y3 = make_space("ytilde1", 3)
H3 = make_space("xhat", 3, "2")


def test_delta_power_is_root_mass():
    for n in (1, 2, 3):
        f = TestFunction.delta(H3, f"x{n}")
        for p in (1, 2, Fraction(3, 2), 3):
            assert lp_norm(H3, f, p).power == H3.masses[H3.branch(n).root]


def test_constant_one_gives_total_mass():
    total = sum(Y3.masses)
    for p in (1, 2, 3):
        assert lp_norm(Y3, TestFunction.constant(Y3, 1), p).power == total
    assert lp_norm(Y3, TestFunction.constant(Y3, 1), "inf").power == 1


def test_profile_example():
    assert list(X1.masses) == [1, 2]
    g = centered_maximal(X1, TestFunction.delta(X1, "x1"))
    assert list(g.values) == [1, Fraction(1, 3)]
    assert lp_norm(X1, g, 1).power == Fraction(5, 3)
    w = weak_lp(X1, g, 1)
    assert w.power == 1
    assert w.exact


def test_indicator_weak_norm():
    E = ["y1", "y1,1", "y2"]
    f = TestFunction.indicator(Y3, E)
    f = TestFunction.from_values(Y3, [4 * v for v in f.values])
    mass = sum(Y3.masses[Y3.locate(p)] for p in E)
    assert weak_lp(Y3, f, 1).power == 4 * mass
    assert weak_lp(Y3, f, 2).power == 16 * mass
    assert num.eq(weak_lp(Y3, f, Fraction(3, 2)).value, 4 * num.root(mass, Fraction(3, 2)))


def test_bad_exponents():
    g = [1, 1]
    with pytest.raises(DomainError):
        lp_norm(X1, g, Fraction(1, 2))
    with pytest.raises(DomainError):
        weak_lp(X1, g, "inf")
    with pytest.raises(DomainError):
        type_ratio(X1, [0, 0], 1, "centered", "strong")
    with pytest.raises(DomainError):
        type_ratio(X1, [1, 0], 1, "centered", "medium")


def test_level_sets():
    g = noncentered_maximal(Y3, TestFunction.delta(Y3, "y2"))
    lam = sorted(set(g.values))
    masses = [level_set(Y3, g, t).mass for t in [0] + lam]
    assert all(a >= b for a, b in zip(masses, masses[1:]))
    assert level_set(Y3, g, lam[-1]).mass == 0


def grid_weak(space, g, p, steps=4000):
    """sup over a dense lambda grid of lambda**p * |{g > lambda}|."""
    top = max(g)
    best = num.ZERO
    for i in range(1, steps):
        lam = top * Fraction(i, steps)
        best = max(best, lam ** p * level_set(space, g, lam).mass)
    return best


@pytest.mark.parametrize("p", [1, 2, 3])
def test_weak_matches_lambda_grid(p):
    for name in ("y1", "y2", "y3"):
        g = list(noncentered_maximal(Y3, TestFunction.delta(Y3, name)).values)
        exact = weak_lp(Y3, g, p).power
        approx = grid_weak(Y3, g, p)
        assert approx <= exact
        assert approx >= exact * (1 - Fraction(1, 250)) ** p


fracs = st.lists(st.fractions(min_value=0, max_value=20, max_denominator=9),
                 min_size=Y3.size, max_size=Y3.size)


@given(fracs, st.sampled_from([1, 2, 3, Fraction(3, 2)]))
def test_weak_below_strong(vals, p):
    if not any(vals):
        return
    w, s = weak_lp(Y3, vals, p), lp_norm(Y3, vals, p)
    assert w.power <= s.power or num.eq(w.power, s.power)


def test_type_ratio_constant_is_one():
    for op in ("centered", "noncentered"):
        for p in (1, 2, "inf"):
            rep = type_ratio(H3, TestFunction.constant(H3, 3), p, op, "strong")
            assert rep.power_ratio == 1
            assert rep.ratio == 1


def test_type_ratio_examples():
    Y = make_space("ytilde1", 8)
    for n in range(1, 9):
        rep = type_ratio(Y, TestFunction.delta(Y, f"y{n}"), 1, "noncentered", "strong")
        assert rep.exact
        assert rep.power_ratio >= Fraction(n, 2)
    H = make_space("xhat", 8, "2")
    for n in range(1, 9):
        rep = type_ratio(H, TestFunction.delta(H, f"x{n}"), 1, "centered", "weak")
        assert rep.power_ratio >= Fraction(n * H.branch(n).tau, 2 * (n + 1))


def test_ratio_reproducible_from_witness():
    rep = ascend_norm(X3, 1, "noncentered", "weak", restarts=2, seed=4, max_passes=3)
    again = type_ratio(X3, rep.f, 1, "noncentered", "weak")
    assert again.power_ratio == rep.power_ratio


def test_random_profile_deterministic():
    a = random_profile(Y3, rng_for(9, 2))
    b = random_profile(Y3, rng_for(9, 2))
    c = random_profile(Y3, rng_for(9, 3))
    assert a.values == b.values
    assert a.values != c.values
    assert all(v >= 0 for v in a.values) and any(a.values)


def test_ascent_properties():
    runs = [ascend_norm(X3, 1, "noncentered", "weak", restarts=r, seed=1, max_passes=4) for r in (1, 3, 5)]
    ratios = [r.power_ratio for r in runs]
    assert ratios == sorted(ratios)
    again = ascend_norm(X3, 1, "noncentered", "weak", restarts=5, seed=1, max_passes=4)
    assert again.power_ratio == ratios[-1] and again.f.values == runs[-1].f.values
    deltas = [type_ratio(X3, TestFunction.delta(X3, k), 1, "noncentered", "weak").power_ratio
              for k in range(X3.size)]
    assert ratios[0] >= max(deltas)
    assert 1 <= ratios[-1] <= 2
    with pytest.raises(DomainError):
        ascend_norm(X3, 1, restarts=0)


def test_ascent_yhat_centered_strong_below_five():
    Y = make_space("yhat", 3, "2")
    rep = ascend_norm(Y, 1, "centered", "strong", restarts=3, seed=2, max_passes=4)
    assert 1 <= rep.power_ratio <= 5


def test_conjugate_exponent():
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(Fraction(3, 2)) == 3
    assert conjugate_exponent(3) == Fraction(3, 2)
    assert num.is_inf(conjugate_exponent(1))
