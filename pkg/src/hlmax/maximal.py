"""Centred and non-centred Hardy-Littlewood maximal functions, evaluated exactly.

``centered_maximal`` scans the three distinct centred balls at each point and
``noncentered_maximal`` every catalog ball through it; both run in time
linear in the number of points.  ``brute_force_maximal`` recomputes the same
quantities from the metric alone and serves as the independent oracle.

Witness balls are argmax balls; ties go to the ball with fewer members, then
to the lexicographically smaller member list.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass

from . import numeric as num
from .balls import Ball, ball_table
from .exceptions import DomainError
from .space import Space, TestFunction, distance

CENTERED = "centered"
NONCENTERED = "noncentered"
OPERATORS = (CENTERED, NONCENTERED)


@dataclass(frozen=True, eq=False)
class MaximalResult:
    space: Space
    operator: str
    values: tuple
    witnesses: tuple

    def __getitem__(self, point):
        return self.values[self.space.locate(point)]

    def witness(self, point) -> Ball:
        return self.witnesses[self.space.locate(point)]


def _values(space: Space, f) -> tuple:
    if isinstance(f, TestFunction):
        if f.space is not space and f.space.size != space.size:
            raise DomainError("test function lives on a different space")
        return f.values
    vals = tuple(num.scalar(v) for v in f)
    if len(vals) != space.size:
        raise DomainError(f"function has {len(vals)} values, space has {space.size} points")
    for k, v in enumerate(vals):
        if v < 0:
            raise DomainError(f"negative value {v} at {space.points[k]}; pass |f|")
    return vals


def check_operator(operator: str) -> str:
    if operator not in OPERATORS:
        raise DomainError(f"operator must be one of {OPERATORS}, got {operator!r}")
    return operator


def _evaluate(space: Space, f, centered: bool) -> MaximalResult:
    vals = _values(space, f)
    mu = space.masses
    table = ball_table(space)
    weighted = [v * m if v else num.ZERO for v, m in zip(vals, mu)]
    prefix = [num.ZERO]
    for w in weighted:
        prefix.append(prefix[-1] + w if w else prefix[-1])
    # every distinct ball's average, computed once
    avgs = []
    for bl, m, span in zip(table.balls, table.ball_mass, table.spans):
        members = bl.members
        if len(members) == 1:
            avgs.append(vals[members[0]])
        elif span is not None:
            avgs.append((prefix[span[1]] - prefix[span[0]]) / m)
        else:
            top = num.ZERO
            for k in members:
                top += weighted[k]
            avgs.append(top / m)
    pick = avgs.__getitem__
    # candidate lists are sorted in tie-break order and max keeps the first maximum
    cands = table.centered_idx if centered else table.containing_idx
    best = [max(c, key=pick) for c in cands]
    balls = table.balls
    return MaximalResult(space, CENTERED if centered else NONCENTERED,
                         tuple(avgs[b] for b in best), tuple(balls[b] for b in best))


def centered_maximal(space: Space, f) -> MaximalResult:
    """``M^c f``: best average over ``B(x, 1)``, ``B(x, 2)``, ``B(x, 3)``."""
    return _evaluate(space, f, centered=True)


def noncentered_maximal(space: Space, f) -> MaximalResult:
    """``M f``: best average over all balls containing ``x``."""
    return _evaluate(space, f, centered=False)


def maximal(space: Space, f, operator: str) -> MaximalResult:
    check_operator(operator)
    return _evaluate(space, f, centered=operator == CENTERED)


# oracle -------------------------------------------------------------------

_brute_cache: "weakref.WeakKeyDictionary[Space, tuple]" = weakref.WeakKeyDictionary()


def _brute_balls(space: Space):
    cached = _brute_cache.get(space)
    if cached is None:
        P = space.size
        centred = []
        for c in range(P):
            row = []
            for r in (1, 2, 3):
                row.append(tuple(y for y in range(P) if distance(space, c, y) < r))
            centred.append(row)
        distinct = sorted({m for row in centred for m in row}, key=lambda m: (len(m), m))
        cached = _brute_cache[space] = (centred, distinct)
    return cached


def brute_force_maximal(space: Space, f, operator: str) -> MaximalResult:
    """Same contract as the catalog evaluators, built from ``distance`` only."""
    check_operator(operator)
    vals = _values(space, f)
    mu = space.masses
    centred, distinct = _brute_balls(space)

    def mean(members):
        top = num.ZERO
        bottom = num.ZERO
        for y in members:
            top += vals[y] * mu[y]
            bottom += mu[y]
        return top / bottom

    out_v, out_b = [], []
    if operator == CENTERED:
        for c in range(space.size):
            best = None
            for m in centred[c]:
                v = mean(m)
                if best is None or v > best[0]:
                    best = (v, m)
            out_v.append(best[0])
            out_b.append(Ball("unclassified", best[1]))
    else:
        means = [mean(m) for m in distinct]
        for x in range(space.size):
            best = None
            # distinct is sorted by (size, members): first strict max wins ties
            for m, v in zip(distinct, means):
                if x in m and (best is None or v > best[0]):
                    best = (v, m)
            out_v.append(best[0])
            out_b.append(Ball("unclassified", best[1]))
    return MaximalResult(space, operator, tuple(out_v), tuple(out_b))

