"""Open balls of the truncated spaces and measure-weighted averages.

All distances lie in {0, 1, 2}, so every open ball is ``B(c, 1)`` (a
singleton), ``B(c, 2)`` or ``B(c, 3)`` (the whole space).  The radius-2 ball
depends only on the role of the centre:

========================  ==================================
centre                    ``B(c, r)`` for ``1 < r <= 2``
========================  ==================================
root ``x_n``              branch ``S_n``
satellite ``x_{n,i}``     pair ``{x_n, x_{n,i}}``
root ``y_n``              tipless branch ``{y_n, y_{n,1..}}``
satellite ``y_{n,i}``     triple ``{y_n, y_{n,i}, y'_{n,i}}``
tip ``y'_{n,i}``          tip pair ``{y_{n,i}, y'_{n,i}}``
========================  ==================================

When two descriptions give the same member set (``S_n`` with ``tau_n = 1`` is
also a pair) the ball is tagged with the more specific class.
"""
from __future__ import annotations

import json
import weakref
from dataclasses import dataclass

from . import numeric as num
from .exceptions import DomainError
from .space import FIRST, Space

SINGLETON = "singleton"
PAIR = "pair"
BRANCH = "branch"
TIPLESS = "tipless_branch"
TRIPLE = "triple"
TIP_PAIR = "tip_pair"
WHOLE = "whole"

SPECIFICITY = {SINGLETON: 0, PAIR: 1, TIP_PAIR: 1, TRIPLE: 2, BRANCH: 3, TIPLESS: 3, WHOLE: 4}

CANONICAL_RADII = (1, 2, 3)


@dataclass(frozen=True)
class Ball:
    kind: str
    members: tuple

    def __len__(self):
        return len(self.members)

    def __contains__(self, k):
        return k in self.members

    def names(self, space: Space) -> list:
        return [str(space.points[k]) for k in self.members]


def precedes(a: Ball, b: Ball) -> bool:
    """Tie-break order: fewer members first, then lexicographic member order."""
    if len(a) != len(b):
        return len(a) < len(b)
    return a.members < b.members


class BallTable:
    """Canonical Ball objects for one space, shared by every evaluation."""

    def __init__(self, space: Space):
        self.space = space
        P = space.size
        single_branch = space.generation != "composite" and len(space.branches) == 1
        whole = tuple(range(P))
        self.singles = tuple(Ball(SINGLETON, (k,)) for k in range(P))
        self.whole = Ball(WHOLE, whole)
        # per-branch families, indexed like space.branches
        self.core = []     # S_n or the tipless branch
        self.pairs = []    # first gen: {x_n, x_ni}
        self.triples = []  # second gen: {y_n} u T_ni
        self.tip_pairs = []
        for b in space.branches:
            r = b.root
            if b.generation == FIRST:
                members = tuple(range(b.start, b.stop))
                if b.tau == 1:
                    core = Ball(PAIR, members)
                    pairs = [core]
                else:
                    core = Ball(BRANCH, members)
                    pairs = [Ball(PAIR, (r, b.satellite(i))) for i in range(1, b.tau + 1)]
                if single_branch:
                    self.whole = core
                self.core.append(core)
                self.pairs.append(pairs)
                self.triples.append(None)
                self.tip_pairs.append(None)
            else:
                core = Ball(TIPLESS, tuple(range(b.start, b.start + 1 + b.tau)))
                self.core.append(core)
                self.pairs.append(None)
                tri = [Ball(TRIPLE, (r, b.satellite(i), b.tip(i))) for i in range(1, b.tau + 1)]
                if single_branch and b.tau == 1:
                    self.whole = tri[0]
                self.triples.append(tri)
                self.tip_pairs.append([Ball(TIP_PAIR, (b.satellite(i), b.tip(i))) for i in range(1, b.tau + 1)])
        self._index()

    def _index(self):
        """Number the distinct balls in tie-break order and sort candidate lists by it.

        With candidates in this order, ``max(candidates, key=average)`` returns
        the first maximal ball, which is exactly the tie-break winner.
        """
        uniq = {}
        for k in range(self.space.size):
            for bl in self.containing(k):
                uniq.setdefault(id(bl), bl)
        self.balls = sorted(uniq.values(), key=lambda bl: (len(bl), bl.members))
        pos = {id(bl): i for i, bl in enumerate(self.balls)}
        mu = self.space.masses
        self.ball_mass = [sum((mu[k] for k in bl.members), num.ZERO) for bl in self.balls]
        # long balls are index ranges; evaluators sum them from prefix sums
        self.spans = []
        for bl in self.balls:
            m = bl.members
            if len(m) > 3 and m[-1] - m[0] + 1 == len(m):
                self.spans.append((m[0], m[-1] + 1))
            else:
                self.spans.append(None)
        self.centered_idx = []
        self.containing_idx = []
        for k in range(self.space.size):
            self.centered_idx.append(tuple(sorted({pos[id(bl)] for bl in self.centered(k)})))
            self.containing_idx.append(tuple(sorted({pos[id(bl)] for bl in self.containing(k)})))

    def radius_two(self, k: int) -> Ball:
        """``B(c, r)`` for ``1 < r <= 2`` with centre index ``k``."""
        pos = self.space.owner[k]
        b = self.space.branches[pos]
        i = k - b.start
        if i == 0:
            return self.core[pos]
        if b.generation == FIRST:
            return self.pairs[pos][i - 1]
        if i <= b.tau:
            return self.triples[pos][i - 1]
        return self.tip_pairs[pos][i - b.tau - 1]

    def centered(self, k: int) -> tuple:
        """The three distinct centred balls at ``k``, smallest first."""
        return (self.singles[k], self.radius_two(k), self.whole)

    def containing(self, k: int) -> list:
        """Every catalog ball containing ``k`` (may repeat an object)."""
        pos = self.space.owner[k]
        b = self.space.branches[pos]
        i = k - b.start
        out = [self.singles[k]]
        if b.generation == FIRST:
            if i == 0:
                out.extend(self.pairs[pos])
            else:
                out.append(self.pairs[pos][i - 1])
            out.append(self.core[pos])
        else:
            if i == 0:
                out.extend(self.triples[pos])
                out.append(self.core[pos])
            elif i <= b.tau:
                out.append(self.tip_pairs[pos][i - 1])
                out.append(self.triples[pos][i - 1])
                out.append(self.core[pos])
            else:
                out.append(self.tip_pairs[pos][i - b.tau - 1])
                out.append(self.triples[pos][i - b.tau - 1])
        out.append(self.whole)
        return out


_tables: "weakref.WeakKeyDictionary[Space, BallTable]" = weakref.WeakKeyDictionary()


def ball_table(space: Space) -> BallTable:
    t = _tables.get(space)
    if t is None:
        t = _tables[space] = BallTable(space)
    return t


def ball(space: Space, center, radius) -> Ball:
    """The open ball ``B(center, radius)``."""
    r = num.scalar(radius)
    if not r > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    k = space.locate(center)
    t = ball_table(space)
    if r <= 1:
        return t.singles[k]
    if r <= 2:
        return t.radius_two(k)
    return t.whole


def catalog(space: Space) -> list:
    """Every distinct open ball once, most specific tag kept."""
    seen = {}
    for k in range(space.size):
        for r in CANONICAL_RADII:
            bl = ball(space, k, r)
            prev = seen.get(bl.members)
            if prev is None or SPECIFICITY[bl.kind] < SPECIFICITY[prev.kind]:
                seen[bl.members] = bl
    return sorted(seen.values(), key=lambda bl: (SPECIFICITY[bl.kind], len(bl), bl.members))


def catalog_json(space: Space, **kw) -> str:
    return json.dumps([{"class": bl.kind, "members": bl.names(space)} for bl in catalog(space)], **kw)


def _members(space: Space, E) -> list:
    if isinstance(E, Ball):
        return list(E.members)
    return [space.locate(p) for p in E]


def measure(space: Space, E):
    mu = space.masses
    return sum((mu[k] for k in _members(space, E)), num.ZERO)


def average(space: Space, f, E):
    """``A_E(f)``: the measure-weighted mean of ``f`` over ``E``."""
    ks = _members(space, E)
    if not ks:
        raise DomainError("average over an empty set")
    vals = f.values if hasattr(f, "values") else f
    mu = space.masses
    top = sum((vals[k] * mu[k] for k in ks), num.ZERO)
    return top / sum((mu[k] for k in ks), num.ZERO)
