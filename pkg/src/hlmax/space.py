"""Finite truncations of the tree-like spaces X_tau, Y_tau and their unions.

A first-generation branch ``S_n`` is a root ``x_n`` with ``tau_n`` satellites
``x_{n,i}``; the root sits at distance 1 from each of its satellites and every
other pair of distinct points is at distance 2.  A second-generation branch
``T_n`` adds a tip ``y'_{n,i}`` above each satellite ``y_{n,i}``; distance 1
joins a root to its satellites and a satellite to its own tip.

Satellite weights ``F(n, i)`` are stored as runs ``(value, count)`` so that
branches with ``2**n`` identical satellites stay cheap until the point list
is actually needed.  Root masses ``d_n`` are fixed by ``d_1 = 1`` and by the
halving rule ``|S_n| = |S_{n-1}| / 2``.
"""
from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import accumulate
from typing import Callable, Iterable, NamedTuple, Sequence

from . import numeric as num
from .exceptions import ConstructionError, DomainError

FIRST = "first"
SECOND = "second"
COMPOSITE = "composite"

FORMAT = "hlmax.space"
FORMAT_VERSION = 1


class PointId(NamedTuple):
    """Name of a point: ``x``/``y`` component, branch number, role and index."""

    component: str
    branch: int
    role: str  # "root" | "satellite" | "tip"
    index: int = 0

    def __str__(self):
        if self.role == "root":
            return f"{self.component}{self.branch}"
        tail = "'" if self.role == "tip" else ""
        return f"{self.component}{self.branch},{self.index}{tail}"

    @classmethod
    def parse(cls, text: str) -> "PointId":
        """Inverse of ``str``: ``"x3"``, ``"y2,4"``, ``"y2,4'"``."""
        s = text.strip()
        comp, rest = s[0], s[1:]
        if comp not in "xy" or not rest:
            raise DomainError(f"not a point name: {text!r}")
        tip = rest.endswith("'")
        rest = rest.rstrip("'")
        try:
            if "," in rest:
                n, i = (int(t) for t in rest.split(","))
                return cls(comp, n, "tip" if tip else "satellite", i)
            return cls(comp, int(rest), "root", 0)
        except ValueError as exc:
            raise DomainError(f"not a point name: {text!r}") from exc


@dataclass(frozen=True)
class Branch:
    """One branch with its weight runs, root mass and position in the space."""

    n: int
    tau: int
    runs: tuple  # ((weight, count), ...), counts summing to tau
    d: num.Scalar
    generation: str = FIRST
    start: int = 0

    @property
    def component(self) -> str:
        return "x" if self.generation == FIRST else "y"

    @cached_property
    def _run_ends(self):
        return list(accumulate(c for _, c in self.runs))

    def weight(self, i: int):
        """``F(n, i)`` for ``1 <= i <= tau``."""
        if not 1 <= i <= self.tau:
            raise DomainError(f"satellite index {i} outside 1..{self.tau}")
        return self.runs[bisect.bisect_left(self._run_ends, i)][0]

    def weights(self):
        for w, c in self.runs:
            for _ in range(c):
                yield w

    @cached_property
    def weight_sum(self):
        return sum((w * c for w, c in self.runs), num.ZERO)

    @property
    def size(self) -> int:
        return 1 + self.tau if self.generation == FIRST else 1 + 2 * self.tau

    @property
    def stop(self) -> int:
        return self.start + self.size

    @property
    def root(self) -> int:
        return self.start

    def satellite(self, i: int) -> int:
        return self.start + i

    def tip(self, i: int) -> int:
        return self.start + self.tau + i

    @property
    def mass(self):
        """``|S_n|`` (first generation) or ``|T_n|`` (second generation)."""
        if self.generation == FIRST:
            return self.d * (1 + self.weight_sum)
        return self.d * (2 + self.weight_sum)

    @property
    def exact(self) -> bool:
        return num.is_exact(self.d) and all(num.is_exact(w) for w, _ in self.runs)


def _runs_from_values(values: Iterable) -> tuple:
    runs = []
    for v in values:
        v = num.scalar(v)
        if runs and runs[-1][0] == v and num.is_exact(v) == num.is_exact(runs[-1][0]):
            runs[-1][1] += 1
        else:
            runs.append([v, 1])
    return tuple((w, c) for w, c in runs)


def _check_runs(n, tau, runs):
    if not isinstance(tau, int) or tau < 1:
        raise ConstructionError(f"tau_{n} must be a positive integer, got {tau!r}")
    if sum(c for _, c in runs) != tau:
        raise ConstructionError(f"branch {n}: weight count does not match tau_{n} = {tau}")
    for w, c in runs:
        if c < 1 or not w > 0:
            raise ConstructionError(f"branch {n}: weights must be positive, got {w}")


def build_from_runs(generation: str, runs_per_branch: Sequence[tuple], scale=None) -> "Space":
    """Build a first or second generation space from per-branch weight runs.

    ``scale`` optionally multiplies every mass (off by default, so ``d_1 = 1``).
    """
    if generation not in (FIRST, SECOND):
        raise ConstructionError(f"unknown generation {generation!r}")
    if not runs_per_branch:
        raise ConstructionError("a space needs at least one branch (N >= 1)")
    base = 1 if generation == FIRST else 2
    branches = []
    start = 0
    first_mass = None
    for n, runs in enumerate(runs_per_branch, start=1):
        runs = tuple((num.scalar(w), int(c)) for w, c in runs)
        tau = sum(c for _, c in runs)
        _check_runs(n, tau, runs)
        wsum = sum((w * c for w, c in runs), num.ZERO)
        if n == 1:
            d = num.ONE
            first_mass = base + wsum
        else:
            d = first_mass / (2 ** (n - 1) * (base + wsum))
        if scale is not None:
            d = d * num.scalar(scale)
        b = Branch(n, tau, runs, d, generation, start)
        branches.append(b)
        start = b.stop
    return Space(generation, tuple(branches))


def _weight_table(F, n, tau):
    if callable(F):
        return [F(n, i) for i in range(1, tau + 1)]
    row = F[n - 1]
    if len(row) < tau:
        raise ConstructionError(f"weight table row {n} has {len(row)} entries, tau_{n} = {tau}")
    return list(row[:tau])


def _tau_value(tau, n):
    t = tau(n) if callable(tau) else tau[n - 1]
    if isinstance(t, bool) or not isinstance(t, int) or t < 1:
        raise ConstructionError(f"tau_{n} must be a positive integer, got {t!r}")
    return t


def _build(generation, tau, F, N, scale):
    if N < 1:
        raise ConstructionError(f"truncation N must be >= 1, got {N}")
    if not callable(tau) and len(tau) < N:
        raise ConstructionError(f"tau has {len(tau)} entries, need {N}")
    runs = []
    for n in range(1, N + 1):
        t = _tau_value(tau, n)
        runs.append(_runs_from_values(_weight_table(F, n, t)))
    return build_from_runs(generation, runs, scale=scale)


def build_first_gen(tau, F, N: int, scale=None) -> "Space":
    """First generation truncation with branches ``S_1 .. S_N``.

    ``tau`` is a sequence (or callable ``n -> tau_n``); ``F`` a callable
    ``(n, i) -> weight`` or a table of per-branch weight rows.
    """
    return _build(FIRST, tau, F, N, scale)


def build_second_gen(tau, F, N: int, scale=None) -> "Space":
    """Second generation truncation: satellites weigh ``d_n / tau_n``, tips ``d_n F(n, i)``."""
    return _build(SECOND, tau, F, N, scale)


@dataclass(frozen=True, eq=False)
class Space:
    """An immutable finite truncation; points are numbered branch by branch."""

    generation: str
    branches: tuple
    components: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.generation == COMPOSITE:
            if len(self.components) != 2:
                raise ConstructionError("a composite space has exactly two components")
        elif self.generation not in (FIRST, SECOND):
            raise ConstructionError(f"unknown generation {self.generation!r}")

    def __repr__(self):
        return f"Space({self.generation}, N={self.N}, points={self.size})"

    @property
    def N(self):
        if self.generation == COMPOSITE:
            return tuple(c.N for c in self.components)
        return len(self.branches)

    @property
    def size(self) -> int:
        return self.branches[-1].stop if self.branches else 0

    @cached_property
    def points(self) -> tuple:
        pts = []
        for b in self.branches:
            c = b.component
            pts.append(PointId(c, b.n, "root"))
            pts.extend(PointId(c, b.n, "satellite", i) for i in range(1, b.tau + 1))
            if b.generation == SECOND:
                pts.extend(PointId(c, b.n, "tip", i) for i in range(1, b.tau + 1))
        return tuple(pts)

    @cached_property
    def index(self) -> dict:
        return {p: k for k, p in enumerate(self.points)}

    @cached_property
    def masses(self) -> tuple:
        out = []
        for b in self.branches:
            out.append(b.d)
            if b.generation == FIRST:
                out.extend(b.d * w for w in b.weights())
            else:
                sat = b.d / b.tau
                out.extend(sat for _ in range(b.tau))
                out.extend(b.d * w for w in b.weights())
        return tuple(out)

    @cached_property
    def owner(self) -> tuple:
        """Position in ``branches`` of the branch holding each point."""
        out = []
        for k, b in enumerate(self.branches):
            out.extend([k] * b.size)
        return tuple(out)

    @cached_property
    def _branch_lookup(self) -> dict:
        return {(b.component, b.n): b for b in self.branches}

    def branch(self, n: int, component: str | None = None) -> Branch:
        if component is None:
            component = "y" if self.generation == SECOND else "x"
        try:
            return self._branch_lookup[(component, n)]
        except KeyError:
            raise DomainError(f"no branch {component}{n} in {self!r}") from None

    def locate(self, point) -> int:
        """Index of a point given as PointId, its string name, or an index."""
        if isinstance(point, int):
            if not 0 <= point < self.size:
                raise DomainError(f"point index {point} outside 0..{self.size - 1}")
            return point
        if isinstance(point, str):
            point = PointId.parse(point)
        try:
            return self.index[point]
        except KeyError:
            raise DomainError(f"unknown point {point}") from None

    def point_branch(self, k: int) -> Branch:
        return self.branches[self.owner[k]]

    @cached_property
    def total_mass(self):
        return sum((b.mass for b in self.branches), num.ZERO)

    @property
    def exact(self) -> bool:
        return all(b.exact for b in self.branches)

    def component_range(self, component: str) -> range:
        bs = [b for b in self.branches if b.component == component]
        if not bs:
            return range(0)
        return range(bs[0].start, bs[-1].stop)

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        if self.generation == COMPOSITE:
            return {
                "format": FORMAT,
                "version": FORMAT_VERSION,
                "generation": COMPOSITE,
                "N": list(self.N),
                "components": [c.to_dict() for c in self.components],
            }
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "generation": self.generation,
            "N": self.N,
            "branches": [
                {
                    "n": b.n,
                    "tau": b.tau,
                    "F": [{"value": _enc(w), "count": c} for w, c in b.runs],
                    "d": _enc(b.d),
                }
                for b in self.branches
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, doc: dict) -> "Space":
        if doc.get("format", FORMAT) != FORMAT or doc.get("version") != FORMAT_VERSION:
            raise ConstructionError(f"unsupported space document {doc.get('format')!r} v{doc.get('version')}")
        gen = doc["generation"]
        if gen == COMPOSITE:
            x, y = (cls.from_dict(c) for c in doc["components"])
            return compose(x, y)
        branches = []
        start = 0
        for k, bd in enumerate(doc["branches"], start=1):
            runs = tuple((_dec(r["value"]), int(r["count"])) for r in bd["F"])
            _check_runs(k, int(bd["tau"]), runs)
            b = Branch(int(bd["n"]), int(bd["tau"]), runs, _dec(bd["d"]), gen, start)
            branches.append(b)
            start = b.stop
        space = cls(gen, tuple(branches))
        bad = halving_defects(space)
        if bad:
            raise ConstructionError(f"branch masses do not halve at n = {bad}")
        return space

    @classmethod
    def from_json(cls, text: str) -> "Space":
        return cls.from_dict(json.loads(text))


def _enc(x) -> dict:
    return {"value": num.to_text(x), "exact": num.is_exact(x)}


def _dec(obj):
    return num.from_text(obj["value"], bool(obj["exact"]))


def compose(X: Space, Y: Space) -> Space:
    """Disjoint union of a first and a second generation space, 2 apart."""
    if X.generation != FIRST or Y.generation != SECOND:
        raise ConstructionError("compose expects (first generation, second generation)")
    offset = X.size
    shifted = tuple(replace(b, start=b.start + offset) for b in Y.branches)
    return Space(COMPOSITE, X.branches + shifted, components=(X, Y))


def distance(space: Space, a, b) -> int:
    """The three-valued metric: 0, 1 or 2."""
    i, j = space.locate(a), space.locate(b)
    if i == j:
        return 0
    p, q = space.points[i], space.points[j]
    if p.component != q.component or p.branch != q.branch:
        return 2
    if p.component == "x":
        return 1 if "root" in (p.role, q.role) else 2
    roles = {p.role, q.role}
    if roles == {"root", "satellite"}:
        return 1
    if roles == {"satellite", "tip"} and p.index == q.index:
        return 1
    return 2


def halving_defects(space: Space, rtol=None) -> list:
    """Branch numbers n >= 2 where ``|S_n| = |S_{n-1}| / 2`` fails."""
    bad = []
    for comp in ("x", "y"):
        bs = [b for b in space.branches if b.component == comp]
        for prev, cur in zip(bs, bs[1:]):
            if not num.eq(cur.mass, prev.mass / 2, rtol):
                bad.append(cur.n)
    return bad


def total_mass_closed_form(space: Space):
    """``|S_1| (2 - 2**(1-N))``, summed over components."""
    total = num.ZERO
    comps = space.components if space.generation == COMPOSITE else (space,)
    for c in comps:
        total += c.branches[0].mass * (2 - num.mpq(1, 2 ** (c.N - 1)))
    return total


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A nonnegative function on the points of one space."""

    __test__ = False  # keep pytest from collecting this class

    space: Space
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.space.size:
            raise DomainError(f"function has {len(self.values)} values, space has {self.space.size} points")
        for k, v in enumerate(self.values):
            if v < 0:
                raise DomainError(f"negative value {v} at {self.space.points[k]}; pass |f|")

    @classmethod
    def from_values(cls, space: Space, values) -> "TestFunction":
        return cls(space, tuple(num.scalar(v) for v in values))

    @classmethod
    def from_mapping(cls, space: Space, mapping: dict, default=0) -> "TestFunction":
        vals = [num.scalar(default)] * space.size
        for p, v in mapping.items():
            vals[space.locate(p)] = num.scalar(v)
        return cls(space, tuple(vals))

    @classmethod
    def constant(cls, space: Space, c=1) -> "TestFunction":
        c = num.scalar(c)
        return cls(space, (c,) * space.size)

    @classmethod
    def delta(cls, space: Space, point) -> "TestFunction":
        return cls.indicator(space, [point])

    @classmethod
    def indicator(cls, space: Space, points, c=1) -> "TestFunction":
        c = num.scalar(c)
        vals = [num.ZERO] * space.size
        for p in points:
            vals[space.locate(p)] = c
        return cls(space, tuple(vals))

    def __getitem__(self, point):
        return self.values[self.space.locate(point)]

    def support(self) -> list:
        return [k for k, v in enumerate(self.values) if v != 0]

    @property
    def exact(self) -> bool:
        return all(num.is_exact(v) for v in self.values)

    def to_dict(self) -> dict:
        return {str(self.space.points[k]): _enc(v) for k, v in enumerate(self.values) if v != 0}
