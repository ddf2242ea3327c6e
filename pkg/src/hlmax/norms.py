"""L^p norms, weak-L^p quasinorms and type-(p, p) ratios on a finite space.

Norms are carried as p-th powers (``Norm.power``) so that comparisons stay
exact for rational data; the root is only taken when ``Norm.value`` is read.
For an integer or rational exponent ``p = a/b`` the weak-norm maximiser is
found by comparing ``v**a * mass**b``, which needs no roots at all.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numeric as num
from .exceptions import DomainError
from .maximal import CENTERED, NONCENTERED, check_operator, maximal
from .space import Space, TestFunction

STRONG = "strong"
WEAK = "weak"
KINDS = (STRONG, WEAK)


def _vals(g) -> tuple:
    return g.values if hasattr(g, "values") and not isinstance(g, dict) else tuple(g)


def _check_p(p, allow_inf=True):
    if not num.is_inf(p):
        p = num.parse_exponent(p)
    if num.is_inf(p):
        if not allow_inf:
            raise DomainError("weak norms need a finite exponent; use lp_norm for p = inf")
        return num.INF
    if p < 1:
        raise DomainError(f"exponent must be >= 1, got {p}")
    return p


@dataclass(frozen=True)
class Norm:
    """``||g||_p`` stored as ``power = ||g||_p ** p`` (the max itself for p = inf)."""

    p: object
    power: object

    @property
    def value(self):
        if num.is_inf(self.p):
            return self.power
        return num.root(self.power, self.p)

    @property
    def exact(self) -> bool:
        return num.is_exact(self.power)


@dataclass(frozen=True)
class WeakNorm(Norm):
    """``||g||_{p,inf}``; ``level`` is the value v with ``power = v**p |{|g| >= v}|``.

    The supremum over thresholds is approached by ``lambda`` just below ``level``.
    """

    level: object = None
    mass: object = None


@dataclass(frozen=True)
class LevelSet:
    threshold: object
    members: tuple
    mass: object


def lp_norm(space: Space, g, p) -> Norm:
    p = _check_p(p)
    vals = _vals(g)
    if num.is_inf(p):
        return Norm(p, max((abs(v) for v in vals), default=num.ZERO))
    if p == 1:
        total = num.ZERO
        for v, m in zip(vals, space.masses):
            if v:
                total += abs(v) * m
        return Norm(p, total)
    # maximal functions take few distinct values; raise each to the power once
    total = num.ZERO
    for v, m in _grouped(space, vals).items():
        total += num.power(v, p) * m
    return Norm(p, total)


def level_set(space: Space, g, threshold) -> LevelSet:
    """``E_lambda(g) = {x : |g(x)| > lambda}`` (strict)."""
    lam = num.scalar(threshold)
    vals = _vals(g)
    members = tuple(k for k, v in enumerate(vals) if abs(v) > lam)
    mu = space.masses
    return LevelSet(lam, members, sum((mu[k] for k in members), num.ZERO))


def _grouped(space: Space, vals) -> dict:
    """Mass carried by each distinct nonzero value of |g|."""
    if any(v < 0 for v in vals):
        vals = [abs(v) for v in vals]
    by_value = {}
    get = by_value.get
    zero = num.ZERO
    for v, m in zip(vals, space.masses):
        if v:
            by_value[v] = get(v, zero) + m
    return by_value


def _profile(space: Space, vals):
    """Distinct nonzero |g| values, descending, with mass of ``{|g| >= v}``."""
    by_value = _grouped(space, vals)
    out = []
    running = num.ZERO
    for v in sorted(by_value, reverse=True):
        running += by_value[v]
        out.append((v, running))
    return out


def weak_lp(space: Space, g, p) -> WeakNorm:
    p = _check_p(p, allow_inf=False)
    prof = _profile(space, _vals(g))
    if not prof:
        return WeakNorm(p, num.ZERO, None, num.ZERO)
    exact = all(num.is_exact(v) and num.is_exact(m) for v, m in prof)
    a, b = int(p.numerator), int(p.denominator)
    best = None
    for v, m in prof:
        score = v ** a * m ** b if exact else num.power(v, p) * m
        if best is None or score > best[0]:
            best = (score, v, m)
    _, v, m = best
    return WeakNorm(p, num.power(v, p) * m, v, m)


@dataclass(frozen=True, eq=False)
class RatioReport:
    """``||Tf|| / ||f||_p`` for one test function.

    ``power_ratio`` is the quotient of p-th powers (the convention in which
    the analytic constants are stated); ``ratio`` is its p-th root.
    """

    p: object
    kind: str
    operator: str
    power_ratio: object
    f: TestFunction
    level: object = None

    @property
    def ratio(self):
        if num.is_inf(self.p):
            return self.power_ratio
        return num.root(self.power_ratio, self.p)

    @property
    def exact(self) -> bool:
        return num.is_exact(self.power_ratio)


def type_ratio(space: Space, f, p, operator: str, kind: str) -> RatioReport:
    check_operator(operator)
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}, got {kind!r}")
    if not isinstance(f, TestFunction):
        f = TestFunction.from_values(space, f)
    p = _check_p(p, allow_inf=kind == STRONG)
    base = lp_norm(space, f, p)
    if base.power == 0:
        raise DomainError("type ratio of the zero function is undefined")
    Tf = maximal(space, f, operator)
    if kind == STRONG:
        top = lp_norm(space, Tf, p)
        return RatioReport(p, kind, operator, top.power / base.power, f)
    top = weak_lp(space, Tf, p)
    return RatioReport(p, kind, operator, top.power / base.power, f, level=top.level)


# random profiles ----------------------------------------------------------


def rng_for(seed: int, index: int) -> np.random.Generator:
    """Private stream for one restart or trial."""
    return np.random.default_rng([int(seed), int(index)])


def random_profile(space: Space, rng: np.random.Generator, support=None, span: int = 20) -> TestFunction:
    """Log-uniform values in ``[2**-span, 2**span]`` on a random subset of ``support``."""
    idx = np.arange(space.size) if support is None else np.asarray(list(support))
    density = rng.uniform(0.05, 1.0)
    mask = rng.random(len(idx)) < density
    if not mask.any():
        mask[rng.integers(len(idx))] = True
    exps = rng.uniform(-span, span, size=len(idx))
    vals = [num.ZERO] * space.size
    for k, on, e in zip(idx, mask, exps):
        if on:
            vals[int(k)] = num.mpq(float(2.0 ** e))
    return TestFunction(space, tuple(vals))


# ascent -------------------------------------------------------------------


def structured_starts(space: Space, support=None) -> list:
    """Every delta function and every branch indicator."""
    pts = range(space.size) if support is None else support
    keep = set(pts)
    starts = [TestFunction.delta(space, k) for k in pts]
    for b in space.branches:
        members = [k for k in range(b.start, b.stop) if k in keep]
        if members:
            starts.append(TestFunction.indicator(space, members))
    return starts


def _climb(space, f, p, operator, kind, max_passes):
    best = type_ratio(space, f, p, operator, kind)
    vals = list(f.values)
    for k in range(1, max_passes + 1):
        factors = (num.mpq(2), num.mpq(1, 2), 1 + num.mpq(1, k))
        improved = False
        for idx in range(len(vals)):
            if vals[idx] == 0:
                continue
            for fac in factors:
                trial = list(vals)
                trial[idx] = vals[idx] * fac
                rep = type_ratio(space, TestFunction(space, tuple(trial)), p, operator, kind)
                if rep.power_ratio > best.power_ratio:
                    best, vals, improved = rep, trial, True
                    break
        if not improved:
            break
    return best


def ascend_norm(space: Space, p, operator: str = NONCENTERED, kind: str = WEAK,
                restarts: int = 8, seed: int = 0, max_passes: int = 25) -> RatioReport:
    """Multi-start coordinate ascent for a lower bound on an operator norm.

    All delta functions and branch indicators are scored first; restart 0
    climbs from the best of them and restarts 1.. from random log-uniform
    profiles drawn from ``rng_for(seed, r)``.  The returned report is a
    certified lower bound (its ratio is exactly reproducible from ``f``).
    """
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    starts = structured_starts(space)
    scored = [type_ratio(space, f, p, operator, kind) for f in starts]
    best = scored[0]
    for rep in scored[1:]:
        if rep.power_ratio > best.power_ratio:
            best = rep
    seeds = [best.f] + [random_profile(space, rng_for(seed, r)) for r in range(1, restarts)]
    for f in seeds:
        rep = _climb(space, f, p, operator, kind, max_passes)
        if rep.power_ratio > best.power_ratio:
            best = rep
    return best


def conjugate_exponent(p):
    """``q = p / (p - 1)``; annotation only."""
    p = num.scalar(p)
    if p == 1:
        return num.INF
    return p / (p - 1)


__all__ = [
    "CENTERED", "NONCENTERED", "STRONG", "WEAK", "Norm", "WeakNorm", "LevelSet", "RatioReport",
    "lp_norm", "weak_lp", "level_set", "type_ratio", "ascend_norm", "random_profile", "rng_for",
    "structured_starts", "conjugate_exponent",
]
