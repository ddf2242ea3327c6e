"""Realizing an exponent-set quadruple by a concrete space.

A quadruple ``(psc, ps, pwc, pw)`` lists the exponents for which the
centred/non-centred maximal operators are of strong/weak type.  Each set is
``{inf}``, ``[p0, inf]`` or ``(p0, inf]``; inclusions between such sets are
decided symbolically, never numerically.

:func:`plan` picks one of three shapes:

1. ``psc == ps`` and ``pwc == pw``: a single first generation family.
2. ``psc == pwc == [1, inf]`` and ``ps != [1, inf]``: a single second
   generation family.
3. Otherwise: a first generation space realizing ``(psc, pwc)`` next to a
   second generation space realizing ``(ps, pw)``.

Both single-family tables read the pair ``(strong set, weak set)``: equal
closed sets give the hat family, equal open sets the primed hat family, and
an open strong set inside the closed weak set with the same endpoint the
tilde family.  Condition (ii) forces every valid pair into one of these
patterns, which is why an unmatched pattern is reported as an internal error.

:func:`realize` builds the space and a manifest of finite checks (witness
scans and constant trials) that stand in for the infinite-space claims.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import numeric as num
from .exceptions import DomainError, HlmaxError
from .families import (
    XHAT, XHAT_PRIME, XTILDE, XTILDE1, YHAT, YHAT_PRIME, YTILDE, YTILDE1,
    Family, analytic_bound, make_space, scan_space, trials_on_space,
)
from .maximal import CENTERED, NONCENTERED
from .norms import STRONG, WEAK
from .space import COMPOSITE, Space, compose

INF_ONLY = "inf"
CLOSED = "closed"
OPEN = "open"


@dataclass(frozen=True)
class PSet:
    kind: str
    p0: object = None

    def __post_init__(self):
        if self.kind == INF_ONLY:
            object.__setattr__(self, "p0", None)
            return
        if self.kind not in (CLOSED, OPEN):
            raise DomainError(f"unknown exponent-set kind {self.kind!r}")
        p0 = num.parse_exponent(self.p0)
        if num.is_inf(p0):
            if self.kind == OPEN:
                raise DomainError("(inf, inf] is empty and not an allowed set")
            object.__setattr__(self, "kind", INF_ONLY)
            object.__setattr__(self, "p0", None)
            return
        if p0 < 1:
            raise DomainError(f"endpoint must be >= 1, got {p0}")
        object.__setattr__(self, "p0", p0)

    @classmethod
    def parse(cls, text: str) -> "PSet":
        t = text.strip().replace(" ", "").lower()
        if t in ("inf", "{inf}"):
            return cls(INF_ONLY)
        m = re.fullmatch(r"([\[(])([^,]+),(inf|infinity|oo)\]", t)
        if not m:
            raise DomainError(f"cannot parse exponent set {text!r}; use 'inf', '[p0,inf]' or '(p0,inf]'")
        return cls(CLOSED if m.group(1) == "[" else OPEN, m.group(2))

    @classmethod
    def closed(cls, p0) -> "PSet":
        return cls(CLOSED, p0)

    @classmethod
    def open(cls, p0) -> "PSet":
        return cls(OPEN, p0)

    def closure(self) -> "PSet":
        return PSet(CLOSED, self.p0) if self.kind == OPEN else self

    def __le__(self, other: "PSet") -> bool:
        """Set inclusion."""
        return subset(self, other)

    def __str__(self):
        if self.kind == INF_ONLY:
            return "inf"
        left = "[" if self.kind == CLOSED else "("
        return f"{left}{num.to_text(self.p0)},inf]"

    def to_text(self) -> str:
        return str(self)


FULL = PSet(CLOSED, 1)


def subset(a: PSet, b: PSet) -> bool:
    if a.kind == INF_ONLY:
        return True
    if b.kind == INF_ONLY:
        return False
    if a.kind == CLOSED and b.kind == OPEN:
        return a.p0 > b.p0
    return a.p0 >= b.p0


def closure(a: PSet) -> PSet:
    return a.closure()


@dataclass(frozen=True)
class Quadruple:
    psc: PSet
    ps: PSet
    pwc: PSet
    pw: PSet

    @classmethod
    def parse(cls, psc: str, ps: str, pwc: str, pw: str) -> "Quadruple":
        return cls(PSet.parse(psc), PSet.parse(ps), PSet.parse(pwc), PSet.parse(pw))

    def to_dict(self) -> dict:
        return {k: str(getattr(self, k)) for k in ("psc", "ps", "pwc", "pw")}

    def __str__(self):
        return "psc={psc} ps={ps} pwc={pwc} pw={pw}".format(**self.to_dict())


def validate(q: Quadruple) -> list:
    """Names of the violated inclusions (empty when the quadruple is admissible)."""
    checks = [
        ("ps <= psc", subset(q.ps, q.psc)),
        ("pw <= pwc", subset(q.pw, q.pwc)),
        ("psc <= pwc", subset(q.psc, q.pwc)),
        ("pwc <= closure(psc)", subset(q.pwc, q.psc.closure())),
        ("ps <= pw", subset(q.ps, q.pw)),
        ("pw <= closure(ps)", subset(q.pw, q.ps.closure())),
    ]
    return [name for name, ok in checks if not ok]


# recipes -------------------------------------------------------------------

FIRST_ONLY = "first"
SECOND_ONLY = "second"
COMPOSITE_SHAPE = "composite"


@dataclass(frozen=True)
class Recipe:
    shape: str
    case: int
    first: Family | None = None
    second: Family | None = None

    @property
    def families(self) -> tuple:
        return tuple(f for f in (self.first, self.second) if f is not None)

    def to_dict(self) -> dict:
        return {
            "shape": self.shape,
            "case": self.case,
            "first": None if self.first is None else str(self.first),
            "second": None if self.second is None else str(self.second),
        }

    def __str__(self):
        return " + ".join(str(f) for f in self.families)


class PlanningError(HlmaxError):
    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump


def _select(strong: PSet, weak: PSet, second: bool) -> Family:
    hat, prime, tilde1, tilde = (YHAT, YHAT_PRIME, YTILDE1, YTILDE) if second else (XHAT, XHAT_PRIME, XTILDE1, XTILDE)
    if strong == weak:
        if strong.kind == INF_ONLY:
            return Family(hat, "inf")
        if strong.kind == CLOSED:
            return Family(hat, strong.p0)
        return Family(prime, strong.p0)
    if strong.kind == OPEN and weak.kind == CLOSED and strong.p0 == weak.p0:
        return Family(tilde1) if strong.p0 == 1 else Family(tilde, strong.p0)
    raise PlanningError(f"no family for strong set {strong}, weak set {weak}",
                        {"strong": str(strong), "weak": str(weak), "second": second})


def plan(q: Quadruple) -> Recipe:
    bad = validate(q)
    if bad:
        raise DomainError(f"quadruple {q} violates {', '.join(bad)}")
    if q.psc == q.ps and q.pwc == q.pw:
        return Recipe(FIRST_ONLY, 1, first=_select(q.ps, q.pw, second=False))
    if q.psc == FULL and q.pwc == FULL and q.ps != FULL:
        return Recipe(SECOND_ONLY, 2, second=_select(q.ps, q.pw, second=True))
    return Recipe(COMPOSITE_SHAPE, 3, first=_select(q.psc, q.pwc, second=False),
                  second=_select(q.ps, q.pw, second=True))


# manifest ------------------------------------------------------------------

WITNESS = "witness"
CONSTANT = "constant"


@dataclass(frozen=True)
class Check:
    """One finite piece of evidence for the realized exponent sets.

    ``witness``: the delta-at-root ratios on ``component`` stay above the
    family's lower bound and grow from n = 1 to n = N.
    ``constant``: no test function supported on ``component`` exceeds the
    proved constant.
    """

    what: str
    component: str
    family: Family
    p: object
    operator: str
    kind: str

    def describe(self) -> str:
        p = num.exponent_text(self.p)
        if self.what == WITNESS:
            return f"{self.family}: {self.operator} {self.kind}({p},{p}) delta-ratio grows"
        bound = analytic_bound(self.family, None, self.p, self.operator, self.kind, which="upper")
        return f"{self.family}: {self.operator} {self.kind}({p},{p}) constant {bound.formula} holds"

    def to_dict(self) -> dict:
        return {
            "check": self.what,
            "component": self.component,
            "family": str(self.family),
            "p": num.exponent_text(self.p),
            "operator": self.operator,
            "kind": self.kind,
            "description": self.describe(),
        }


def family_checks(fam: Family, component: str) -> list:
    name, p0 = fam.name, fam.p0
    inf = num.INF
    out = []

    def add(what, p, operator, kind):
        out.append(Check(what, component, fam, p, operator, kind))

    ops = (CENTERED, NONCENTERED)
    if name == XHAT:
        if fam.infinite:
            add(WITNESS, 1, CENTERED, WEAK)
        else:
            if p0 > 1:
                add(WITNESS, 1, CENTERED, WEAK)
            for op in ops:
                add(CONSTANT, p0, op, STRONG)
    elif name == XHAT_PRIME:
        add(WITNESS, p0, CENTERED, WEAK)
    elif name == XTILDE1:
        add(WITNESS, 1, CENTERED, STRONG)
        for op in ops:
            add(CONSTANT, 1, op, WEAK)
    elif name == XTILDE:
        add(WITNESS, p0, CENTERED, STRONG)
        for op in ops:
            add(CONSTANT, p0, op, WEAK)
    else:
        add(CONSTANT, 1, CENTERED, STRONG)
        if name == YHAT:
            add(WITNESS, 1, NONCENTERED, WEAK)
            if not fam.infinite:
                add(CONSTANT, p0, NONCENTERED, STRONG)
        elif name == YHAT_PRIME:
            add(WITNESS, p0, NONCENTERED, WEAK)
        elif name == YTILDE1:
            add(WITNESS, 1, NONCENTERED, STRONG)
            add(CONSTANT, 1, NONCENTERED, WEAK)
        else:
            add(WITNESS, p0, NONCENTERED, STRONG)
            add(CONSTANT, p0, NONCENTERED, WEAK)
    # M^c f <= M f pointwise, so the non-centred sup bound covers both
    add(CONSTANT, inf, NONCENTERED, STRONG)
    return out


@dataclass(frozen=True, eq=False)
class Realization:
    space: Space
    recipe: Recipe
    manifest: tuple
    N: int


FIRST_COMPONENT = "x"
SECOND_COMPONENT = "y"


def realize(recipe: Recipe, N: int) -> Realization:
    if recipe.shape == COMPOSITE_SHAPE:
        space = compose(make_space(recipe.first, N), make_space(recipe.second, N))
        manifest = family_checks(recipe.first, FIRST_COMPONENT) + family_checks(recipe.second, SECOND_COMPONENT)
    else:
        fam = recipe.first or recipe.second
        space = make_space(fam, N)
        manifest = family_checks(fam, FIRST_COMPONENT if recipe.first else SECOND_COMPONENT)
    object.__setattr__(space, "label", str(recipe))
    return Realization(space, recipe, tuple(manifest), N)


@dataclass(frozen=True, eq=False)
class CheckResult:
    check: Check
    passed: bool
    detail: dict = field(default_factory=dict)


def _component_args(real: Realization, component: str):
    if real.space.generation == COMPOSITE:
        return component, list(real.space.component_range(component))
    return None, None


def run_check(real: Realization, check: Check, trials: int = 4, seed: int = 0,
              max_deltas: int = 16, n_constant: int = 2, growth_threshold=None) -> CheckResult:
    """Evaluate one manifest entry on the realized space."""
    comp, support = _component_args(real, check.component)
    if check.what == WITNESS:
        scan = scan_space(real.space, check.family, check.p, check.operator, check.kind,
                          range(1, real.N + 1), component=comp)
        last = scan.rows[-1].report.power_ratio
        ok = scan.passed and scan.grows()
        if growth_threshold is not None:
            ok = ok and num.ge(last, num.scalar(growth_threshold))
        return CheckResult(check, ok, {"summary": scan.summary()})
    bound = analytic_bound(check.family, None, check.p, check.operator, check.kind, which="upper")
    rep = trials_on_space(real.space, bound, check.p, check.operator, check.kind, trials, seed,
                          support=support, max_deltas=max_deltas, n_constant=n_constant)
    return CheckResult(check, rep.passed, {
        "checked": rep.checked,
        "max_ratio": num.to_text(rep.max_ratio),
        "constant": num.to_text(bound.value),
        "violations": rep.violations[:1],
    })


def check_manifest(real: Realization, trials: int = 4, seed: int = 0, **kw) -> list:
    return [run_check(real, c, trials, seed, **kw) for c in real.manifest]


def admissible_grid(endpoints=("1", "3/2", "2", "3")) -> list:
    """Every admissible quadruple over {inf} and the closed/open sets at ``endpoints``."""
    sets = [PSet(INF_ONLY)]
    for e in endpoints:
        sets.append(PSet(CLOSED, e))
        sets.append(PSet(OPEN, e))
    out = []
    for psc in sets:
        for ps in sets:
            for pwc in sets:
                for pw in sets:
                    q = Quadruple(psc, ps, pwc, pw)
                    if not validate(q):
                        out.append(q)
    return out


__all__ = [
    "PSet", "Quadruple", "Recipe", "Realization", "Check", "CheckResult", "PlanningError",
    "FULL", "subset", "closure", "validate", "plan", "realize", "family_checks", "run_check",
    "check_manifest", "admissible_grid",
]
