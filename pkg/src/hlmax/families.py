"""The eight named constructions, their witnesses and their analytic constants.

First generation: ``xhat(p0)``, ``xhat_prime(p0)``, ``xtilde1``, ``xtilde(p0)``.
Second generation: ``yhat(p0)``, ``yhat_prime(p0)``, ``ytilde1``, ``ytilde(p0)``.

The tilde families with ``p0 > 1`` are built from the sequences

* ``c_n = floor((n+1)**p0 / n)``
* ``e_n``: the largest k with ``2**(k-1) <= c_n`` and ``(n+1)**p0 >= 2**(k-1+p0)``
* ``m_nj = (n+1) * 2**((1-j)/p0) - 1``
* ``s_nj``: the least k with ``k * m_nj >= 2**(1-j) * n * c_n``

``m_nj`` is usually irrational, but every decision that involves it reduces
to comparing ``2**(-(j-1)*q)`` with a rational to the power ``p`` (where
``p0 = p/q``), so ``e_n``, ``s_nj`` and all bracketing checks are decided
in exact integer arithmetic.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import accumulate

import gmpy2

from . import numeric as num
from .exceptions import BoundViolation, DomainError, UnknownBoundError
from .maximal import CENTERED, NONCENTERED
from .norms import STRONG, WEAK, random_profile, rng_for, type_ratio
from .space import FIRST, SECOND, Space, TestFunction, build_from_runs

XHAT = "xhat"
XHAT_PRIME = "xhat_prime"
XTILDE1 = "xtilde1"
XTILDE = "xtilde"
YHAT = "yhat"
YHAT_PRIME = "yhat_prime"
YTILDE1 = "ytilde1"
YTILDE = "ytilde"

FAMILIES = (XHAT, XHAT_PRIME, XTILDE1, XTILDE, YHAT, YHAT_PRIME, YTILDE1, YTILDE)
FIRST_GEN = (XHAT, XHAT_PRIME, XTILDE1, XTILDE)

# (low, low_inclusive, allow_inf)
_RANGES = {
    XHAT: (1, True, True),
    XHAT_PRIME: (1, True, False),
    XTILDE: (1, False, False),
    YHAT: (1, False, True),
    YHAT_PRIME: (1, True, False),
    YTILDE: (1, False, False),
}


@dataclass(frozen=True)
class Family:
    name: str
    p0: object = None

    def __post_init__(self):
        if self.name not in FAMILIES:
            raise DomainError(f"unknown family {self.name!r}; choose from {FAMILIES}")
        if self.name in (XTILDE1, YTILDE1):
            if self.p0 is not None and self.p0 != 1:
                raise DomainError(f"{self.name} has p0 = 1")
            object.__setattr__(self, "p0", num.ONE)
            return
        if self.p0 is None:
            raise DomainError(f"{self.name} needs an exponent p0")
        p0 = num.parse_exponent(self.p0)
        low, inclusive, allow_inf = _RANGES[self.name]
        if num.is_inf(p0):
            if not allow_inf:
                raise DomainError(f"{self.name} needs a finite p0")
        elif p0 < low or (p0 == low and not inclusive):
            raise DomainError(f"p0 = {p0} outside the range allowed for {self.name}")
        object.__setattr__(self, "p0", p0)

    @property
    def generation(self) -> str:
        return FIRST if self.name in FIRST_GEN else SECOND

    @property
    def infinite(self) -> bool:
        return num.is_inf(self.p0)

    def __str__(self):
        if self.name in (XTILDE1, YTILDE1):
            return self.name
        return f"{self.name}({num.exponent_text(self.p0)})"


def as_family(family, p0=None) -> Family:
    if isinstance(family, Family):
        return family
    return Family(str(family).lower(), p0)


# auxiliary sequences ------------------------------------------------------


def _alpha_cmp(j: int, p0, ratio) -> int:
    """Sign of ``2**(-(j-1)/p0) - ratio`` for rational ``ratio``, exactly."""
    if ratio <= 0:
        return 1
    p, q = int(p0.numerator), int(p0.denominator)
    lhs = num.mpq(1, 2 ** ((j - 1) * q))
    rhs = ratio ** p
    return (lhs > rhs) - (lhs < rhs)


def cmp_scaled_m(n: int, j: int, p0, a, b) -> int:
    """Sign of ``a * m_nj - b`` for rationals ``a > 0`` and ``b``."""
    a, b = num.scalar(a), num.scalar(b)
    return _alpha_cmp(j, p0, (a + b) / (a * (n + 1)))


def m_value(n: int, j: int, p0):
    """``m_nj``; exact when ``(j-1)/p0`` is an integer."""
    expo = num.mpq(1 - j) / p0
    if expo.denominator == 1:
        return (n + 1) * num.mpq(2) ** int(expo) - 1
    return (n + 1) * (gmpy2.mpfr(2) ** expo) - 1


def _least_multiple(n, j, p0, m, target) -> int:
    k = max(1, int(gmpy2.ceil(target / m)))
    while cmp_scaled_m(n, j, p0, k, target) < 0:
        k += 1
    while k > 1 and cmp_scaled_m(n, j, p0, k - 1, target) >= 0:
        k -= 1
    return k


@dataclass(frozen=True)
class AuxSequences:
    p0: object
    n: int
    c: int
    e: int
    m: tuple
    s: tuple

    @cached_property
    def prefix(self) -> list:
        return list(accumulate(self.s))

    @property
    def tau(self) -> int:
        return self.prefix[-1]

    def target(self, j: int):
        """``2**(1-j) * n * c_n``."""
        return num.mpq(self.n * self.c, 2 ** (j - 1))

    def j_index(self, i: int) -> int:
        """Least k with ``s_n1 + ... + s_nk >= i``."""
        if not 1 <= i <= self.tau:
            raise DomainError(f"satellite index {i} outside 1..{self.tau}")
        return bisect.bisect_left(self.prefix, i) + 1

    def check(self) -> dict:
        """Exact verdicts for ``1 <= m <= n`` and the ``s*m`` bracket, per j."""
        n, p0 = self.n, self.p0
        out = {"m_lower": [], "m_upper": [], "sm_lower": [], "sm_upper": [], "s_minimal": []}
        for j, s in enumerate(self.s, start=1):
            T = self.target(j)
            out["m_lower"].append(cmp_scaled_m(n, j, p0, 1, 1) >= 0)
            out["m_upper"].append(cmp_scaled_m(n, j, p0, 1, n) <= 0)
            out["sm_lower"].append(cmp_scaled_m(n, j, p0, s, T) >= 0)
            out["sm_upper"].append(cmp_scaled_m(n, j, p0, s, 2 * T) <= 0)
            out["s_minimal"].append(s == 1 or cmp_scaled_m(n, j, p0, s - 1, T) < 0)
        return out

    def ok(self) -> bool:
        return all(all(v) for v in self.check().values())


def c_value(p0, n: int) -> int:
    return num.floor_div_power(n + 1, p0, n)


def e_value(p0, n: int, c: int | None = None) -> int:
    c = c_value(p0, n) if c is None else c
    p, q = int(p0.numerator), int(p0.denominator)
    top = gmpy2.mpz(n + 1) ** p
    k = 1
    while 2 ** k <= c and top >= gmpy2.mpz(2) ** (k * q + p):
        k += 1
    return k


def aux_sequences(p0, n: int) -> AuxSequences:
    p0 = num.parse_exponent(p0)
    if num.is_inf(p0) or p0 <= 1:
        raise DomainError(f"auxiliary sequences need 1 < p0 < inf, got {p0}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    c = c_value(p0, n)
    e = e_value(p0, n, c)
    ms, ss = [], []
    for j in range(1, e + 1):
        m = m_value(n, j, p0)
        ms.append(m)
        ss.append(_least_multiple(n, j, p0, m, num.mpq(n * c, 2 ** (j - 1))))
    return AuxSequences(p0, n, c, e, tuple(ms), tuple(ss))


def j_index(aux: AuxSequences, i: int) -> int:
    return aux.j_index(i)


def _tau_prime(p0, n: int) -> int:
    """``floor((log n + 1) (n+1)**p0 / n)``, with a precision-doubling guard."""
    if n == 1:
        return num.floor_div_power(2, p0, 1)
    bits = num.get_precision() + 64
    while True:
        with num.precision(bits):
            v = (gmpy2.log(gmpy2.mpfr(n)) + 1) * gmpy2.mpfr(n + 1) ** p0 / n
            eps = v * gmpy2.mpfr(2) ** (16 - bits)
            lo, hi = int(gmpy2.floor(v - eps)), int(gmpy2.floor(v + eps))
        if lo == hi:
            return lo
        bits *= 2


def tau_of(family, n: int, p0=None) -> int:
    fam = as_family(family, p0)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if fam.name in (XTILDE1, YTILDE1):
        return n
    if fam.name in (XHAT, YHAT):
        if fam.infinite:
            return 2 ** n
        return num.floor_div_power(n + 1, fam.p0, n)
    if fam.name in (XHAT_PRIME, YHAT_PRIME):
        return _tau_prime(fam.p0, n)
    return aux_sequences(fam.p0, n).tau


def branch_runs(family, n: int, p0=None) -> tuple:
    """Weight runs ``((F, count), ...)`` of branch n."""
    fam = as_family(family, p0)
    if fam.name in (XTILDE1, YTILDE1):
        return tuple((num.mpq(2 ** i), 1) for i in range(1, n + 1))
    if fam.name in (XTILDE, YTILDE):
        aux = aux_sequences(fam.p0, n)
        return tuple(zip(aux.m, aux.s))
    return ((num.mpq(n), tau_of(fam, n)),)


def make_space(family, N: int, p0=None) -> Space:
    fam = as_family(family, p0)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    space = build_from_runs(fam.generation, [branch_runs(fam, n) for n in range(1, N + 1)])
    object.__setattr__(space, "label", str(fam))
    return space


def delta_witness(space: Space, n: int, component: str | None = None) -> TestFunction:
    """Indicator of the root of branch n."""
    b = space.branch(n, component)
    return TestFunction.delta(space, b.root)


# analytic bounds ----------------------------------------------------------

LOWER = "lower-on-delta-witness"
UPPER = "upper-for-all-f"


@dataclass(frozen=True)
class Bound:
    value: object
    tag: str
    formula: str
    convention: str = "power"  # compares against ||Tf||^p / ||f||^p


def _pw(x, p):
    return num.power(num.scalar(x), p)


def _lower(fam: Family, n, p, operator, kind):
    name = fam.name
    if name in (XHAT, XHAT_PRIME) and kind == WEAK:
        t = tau_of(fam, n)
        return num.mpq(n * t) / _pw(2 * (n + 1), p), "n tau_n / (2(n+1))^p"
    if name in (YHAT, YHAT_PRIME) and kind == WEAK and operator == NONCENTERED:
        t = tau_of(fam, n)
        return num.mpq(n * t) / _pw(2 * (n + 2), p), "n tau_n / (2(n+2))^p"
    if p == 1 and kind == STRONG and (name == XTILDE1 or (name == YTILDE1 and operator == NONCENTERED)):
        return num.mpq(n, 2), "n / 2"
    if name == XTILDE and kind == STRONG and p == fam.p0:
        a = aux_sequences(fam.p0, n)
        return num.mpq(a.e * n * a.c) / _pw(n + 1, fam.p0), "e_n n c_n / (1+n)^p0"
    if name == YTILDE and kind == STRONG and operator == NONCENTERED and p == fam.p0:
        a = aux_sequences(fam.p0, n)
        return num.mpq(a.e * n * a.c) / (_pw(2, fam.p0) * _pw(n + 1, fam.p0)), "2^-p0 e_n n c_n / (1+n)^p0"
    return None


def _upper(fam: Family, p, operator, kind):
    name = fam.name
    p0 = fam.p0
    if num.is_inf(p):
        return (num.ONE, "||Tf||_inf <= ||f||_inf") if kind == STRONG else None
    if fam.generation == SECOND and operator == CENTERED and p == 1:
        return num.mpq(5), "4 ||f||_1 + ||f||_1"
    if name == XHAT and not fam.infinite and p == p0:
        return 3 + _pw(2, p0 + 1), "3 + 2^(p0+1)"
    if name == XTILDE1 and kind == WEAK and p == 1:
        return num.mpq(2), "2"
    if name == XTILDE and kind == WEAK and p == p0:
        return _pw(2, p0 + 3), "2^(p0+3)"
    if name == YHAT and not fam.infinite and operator == NONCENTERED and p == p0:
        return 4 + _pw(3, p0 + 1), "4 + 3^(p0+1)"
    if name == YTILDE1 and operator == NONCENTERED and kind == WEAK and p == 1:
        return num.mpq(2), "2"
    if name == YTILDE and operator == NONCENTERED and kind == WEAK and p == p0:
        return 4 * _pw(3, p0 + 1), "4 * 3^(p0+1)"
    return None


def analytic_bound(family, n, p, operator, kind, which=None, p0=None) -> Bound:
    """Tabulated constant for a (family, exponent, operator, kind) combination.

    ``which`` selects ``"lower"`` (delta-witness ratio at branch n) or
    ``"upper"`` (valid for every f >= 0); if omitted, the lower bound is
    looked up first.  Values are in the p-th power convention.  Upper
    constants for strong type also bound the weak ratio.
    """
    fam = as_family(family, p0)
    p = num.parse_exponent(p)
    if which in (None, "lower") and n is not None and not num.is_inf(p):
        hit = _lower(fam, n, p, operator, kind)
        if hit is not None:
            return Bound(hit[0], LOWER, hit[1])
    if which in (None, "upper"):
        hit = _upper(fam, p, operator, kind)
        if hit is not None:
            return Bound(hit[0], UPPER, hit[1])
    raise UnknownBoundError(f"no {which or 'analytic'} bound for {fam}, p = {num.exponent_text(p)}, {operator}, {kind}")


def has_upper(family, p, operator, kind, p0=None) -> bool:
    try:
        analytic_bound(family, None, p, operator, kind, which="upper", p0=p0)
    except UnknownBoundError:
        return False
    return True


def growth_ratio(family, n: int, p, p0=None):
    """``n tau_n / (n+1)**p``, the quantity whose growth drives the hat witnesses."""
    fam = as_family(family, p0)
    return num.mpq(n * tau_of(fam, n)) / _pw(n + 1, num.parse_exponent(p))


# witness scans ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScanRow:
    n: int
    report: object
    bound: Bound
    passed: bool


@dataclass(frozen=True, eq=False)
class ScanResult:
    family: Family
    p: object
    operator: str
    kind: str
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def ratios(self) -> list:
        return [r.report.power_ratio for r in self.rows]

    def strictly_increasing(self, start: int | None = None) -> bool:
        rows = [r for r in self.rows if start is None or r.n >= start]
        return all(b.report.power_ratio > a.report.power_ratio for a, b in zip(rows, rows[1:]))

    def grows(self) -> bool:
        """Last ratio exceeds the first: the finite-range growth signal."""
        return len(self.rows) >= 2 and self.rows[-1].report.power_ratio > self.rows[0].report.power_ratio

    def summary(self) -> dict:
        rs = self.ratios()
        ups = sum(1 for a, b in zip(rs, rs[1:]) if b > a)
        return {
            "rows": len(rs),
            "passed": self.passed,
            "increasing_steps": ups,
            "first": num.to_text(rs[0]) if rs else None,
            "last": num.to_text(rs[-1]) if rs else None,
            "grows": self.grows(),
        }


def scan_space(space: Space, family, p, operator, kind, n_values, component=None, p0=None) -> ScanResult:
    """Delta-witness ratios on a prebuilt space against the family's lower bound."""
    fam = as_family(family, p0)
    p = num.parse_exponent(p)
    rows = []
    for n in n_values:
        bound = analytic_bound(fam, n, p, operator, kind, which="lower")
        rep = type_ratio(space, delta_witness(space, n, component), p, operator, kind)
        rows.append(ScanRow(n, rep, bound, num.ge(rep.power_ratio, bound.value)))
    return ScanResult(fam, p, operator, kind, rows)


def witness_scan(family, p, operator, kind, n_range, p0=None, N=None) -> ScanResult:
    fam = as_family(family, p0)
    n_values = list(n_range)
    N = max(n_values) if N is None else N
    if N < max(n_values):
        raise DomainError("space must be built at least to max(n_range)")
    return scan_space(make_space(fam, N), fam, p, operator, kind, n_values)


# bound trials -------------------------------------------------------------

STRADDLE = num.mpq(1, 1024)


def _straddles(space: Space, keep: set) -> list:
    """Profiles sitting just around the thresholds the weak-type proofs split on."""
    out = []
    for b in space.branches:
        if b.root not in keep:
            continue
        starts = list(accumulate([0] + [c for _, c in b.runs]))
        for j, (w, _) in enumerate(b.runs):
            for sign in (1, -1):
                bump = 1 + sign * STRADDLE
                vals = [num.ZERO] * space.size
                if b.generation == FIRST:
                    vals[b.root] = (1 + w) / 2 * bump
                    for i in range(1, starts[j] + 1):
                        vals[b.satellite(i)] = num.mpq(1, 2) * bump
                else:
                    vals[b.root] = (1 + num.mpq(1, b.tau) + w) / 3 * bump
                    for i in range(1, starts[j] + 1):
                        vals[b.tip(i)] = num.mpq(1, 3) * bump
                        vals[b.satellite(i)] = num.mpq(1, 3) * bump
                vals = [v if k in keep else num.ZERO for k, v in enumerate(vals)]
                out.append(TestFunction(space, tuple(vals)))
    return out


def structured_suite(space: Space, seed: int = 0, support=None, max_deltas: int = 400,
                     n_constant: int = 8) -> list:
    """Deltas, branch indicators, branch-constant and threshold-straddling profiles."""
    pts = list(range(space.size)) if support is None else list(support)
    keep = set(pts)
    roots = [b.root for b in space.branches if b.root in keep]
    if len(pts) <= max_deltas:
        delta_at = pts
    else:
        # roots, plus the first satellite (and tip) of every weight run if that still fits
        delta_at = list(roots)
        for b in space.branches:
            if b.root not in keep:
                continue
            i = 1
            for _, c in b.runs:
                delta_at.append(b.satellite(i))
                if b.generation == SECOND:
                    delta_at.append(b.tip(i))
                i += c
        if len(delta_at) > max_deltas:
            delta_at = roots
    suite = [TestFunction.delta(space, k) for k in delta_at]
    suite.append(TestFunction.indicator(space, pts))
    for b in space.branches:
        members = [k for k in range(b.start, b.stop) if k in keep]
        if members:
            suite.append(TestFunction.indicator(space, members))
    rng = rng_for(seed, 10 ** 9)
    for _ in range(n_constant):
        vals = [num.ZERO] * space.size
        for b in space.branches:
            c = num.mpq(float(2.0 ** rng.uniform(-20, 20)))
            for k in range(b.start, b.stop):
                if k in keep:
                    vals[k] = c
        suite.append(TestFunction(space, tuple(vals)))
    suite.extend(_straddles(space, keep))
    return suite


@dataclass(frozen=True, eq=False)
class TrialReport:
    constant: Bound
    p: object
    operator: str
    kind: str
    checked: int
    max_ratio: object
    worst: object
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def counterexample(space: Space, rep, constant) -> dict:
    from .maximal import maximal

    Tf = maximal(space, rep.f, rep.operator)
    balls = []
    if rep.level is not None:
        for k, v in enumerate(Tf.values):
            if v >= rep.level:
                bl = Tf.witnesses[k]
                balls.append({"point": str(space.points[k]), "ball": bl.kind, "members": bl.names(space)})
    return {
        "space": space.to_dict(),
        "f": rep.f.to_dict(),
        "p": num.exponent_text(rep.p),
        "operator": rep.operator,
        "kind": rep.kind,
        "ratio": num.to_text(rep.power_ratio),
        "constant": num.to_text(constant.value),
        "level": None if rep.level is None else num.to_text(rep.level),
        "balls": balls,
    }


def trials_on_space(space: Space, constant: Bound, p, operator, kind, trials: int, seed: int,
                    support=None, structured: bool = True, max_deltas: int = 400,
                    n_constant: int = 8, on_report=None) -> TrialReport:
    """Check ``ratio <= constant`` over the structured suite plus random profiles.

    ``on_report(label, report, passed)`` is called for every test function;
    structured entries are labelled ``s0, s1, ...`` and random trials by index.
    """
    p = num.parse_exponent(p)
    funcs = structured_suite(space, seed, support, max_deltas, n_constant) if structured else []
    worst = None
    violations = []
    checked = 0

    def run(label, f):
        nonlocal worst, checked
        rep = type_ratio(space, f, p, operator, kind)
        checked += 1
        if worst is None or rep.power_ratio > worst.power_ratio:
            worst = rep
        ok = num.le(rep.power_ratio, constant.value)
        if not ok:
            violations.append(counterexample(space, rep, constant))
        if on_report is not None:
            on_report(label, rep, ok)

    for k, f in enumerate(funcs):
        run(f"s{k}", f)
    for t in range(trials):
        run(str(t), random_profile(space, rng_for(seed, t), support))
    return TrialReport(constant, p, operator, kind, checked, worst.power_ratio, worst, violations)


def bound_trials(family, p, operator, kind, trials: int, seed: int, N: int, p0=None,
                 raise_on_violation: bool = False, on_report=None) -> TrialReport:
    fam = as_family(family, p0)
    constant = analytic_bound(fam, None, p, operator, kind, which="upper")
    report = trials_on_space(make_space(fam, N), constant, p, operator, kind, trials, seed,
                             on_report=on_report)
    if raise_on_violation and report.violations:
        raise BoundViolation(f"{fam}: ratio exceeded {constant.formula}", report.violations[0])
    return report


__all__ = [
    "Family", "AuxSequences", "Bound", "ScanResult", "ScanRow", "TrialReport", "FAMILIES",
    "XHAT", "XHAT_PRIME", "XTILDE1", "XTILDE", "YHAT", "YHAT_PRIME", "YTILDE1", "YTILDE",
    "as_family", "aux_sequences", "j_index", "tau_of", "branch_runs", "make_space", "delta_witness",
    "analytic_bound", "has_upper", "growth_ratio", "witness_scan", "scan_space", "bound_trials",
    "trials_on_space", "structured_suite", "cmp_scaled_m", "m_value", "c_value", "e_value",
]
