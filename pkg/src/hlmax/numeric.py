"""Scalar arithmetic: exact rationals (``mpq``) and big floats (``mpfr``).

A *Scalar* is either a :class:`gmpy2.mpq` (exact) or a :class:`gmpy2.mpfr`
(inexact, at least 128 bits of mantissa).  gmpy2 already promotes
``mpq op mpfr`` to ``mpfr``, so exactness propagates the right way without a
wrapper class; :func:`is_exact` reads the flag off the type.

Inexact comparisons go through :func:`le` / :func:`eq` and friends, which
apply a relative tolerance (``1e-25`` by default).
"""
from __future__ import annotations

import os
from contextlib import contextmanager
from fractions import Fraction
from numbers import Integral, Rational
from typing import Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

from .exceptions import DomainError

MPQ = type(mpq(0))
MPFR = type(mpfr(0))
Scalar = Union[MPQ, MPFR]

MIN_PRECISION = 128
DEFAULT_PRECISION = max(MIN_PRECISION, int(os.environ.get("HLMAX_PRECISION", "160")))

_state = {"rtol": None}


def set_precision(bits: int) -> None:
    if bits < MIN_PRECISION:
        raise ValueError(f"precision must be at least {MIN_PRECISION} bits, got {bits}")
    gmpy2.get_context().precision = int(bits)
    _state["rtol"] = None


def get_precision() -> int:
    return gmpy2.get_context().precision


@contextmanager
def precision(bits: int):
    """Temporarily raise the working precision."""
    old = get_precision()
    set_precision(bits)
    try:
        yield
    finally:
        set_precision(old)


set_precision(DEFAULT_PRECISION)

INF = gmpy2.inf()
ZERO = mpq(0)
ONE = mpq(1)


def is_exact(x) -> bool:
    return isinstance(x, (MPQ, Rational))


def is_inf(x) -> bool:
    if isinstance(x, MPFR):
        return bool(gmpy2.is_infinite(x)) and x > 0
    return isinstance(x, float) and x == float("inf")


def scalar(x) -> Scalar:
    """Coerce ``x`` to a Scalar.

    ints, Fractions and rational strings become exact; floats become
    ``mpfr`` (they are treated as measurements, not as exact binaries).
    """
    if isinstance(x, (MPQ, MPFR)):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (Integral, type(mpz(0)))):
        return mpq(int(x))
    if isinstance(x, (Fraction, Rational)):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        return mpfr(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot interpret {x!r} as a scalar")


def parse_rational(text: str) -> MPQ:
    """Parse ``"3/2"``, ``"2"`` or ``"1.25"`` as an exact rational."""
    s = str(text).strip()
    if not s:
        raise DomainError("empty rational literal")
    try:
        return mpq(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not a rational literal: {text!r}") from exc


def parse_exponent(text) -> Scalar:
    """Parse an exponent: a rational literal or ``"inf"``."""
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    if is_inf(text):
        return INF
    if isinstance(text, str):
        return parse_rational(text)
    value = scalar(text)
    if not is_exact(value):
        raise DomainError(f"exponents must be exact rationals, got {text!r}")
    return value


def exponent_text(p) -> str:
    if is_inf(p):
        return "inf"
    return to_text(p)


def get_rtol() -> MPFR:
    if _state["rtol"] is None:
        _state["rtol"] = mpfr("1e-25")
    return _state["rtol"]


def set_rtol(value) -> None:
    _state["rtol"] = mpfr(value)


def _slack(a, b, rtol):
    rtol = get_rtol() if rtol is None else mpfr(rtol)
    return rtol * max(abs(a), abs(b))


def eq(a, b, rtol=None) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(a - b) <= _slack(a, b, rtol)


def le(a, b, rtol=None) -> bool:
    """``a <= b``; exact when both are exact, tolerant otherwise."""
    if is_exact(a) and is_exact(b):
        return a <= b
    return a <= b or abs(a - b) <= _slack(a, b, rtol)


def ge(a, b, rtol=None) -> bool:
    return le(b, a, rtol)


def lt(a, b, rtol=None) -> bool:
    return not ge(a, b, rtol)


def _exact_root(x: MPQ, k: int):
    """Exact k-th root of a nonnegative rational, or None."""
    num, ok_n = gmpy2.iroot(x.numerator, k)
    if not ok_n:
        return None
    den, ok_d = gmpy2.iroot(x.denominator, k)
    if not ok_d:
        return None
    return mpq(num, den)


def power(x, p) -> Scalar:
    """``x ** p`` for ``x >= 0`` and rational ``p``; exact whenever possible."""
    if is_inf(p):
        raise ValueError("infinite exponent")
    p = scalar(p)
    if x == 0:
        return ZERO if is_exact(x) else mpfr(0)
    if is_exact(p) and p.denominator == 1:
        return x ** int(p)
    if is_exact(x) and is_exact(p):
        r = _exact_root(x, int(p.denominator))
        if r is not None:
            return r ** int(p.numerator)
    return mpfr(x) ** p


def root(x, p) -> Scalar:
    """``x ** (1/p)``."""
    p = scalar(p)
    if p == 1:
        return x
    return power(x, 1 / p)


def floor_div_power(base: int, p: MPQ, divisor: int) -> int:
    """``floor(base**p / divisor)`` for rational ``p = a/b >= 0``, exactly.

    Largest t with ``(t*divisor)**b <= base**a``, i.e. ``iroot(base**a, b) // divisor``.
    """
    a, b = int(p.numerator), int(p.denominator)
    r, _ = gmpy2.iroot(mpz(base) ** a, b)
    return int(r) // divisor


def to_text(x) -> str:
    """Lossless text form: ``"p/q"`` for exact values, decimal digits otherwise."""
    if is_exact(x):
        return str(x)
    return str(x) if not gmpy2.is_infinite(x) else "inf"


def from_text(text: str, exact: bool) -> Scalar:
    if exact:
        return parse_rational(text)
    return mpfr(text)


def to_float(x) -> float:
    return float(x)
