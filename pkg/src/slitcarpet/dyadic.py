"""Exact rational helpers shared by the geometry and certificate layers.

All certified quantities in this package are dyadic rationals (k / 2**e) or
general ``fractions.Fraction`` values; floats appear only in the numerical
solvers.  This module holds the small amount of machinery needed to keep
everything else exact: canonical dyadic decomposition, power-of-two flooring,
exact and bracketed square roots, and a JSON encoding for rationals that never
goes through floating point.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from math import isqrt
from typing import Optional, Tuple, Union

Rational = Union[int, str, float, Fraction]


class DyadicError(ValueError):
    """Raised when a value that must be dyadic (or in range) is not."""


def frac(value: Rational, den: Optional[int] = None) -> Fraction:
    """Coerce to Fraction. Floats are accepted only if exactly representable."""
    if den is not None:
        return Fraction(value, den)
    if isinstance(value, float):
        f = Fraction(value)
        return f
    return Fraction(value)


def is_dyadic(q: Fraction) -> bool:
    """True when the denominator of q is a power of two."""
    d = q.denominator
    return d & (d - 1) == 0


def dyadic_parts(q: Fraction) -> Tuple[int, int]:
    """Canonical (numerator, exponent) with q = numerator / 2**exponent.

    The numerator is odd unless q is zero or an integer (exponent 0).
    """
    if not is_dyadic(q):
        raise DyadicError(f"{q} is not dyadic")
    return q.numerator, q.denominator.bit_length() - 1


def dyadic(num: int, exp: int) -> Fraction:
    """The dyadic rational num / 2**exp."""
    if exp < 0:
        raise DyadicError("exponent must be nonnegative")
    return Fraction(num, 1 << exp)


def pow2_floor(q: Fraction) -> Fraction:
    """Largest power 2**-j with 2**-j <= q < 2**-j+1, for q in (0, 1).

    Values that are already powers of two are returned unchanged.
    """
    if not 0 < q < 1:
        raise DyadicError(f"pow2_floor requires a value in (0,1), got {q}")
    j = 1
    while Fraction(1, 1 << j) > q:
        j += 1
    return Fraction(1, 1 << j)


def sqrt_exact(q: Fraction) -> Optional[Fraction]:
    """Exact rational square root of q, or None when irrational."""
    if q < 0:
        raise DyadicError("negative radicand")
    rn = isqrt(q.numerator)
    rd = isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def sqrt_bracket(q: Fraction, bits: int = 96) -> Tuple[Fraction, Fraction]:
    """Rational bracket lo <= sqrt(q) <= hi with relative width about 2**-bits."""
    if q < 0:
        raise DyadicError("negative radicand")
    if q == 0:
        return Fraction(0), Fraction(0)
    # sqrt(a/b) = sqrt(a*b)/b; scale so the integer sqrt carries `bits` bits.
    a, b = q.numerator, q.denominator
    s = a * b << (2 * bits)
    r = isqrt(s)
    lo = Fraction(r, b << bits)
    hi = Fraction(r + 1, b << bits)
    return lo, hi


class SqrtSum:
    """Exact sum  c0 + sum_i m_i * sqrt(q_i)  with certified rational brackets.

    Used for polyline lengths: axis-parallel pieces accumulate exactly into
    ``c0`` while diagonal pieces contribute multiples of square roots of
    rationals.  ``lower``/``upper`` return rational brackets whose width is
    controlled by the bit precision.
    """

    def __init__(self) -> None:
        self.exact = Fraction(0)
        self.terms: list[Tuple[Fraction, Fraction]] = []  # (coefficient, radicand)

    def add_exact(self, v: Fraction) -> None:
        self.exact += v

    def add_sqrt(self, coef: Fraction, radicand: Fraction) -> None:
        if coef == 0 or radicand == 0:
            return
        r = sqrt_exact(radicand)
        if r is not None:
            self.exact += coef * r
        else:
            self.terms.append((coef, radicand))

    @property
    def is_exact(self) -> bool:
        return not self.terms

    def lower(self, bits: int = 96) -> Fraction:
        total = self.exact
        for coef, rad in self.terms:
            lo, hi = sqrt_bracket(rad, bits)
            total += coef * (lo if coef > 0 else hi)
        return total

    def upper(self, bits: int = 96) -> Fraction:
        total = self.exact
        for coef, rad in self.terms:
            lo, hi = sqrt_bracket(rad, bits)
            total += coef * (hi if coef > 0 else lo)
        return total

    def to_float(self) -> float:
        return float((self.lower() + self.upper()) / 2)


def rational_to_json(q: Fraction) -> dict:
    """Encode a rational exactly: {"num", "exp2"} when dyadic, else {"num", "den"}."""
    q = Fraction(q)
    if is_dyadic(q):
        num, exp = dyadic_parts(q)
        return {"num": num, "exp2": exp}
    return {"num": q.numerator, "den": q.denominator}


def rational_from_json(obj: Union[dict, int, str]) -> Fraction:
    if isinstance(obj, dict):
        if "exp2" in obj:
            return dyadic(int(obj["num"]), int(obj["exp2"]))
        return Fraction(int(obj["num"]), int(obj["den"]))
    return Fraction(obj)


def parse_rational(text: str) -> Fraction:
    """Parse '1/2', '0.3', or '3' into an exact Fraction (decimal read exactly)."""
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError as exc:
        raise DyadicError(f"cannot parse rational {text!r}") from exc


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path atomically (temp file + rename in same directory)."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(path: str, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
