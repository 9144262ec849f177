"""Exact arithmetic helpers: rationals and the field Q(sqrt 2).

Gap points of the cut space need irrational positions; numbers of the form
a + b*sqrt(2) with rational a, b and b != 0 are irrational, closed under the
operations we need, and admit exact sign tests.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

Number = "Fraction | QSqrt2"

_SQRT2 = math.sqrt(2.0)
# float comparisons are trusted only beyond this relative margin
_FLOAT_SLACK = 1e-9


def _sign(c: Fraction, d: Fraction) -> int:
    """Sign of c + d*sqrt(2)."""
    if d == 0:
        return (c > 0) - (c < 0)
    if c == 0:
        return (d > 0) - (d < 0)
    if (c > 0) == (d > 0):
        return 1 if c > 0 else -1
    # opposite signs: compare c^2 with 2 d^2
    if c * c > 2 * d * d:
        return 1 if c > 0 else -1
    return 1 if d > 0 else -1


class QSqrt2:
    """a + b*sqrt(2) with rational a, b."""

    __slots__ = ("a", "b", "_f", "_m")

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)
        fa, fb = float(self.a), float(self.b) * _SQRT2
        self._f = fa + fb
        # size of the summands; float error in _f scales with this
        self._m = abs(fa) + abs(fb)

    @staticmethod
    def _coerce(other):
        if isinstance(other, QSqrt2):
            return other
        if isinstance(other, (int, Rational)):
            return QSqrt2(other, 0)
        return None

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self) -> float:
        return self._f

    def __repr__(self) -> str:
        return f"QSqrt2({self.a}, {self.b})"

    def __str__(self) -> str:
        return format_qsqrt2(self)

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __eq__(self, other):
        if isinstance(other, QSqrt2):
            return self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def _cmp(self, other) -> int:
        if isinstance(other, QSqrt2):
            of = other._f
            diff = self._f - of
            slack = _FLOAT_SLACK * (1.0 + self._m + other._m)
            if diff < -slack:
                return -1
            if diff > slack:
                return 1
            return _sign(self.a - other.a, self.b - other.b)
        of = float(other)
        diff = self._f - of
        slack = _FLOAT_SLACK * (1.0 + self._m + abs(of))
        if diff < -slack:
            return -1
        if diff > slack:
            return 1
        return _sign(self.a - other, self.b)

    def __lt__(self, other):
        if not isinstance(other, (QSqrt2, int, Rational)):
            return NotImplemented
        return self._cmp(other) < 0

    def __gt__(self, other):
        if not isinstance(other, (QSqrt2, int, Rational)):
            return NotImplemented
        return self._cmp(other) > 0

    def __le__(self, other):
        if not isinstance(other, (QSqrt2, int, Rational)):
            return NotImplemented
        return self._cmp(other) <= 0

    def __ge__(self, other):
        if not isinstance(other, (QSqrt2, int, Rational)):
            return NotImplemented
        return self._cmp(other) >= 0

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        norm = o.a * o.a - 2 * o.b * o.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        conj = QSqrt2(o.a / norm, -o.b / norm)
        return self * conj


def as_exact(x) -> QSqrt2:
    return x if isinstance(x, QSqrt2) else QSqrt2(x, 0)


def floor_exact(x) -> int:
    """Exact floor of a rational or a + b*sqrt(2)."""
    if not isinstance(x, QSqrt2):
        return math.floor(Fraction(x))
    if x.b == 0:
        return math.floor(x.a)
    # b*sqrt(2) = ±sqrt(n/d); approximate to 2^-k with an integer sqrt, then
    # correct the guess by exact comparison (at most a step or two)
    b = abs(x.b)
    n, d = 2 * b.numerator ** 2, b.denominator ** 2
    k = 64 + max(x.a.numerator.bit_length() - x.a.denominator.bit_length(), 0)
    root = Fraction(math.isqrt((n << (2 * k)) // d), 1 << k)
    approx = x.a + root if x.b > 0 else x.a - root
    f = math.floor(approx)
    while QSqrt2(f) > x:
        f -= 1
    while QSqrt2(f + 1) <= x:
        f += 1
    return f


def bracket(x, bits: int) -> tuple[Fraction, Fraction]:
    """Dyadic interval [m/2^bits, (m+1)/2^bits] containing x."""
    scale = 1 << bits
    m = floor_exact(as_exact(x) * scale)
    return Fraction(m, scale), Fraction(m + 1, scale)


def _in_range(c: Fraction, lo, hi, lo_closed: bool, hi_closed: bool) -> bool:
    return (c > lo or (lo_closed and c == lo)) and (c < hi or (hi_closed and c == hi))


def dyadic_between(lo, hi, lo_closed: bool = False, hi_closed: bool = False,
                   max_bits: int = 200) -> Fraction:
    """The dyadic rational of least denominator in the interval lo..hi.

    Ends are open unless flagged closed; among candidates with the least
    denominator the smallest is returned.  Floats only nominate candidates;
    every acceptance is an exact comparison.
    """
    lo_e, hi_e = as_exact(lo), as_exact(hi)
    if hi_e < lo_e or (hi_e == lo_e and not (lo_closed and hi_closed)):
        raise ValueError(f"empty interval between {lo} and {hi}")
    lo_f, hi_f = float(lo_e), float(hi_e)
    for bits in range(max_bits + 1):
        scale = 1 << bits
        if bits <= 40:
            start = math.floor(lo_f * scale) - 1
            for m in range(start, start + 4):
                c_f = m / scale
                if c_f < lo_f - 1e-9:
                    continue
                if c_f > hi_f + 1e-9:
                    break
                cand = Fraction(m, scale)
                if _in_range(cand, lo_e, hi_e, lo_closed, hi_closed):
                    return cand
            continue
        m = floor_exact(lo_e * scale)
        for cand in (Fraction(m, scale), Fraction(m + 1, scale)):
            if _in_range(cand, lo_e, hi_e, lo_closed, hi_closed):
                return cand
    raise ValueError(f"no dyadic with <= {max_bits} bits between {lo} and {hi}")


def parse_fraction(text: str) -> Fraction:
    """Parse "p/q", an integer or a finite decimal exactly."""
    text = text.strip()
    if not text:
        raise ValueError("empty rational")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_qsqrt2(x: QSqrt2) -> str:
    """Serialise as "a|b" meaning a + b*sqrt(2)."""
    return f"{format_fraction(x.a)}|{format_fraction(x.b)}"


def parse_qsqrt2(text: str) -> QSqrt2:
    if "|" in text:
        a, b = text.split("|", 1)
        return QSqrt2(parse_fraction(a), parse_fraction(b))
    return QSqrt2(parse_fraction(text), 0)


def stern_brocot(count: int) -> list[Fraction]:
    """First ``count`` rationals of (0,1) in breadth-first Stern-Brocot order."""
    out: list[Fraction] = []
    level = [(Fraction(0), Fraction(1))]
    while len(out) < count:
        nxt = []
        for lo, hi in level:
            med = Fraction(lo.numerator + hi.numerator, lo.denominator + hi.denominator)
            out.append(med)
            nxt.append((lo, med))
            nxt.append((med, hi))
        level = nxt
    return out[:count]
