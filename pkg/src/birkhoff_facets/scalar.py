"""Exact scalars: rationals and elements of the real quadratic field Q[sqrt(d)].

Two number types live here:

``QuadExt``
    a field element ``a + b*sqrt(d)`` with rational ``a``, ``b``.  This is what
    the public API hands out (group matrices, facet normals, LP values).

``QuadInt``
    a ring element of Z[sqrt(d)] with integer coordinates.  The polytope
    engine works fraction-free in this ring, which keeps inner loops on plain
    Python integers.

Plain ``int`` and ``Fraction`` are accepted wherever a scalar is expected and
stand for the rational specialisation (``b == 0``).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache, total_ordering
from numbers import Rational

DEFAULT_D = 5


@lru_cache(maxsize=None)
def _check_d(d: int) -> int:
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d!r}")
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            raise ValueError(f"d must be squarefree, got {d}")
        k += 1
    return d


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def quad_sign(a, b, d: int) -> int:
    """Sign of ``a + b*sqrt(d)`` for rational (or integer) ``a``, ``b``.

    Same-sign coordinates decide immediately.  Otherwise the number shares its
    sign with its reciprocal ``(a - b*sqrt(d)) / (a*a - d*b*b)``; the numerator
    has the sign of ``a`` because ``a`` and ``-b`` agree in sign.
    """
    sa, sb = _sgn(a), _sgn(b)
    if sb == 0:
        return sa
    if sa == 0:
        return sb
    if sa == sb:
        return sa
    return sa * _sgn(a * a - d * b * b)


@total_ordering
class QuadExt:
    """Element ``a + b*sqrt(d)`` of Q[sqrt(d)].  Immutable."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = DEFAULT_D):
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "d", _check_d(d))

    def __setattr__(self, name, value):
        raise AttributeError("QuadExt is immutable")

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction, d: int) -> "QuadExt":
        obj = object.__new__(cls)
        object.__setattr__(obj, "a", a)
        object.__setattr__(obj, "b", b)
        object.__setattr__(obj, "d", d)
        return obj

    def _coerce(self, other):
        if isinstance(other, QuadExt):
            return other
        if isinstance(other, (int, Rational)):
            return QuadExt._raw(Fraction(other), Fraction(0), self.d)
        return NotImplemented

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt._raw(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt._raw(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt._raw(
            self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __neg__(self):
        return QuadExt._raw(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def conjugate(self) -> "QuadExt":
        return QuadExt._raw(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self) -> "QuadExt":
        n = self.norm()
        if n == 0:
            # norm vanishes only at zero since sqrt(d) is irrational
            raise ZeroDivisionError("division by zero in Q[sqrt(%d)]" % self.d)
        return QuadExt._raw(self.a / n, -self.b / n, self.d)

    # order ----------------------------------------------------------------
    def sign(self) -> int:
        return quad_sign(self.a, self.b, self.d)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadExt({self.a!s}, {self.b!s}, d={self.d})"

    def __str__(self):
        return qe_format(self)


class QuadInt:
    """Element ``a + b*sqrt(d)`` of the ring Z[sqrt(d)] (integer ``a``, ``b``).

    Only ring operations are provided.  Instances are used inside numpy object
    arrays, so the class stays minimal.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a: int, b: int, d: int):
        self.a = a
        self.b = b
        self.d = d

    def __add__(self, o):
        if isinstance(o, QuadInt):
            return QuadInt(self.a + o.a, self.b + o.b, self.d)
        if isinstance(o, int):
            return QuadInt(self.a + o, self.b, self.d)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, QuadInt):
            return QuadInt(self.a - o.a, self.b - o.b, self.d)
        if isinstance(o, int):
            return QuadInt(self.a - o, self.b, self.d)
        return NotImplemented

    def __rsub__(self, o):
        if isinstance(o, int):
            return QuadInt(o - self.a, -self.b, self.d)
        return NotImplemented

    def __mul__(self, o):
        if isinstance(o, QuadInt):
            return QuadInt(self.a * o.a + self.d * self.b * o.b,
                           self.a * o.b + self.b * o.a, self.d)
        if isinstance(o, int):
            return QuadInt(self.a * o, self.b * o, self.d)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return QuadInt(-self.a, -self.b, self.d)

    def __floordiv__(self, k: int):
        # exact division by a rational integer (content removal)
        return QuadInt(self.a // k, self.b // k, self.d)

    def __eq__(self, o):
        if isinstance(o, QuadInt):
            return self.a == o.a and self.b == o.b
        return self.b == 0 and self.a == o

    def __hash__(self):
        return hash(self.a) if self.b == 0 else hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def sign(self) -> int:
        return quad_sign(self.a, self.b, self.d)

    def __gt__(self, o):
        return (self - o).sign() > 0

    def __lt__(self, o):
        return (self - o).sign() < 0

    def __ge__(self, o):
        return (self - o).sign() >= 0

    def __le__(self, o):
        return (self - o).sign() <= 0

    def to_field(self) -> QuadExt:
        return QuadExt(self.a, self.b, self.d)

    def __repr__(self):
        return f"QuadInt({self.a}, {self.b}, d={self.d})"


def sign(x) -> int:
    """Sign of any supported exact scalar (int, Fraction, QuadExt, QuadInt)."""
    if isinstance(x, (QuadExt, QuadInt)):
        return x.sign()
    return _sgn(x)


def as_field(x, d: int | None):
    """Lift ``x`` into the scalar context: ``Fraction`` when ``d`` is None."""
    if d is None:
        if isinstance(x, QuadExt):
            if x.b != 0:
                raise ValueError(f"irrational value {x} in a rational context")
            return x.a
        if isinstance(x, QuadInt):
            if x.b != 0:
                raise ValueError(f"irrational value {x!r} in a rational context")
            return Fraction(x.a)
        return Fraction(x)
    if isinstance(x, QuadExt):
        if x.d != d:
            raise ValueError(f"value {x} belongs to Q[sqrt({x.d})], context is d={d}")
        return x
    if isinstance(x, QuadInt):
        return QuadExt(x.a, x.b, d)
    return QuadExt(x, 0, d)


def components(x) -> tuple[Fraction, Fraction]:
    """Rational and sqrt(d) coordinates of a field scalar."""
    if isinstance(x, (QuadExt, QuadInt)):
        return Fraction(x.a), Fraction(x.b)
    return Fraction(x), Fraction(0)


# named operations -----------------------------------------------------------

def qe_add(x: QuadExt, y: QuadExt) -> QuadExt:
    return x + y


def qe_sub(x: QuadExt, y: QuadExt) -> QuadExt:
    return x - y


def qe_mul(x: QuadExt, y: QuadExt) -> QuadExt:
    return x * y


def qe_div(x: QuadExt, y: QuadExt) -> QuadExt:
    return x / y


def qe_sign(x) -> int:
    return sign(x)


def qe_compare(x, y) -> int:
    return sign(x - y)


# text form --------------------------------------------------------------------

class ScalarParseError(ValueError):
    pass


_RAT = r"\d+(?:/\d+)?"
_QUAD_TERM = rf"(?:(?P<qc>{_RAT})\*)?sqrt\((?P<d>\d+)\)"
# a bare sqrt term, or a rational followed by an optional signed sqrt term
_QUAD_ONLY_RE = re.compile(rf"^(?P<qs>[+-])?{_QUAD_TERM}$")
_QUAD_RE = re.compile(rf"^(?P<r>[+-]?{_RAT})(?:(?P<qs>[+-]){_QUAD_TERM})?$")


def _parse_rational(text: str) -> Fraction:
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ScalarParseError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def qe_parse(text: str, d: int | None = DEFAULT_D):
    """Parse ``"p/q + r/s*sqrt(d)"`` (either term optional, any whitespace).

    Returns a ``QuadExt`` in context ``d``; with ``d=None`` only rational text is
    accepted and a ``Fraction`` is returned.
    """
    if re.search(r"[\d/]\s+[\d/]", text):
        raise ScalarParseError(f"whitespace inside a number in {text!r}")
    s = "".join(text.split())
    m = _QUAD_ONLY_RE.match(s)
    if m is None:
        m = _QUAD_RE.match(s)
    if not s or m is None:
        raise ScalarParseError(f"malformed scalar {text!r}")
    r = m.groupdict().get("r")
    a = _parse_rational(r.lstrip("+")) if r else Fraction(0)
    b = Fraction(0)
    if m.group("d") is not None:
        text_d = int(m.group("d"))
        if d is None or text_d != d:
            raise ScalarParseError(f"sqrt({text_d}) does not match the field context d={d}")
        b = _parse_rational(m.group("qc")) if m.group("qc") else Fraction(1)
        if m.group("qs") == "-":
            b = -b
    if d is None:
        return a
    return QuadExt(a, b, d)


def _fmt_rat(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def qe_format(x) -> str:
    """Canonical text: reduced fractions, rational term first, no spaces."""
    a, b = components(x)
    if b == 0:
        return _fmt_rat(a)
    d = x.d
    quad = f"{_fmt_rat(abs(b))}*sqrt({d})"
    if a == 0:
        return quad if b > 0 else "-" + quad
    return _fmt_rat(a) + ("+" if b > 0 else "-") + quad
