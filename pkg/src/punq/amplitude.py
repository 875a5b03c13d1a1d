"""Exact scalars in the number field Q(sqrt2, i).

Every amplitude is stored as four rationals ``(a, b, c, d)`` standing for
``(a + b*sqrt2) + (c + d*sqrt2)*i``.  Equality is structural, so deciding
``alpha == 0`` is trivial and exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]


def _frac(x: Rational | str) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RealAlg:
    """A real number ``rat + sqrt2 * sqrt(2)`` with rational coordinates."""

    rat: Fraction = Fraction(0)
    sqrt2: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rat", _frac(self.rat))
        object.__setattr__(self, "sqrt2", _frac(self.sqrt2))

    def __add__(self, other: "RealAlg") -> "RealAlg":
        return RealAlg(self.rat + other.rat, self.sqrt2 + other.sqrt2)

    def __sub__(self, other: "RealAlg") -> "RealAlg":
        return RealAlg(self.rat - other.rat, self.sqrt2 - other.sqrt2)

    def __neg__(self) -> "RealAlg":
        return RealAlg(-self.rat, -self.sqrt2)

    def __mul__(self, other: "RealAlg") -> "RealAlg":
        a, b, c, d = self.rat, self.sqrt2, other.rat, other.sqrt2
        return RealAlg(a * c + 2 * b * d, a * d + b * c)

    def is_zero(self) -> bool:
        return self.rat == 0 and self.sqrt2 == 0

    def sign(self) -> int:
        """Exact sign in {-1, 0, 1}."""
        a, b = self.rat, self.sqrt2
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # a and b have opposite signs: compare a^2 with 2 b^2
        lhs, rhs = a * a, 2 * b * b
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def inverse(self) -> "RealAlg":
        den = self.rat * self.rat - 2 * self.sqrt2 * self.sqrt2
        if den == 0:
            raise ZeroDivisionError("inverse of zero")
        return RealAlg(self.rat / den, -self.sqrt2 / den)

    def __float__(self) -> float:
        return float(self.rat) + float(self.sqrt2) * 2 ** 0.5

    def __str__(self) -> str:
        return _fmt_real(self.rat, self.sqrt2) or "0"

    @staticmethod
    def of(x: Rational) -> "RealAlg":
        return RealAlg(_frac(x), Fraction(0))


@dataclass(frozen=True)
class Amplitude:
    """An element of Q(sqrt2, i) with exact decidable equality."""

    re_rat: Fraction = Fraction(0)
    re_sqrt2: Fraction = Fraction(0)
    im_rat: Fraction = Fraction(0)
    im_sqrt2: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        for name in ("re_rat", "re_sqrt2", "im_rat", "im_sqrt2"):
            object.__setattr__(self, name, _frac(getattr(self, name)))

    # construction helpers
    @staticmethod
    def of(x: Rational | str) -> "Amplitude":
        return Amplitude(_frac(x))

    @staticmethod
    def from_parts(re: RealAlg, im: RealAlg) -> "Amplitude":
        return Amplitude(re.rat, re.sqrt2, im.rat, im.sqrt2)

    @property
    def real(self) -> RealAlg:
        return RealAlg(self.re_rat, self.re_sqrt2)

    @property
    def imag(self) -> RealAlg:
        return RealAlg(self.im_rat, self.im_sqrt2)

    def int_key(self) -> tuple[int, ...]:
        """Hash-friendly exact encoding as numerator/denominator integers."""
        k = self.__dict__.get("_ik")
        if k is None:
            k = tuple(v for c in self.components() for v in (c.numerator, c.denominator))
            object.__setattr__(self, "_ik", k)
        return k

    def components(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.re_rat, self.re_sqrt2, self.im_rat, self.im_sqrt2)

    # field operations
    def __add__(self, other: "Amplitude") -> "Amplitude":
        other = _coerce(other)
        return Amplitude(*(x + y for x, y in zip(self.components(), other.components())))

    __radd__ = __add__

    def __sub__(self, other: "Amplitude") -> "Amplitude":
        return self + (-_coerce(other))

    def __rsub__(self, other: "Amplitude") -> "Amplitude":
        return _coerce(other) - self

    def __neg__(self) -> "Amplitude":
        return Amplitude(*(-x for x in self.components()))

    def __mul__(self, other: "Amplitude") -> "Amplitude":
        other = _coerce(other)
        re = self.real * other.real - self.imag * other.imag
        im = self.real * other.imag + self.imag * other.real
        return Amplitude.from_parts(re, im)

    __rmul__ = __mul__

    def conj(self) -> "Amplitude":
        return Amplitude(self.re_rat, self.re_sqrt2, -self.im_rat, -self.im_sqrt2)

    def norm_sq(self) -> RealAlg:
        return self.real * self.real + self.imag * self.imag

    def is_zero(self) -> bool:
        return not any(self.components())

    def inverse(self) -> "Amplitude":
        n = self.norm_sq()
        if n.is_zero():
            raise ZeroDivisionError("inverse of zero amplitude")
        inv = n.inverse()
        c = self.conj()
        return Amplitude.from_parts(c.real * inv, c.imag * inv)

    def __truediv__(self, other: "Amplitude") -> "Amplitude":
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other: "Amplitude") -> "Amplitude":
        return _coerce(other) * self.inverse()

    def __bool__(self) -> bool:
        return not self.is_zero()

    def to_complex(self) -> complex:
        """Floating point rendering, for display only."""
        return complex(float(self.real), float(self.imag))

    def __str__(self) -> str:
        return format_amplitude(self)

    def __repr__(self) -> str:
        return f"Amplitude({format_amplitude(self)})"


def _coerce(x: object) -> Amplitude:
    if isinstance(x, Amplitude):
        return x
    if isinstance(x, (int, Fraction)):
        return Amplitude.of(x)
    raise TypeError(f"cannot use {type(x).__name__} as an amplitude")


ZERO = Amplitude()
ONE = Amplitude.of(1)
MINUS_ONE = Amplitude.of(-1)
I = Amplitude(0, 0, 1, 0)
SQRT2 = Amplitude(0, 1)
ISQRT2 = Amplitude(0, Fraction(1, 2))
HALF = Amplitude.of(Fraction(1, 2))


def amp_add(x: Amplitude, y: Amplitude) -> Amplitude:
    return x + y


def amp_mul(x: Amplitude, y: Amplitude) -> Amplitude:
    return x * y


def amp_conj(x: Amplitude) -> Amplitude:
    return x.conj()


def amp_norm_sq(x: Amplitude) -> RealAlg:
    return x.norm_sq()


def amp_is_zero(x: Amplitude) -> bool:
    return x.is_zero()


# ---------------------------------------------------------------------------
# textual form


def _fmt_rat(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_real(rat: Fraction, s2: Fraction) -> str:
    parts: list[str] = []
    if rat:
        parts.append(_fmt_rat(rat))
    if s2:
        if s2 == Fraction(1, 2):
            parts.append("isqrt2")
        elif s2 == Fraction(-1, 2):
            parts.append("-isqrt2")
        elif s2 == 1:
            parts.append("sqrt2")
        elif s2 == -1:
            parts.append("-sqrt2")
        else:
            parts.append(f"{_fmt_rat(s2)}*sqrt2")
    return " + ".join(parts)


def format_amplitude(x: Amplitude) -> str:
    """Render in the literal grammar; ``parse_amplitude`` inverts it."""
    re = _fmt_real(x.re_rat, x.re_sqrt2)
    im_terms: list[str] = []
    if x.im_rat:
        im_terms.append("i" if x.im_rat == 1 else "-i" if x.im_rat == -1 else f"{_fmt_rat(x.im_rat)}*i")
    if x.im_sqrt2:
        if x.im_sqrt2 == Fraction(1, 2):
            im_terms.append("isqrt2*i")
        elif x.im_sqrt2 == Fraction(-1, 2):
            im_terms.append("-isqrt2*i")
        else:
            im_terms.append(f"{_fmt_rat(x.im_sqrt2)}*sqrt2*i")
    terms = ([re] if re else []) + im_terms
    if not terms:
        return "0"
    text = " + ".join(terms)
    if " + " in text:
        return f"({text})"
    return text


_TOKEN = re.compile(r"\s*(?:(\d+)|(isqrt2|sqrt2|i)\b|([-+*/()]))")


class AmplitudeSyntaxError(ValueError):
    pass


class _AmpParser:
    """Recursive descent over sums of products of atoms."""

    def __init__(self, text: str, pos: int = 0) -> None:
        self.text = text
        self.pos = pos

    def peek(self) -> str | None:
        m = _TOKEN.match(self.text, self.pos)
        if not m or m.end() == m.start():
            return None
        return m.group(1) or m.group(2) or m.group(3)

    def take(self) -> str:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            raise AmplitudeSyntaxError(f"unexpected input at {self.pos}: {self.text[self.pos:self.pos + 10]!r}")
        self.pos = m.end()
        return m.group(1) or m.group(2) or m.group(3)

    def expr(self) -> Amplitude:
        acc = self.product()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.product()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def product(self) -> Amplitude:
        acc = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            acc = acc * rhs if op == "*" else acc / rhs
        return acc

    def unary(self) -> Amplitude:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        return self.atom()

    def atom(self) -> Amplitude:
        tok = self.take()
        if tok.isdigit():
            return Amplitude.of(int(tok))
        if tok == "sqrt2":
            return SQRT2
        if tok == "isqrt2":
            return ISQRT2
        if tok == "i":
            return I
        if tok == "(":
            val = self.expr()
            if self.take() != ")":
                raise AmplitudeSyntaxError("expected ')'")
            return val
        raise AmplitudeSyntaxError(f"unexpected token {tok!r}")


def parse_amplitude(text: str) -> Amplitude:
    p = _AmpParser(text)
    val = p.expr()
    if p.text[p.pos:].strip():
        raise AmplitudeSyntaxError(f"trailing input: {p.text[p.pos:]!r}")
    return val
