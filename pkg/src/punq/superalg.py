"""Vector-space structure on superpositions.

Canonical forms merge alpha-equivalent summands, drop zero amplitudes and
sort by the de Bruijn key, so two superpositions are equivalent exactly when
their canonical forms coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .amplitude import ONE, ZERO, Amplitude, RealAlg
from .syntax import (
    KET0,
    KET1,
    Ket0,
    Ket1,
    Node,
    Pair,
    Sup,
    Term,
    expand,
    from_terms,
    is_basis_value,
    is_closed,
    key,
    pretty,
)
from .types import Bool, Par, Prod, Sharp, Type, is_ground


@dataclass(frozen=True)
class CanonicalForm:
    """Distinct terms with nonzero amplitudes, sorted by key; empty means 0vec."""

    terms: tuple[tuple[Amplitude, Term], ...]

    def __iter__(self) -> Iterator[tuple[Amplitude, Term]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def to_sup(self) -> Sup:
        return from_terms(self.terms)

    def keyed(self) -> tuple:
        return tuple((a.int_key(), key(t)) for a, t in self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CanonicalForm):
            return NotImplemented
        return self.keyed() == other.keyed()

    def __hash__(self) -> int:
        return hash(self.keyed())

    def __str__(self) -> str:
        return pretty(self.to_sup())

    def is_value(self) -> bool:
        return all(is_basis_value(t) for _, t in self.terms)


def canonicalize(s: "Sup | Term | CanonicalForm") -> CanonicalForm:
    """Expand, merge alpha-equivalent summands, drop zeros, sort."""
    if isinstance(s, CanonicalForm):
        return s
    merged: dict[tuple, list] = {}
    for amp, t in expand(s):
        k = key(t)
        slot = merged.get(k)
        if slot is None:
            merged[k] = [amp, t]
        else:
            slot[0] = slot[0] + amp
    items = sorted(((k, a, t) for k, (a, t) in merged.items() if not a.is_zero()), key=lambda x: x[0])
    return CanonicalForm(tuple((a, t) for _, a, t in items))


def equiv(a: "Sup | Term", b: "Sup | Term") -> bool:
    return canonicalize(a) == canonicalize(b)


class NotAValue(ValueError):
    pass


def _value_form(v: "Sup | Term | CanonicalForm") -> CanonicalForm:
    cf = canonicalize(v)
    for _, t in cf:
        if not is_basis_value(t):
            raise NotAValue(f"not a value: {pretty(t)}")
        if not is_closed(t):
            raise NotAValue(f"open value: {pretty(t)}")
    return cf


def inner_product(v: "Sup | Term | CanonicalForm", w: "Sup | Term | CanonicalForm") -> Amplitude:
    """Sesquilinear (conjugate-linear on the left) product of closed values."""
    cv, cw = _value_form(v), _value_form(w)
    right = {key(t): a for a, t in cw}
    acc = ZERO
    for a, t in cv:
        b = right.get(key(t))
        if b is not None:
            acc = acc + a.conj() * b
    return acc


def norm_sq(v: "Sup | Term | CanonicalForm") -> RealAlg:
    return inner_product(v, v).real


def is_unit(v: "Sup | Term | CanonicalForm") -> bool:
    n = norm_sq(v)
    return n.rat == 1 and n.sqrt2 == 0


# ---------------------------------------------------------------------------
# realizers of ground types


def flat(q: Type) -> list[Term]:
    """Basis values of a ground type, in canonical order."""
    if isinstance(q, Bool):
        return [KET0, KET1]
    if isinstance(q, (Sharp, Par)):
        return flat(q.body)
    if isinstance(q, Prod):
        return [Pair(a, b) for a in flat(q.left) for b in flat(q.right)]
    raise ValueError(f"not a ground type: {q}")


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sqrt_real(r: RealAlg) -> Optional[RealAlg]:
    """Nonnegative square root inside Q(sqrt2), if there is one."""
    if r.sign() < 0:
        return None
    if r.is_zero():
        return RealAlg()
    a, b = r.rat, r.sqrt2
    cands: list[RealAlg] = []
    if b == 0:
        p = _rational_sqrt(a)
        if p is not None:
            cands.append(RealAlg(p, 0))
        q = _rational_sqrt(a / 2)
        if q is not None:
            cands.append(RealAlg(0, q))
    else:
        disc = _rational_sqrt(a * a - 2 * b * b)
        if disc is not None:
            for q2 in ((a + disc) / 4, (a - disc) / 4):
                q = _rational_sqrt(q2)
                if q:
                    for qq in (q, -q):
                        cands.append(RealAlg(b / (2 * qq), qq))
    for c in cands:
        if c * c == r and c.sign() > 0:
            return c
    return None


def member(v: "Sup | Term | CanonicalForm", q: Type) -> bool:
    """Syntactic membership of a closed value in the realizers of ``q``."""
    if not is_ground(q):
        raise ValueError(f"membership is only decided for ground types, got {q}")
    try:
        cf = _value_form(v)
    except NotAValue:
        return False
    return _member(list(cf.terms), q)


def _member(terms: list[tuple[Amplitude, Term]], q: Type) -> bool:
    if isinstance(q, Bool):
        return len(terms) == 1 and terms[0][0] == ONE and isinstance(terms[0][1], (Ket0, Ket1))
    if isinstance(q, Par):
        return _member(terms, q.body)
    if isinstance(q, Sharp):
        allowed = {key(t) for t in flat(q.body)}
        if not terms or any(key(t) not in allowed for _, t in terms):
            return False
        total = RealAlg()
        for a, _ in terms:
            total = total + a.norm_sq()
        return total == RealAlg(1, 0)
    if isinstance(q, Prod):
        return _member_prod(terms, q)
    return False


def _member_prod(terms: list[tuple[Amplitude, Term]], q: Prod) -> bool:
    if not terms or not all(isinstance(t, Pair) for _, t in terms):
        return False
    lefts: dict[tuple, Term] = {}
    rights: dict[tuple, Term] = {}
    m: dict[tuple[tuple, tuple], Amplitude] = {}
    for a, t in terms:
        kl, kr = key(t.left), key(t.right)
        lefts.setdefault(kl, t.left)
        rights.setdefault(kr, t.right)
        m[(kl, kr)] = m.get((kl, kr), ZERO) + a
    (a0, b0), m0 = next(iter(m.items()))
    u = {a: m.get((a, b0), ZERO) for a in lefts}
    w = {b: m.get((a0, b), ZERO) / m0 for b in rights}
    for a in lefts:
        for b in rights:
            if m.get((a, b), ZERO) != u[a] * w[b]:
                return False
    scales: list[Amplitude] = [x.inverse() for x in u.values() if not x.is_zero()]
    scales += [x for x in w.values() if not x.is_zero()]
    nu = RealAlg()
    for x in u.values():
        nu = nu + x.norm_sq()
    root = sqrt_real(nu.inverse())
    if root is not None:
        scales.append(Amplitude.from_parts(root, RealAlg()))
    for lam in scales:
        left = [(u[a] * lam, lefts[a]) for a in lefts if not u[a].is_zero()]
        right = [(w[b] / lam, rights[b]) for b in rights if not w[b].is_zero()]
        if _member(_sorted(left), q.left) and _member(_sorted(right), q.right):
            return True
    return False


def _sorted(terms: list[tuple[Amplitude, Term]]) -> list[tuple[Amplitude, Term]]:
    return sorted(terms, key=lambda at: key(at[1]))


def coefficient(v: "Sup | Term | CanonicalForm", t: Term) -> Amplitude:
    k = key(t)
    for a, s in canonicalize(v):
        if key(s) == k:
            return a
    return ZERO


def linear_combination(pairs: list[tuple[Amplitude, "Sup | Term"]]) -> CanonicalForm:
    """Canonical form of a finite weighted sum of superpositions."""
    terms: list[tuple[Amplitude, Term]] = []
    for c, s in pairs:
        terms.extend((c * a, t) for a, t in expand(s if not isinstance(s, CanonicalForm) else s.to_sup()))
    return canonicalize(from_terms(terms))


def scale(c: Amplitude, s: "Sup | Term | CanonicalForm") -> CanonicalForm:
    return linear_combination([(c, s)])


def add(a: "Sup | Term | CanonicalForm", b: "Sup | Term | CanonicalForm") -> CanonicalForm:
    return linear_combination([(ONE, a), (ONE, b)])


__all__ = [
    "CanonicalForm",
    "NotAValue",
    "add",
    "canonicalize",
    "coefficient",
    "equiv",
    "flat",
    "inner_product",
    "is_unit",
    "linear_combination",
    "member",
    "norm_sq",
    "scale",
    "sqrt_real",
]
