"""Types of the language: grammar, bang, subtyping, substitution and card.

Ground types are ``B | #Q | $Q | Q * R``.  The sharp constructor only
accepts ground arguments, so an ill-formed ``#(B -o B)`` cannot be built.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterator


class IllFormedType(ValueError):
    """Raised when a sharp is applied to a non-ground type."""


class Type:
    """Base class for type syntax trees."""

    __slots__ = ()

    def __str__(self) -> str:
        return show_type(self)


def _cached_hash(cls):
    generated = cls.__hash__

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = generated(self)
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = __hash__
    return cls


@_cached_hash
@dataclass(frozen=True)
class TVar(Type):
    name: str


@_cached_hash
@dataclass(frozen=True)
class Bool(Type):
    pass


@_cached_hash
@dataclass(frozen=True)
class Lin(Type):
    """Linear arrow ``A -o B``."""

    dom: Type
    cod: Type


@_cached_hash
@dataclass(frozen=True)
class Imp(Type):
    """Intuitionistic arrow ``A => B``."""

    dom: Type
    cod: Type


@_cached_hash
@dataclass(frozen=True)
class Prod(Type):
    left: Type
    right: Type


@_cached_hash
@dataclass(frozen=True)
class Sharp(Type):
    body: Type

    def __post_init__(self) -> None:
        if not is_ground(self.body):
            raise IllFormedType(f"# applied to non-ground type {show_type(self.body)}")


@_cached_hash
@dataclass(frozen=True)
class Par(Type):
    """The paragraph modality, written ``$A``."""

    body: Type


@_cached_hash
@dataclass(frozen=True)
class Forall(Type):
    var: str
    body: Type


B = Bool()


def is_ground(t: Type) -> bool:
    if isinstance(t, Bool):
        return True
    if isinstance(t, (Sharp, Par)):
        return is_ground(t.body)
    if isinstance(t, Prod):
        return is_ground(t.left) and is_ground(t.right)
    return False


def bits(n: int, base: Type = B) -> Type:
    """Right-nested ``base^n``: ``base * (base * ...)``."""
    if n < 1:
        raise ValueError("bits(n) needs n >= 1")
    t = base
    for _ in range(n - 1):
        t = Prod(base, t)
    return t


NAT = Forall("X", Imp(Lin(TVar("X"), TVar("X")), Par(Lin(TVar("X"), TVar("X")))))


def type_size(t: Type) -> int:
    if isinstance(t, (TVar, Bool)):
        return 1
    if isinstance(t, (Lin, Imp)):
        return 1 + type_size(t.dom) + type_size(t.cod)
    if isinstance(t, Prod):
        return 1 + type_size(t.left) + type_size(t.right)
    if isinstance(t, (Sharp, Par, Forall)):
        return 1 + type_size(t.body)
    raise TypeError(t)


def free_tvars(t: Type) -> frozenset[str]:
    if isinstance(t, TVar):
        return frozenset([t.name])
    if isinstance(t, Bool):
        return frozenset()
    if isinstance(t, (Lin, Imp)):
        return free_tvars(t.dom) | free_tvars(t.cod)
    if isinstance(t, Prod):
        return free_tvars(t.left) | free_tvars(t.right)
    if isinstance(t, (Sharp, Par)):
        return free_tvars(t.body)
    if isinstance(t, Forall):
        return free_tvars(t.body) - {t.var}
    raise TypeError(t)


def type_key(t: Type, env: tuple[str, ...] = ()) -> tuple:
    """A de Bruijn key: equal keys iff the types are alpha-equivalent."""
    if not env:
        k = t.__dict__.get("_k")
        if k is None:
            k = _type_key(t, env)
            object.__setattr__(t, "_k", k)
        return k
    return _type_key(t, env)


def _type_key(t: Type, env: tuple[str, ...]) -> tuple:
    if isinstance(t, TVar):
        for i, name in enumerate(reversed(env)):
            if name == t.name:
                return ("b", i)
        return ("v", t.name)
    if isinstance(t, Bool):
        return ("B",)
    if isinstance(t, Lin):
        return ("-o", type_key(t.dom, env), type_key(t.cod, env))
    if isinstance(t, Imp):
        return ("=>", type_key(t.dom, env), type_key(t.cod, env))
    if isinstance(t, Prod):
        return ("*", type_key(t.left, env), type_key(t.right, env))
    if isinstance(t, Sharp):
        return ("#", type_key(t.body, env))
    if isinstance(t, Par):
        return ("$", type_key(t.body, env))
    if isinstance(t, Forall):
        return ("A", type_key(t.body, env + (t.var,)))
    raise TypeError(t)


def alpha_eq(a: Type, b: Type) -> bool:
    return a == b or type_key(a) == type_key(b)


def bang(t: Type) -> Type:
    """Erase sharps through products, paragraphs and quantifiers."""
    if isinstance(t, (TVar, Bool, Lin, Imp)):
        return t
    if isinstance(t, Prod):
        return Prod(bang(t.left), bang(t.right))
    if isinstance(t, Sharp):
        return bang(t.body)
    if isinstance(t, Par):
        return Par(bang(t.body))
    if isinstance(t, Forall):
        return Forall(t.var, bang(t.body))
    raise TypeError(t)


def fresh_tvar(avoid: set[str] | frozenset[str], base: str = "X") -> str:
    if base not in avoid:
        return base
    for k in itertools.count(1):
        cand = f"{base}{k}"
        if cand not in avoid:
            return cand
    raise AssertionError


def rename_tvar(t: Type, old: str, new: str) -> Type:
    return _subst(t, old, TVar(new), TVar(new), "+")


def subst_type(a: Type, x: str, c: Type, polarity: str = "+") -> Type:
    """Polarity-aware substitution ``a[c/x]``.

    Negative occurrences (left of ``=>``) receive ``bang(c)``.  Under a
    negative position a linear arrow resets to positive polarity, since bang
    is the identity on arrows.
    """
    if polarity not in ("+", "-"):
        raise ValueError("polarity must be '+' or '-'")
    return _subst(a, x, c, bang(c), polarity)


def _subst(t: Type, x: str, pos: Type, neg: Type, k: str) -> Type:
    if isinstance(t, TVar):
        if t.name != x:
            return t
        return pos if k == "+" else neg
    if isinstance(t, Bool):
        return t
    if isinstance(t, Imp):
        return Imp(_subst(t.dom, x, pos, neg, "-"), _subst(t.cod, x, pos, neg, "+"))
    if isinstance(t, Lin):
        return Lin(_subst(t.dom, x, pos, neg, "+"), _subst(t.cod, x, pos, neg, "+"))
    if isinstance(t, Prod):
        return Prod(_subst(t.left, x, pos, neg, k), _subst(t.right, x, pos, neg, k))
    if isinstance(t, Sharp):
        return Sharp(_subst(t.body, x, pos, neg, k))
    if isinstance(t, Par):
        return Par(_subst(t.body, x, pos, neg, k))
    if isinstance(t, Forall):
        if t.var == x:
            return t
        avoid = free_tvars(pos) | free_tvars(neg)
        if t.var in avoid:
            new = fresh_tvar(avoid | free_tvars(t.body) | {x})
            body = rename_tvar(t.body, t.var, new)
            return Forall(new, _subst(body, x, pos, neg, k))
        return Forall(t.var, _subst(t.body, x, pos, neg, k))
    raise TypeError(t)


def card(q: Type) -> int:
    """Dimension of the span of a ground type."""
    if isinstance(q, Bool):
        return 2
    if isinstance(q, (Sharp, Par)):
        return card(q.body)
    if isinstance(q, Prod):
        return card(q.left) * card(q.right)
    raise IllFormedType(f"card of non-ground type {show_type(q)}")


# ---------------------------------------------------------------------------
# subtyping


class _SubtypeSearch:
    """Goal-directed search with a depth bound and a memo table."""

    def __init__(self) -> None:
        self.proved: set[tuple] = set()
        self.failed: dict[tuple, int] = {}

    def sub(self, a: Type, b: Type, depth: int) -> bool:
        if alpha_eq(a, b):
            return True
        if depth <= 0:
            return False
        key = (type_key(a), type_key(b))
        if key in self.proved:
            return True
        if self.failed.get(key, -1) >= depth:
            return False
        self.failed[key] = depth  # provisional, blocks cycles
        ok = self._search(a, b, depth - 1)
        if ok:
            self.proved.add(key)
            self.failed.pop(key, None)
        return ok

    def _search(self, a: Type, b: Type, d: int) -> bool:
        # structural rules
        if isinstance(a, Lin) and isinstance(b, Lin) or isinstance(a, Imp) and isinstance(b, Imp):
            if self.sub(b.dom, a.dom, d) and self.sub(a.cod, b.cod, d):
                return True
        if isinstance(a, Prod) and isinstance(b, Prod):
            if self.sub(a.left, b.left, d) and self.sub(a.right, b.right, d):
                return True
        if isinstance(a, Par) and isinstance(b, Par):
            if self.sub(a.body, b.body, d):
                return True
        if isinstance(a, Forall) and isinstance(b, Forall):
            body_b = b.body if a.var == b.var else rename_tvar(b.body, b.var, a.var)
            if a.var == b.var or a.var not in free_tvars(b.body):
                if self.sub(a.body, body_b, d):
                    return True
        # axioms used as a first step on the left
        for up in _up_steps(a):
            if self.sub(up, b, d):
                return True
        # axioms used as a last step on the right
        for down in _down_steps(b):
            if self.sub(a, down, d):
                return True
        return False


def _up_steps(a: Type) -> Iterator[Type]:
    if is_ground(a):
        yield Sharp(a)
        ba = bang(a)
        if ba != a:
            yield Sharp(ba)
    if isinstance(a, Sharp):
        if isinstance(a.body, Sharp):
            yield a.body
        if isinstance(a.body, Par):
            yield Par(Sharp(a.body.body))


def _down_steps(b: Type) -> Iterator[Type]:
    if isinstance(b, Sharp):
        yield b.body
        yield Sharp(b)
    if isinstance(b, Par) and isinstance(b.body, Sharp):
        yield Sharp(Par(b.body.body))


_SUBTYPE_MEMO: dict[tuple, bool] = {}


def subtype(a: Type, b: Type) -> bool:
    """Decide ``a <= b``."""
    k = (type_key(a), type_key(b))
    hit = _SUBTYPE_MEMO.get(k)
    if hit is None:
        bound = 2 * (type_size(a) + type_size(b))
        hit = _SubtypeSearch().sub(a, b, bound)
        if len(_SUBTYPE_MEMO) > 100_000:
            _SUBTYPE_MEMO.clear()
        _SUBTYPE_MEMO[k] = hit
    return hit


# ---------------------------------------------------------------------------
# matching (first-order, used for instantiating quantifiers)


def match_type(pattern: Type, target: Type, var: str) -> Type | None:
    """Find ``C`` with ``pattern[C/var]`` equal to ``target``, if it is unique.

    Occurrences under ``=>`` negative positions see ``bang(C)`` and are only
    used as a consistency check.
    """
    found: list[Type] = []
    negative: list[Type] = []

    def walk(p: Type, t: Type, k: str) -> bool:
        if isinstance(p, TVar) and p.name == var:
            (found if k == "+" else negative).append(t)
            return True
        if type(p) is not type(t):
            return False
        if isinstance(p, (TVar, Bool)):
            return p == t
        if isinstance(p, Imp):
            return walk(p.dom, t.dom, "-") and walk(p.cod, t.cod, "+")
        if isinstance(p, Lin):
            return walk(p.dom, t.dom, "+") and walk(p.cod, t.cod, "+")
        if isinstance(p, Prod):
            return walk(p.left, t.left, k) and walk(p.right, t.right, k)
        if isinstance(p, (Sharp, Par)):
            return walk(p.body, t.body, k)
        if isinstance(p, Forall):
            if p.var != t.var:
                return False
            return walk(p.body, t.body, k)
        return False

    if not walk(pattern, target, "+"):
        return None
    if not found:
        if not negative:
            return None
        cand = negative[0]
    else:
        cand = found[0]
        if any(not alpha_eq(f, cand) for f in found):
            return None
    if any(not alpha_eq(bang(cand), n) for n in negative):
        return None
    return cand


# ---------------------------------------------------------------------------
# surface syntax


def show_type(t: Type) -> str:
    """ASCII surface syntax accepted by :func:`parse_type`."""
    return _show(t, 0)


def _show(t: Type, prec: int) -> str:
    # precedence: 0 forall/arrow, 1 product, 2 prefix/atom
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, Bool):
        return "B"
    if isinstance(t, (Lin, Imp)):
        op = "-o" if isinstance(t, Lin) else "=>"
        s = f"{_show(t.dom, 1)} {op} {_show(t.cod, 0)}"
        return s if prec == 0 else f"({s})"
    if isinstance(t, Prod):
        s = f"{_show(t.left, 2)} * {_show(t.right, 1)}"
        return s if prec <= 1 else f"({s})"
    if isinstance(t, Sharp):
        return "#" + _show(t.body, 2)
    if isinstance(t, Par):
        return "$" + _show(t.body, 2)
    if isinstance(t, Forall):
        s = f"forall {t.var}. {_show(t.body, 0)}"
        return s if prec == 0 else f"({s})"
    raise TypeError(t)


_TYPE_TOKEN = re.compile(r"\s*(-o|=>|forall\b|[A-Za-z_][A-Za-z0-9_']*|\d+|[#$*().^])")
_UNICODE = {"♯": "#", "§": "$", "⊸": "-o", "⇒": "=>", "×": "*", "∀": "forall ", "𝔹": "B", "ℕ": "Nat"}


class TypeSyntaxError(ValueError):
    pass


class TypeParser:
    """Recursive descent parser for the type surface syntax."""

    def __init__(self, text: str) -> None:
        for k, v in _UNICODE.items():
            text = text.replace(k, v)
        self.toks: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TYPE_TOKEN.match(text, pos)
            if not m:
                raise TypeSyntaxError(f"bad character in type at {pos}: {text[pos:pos + 8]!r}")
            self.toks.append((m.group(1), m.start(1)))
            pos = m.end()
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        if self.i >= len(self.toks):
            raise TypeSyntaxError("unexpected end of type")
        tok = self.toks[self.i][0]
        if expect is not None and tok != expect:
            raise TypeSyntaxError(f"expected {expect!r}, found {tok!r}")
        self.i += 1
        return tok

    def parse(self) -> Type:
        t = self.ty()
        if self.peek() is not None:
            raise TypeSyntaxError(f"trailing input in type: {self.peek()!r}")
        return t

    def ty(self) -> Type:
        if self.peek() == "forall":
            self.take()
            var = self.take()
            self.take(".")
            return Forall(var, self.ty())
        left = self.prod()
        if self.peek() == "-o":
            self.take()
            return Lin(left, self.ty())
        if self.peek() == "=>":
            self.take()
            return Imp(left, self.ty())
        return left

    def prod(self) -> Type:
        left = self.unary()
        if self.peek() == "*":
            self.take()
            return Prod(left, self.prod())
        return left

    def unary(self) -> Type:
        tok = self.peek()
        if tok == "#":
            self.take()
            return Sharp(self.unary())
        if tok == "$":
            self.take()
            return Par(self.unary())
        base = self.atom()
        if self.peek() == "^":
            self.take()
            n = self.take()
            if not n.isdigit():
                raise TypeSyntaxError("expected exponent after '^'")
            return bits(int(n), base)
        return base

    def atom(self) -> Type:
        tok = self.take()
        if tok == "(":
            t = self.ty()
            self.take(")")
            return t
        if tok == "B":
            return B
        if tok == "Nat":
            return NAT
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok) and tok != "forall":
            return TVar(tok)
        raise TypeSyntaxError(f"unexpected token {tok!r} in type")


def parse_type(text: str) -> Type:
    return TypeParser(text).parse()


def ground_types(max_size: int) -> list[Type]:
    """All ground types up to the given size, smallest first."""
    by_size: dict[int, list[Type]] = {1: [B]}
    for s in range(2, max_size + 1):
        out: list[Type] = []
        for t in by_size[s - 1]:
            out.append(Sharp(t))
            out.append(Par(t))
        for ls in range(1, s - 1):
            rs = s - 1 - ls
            for l in by_size.get(ls, []):
                for r in by_size.get(rs, []):
                    out.append(Prod(l, r))
        by_size[s] = out
    return [t for s in sorted(by_size) for t in by_size[s]]


def map_type(t: Type, f: Callable[[Type], Type]) -> Type:
    """Apply ``f`` bottom-up."""
    if isinstance(t, (Lin, Imp)):
        t = type(t)(map_type(t.dom, f), map_type(t.cod, f))
    elif isinstance(t, Prod):
        t = Prod(map_type(t.left, f), map_type(t.right, f))
    elif isinstance(t, (Sharp, Par)):
        t = type(t)(map_type(t.body, f))
    elif isinstance(t, Forall):
        t = Forall(t.var, map_type(t.body, f))
    return f(t)
