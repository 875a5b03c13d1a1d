"""Abstract syntax, parser and printer for the two-layer term language.

Terms and superpositions are separate node families.  Positions that the
grammar restricts to terms (conditional guards, application components,
pair components, let scrutinees) can still be written with a superposition
in source text; the parser distributes it with :func:`sugar_if`,
:func:`sugar_app`, :func:`sugar_pair` and :func:`sugar_let`.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .amplitude import ISQRT2, MINUS_ONE, ONE, Amplitude, format_amplitude
from .types import Type, TypeSyntaxError, parse_type, show_type


def _cached(cls):
    """Cache the generated structural hash on frozen nodes."""
    generated = cls.__hash__

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = generated(self)
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = __hash__
    return cls


class Node:
    __slots__ = ()

    def __str__(self) -> str:
        return pretty(self)


class Term(Node):
    """Classical layer: variables, kets, conditionals, abstractions, ..."""

    __slots__ = ()


class Sup(Node):
    """Quantum layer: linear combinations of terms."""

    __slots__ = ()


def as_sup(x: "Term | Sup") -> "Sup":
    if isinstance(x, Sup):
        return x
    if isinstance(x, Term):
        return Single(x)
    raise TypeError(f"expected a term or superposition, got {type(x).__name__}")


def _wrap(obj, *names: str) -> None:
    for n in names:
        object.__setattr__(obj, n, as_sup(getattr(obj, n)))


def _need_term(x, what: str) -> None:
    if not isinstance(x, Term):
        raise TypeError(f"{what} must be a term, got {type(x).__name__}")


@_cached
@dataclass(frozen=True)
class Var(Term):
    name: str


@_cached
@dataclass(frozen=True)
class Ket0(Term):
    pass


@_cached
@dataclass(frozen=True)
class Ket1(Term):
    pass


@_cached
@dataclass(frozen=True)
class If(Term):
    cond: Term
    then: Sup
    els: Sup

    def __post_init__(self) -> None:
        _need_term(self.cond, "conditional guard")
        _wrap(self, "then", "els")


@_cached
@dataclass(frozen=True)
class Lam(Term):
    var: str
    body: Sup
    annot: Optional[Type] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        _wrap(self, "body")


@_cached
@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term

    def __post_init__(self) -> None:
        _need_term(self.fun, "application head")
        _need_term(self.arg, "application argument")


@_cached
@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term

    def __post_init__(self) -> None:
        _need_term(self.left, "pair component")
        _need_term(self.right, "pair component")


@_cached
@dataclass(frozen=True)
class LetPair(Term):
    x: str
    y: str
    scrut: Term
    body: Sup

    def __post_init__(self) -> None:
        _need_term(self.scrut, "let scrutinee")
        if self.x == self.y:
            raise ValueError("let binds the same name twice")
        _wrap(self, "body")


@_cached
@dataclass(frozen=True)
class Single(Sup):
    term: Term

    def __post_init__(self) -> None:
        _need_term(self.term, "superposed term")


@_cached
@dataclass(frozen=True)
class Zero(Sup):
    pass


@_cached
@dataclass(frozen=True)
class Scaled(Sup):
    amp: Amplitude
    body: Sup

    def __post_init__(self) -> None:
        if not isinstance(self.amp, Amplitude):
            object.__setattr__(self, "amp", Amplitude.of(self.amp))
        _wrap(self, "body")


@_cached
@dataclass(frozen=True)
class Sum(Sup):
    left: Sup
    right: Sup

    def __post_init__(self) -> None:
        _wrap(self, "left", "right")


KET0 = Ket0()
KET1 = Ket1()
ZERO_VEC = Zero()


# ---------------------------------------------------------------------------
# structural queries


def free_vars(n: Node) -> frozenset[str]:
    """Free variables, cached per node."""
    cached = n.__dict__.get("_fv")
    if cached is not None:
        return cached
    if isinstance(n, Var):
        fv = frozenset([n.name])
    elif isinstance(n, (Ket0, Ket1, Zero)):
        fv = frozenset()
    elif isinstance(n, If):
        fv = free_vars(n.cond) | free_vars(n.then) | free_vars(n.els)
    elif isinstance(n, Lam):
        fv = free_vars(n.body) - {n.var}
    elif isinstance(n, App):
        fv = free_vars(n.fun) | free_vars(n.arg)
    elif isinstance(n, Pair):
        fv = free_vars(n.left) | free_vars(n.right)
    elif isinstance(n, LetPair):
        fv = free_vars(n.scrut) | (free_vars(n.body) - {n.x, n.y})
    elif isinstance(n, Single):
        fv = free_vars(n.term)
    elif isinstance(n, Scaled):
        fv = free_vars(n.body)
    elif isinstance(n, Sum):
        fv = free_vars(n.left) | free_vars(n.right)
    else:
        raise TypeError(n)
    object.__setattr__(n, "_fv", fv)
    return fv


def is_closed(n: Node) -> bool:
    return not free_vars(n)


def size(n: Node) -> int:
    """The recursive size metric; sums take the maximum."""
    cached = n.__dict__.get("_size")
    if cached is not None:
        return cached
    if isinstance(n, (Var, Ket0, Ket1)):
        s = 1
    elif isinstance(n, If):
        s = 1 + size(n.cond) + max(size(n.then), size(n.els))
    elif isinstance(n, Lam):
        s = 1 + size(n.body)
    elif isinstance(n, App):
        s = size(n.fun) + size(n.arg) + 1
    elif isinstance(n, Pair):
        s = size(n.left) + size(n.right) + 1
    elif isinstance(n, LetPair):
        s = 1 + size(n.scrut) + size(n.body)
    elif isinstance(n, Zero):
        s = 0
    elif isinstance(n, Single):
        s = size(n.term)
    elif isinstance(n, Scaled):
        s = size(n.body)
    elif isinstance(n, Sum):
        s = max(size(n.left), size(n.right))
    else:
        raise TypeError(n)
    object.__setattr__(n, "_size", s)
    return s


def occurrences(n: Node, x: str) -> int:
    """Number of free occurrences of ``x``."""
    if x not in free_vars(n):
        return 0
    if isinstance(n, Var):
        return 1
    if isinstance(n, If):
        return occurrences(n.cond, x) + occurrences(n.then, x) + occurrences(n.els, x)
    if isinstance(n, Lam):
        return occurrences(n.body, x)
    if isinstance(n, App):
        return occurrences(n.fun, x) + occurrences(n.arg, x)
    if isinstance(n, Pair):
        return occurrences(n.left, x) + occurrences(n.right, x)
    if isinstance(n, LetPair):
        inner = 0 if x in (n.x, n.y) else occurrences(n.body, x)
        return occurrences(n.scrut, x) + inner
    if isinstance(n, Single):
        return occurrences(n.term, x)
    if isinstance(n, Scaled):
        return occurrences(n.body, x)
    if isinstance(n, Sum):
        return occurrences(n.left, x) + occurrences(n.right, x)
    return 0


def key(n: Node) -> tuple:
    """De Bruijn key: equal iff alpha-equivalent, ignoring annotations.

    Keys are totally ordered tuples and give the canonical term order.
    """
    cached = n.__dict__.get("_key")
    if cached is not None:
        return cached
    k = _key(n, ())
    object.__setattr__(n, "_key", k)
    return k


def _key(n: Node, env: tuple[str, ...]) -> tuple:
    if not env:
        cached = n.__dict__.get("_key")
        if cached is not None:
            return cached
    if isinstance(n, Var):
        for i in range(len(env) - 1, -1, -1):
            if env[i] == n.name:
                return ("b", len(env) - 1 - i)
        return ("f", n.name)
    if isinstance(n, Ket0):
        return ("k0",)
    if isinstance(n, Ket1):
        return ("k1",)
    if isinstance(n, If):
        return ("if", _key(n.cond, env), _key(n.then, env), _key(n.els, env))
    if isinstance(n, Lam):
        return ("lam", _key(n.body, env + (n.var,)))
    if isinstance(n, App):
        return ("app", _key(n.fun, env), _key(n.arg, env))
    if isinstance(n, Pair):
        return ("pair", _key(n.left, env), _key(n.right, env))
    if isinstance(n, LetPair):
        return ("let", _key(n.scrut, env), _key(n.body, env + (n.x, n.y)))
    if isinstance(n, Zero):
        return ("zero",)
    if isinstance(n, Single):
        return ("one", _key(n.term, env))
    if isinstance(n, Scaled):
        return ("scale", n.amp.int_key(), _key(n.body, env))
    if isinstance(n, Sum):
        return ("sum", _key(n.left, env), _key(n.right, env))
    raise TypeError(n)


def alpha_equiv(a: Node, b: Node) -> bool:
    return a == b or key(a) == key(b)


def is_basis_value(t: Term) -> bool:
    if isinstance(t, (Ket0, Ket1, Lam)):
        return True
    if isinstance(t, Pair):
        return is_basis_value(t.left) and is_basis_value(t.right)
    return False


def is_value(s: Sup) -> bool:
    """Superposition built only from basis values."""
    if isinstance(s, Zero):
        return True
    if isinstance(s, Single):
        return is_basis_value(s.term)
    if isinstance(s, Scaled):
        return is_value(s.body)
    if isinstance(s, Sum):
        return is_value(s.left) and is_value(s.right)
    raise TypeError(s)


def subterms(n: Node) -> Iterator[Node]:
    """Pre-order traversal over both layers."""
    yield n
    for child in children(n):
        yield from subterms(child)


def children(n: Node) -> tuple[Node, ...]:
    if isinstance(n, If):
        return (n.cond, n.then, n.els)
    if isinstance(n, Lam):
        return (n.body,)
    if isinstance(n, App):
        return (n.fun, n.arg)
    if isinstance(n, Pair):
        return (n.left, n.right)
    if isinstance(n, LetPair):
        return (n.scrut, n.body)
    if isinstance(n, Single):
        return (n.term,)
    if isinstance(n, Scaled):
        return (n.body,)
    if isinstance(n, Sum):
        return (n.left, n.right)
    return ()


def validate_layers(n: Node) -> None:
    """Raise ``TypeError`` if a term slot holds a superposition or vice versa."""
    term_slots = {If: ("cond",), App: ("fun", "arg"), Pair: ("left", "right"), LetPair: ("scrut",), Single: ("term",)}
    sup_slots = {If: ("then", "els"), Lam: ("body",), LetPair: ("body",), Scaled: ("body",), Sum: ("left", "right")}
    for sub in subterms(n):
        for slot in term_slots.get(type(sub), ()):
            if not isinstance(getattr(sub, slot), Term):
                raise TypeError(f"{type(sub).__name__}.{slot} must be a term")
        for slot in sup_slots.get(type(sub), ()):
            if not isinstance(getattr(sub, slot), Sup):
                raise TypeError(f"{type(sub).__name__}.{slot} must be a superposition")


# ---------------------------------------------------------------------------
# flattening and sugar


def expand(s: "Sup | Term") -> list[tuple[Amplitude, Term]]:
    """Flatten a superposition to its summands, without merging."""
    out: list[tuple[Amplitude, Term]] = []

    def go(x: Sup, c: Amplitude) -> None:
        if isinstance(x, Zero):
            return
        if isinstance(x, Single):
            out.append((c, x.term))
        elif isinstance(x, Scaled):
            go(x.body, c * x.amp)
        elif isinstance(x, Sum):
            go(x.left, c)
            go(x.right, c)
        else:
            raise TypeError(x)

    go(as_sup(s), ONE)
    return out


def from_terms(pairs: Iterable[tuple[Amplitude, Term]]) -> Sup:
    """Build a left-nested sum; amplitude 1 summands are left unscaled."""
    acc: Optional[Sup] = None
    for amp, t in pairs:
        piece: Sup = Single(t) if amp == ONE else Scaled(amp, Single(t))
        acc = piece if acc is None else Sum(acc, piece)
    return acc if acc is not None else ZERO_VEC


def sugar_if(guard: "Sup | Term", then: "Sup | Term", els: "Sup | Term") -> Sup:
    return from_terms((a, If(s, then, els)) for a, s in expand(guard))


def sugar_app(fun: "Sup | Term", arg: "Sup | Term") -> Sup:
    fs, xs = expand(fun), expand(arg)
    return from_terms((a * b, App(f, x)) for a, f in fs for b, x in xs)


def sugar_pair(left: "Sup | Term", right: "Sup | Term") -> Sup:
    ls, rs = expand(left), expand(right)
    return from_terms((a * b, Pair(l, r)) for a, l in ls for b, r in rs)


def sugar_let(x: str, y: str, scrut: "Sup | Term", body: "Sup | Term") -> Sup:
    return from_terms((a, LetPair(x, y, s, body)) for a, s in expand(scrut))


def single_term(s: "Sup | Term") -> Optional[Term]:
    """The term if ``s`` is syntactically one summand with amplitude 1."""
    if isinstance(s, Term):
        return s
    terms = expand(s)
    if len(terms) == 1 and terms[0][0] == ONE:
        return terms[0][1]
    return None


def ket_plus() -> Sup:
    return Sum(Scaled(ISQRT2, KET0), Scaled(ISQRT2, KET1))


def ket_minus() -> Sup:
    return Sum(Scaled(ISQRT2, KET0), Scaled(-ISQRT2, KET1))


def tuple_term(items: Sequence[Term]) -> Term:
    """Right-nested pair ``(a, (b, (c, ...)))``."""
    if not items:
        raise ValueError("empty tuple")
    t = items[-1]
    for item in reversed(items[:-1]):
        t = Pair(item, t)
    return t


def basis_term(index: int, n: int) -> Term:
    """The basis state ``|index>`` over ``n`` qubits, big-endian and right-nested."""
    if not 0 <= index < 2 ** n:
        raise ValueError("basis index out of range")
    bits = [(index >> (n - 1 - j)) & 1 for j in range(n)]
    return tuple_term([KET1 if b else KET0 for b in bits])


# ---------------------------------------------------------------------------
# substitution


_counter = itertools.count()


def fresh_name(base: str, avoid: frozenset[str] | set[str]) -> str:
    stem = re.sub(r"_\d+$", "", base) or "v"
    while True:
        cand = f"{stem}_{next(_counter)}"
        if cand not in avoid:
            return cand


def subst(n: Node, mapping: dict[str, Term]) -> Node:
    """Simultaneous capture-avoiding substitution of terms for variables."""
    mapping = {k: v for k, v in mapping.items() if k in free_vars(n)}
    if not mapping:
        return n
    avoid = set()
    for v in mapping.values():
        avoid |= free_vars(v)
    return _subst(n, mapping, frozenset(avoid))


def _binder(name: str, body_fv: frozenset[str], mapping: dict[str, Term], avoid: frozenset[str]):
    """Return (new_name, mapping for the body)."""
    inner = {k: v for k, v in mapping.items() if k != name}
    if name in avoid and inner:
        new = fresh_name(name, avoid | body_fv | set(inner))
        inner = dict(inner)
        inner[name] = Var(new)
        return new, inner
    return name, inner


def _subst(n: Node, m: dict[str, Term], avoid: frozenset[str]) -> Node:
    if not (free_vars(n) & m.keys()):
        return n
    if isinstance(n, Var):
        return m[n.name]
    if isinstance(n, If):
        return If(_subst(n.cond, m, avoid), _subst(n.then, m, avoid), _subst(n.els, m, avoid))
    if isinstance(n, Lam):
        new, inner = _binder(n.var, free_vars(n.body), m, avoid)
        return Lam(new, _subst(n.body, inner, avoid | {new}) if inner else n.body, n.annot)
    if isinstance(n, App):
        return App(_subst(n.fun, m, avoid), _subst(n.arg, m, avoid))
    if isinstance(n, Pair):
        return Pair(_subst(n.left, m, avoid), _subst(n.right, m, avoid))
    if isinstance(n, LetPair):
        scrut = _subst(n.scrut, m, avoid)
        bfv = free_vars(n.body)
        x, inner = _binder(n.x, bfv, m, avoid)
        y, inner = _binder(n.y, bfv | {x}, inner, avoid | {x})
        body = _subst(n.body, inner, avoid | {x, y}) if inner else n.body
        return LetPair(x, y, scrut, body)
    if isinstance(n, Single):
        return Single(_subst(n.term, m, avoid))
    if isinstance(n, Scaled):
        return Scaled(n.amp, _subst(n.body, m, avoid))
    if isinstance(n, Sum):
        return Sum(_subst(n.left, m, avoid), _subst(n.right, m, avoid))
    return n


def subst_sup(s: Sup, x: str, v: "Sup | Term") -> Sup:
    """``s<v/x>``: substitute a superposed value by linearity."""
    return from_terms(
        (a * b, t2)
        for b, w in expand(v)
        for a, t2 in expand(subst(s, {x: w}))
    )


# ---------------------------------------------------------------------------
# printing


_SIMPLE_AMP = re.compile(r"-?(\d+(/\d+)?|sqrt2|isqrt2|i)")


def _amp_text(a: Amplitude) -> str:
    s = format_amplitude(a)
    if _SIMPLE_AMP.fullmatch(s) or (s.startswith("(") and s.endswith(")")):
        return s
    return f"({s})"


def pretty(n: Node) -> str:
    """Source text that parses back to the same tree."""
    if isinstance(n, Sup):
        return _sup(n, True)
    return _term(n, True)


def _sup(s: Sup, tail: bool) -> str:
    if isinstance(s, Zero):
        return "0vec"
    if isinstance(s, Single):
        return _term(s.term, tail)
    if isinstance(s, Scaled):
        body = s.body
        inner = _sup(body, tail)
        if isinstance(body, Sum):
            inner = f"({_sup(body, True)})"
        return f"{_amp_text(s.amp)} * {inner}"
    if isinstance(s, Sum):
        right = _sup(s.right, tail)
        if isinstance(s.right, Sum):
            right = f"({_sup(s.right, True)})"
        return f"{_sup(s.left, False)} + {right}"
    raise TypeError(s)


def _open(t: Term) -> bool:
    return isinstance(t, (If, Lam, LetPair))


def _annot_text(a: Type) -> str:
    text = show_type(a)
    return f"({text})" if "forall" in text else text


def _term(t: Term, tail: bool) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Ket0):
        return "|0>"
    if isinstance(t, Ket1):
        return "|1>"
    if isinstance(t, Pair):
        return f"({_term(t.left, True)}, {_term(t.right, True)})"
    if isinstance(t, App):
        return f"{_head(t.fun)} {_atom(t.arg)}"
    if isinstance(t, If):
        text = f"if {_term(t.cond, True)} then {_sup(t.then, True)} else {_sup(t.els, True)}"
    elif isinstance(t, Lam):
        binder = t.var if t.annot is None else f"{t.var}:{_annot_text(t.annot)}"
        text = f"\\{binder}. {_sup(t.body, True)}"
    elif isinstance(t, LetPair):
        text = f"let ({t.x}, {t.y}) = {_term(t.scrut, True)} in {_sup(t.body, True)}"
    else:
        raise TypeError(t)
    return text if tail else f"({text})"


def _head(t: Term) -> str:
    if isinstance(t, (App, Var, Ket0, Ket1, Pair)):
        return _term(t, False)
    return f"({_term(t, True)})"


def _atom(t: Term) -> str:
    if isinstance(t, (Var, Ket0, Ket1, Pair)):
        return _term(t, False)
    return f"({_term(t, True)})"


# ---------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    """Lexical or syntactic error, with a source position."""

    def __init__(self, message: str, pos: int, text: str) -> None:
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{line}:{col}: {message}")
        self.pos = pos
        self.line = line
        self.col = col
        self.reason = message


class UnboundVariable(ParseError):
    pass


KEYWORDS = {"if", "then", "else", "let", "in", "def", "0vec", "i", "sqrt2", "isqrt2", "forall"}

_TOKEN = re.compile(
    r"""
    (?P<ket>\|[01+\-]>)
  | (?P<zero>0vec\b)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[\\λ().,=;:+\-*/])
    """,
    re.VERBOSE,
)
_SPACE = re.compile(r"(?:\s+|--[^\n]*)*")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Definition:
    name: str
    type: Optional[Type]
    body: Sup


@dataclass
class Program:
    """A sequence of definitions; ``main`` is the designated entry point."""

    defs: dict[str, Definition]
    order: list[str]
    main_name: str

    @property
    def main(self) -> Definition:
        return self.defs[self.main_name]

    def hints(self) -> dict[tuple, list[Type]]:
        """Declared types indexed by the key of the (inlined) body."""
        out: dict[tuple, list[Type]] = {}
        for name in self.order:
            d = self.defs[name]
            if d.type is None:
                continue
            t = single_term(d.body)
            if t is not None:
                out.setdefault(key(t), []).append(d.type)
        return out


class Parser:
    """Recursive descent with on-demand lexing over the raw source."""

    def __init__(self, text: str, defs: Optional[dict[str, Sup]] = None, allow_free: bool = False) -> None:
        self.text = text
        self.pos = 0
        self.defs = defs if defs is not None else {}
        self.allow_free = allow_free
        self.scope: list[str] = []

    # lexing
    def error(self, msg: str, pos: Optional[int] = None) -> ParseError:
        return ParseError(msg, self.pos if pos is None else pos, self.text)

    def _skip(self, pos: int) -> int:
        return _SPACE.match(self.text, pos).end()

    def peek(self) -> Optional[Token]:
        p = self._skip(self.pos)
        if p >= len(self.text):
            return None
        m = _TOKEN.match(self.text, p)
        if not m:
            raise self.error(f"unexpected character {self.text[p]!r}", p)
        kind = m.lastgroup
        return Token(kind, m.group(kind), m.start(), m.end())

    def peek_text(self) -> Optional[str]:
        tok = self.peek()
        return tok.text if tok else None

    def take(self, expect: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error(f"unexpected end of input" + (f", expected {expect!r}" if expect else ""), len(self.text))
        if expect is not None and tok.text != expect:
            raise self.error(f"expected {expect!r}, found {tok.text!r}", tok.start)
        self.pos = tok.end
        return tok

    def at(self, *texts: str) -> bool:
        return self.peek_text() in texts

    def ident(self) -> str:
        tok = self.take()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error(f"expected identifier, found {tok.text!r}", tok.start)
        return tok.text

    def type_until(self, stops: str) -> Type:
        """Parse a type ending at a depth-0 stop character."""
        start = self._skip(self.pos)
        depth = 0
        p = start
        while p < len(self.text):
            c = self.text[p]
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    break
                depth -= 1
            elif depth == 0 and c in stops:
                if c == "=" and self.text.startswith("=>", p):
                    p += 2
                    continue
                break
            p += 1
        try:
            ty = parse_type(self.text[start:p])
        except (TypeSyntaxError, ValueError) as exc:
            raise self.error(f"bad type: {exc}", start) from None
        self.pos = p
        return ty

    # grammar
    def sup(self) -> Sup:
        acc = self.scaled()
        while self.at("+", "-"):
            op = self.take().text
            rhs = self.scaled()
            acc = Sum(acc, rhs if op == "+" else Scaled(MINUS_ONE, rhs))
        return acc

    def amp_prefix(self) -> Optional[Amplitude]:
        """Try an amplitude followed by '*'; restore the position on failure."""
        save = self.pos
        try:
            amp = self._amp_atom()
            if amp is not None and self.at("*"):
                self.take("*")
                return amp
        except (ValueError, ZeroDivisionError):
            pass
        self.pos = save
        return None

    def _amp_atom(self) -> Optional[Amplitude]:
        from .amplitude import I, SQRT2, _AmpParser

        neg = False
        if self.at("-"):
            self.take()
            neg = True
        tok = self.peek()
        if tok is None:
            return None
        if tok.kind == "num":
            self.take()
            val = Amplitude.of(int(tok.text))
            if self.at("/"):
                self.take()
                den = self.take()
                if den.kind != "num":
                    return None
                val = val / Amplitude.of(int(den.text))
        elif tok.text in ("sqrt2", "isqrt2", "i"):
            self.take()
            val = {"sqrt2": SQRT2, "isqrt2": ISQRT2, "i": I}[tok.text]
        elif tok.text == "(":
            p = _AmpParser(self.text, tok.end)
            val = p.expr()
            self.pos = p.pos
            self.take(")")
        else:
            return None
        return -val if neg else val

    def scaled(self) -> Sup:
        amp = self.amp_prefix()
        if amp is not None:
            return Scaled(amp, self.scaled())
        if self.at("-"):
            self.take()
            return Scaled(MINUS_ONE, self.scaled())
        return self.app()

    def app(self) -> Sup:
        head = self.atom()
        while self._starts_atom():
            arg = self.atom()
            head = self._apply(head, arg)
        return head

    def _apply(self, head: Sup, arg: Sup) -> Sup:
        f, a = single_term(head), single_term(arg)
        if f is not None and a is not None:
            return Single(App(f, a))
        return sugar_app(head, arg)

    def _starts_atom(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        if tok.kind in ("ket", "zero"):
            return True
        if tok.kind == "ident":
            return tok.text in ("if", "let") or tok.text not in KEYWORDS
        return tok.text in ("(", "\\", "λ")

    def atom(self) -> Sup:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input", len(self.text))
        if tok.kind == "ket":
            self.take()
            return {"|0>": Single(KET0), "|1>": Single(KET1), "|+>": ket_plus(), "|->": ket_minus()}[tok.text]
        if tok.kind == "zero":
            self.take()
            return ZERO_VEC
        if tok.text in ("\\", "λ"):
            return self.lam()
        if tok.text == "if":
            return self.cond()
        if tok.text == "let":
            return self.let()
        if tok.text == "(":
            self.take()
            first = self.sup()
            if self.at(","):
                items = [first]
                while self.at(","):
                    self.take()
                    items.append(self.sup())
                self.take(")")
                acc = items[-1]
                for item in reversed(items[:-1]):
                    acc = self._pair(item, acc)
                return acc
            self.take(")")
            return first
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.take()
            return self.var(tok)
        raise self.error(f"unexpected token {tok.text!r}", tok.start)

    def _pair(self, left: Sup, right: Sup) -> Sup:
        l, r = single_term(left), single_term(right)
        if l is not None and r is not None:
            return Single(Pair(l, r))
        return sugar_pair(left, right)

    def var(self, tok: Token) -> Sup:
        name = tok.text
        if name in self.scope:
            return Single(Var(name))
        if name in self.defs:
            return self.defs[name]
        if self.allow_free:
            return Single(Var(name))
        raise UnboundVariable(f"unbound variable {name!r}", tok.start, self.text)

    def lam(self) -> Sup:
        self.take()
        name = self.ident()
        annot = None
        if self.at(":"):
            self.take()
            annot = self.type_until(".")
        self.take(".")
        self.scope.append(name)
        try:
            body = self.sup()
        finally:
            self.scope.pop()
        return Single(Lam(name, body, annot))

    def cond(self) -> Sup:
        self.take("if")
        guard = self.sup()
        self.take("then")
        then = self.sup()
        self.take("else")
        els = self.sup()
        g = single_term(guard)
        if g is not None:
            return Single(If(g, then, els))
        return sugar_if(guard, then, els)

    def let(self) -> Sup:
        self.take("let")
        self.take("(")
        x = self.ident()
        self.take(",")
        y = self.ident()
        self.take(")")
        if x == y:
            raise self.error("let binds the same name twice")
        self.take("=")
        scrut = self.sup()
        self.take("in")
        self.scope.extend([x, y])
        try:
            body = self.sup()
        finally:
            del self.scope[-2:]
        s = single_term(scrut)
        if s is not None:
            return Single(LetPair(x, y, s, body))
        return sugar_let(x, y, scrut, body)

    def finish(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected trailing input {tok.text!r}", tok.start)

    def program(self) -> Program:
        defs: dict[str, Definition] = {}
        order: list[str] = []
        while self.peek() is not None:
            self.take("def")
            name_tok = self.peek()
            name = self.ident()
            if name in defs:
                raise self.error(f"duplicate definition {name!r}", name_tok.start)
            ty = None
            if self.at(":"):
                self.take()
                ty = self.type_until("=")
            self.take("=")
            body = self.sup()
            self.take(";")
            self.defs[name] = body
            defs[name] = Definition(name, ty, body)
            order.append(name)
        if not order:
            raise self.error("program has no definitions", 0)
        main = "main" if "main" in defs else order[-1]
        return Program(defs, order, main)


def parse(source: str, *, allow_free: bool = False, defs: Optional[dict[str, Sup]] = None) -> Sup:
    """Parse a superposition.  Free variables are errors unless allowed."""
    p = Parser(source, defs=dict(defs or {}), allow_free=allow_free)
    s = p.sup()
    p.finish()
    return s


def parse_term(source: str, *, allow_free: bool = False) -> Term:
    s = parse(source, allow_free=allow_free)
    t = single_term(s)
    if t is None:
        raise ParseError("expected a single term, found a superposition", 0, source)
    return t


def parse_program(source: str) -> Program:
    return Parser(source).program()
