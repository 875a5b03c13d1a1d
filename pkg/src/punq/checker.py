"""Syntax-directed type checking with pluggable orthogonality.

The declarative rules allow weakening, contraction, equivalence and
subsumption anywhere.  The algorithm here folds them into fixed places:

* superpositions are canonicalized before typing;
* subsumption is checked where a synthesized type meets a goal;
* linear variables are split between premises by free-variable occurrence;
* exponential variables are unrestricted but only usable inside a paragraph
  box or as the single free variable of an intuitionistic argument.

Inside a box, former exponential variables live in a ``dup`` context: they
are linear copies, so any number of occurrences (including none) is fine.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .amplitude import I, ISQRT2, ONE, RealAlg
from .semantics import EvalError, default_budget, evaluate
from .superalg import CanonicalForm, canonicalize, equiv, inner_product, member
from .syntax import (
    KET0,
    KET1,
    App,
    If,
    Ket0,
    Ket1,
    Lam,
    LetPair,
    Node,
    Pair,
    Scaled,
    Single,
    Sum,
    Sup,
    Term,
    Var,
    as_sup,
    expand,
    free_vars,
    is_closed,
    key,
    ket_minus,
    ket_plus,
    pretty,
    size,
    subst,
    subst_sup,
)
from .types import (
    B,
    Bool,
    Forall,
    Imp,
    Lin,
    Par,
    Prod,
    Sharp,
    TVar,
    Type,
    alpha_eq,
    bang,
    card,
    free_tvars,
    fresh_tvar,
    is_ground,
    match_type,
    rename_tvar,
    show_type,
    subst_type,
    subtype,
    type_key,
)


# ---------------------------------------------------------------------------
# orthogonality modes


@dataclass(frozen=True)
class Empty:
    """Orthogonality only between closed superpositions."""

    def __str__(self) -> str:
        return "empty"


@dataclass(frozen=True)
class Times:
    """Closed orthogonality, lifted through pair components."""

    def __str__(self) -> str:
        return "times"


@dataclass(frozen=True)
class UntypedBounded:
    """Substitution-based orthogonality over a bounded set of closed values.

    This approximates a quantifier over all closed values and is not sound.
    """

    depth: int = 2

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("untyped depth must be at least 1")

    def __str__(self) -> str:
        return f"untyped:{self.depth}"


OrthoMode = "Empty | Times | UntypedBounded"


def parse_mode(text: str):
    t = text.strip().lower()
    if t == "empty":
        return Empty()
    if t == "times":
        return Times()
    if t == "untyped":
        return UntypedBounded(2)
    if t.startswith("untyped:"):
        try:
            return UntypedBounded(int(t.split(":", 1)[1]))
        except ValueError as exc:
            raise ValueError(f"bad untyped depth in {text!r}") from exc
    raise ValueError(f"unknown orthogonality mode {text!r}")


# ---------------------------------------------------------------------------
# orthogonality predicates


class _Normalizer:
    """Memoized evaluation of closed superpositions."""

    def __init__(self, budget: Optional[int] = None) -> None:
        self.budget = budget
        self.memo: dict[tuple, Optional[CanonicalForm]] = {}

    def __call__(self, s: "Sup | Term", budget: Optional[int] = None) -> Optional[CanonicalForm]:
        sup = as_sup(s) if not isinstance(s, CanonicalForm) else s.to_sup()
        k = key(sup)
        if k in self.memo:
            return self.memo[k]
        b = budget if budget is not None else self.budget
        try:
            v = evaluate(sup, b).value
        except EvalError:
            v = None
        self.memo[k] = v
        return v


_DEFAULT_NORMALIZER = _Normalizer()


def ortho_empty(t: "Sup | Term", s: "Sup | Term", budget: Optional[int] = None, *, _nf: Optional[_Normalizer] = None) -> bool:
    """Both sides closed, both normalize, and the values have zero inner product."""
    if not (is_closed(t) and is_closed(s)):
        return False
    nf = _nf or _DEFAULT_NORMALIZER
    v, w = nf(t, budget), nf(s, budget)
    if v is None or w is None:
        return False
    return inner_product(v, w).is_zero()


def _strip_scalar(s: "Sup | Term") -> Optional[Term]:
    if isinstance(s, Term):
        return s
    terms = expand(s)
    if len(terms) == 1 and not terms[0][0].is_zero():
        return terms[0][1]
    return None


def ortho_times(t: "Sup | Term", s: "Sup | Term", budget: Optional[int] = None, *, _nf: Optional[_Normalizer] = None) -> bool:
    """Pairwise decomposition: orthogonal if some aligned component is."""
    if is_closed(t) and is_closed(s):
        return ortho_empty(t, s, budget, _nf=_nf)
    a, b = _strip_scalar(t), _strip_scalar(s)
    if isinstance(a, Pair) and isinstance(b, Pair):
        return ortho_times(a.left, b.left, budget, _nf=_nf) or ortho_times(a.right, b.right, budget, _nf=_nf)
    return False


def _bits(n: int) -> list[Term]:
    out = []
    for combo in itertools.product([KET0, KET1], repeat=n):
        t = combo[-1]
        for c in reversed(combo[:-1]):
            t = Pair(c, t)
        out.append(t)
    return out


def _ket_i(b) -> Sup:
    return Sum(Scaled(ISQRT2, KET0), Scaled(b, KET1))


def substitution_universe(depth: int) -> list[Sup]:
    """Closed values used by the bounded untyped check, by structural depth."""
    u: list[Sup] = [Single(KET0), Single(KET1)]
    if depth >= 2:
        u += [ket_plus(), ket_minus(), _ket_i(ISQRT2 * I), _ket_i(-(ISQRT2 * I))]
        u += [Single(p) for p in _bits(2)]
        u.append(Single(Lam("u", Var("u"))))
    if depth >= 3:
        u += [Single(p) for p in _bits(3)]
    return u


def ortho_untyped_bounded(
    t: "Sup | Term",
    s: "Sup | Term",
    q: Type,
    depth: int = 2,
    budget: Optional[int] = None,
    *,
    _nf: Optional[_Normalizer] = None,
) -> bool:
    """Check orthogonality under every substitution drawn from a finite universe.

    Substitutions under which either side fails to reach a realizer of ``q``
    are skipped.  At least one substitution must pass.
    """
    if is_closed(t) and is_closed(s):
        return ortho_empty(t, s, budget, _nf=_nf)
    nf = _nf or _DEFAULT_NORMALIZER
    ts, ss = as_sup(t), as_sup(s)
    names = sorted(free_vars(ts) | free_vars(ss))
    universe = substitution_universe(depth)
    if budget is None:
        budget = card(q) * (10 * (max(size(ts), size(ss)) + 4) ** 3 + 200)
    passed = 0
    for combo in itertools.product(universe, repeat=len(names)):
        t2, s2 = ts, ss
        for name, v in zip(names, combo):
            t2 = subst_sup(t2, name, v)
            s2 = subst_sup(s2, name, v)
        a, b = nf(t2, budget), nf(s2, budget)
        if a is None or b is None or not member(a, q) or not member(b, q):
            continue
        if not inner_product(a, b).is_zero():
            return False
        passed += 1
    return passed > 0


# ---------------------------------------------------------------------------
# contexts, judgments and derivations


Binding = tuple[tuple[str, Type], ...]


def _bind(items: dict[str, Type]) -> Binding:
    return tuple(sorted(items.items()))


@dataclass(frozen=True)
class Ctx:
    """Exponential, duplicable (box copies) and linear variables."""

    exp: Binding = ()
    dup: Binding = ()
    lin: Binding = ()

    @staticmethod
    def make(exp: Optional[dict] = None, lin: Optional[dict] = None, dup: Optional[dict] = None) -> "Ctx":
        return Ctx(_bind(exp or {}), _bind(dup or {}), _bind(lin or {}))

    @property
    def exp_map(self) -> dict[str, Type]:
        return dict(self.exp)

    @property
    def dup_map(self) -> dict[str, Type]:
        return dict(self.dup)

    @property
    def lin_map(self) -> dict[str, Type]:
        return dict(self.lin)

    def names(self) -> set[str]:
        return {n for n, _ in self.exp} | {n for n, _ in self.dup} | {n for n, _ in self.lin}

    def without(self, *names: str) -> "Ctx":
        drop = set(names)
        return Ctx(
            tuple(b for b in self.exp if b[0] not in drop),
            tuple(b for b in self.dup if b[0] not in drop),
            tuple(b for b in self.lin if b[0] not in drop),
        )

    def add_lin(self, name: str, ty: Type) -> "Ctx":
        c = self.without(name)
        return Ctx(c.exp, c.dup, _bind({**c.lin_map, name: ty}))

    def add_exp(self, name: str, ty: Type) -> "Ctx":
        c = self.without(name)
        return Ctx(_bind({**c.exp_map, name: ty}), c.dup, c.lin)

    def only_lin(self, names: Iterable[str]) -> "Ctx":
        keep = set(names)
        return Ctx(self.exp, self.dup, tuple(b for b in self.lin if b[0] in keep))

    def tvars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for _, t in self.exp + self.dup + self.lin:
            out |= free_tvars(t)
        return out

    def __str__(self) -> str:
        def fmt(b: Binding) -> str:
            return ", ".join(f"{n}:{show_type(t)}" for n, t in b)

        gamma = fmt(self.exp)
        delta = ", ".join(x for x in (fmt(self.dup), fmt(self.lin)) if x)
        return f"{gamma}; {delta}".strip()


@dataclass(frozen=True)
class Judgment:
    ctx: Ctx
    subject: Node
    type: Type

    def __str__(self) -> str:
        return f"{self.ctx} |- {pretty(self.subject)} : {show_type(self.type)}"


@dataclass(frozen=True)
class Derivation:
    """A rule instance: conclusion, premises and side conditions."""

    rule: str
    judgment: Judgment
    premises: tuple["Derivation", ...] = ()
    side: tuple[tuple[str, str], ...] = ()

    def walk(self) -> Iterator["Derivation"]:
        yield self
        for p in self.premises:
            yield from p.walk()

    def rules(self) -> list[str]:
        return [d.rule for d in self.walk()]

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        extra = "".join(f" [{k}: {v}]" for k, v in self.side)
        lines = [f"{pad}({self.rule}) {self.judgment}{extra}"]
        for p in self.premises:
            lines.append(p.render(indent + 1))
        return "\n".join(lines)

    def summary(self) -> dict:
        counts: dict[str, int] = {}
        for r in self.rules():
            counts[r] = counts.get(r, 0) + 1
        return {
            "type": show_type(self.judgment.type),
            "rule": self.rule,
            "nodes": self.node_count(),
            "rules": dict(sorted(counts.items())),
        }


class Rejection(Exception):
    """A failed sub-goal with its location and reason."""

    def __init__(self, reason: str, rule: str, goal: Optional[Type], path: tuple[str, ...], subject: Optional[Node]) -> None:
        super().__init__(reason)
        self.reason = reason
        self.rule = rule
        self.goal = goal
        self.path = path
        self.subject = subject

    def to_dict(self) -> dict:
        return {
            "status": "rejected",
            "reason": self.reason,
            "rule": self.rule,
            "goal": show_type(self.goal) if self.goal is not None else None,
            "position": "/".join(self.path) or "<root>",
            "subterm": pretty(self.subject) if self.subject is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __str__(self) -> str:
        where = "/".join(self.path) or "<root>"
        return f"{self.reason} (rule {self.rule}, at {where})"


# ---------------------------------------------------------------------------
# helpers on types


def sharp_candidates(goal: Type) -> list[Type]:
    """Ground types Q with ``#Q <= goal``, most specific first."""
    out: list[Type] = []
    if isinstance(goal, Sharp):
        out += [goal.body, goal]
    if isinstance(goal, Par) and isinstance(goal.body, Sharp):
        out.append(Par(goal.body.body))
    if is_ground(goal) and not any(alpha_eq(goal, o) for o in out) and subtype(Sharp(goal), goal):
        out.append(goal)
    return [q for q in out if is_ground(q) and subtype(Sharp(q), goal)]


def pair_candidates(goal: Type) -> list[tuple[Type, Type]]:
    """Component types (A, B) with ``A * B <= goal``."""
    if isinstance(goal, Prod):
        return [(goal.left, goal.right)]
    out: list[tuple[Type, Type]] = []
    g = goal
    while isinstance(g, Sharp) and isinstance(g.body, Sharp):
        g = g.body
    if isinstance(g, Sharp) and isinstance(g.body, Prod):
        r1, r2 = g.body.left, g.body.right
        if bang(r1) == r1 and bang(r2) == r2:
            out.append((Sharp(r1), Sharp(r2)))
        out.append((r1, r2))
    return [(a, b) for a, b in out if subtype(Prod(a, b), goal)]


def unpar(t: Type) -> Optional[Type]:
    """Strip one paragraph for use inside a box."""
    if isinstance(t, Par):
        return t.body
    if isinstance(t, Sharp) and isinstance(t.body, Par):
        return Sharp(t.body.body)
    return None


def _strip_sharps(t: Type) -> Type:
    while isinstance(t, Sharp) and isinstance(t.body, Sharp):
        t = t.body
    return t


# ---------------------------------------------------------------------------
# the checker


class Checker:
    """Bidirectional checker parameterized by orthogonality mode and hints.

    ``hints`` maps the key of a closed term to candidate declared types; it
    lets applications of named definitions synthesize their head type.
    """

    def __init__(self, mode=None, hints: Optional[dict[tuple, list[Type]]] = None, budget: Optional[int] = None) -> None:
        self.mode = mode if mode is not None else Times()
        self.hints = hints or {}
        self.budget = budget
        self.nf = _Normalizer(budget)
        self._closed_memo: dict[tuple, "Derivation | Rejection"] = {}
        self._fresh = itertools.count()

    # entry points --------------------------------------------------------
    def check(self, t: "Sup | Term", goal: Type, ctx: Optional[Ctx] = None) -> Derivation:
        ctx = ctx or Ctx()
        return self.sup(ctx, as_sup(t), goal, ())

    # failure bookkeeping -------------------------------------------------
    def fail(self, reason: str, rule: str, goal: Optional[Type], path, subject) -> Rejection:
        return Rejection(reason, rule, goal, tuple(path), subject)

    def first(self, attempts: Sequence[Callable[[], Derivation]], default: Rejection) -> Derivation:
        best = default
        for attempt in attempts:
            try:
                return attempt()
            except Rejection as r:
                if _rank(r) >= _rank(best):
                    best = r
        raise best

    # orthogonality -------------------------------------------------------
    def orthogonal(self, a: Sup, b: Sup, q: Type) -> bool:
        m = self.mode
        if isinstance(m, Empty):
            return ortho_empty(a, b, self.budget, _nf=self.nf)
        if isinstance(m, Times):
            return ortho_times(a, b, self.budget, _nf=self.nf)
        if isinstance(m, UntypedBounded):
            return ortho_untyped_bounded(a, b, q, m.depth, _nf=self.nf)
        raise TypeError(m)

    # superpositions ------------------------------------------------------
    def sup(self, ctx: Ctx, s: Sup, goal: Type, path) -> Derivation:
        cf = canonicalize(s)
        if cf.is_zero:
            raise self.fail("the null vector has no type", "sharp_i", goal, path, s)
        if len(cf) == 1 and cf.terms[0][0] == ONE:
            t = cf.terms[0][1]
            d = self.term(ctx, t, goal, path)
            if isinstance(s, Single) and s.term == t:
                return d
            return Derivation("equiv", Judgment(ctx, s, goal), (d,), (("equiv", "canonical form"),))
        return self.superposition(ctx, s, cf, goal, path)

    def superposition(self, ctx: Ctx, s: Sup, cf: CanonicalForm, goal: Type, path) -> Derivation:
        if isinstance(goal, Forall):
            return self.forall_intro(ctx, s, goal, path, lambda c, g: self.superposition(c, s, cf, g, path))
        attempts: list[Callable[[], Derivation]] = []
        for q in sharp_candidates(goal):
            attempts.append(lambda q=q: self.sharp_intro(ctx, s, cf, q, goal, path))
        if isinstance(goal, Par):
            attempts.append(lambda: self.box(ctx, s, goal, path))
        default = self.fail(f"cannot type a superposition at {show_type(goal)}", "sharp_i", goal, path, s)
        return self.first(attempts, default)

    def sharp_intro(self, ctx: Ctx, s: Sup, cf: CanonicalForm, q: Type, goal: Type, path) -> Derivation:
        prems = []
        for i, (_, t) in enumerate(cf):
            prems.append(self.term(ctx, t, q, path + (f"sum[{i}]",)))
        norm = RealAlg()
        for a, _ in cf:
            norm = norm + a.norm_sq()
        if norm != RealAlg(1, 0):
            raise self.fail(f"squared norm is {norm}, not 1", "sharp_i", goal, path, s)
        terms = [t for _, t in cf]
        for i, j in itertools.combinations(range(len(terms)), 2):
            if not self.orthogonal(Single(terms[i]), Single(terms[j]), q):
                raise self.fail(
                    f"orthogonality of {pretty(terms[i])} and {pretty(terms[j])} not established in mode {self.mode}",
                    "sharp_i",
                    goal,
                    path,
                    s,
                )
        side = (("norm", "1"), ("orthogonal", f"{len(terms)} terms, mode {self.mode}"))
        sub = cf.to_sup()
        d = Derivation("sharp_i", Judgment(ctx, sub, Sharp(q)), tuple(prems), side)
        if key(sub) != key(s):
            d = Derivation("equiv", Judgment(ctx, s, Sharp(q)), (d,), (("equiv", "canonical form"),))
        return self.subsume(d, goal, path)

    def subsume(self, d: Derivation, goal: Type, path) -> Derivation:
        have = d.judgment.type
        if alpha_eq(have, goal):
            return d
        if subtype(have, goal):
            return Derivation("sub", Judgment(d.judgment.ctx, d.judgment.subject, goal), (d,), (("subtype", f"{show_type(have)} <= {show_type(goal)}"),))
        raise self.fail(f"{show_type(have)} is not a subtype of {show_type(goal)}", "sub", goal, path, d.judgment.subject)

    # quantifier and paragraph ---------------------------------------------
    def forall_intro(self, ctx: Ctx, subject: Node, goal: Forall, path, k) -> Derivation:
        var, body = goal.var, goal.body
        if var in ctx.tvars():
            new = fresh_tvar(ctx.tvars() | free_tvars(body))
            body = rename_tvar(body, var, new)
            var = new
        d = k(ctx, body)
        return Derivation("forall_i", Judgment(ctx, subject, goal), (d,), (("fresh", var),))

    def box(self, ctx: Ctx, subject: Node, goal: Par, path) -> Derivation:
        lin: dict[str, Type] = {}
        for name, ty in ctx.lin:
            inner = unpar(ty)
            if inner is None:
                raise self.fail(
                    f"linear variable {name} : {show_type(ty)} cannot enter a paragraph box",
                    "par_i",
                    goal,
                    path,
                    subject,
                )
            lin[name] = inner
        dup: dict[str, Type] = dict(ctx.exp)
        for name, ty in ctx.dup:
            inner = unpar(ty)
            if inner is not None and name not in dup:
                dup[name] = inner
        inner_ctx = Ctx.make(exp={}, lin=lin, dup=dup)
        sub = self.sup(inner_ctx, as_sup(subject), goal.body, path + ("box",)) if isinstance(subject, Sup) else self.term(
            inner_ctx, subject, goal.body, path + ("box",)
        )
        return Derivation("par_i", Judgment(ctx, subject, goal), (sub,))

    # terms ---------------------------------------------------------------
    def term(self, ctx: Ctx, t: Term, goal: Type, path) -> Derivation:
        fv = free_vars(t)
        for name, _ in ctx.lin:
            if name not in fv:
                raise self.fail(f"linear variable {name} is not used", "linearity", goal, path, t)
        known = ctx.names()
        for name in fv:
            if name not in known:
                raise self.fail(f"unbound variable {name}", "ax", goal, path, t)
        if not fv and not ctx.lin:
            memo_key = (key(t), type_key(goal), ctx.exp == () and ctx.dup == ())
            if memo_key[2]:
                hit = self._closed_memo.get(memo_key[:2])
                if isinstance(hit, Derivation):
                    return hit
                if isinstance(hit, Rejection):
                    raise hit
                try:
                    d = self._term(ctx, t, goal, path)
                except Rejection as r:
                    self._closed_memo[memo_key[:2]] = r
                    raise
                self._closed_memo[memo_key[:2]] = d
                return d
        return self._term(ctx, t, goal, path)

    def _term(self, ctx: Ctx, t: Term, goal: Type, path) -> Derivation:
        if isinstance(t, Var):
            return self.var(ctx, t, goal, path)
        if isinstance(goal, Forall):
            return self.forall_intro(ctx, t, goal, path, lambda c, g: self.term(c, t, g, path))
        if isinstance(goal, Par):
            attempts: list[Callable[[], Derivation]] = []
            if isinstance(t, (App, If, LetPair)):
                attempts.append(lambda: self.structural(ctx, t, goal, path))
            attempts.append(lambda: self.box(ctx, t, goal, path))
            default = self.fail(f"cannot type at {show_type(goal)}", "par_i", goal, path, t)
            return self.first(attempts, default)
        return self.structural(ctx, t, goal, path)

    def structural(self, ctx: Ctx, t: Term, goal: Type, path) -> Derivation:
        if isinstance(t, (Ket0, Ket1)):
            if ctx.lin:
                raise self.fail("linear variables unused at a constant", "linearity", goal, path, t)
            d = Derivation("ket0" if isinstance(t, Ket0) else "ket1", Judgment(ctx, t, B))
            return self.subsume(d, goal, path)
        if isinstance(t, Lam):
            return self.lam(ctx, t, goal, path)
        if isinstance(t, App):
            return self.app(ctx, t, goal, path)
        if isinstance(t, Pair):
            return self.pair(ctx, t, goal, path)
        if isinstance(t, If):
            return self.cond(ctx, t, goal, path)
        if isinstance(t, LetPair):
            return self.let(ctx, t, goal, path)
        if isinstance(t, Var):
            return self.var(ctx, t, goal, path)
        raise TypeError(t)

    # variables -----------------------------------------------------------
    def var_type(self, ctx: Ctx, t: Var, goal: Optional[Type], path) -> tuple[Type, str]:
        lin, dup, exp = ctx.lin_map, ctx.dup_map, ctx.exp_map
        if t.name in lin:
            others = [n for n in lin if n != t.name]
            if others:
                raise self.fail(f"linear variables {', '.join(sorted(others))} unused", "linearity", goal, path, t)
            return lin[t.name], "ax"
        if t.name in dup:
            if lin:
                raise self.fail(f"linear variables {', '.join(sorted(lin))} unused", "linearity", goal, path, t)
            return dup[t.name], "ax"
        if t.name in exp:
            raise self.fail(
                f"exponential variable {t.name} used outside a paragraph box or intuitionistic argument",
                "ax",
                goal,
                path,
                t,
            )
        raise self.fail(f"unbound variable {t.name}", "ax", goal, path, t)

    def var(self, ctx: Ctx, t: Var, goal: Type, path) -> Derivation:
        ty, rule = self.var_type(ctx, t, goal, path)
        d = Derivation(rule, Judgment(ctx, t, ty))
        if subtype(ty, goal):
            return self.subsume(d, goal, path)
        if isinstance(ty, Forall):
            c = match_type(ty.body, goal, ty.var)
            if c is not None:
                inst = subst_type(ty.body, ty.var, c)
                d2 = Derivation("forall_e", Judgment(ctx, t, inst), (d,), (("witness", show_type(c)),))
                return self.subsume(d2, goal, path)
        if isinstance(goal, Forall):
            return self.forall_intro(ctx, t, goal, path, lambda c, g: self.var(c, t, g, path))
        if isinstance(goal, Par):
            return self.box(ctx, t, goal, path)
        raise self.fail(f"{t.name} has type {show_type(ty)}, expected {show_type(goal)}", "sub", goal, path, t)

    # abstractions --------------------------------------------------------
    def lam(self, ctx: Ctx, t: Lam, goal: Type, path) -> Derivation:
        body_path = path + ("body",)
        if isinstance(goal, Lin):
            dom = goal.dom
            binder = t.annot if t.annot is not None else dom
            if t.annot is not None and not subtype(dom, t.annot):
                raise self.fail(f"annotation {show_type(t.annot)} does not accept {show_type(dom)}", "lin_i", goal, path, t)
            inner = ctx.add_lin(t.var, binder)
            d = self.sup(inner, t.body, goal.cod, body_path)
            concl = Lin(binder, goal.cod)
            return self.subsume(Derivation("lin_i", Judgment(ctx, t, concl), (d,)), goal, path)
        if isinstance(goal, Imp):
            dom = goal.dom
            binder = t.annot if t.annot is not None else dom
            if not subtype(dom, bang(binder)):
                raise self.fail(f"{show_type(dom)} is not below !({show_type(binder)})", "imp_i", goal, path, t)
            inner = ctx.add_exp(t.var, binder)
            d = self.sup(inner, t.body, goal.cod, body_path)
            concl = Imp(bang(binder), goal.cod)
            return self.subsume(Derivation("imp_i", Judgment(ctx, t, concl), (d,)), goal, path)
        raise self.fail(f"an abstraction cannot have type {show_type(goal)}", "lin_i", goal, path, t)

    # splitting -----------------------------------------------------------
    def split(self, ctx: Ctx, parts: Sequence[Node], names: Sequence[str], goal, path, t, bound: Sequence[frozenset] = ()) -> list[Ctx]:
        """Give each linear variable to the unique part where it occurs."""
        fvs = []
        for i, p in enumerate(parts):
            fv = free_vars(p)
            if i < len(bound):
                fv = fv - bound[i]
            fvs.append(fv)
        owners: list[set[str]] = [set() for _ in parts]
        for name, _ in ctx.lin:
            where = [i for i, fv in enumerate(fvs) if name in fv]
            if len(where) > 1:
                raise self.fail(
                    f"linear variable {name} used in both {names[where[0]]} and {names[where[1]]}",
                    "linearity",
                    goal,
                    path,
                    t,
                )
            if not where:
                raise self.fail(f"linear variable {name} is not used", "linearity", goal, path, t)
            owners[where[0]].add(name)
        return [ctx.only_lin(o) for o in owners]

    # applications --------------------------------------------------------
    def app(self, ctx: Ctx, t: App, goal: Type, path) -> Derivation:
        cf, ca = self.split(ctx, [t.fun, t.arg], ["head", "argument"], goal, path, t)
        head_path = path + ("head",)
        attempts: list[Callable[[], Derivation]] = []
        for head_ty, head_d in self.synth_options(cf, t.fun, head_path):
            attempts.append(lambda ht=head_ty, hd=head_d: self.apply(ctx, cf, ca, t, ht, hd, goal, path))
        if isinstance(t.fun, Lam):
            attempts.append(lambda: self.beta(ctx, cf, ca, t, goal, path))
        default = self.fail("cannot synthesize the type of the application head", "app", goal, head_path, t.fun)
        return self.first(attempts, default)

    def apply(self, ctx: Ctx, cf: Ctx, ca: Ctx, t: App, head_ty: Type, head_d: Derivation, goal: Type, path) -> Derivation:
        arg_path = path + ("arg",)
        if isinstance(head_ty, Forall):
            attempts = []
            for c in self.instantiations(ca, head_ty, t.arg, goal, arg_path):
                inst = subst_type(head_ty.body, head_ty.var, c)
                d2 = Derivation("forall_e", Judgment(cf, t.fun, inst), (head_d,), (("witness", show_type(c)),))
                attempts.append(lambda inst=inst, d2=d2: self.apply(ctx, cf, ca, t, inst, d2, goal, path))
            default = self.fail(f"cannot instantiate {show_type(head_ty)}", "forall_e", goal, path, t)
            return self.first(attempts, default)
        if isinstance(head_ty, Par) and isinstance(head_ty.body, (Lin, Imp)) and not isinstance(t.fun, Var):
            name = f"F_{next(self._fresh)}"
            while name in ctx.names() or name in free_vars(t):
                name = f"F_{next(self._fresh)}"
            inner_ctx = ca.add_lin(name, head_ty)
            inner = App(Var(name), t.arg)
            d_body = self.term(inner_ctx, inner, goal, path + ("par_e",))
            return Derivation("par_e", Judgment(ctx, t, goal), (head_d, d_body), (("abstracted", name),))
        if isinstance(head_ty, Lin):
            d_arg = self.term(ca, t.arg, head_ty.dom, arg_path)
            d = Derivation("lin_e", Judgment(ctx, t, head_ty.cod), (head_d, d_arg))
            return self.subsume(d, goal, path)
        if isinstance(head_ty, Imp):
            if ca.lin:
                raise self.fail(
                    "argument of an intuitionistic application uses linear variables",
                    "imp_e",
                    goal,
                    arg_path,
                    t.arg,
                )
            fv = free_vars(t.arg)
            if len(fv) > 1:
                raise self.fail(
                    f"argument of an intuitionistic application has {len(fv)} free variables, at most one allowed",
                    "imp_e",
                    goal,
                    arg_path,
                    t.arg,
                )
            arg_ctx = Ctx()
            if fv:
                (z,) = fv
                exp = ctx.exp_map
                if z not in exp:
                    raise self.fail(
                        f"free variable {z} of an intuitionistic argument must be exponential",
                        "imp_e",
                        goal,
                        arg_path,
                        t.arg,
                    )
                arg_ctx = Ctx.make(lin={z: exp[z]})
            d_arg = self.term(arg_ctx, t.arg, head_ty.dom, arg_path)
            d = Derivation("imp_e", Judgment(ctx, t, head_ty.cod), (head_d, d_arg))
            return self.subsume(d, goal, path)
        raise self.fail(f"head has non-function type {show_type(head_ty)}", "lin_e", goal, path, t)

    def instantiations(self, ca: Ctx, head: Forall, arg: Term, goal: Type, path) -> list[Type]:
        body = head.body
        out: list[Type] = []
        if isinstance(body, (Lin, Imp)):
            try:
                for arg_ty, _ in self.synth_options(ca if isinstance(body, Lin) else Ctx(), arg, path):
                    c = match_type(body.dom, arg_ty, head.var)
                    if c is not None:
                        out.append(c)
            except Rejection:
                pass
            c = match_type(body.cod, goal, head.var)
            if c is not None:
                out.append(c)
        uniq: list[Type] = []
        for c in out:
            if not any(alpha_eq(c, u) for u in uniq):
                uniq.append(c)
        return uniq

    def beta(self, ctx: Ctx, cf: Ctx, ca: Ctx, t: App, goal: Type, path) -> Derivation:
        lam = t.fun
        assert isinstance(lam, Lam)
        options = list(self.synth_options(ca, t.arg, path + ("arg",)))
        attempts = []
        for arg_ty, _ in options:
            for arrow in (Lin(arg_ty, goal), Imp(bang(arg_ty), goal)):
                def attempt(arrow=arrow):
                    hd = self.term(cf, lam, arrow, path + ("head",))
                    return self.apply(ctx, cf, ca, t, arrow, hd, goal, path)

                attempts.append(attempt)
        default = self.fail("cannot type the redex: argument type not synthesizable", "lin_e", goal, path + ("arg",), t.arg)
        return self.first(attempts, default)

    # synthesis -----------------------------------------------------------
    def synth_options(self, ctx: Ctx, t: Term, path) -> Iterator[tuple[Type, Derivation]]:
        """Candidate types for ``t`` with their derivations."""
        if isinstance(t, Var):
            ty, rule = self.var_type(ctx, t, None, path)
            yield ty, Derivation(rule, Judgment(ctx, t, ty))
            return
        if isinstance(t, (Ket0, Ket1)):
            if ctx.lin:
                raise self.fail("linear variables unused at a constant", "linearity", None, path, t)
            yield B, Derivation("ket0" if isinstance(t, Ket0) else "ket1", Judgment(ctx, t, B))
            return
        if is_closed(t) and not ctx.lin:
            hinted = self.hints.get(key(t), [])
            found = False
            for ty in hinted:
                try:
                    d = self.term(Ctx(), t, ty, path)
                except Rejection:
                    continue
                found = True
                yield ty, self._weaken(d, ctx)
            if found:
                return
        if isinstance(t, App):
            yield from self.synth_app(ctx, t, path)
            return
        if isinstance(t, Pair):
            cl, cr = self.split(ctx, [t.left, t.right], ["left", "right"], None, path, t)
            lefts = list(self.synth_options(cl, t.left, path + ("left",)))
            rights = list(self.synth_options(cr, t.right, path + ("right",)))
            for lt, ld in lefts:
                for rt, rd in rights:
                    yield Prod(lt, rt), Derivation("prod_i", Judgment(ctx, t, Prod(lt, rt)), (ld, rd))
            return
        if isinstance(t, Lam) and t.annot is not None:
            inner = ctx.add_lin(t.var, t.annot)
            body = t.body
            bt = _single(body)
            if bt is not None:
                for rt, rd in self.synth_options(inner, bt, path + ("body",)):
                    yield Lin(t.annot, rt), Derivation("lin_i", Judgment(ctx, t, Lin(t.annot, rt)), (rd,))
            return
        return

    def _weaken(self, d: Derivation, ctx: Ctx) -> Derivation:
        if ctx == d.judgment.ctx:
            return d
        return Derivation("weak", Judgment(ctx, d.judgment.subject, d.judgment.type), (d,))

    def synth_app(self, ctx: Ctx, t: App, path) -> Iterator[tuple[Type, Derivation]]:
        cf, ca = self.split(ctx, [t.fun, t.arg], ["head", "argument"], None, path, t)
        for head_ty, head_d in list(self.synth_options(cf, t.fun, path + ("head",))):
            for res in self._synth_apply(ctx, cf, ca, t, head_ty, head_d, path):
                yield res

    def _synth_apply(self, ctx: Ctx, cf: Ctx, ca: Ctx, t: App, head_ty: Type, head_d: Derivation, path) -> Iterator[tuple[Type, Derivation]]:
        if isinstance(head_ty, Forall):
            body = head_ty.body
            if not isinstance(body, (Lin, Imp)):
                return
            try:
                opts = list(self.synth_options(ca if isinstance(body, Lin) else Ctx(), t.arg, path + ("arg",)))
            except Rejection:
                return
            seen: list[Type] = []
            for arg_ty, _ in opts:
                c = match_type(body.dom, arg_ty, head_ty.var)
                if c is None or any(alpha_eq(c, s) for s in seen):
                    continue
                seen.append(c)
                inst = subst_type(body, head_ty.var, c)
                d2 = Derivation("forall_e", Judgment(cf, t.fun, inst), (head_d,), (("witness", show_type(c)),))
                yield from self._synth_apply(ctx, cf, ca, t, inst, d2, path)
            return
        if isinstance(head_ty, (Lin, Imp)):
            try:
                d = self.apply(ctx, cf, ca, t, head_ty, head_d, head_ty.cod, path)
            except Rejection:
                return
            yield head_ty.cod, d
            return
        if isinstance(head_ty, Par) and isinstance(head_ty.body, (Lin, Imp)) and not isinstance(t.fun, Var):
            goal = Par(head_ty.body.cod)
            try:
                d = self.apply(ctx, cf, ca, t, head_ty, head_d, goal, path)
            except Rejection:
                return
            yield goal, d

    # pairs ---------------------------------------------------------------
    def pair(self, ctx: Ctx, t: Pair, goal: Type, path) -> Derivation:
        cl, cr = self.split(ctx, [t.left, t.right], ["left", "right"], goal, path, t)
        attempts = []
        for a, b in pair_candidates(goal):
            def attempt(a=a, b=b):
                dl = self.term(cl, t.left, a, path + ("left",))
                dr = self.term(cr, t.right, b, path + ("right",))
                d = Derivation("prod_i", Judgment(ctx, t, Prod(a, b)), (dl, dr))
                return self.subsume(d, goal, path)

            attempts.append(attempt)
        default = self.fail(f"a pair cannot have type {show_type(goal)}", "prod_i", goal, path, t)
        return self.first(attempts, default)

    # conditionals ----------------------------------------------------------
    def cond(self, ctx: Ctx, t: If, goal: Type, path) -> Derivation:
        branches = Sum_of(t.then, t.els)
        cg, cb = self.split(ctx, [t.cond, branches], ["guard", "branches"], goal, path, t)
        guard_path = path + ("guard",)

        def classical() -> Derivation:
            dg = self.term(cg, t.cond, B, guard_path)
            d1 = self.sup(cb, t.then, goal, path + ("then",))
            d2 = self.sup(cb, t.els, goal, path + ("else",))
            return Derivation("if", Judgment(ctx, t, goal), (dg, d1, d2))

        def quantum(q: Type) -> Derivation:
            dg = self.term(cg, t.cond, Sharp(B), guard_path)
            d1 = self.sup(cb, t.then, q, path + ("then",))
            d2 = self.sup(cb, t.els, q, path + ("else",))
            if not self.orthogonal(t.then, t.els, q):
                raise self.fail(
                    f"branches not shown orthogonal in mode {self.mode}",
                    "if_sharp",
                    goal,
                    path,
                    t,
                )
            d = Derivation("if_sharp", Judgment(ctx, t, Sharp(q)), (dg, d1, d2), (("orthogonal", f"mode {self.mode}"),))
            return self.subsume(d, goal, path)

        attempts: list[Callable[[], Derivation]] = [classical]
        for q in sharp_candidates(goal):
            attempts.append(lambda q=q: quantum(q))
        default = self.fail("conditional does not type", "if", goal, path, t)
        return self.first(attempts, default)

    # destructors ----------------------------------------------------------
    def let(self, ctx: Ctx, t: LetPair, goal: Type, path) -> Derivation:
        bound = frozenset({t.x, t.y})
        cs, cb = self.split(ctx, [t.scrut, t.body], ["scrutinee", "body"], goal, path, t, bound=(frozenset(), bound))
        cb = cb.without(t.x, t.y).only_lin(n for n, _ in cb.lin)
        attempts: list[Callable[[], Derivation]] = []
        scrut_path = path + ("scrutinee",)
        options = list(self.synth_options(cs, t.scrut, scrut_path))
        if not options:
            raise self.fail("cannot synthesize the scrutinee type", "prod_e", goal, scrut_path, t.scrut)
        base = ctx.without(t.x, t.y).only_lin(n for n, _ in cb.lin)
        for sty, sd in options:
            s = _strip_sharps(sty)
            if isinstance(s, Prod):
                def classical(s=s, sd=sd):
                    inner = base.add_lin(t.x, s.left).add_lin(t.y, s.right)
                    db = self.sup(inner, t.body, goal, path + ("body",))
                    return Derivation("prod_e", Judgment(ctx, t, goal), (sd, db))

                attempts.append(classical)
            if isinstance(s, Sharp) and isinstance(s.body, Prod):
                q, r = s.body.left, s.body.right
                for target in sharp_candidates(goal):
                    def quantum(q=q, r=r, target=target, sd=sd, sty=sty):
                        inner = base.add_lin(t.x, Sharp(q)).add_lin(t.y, Sharp(r))
                        db = self.sup(inner, t.body, target, path + ("body",))
                        scrut_d = sd if sty == s else self.subsume(sd, s, scrut_path)
                        d = Derivation("prod_e_sharp", Judgment(ctx, t, Sharp(target)), (scrut_d, db))
                        return self.subsume(d, goal, path)

                    attempts.append(quantum)
        default = self.fail("scrutinee does not have a product type", "prod_e", goal, scrut_path, t.scrut)
        return self.first(attempts, default)


_SIDE_RULES = {"if_sharp", "sharp_i", "linearity", "imp_e"}


def _rank(r: Rejection) -> tuple[int, int]:
    # side-condition failures explain more than a type clash in an abandoned candidate
    return (r.rule in _SIDE_RULES, len(r.path))


def Sum_of(a: Sup, b: Sup) -> Sup:
    from .syntax import Sum

    return Sum(a, b)


def _single(s: Sup) -> Optional[Term]:
    terms = expand(s)
    if len(terms) == 1 and terms[0][0] == ONE:
        return terms[0][1]
    return None


# ---------------------------------------------------------------------------
# module-level API


def check(t: "Sup | Term", a: Type, mode=None, hints: Optional[dict] = None, ctx: Optional[Ctx] = None, budget: Optional[int] = None) -> Derivation:
    """Return a derivation of ``ctx |- t : a`` or raise :class:`Rejection`."""
    return Checker(mode, hints, budget).check(t, a, ctx)


def accepts(t: "Sup | Term", a: Type, mode=None, hints: Optional[dict] = None, ctx: Optional[Ctx] = None) -> bool:
    try:
        check(t, a, mode, hints, ctx)
        return True
    except Rejection:
        return False


def check_program(prog, mode=None, name: Optional[str] = None, ty: Optional[Type] = None) -> Derivation:
    """Check one definition of a program against its declared type."""
    d = prog.defs[name or prog.main_name]
    target = ty if ty is not None else d.type
    if target is None:
        raise Rejection(f"definition {d.name} has no declared type", "def", None, (), d.body)
    return check(d.body, target, mode, prog.hints())


# ---------------------------------------------------------------------------
# independent replay of derivations


class InvalidDerivation(ValueError):
    pass


def validate(d: Derivation, mode=None) -> None:
    """Re-check each node against its rule, independently of the search."""
    for node in d.walk():
        _validate_node(node, mode)


def _lin_union(ctxs: Sequence[Ctx]) -> dict[str, Type]:
    out: dict[str, Type] = {}
    for c in ctxs:
        for n, t in c.lin:
            if n in out:
                raise InvalidDerivation(f"linear variable {n} shared between premises")
            out[n] = t
    return out


def _validate_node(d: Derivation, mode) -> None:
    j = d.judgment
    ps = d.premises
    rule = d.rule

    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise InvalidDerivation(f"({rule}) {msg}: {j}")

    if rule == "ax":
        need(isinstance(j.subject, Var), "subject must be a variable")
        name = j.subject.name
        lin, dup = j.ctx.lin_map, j.ctx.dup_map
        if name in lin:
            need(set(lin) == {name}, "linear context must be exactly the variable")
            need(alpha_eq(lin[name], j.type), "type must match the context")
        else:
            need(name in dup and not lin, "variable must be linear or a box copy")
            need(alpha_eq(dup[name], j.type), "type must match the context")
    elif rule in ("ket0", "ket1"):
        need(isinstance(j.subject, Ket0 if rule == "ket0" else Ket1), "subject must be the constant")
        need(j.type == B and not j.ctx.lin, "constants have type B with empty linear context")
    elif rule == "sub":
        need(len(ps) == 1, "one premise")
        need(alpha_equiv_node(ps[0].judgment.subject, j.subject), "same subject")
        need(subtype(ps[0].judgment.type, j.type), "subtyping must hold")
    elif rule == "equiv":
        need(len(ps) == 1, "one premise")
        need(equiv(as_sup(ps[0].judgment.subject), as_sup(j.subject)), "subjects must be equivalent")
        need(alpha_eq(ps[0].judgment.type, j.type), "same type")
    elif rule == "weak":
        need(len(ps) == 1 and ps[0].judgment.ctx.lin == j.ctx.lin, "weakening keeps the linear context")
    elif rule == "lin_i":
        need(isinstance(j.subject, Lam) and isinstance(j.type, Lin), "abstraction at a linear arrow")
        p = ps[0].judgment
        need(p.ctx.lin_map.get(j.subject.var) == j.type.dom, "binder in the linear context")
        need(alpha_eq(p.type, j.type.cod), "body at the codomain")
    elif rule == "imp_i":
        need(isinstance(j.subject, Lam) and isinstance(j.type, Imp), "abstraction at an intuitionistic arrow")
        p = ps[0].judgment
        bt = p.ctx.exp_map.get(j.subject.var)
        need(bt is not None and alpha_eq(bang(bt), j.type.dom), "binder in the exponential context, banged")
        need(alpha_eq(p.type, j.type.cod), "body at the codomain")
    elif rule == "lin_e":
        h, a = ps[0].judgment, ps[1].judgment
        need(isinstance(h.type, Lin), "head at a linear arrow")
        need(alpha_eq(a.type, h.type.dom), "argument at the domain")
        need(alpha_eq(j.type, h.type.cod), "result at the codomain")
        need(_lin_union([h.ctx, a.ctx]) == j.ctx.lin_map, "linear contexts split")
    elif rule == "imp_e":
        h, a = ps[0].judgment, ps[1].judgment
        need(isinstance(h.type, Imp), "head at an intuitionistic arrow")
        need(alpha_eq(a.type, h.type.dom), "argument at the domain")
        need(alpha_eq(j.type, h.type.cod), "result at the codomain")
        need(len(a.ctx.lin) <= 1 and not a.ctx.exp, "argument has at most one free variable")
        for n, _ in a.ctx.lin:
            need(n in j.ctx.exp_map, "argument variable is exponential in the conclusion")
        need(h.ctx.lin == j.ctx.lin, "linear context belongs to the head")
    elif rule == "prod_i":
        l, r = ps[0].judgment, ps[1].judgment
        need(isinstance(j.subject, Pair), "subject is a pair")
        need(alpha_eq(j.type, Prod(l.type, r.type)), "product of the component types")
        need(_lin_union([l.ctx, r.ctx]) == j.ctx.lin_map, "linear contexts split")
    elif rule in ("prod_e", "prod_e_sharp"):
        s, b = ps[0].judgment, ps[1].judgment
        need(isinstance(j.subject, LetPair), "subject is a let")
        t = j.subject
        bl = b.ctx.lin_map
        if rule == "prod_e":
            need(isinstance(s.type, Prod), "scrutinee has a product type")
            need(alpha_eq(bl.get(t.x), s.type.left) and alpha_eq(bl.get(t.y), s.type.right), "binders typed by components")
            need(alpha_eq(b.type, j.type), "body at the result type")
        else:
            need(isinstance(s.type, Sharp) and isinstance(s.type.body, Prod), "scrutinee has a sharp product type")
            q, r = s.type.body.left, s.type.body.right
            need(bl.get(t.x) == Sharp(q) and bl.get(t.y) == Sharp(r), "binders typed by sharp components")
            need(j.type == Sharp(b.type), "result is the sharp of the body type")
        rest = {k: v for k, v in bl.items() if k not in (t.x, t.y)}
        need(_lin_union([s.ctx, Ctx.make(lin=rest)]) == j.ctx.lin_map, "linear contexts split")
    elif rule in ("if", "if_sharp"):
        g, b1, b2 = (p.judgment for p in ps)
        need(isinstance(j.subject, If), "subject is a conditional")
        need(b1.ctx.lin == b2.ctx.lin, "branches share their context")
        need(_lin_union([g.ctx, b1.ctx]) == j.ctx.lin_map, "guard and branches split the context")
        if rule == "if":
            need(g.type == B, "classical guard")
            need(alpha_eq(b1.type, j.type) and alpha_eq(b2.type, j.type), "branches at the result type")
        else:
            need(g.type == Sharp(B), "quantum guard")
            need(alpha_eq(b1.type, b2.type) and j.type == Sharp(b1.type), "result is sharp of the branch type")
            need(dict(d.side).get("orthogonal") is not None, "orthogonality side condition recorded")
    elif rule == "sharp_i":
        need(isinstance(j.type, Sharp), "result is a sharp type")
        terms = canonicalize(as_sup(j.subject))
        norm = RealAlg()
        for a, _ in terms:
            norm = norm + a.norm_sq()
        need(norm == RealAlg(1, 0), "squared norm is one")
        need(len(ps) == len(terms), "one premise per summand")
        for p in ps:
            need(alpha_eq(p.judgment.type, j.type.body), "summands at the ground type")
            need(p.judgment.ctx == j.ctx, "summands share the context")
    elif rule == "par_i":
        need(isinstance(j.type, Par), "result is a paragraph")
        p = ps[0].judgment
        need(alpha_eq(p.type, j.type.body), "premise at the unboxed type")
        need(not p.ctx.exp, "box premise has no exponential context")
        for n, ty in j.ctx.lin:
            need(p.ctx.lin_map.get(n) == unpar(ty), "linear variables lose one paragraph")
    elif rule == "par_e":
        h, b = ps[0].judgment, ps[1].judgment
        name = dict(d.side).get("abstracted")
        need(name is not None and isinstance(h.type, Par), "abstracted head has paragraph type")
        need(b.ctx.lin_map.get(name) == h.type, "abstracted variable typed by the head")
        body = b.subject
        need(alpha_equiv_node(subst(body, {name: h.subject}), j.subject), "substitution gives the subject")
    elif rule == "forall_i":
        need(isinstance(j.type, Forall), "result is quantified")
        p = ps[0].judgment
        var = dict(d.side).get("fresh")
        need(var not in j.ctx.tvars(), "quantified variable is fresh")
        need(alpha_eq(Forall(var, p.type), j.type), "premise is the body")
    elif rule == "forall_e":
        p = ps[0].judgment
        need(isinstance(p.type, Forall), "premise is quantified")
    else:
        raise InvalidDerivation(f"unknown rule {rule}")


def alpha_equiv_node(a: Node, b: Node) -> bool:
    return key(as_sup(a) if isinstance(a, Term) else a) == key(as_sup(b) if isinstance(b, Term) else b)
