"""Call-by-value small-step evaluation over exact superpositions.

Every step first brings the superposition to canonical form, then reduces
each non-value summand once.  Each summand uses the first applicable rule
among If0, If1, Abs, Let, If+, App, App_V, Pair, Pair_V and Let+.  Reducts
that are superpositions are pushed out of their context by the
distribution sugar, so results stay syntactically valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .amplitude import Amplitude
from .superalg import CanonicalForm, canonicalize
from .syntax import (
    App,
    If,
    Ket0,
    Ket1,
    Lam,
    LetPair,
    Pair,
    Sup,
    Term,
    expand,
    free_vars,
    from_terms,
    is_basis_value,
    pretty,
    size,
    subst,
    sugar_app,
    sugar_if,
    sugar_let,
    sugar_pair,
)


class EvalError(RuntimeError):
    """Base class for evaluation failures."""


class Stuck(EvalError):
    """A closed non-value with no applicable rule (only for untyped input)."""

    def __init__(self, term: Term) -> None:
        super().__init__(f"stuck term: {pretty(term)}")
        self.term = term


class OpenTerm(EvalError):
    pass


class BudgetExhausted(EvalError):
    def __init__(self, trace: "StepTrace", budget: int) -> None:
        super().__init__(f"step budget {budget} exhausted")
        self.trace = trace
        self.budget = budget


@dataclass
class StepTrace:
    """Rule label and canonical superposition after each step."""

    start: CanonicalForm
    steps: list[tuple[str, CanonicalForm]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.steps)

    def states(self) -> list[CanonicalForm]:
        return [self.start] + [s for _, s in self.steps]

    def lines(self) -> list[str]:
        return [f"#{i} [{rule}] {state}" for i, (rule, state) in enumerate(self.steps, 1)]

    def dump(self) -> str:
        return "\n".join(self.lines())


@dataclass(frozen=True)
class EvalResult:
    value: CanonicalForm
    trace: StepTrace

    @property
    def steps(self) -> int:
        return self.trace.count


def default_budget(s: "Sup | Term") -> int:
    n = size(s if isinstance(s, (Sup, Term)) else s.to_sup())
    return 10 * n ** 4 + 1000


# ---------------------------------------------------------------------------
# sugar, as a single entry point


def distribute_sugar(position: str, *parts) -> Sup:
    """Push a superposition out of a term-only position.

    ``position`` is one of ``if`` (guard, then, else), ``app`` (head, arg),
    ``pair`` (left, right) or ``let`` (x, y, scrutinee, body).
    """
    table: dict[str, Callable[..., Sup]] = {
        "if": sugar_if,
        "app": sugar_app,
        "pair": sugar_pair,
        "let": sugar_let,
    }
    try:
        fn = table[position]
    except KeyError:
        raise ValueError(f"unknown sugar position {position!r}") from None
    return fn(*parts)


# ---------------------------------------------------------------------------
# one-step reduction of a single term


def reduce_term(t: Term) -> Optional[tuple[Sup, str]]:
    """One step on a closed term, or ``None`` if it is a basis value.

    Raises :class:`Stuck` for closed non-values with no rule.
    """
    if is_basis_value(t):
        return None
    if isinstance(t, If):
        c = t.cond
        if isinstance(c, Ket0):
            return t.then, "If0"
        if isinstance(c, Ket1):
            return t.els, "If1"
        if is_basis_value(c):
            raise Stuck(t)
        r, lbl = _sub(c)
        return sugar_if(r, t.then, t.els), f"If+/{lbl}"
    if isinstance(t, App):
        f, a = t.fun, t.arg
        if is_basis_value(a):
            if isinstance(f, Lam):
                return subst(f.body, {f.var: a}), "Abs"
            if is_basis_value(f):
                raise Stuck(t)
            r, lbl = _sub(f)
            return sugar_app(r, a), f"App_V/{lbl}"
        r, lbl = _sub(a)
        return sugar_app(f, r), f"App/{lbl}"
    if isinstance(t, LetPair):
        s = t.scrut
        if is_basis_value(s):
            if isinstance(s, Pair):
                return subst(t.body, {t.x: s.left, t.y: s.right}), "Let"
            raise Stuck(t)
        r, lbl = _sub(s)
        return sugar_let(t.x, t.y, r, t.body), f"Let+/{lbl}"
    if isinstance(t, Pair):
        if not is_basis_value(t.left):
            r, lbl = _sub(t.left)
            return sugar_pair(r, t.right), f"Pair/{lbl}"
        r, lbl = _sub(t.right)
        return sugar_pair(t.left, r), f"Pair_V/{lbl}"
    raise Stuck(t)


def _sub(t: Term) -> tuple[Sup, str]:
    res = reduce_term(t)
    if res is None:
        raise Stuck(t)
    return res


def step(s: "Sup | Term | CanonicalForm") -> Optional[tuple[Sup, str]]:
    """One reduction step on a closed superposition, or ``None`` on values."""
    cf = canonicalize(s)
    if free_vars(cf.to_sup()):
        raise OpenTerm(f"cannot evaluate open term: {cf}")
    out: list[tuple[Amplitude, Term]] = []
    labels: list[str] = []
    for a, t in cf:
        res = reduce_term(t)
        if res is None:
            out.append((a, t))
            continue
        r, lbl = res
        labels.append(lbl)
        out.extend((a * b, u) for b, u in expand(r))
    if not labels:
        return None
    label = labels[0] if len(labels) == 1 else "Sup{" + ", ".join(labels) + "}"
    return from_terms(out), label


def evaluate(s: "Sup | Term | CanonicalForm", budget: Optional[int] = None) -> EvalResult:
    """Iterate :func:`step` until a value; the value is in canonical form."""
    cf = canonicalize(s)
    if budget is None:
        budget = default_budget(cf.to_sup())
    trace = StepTrace(cf)
    cur = cf
    while True:
        res = step(cur)
        if res is None:
            return EvalResult(cur, trace)
        if trace.count >= budget:
            raise BudgetExhausted(trace, budget)
        nxt, label = res
        cur = canonicalize(nxt)
        trace.steps.append((label, cur))


eval_sup = evaluate


def normal_form(s: "Sup | Term | CanonicalForm", budget: Optional[int] = None) -> CanonicalForm:
    return evaluate(s, budget).value


def top_rule(label: str) -> str:
    """The outermost rule name of a step label."""
    return label.split("/", 1)[0]
