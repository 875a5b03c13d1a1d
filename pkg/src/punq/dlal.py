"""Translation into sets of DLAL terms with an inert constant, and set reduction.

The translation dequantizes: sums become unions, amplitudes disappear, and
each abstraction is linearized so its bound variable occurs at most once per
copy.  Reducing the resulting set in lockstep gives a step count that bounds
the source evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .semantics import EvalError, evaluate
from .syntax import (
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
    Zero,
    as_sup,
    expand,
    free_vars,
    is_closed,
    occurrences,
    pretty,
    subst,
)
from .types import Bool, Forall, Imp, Lin, Par, Prod, Sharp, TVar, Type


# ---------------------------------------------------------------------------
# terms


def _cache_hash(cls):
    generated = cls.__hash__

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = generated(self)
            object.__setattr__(self, "_h", h)
        return h

    cls.__hash__ = __hash__
    return cls


class DTerm:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)


@_cache_hash
@dataclass(frozen=True)
class DVar(DTerm):
    name: str


@_cache_hash
@dataclass(frozen=True)
class DLam(DTerm):
    """Abstraction.

    ``tag`` is ``"pair"`` for the encoding of a pair, whose components still
    reduce, and ``"if"`` for the abstraction over a conditional's context.
    """

    var: str
    body: DTerm
    tag: str = field(default="", compare=False)

    @property
    def pair(self) -> bool:
        return self.tag == "pair"


@_cache_hash
@dataclass(frozen=True)
class DApp(DTerm):
    fun: DTerm
    arg: DTerm


@_cache_hash
@dataclass(frozen=True)
class Star(DTerm):
    """The inert constant: never reduces."""


STAR = Star()
TT = DLam("x", DLam("y", DVar("x")))
FF = DLam("x", DLam("y", DVar("y")))


def dfree(t: DTerm) -> frozenset[str]:
    fv = t.__dict__.get("_fv")
    if fv is not None:
        return fv
    if isinstance(t, DVar):
        fv = frozenset({t.name})
    elif isinstance(t, DLam):
        fv = dfree(t.body) - {t.var}
    elif isinstance(t, DApp):
        fv = dfree(t.fun) | dfree(t.arg)
    else:
        fv = frozenset()
    object.__setattr__(t, "_fv", fv)
    return fv


def dkey(t: DTerm, env: tuple[str, ...] = ()) -> tuple:
    """De Bruijn key: equal iff alpha-equivalent."""
    if env and not (dfree(t) & set(env)):
        env = ()
    if not env:
        k = t.__dict__.get("_k")
        if k is not None:
            return k
    if isinstance(t, DVar):
        for i, name in enumerate(reversed(env)):
            if name == t.name:
                k = ("b", i)
                break
        else:
            k = ("f", t.name)
    elif isinstance(t, DLam):
        k = ("lam", dkey(t.body, env + (t.var,)))
    elif isinstance(t, DApp):
        k = ("app", dkey(t.fun, env), dkey(t.arg, env))
    else:
        k = ("star",)
    if not env:
        object.__setattr__(t, "_k", k)
    return k


def dsize(t: DTerm) -> int:
    if isinstance(t, DLam):
        return 1 + dsize(t.body)
    if isinstance(t, DApp):
        return 1 + dsize(t.fun) + dsize(t.arg)
    return 1


_fresh = itertools.count()


def _fresh_name(base: str, avoid: frozenset[str]) -> str:
    stem = base.split("'")[0]
    while True:
        cand = f"{stem}'{next(_fresh)}"
        if cand not in avoid:
            return cand


def dsubst(t: DTerm, x: str, v: DTerm) -> DTerm:
    """Capture-avoiding ``t[v/x]``."""
    if x not in dfree(t):
        return t
    if isinstance(t, DVar):
        return v if t.name == x else t
    if isinstance(t, DApp):
        return DApp(dsubst(t.fun, x, v), dsubst(t.arg, x, v))
    if isinstance(t, DLam):
        if t.var in dfree(v):
            new = _fresh_name(t.var, dfree(v) | dfree(t.body))
            body = dsubst(t.body, t.var, DVar(new))
            return DLam(new, dsubst(body, x, v), t.tag)
        return DLam(t.var, dsubst(t.body, x, v), t.tag)
    return t


def show(t: DTerm) -> str:
    k = dkey(t)
    if k == dkey(TT):
        return "tt"
    if k == dkey(FF):
        return "ff"
    if isinstance(t, DVar):
        return t.name
    if isinstance(t, Star):
        return "*"
    if isinstance(t, DLam):
        return f"\\{t.var}. {show(t.body)}"
    f = show(t.fun) if not isinstance(t.fun, DLam) or dkey(t.fun) in (dkey(TT), dkey(FF)) else f"({show(t.fun)})"
    a = show(t.arg)
    if isinstance(t.arg, DApp) or (isinstance(t.arg, DLam) and a not in ("tt", "ff")):
        a = f"({a})"
    return f"{f} {a}"


# ---------------------------------------------------------------------------
# reduction


def _is_bool(t: DTerm) -> Optional[bool]:
    k = dkey(t)
    if k == dkey(TT):
        return True
    if k == dkey(FF):
        return False
    return None


def dstep(t: DTerm) -> Optional[DTerm]:
    """One weak call-by-value step, argument first; ``None`` if normal.

    Selecting a branch of an encoded boolean applied to two normal
    arguments counts as one step.
    """
    if isinstance(t, (DVar, Star)):
        return None
    if isinstance(t, DLam):
        if not t.pair:
            return None
        body = t.body
        if isinstance(body, DApp) and isinstance(body.fun, DApp):
            left, right = body.fun.arg, body.arg
            r = dstep(left)
            if r is not None:
                return DLam(t.var, DApp(DApp(body.fun.fun, r), right), "pair")
            r = dstep(right)
            if r is not None:
                return DLam(t.var, DApp(body.fun, r), "pair")
        return None
    assert isinstance(t, DApp)
    r = dstep(t.arg)
    if r is not None:
        return DApp(t.fun, r)
    f = t.fun
    if isinstance(f, DApp):
        b = _is_bool(f.fun)
        if b is not None and dstep(f.arg) is None:
            return f.arg if b else t.arg
    r = dstep(f)
    if r is not None:
        return DApp(r, t.arg)
    if isinstance(f, DLam):
        return dsubst(f.body, f.var, t.arg)
    return None


@dataclass(frozen=True)
class DlalTermSet:
    """Finite set of terms deduplicated up to alpha-equivalence, in first-seen order."""

    members: tuple[DTerm, ...]

    @staticmethod
    def of(terms: Iterable[DTerm]) -> "DlalTermSet":
        seen: dict[tuple, DTerm] = {}
        for t in terms:
            seen.setdefault(dkey(t), t)
        return DlalTermSet(tuple(seen.values()))

    def keys(self) -> frozenset[tuple]:
        return frozenset(dkey(t) for t in self.members)

    def __iter__(self) -> Iterator[DTerm]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DlalTermSet):
            return NotImplemented
        return self.keys() == other.keys()

    def __hash__(self) -> int:
        return hash(self.keys())

    @property
    def size(self) -> int:
        return max((dsize(t) for t in self.members), default=0)

    def subset_star(self, other: "DlalTermSet") -> bool:
        """Inclusion up to the inert constant."""
        ok = other.keys() | {dkey(STAR)}
        return self.keys() <= ok

    def eq_star(self, other: "DlalTermSet") -> bool:
        return self.subset_star(other) and other.subset_star(self)

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(show(t) for t in self.members)) + "}"


def dlal_step_all(s: DlalTermSet) -> DlalTermSet:
    """Reduce every reducible member once; keep normal members."""
    out = []
    for t in s:
        r = dstep(t)
        out.append(t if r is None else r)
    return DlalTermSet.of(out)


def is_normal_set(s: DlalTermSet) -> bool:
    return all(dstep(t) is None for t in s)


@dataclass
class SetTrace:
    sets: list[DlalTermSet]
    normal: bool

    @property
    def steps(self) -> int:
        return len(self.sets) - 1

    def lines(self) -> list[str]:
        return [f"#{i} {s}" for i, s in enumerate(self.sets)]


def normalize_set(s: DlalTermSet, budget: int = 100_000) -> SetTrace:
    sets = [s]
    cur = s
    for _ in range(budget):
        if is_normal_set(cur):
            return SetTrace(sets, True)
        cur = dlal_step_all(cur)
        sets.append(cur)
    return SetTrace(sets, is_normal_set(cur))


# ---------------------------------------------------------------------------
# types


class DType:
    __slots__ = ()

    def __str__(self) -> str:
        return show_dtype(self)


@dataclass(frozen=True)
class DTVar(DType):
    name: str


@dataclass(frozen=True)
class DLin(DType):
    dom: DType
    cod: DType


@dataclass(frozen=True)
class DImp(DType):
    dom: DType
    cod: DType


@dataclass(frozen=True)
class DPar(DType):
    body: DType


@dataclass(frozen=True)
class DForall(DType):
    var: str
    body: DType


def _dtype_free(t: DType) -> frozenset[str]:
    if isinstance(t, DTVar):
        return frozenset({t.name})
    if isinstance(t, (DLin, DImp)):
        return _dtype_free(t.dom) | _dtype_free(t.cod)
    if isinstance(t, DPar):
        return _dtype_free(t.body)
    if isinstance(t, DForall):
        return _dtype_free(t.body) - {t.var}
    raise TypeError(t)


def dtype_key(t: DType, env: tuple[str, ...] = ()) -> tuple:
    if isinstance(t, DTVar):
        for i, n in enumerate(reversed(env)):
            if n == t.name:
                return ("b", i)
        return ("v", t.name)
    if isinstance(t, DLin):
        return ("-o", dtype_key(t.dom, env), dtype_key(t.cod, env))
    if isinstance(t, DImp):
        return ("=>", dtype_key(t.dom, env), dtype_key(t.cod, env))
    if isinstance(t, DPar):
        return ("$", dtype_key(t.body, env))
    return ("A", dtype_key(t.body, env + (t.var,)))


def dtype_eq(a: DType, b: DType) -> bool:
    return dtype_key(a) == dtype_key(b)


def _bound(avoid: frozenset[str]) -> str:
    name = "X"
    i = 0
    while name in avoid:
        i += 1
        name = f"X{i}"
    return name


def encode_type(a: Type) -> DType:
    """Erase sharps and encode booleans and products second-order."""
    if isinstance(a, TVar):
        return DTVar(a.name)
    if isinstance(a, Bool):
        return DForall("X", DLin(DTVar("X"), DLin(DTVar("X"), DTVar("X"))))
    if isinstance(a, Lin):
        return DLin(encode_type(a.dom), encode_type(a.cod))
    if isinstance(a, Imp):
        return DImp(encode_type(a.dom), encode_type(a.cod))
    if isinstance(a, Prod):
        l, r = encode_type(a.left), encode_type(a.right)
        x = _bound(_dtype_free(l) | _dtype_free(r))
        return DForall(x, DLin(DLin(l, DLin(r, DTVar(x))), DTVar(x)))
    if isinstance(a, Sharp):
        return encode_type(a.body)
    if isinstance(a, Par):
        return DPar(encode_type(a.body))
    if isinstance(a, Forall):
        return DForall(a.var, encode_type(a.body))
    raise TypeError(a)


def show_dtype(t: DType) -> str:
    if isinstance(t, DTVar):
        return t.name
    if isinstance(t, DLin):
        return f"{_datom(t.dom)} -o {show_dtype(t.cod)}"
    if isinstance(t, DImp):
        return f"{_datom(t.dom)} => {show_dtype(t.cod)}"
    if isinstance(t, DPar):
        return f"${_datom(t.body)}"
    return f"forall {t.var}. {show_dtype(t.body)}"


def _datom(t: DType) -> str:
    if isinstance(t, (DTVar, DPar)):
        return show_dtype(t)
    return f"({show_dtype(t)})"


# ---------------------------------------------------------------------------
# the translation


class EtaUndefined(ValueError):
    """Duplication count requested for an open non-value head."""


@dataclass
class Translator:
    """Term translation with duplication counts resolved at application sites.

    ``env`` maps a bound variable to the source term it will be replaced by,
    recorded when a translated abstraction sits at the head of an
    application spine.
    """

    strict: bool = True
    budget: Optional[int] = None
    warnings: list[str] = field(default_factory=list)
    _eta_memo: dict = field(default_factory=dict)

    # duplication counts ---------------------------------------------------
    def resolve(self, t: Term, env: dict[str, Term]) -> Term:
        fv = [v for v in free_vars(t) if v in env]
        if not fv:
            return t
        return subst(t, {v: env[v] for v in fv})

    def eta(self, t: "Term | Sup", env: Optional[dict[str, Term]] = None) -> int:
        env = env or {}
        if isinstance(t, Sup):
            return max((self.eta(u, env) for _, u in expand(t)), default=1)
        if isinstance(t, Lam):
            return max(1, occurrences(t.body, t.var))
        if isinstance(t, Var):
            bound = env.get(t.name)
            if bound is None or isinstance(bound, Var) and bound.name == t.name:
                return 1
            return self.eta(bound, env)
        if isinstance(t, (Ket0, Ket1, Pair)):
            return 1
        closed = self.resolve(t, env)
        if not is_closed(closed):
            msg = f"duplication count of open non-value {pretty(t)}"
            if self.strict:
                raise EtaUndefined(msg)
            self.warnings.append(msg + "; using 1")
            return 1
        from .syntax import key

        k = key(as_sup(closed))
        hit = self._eta_memo.get(k)
        if hit is not None:
            return hit
        try:
            v = evaluate(closed, self.budget).value
        except EvalError as exc:
            raise EtaUndefined(f"head {pretty(t)} does not normalize: {exc}") from exc
        n = max((self.eta(u, {}) for _, u in v if isinstance(u, Lam)), default=1)
        self._eta_memo[k] = n
        return n

    # translation ------------------------------------------------------------
    def sup(self, s: Sup, env: dict[str, Term], pending: tuple[Term, ...] = ()) -> list[DTerm]:
        if isinstance(s, Zero):
            return [STAR]
        if isinstance(s, Single):
            return self.term(s.term, env, pending)
        if isinstance(s, Scaled):
            if s.amp.is_zero():
                return [STAR]
            return self.sup(s.body, env, pending)
        if isinstance(s, Sum):
            return _uniq(self.sup(s.left, env, pending) + self.sup(s.right, env, pending))
        raise TypeError(s)

    def term(self, t: Term, env: dict[str, Term], pending: tuple[Term, ...] = ()) -> list[DTerm]:
        if isinstance(t, Var):
            return [DVar(t.name)]
        if isinstance(t, Ket0):
            return [TT]
        if isinstance(t, Ket1):
            return [FF]
        if isinstance(t, Pair):
            ls, rs = self.term(t.left, env), self.term(t.right, env)
            x = _fresh_name("p", frozenset().union(*(dfree(u) for u in ls + rs)))
            return [DLam(x, DApp(DApp(DVar(x), l), r), "pair") for l in ls for r in rs]
        if isinstance(t, LetPair):
            scr = self.term(t.scrut, env)
            inner = {k: v for k, v in env.items() if k not in (t.x, t.y)}
            body = self.sup(t.body, inner)
            return [DApp(s, DLam(t.x, DLam(t.y, b))) for s in scr for b in body]
        if isinstance(t, If):
            names = sorted(free_vars(t.then) | free_vars(t.els))
            guard = self.term(t.cond, env)
            th, el = self.sup(t.then, env), self.sup(t.els, env)
            out = []
            for g in guard:
                for a in th:
                    for b in el:
                        r = DApp(DApp(g, _lams(names, a, "if")), _lams(names, b, "if"))
                        for n in names:
                            r = DApp(r, DVar(n))
                        out.append(r)
            return out
        if isinstance(t, Lam):
            k = self.eta(t, env)
            copies, body = _linearize(t.var, t.body, k)
            inner = {kk: vv for kk, vv in env.items() if kk != t.var}
            rest = pending
            if pending:
                bound = self.resolve(pending[0], env)
                for c in copies:
                    inner[c] = bound
                rest = pending[1:]
            bodies = self.sup(body, inner, rest)
            return [_lams(copies, b) for b in bodies]
        if isinstance(t, App):
            n = self.eta(t.fun, env)
            funs = self.term(t.fun, env, (t.arg,) + pending)
            args = self.term(t.arg, env)
            out = funs
            for _ in range(n):
                out = [DApp(f, a) for f in out for a in args]
            return _uniq(out)
        raise TypeError(t)


def _lams(names: Sequence[str], body: DTerm, tag: str = "") -> DTerm:
    for n in reversed(names):
        body = DLam(n, body, tag)
    return body


def _uniq(ts: list[DTerm]) -> list[DTerm]:
    seen: dict[tuple, DTerm] = {}
    for t in ts:
        seen.setdefault(dkey(t), t)
    return list(seen.values())


def _linearize(x: str, body: Sup, k: int) -> tuple[list[str], Sup]:
    """Rename the occurrences of ``x`` in ``body`` to ``x_1 .. x_k`` left to right."""
    avoid = free_vars(body) | {x}
    names = []
    i = 1
    while len(names) < k:
        cand = f"{x}_{i}"
        if cand not in avoid:
            names.append(cand)
        i += 1
    counter = iter(names)
    return names, _rename_occurrences(body, x, counter)


def _rename_occurrences(n: Node, x: str, names: Iterator[str]) -> Node:
    if isinstance(n, Var):
        return Var(next(names)) if n.name == x else n
    if isinstance(n, (Ket0, Ket1, Zero)):
        return n
    if isinstance(n, Lam):
        if n.var == x:
            return n
        return Lam(n.var, _rename_occurrences(n.body, x, names), n.annot)
    if isinstance(n, LetPair):
        scrut = _rename_occurrences(n.scrut, x, names)
        if x in (n.x, n.y):
            return LetPair(n.x, n.y, scrut, n.body)
        return LetPair(n.x, n.y, scrut, _rename_occurrences(n.body, x, names))
    if isinstance(n, If):
        return If(*(_rename_occurrences(c, x, names) for c in (n.cond, n.then, n.els)))
    if isinstance(n, App):
        return App(_rename_occurrences(n.fun, x, names), _rename_occurrences(n.arg, x, names))
    if isinstance(n, Pair):
        return Pair(_rename_occurrences(n.left, x, names), _rename_occurrences(n.right, x, names))
    if isinstance(n, Single):
        return Single(_rename_occurrences(n.term, x, names))
    if isinstance(n, Scaled):
        return Scaled(n.amp, _rename_occurrences(n.body, x, names))
    if isinstance(n, Sum):
        return Sum(_rename_occurrences(n.left, x, names), _rename_occurrences(n.right, x, names))
    raise TypeError(n)


def eta(t: "Term | Sup", deriv=None, strict: bool = True) -> int:
    """Duplication count of a function position (the derivation is not needed)."""
    return Translator(strict=strict).eta(t)


def translate(s: "Sup | Term", deriv=None, strict: bool = True) -> DlalTermSet:
    """The set of DLAL terms of a superposition."""
    tr = Translator(strict=strict)
    return DlalTermSet.of(tr.sup(as_sup(s), {}))


# ---------------------------------------------------------------------------
# step domination


@dataclass(frozen=True)
class DominationRow:
    """Where source state ``step`` shows up in the set trace.

    ``least_n`` is the lane witness: each member of the initial set is
    followed along its own reduction, advancing to the first position at or
    after its previous one that lies in the state's translation, or stopping
    for good when there is none; every member of the translation must be
    reached by some lane, and ``least_n`` is the furthest lane position.  ``first_n`` is the largest first occurrence of a
    member anywhere in the set trace, and ``single_n`` the first set holding
    every member at once.
    """

    step: int
    least_n: Optional[int]
    first_n: Optional[int]
    single_n: Optional[int]
    members: int


@dataclass(frozen=True)
class DominationReport:
    punq_steps: int
    dlal_steps: int
    dlal_normal: bool
    rows: tuple[DominationRow, ...]

    @property
    def all_found(self) -> bool:
        return all(r.least_n is not None for r in self.rows)

    @property
    def nondecreasing(self) -> bool:
        ns = [r.least_n for r in self.rows]
        return None not in ns and all(a <= b for a, b in zip(ns, ns[1:]))

    @property
    def dominated(self) -> bool:
        return self.dlal_normal and self.punq_steps <= self.dlal_steps

    @property
    def ok(self) -> bool:
        return self.all_found and self.nondecreasing and self.dominated

    def lines(self) -> list[str]:
        out = [f"punq_steps {self.punq_steps}", f"dlal_steps {self.dlal_steps}"]
        for r in self.rows:
            out.append(f"r{r.step} -> S{r.least_n} (first {r.first_n}, single {r.single_n}, members {r.members})")
        out.append(f"all_found {self.all_found} nondecreasing {self.nondecreasing} dominated {self.dominated}")
        return out

    def to_dict(self) -> dict:
        return {
            "punq_steps": self.punq_steps,
            "dlal_steps": self.dlal_steps,
            "dlal_normal": self.dlal_normal,
            "rows": [dict(r.__dict__) for r in self.rows],
            "all_found": self.all_found,
            "nondecreasing": self.nondecreasing,
            "dominated": self.dominated,
        }


def administrative(t: DTerm) -> DTerm:
    """Contract the redexes of conditionals' context abstractions.

    The source language substitutes into both branches at once, while the
    translation defers that substitution until after the guard selects a
    branch.  Pushing ``g L1 L2 v`` to ``g (L1 v) (L2 v)`` and contracting
    lines the two traces up.
    """
    hit = t.__dict__.get("_adm")
    if hit is not None:
        return hit
    r = t
    if isinstance(t, DLam):
        b = administrative(t.body)
        if b is not t.body:
            r = DLam(t.var, b, t.tag)
    elif isinstance(t, DApp):
        f, a = administrative(t.fun), administrative(t.arg)
        if isinstance(f, DLam) and f.tag == "if":
            r = administrative(dsubst(f.body, f.var, a))
        elif isinstance(f, DApp) and isinstance(f.fun, DApp) and _is_if(f.arg) and _is_if(f.fun.arg):
            g, l1, l2 = f.fun.fun, f.fun.arg, f.arg
            r = DApp(DApp(g, administrative(DApp(l1, a))), administrative(DApp(l2, a)))
        elif f is not t.fun or a is not t.arg:
            r = DApp(f, a)
    object.__setattr__(t, "_adm", r)
    return r


def _lane(t: DTerm, limit: int) -> list[tuple]:
    """Administrative keys along the reduction of one member; the last one persists."""
    out = [dkey(administrative(t))]
    for _ in range(limit):
        t = dstep(t)
        if t is None:
            break
        out.append(dkey(administrative(t)))
    return out


def _advance(lane: list[tuple], start: int, keys: frozenset[tuple]) -> Optional[int]:
    for p in range(start, len(lane)):
        if lane[p] in keys:
            return p
    if start >= len(lane) and lane[-1] in keys:
        return start
    return None


def _is_if(t: DTerm) -> bool:
    return isinstance(t, DLam) and t.tag == "if"


def _admin_keys(s: DlalTermSet) -> frozenset[tuple]:
    return frozenset(dkey(administrative(t)) for t in s)


def step_domination_check(s: "Sup | Term", budget: Optional[int] = None, dlal_budget: int = 100_000) -> DominationReport:
    """Run both traces; locate each source state's translation in the set trace.

    Inclusion is tested up to the inert constant and modulo the redexes
    contracted by :func:`administrative`.
    """
    res = evaluate(s, budget)
    states = res.trace.states()
    trace = normalize_set(translate(states[0].to_sup()), dlal_budget)
    per_set = [_admin_keys(st) for st in trace.sets]
    where: dict[tuple, int] = {}
    for n, keys in enumerate(per_set):
        for k in keys:
            where.setdefault(k, n)
    lanes = [_lane(t, trace.steps) for t in trace.sets[0]]
    cursor = [0] * len(lanes)
    alive = [True] * len(lanes)
    star = dkey(STAR)
    rows = []
    for i, st in enumerate(states):
        keys = _admin_keys(translate(st.to_sup())) - {star}
        firsts = [where.get(k) for k in keys]
        first_n = None if None in firsts else max(firsts, default=0)
        covered: set[tuple] = set()
        for j, lane in enumerate(lanes):
            if alive[j]:
                nxt = _advance(lane, cursor[j], keys)
                if nxt is None:
                    alive[j] = False
                else:
                    cursor[j] = nxt
                    covered.add(lane[min(nxt, len(lane) - 1)])
        least = max(cursor) if keys <= covered else None
        single = next((n for n, ks in enumerate(per_set) if keys <= ks), None)
        rows.append(DominationRow(i, least, first_n, single, len(keys)))
    return DominationReport(res.steps, trace.steps, trace.normal, tuple(rows))
