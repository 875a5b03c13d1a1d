"""Matrices of qubit maps: extraction, classification, synthesis and probes.

Basis states are right-nested pairs in big-endian order: index ``i`` over
``n`` qubits is ``(|i1>, (|i2>, ...))`` with ``i1`` the most significant bit.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .amplitude import I, ISQRT2, MINUS_ONE, ONE, ZERO, Amplitude, RealAlg
from .checker import Rejection, UntypedBounded, accepts, check
from .semantics import evaluate
from .superalg import CanonicalForm, canonicalize, sqrt_real
from .syntax import (
    KET0,
    KET1,
    If,
    Lam,
    LetPair,
    Pair,
    Scaled,
    Single,
    Sup,
    Sum,
    Term,
    Var,
    as_sup,
    basis_term,
    expand,
    from_terms,
    key,
    ket_minus,
    ket_plus,
    pretty,
    sugar_app,
)
from .types import B, Bool, Lin, Par, Prod, Sharp, Type, bits, show_type, subtype


class MatrixError(ValueError):
    pass


@dataclass(frozen=True)
class QMatrix:
    """Dense row-major matrix over Q(sqrt2, i)."""

    rows: int
    cols: int
    entries: tuple[tuple[Amplitude, ...], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise MatrixError("entry shape does not match dimensions")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[object]]) -> "QMatrix":
        conv = tuple(tuple(x if isinstance(x, Amplitude) else Amplitude.of(x) for x in r) for r in rows)
        return QMatrix(len(conv), len(conv[0]) if conv else 0, conv)

    @staticmethod
    def from_columns(cols: Sequence[Sequence[Amplitude]]) -> "QMatrix":
        return QMatrix.from_rows([list(r) for r in zip(*cols)])

    @staticmethod
    def identity(dim: int) -> "QMatrix":
        return QMatrix.from_rows([[ONE if i == j else ZERO for j in range(dim)] for i in range(dim)])

    def __getitem__(self, ij: tuple[int, int]) -> Amplitude:
        return self.entries[ij[0]][ij[1]]

    def column(self, j: int) -> tuple[Amplitude, ...]:
        return tuple(r[j] for r in self.entries)

    def dagger(self) -> "QMatrix":
        return QMatrix.from_rows([[self.entries[i][j].conj() for i in range(self.rows)] for j in range(self.cols)])

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise MatrixError("dimension mismatch in product")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = ZERO
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if not a.is_zero():
                        acc = acc + a * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return QMatrix.from_rows(out)

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise MatrixError("dimension mismatch in sum")
        return QMatrix.from_rows([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def scale(self, c: Amplitude) -> "QMatrix":
        return QMatrix.from_rows([[c * x for x in r] for r in self.entries])

    def apply(self, vec: Sequence[Amplitude]) -> list[Amplitude]:
        if len(vec) != self.cols:
            raise MatrixError("vector length does not match")
        out = []
        for r in self.entries:
            acc = ZERO
            for a, v in zip(r, vec):
                acc = acc + a * v
            out.append(acc)
        return out

    def kron(self, other: "QMatrix") -> "QMatrix":
        return QMatrix.from_rows(
            [
                [self.entries[i][j] * other.entries[k][l] for j in range(self.cols) for l in range(other.cols)]
                for i in range(self.rows)
                for k in range(other.rows)
            ]
        )

    @property
    def qubits(self) -> tuple[int, int]:
        return _log2(self.cols), _log2(self.rows)

    # JSON wire format
    def to_json_obj(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[[_rat(c) for c in x.components()] for x in r] for r in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @staticmethod
    def from_json_obj(obj: dict) -> "QMatrix":
        try:
            rows, cols = int(obj["rows"]), int(obj["cols"])
            flat = obj["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MatrixError(f"malformed matrix JSON: {exc}") from exc
        if flat and isinstance(flat[0], list) and flat[0] and isinstance(flat[0][0], list):
            flat = [x for r in flat for x in r]
        if len(flat) != rows * cols:
            raise MatrixError("entry count does not match dimensions")
        amps = [Amplitude(*(Fraction(str(c)) for c in x)) for x in flat]
        return QMatrix(rows, cols, tuple(tuple(amps[i * cols:(i + 1) * cols]) for i in range(rows)))

    @staticmethod
    def from_json(text: str) -> "QMatrix":
        return QMatrix.from_json_obj(json.loads(text))

    def __str__(self) -> str:
        return "\n".join("  ".join(str(x) for x in r) for r in self.entries)


def _rat(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _log2(d: int) -> int:
    if d <= 0 or d & (d - 1):
        raise MatrixError(f"dimension {d} is not a power of two")
    return d.bit_length() - 1


# ---------------------------------------------------------------------------
# extraction


def vector_of(v: "Sup | CanonicalForm", k: int) -> list[Amplitude]:
    """Coordinates of a closed value over the ``k``-qubit basis."""
    index = {key(basis_term(j, k)): j for j in range(2 ** k)}
    out = [ZERO] * (2 ** k)
    for a, t in canonicalize(v):
        j = index.get(key(t))
        if j is None:
            raise MatrixError(f"{pretty(t)} is not a {k}-qubit basis state")
        out[j] = out[j] + a
    return out


def vector_sup(vec: Sequence[Amplitude], n: int) -> Sup:
    return from_terms([(a, basis_term(j, n)) for j, a in enumerate(vec) if not a.is_zero()])


def apply_term(t: "Sup | Term", inp: "Sup | Term", budget: Optional[int] = None) -> CanonicalForm:
    return evaluate(sugar_app(t, inp), budget).value


def extract_matrix(t: "Sup | Term", n: int, k: int, budget: Optional[int] = None) -> QMatrix:
    """Column ``i`` is the value of ``t |i>``."""
    cols = []
    for i in range(2 ** n):
        v = apply_term(t, basis_term(i, n), budget)
        cols.append(vector_of(v, k))
    return QMatrix.from_columns(cols)


# ---------------------------------------------------------------------------
# classification


def is_isometry(m: QMatrix) -> bool:
    return m.dagger() @ m == QMatrix.identity(m.cols)


def classify(m: QMatrix) -> str:
    """``unitary``, ``strict-isometry`` or ``neither``, by exact Gram matrix."""
    if not is_isometry(m):
        return "neither"
    return "unitary" if m.rows == m.cols else "strict-isometry"


# ---------------------------------------------------------------------------
# synthesis


def synthesize(m: QMatrix, n: Optional[int] = None, k: Optional[int] = None) -> Sup:
    """A closed abstraction whose matrix is ``m``.

    The input is destructured by right-nested lets into bits ``b1..bn``;
    a conditional tree on those bits (then-branch for bit 0) selects the
    column superposition.
    """
    qn, qk = m.qubits
    n = qn if n is None else n
    k = qk if k is None else k
    if (n, k) != (qn, qk):
        raise MatrixError("declared qubit counts do not match the matrix")
    if n < 1 or k < n:
        raise MatrixError("synthesis needs k >= n >= 1")
    if classify(m) == "neither":
        raise MatrixError("matrix is not an isometry")
    names = ["x"] if n == 1 else [f"b{j + 1}" for j in range(n)]

    def tree(depth: int, prefix: int) -> Sup:
        if depth == n:
            return vector_sup(m.column(prefix), k)
        g = Var(names[depth])
        return Single(If(g, tree(depth + 1, prefix * 2), tree(depth + 1, prefix * 2 + 1)))

    body: Sup = tree(0, 0)
    if n == 1:
        return Single(Lam("x", body))
    rests = [f"r{j + 1}" for j in range(n - 2)]
    for j in reversed(range(n - 1)):
        scrut = Var("x") if j == 0 else Var(rests[j - 1])
        second = names[-1] if j == n - 2 else rests[j]
        body = Single(LetPair(names[j], second, scrut, body))
    return Single(Lam("x", body))


# ---------------------------------------------------------------------------
# randomized representation oracle


def _random_unit(dim: int, rng: random.Random) -> Optional[list[Amplitude]]:
    coeffs = [Amplitude(rng.randint(-2, 2), 0, rng.randint(-2, 2), 0) for _ in range(dim)]
    total = RealAlg()
    for c in coeffs:
        total = total + c.norm_sq()
    if total.is_zero():
        return None
    root = sqrt_real(total)
    if root is None:
        return None
    inv = Amplitude.from_parts(root.inverse(), RealAlg())
    return [c * inv for c in coeffs]


def random_unit_vector(dim: int, rng: random.Random) -> list[Amplitude]:
    """Small-integer Gaussian vector normalized exactly inside the field."""
    while True:
        v = _random_unit(dim, rng)
        if v is not None:
            return v


def represents_check(t: "Sup | Term", m: QMatrix, trials: int = 8, seed: int = 0, budget: Optional[int] = None) -> bool:
    """Compare ``t`` with ``m`` on all basis states and ``trials`` random unit vectors."""
    n, k = m.qubits
    rng = random.Random(seed)
    inputs = [[ONE if j == i else ZERO for j in range(2 ** n)] for i in range(2 ** n)]
    inputs += [random_unit_vector(2 ** n, rng) for _ in range(trials)]
    for vec in inputs:
        try:
            got = vector_of(apply_term(t, vector_sup(vec, n), budget), k)
        except (MatrixError, Exception):
            return False
        if got != m.apply(vec):
            return False
    return True


# ---------------------------------------------------------------------------
# gate library (matrices used as independent oracles)


def _r(*rows) -> QMatrix:
    return QMatrix.from_rows(rows)


H_MATRIX = _r([ISQRT2, ISQRT2], [ISQRT2, -ISQRT2])
Z_MATRIX = _r([1, 0], [0, -1])
X_MATRIX = _r([0, 1], [1, 0])
I2 = QMatrix.identity(2)
CNOT_MATRIX = _r([1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0])
SWAP_MATRIX = _r([1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1])
PHASES = (ONE, I, MINUS_ONE, -I)


def permutation_matrix(perm: Sequence[int]) -> QMatrix:
    d = len(perm)
    return QMatrix.from_rows([[ONE if perm[j] == i else ZERO for j in range(d)] for i in range(d)])


def random_clifford_like(qubits: int, rng: random.Random, length: int = 6) -> QMatrix:
    """Product of H, Z, CNOT and permutations, times a global phase in {1, i, -1, -i}."""
    if qubits not in (1, 2):
        raise ValueError("random gates are generated on one or two qubits")
    dim = 2 ** qubits
    m = QMatrix.identity(dim)
    for _ in range(length):
        choice = rng.randrange(4 if qubits > 1 else 3)
        if choice == 0:
            g = H_MATRIX
        elif choice == 1:
            g = Z_MATRIX
        elif choice == 2:
            perm = list(range(dim))
            rng.shuffle(perm)
            m = permutation_matrix(perm) @ m
            continue
        else:
            m = CNOT_MATRIX @ m
            continue
        if qubits == 1:
            m = g @ m
        else:
            wire = rng.randrange(2)
            full = g.kron(I2) if wire == 0 else I2.kron(g)
            m = full @ m
    return m.scale(rng.choice(PHASES))


# ---------------------------------------------------------------------------
# uninhabitation probes


@dataclass(frozen=True)
class ProbeCertificate:
    """What a bounded search examined and what it found."""

    target: str
    depth: int
    mode: str
    candidates: int
    pruned_skeletons: int
    accepted: tuple[str, ...]
    elapsed: float
    complete: bool

    @property
    def inhabited(self) -> bool:
        return bool(self.accepted)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "depth": self.depth,
            "mode": self.mode,
            "candidates": self.candidates,
            "pruned_skeletons": self.pruned_skeletons,
            "accepted": list(self.accepted),
            "elapsed_seconds": round(self.elapsed, 3),
            "complete": self.complete,
        }


_LEAF_KETS: tuple[Sup, ...] = (Single(KET0), Single(KET1), ket_plus(), ket_minus())


def _shape(t: Type) -> object:
    """Leaf shape of a ground type: ``'b'`` for a bit, or a pair of shapes."""
    while isinstance(t, (Sharp, Par)):
        t = t.body
    if isinstance(t, Bool):
        return "b"
    if isinstance(t, Prod):
        return (_shape(t.left), _shape(t.right))
    raise ValueError(f"not a ground type: {t}")


def _leaves(shape: object, avail: dict[str, object]) -> Iterator[tuple[Sup, frozenset[str]]]:
    """Leaf superpositions of a shape, with the variables they consume."""
    for v in sorted(avail):
        if avail[v] == shape:
            yield Single(Var(v)), frozenset({v})
    if shape == "b":
        for s in _LEAF_KETS:
            yield s, frozenset()
        return
    left, right = shape
    for ls, lu in _leaves(left, avail):
        rest = {v: t for v, t in avail.items() if v not in lu}
        for rs, ru in _leaves(right, rest):
            terms = [(a * b, Pair(x, y)) for a, x in expand(ls) for b, y in expand(rs)]
            yield from_terms(terms), lu | ru


@dataclass
class _Search:
    """Enumerates the synthesis grammar, skipping dead skeletons.

    A ``let`` or ``if`` node is skipped when no rule of the checker can
    conclude any of the current goals from it, whatever its children are.
    """

    pruned: int = 0

    def bodies(self, env: dict[str, Type], goals: tuple[Type, ...], depth: int) -> Iterator[Sup]:
        from .checker import sharp_candidates

        shape = _shape(goals[0])
        shapes = {v: _shape(t) for v, t in env.items()}
        for leaf, _used in _leaves(shape, shapes):
            yield leaf
            yield Scaled(MINUS_ONE, leaf)
        if depth <= 0:
            return
        quantum_goals = _dedupe([q for g in goals for q in sharp_candidates(g)])
        for v, ty in sorted(env.items(), key=lambda kv: kv[0]):
            core = ty
            while isinstance(core, Sharp) and isinstance(core.body, Sharp):
                core = core.body
            a, b = f"{v}l", f"{v}r"
            rest = {w: t for w, t in env.items() if w != v}
            if isinstance(core, Prod):
                inner, sub_goals = {**rest, a: core.left, b: core.right}, goals
            elif isinstance(core, Sharp) and isinstance(core.body, Prod):
                if not quantum_goals:
                    self.pruned += 1
                    continue
                inner = {**rest, a: Sharp(core.body.left), b: Sharp(core.body.right)}
                sub_goals = quantum_goals
            else:
                continue
            for body in self.bodies(inner, sub_goals, depth - 1):
                yield Single(LetPair(a, b, Var(v), body))
        for g, ty in sorted(env.items(), key=lambda kv: kv[0]):
            if shapes[g] != "b":
                continue
            branch_goals: list[Type] = []
            if subtype(ty, B):
                branch_goals += goals
            if subtype(ty, Sharp(B)):
                branch_goals += quantum_goals
            if not branch_goals:
                self.pruned += 1
                continue
            rest = {w: t for w, t in env.items() if w != g}
            branches = list(self.bodies(rest, tuple(_dedupe(branch_goals)), depth - 1))
            for t1, t2 in itertools.product(branches, repeat=2):
                yield Single(If(Var(g), t1, t2))


def _dedupe(types: list[Type]) -> list[Type]:
    out: list[Type] = []
    for t in types:
        if t not in out:
            out.append(t)
    return out


def probe_uninhabited(target: Type, depth: int = 3, mode=None, time_limit: float = 60.0) -> ProbeCertificate:
    """Search the synthesis grammar for inhabitants of a linear arrow between ground types.

    Every emitted candidate ``\\x. body`` is handed to the checker.
    """
    if not isinstance(target, Lin):
        raise ValueError("probe target must be a linear arrow")
    mode = mode if mode is not None else UntypedBounded(2)
    start = time.monotonic()
    count = 0
    found: list[str] = []
    complete = True
    search = _Search()
    for body in search.bodies({"x": target.dom}, (target.cod,), depth):
        if time.monotonic() - start > time_limit:
            complete = False
            break
        count += 1
        cand = Single(Lam("x", body))
        if accepts(cand, target, mode):
            found.append(pretty(cand))
    return ProbeCertificate(
        show_type(target), depth, str(mode), count, search.pruned, tuple(found), time.monotonic() - start, complete
    )


def shrink_target(n: int, k: int) -> Type:
    return Lin(Sharp(bits(n)), Sharp(bits(k)))


def separate_target(n: int, k: int) -> Type:
    return Lin(Sharp(bits(n + k)), Prod(Sharp(bits(n)), Sharp(bits(k))))
