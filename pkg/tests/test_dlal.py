import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from punq import corpus
from punq.amplitude import HALF, ONE, ZERO
from punq.dlal import (
    FF,
    STAR,
    TT,
    DApp,
    DForall,
    DLam,
    DLin,
    DlalTermSet,
    DPar,
    DTVar,
    DVar,
    EtaUndefined,
    administrative,
    dkey,
    dlal_step_all,
    dstep,
    dsubst,
    dtype_eq,
    encode_type,
    eta,
    is_normal_set,
    normalize_set,
    show,
    show_dtype,
    step_domination_check,
    translate,
)
from punq.semantics import EvalError
from punq.syntax import Scaled, Sum, Zero, free_vars, parse, parse_term, size, subst_sup
from punq.types import bang, ground_types, parse_type, subtype

from conftest import amplitudes, types
from strategies import closed_values, sups

T = parse_type
BOOL = DForall("X", DLin(DTVar("X"), DLin(DTVar("X"), DTVar("X"))))
H = r"(\x. if x then |+> else |->)"


def tr(src: str, **kw) -> DlalTermSet:
    return translate(parse(src, **kw))


def admin(s: DlalTermSet) -> DlalTermSet:
    return DlalTermSet.of(administrative(t) for t in s)


def subst_set(s: DlalTermSet, x: str, vs: DlalTermSet) -> DlalTermSet:
    return DlalTermSet.of(dsubst(t, x, v) for t in s for v in vs)


class TestTerms:
    def test_booleans_print(self):
        assert show(TT) == "tt" and show(FF) == "ff"

    def test_alpha_keys(self):
        assert dkey(DLam("a", DVar("a"))) == dkey(DLam("b", DVar("b")))

    def test_substitution_avoids_capture(self):
        t = DLam("y", DApp(DVar("x"), DVar("y")))
        out = dsubst(t, "x", DVar("y"))
        assert dkey(out) != dkey(DLam("y", DApp(DVar("y"), DVar("y"))))

    def test_star_is_inert(self):
        assert dstep(STAR) is None
        assert dstep(DApp(STAR, TT)) is None

    def test_beta(self):
        assert dstep(DApp(DLam("x", DVar("x")), TT)) == TT

    def test_selection_is_one_step(self):
        assert dstep(DApp(DApp(TT, FF), TT)) == FF

    def test_weak(self):
        assert dstep(DLam("z", DApp(DLam("x", DVar("x")), TT))) is None


class TestTypeEncoding:
    def test_qubit(self):
        assert dtype_eq(encode_type(T("#B")), BOOL)

    def test_paragraph(self):
        assert dtype_eq(encode_type(T("$#B")), DPar(BOOL))
        assert show_dtype(encode_type(T("$#B"))) == "$(forall X. X -o X -o X)"

    def test_product(self):
        expected = DForall("Z", DLin(DLin(BOOL, DLin(BOOL, DTVar("Z"))), DTVar("Z")))
        assert dtype_eq(encode_type(T("B * #B")), expected)

    def test_product_binder_fresh(self):
        out = encode_type(T("forall X. X * B"))
        assert isinstance(out, DForall) and isinstance(out.body, DForall)
        assert out.body.var != "X"

    @given(types)
    def test_bang_is_invisible(self, a):
        assert dtype_eq(encode_type(bang(a)), encode_type(a))

    @given(st.sampled_from(ground_types(4)), st.sampled_from(ground_types(4)))
    def test_subtyping_is_invisible(self, a, b):
        if subtype(a, b):
            assert dtype_eq(encode_type(a), encode_type(b))

    def test_subtyping_on_arrows(self):
        a, b = T("#B -o B"), T("B -o #B")
        assert subtype(a, b)
        assert dtype_eq(encode_type(a), encode_type(b))


class TestEta:
    def test_identity(self):
        assert eta(parse_term(r"\x. x")) == 1

    def test_evaluated_head(self):
        assert eta(parse_term(r"(\x. x) (\f. \y. f (f y))")) == 2

    def test_pair_of_hadamards(self):
        assert eta(parse_term(rf"\z. let (x, y) = z in ({H} x, {H} y)")) == 1

    def test_unused_binder_counts_once(self):
        assert eta(parse_term(r"\x. |0>")) == 1

    def test_open_head(self):
        with pytest.raises(EtaUndefined):
            eta(parse_term("f |0>", allow_free=True))

    def test_open_head_lenient(self):
        assert eta(parse_term("f |0>", allow_free=True), strict=False) == 1

    def test_free_variable_counts_once(self):
        assert eta(parse_term("f", allow_free=True)) == 1


class TestTranslate:
    def test_ket0(self):
        assert tr("|0>") == DlalTermSet.of([TT])

    def test_hadamard_has_four_terms(self):
        assert len(tr(H)) == 4

    def test_zero_scaling(self):
        assert tr("1/2 * |1> + 0 * |0>") == DlalTermSet.of([FF, STAR])

    def test_zero_vector(self):
        assert tr("0vec") == DlalTermSet.of([STAR])

    def test_sum_is_union(self):
        assert tr("|+>") == DlalTermSet.of([TT, FF])

    def test_church_duplication(self):
        two = tr(r"\f. \x. f (f x)")
        assert len(two) == 1
        lam = next(iter(two))
        assert isinstance(lam, DLam) and isinstance(lam.body, DLam) and isinstance(lam.body.body, DLam)

    def test_values_do_not_reduce(self):
        for src in ["|0>", "(|0>, |1>)", H, "isqrt2 * (|0>, |0>) + isqrt2 * (|1>, |1>)"]:
            s = tr(src)
            assert is_normal_set(s) and dlal_step_all(s) == s

    def test_star_set(self):
        s = DlalTermSet.of([STAR])
        assert dlal_step_all(s) == s

    def test_subset_up_to_star(self):
        assert DlalTermSet.of([TT, STAR]).subset_star(DlalTermSet.of([TT]))
        assert not DlalTermSet.of([FF]).subset_star(DlalTermSet.of([TT]))


class TestTwoHadamards:
    def test_set_trace(self):
        s0 = translate(corpus.load("two_hadamards").main.body)
        trace = normalize_set(s0)
        assert trace.normal and trace.steps == 7
        assert trace.sets[-1] == DlalTermSet.of([TT, FF])
        assert trace.lines()[-1] == "#7 {ff, tt}"

    def test_domination(self):
        report = step_domination_check(corpus.load("two_hadamards").main.body)
        assert (report.punq_steps, report.dlal_steps) == (6, 7)
        assert report.ok
        assert [r.least_n for r in report.rows] == [0, 2, 3, 4, 5, 6, 7]

    def test_value_is_trivially_dominated(self):
        report = step_domination_check(parse("|+>"))
        assert (report.punq_steps, report.dlal_steps) == (0, 0)
        assert report.ok


class TestWalkDomination:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_dominated(self, n):
        report = step_domination_check(corpus.applied("walk", n))
        assert report.ok, "\n".join(report.lines())
        assert report.punq_steps <= report.dlal_steps

    def test_report_dict(self):
        d = step_domination_check(corpus.applied("walk", 1)).to_dict()
        assert d["all_found"] and d["nondecreasing"] and d["dominated"]
        assert len(d["rows"]) == d["punq_steps"] + 1


class TestSizeBound:
    def test_walk_translation_grows_polynomially(self):
        sizes = {n: translate(corpus.applied("walk", n)).size for n in (1, 2, 4)}
        assert sizes[2] / sizes[1] <= 9 and sizes[4] / sizes[2] <= 9

    @pytest.mark.parametrize("name", ["bell", "two_hadamards", "grover", "xbasis"])
    def test_corpus_within_cubic(self, name):
        s = corpus.load(name).main.body
        assert translate(s).size <= 10 * size(s) ** 3


class TestEquivalence:
    """Equivalent superpositions translate to the same set up to the inert constant."""

    def _same(self, a, b):
        try:
            return translate(a).eq_star(translate(b))
        except (EtaUndefined, EvalError):
            assume(False)

    @given(sups, sups)
    def test_commutativity(self, a, b):
        assert self._same(Sum(a, b), Sum(b, a))

    @given(sups, sups, sups)
    def test_associativity(self, a, b, c):
        assert self._same(Sum(Sum(a, b), c), Sum(a, Sum(b, c)))

    @given(sups)
    def test_zero_unit(self, a):
        assert self._same(Sum(Zero(), a), a)

    @given(sups)
    def test_scalars(self, a):
        assert self._same(Scaled(ZERO, a), Zero())
        assert self._same(Scaled(ONE, a), a)

    @given(amplitudes(nonzero=True), amplitudes(nonzero=True), sups)
    def test_scalar_composition(self, x, y, a):
        assert self._same(Scaled(x, Scaled(y, a)), Scaled(x * y, a))

    @given(amplitudes(nonzero=True), amplitudes(nonzero=True), sups)
    def test_scalar_sum(self, x, y, a):
        assume(not (x + y).is_zero())
        assert self._same(Sum(Scaled(x, a), Scaled(y, a)), Scaled(x + y, a))

    def test_cancelling_scalars_leave_a_residue(self):
        a = parse("|0>")
        lhs = translate(Sum(Scaled(HALF, a), Scaled(-HALF, a)))
        assert not lhs.eq_star(translate(Scaled(ZERO, a)))

    @given(amplitudes(), sups, sups)
    def test_distributivity(self, x, a, b):
        assert self._same(Scaled(x, Sum(a, b)), Sum(Scaled(x, a), Scaled(x, b)))


class TestSubstitution:
    """Translation commutes with substituting a closed value, after contracting
    the conditional context abstractions."""

    @settings(max_examples=300)
    @given(sups, closed_values())
    def test_random(self, s, v):
        assume(free_vars(s) <= {"x"})
        try:
            lhs = translate(subst_sup(s, "x", v))
            rhs = subst_set(translate(s), "x", translate(v))
        except (EtaUndefined, EvalError):
            assume(False)
        assert admin(lhs) == admin(rhs)

    @pytest.mark.parametrize("src", ["if x then |0> else |1>", f"{H} x", f"if x then ({H} |0>, |1>) else (|1>, |0>)"])
    @pytest.mark.parametrize("v", ["|0>", "|1>", "|+>"])
    def test_examples(self, src, v):
        s, vv = parse(src, allow_free=True), parse(v)
        assert admin(translate(subst_sup(s, "x", vv))) == admin(subst_set(translate(s), "x", translate(vv)))
