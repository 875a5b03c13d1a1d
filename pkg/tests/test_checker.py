import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from punq import corpus
from punq.amplitude import Amplitude
from punq.checker import (
    Ctx,
    Empty,
    InvalidDerivation,
    Rejection,
    Times,
    UntypedBounded,
    accepts,
    check,
    check_program,
    ortho_empty,
    ortho_times,
    ortho_untyped_bounded,
    parse_mode,
    validate,
)
from punq.semantics import normal_form
from punq.superalg import is_unit, member
from punq.syntax import App, Ket0, Ket1, Pair, Scaled, Single, parse
from punq.types import parse_type

from strategies import STATES, gate_programs

T = parse_type
MODES = (Empty(), Times(), UntypedBounded(2))


def typed_defs():
    for name in corpus.names():
        prog = corpus.load(name)
        for d in prog.defs.values():
            if d.type is not None:
                yield name, d.name


TYPED = list(typed_defs())
# definitions that need the untyped orthogonality mode
UNTYPED_ONLY = {("phase_superposed", "Phase")}


class TestModes:
    @pytest.mark.parametrize(
        "text, mode",
        [("empty", Empty()), ("times", Times()), ("untyped", UntypedBounded(2)), ("untyped:3", UntypedBounded(3))],
    )
    def test_parse(self, text, mode):
        assert parse_mode(text) == mode

    @pytest.mark.parametrize("text", ["", "fast", "untyped:x", "untyped:0"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_mode(text)

    def test_str_round_trip(self):
        for m in MODES:
            assert parse_mode(str(m)) == m


class TestOrthogonality:
    def test_plus_minus(self):
        assert ortho_empty(parse("|+>"), parse("|->"))

    def test_equal_kets(self):
        assert not ortho_empty(parse("|0>"), parse("|0>"))

    def test_reduces_before_comparing(self):
        left = parse(r"isqrt2 * (\x. x) |0> + isqrt2 * |1>")
        assert ortho_empty(left, parse("isqrt2 * |0> - isqrt2 * |1>"))

    def test_times_controlled_not(self):
        nt = r"(\x. if x then |1> else |0>)"
        assert ortho_times(parse("(|0>, y)", allow_free=True), parse(f"(|1>, {nt} y)", allow_free=True))

    def test_times_needs_a_closed_component(self):
        assert not ortho_times(parse("(x, |0>)", allow_free=True), parse("(y, |0>)", allow_free=True))

    @given(st.sampled_from(STATES), st.sampled_from(STATES))
    def test_times_agrees_on_closed(self, a, b):
        assert ortho_times(parse(a), parse(b)) == ortho_empty(parse(a), parse(b))

    def test_untyped_pairs(self):
        s, t = parse("(|0>, y)", allow_free=True), parse("(|1>, z)", allow_free=True)
        assert ortho_untyped_bounded(s, t, T("#(B * B)"), 2)

    def test_untyped_counterexample(self):
        x = parse("x", allow_free=True)
        assert not ortho_untyped_bounded(x, x, T("#B"), 2)

    @given(st.sampled_from(STATES), st.sampled_from(STATES), st.integers(1, 3))
    def test_untyped_agrees_on_closed(self, a, b, depth):
        assert ortho_untyped_bounded(parse(a), parse(b), T("#B"), depth) == ortho_empty(parse(a), parse(b))


class TestExamples:
    def test_hadamard(self):
        d = check(parse(r"\x. if x then |+> else |->"), T("#B -o #B"))
        assert d.rules()[0] == "lin_i"
        assert "if_sharp" in d.rules()
        assert d.summary()["type"] == "#B -o #B"

    def test_duplication_through_intuitionistic_arrow(self):
        assert accepts(parse(r"\x. (x, x)"), T("B => $(#B * #B)"))

    def test_no_cloning(self):
        with pytest.raises(Rejection) as info:
            check(parse(r"\x. (x, x)"), T("#B -o #B * #B"))
        assert info.value.rule == "linearity"

    def test_no_deleting(self):
        with pytest.raises(Rejection) as info:
            check(parse(r"\x. |0>"), T("#B -o #B"))
        assert "not used" in info.value.reason

    def test_non_orthogonal_branches(self):
        with pytest.raises(Rejection) as info:
            check(parse(r"\x. if x then |0> else |0>"), T("#B -o #B"))
        assert info.value.rule == "if_sharp"

    def test_open_term_with_context(self):
        ctx = Ctx.make(lin={"y": T("#B")})
        assert accepts(parse("(|0>, y)", allow_free=True), T("#B * #B"), ctx=ctx)


class TestRejectionReport:
    def test_json_fields(self):
        with pytest.raises(Rejection) as info:
            check(parse(r"\x. (x, x)"), T("#B -o #B * #B"))
        report = json.loads(info.value.to_json())
        assert report["status"] == "rejected"
        assert set(report) >= {"goal", "position", "reason", "rule", "subterm"}
        assert report["goal"] == "#B * #B"

    def test_norm_residue(self):
        with pytest.raises(Rejection) as info:
            check(parse("|0> + |1>"), T("#B"))
        assert info.value.rule == "sharp_i"
        assert "norm" in info.value.reason

    def test_untyped_definition(self):
        prog = corpus.load("clone", extra="def bare = |0>;")
        with pytest.raises(Rejection):
            check_program(prog, Times(), "bare")


class TestNormSideCondition:
    @given(st.sampled_from(STATES))
    def test_unit_iff_accepted(self, src):
        s = parse(src)
        assert accepts(s, T("#B")) == is_unit(s)

    @given(st.sampled_from(STATES[:8]), st.sampled_from([Amplitude(2), Amplitude(0, 1), Amplitude(1, 0, 1)]))
    def test_perturbed_coefficient_rejected(self, src, k):
        assert not accepts(Scaled(k, parse(src)), T("#B"))


class TestCorpus:
    @pytest.mark.parametrize("name, definition", TYPED)
    def test_times(self, name, definition):
        prog = corpus.load(name)
        if (name, definition) in UNTYPED_ONLY:
            with pytest.raises(Rejection):
                check_program(prog, Times(), definition)
        else:
            validate(check_program(prog, Times(), definition), Times())

    def test_untyped_only_needs_untyped(self):
        prog = corpus.load("phase_superposed")
        assert not accepts(prog.defs["Phase"].body, prog.defs["Phase"].type, Empty(), prog.hints())
        validate(check_program(prog, UntypedBounded(2), "Phase"), UntypedBounded(2))

    @pytest.mark.parametrize("name, definition", TYPED)
    def test_fragment_inclusion(self, name, definition):
        prog = corpus.load(name)
        d = prog.defs[definition]
        verdicts = [accepts(d.body, d.type, m, prog.hints()) for m in MODES]
        assert verdicts == sorted(verdicts)

    def test_empty_is_strictly_smaller(self):
        prog = corpus.load("cnot")
        assert not accepts(prog.defs["CNOT"].body, prog.defs["CNOT"].type, Empty(), prog.hints())


class TestValidator:
    def test_tampered_derivation(self):
        d = check(parse(r"\x. if x then |+> else |->"), T("#B -o #B"))
        ket = next(n for n in d.walk() if n.rule == "ket0")
        object.__setattr__(ket, "rule", "ket1")
        with pytest.raises(InvalidDerivation):
            validate(d)


class TestRandomGates:
    @settings(max_examples=60)
    @given(gate_programs())
    def test_fragment_inclusion(self, prog):
        src, ty = prog
        verdicts = [accepts(parse(src), T(ty), m) for m in MODES]
        assert verdicts == sorted(verdicts)

    @settings(max_examples=40)
    @given(gate_programs())
    def test_accepted_derivations_replay(self, prog):
        src, ty = prog
        try:
            d = check(parse(src), T(ty), Times())
        except Rejection:
            return
        validate(d, Times())

    @settings(max_examples=40)
    @given(gate_programs(), st.data())
    def test_subject_reduction_on_basis_inputs(self, prog, data):
        src, ty = prog
        a = T(ty)
        if not accepts(parse(src), a, Times()):
            return
        term = parse(src).term
        bits = [Ket1() if data.draw(st.booleans()) else Ket0() for _ in range(2)]
        arg = bits[0] if ty == "#B -o #B" else Pair(*bits)
        out = normal_form(Single(App(term, arg)))
        assert member(out.to_sup(), a.cod)
        assert accepts(out.to_sup(), a.cod, Times())
