import pytest
from hypothesis import given

from punq import corpus
from punq.semantics import (
    BudgetExhausted,
    OpenTerm,
    Stuck,
    default_budget,
    distribute_sugar,
    evaluate,
    normal_form,
    step,
    top_rule,
)
from punq.superalg import canonicalize, equiv, is_unit
from punq.syntax import App, Ket0, Ket1, Pair, Single, is_value, parse, size

from strategies import closed_values

H = r"(\x. if x then |+> else |->)"


def run(src: str):
    return evaluate(parse(src))


class TestSugar:
    def test_superposed_guard(self):
        out = distribute_sugar("if", parse("isqrt2 * |0> + isqrt2 * |1>"), parse("|1>"), parse("|0>"))
        assert equiv(out, parse("isqrt2 * (if |0> then |1> else |0>) + isqrt2 * (if |1> then |1> else |0>)"))

    def test_pair_is_bilinear(self):
        out = distribute_sugar("pair", parse("1/2 * |0>"), parse("-1 * |1>"))
        assert equiv(out, parse("-1/2 * (|0>, |1>)"))

    def test_single_argument(self):
        out = distribute_sugar("app", parse(r"\x. x"), parse("1 * |1>"))
        assert equiv(out, parse(r"(\x. x) |1>"))

    def test_unknown_position(self):
        with pytest.raises(ValueError):
            distribute_sugar("lam", parse("|0>"))


class TestStep:
    def test_if0(self):
        nxt, rule = step(parse("if |0> then |1> else |0>"))
        assert equiv(nxt, parse("|1>")) and rule == "If0"

    def test_hadamard_on_superposition(self):
        nxt, _ = step(parse(H + " (isqrt2 * |0> + isqrt2 * |1>)"))
        expected = parse(
            "isqrt2 * (if |0> then |+> else |->) + isqrt2 * (if |1> then |+> else |->)"
        )
        assert equiv(nxt, expected)

    def test_beta(self):
        nxt, rule = step(parse(r"(\x. x) |1>"))
        assert equiv(nxt, parse("|1>")) and top_rule(rule) == "Abs"

    def test_value_does_not_step(self):
        assert step(parse("|+>")) is None

    def test_stuck(self):
        with pytest.raises(Stuck):
            step(parse(r"if (\x. x) then |0> else |1>"))

    def test_open(self):
        with pytest.raises(OpenTerm):
            step(parse("x |0>", allow_free=True))

    def test_zero_summand_not_reduced(self):
        assert step(parse(r"|0> + 0 * ((\x. x) |1>)")) is None


class TestEvaluate:
    def test_two_hadamards(self):
        res = evaluate(corpus.load("two_hadamards").main.body)
        assert res.steps == 6
        assert res.value == canonicalize(parse("|0>"))

    def test_bell(self):
        res = evaluate(corpus.load("bell").main.body)
        assert res.value == canonicalize(parse("isqrt2 * (|0>, |0>) + isqrt2 * (|1>, |1>)"))

    def test_value_takes_no_steps(self):
        assert run("|0>").steps == 0

    def test_budget(self):
        with pytest.raises(BudgetExhausted) as info:
            evaluate(corpus.load("two_hadamards").main.body, budget=3)
        assert info.value.trace.count == 3

    def test_default_budget(self):
        s = parse("|0>")
        assert default_budget(s) == 10 * size(s) ** 4 + 1000

    def test_trace_format(self):
        res = evaluate(corpus.load("two_hadamards").main.body)
        lines = res.trace.lines()
        assert len(lines) == 6
        assert lines[0].startswith("#1 [") and lines[-1] == "#6 [Sup{If0, If1}] |0>"

    def test_deterministic(self):
        src = corpus.load("grover").main.body
        assert evaluate(src).trace.dump() == evaluate(src).trace.dump()

    def test_grover_finds_marked(self):
        assert normal_form(corpus.load("grover").main.body) == canonicalize(Single(Pair(Ket1(), Ket1())))

    def test_interference(self):
        assert run(H + " |+>").value == canonicalize(parse("|0>"))


class TestProgress:
    """Normal forms are exactly the values."""

    @given(closed_values())
    def test_values_are_normal(self, v):
        assert step(v) is None

    @pytest.mark.parametrize("name", ["bell", "two_hadamards", "grover"])
    def test_trace_ends_in_value(self, name):
        res = evaluate(corpus.load(name).main.body)
        assert is_value(res.value.to_sup())
        for st in res.trace.states()[:-1]:
            assert step(st) is not None


class TestNormPreservation:
    @pytest.mark.parametrize("name", ["bell", "two_hadamards", "grover", "xbasis"])
    def test_unit_along_trace(self, name):
        res = evaluate(corpus.load(name).main.body)
        for st in res.trace.states():
            if st.is_value():
                assert is_unit(st)

    def test_gate_on_basis_inputs(self):
        prog = corpus.load("telep")
        gate = prog.defs["telep"].body.term
        for bits in [(0, 0, 1), (1, 1, 0)]:
            kets = [Ket1() if b else Ket0() for b in bits]
            inp = Pair(kets[0], Pair(kets[1], kets[2]))
            out = normal_form(Single(App(gate, inp)))
            assert is_unit(out)
