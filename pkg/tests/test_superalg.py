from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from punq.amplitude import HALF, I, ISQRT2, ONE, ZERO, Amplitude, RealAlg
from punq.superalg import (
    CanonicalForm,
    NotAValue,
    add,
    canonicalize,
    coefficient,
    equiv,
    flat,
    inner_product,
    is_unit,
    member,
    norm_sq,
    scale,
)
from punq.syntax import Ket0, Ket1, Pair, Scaled, Single, Sum, Zero, parse
from punq.types import parse_type

from conftest import amplitudes
from strategies import closed_values, sups

PLUS = parse("|+>")
MINUS = parse("|->")


def sc(a, s):
    return Scaled(a, s)


class TestCanonicalForm:
    def test_zero_scaling(self):
        assert canonicalize(parse("0 * |0>")).terms == ()

    def test_halves_merge(self):
        cf = canonicalize(parse("1/2 * |0> + 1/2 * |0>"))
        assert cf.terms == ((ONE, Ket0()),)

    def test_zero_summand_dropped(self):
        cf = canonicalize(parse(r"|0> + 0 * ((\x. x) |1>)"))
        assert cf.terms == ((ONE, Ket0()),)

    def test_alpha_equivalent_summands_merge(self):
        cf = canonicalize(parse(r"1/2 * \x. x + 1/2 * \y. y"))
        assert len(cf) == 1

    def test_sorted_and_distinct(self):
        cf = canonicalize(parse("|1> + |0> + |1>"))
        assert [t for _, t in cf] == [Ket0(), Ket1()]
        assert cf.terms[1][0] == Amplitude.of(2)

    @given(sups)
    def test_idempotent(self, s):
        cf = canonicalize(s)
        assert canonicalize(cf.to_sup()) == cf

    @given(sups)
    def test_no_zero_amplitudes(self, s):
        assert all(not a.is_zero() for a, _ in canonicalize(s))


class TestEquivalence:
    def test_commutativity_example(self):
        assert equiv(parse("|0> + (|0>, |1>)"), parse("(|0>, |1>) + |0>"))

    def test_distributivity_example(self):
        assert equiv(parse("isqrt2 * (|0> + |1>)"), parse("isqrt2 * |0> + isqrt2 * |1>"))

    def test_distinct_kets(self):
        assert not equiv(parse("|0>"), parse("|1>"))


class TestAxioms:
    """The eight generating equations, on random superpositions."""

    @given(sups, sups)
    def test_commutativity(self, a, b):
        assert equiv(Sum(a, b), Sum(b, a))

    @given(sups, sups, sups)
    def test_associativity(self, a, b, c):
        assert equiv(Sum(Sum(a, b), c), Sum(a, Sum(b, c)))

    @given(sups)
    def test_zero_unit(self, a):
        assert equiv(Sum(Zero(), a), a)

    @given(sups)
    def test_zero_scalar(self, a):
        assert equiv(sc(ZERO, a), Zero())

    @given(sups)
    def test_one_scalar(self, a):
        assert equiv(sc(ONE, a), a)

    @given(amplitudes(), amplitudes(), sups)
    def test_scalar_composition(self, x, y, a):
        assert equiv(sc(x, sc(y, a)), sc(x * y, a))

    @given(amplitudes(), amplitudes(), sups)
    def test_scalar_sum(self, x, y, a):
        assert equiv(Sum(sc(x, a), sc(y, a)), sc(x + y, a))

    @given(amplitudes(), sups, sups)
    def test_distributivity(self, x, a, b):
        assert equiv(sc(x, Sum(a, b)), Sum(sc(x, a), sc(x, b)))


class TestInnerProduct:
    def test_plus_minus_orthogonal(self):
        assert inner_product(PLUS, MINUS) == ZERO

    def test_basis_norm(self):
        assert inner_product(parse("|0>"), parse("|0>")) == ONE

    def test_zero_vector(self):
        assert inner_product(PLUS, Zero()) == ZERO
        assert inner_product(Zero(), PLUS) == ZERO

    def test_norms(self):
        assert norm_sq(PLUS) == RealAlg(1, 0)
        assert norm_sq(Zero()).is_zero()
        assert norm_sq(parse("1/2 * |0>")) == RealAlg(Fraction(1, 4), 0)

    def test_lambda_delta_is_syntactic(self):
        a = parse(r"\x. x")
        b = parse(r"\y. y")
        c = parse(r"\x. (\y. y) x")
        assert inner_product(a, b) == ONE
        assert inner_product(a, c) == ZERO

    def test_non_value_rejected(self):
        with pytest.raises(NotAValue):
            inner_product(parse(r"(\x. x) |0>"), PLUS)

    @given(closed_values(), closed_values())
    def test_conjugate_symmetry(self, v, w):
        assert inner_product(v, w) == inner_product(w, v).conj()

    @given(amplitudes(), amplitudes(), closed_values(), closed_values(), closed_values())
    def test_sesquilinear_left(self, x, y, u, v, w):
        lhs = inner_product(Sum(sc(x, u), sc(y, v)), w)
        assert lhs == x.conj() * inner_product(u, w) + y.conj() * inner_product(v, w)

    @given(amplitudes(), closed_values(), closed_values())
    def test_linear_right(self, x, v, w):
        assert inner_product(v, sc(x, w)) == x * inner_product(v, w)

    @given(closed_values(), closed_values())
    def test_congruence(self, v, w):
        v2 = Sum(Zero(), sc(ONE, v))
        w2 = Sum(sc(HALF, w), sc(HALF, w))
        assert inner_product(v, w) == inner_product(v2, w2)


class TestVectorOps:
    def test_coefficient(self):
        assert coefficient(PLUS, Ket1()) == ISQRT2

    def test_add_and_scale(self):
        assert add(PLUS, MINUS) == canonicalize(parse("sqrt2 * |0>"))
        assert scale(I, parse("|0>")).terms == ((I, Ket0()),)

    def test_unit(self):
        assert is_unit(PLUS)
        assert not is_unit(parse("|0> + |1>"))


class TestMembership:
    def test_flat(self):
        assert flat(parse_type("B * B")) == [Pair(a, b) for a in (Ket0(), Ket1()) for b in (Ket0(), Ket1())]

    @pytest.mark.parametrize(
        "src, ty, expected",
        [
            ("|0>", "B", True),
            ("|+>", "B", False),
            ("|+>", "#B", True),
            ("|0> + |1>", "#B", False),
            ("(|0>, |+>)", "B * #B", True),
            ("isqrt2 * (|0>, |0>) + isqrt2 * (|1>, |1>)", "#(B * B)", True),
            ("isqrt2 * (|0>, |0>) + isqrt2 * (|1>, |1>)", "#B * #B", False),
        ],
    )
    def test_cases(self, src, ty, expected):
        assert member(parse(src), parse_type(ty)) is expected

    def test_non_ground_rejected(self):
        with pytest.raises(ValueError):
            member(parse("|0>"), parse_type("B -o B"))
