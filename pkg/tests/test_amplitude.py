import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from punq.amplitude import (
    HALF,
    I,
    ISQRT2,
    MINUS_ONE,
    ONE,
    SQRT2,
    ZERO,
    Amplitude,
    AmplitudeSyntaxError,
    RealAlg,
    amp_add,
    amp_conj,
    amp_is_zero,
    amp_mul,
    amp_norm_sq,
    format_amplitude,
    parse_amplitude,
)

from conftest import amplitudes


def approx(a: Amplitude, z: complex) -> bool:
    return cmath.isclose(a.to_complex(), z, rel_tol=1e-9, abs_tol=1e-9)


class TestConstruction:
    def test_components_are_reduced(self):
        a = Amplitude(Fraction(2, 4), 0, Fraction(-3, -6), 0)
        assert a.components() == (Fraction(1, 2), 0, Fraction(1, 2), 0)
        assert all(c.denominator > 0 for c in a.components())

    def test_int_constructor(self):
        assert Amplitude.of(3) == Amplitude(3)

    def test_equality_is_componentwise(self):
        assert Amplitude(1, 1) != Amplitude(1, 0)
        assert Amplitude(1, 1) == Amplitude(Fraction(2, 2), Fraction(3, 3))

    def test_int_key_distinguishes(self):
        assert ISQRT2.int_key() != HALF.int_key()
        assert Amplitude(0, Fraction(1, 2)).int_key() == ISQRT2.int_key()


class TestArithmetic:
    def test_isqrt2_sum(self):
        assert amp_add(ISQRT2, ISQRT2) == SQRT2

    def test_additive_identity(self):
        x = Amplitude(1, 2, 3, 4)
        assert amp_add(x, ZERO) == x

    def test_conjugate_pair_sum(self):
        assert amp_add(Amplitude(1, 0, 1), Amplitude(1, 0, -1)) == Amplitude.of(2)

    def test_isqrt2_squared(self):
        assert amp_mul(ISQRT2, ISQRT2) == HALF

    def test_difference_of_squares(self):
        assert amp_mul(Amplitude(1, 1), Amplitude(1, -1)) == MINUS_ONE

    def test_i_squared(self):
        assert amp_mul(I, I) == MINUS_ONE

    def test_division(self):
        x = Amplitude(1, 1, 2, -1)
        assert (x / x) == ONE
        assert (ONE / SQRT2) == ISQRT2

    def test_inverse_of_zero_raises(self):
        with pytest.raises(ZeroDivisionError):
            ZERO.inverse()


class TestConjugateAndNorm:
    def test_conj_i(self):
        assert amp_conj(I) == -I

    def test_real_fixed_point(self):
        assert amp_conj(ISQRT2) == ISQRT2

    def test_norm_isqrt2(self):
        assert amp_norm_sq(ISQRT2) == RealAlg(Fraction(1, 2), 0)

    def test_norm_zero(self):
        assert amp_norm_sq(ZERO).is_zero()

    def test_norm_i_over_sqrt2(self):
        assert amp_norm_sq(I * ISQRT2) == RealAlg(Fraction(1, 2), 0)


class TestZeroTest:
    def test_zero(self):
        assert amp_is_zero(ZERO)

    def test_cancellation(self):
        assert amp_is_zero(HALF - HALF)

    def test_irrational_not_rational(self):
        assert not amp_is_zero(SQRT2 - ONE)


class TestFieldProperties:
    @given(amplitudes(), amplitudes(), amplitudes())
    def test_associativity(self, x, y, z):
        assert (x + y) + z == x + (y + z)
        assert (x * y) * z == x * (y * z)

    @given(amplitudes(), amplitudes())
    def test_commutativity(self, x, y):
        assert x + y == y + x
        assert x * y == y * x

    @given(amplitudes(), amplitudes(), amplitudes())
    def test_distributivity(self, x, y, z):
        assert x * (y + z) == x * y + x * z

    @given(amplitudes(nonzero=True))
    def test_multiplicative_inverse(self, x):
        assert x * x.inverse() == ONE

    @given(amplitudes())
    def test_additive_inverse(self, x):
        assert (x + (-x)).is_zero()

    @given(amplitudes())
    def test_conj_involution(self, x):
        assert x.conj().conj() == x

    @given(amplitudes(), amplitudes())
    def test_conj_is_multiplicative(self, x, y):
        assert (x * y).conj() == x.conj() * y.conj()

    @given(amplitudes())
    def test_norm_zero_iff_zero(self, x):
        assert amp_norm_sq(x).is_zero() == amp_is_zero(x)

    @given(amplitudes())
    def test_norm_nonnegative(self, x):
        assert amp_norm_sq(x).sign() >= 0


class TestFloatOracle:
    """Exact arithmetic agrees with complex floating point."""

    @given(amplitudes(), amplitudes())
    def test_sum_and_product(self, x, y):
        zx, zy = x.to_complex(), y.to_complex()
        assert approx(x + y, zx + zy)
        assert approx(x * y, zx * zy)

    @given(amplitudes())
    def test_norm(self, x):
        assert math.isclose(float(amp_norm_sq(x)), abs(x.to_complex()) ** 2, rel_tol=1e-9, abs_tol=1e-9)

    @given(st.fractions(min_value=-5, max_value=5, max_denominator=7), st.fractions(min_value=-5, max_value=5, max_denominator=7))
    def test_real_sign(self, a, b):
        r = RealAlg(a, b)
        v = float(a) + float(b) * math.sqrt(2)
        assert r.sign() == (0 if r.is_zero() else (1 if v > 0 else -1))


class TestTextualSyntax:
    @pytest.mark.parametrize(
        "text, value",
        [
            ("0", ZERO),
            ("1", ONE),
            ("-1", MINUS_ONE),
            ("3/4", Amplitude(Fraction(3, 4))),
            ("sqrt2", SQRT2),
            ("isqrt2", ISQRT2),
            ("i", I),
            ("(1 + i) * isqrt2", (ONE + I) * ISQRT2),
        ],
    )
    def test_literals(self, text, value):
        assert parse_amplitude(text) == value

    @given(amplitudes())
    def test_round_trip(self, x):
        assert parse_amplitude(format_amplitude(x)) == x

    @pytest.mark.parametrize("bad", ["", "sqrt3", "1 +", "(1"])
    def test_rejects_garbage(self, bad):
        with pytest.raises(AmplitudeSyntaxError):
            parse_amplitude(bad)
