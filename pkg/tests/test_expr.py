"""Expression trees: parsing, printing, differentiation, certified evaluation."""

import random
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from ergolab import (BelowValidityError, ParseError, T, const, differentiate,
                     evaluate, exp, ln, parse, to_string)
from ergolab import expr as ex
from ergolab.constants import Coeff


CORPUS = [
    "t", "t^2+t", "t^3+2*t", "t^(1/2)", "t^(3/2)", "t^(5/2)",
    "t^(3/2)*ln(t)", "t^(3/2)/ln(t)", "2*t^(5/2)-3*t^(1/2)+t",
    "t*ln(t)", "t^2*ln(t)", "ln(t)", "sqrt2*t^2", "sqrt2*t^2+sqrt3*t^(1/2)",
    "t/2", "t^2+ln(t)^2", "exp(1)*t", "pi*t^(1/2)", "phi*t",
]


class TestParsePrint:
    @pytest.mark.parametrize("text", CORPUS)
    def test_roundtrip(self, text):
        e = parse(text)
        assert parse(to_string(e)) == e

    def test_roundtrip_is_idempotent(self):
        for text in CORPUS:
            s1 = to_string(parse(text))
            assert to_string(parse(s1)) == s1

    def test_whitespace_insensitive(self):
        assert parse(" t ^ (3/2) * ln( t )") == parse("t^(3/2)*ln(t)")

    def test_parse_error_carries_position(self):
        with pytest.raises(ParseError) as ei:
            parse("t^(3/2")
        assert ei.value.pos >= 0
        with pytest.raises(ParseError):
            parse("2*unknownname(t)")

    def test_decimal_literals_are_exact(self):
        e = parse("0.3*t")
        coeff = e.args[0].value.rational_value()
        assert coeff == Fraction(3, 10)

    def test_random_trees_roundtrip(self):
        rng = random.Random(7)
        for _ in range(200):
            e = _random_expr(rng, depth=3)
            assert parse(to_string(e)) == e


def _random_expr(rng, depth):
    if depth == 0:
        return rng.choice([T, const(rng.randint(1, 5)),
                           const(Fraction(rng.randint(1, 7), rng.randint(1, 7))),
                           parse("sqrt2"), parse("pi")])
    op = rng.randrange(6)
    a = _random_expr(rng, depth - 1)
    b = _random_expr(rng, depth - 1)
    if op == 0:
        return a + b
    if op == 1:
        return a - b
    if op == 2:
        return a * b
    if op == 3:
        return ex.pow_(a, const(Fraction(rng.randint(1, 5), rng.choice([1, 2]))))
    if op == 4:
        return ln(a * a + 1)
    return a + const(rng.randint(0, 3))


class TestDifferentiate:
    def test_power_rule(self):
        assert differentiate(parse("t^(3/2)")) == parse("3/2*t^(1/2)")

    def test_product_rule_t_ln_t(self):
        d = differentiate(parse("t*ln(t)"))
        # ln t + 1 up to arrangement: check values
        with mp.workdps(40):
            for t in (2, 5, 17):
                v, err = evaluate(d, t, dps=40)
                assert abs(v - (mp.ln(t) + 1)) < 1e-32

    def test_second_derivative_of_quadratic(self):
        d2 = differentiate(parse("t^2+t"), 2)
        v, err = evaluate(d2, 10, dps=30)
        assert v == 2 and err == 0.0

    def test_order_validated(self):
        with pytest.raises(ValueError):
            differentiate(parse("t"), 0)

    def test_derivative_matches_finite_difference(self):
        # 100 seeded random expressions, 10 points each
        rng = random.Random(42)
        old = mp.dps
        mp.dps = 50
        try:
            checked = 0
            for _ in range(100):
                e = _random_expr(rng, depth=2)
                d = differentiate(e)
                for _ in range(10):
                    t = Fraction(rng.randint(400, 4000), rng.randint(1, 4))
                    try:
                        sym, err_d = evaluate(d, t, dps=50, check_validity=False)
                        h = Fraction(1, 10 ** 10)
                        f1, e1 = evaluate(e, t + h, dps=50, check_validity=False)
                        f0, e0 = evaluate(e, t - h, dps=50, check_validity=False)
                    except (ZeroDivisionError, ex.EvalOverflowError,
                            BelowValidityError):
                        continue
                    fd = (f1 - f0) / (2 * mp.mpf(h.numerator) / h.denominator)
                    scale = max(1.0, abs(float(sym)))
                    tol = max(10 * (err_d + e1 + e0), 1e-12 * scale)
                    assert abs(sym - fd) < max(tol, 1e-9 * scale), (to_string(e), t)
                    checked += 1
            assert checked > 500
        finally:
            mp.dps = old


class TestEvaluate:
    def test_exact_power(self):
        v, err = evaluate(parse("t^(3/2)"), 4)
        assert v == 8 and err == 0.0

    def test_t_ln_t_at_small_point(self):
        v, err = evaluate(parse("t*ln(t)"), 3, dps=40)
        with mp.workdps(50):
            assert abs(v - 3 * mp.ln(3)) < 1e-32 and err < 1e-30

    def test_sqrt2_t2_fractional_part_50_digits(self):
        # doubled-precision oracle for the fractional part at t = 10^6
        e = parse("sqrt2*t^2")
        v, err = evaluate(e, 10 ** 6, dps=60)
        assert err < 1e-30
        old = mp.dps
        mp.dps = 120
        try:
            oracle = mp.sqrt(2) * mp.mpf(10 ** 6) ** 2
            assert abs((v - mp.floor(v)) - (oracle - mp.floor(oracle))) < 1e-30
        finally:
            mp.dps = old

    def test_error_shrinks_with_precision(self):
        e = parse("t^(1/2)*ln(t)")
        _, e1 = evaluate(e, 7, dps=20)
        _, e2 = evaluate(e, 7, dps=40)
        assert 0 < e2 < e1

    def test_below_validity_raises(self):
        e = parse("ln(t-10)")
        assert e.validity_threshold > 10
        with pytest.raises(BelowValidityError):
            evaluate(e, 5)

    def test_exp_overflow(self):
        with pytest.raises(ex.EvalOverflowError):
            evaluate(parse("exp(t^3)"), 10 ** 4, dps=20)

    def test_named_constants(self):
        with mp.workdps(40):
            v, _ = evaluate(parse("phi"), 2, dps=40)
            assert abs(v - (1 + mp.sqrt(5)) / 2) < 1e-32
            v, _ = evaluate(parse("e"), 2, dps=40)
            assert abs(v - mp.e) < 1e-32


class TestCoeff:
    def test_sqrt_normalization(self):
        assert Coeff.sqrt(8) == Coeff.rational(2) * Coeff.sqrt(2)
        assert Coeff.sqrt(4).rational_value() == 2

    def test_sqrt2_squared_is_rational(self):
        c = Coeff.sqrt(2)
        assert (c * c).rational_value() == 2

    def test_product_of_roots_merges(self):
        assert Coeff.sqrt(2) * Coeff.sqrt(3) == Coeff.sqrt(6)

    def test_certified_irrational(self):
        assert Coeff.sqrt(2).certified_irrational()
        assert (Coeff.sqrt(2) + Coeff.rational(3)).certified_irrational()
        assert (Coeff.sqrt(2) + Coeff.sqrt(3)).certified_irrational()
        assert not Coeff.rational(Fraction(3, 7)).certified_irrational()

    def test_sign_certification(self):
        assert (Coeff.sqrt(2) - Coeff.rational(1)).sign() == 1
        assert (Coeff.rational(2) - Coeff.sqrt(2)).sign() == 1
        assert (Coeff.sqrt(2) - Coeff.rational(2)).sign() == -1

    def test_interval_encloses(self):
        enc = Coeff.named("pi").interval(40)
        with mp.workdps(60):
            assert mp.mpf(enc.a) <= mp.pi <= mp.mpf(enc.b)
