"""Operator models: inner products, power bounds, the eigenspace split."""

import random
from fractions import Fraction

import numpy as np
import pytest

from ergolab import (BilateralShift, DiagEntry, DiagonalOperator,
                     MatrixOperator, ModelError, SimilarShift, VectorModel,
                     gram, jgdl_split, parse_model, power_bound)
from ergolab.constants import Coeff


class TestVectorModel:
    def test_norm2_exact(self):
        x = VectorModel((Fraction(1, 2), 1), 0)
        assert x.norm2() == Fraction(5, 4)

    def test_autocorrelation(self):
        x = VectorModel((1, 1), 0)
        r = x.autocorrelation(exact=True)
        assert r[0] == 2 and r[1] == 1 and r[-1] == 1

    def test_spec_roundtrip(self):
        x = VectorModel((Fraction(1, 2), 0, 1), -1)
        assert VectorModel.parse(x.spec_string()) == x

    def test_empty_rejected(self):
        with pytest.raises(ModelError):
            VectorModel(())


class TestGram:
    def test_shift_orthonormal_translates(self):
        e0 = VectorModel.basis(0)
        assert gram(BilateralShift(), e0, 5, 5, exact=True) == 1
        assert gram(BilateralShift(), e0, 5, 7, exact=True) == 0

    def test_shift_autocorrelation_example(self):
        x = VectorModel((1, 1), 0)
        assert gram(BilateralShift(), x, 3, 4, exact=True) == 1
        assert gram(BilateralShift(), x, 4, 4, exact=True) == 2

    def test_diag_i_squared(self):
        # single eigenvalue i = e(1/4): <T^a x, T^b x> = i^(a-b)
        model = DiagonalOperator((DiagEntry(Fraction(1), Coeff.rational(Fraction(1, 4))),))
        x = VectorModel((1,), 0)
        assert abs(gram(model, x, 2, 0) - (-1)) < 1e-12

    def test_symmetry(self):
        rng = random.Random(3)
        shift = BilateralShift()
        sim = SimilarShift((Fraction(1), Fraction(2)))
        for _ in range(30):
            coeffs = tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 3))
                           for _ in range(rng.randint(1, 4)))
            if all(c == 0 for c in coeffs):
                continue
            x = VectorModel(coeffs, rng.randint(-2, 2))
            a, b = rng.randint(0, 50), rng.randint(0, 50)
            for model in (shift, sim):
                g1 = gram(model, x, a, b, exact=True)
                g2 = gram(model, x, b, a, exact=True)
                assert g1 == g2  # real symmetric for real coefficients

    def test_shift_isometry(self):
        x = VectorModel((Fraction(1, 2), Fraction(1, 3), 1), -1)
        n2 = x.norm2()
        for a in (0, 1, 17, 10 ** 6):
            assert gram(BilateralShift(), x, a, a, exact=True) == n2

    def test_negative_exponent_convention(self):
        x = VectorModel((1, 1), 0)
        assert gram(BilateralShift(), x, -5, 0, exact=True) == \
            gram(BilateralShift(), x, 0, 0, exact=True)

    def test_diag_bounded_by_norm(self):
        model = parse_model("diagu:1/3,sqrt2")
        x = VectorModel((1, 1), 0)
        for a, b in [(0, 0), (3, 1), (100, 7)]:
            assert abs(gram(model, x, a, b)) <= float(x.norm2()) + 1e-12
        # equality iff phases align: at a = b all phases are 1
        assert abs(abs(gram(model, x, 9, 9)) - float(x.norm2())) < 1e-12


class TestPowerBounds:
    def test_shift_is_isometry(self):
        assert power_bound(BilateralShift()) == (1, 0)

    def test_simshift_pattern_1_2(self):
        model = parse_model("simshift:pattern=1,2")
        M, arg = power_bound(model, 1000)
        assert M == 2 and arg == 1

    def test_simshift_brute_force_sharpness(self):
        model = SimilarShift((Fraction(1), Fraction(3), Fraction(2)))
        M, arg = power_bound(model, 1000)
        # brute force over n <= 1000 and basis vectors
        best = Fraction(0)
        for n in range(0, 1001):
            for i in range(model.period):
                best = max(best, model.d(i + n) / model.d(i))
        assert M == best
        assert model.power_norm(arg) == M
        assert 1 < M <= model.kappa() ** 2

    def test_contraction_matrix(self):
        m = MatrixOperator(((0.5, 0.0), (0.0, 0.9)))
        M, arg = m.power_bound()
        assert M == 1.0 and arg == 0

    def test_non_power_bounded_rejected(self):
        with pytest.raises(ModelError):
            MatrixOperator(((1.1, 0.0), (0.0, 0.5)))
        with pytest.raises(ModelError):
            DiagEntry(Fraction(3, 2))


class TestJgdlSplit:
    def test_mixed(self):
        model = parse_model("diag:0.5,u(sqrt2)")
        assert jgdl_split(model) == ((1,), (0,))

    def test_all_unimodular(self):
        model = parse_model("diagu:1/3,sqrt2")
        assert jgdl_split(model) == ((0, 1), ())

    def test_all_contractive(self):
        model = parse_model("diag:0.3,0.9")
        assert jgdl_split(model) == ((), (0, 1))

    def test_matrix_split(self):
        m = MatrixOperator(((0.5, 0.1), (0.0, 0.8)))
        x1, x2 = jgdl_split(m)
        assert x1 == () and len(x2) == 2


class TestSpecStrings:
    @pytest.mark.parametrize("s", [
        "shift", "simshift:pattern=1,2", "diagu:1/3,sqrt2",
        "diag:0.5,u(sqrt2)", "mat:0.5,0.0;0.0,0.9",
    ])
    def test_roundtrip(self, s):
        m = parse_model(s)
        assert parse_model(m.spec_string()).spec_string() == m.spec_string()

    def test_peripheral_spectrum_flags(self):
        assert BilateralShift().peripheral_point_spectrum() == ()
        assert parse_model("simshift:pattern=1,2").peripheral_point_spectrum() == ()
        assert len(parse_model("diagu:1/3").peripheral_point_spectrum()) == 1
