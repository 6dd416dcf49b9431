"""Growth classification: the corpus grid, closure properties, comparisons."""

import itertools

import pytest

from ergolab import (NotEventuallyPositiveError, SuperpolynomialError,
                     classify_Ml, classify_Pm, classify_Pm_prime,
                     compare_growth, differentiate, evaluate, parse)

# the twelve-member corpus with expected P_m and M_l orders
CORPUS_GRID = [
    # (expr, P_m order or None, M_l order or None)
    ("t", 1, None),
    ("t^2+t", 2, None),
    ("t^3+2*t", 3, None),
    ("t^(1/2)", 1, 0),
    ("t^(3/2)", 2, 1),
    ("t^(5/2)", 3, 2),
    ("t^(3/2)*ln(t)", 2, 1),
    ("t^(3/2)/ln(t)", 2, 1),
    ("2*t^(5/2)-3*t^(1/2)+t", 3, 2),
    ("t*ln(t)", None, None),
    ("t^2*ln(t)", None, None),
    ("ln(t)", None, None),
]


class TestPmGrid:
    @pytest.mark.parametrize("expr,m,_l", CORPUS_GRID)
    def test_pm_verdict(self, expr, m, _l):
        gc = classify_Pm(parse(expr), m_max=4)
        if m is None:
            assert gc.verdict == "Unclassified", (expr, gc)
        else:
            assert gc.is_pm(m), (expr, gc.to_dict())

    @pytest.mark.parametrize("expr,_m,l", CORPUS_GRID)
    def test_ml_verdict(self, expr, _m, l):
        gc = classify_Ml(parse(expr), l_max=6)
        if l is None:
            assert gc.verdict != "Ml", (expr, gc)
        else:
            assert gc.is_ml(l), (expr, gc.to_dict())

    def test_ml_square_is_boundary(self):
        assert classify_Ml(parse("t^2")).verdict == "Unclassified"

    def test_superpolynomial_refused(self):
        with pytest.raises(SuperpolynomialError):
            classify_Pm(parse("exp(t)"), m_max=2)
        with pytest.raises(SuperpolynomialError):
            classify_Pm(parse("t*exp(t^(1/2))"), m_max=2)

    def test_exp_of_constant_is_fine(self):
        gc = classify_Pm(parse("exp(1)*t"), m_max=2)
        assert gc.is_pm(1)

    def test_evidence_recorded(self):
        gc = classify_Pm(parse("t^(3/2)"), m_max=3)
        conditions = {e.condition for e in gc.evidence}
        assert {"derivatives-positive", "ratio-bounded", "tail-sup-bounded"} <= conditions


class TestClosureProperties:
    """Structural consequences of membership, checked on the corpus."""

    PM_MEMBERS = [(e, m) for e, m, _ in CORPUS_GRID if m is not None]

    @pytest.mark.parametrize("expr,m", [(e, m) for e, m in PM_MEMBERS if m >= 2])
    def test_derivative_drops_one_level(self, expr, m):
        d = differentiate(parse(expr), 1)
        gc = classify_Pm(d, m_max=4)
        assert gc.is_pm(m - 1), (expr, gc.to_dict())

    @pytest.mark.parametrize("expr,m", [(e, m) for e, m in PM_MEMBERS if m >= 2])
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_shift_difference_drops_one_level(self, expr, m, r):
        f = parse(expr)
        fr = parse(expr.replace("t", f"(t+{r})"))
        gc = classify_Pm(fr - f, m_max=4)
        assert gc.is_pm(m - 1), (expr, r, gc.to_dict())

    @pytest.mark.parametrize("expr,m", [(e, m) for e, m in PM_MEMBERS if m == 1])
    def test_p1_members_exceed_any_bound(self, expr, m):
        f = parse(expr)
        for bound in range(1, 11):
            # find a threshold past which f stays above the bound
            t = max(4, f.validity_threshold)
            while True:
                v, err = evaluate(f, t, check_validity=False)
                if float(v) - err > bound:
                    break
                t *= 2
                assert t < 2 ** 60, (expr, bound)
            v2, err2 = evaluate(f, 4 * t, check_validity=False)
            assert float(v2) - err2 > bound

    @pytest.mark.parametrize("expr,m", PM_MEMBERS)
    def test_pm_prime_included_in_pm(self, expr, m):
        gp = classify_Pm_prime(parse(expr), m_max=4)
        if gp.verdict == "PmPrime":
            gc = classify_Pm(parse(expr), m_max=4)
            assert gc.is_pm() and gc.order <= gp.order


class TestCompareGrowth:
    def test_examples(self):
        assert compare_growth(parse("t*ln(t)"), parse("t^2")) == "<"
        assert compare_growth(parse("3*t^2"), parse("t^2")) == "~"
        assert compare_growth(parse("t^(3/2)*ln(t)"), parse("t^(3/2)")) == ">"

    def test_requires_eventual_positivity(self):
        with pytest.raises(NotEventuallyPositiveError):
            compare_growth(parse("0-t"), parse("t"))

    def test_strict_weak_order_on_corpus(self):
        exprs = [parse(e) for e, _, _ in CORPUS_GRID]
        rel = {}
        for i, j in itertools.product(range(len(exprs)), repeat=2):
            rel[(i, j)] = compare_growth(exprs[i], exprs[j])
        for i in range(len(exprs)):
            assert rel[(i, i)] == "~"
        # antisymmetry of the strict part
        for i, j in itertools.product(range(len(exprs)), repeat=2):
            if rel[(i, j)] == "<":
                assert rel[(j, i)] == ">"
            if rel[(i, j)] == "~":
                assert rel[(j, i)] == "~"
        # transitivity over all triples
        for i, j, k in itertools.product(range(len(exprs)), repeat=3):
            if rel[(i, j)] == "<" and rel[(j, k)] in ("<", "~"):
                assert rel[(i, k)] == "<", (i, j, k)
            if rel[(i, j)] == "~" and rel[(j, k)] == "~":
                assert rel[(i, k)] == "~"

    def test_numeric_fallback_on_non_powlog(self):
        # exp(-t) decays: exp-containing trees leave the symbolic class
        r = compare_growth(parse("t+exp(0-t)"), parse("t^2"), horizon=2.0 ** 30)
        assert r == "<"
