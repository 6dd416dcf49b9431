"""Acceptance suite: every criterion at its stated horizon and tolerance.

Each test prints one [PASS]/[FAIL] line; run with `pytest -v
tests/test_acceptance.py` (add -s to see the lines inline).  The heavy
fixtures are module-scoped so sequence generation at N = 10^6 is shared.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from ergolab import (BilateralShift, ExperimentConfig, IndexSet, Perturbation,
                     SubsequenceSpec, VectorModel, WeightSpec,
                     boshernitzan_trichotomy, brute_force_norm2, build_bk,
                     build_bk_bruteforce, classify_Ml, classify_Pm,
                     difference_average, generate_a, parse, q_test,
                     scalar_weighted_average, tuple_trace, vector_average,
                     weyl_test)
from ergolab.sequences import bk_diagnostics

N6 = 10 ** 6

GRID_FUNCTIONS = ["t^(3/2)", "t^(1/2)", "t^2+t", "t^(5/2)*ln(t)"]
GRID_PERTS = [Perturbation.zero(), Perturbation.periodic([1, -1])]
GRID_SETS = [IndexSet.naturals(), IndexSet.arithmetic(1, 3),
             IndexSet.rotation("sqrt2-1", 0, Fraction(1, 2))]


class _Clock:
    def __init__(self, budget_s, label):
        self.budget = budget_s
        self.label = label

    def __enter__(self):
        self.t0 = time.monotonic()
        return self

    def __exit__(self, exc_type, *a):
        self.elapsed = time.monotonic() - self.t0
        status = "PASS" if exc_type is None and self.elapsed < self.budget else "FAIL"
        print(f"[{status}] {self.label}: {self.elapsed:.1f}s (budget {self.budget}s)")
        return False

    def check(self):
        assert time.monotonic() - self.t0 < self.budget, \
            f"{self.label} exceeded its runtime budget"


def test_criterion_01_classification_grid():
    corpus = [
        ("t", 1, None), ("t^2+t", 2, None), ("t^3+2*t", 3, None),
        ("t^(1/2)", 1, 0), ("t^(3/2)", 2, 1), ("t^(5/2)", 3, 2),
        ("t^(3/2)*ln(t)", 2, 1), ("t^(3/2)/ln(t)", 2, 1),
        ("2*t^(5/2)-3*t^(1/2)+t", 3, 2),
        ("t*ln(t)", None, None), ("t^2*ln(t)", None, None), ("ln(t)", None, None),
    ]
    with _Clock(10, "criterion 1 (classification grid)") as clk:
        for s, m, l in corpus:
            f = parse(s)
            pm = classify_Pm(f, m_max=4)
            ml = classify_Ml(f, l_max=6)
            if m is None:
                assert pm.verdict == "Unclassified", s
            else:
                assert pm.is_pm(m), (s, pm.to_dict())
            if l is None:
                assert ml.verdict != "Ml", s
            else:
                assert ml.is_ml(l), (s, ml.to_dict())
        clk.check()


def test_criterion_02_bk_oracle_and_gap_statistic():
    p1_corpus = ["t", "t^2+t", "t^3+2*t", "t^(1/2)", "t^(3/2)", "t^(5/2)",
                 "t^(3/2)*ln(t)", "t^(3/2)/ln(t)", "2*t^(5/2)-3*t^(1/2)+t"]
    with _Clock(30, "criterion 2 (b_k oracle + gap statistic)") as clk:
        for s in p1_corpus:
            f = parse(s)
            assert np.array_equal(build_bk(f, 200).b,
                                  build_bk_bruteforce(f, 200).b), s
        table = build_bk(parse("t^(1/2)"), 10 ** 4)
        b = table.b.astype(np.float64)
        k = np.arange(1, len(b))
        stat = k * np.diff(b) / b[:-1]
        window = stat[99:]  # k in [100, 10^4)
        runmax = np.maximum.accumulate(window)
        # sample the running maximum at doublings of k
        idx = [100 * 2 ** j - 100 for j in range(7)] + [len(window) - 1]
        samples = runmax[np.array(idx)]
        growth = samples[1:] / samples[:-1]
        assert growth.max() < 1.01, growth
        clk.check()


def test_criterion_03_exact_orthogonality_law():
    with _Clock(60, "criterion 3 (exact 1/N law)") as clk:
        for f_str, dedup in [("t^(3/2)", False), ("t^2+t", True),
                             ("t^(5/2)*ln(t)", False)]:
            cfg = ExperimentConfig(
                model=BilateralShift(), x=VectorModel.basis(0),
                subsequence=SubsequenceSpec.parse(f_str),
                n_max=N6, exact=True, dedup=dedup)
            tr = vector_average(cfg)
            assert np.array_equal(tr.n_eff, tr.checkpoints), f_str  # injective
            for v, n in zip(tr.exact_norm2, tr.checkpoints):
                assert v == Fraction(1, int(n)), (f_str, n)
            assert np.array_equal(tr.norm2, 1.0 / tr.checkpoints.astype(np.float64))
        clk.check()


def test_criterion_04_brute_force_equivalence():
    import random
    rng = random.Random(2024)
    with _Clock(120, "criterion 4 (bucketed == O(N^2) double sum)") as clk:
        for trial in range(20):
            n = 2000
            f = rng.choice(GRID_FUNCTIONS[:3] + ["t", "t^2"])
            pert = rng.choice([Perturbation.zero(), Perturbation.periodic([1, -1]),
                               Perturbation.random(2, trial)])
            spec = SubsequenceSpec(parse(f), pert)
            width = rng.randint(1, 5)
            coeffs = tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 4))
                           for _ in range(width))
            if all(c == 0 for c in coeffs):
                coeffs = (Fraction(1),) + coeffs[1:]
            x = VectorModel(coeffs, rng.randint(-2, 2))
            model = rng.choice([BilateralShift(), BilateralShift(),
                                __import__("ergolab").parse_model("simshift:pattern=1,2")])
            cfg = ExperimentConfig(model=model, x=x, subsequence=spec,
                                   n_max=n, exact=True,
                                   checkpoints=np.array([1000, n]))
            tr = vector_average(cfg)
            a = generate_a(spec, n).a
            bf = brute_force_norm2(model, x, a, exact=True)
            assert tr.exact_norm2[-1] == bf, (trial, f)
        clk.check()


_GRID_SECONDS = {}


@pytest.fixture(scope="module")
def grid_wall_time():
    return lambda: _GRID_SECONDS.get("grid", 0.0)


@pytest.fixture(scope="module")
def subsequential_grid():
    """The 24-config grid with main and difference verdicts, shared by
    criteria 5 and 10."""
    t0 = time.monotonic()
    results = []
    for f_str in GRID_FUNCTIONS:
        for pert in GRID_PERTS:
            for A in GRID_SETS:
                cfg = ExperimentConfig(
                    model=BilateralShift(), x=VectorModel.basis(0),
                    subsequence=SubsequenceSpec(parse(f_str), pert),
                    index_set=A, n_max=N6)
                tr = vector_average(cfg)
                diffs = {}
                for k in range(1, 6):
                    dtr = difference_average(cfg, k)
                    diffs[k] = dtr.verdict(0.02, 0.1)
                results.append({
                    "f": f_str, "pert": pert.spec_string(),
                    "set": A.spec_string(),
                    "final_norm2": tr.final_norm2,
                    "verdict": tr.verdict(0.02, 0.1),
                    "diff_verdicts": diffs,
                })
    _GRID_SECONDS["grid"] = time.monotonic() - t0
    return results


def test_criterion_05_subsequential_suite(subsequential_grid, grid_wall_time):
    with _Clock(600, "criterion 5 (24-config subsequential suite)") as clk:
        assert len(subsequential_grid) == 24
        for r in subsequential_grid:
            assert r["verdict"] == "converges-to-0", r
            assert r["final_norm2"] < 0.02, r
        assert grid_wall_time() < 600, "grid construction exceeded the budget"
        clk.check()


def test_criterion_06_weighted_suite():
    with _Clock(600, "criterion 6 (weighted suite + scalar instance)") as clk:
        for g in ["t^(1/2)", "t^(3/2)", "sqrt2*t^2", "sqrt2*t^2+sqrt3*t^(1/2)"]:
            cfg = ExperimentConfig(
                model=BilateralShift(), x=VectorModel.basis(0),
                subsequence=SubsequenceSpec.parse("t^(3/2)"),
                weights=WeightSpec.hardy(g), n_max=N6)
            tr = vector_average(cfg)
            assert tr.verdict(0.02, 0.1) == "converges-to-0", g
            assert tr.final_norm2 < 0.02, (g, tr.final_norm2)
        # scalar generalized-polynomial instance, oracle: the sums themselves
        spec = SubsequenceSpec.parse("t^(3/2)+t")
        w = WeightSpec.hardy("sqrt2*t^2")
        a4 = generate_a(spec, 4 * N6).a
        tr4 = scalar_weighted_average(w, a4, parse("sqrt3"), 4 * N6)
        tr1 = scalar_weighted_average(w, a4[:N6], parse("sqrt3"), N6)
        v1, v4 = tr1.final_abs, tr4.final_abs
        assert v1 < 0.02, v1
        assert v4 < v1, (v1, v4)
        clk.check()


def test_criterion_07_property_q_verdicts():
    with _Clock(300, "criterion 7 (property Q verdicts)") as clk:
        qv = q_test("t^(1/2)", k_max=2, m_bound=2)
        assert qv.overall == "Q-holds" and qv.route == "Ml"
        qv = q_test("t^2+ln(t)^2", k_max=2, m_bound=2)
        assert qv.overall == "Q-holds"
        qv = q_test("t/2", k_max=2, m_bound=2)
        assert qv.overall == "Q-fails" and qv.route == "rational-polynomial"
        assert qv.averages_converge_by_other_means
        qv = q_test("t*ln(t)", k_max=2, m_bound=2)
        assert qv.overall == "Q-fails" and qv.witness == (-1, 1)
        wtr = tuple_trace(WeightSpec.hardy("t*ln(t)"), qv.witness, N6)
        assert wtr.oscillation() >= 0.1, wtr.oscillation()
        clk.check()


def test_criterion_08_trichotomy_with_weyl_confirmation():
    with _Clock(300, "criterion 8 (trichotomy + Weyl traces)") as clk:
        tri = boshernitzan_trichotomy("t^(3/2)")
        assert tri.verdict == "equidistributed"
        assert weyl_test("t^(3/2)", N6, m_max=5, tol=0.02).overall_pass
        tri = boshernitzan_trichotomy("ln(t)")
        assert tri.cesaro == "diverges"
        assert not weyl_test("ln(t)", N6, m_max=5, tol=0.02).overall_pass
        tri = boshernitzan_trichotomy("t/2")
        assert tri.verdict == "degenerate"
        assert not weyl_test("t/2", N6, m_max=5, tol=0.02).overall_pass
        tri = boshernitzan_trichotomy("t^2+ln(t)")
        assert not tri.equidistributed
        assert not weyl_test("t^2+ln(t)", N6, m_max=5, tol=0.02).overall_pass
        clk.check()


def test_criterion_09_rotation_return_time_sets():
    from ergolab import density, regularity_report
    pairs = [("sqrt2-1", Fraction(0), Fraction(1, 3)),
             ("sqrt3-1", Fraction(1, 4), Fraction(3, 4)),
             ("phi-1", Fraction(0), Fraction(1, 5))]
    with _Clock(180, "criterion 9 (rotation return-time sets)") as clk:
        for alpha, lo, hi in pairs:
            A = IndexSet.rotation(alpha, lo, hi)
            rep = density(A, N6)
            assert abs(rep.extrapolated - float(hi - lo)) < 0.01, alpha
            ws = regularity_report(A, 4, N6)
            assert ws.all_converged, alpha
        clk.check()


def test_criterion_10_van_der_corput_gate(subsequential_grid):
    with _Clock(60, "criterion 10 (difference-to-main consistency gate)") as clk:
        violations = []
        for r in subsequential_grid:
            diffs_converge = all(v == "converges-to-0"
                                 for v in r["diff_verdicts"].values())
            if diffs_converge and r["verdict"] == "diverges":
                violations.append(r)
        assert violations == [], violations
        clk.check()
