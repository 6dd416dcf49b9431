"""Index sets: densities, derived window sets, word regularity."""

from fractions import Fraction

import numpy as np
import pytest

from ergolab import IndexSet, density, extract_Akm, regularity_report
from ergolab.index_sets import (champernowne_bits, check_word_additivity,
                                default_checkpoints, read_set, write_set)
import io


ALL_KINDS = [
    IndexSet.naturals(),
    IndexSet.arithmetic(2, 2),
    IndexSet.arithmetic(1, 3),
    IndexSet.rotation("sqrt2-1", 0, Fraction(1, 3), 0),
    IndexSet.bernoulli(Fraction(3, 10), 7),
    IndexSet.normal_word(),
    IndexSet.explicit([1, 4, 9, 16, 25, 36]),
]


class TestMembershipEnumeration:
    @pytest.mark.parametrize("A", ALL_KINDS, ids=lambda a: a.kind)
    def test_enumeration_matches_membership(self, A):
        N = 10 ** 4
        mask = A.bitmask(N)
        els = A.elements(N)
        assert np.array_equal(np.nonzero(mask)[0] + 1, els)
        # n-th element has exactly n members below it
        cum = A.counts(N)
        for n in (1, 3, 7):
            if len(els) >= n:
                g = int(els[n - 1])
                assert cum[g - 1] == n
                assert A.contains(g)

    @pytest.mark.parametrize("A", ALL_KINDS, ids=lambda a: a.kind)
    def test_contains_agrees_with_mask(self, A):
        mask = A.bitmask(500)
        for n in range(1, 501, 17):
            assert A.contains(n) == bool(mask[n - 1])

    @pytest.mark.parametrize("A", ALL_KINDS, ids=lambda a: a.kind)
    def test_mask_prefix_stability(self, A):
        m1 = A.bitmask(300).copy()
        m2 = A.bitmask(9000)[:300]
        assert np.array_equal(m1, m2)

    def test_nth_element(self):
        rot = IndexSet.rotation("sqrt2-1", 0, Fraction(1, 2))
        g5 = rot.nth_element(5)
        assert rot.counts(g5)[-1] == 5

    @pytest.mark.parametrize("A", ALL_KINDS, ids=lambda a: a.kind)
    def test_spec_string_roundtrip(self, A):
        assert IndexSet.parse(A.spec_string()).spec_string() == A.spec_string()


class TestDensity:
    def test_evens_exact(self):
        rep = density(IndexSet.arithmetic(2, 2), 10 ** 6)
        assert rep.extrapolated == 0.5
        even_cps = rep.checkpoints[rep.checkpoints % 2 == 0]
        tr = rep.counts[rep.checkpoints % 2 == 0] / even_cps
        assert np.all(tr == 0.5)

    def test_rotation_interval_density(self):
        rep = density(IndexSet.rotation("sqrt2-1", 0, Fraction(1, 3)), 10 ** 5)
        assert abs(rep.extrapolated - 1 / 3) < 0.01 and rep.converged

    def test_rotation_three_distance_rate(self):
        N = 10 ** 5
        rep = density(IndexSet.rotation("sqrt2-1", 0, Fraction(1, 2)), N)
        assert abs(rep.extrapolated - 0.5) < 3 / np.sqrt(N)

    def test_bernoulli_density(self):
        rep = density(IndexSet.bernoulli(Fraction(3, 10), 7), 10 ** 5)
        assert abs(rep.extrapolated - 0.3) < 0.005

    def test_adversarial_blocks_oscillate(self):
        # alternating 0/1 blocks with doubling lengths: no density
        blocks, val, n = [], True, 1
        size = 1
        while n < 10 ** 5:
            if val:
                blocks.extend(range(n, min(n + size, 10 ** 5 + 1)))
            n += size
            size *= 2
            val = not val
        A = IndexSet.explicit(blocks)
        rep = density(A, 10 ** 5)
        assert not rep.converged and rep.band > 0.1

    def test_checkpoint_schedule(self):
        cp = default_checkpoints(10 ** 6)
        assert cp[-1] == 10 ** 6 and cp[0] >= 100
        ratios = cp[1:] / cp[:-1].astype(float)
        assert ratios.max() < 1.5


class TestAkm:
    def test_naturals_closed_form(self):
        N = 200
        for m in range(1, 7):
            for k in range(1, m + 1):
                s = extract_Akm(IndexSet.naturals(), k, m, N)
                if k == m:
                    assert np.array_equal(s.elements_array,
                                          np.arange(1, N - m + 1))
                else:
                    assert len(s.elements_array) == 0

    def test_evens(self):
        s = extract_Akm(IndexSet.arithmetic(2, 2), 1, 2, 100)
        assert np.array_equal(s.elements_array, np.arange(2, 99, 2))

    def test_bad_window(self):
        with pytest.raises(ValueError):
            extract_Akm(IndexSet.naturals(), 3, 2, 100)

    def test_rotation_word_decomposition(self):
        # A_{k,m} counts must match a brute-force word count
        A = IndexSet.rotation("sqrt2-1", 0, Fraction(1, 2))
        N = 10 ** 4
        bits = A.bitmask(N)
        for k, m in [(1, 1), (1, 2), (2, 2)]:
            s = extract_Akm(A, k, m, N)
            brute = [n for n in range(1, N - m + 1)
                     if bits[n - 1] and bits[n + m - 1]
                     and bits[n - 1: n + m].sum() == k + 1]
            assert np.array_equal(s.elements_array, np.array(brute, dtype=np.int64))
        # window classes with both endpoints in A partition A up to horizon m
        counts = {(k, m): len(extract_Akm(A, k, m, N).elements_array)
                  for m in (1, 2) for k in (1, 2) if k <= m}
        in_a_with_next = sum(1 for n in range(1, N - 2 + 1)
                             if bits[n - 1] and (bits[n] or bits[n + 1]))
        assert counts[(1, 1)] + counts[(1, 2)] == in_a_with_next


class TestRegularity:
    def test_periodic_all_converged(self):
        ws = regularity_report(IndexSet.arithmetic(2, 2), 3, 10 ** 5)
        assert set(ws.verdicts().values()) == {"density-converged"}
        for r in ws.records.values():
            assert min(abs(r.trace[-1] - 0.0), abs(r.trace[-1] - 0.5)) < 1e-4
        assert ws.all_converged

    def test_rotation_regular(self):
        ws = regularity_report(IndexSet.rotation("sqrt2-1", 0, Fraction(1, 2)),
                               4, 10 ** 5)
        assert ws.all_converged and ws.weak_evidence

    def test_adversarial_blocks_oscillating(self):
        blocks, val, n, size = [], True, 1, 1
        while n < 10 ** 5:
            if val:
                blocks.extend(range(n, min(n + size, 10 ** 5 + 1)))
            n += size
            size *= 2
            val = not val
        ws = regularity_report(IndexSet.explicit(blocks), 1, 10 ** 5)
        assert ws.records["1"].verdict == "oscillating"
        assert not ws.all_converged

    def test_word_additivity(self):
        ws = regularity_report(IndexSet.bernoulli(Fraction(1, 2), 3), 4, 10 ** 4)
        assert check_word_additivity(ws) <= 1

    def test_word_count_guard(self):
        with pytest.raises(ValueError):
            regularity_report(IndexSet.naturals(), 13, 1000)

    def test_champernowne_is_normalish(self):
        bits = champernowne_bits(10 ** 5)
        assert bits[:10].tolist() == [1, 1, 0, 1, 1, 1, 0, 0, 1, 0]
        ws = regularity_report(IndexSet.normal_word(), 2, 10 ** 5, tol=0.03)
        ones = ws.records["1"]
        assert abs(ones.trace[-1] - 0.5) < 0.1


class TestExport:
    def test_rle_roundtrip(self):
        A = IndexSet.rotation("sqrt2-1", 0, Fraction(1, 3))
        buf = io.StringIO()
        write_set(A, 200, buf, rle=True)
        buf.seek(0)
        back = read_set(buf)
        assert np.array_equal(back.elements_array, A.elements(200))

    def test_plain_roundtrip(self):
        A = IndexSet.bernoulli(Fraction(1, 4), 9)
        buf = io.StringIO()
        write_set(A, 500, buf)
        buf.seek(0)
        back = read_set(buf)
        assert np.array_equal(back.elements_array, A.elements(500))
