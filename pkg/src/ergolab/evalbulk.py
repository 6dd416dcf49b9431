"""Bulk certified evaluation: floors and fractional parts of f(n) at scale.

Three engines, picked per expression:

* rational polynomials: exact integer arithmetic;
* sums of c * t^(p/q) with rational c: exact scaled-integer brackets
  (``fixedpoint``), escalating the scale on the rare undecided point;
* everything else: a compiled mpmath pass whose working precision follows
  the magnitude, with a forward-error margin; points whose distance to an
  integer falls inside the margin are re-decided by interval arithmetic
  at escalating precision.

Floor results are certified: a returned integer is the true floor, or a
PrecisionExhaustedError names the offending index.  Fractional parts are
returned as float64 in [0,1) together with a certified absolute error
bound on the phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from mpmath import iv, mp

from .constants import CannotCertifyError, Coeff, int_nth_root
from . import expr as ex
from . import powlog as pw
from .fixedpoint import decided_floor, int_root_rational


class PrecisionExhaustedError(ArithmeticError):
    def __init__(self, n: int, what: str):
        super().__init__(f"could not certify {what} at n={n} within the precision cap")
        self.n = n


MAX_DPS = 300
MAX_SCALE_BITS = 4096


def node_count(e: ex.HardyExpr) -> int:
    return 1 + sum(node_count(a) for a in e.args)


# -- compiled evaluators -------------------------------------------------------

def compile_numpy(e: ex.HardyExpr) -> Callable[[np.ndarray], np.ndarray]:
    """float64 vectorized evaluator; for magnitude estimates and plots."""
    if isinstance(e, ex.Const):
        v = float(e.value.mpf(30))
        return lambda t: np.full_like(t, v, dtype=np.float64)
    if isinstance(e, ex.Var):
        return lambda t: t.astype(np.float64)
    if isinstance(e, (ex.Add, ex.Sub, ex.Mul, ex.Div)):
        fa = compile_numpy(e.args[0])
        fb = compile_numpy(e.args[1])
        op = {ex.Add: np.add, ex.Sub: np.subtract,
              ex.Mul: np.multiply, ex.Div: np.divide}[type(e)]
        return lambda t: op(fa(t), fb(t))
    if isinstance(e, ex.Neg):
        fa = compile_numpy(e.args[0])
        return lambda t: -fa(t)
    if isinstance(e, ex.Pow):
        fa = compile_numpy(e.args[0])
        alpha = float(e.args[1].value.mpf(30))
        return lambda t: np.power(fa(t), alpha)
    if isinstance(e, ex.Ln):
        fa = compile_numpy(e.args[0])
        return lambda t: np.log(fa(t))
    if isinstance(e, ex.Exp):
        fa = compile_numpy(e.args[0])
        return lambda t: np.exp(fa(t))
    raise ex.ExprError(f"cannot compile {type(e).__name__}")


def compile_mp(e: ex.HardyExpr, cancel_cell: list) -> Callable:
    """mpmath evaluator at the ambient precision.

    cancel_cell[0] accumulates the largest magnitude meeting an Add/Sub,
    which bounds the cancellation error of the whole evaluation.
    """
    if isinstance(e, ex.Const):
        coeff = e.value

        cache = {}

        def f_const(t):
            v = cache.get(mp.prec)
            if v is None:
                v = cache[mp.prec] = coeff.mpf(int(mp.dps) + 5)
            return v
        return f_const
    if isinstance(e, ex.Var):
        return lambda t: mp.mpf(t)
    if isinstance(e, (ex.Add, ex.Sub)):
        fa = compile_mp(e.args[0], cancel_cell)
        fb = compile_mp(e.args[1], cancel_cell)
        sign = 1 if isinstance(e, ex.Add) else -1

        def f_addsub(t):
            a = fa(t)
            b = fb(t)
            m = max(abs(a), abs(b))
            if m > cancel_cell[0]:
                cancel_cell[0] = m
            return a + b if sign == 1 else a - b
        return f_addsub
    if isinstance(e, ex.Neg):
        fa = compile_mp(e.args[0], cancel_cell)
        return lambda t: -fa(t)
    if isinstance(e, ex.Mul):
        fa = compile_mp(e.args[0], cancel_cell)
        fb = compile_mp(e.args[1], cancel_cell)
        return lambda t: fa(t) * fb(t)
    if isinstance(e, ex.Div):
        fa = compile_mp(e.args[0], cancel_cell)
        fb = compile_mp(e.args[1], cancel_cell)
        return lambda t: fa(t) / fb(t)
    if isinstance(e, ex.Pow):
        fa = compile_mp(e.args[0], cancel_cell)
        q = e.args[1].value.rational_value()
        if q is not None and q.denominator == 1:
            k = int(q)
            return lambda t: fa(t) ** k
        fb = compile_mp(e.args[1], cancel_cell)
        return lambda t: mp.power(fa(t), fb(t))
    if isinstance(e, ex.Ln):
        fa = compile_mp(e.args[0], cancel_cell)
        return lambda t: mp.ln(fa(t))
    if isinstance(e, ex.Exp):
        fa = compile_mp(e.args[0], cancel_cell)
        return lambda t: mp.exp(fa(t))
    raise ex.ExprError(f"cannot compile {type(e).__name__}")


# -- structure detection -------------------------------------------------------

@dataclass
class RootTerm:
    coeff: Coeff      # after scaling by W; rational ones are integers
    p: int
    q: int

    @property
    def exact(self) -> bool:
        return self.coeff.rational_value() is not None


@dataclass
class PowerSumForm:
    """f = (1/W) * (integer polynomial + sum of c n^(p/q) terms).

    Rational coefficients become exact integers after the W scaling;
    irrational ones are rounded to B-bit scaled integers per level, with
    the rounding tracked in the bracket width.
    """
    W: int
    poly: list   # [(int coeff, int power)]
    roots: list  # [RootTerm]


def power_sum_form(e: ex.HardyExpr) -> Optional[PowerSumForm]:
    pl = pw.extract(e)
    if pl is None or not pl:
        return None
    terms = []
    for t in pl:
        if t.b or t.g or t.a.denominator > 6:
            return None
        c = t.coeff.rational_value()
        if c is None:
            if t.a < 0:
                return None
            try:
                if t.coeff.sign() == 0:
                    continue
            except CannotCertifyError:
                return None
        terms.append((t.coeff, t.a))
    W = 1
    for c, _ in terms:
        q = c.rational_value()
        if q is not None:
            W = W * q.denominator // math.gcd(W, q.denominator)
    poly, roots = [], []
    for c, a in terms:
        q = c.rational_value()
        if q is not None and a.denominator == 1 and a >= 0:
            poly.append((int(q * W), int(a)))
        else:
            roots.append(RootTerm(c.scale(W), a.numerator, a.denominator))
    return PowerSumForm(W, poly, roots)


# -- the evaluator -------------------------------------------------------------

class BulkEvaluator:
    """Certified floors and fractional parts of one expression."""

    def __init__(self, f: ex.HardyExpr):
        self.f = f
        self.form = power_sum_form(f)
        self.n_min = max(1, f.validity_threshold)
        self._cell = [mp.mpf(0)]
        self._mp_fn = None
        self._np_fn = None
        self._opcount = node_count(f)
        self._prep: dict = {}

    def _prepared_roots(self, B: int) -> list:
        """Per-term data (A^q, p, q, negative?, rounded?) at scale B.

        A is the term coefficient times 2^B: exact for rational
        coefficients, floor of a tight enclosure otherwise.
        """
        terms = self._prep.get(B)
        if terms is None:
            terms = []
            for rt in self.form.roots:
                qv = rt.coeff.rational_value()
                if qv is not None:
                    if qv.denominator != 1:
                        raise AssertionError("rational root coefficients are integers")
                    A = abs(int(qv)) << B
                    neg, rounded = qv < 0, False
                else:
                    enc = rt.coeff.interval(int(B * 0.302) + 25)
                    old = mp.dps
                    try:
                        mp.dps = int(B * 0.302) + 35
                        mid = (mp.mpf(enc.a) + mp.mpf(enc.b)) / 2
                        if float(mp.mpf(enc.delta)) * 2.0 ** B > 0.25:
                            raise CannotCertifyError("coefficient enclosure too wide")
                        neg = mid < 0
                        A = int(mp.floor(abs(mid) * mp.mpf(2) ** B))
                    finally:
                        mp.dps = old
                    rounded = True
                terms.append((A ** rt.q, rt.p, rt.q, neg, rounded))
            self._prep[B] = terms
        return terms

    # exact bracket: value * (W 2^B) known to lie in [lo, lo + width)
    def _bracket(self, n: int, B: int) -> tuple[int, int, int]:
        n = int(n)  # keep big-int semantics; numpy ints wrap on shifts
        form = self.form
        s = 0
        for c, p in form.poly:
            s += c * n ** p
        s <<= B
        width = 1
        isqrt = math.isqrt
        for Aq, p, q, neg, rounded in self._prepared_roots(B):
            if p >= 0:
                x = Aq * n ** p
                m = isqrt(x) if q == 2 else int_nth_root(x, q)
                exact_hit = m ** q == x
            else:
                m, exact_hit = int_root_rational(Aq, n ** (-p), q)
            # |term| * scale lies in [m, m + w0): w0 = 1 for an exact
            # coefficient; a rounded A underestimates by < 1 unit, which
            # adds < n^(p/q) + 1 of slack after the root
            if rounded:
                w0 = 2 + (1 << ((p * n.bit_length() + q - 1) // q))
                if neg:
                    s -= m + w0
                    width += w0
                else:
                    s += m
                    width += w0 - 1
            elif neg:
                s -= m if exact_hit else m + 1
            else:
                s += m
        return s, width, form.W << B

    def floor_at(self, n: int) -> int:
        if n < self.n_min:
            raise ex.BelowValidityError(f"n={n} below validity threshold {self.n_min}")
        if self.form is not None:
            B = 64
            while B <= MAX_SCALE_BITS:
                lo, width, cell = self._bracket(n, B)
                ok, fl = decided_floor(lo, width, cell)
                if ok:
                    return fl
                B *= 2
            raise PrecisionExhaustedError(n, "floor")
        return self._floor_mp_point(n)

    def ge(self, n: int, k: int) -> bool:
        """Certified test f(n) >= k."""
        if self.form is not None:
            B = 64
            while B <= MAX_SCALE_BITS:
                lo, width, cell = self._bracket(n, B)
                if lo >= k * cell:
                    return True
                if lo + width <= k * cell:
                    return False
                B *= 2
            raise PrecisionExhaustedError(n, "comparison")
        dps = 30
        while dps <= MAX_DPS * 2:
            try:
                enc = ex.eval_interval(self.f, n, dps)
                if mp.mpf(enc.a) >= k:
                    return True
                if mp.mpf(enc.b) < k:
                    return False
            except CannotCertifyError:
                pass
            dps *= 2
        raise PrecisionExhaustedError(n, "comparison")

    # -- bulk floors -----------------------------------------------------------
    def floors(self, N: int, n_start: int = 1) -> np.ndarray:
        """int64 array of floor(f(n)) for n = n_start .. N inclusive."""
        n_start = max(n_start, self.n_min)
        if N < n_start:
            return np.empty(0, dtype=np.int64)
        if self.form is not None:
            return self._floors_exact(n_start, N)
        return self._floors_mp(n_start, N)

    def _floors_exact(self, n_start: int, N: int) -> np.ndarray:
        form = self.form
        out = np.empty(N - n_start + 1, dtype=np.int64)
        if not form.roots and form.W == 1:
            return self._floors_int_poly(n_start, N)
        B = 64
        for i, n in enumerate(range(n_start, N + 1)):
            lo, width, cell = self._bracket(n, B)
            ok, fl = decided_floor(lo, width, cell)
            if not ok:
                fl = self.floor_at(n)
            out[i] = fl
        return out

    def _floors_int_poly(self, n_start: int, N: int) -> np.ndarray:
        # Horner in int64 when the bound allows, else Python ints
        coeffs: dict[int, int] = {}
        for c, p in self.form.poly:
            coeffs[p] = coeffs.get(p, 0) + c
        deg = max(coeffs) if coeffs else 0
        cs = [coeffs.get(p, 0) for p in range(deg, -1, -1)]
        bound = sum(abs(c) * float(N) ** (deg - i) for i, c in enumerate(cs))
        if bound < 2 ** 62:
            n = np.arange(n_start, N + 1, dtype=np.int64)
            acc = np.zeros_like(n)
            for c in cs:
                acc = acc * n + c
            return acc
        return np.array([sum(c * n ** p for p, c in self.form.poly)
                         for n in range(n_start, N + 1)], dtype=np.int64)

    def _prepare_mp(self):
        if self._mp_fn is None:
            self._mp_fn = compile_mp(self.f, self._cell)
            self._np_fn = compile_numpy(self.f)
        return self._mp_fn

    def _segment_dps(self, a: int, b: int) -> int:
        with np.errstate(all="ignore"):
            pts = np.array([a, (a + b) // 2, b], dtype=np.float64)
            vals = np.abs(self._np_fn(pts))
        m = float(np.nanmax(vals))
        digits = 1 if not math.isfinite(m) or m < 10 else int(math.log10(m)) + 1
        return max(24, digits + 14)

    def _floor_mp_point(self, n: int, dps_hint: int = 40) -> int:
        dps = dps_hint
        while dps <= MAX_DPS:
            try:
                enc = ex.eval_interval(self.f, n, dps)
                fa = int(mp.floor(mp.mpf(enc.a)))
                fb = int(mp.floor(mp.mpf(enc.b)))
                if fa == fb:
                    return fa
            except CannotCertifyError:
                pass
            dps *= 2
        raise PrecisionExhaustedError(n, "floor")

    def _floors_mp(self, n_start: int, N: int) -> np.ndarray:
        fn = self._prepare_mp()
        out = np.empty(N - n_start + 1, dtype=np.int64)
        seg_a = n_start
        idx = 0
        while seg_a <= N:
            seg_b = min(N, seg_a * 2)
            dps = self._segment_dps(seg_a, seg_b)
            old = mp.dps
            try:
                mp.dps = dps
                eps = mp.mpf(2) ** (4 + math.ceil(math.log2(self._opcount + 1)) - mp.prec)
                half = mp.mpf("0.5")
                for n in range(seg_a, seg_b + 1):
                    self._cell[0] = mp.mpf(0)
                    v = fn(n)
                    fl = mp.floor(v)
                    frac = v - fl
                    margin = (abs(v) + self._cell[0]) * eps
                    if frac < margin or frac > 1 - margin:
                        out[idx] = self._floor_mp_point(n, 2 * dps)
                    else:
                        out[idx] = int(fl)
                    idx += 1
            finally:
                mp.dps = old
            seg_a = seg_b + 1
        return out

    # -- bulk fractional parts ---------------------------------------------------
    def fracs(self, N: int, n_start: int = 1, err_target: float = 1e-9,
              offset: int = 0) -> tuple[np.ndarray, float]:
        """(float64 array of frac(f(n + offset)) for n = n_start..N, error bound)."""
        n_start2 = max(n_start, self.n_min - offset)
        if N < n_start2:
            return np.empty(0, dtype=np.float64), 0.0
        if n_start2 > n_start:
            head = np.zeros(n_start2 - n_start, dtype=np.float64)
            tail, err = self.fracs(N, n_start2, err_target, offset)
            return np.concatenate([head, tail]), err
        if self.form is not None:
            return self._fracs_exact(n_start, N, err_target, offset)
        return self._fracs_mp(n_start, N, err_target, offset)

    def _fracs_exact(self, n_start: int, N: int, err_target: float,
                     offset: int) -> tuple[np.ndarray, float]:
        form = self.form
        slack_bits = 0
        for rt in form.roots:
            if rt.coeff.rational_value() is None:
                bits = (rt.p * int(N + offset).bit_length() + rt.q - 1) // rt.q + 2
                slack_bits = max(slack_bits, bits)
        B = max(64, slack_bits + int(-math.log2(err_target)) + 16)
        out = np.empty(N - n_start + 1, dtype=np.float64)
        cell = form.W << B
        scale = float(cell)
        max_width = 1
        for i, n in enumerate(range(n_start, N + 1)):
            lo, width, _ = self._bracket(n + offset, B)
            out[i] = (lo % cell) / scale
            if width > max_width:
                max_width = width
        # circular distance bound: the bracket width over the cell size
        err = max_width / scale + 1e-16
        return out, err

    def _fracs_mp(self, n_start: int, N: int, err_target: float,
                  offset: int) -> tuple[np.ndarray, float]:
        fn = self._prepare_mp()
        out = np.empty(N - n_start + 1, dtype=np.float64)
        worst, worst_n = 0.0, n_start
        seg_a = n_start
        idx = 0
        extra = max(0, int(-math.log10(err_target)) - 9)
        while seg_a <= N:
            seg_b = min(N, seg_a * 2)
            dps = self._segment_dps(seg_a + offset, seg_b + offset) + extra
            old = mp.dps
            try:
                mp.dps = dps
                eps = mp.mpf(2) ** (4 + math.ceil(math.log2(self._opcount + 1)) - mp.prec)
                for n in range(seg_a, seg_b + 1):
                    self._cell[0] = mp.mpf(0)
                    v = fn(n + offset)
                    out[idx] = float(v - mp.floor(v))
                    bound = float((abs(v) + self._cell[0]) * eps)
                    if bound > worst:
                        worst, worst_n = bound, n
                    idx += 1
            finally:
                mp.dps = old
            seg_a = seg_b + 1
        if worst > err_target:
            raise PrecisionExhaustedError(worst_n, f"phase to {err_target:g}")
        out = np.mod(out, 1.0)
        return out, worst + 1e-16
