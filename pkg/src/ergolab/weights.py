"""Unimodular weight sequences e(g(n)) and their distribution properties.

The phase function g is a growth expression or a generalized polynomial
q(n) + sum_i alpha_i * floor(p_i(n)).  Weights are built by certified
reduction of g(n) mod 1.

Distribution machinery:

* Weyl sums N^-1 sum e(m g(n)) with per-m traces and verdicts;
* the equidistributed / dense / Cesaro trichotomy for subpolynomial
  growth, decided symbolically by splitting off the best rational
  polynomial part and comparing the residual against ln t;
* the full interval-regularity property, decided through its two
  halves: equidistribution, and Cesaro convergence of
  e(m_0 g(n) + ... + m_k g(n+k)) for every integer tuple.  Symbolic
  routes (strict power-log windows, power sums, rational polynomials,
  bounded residuals) are tried first; anything outside them is tested
  empirically and labeled as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from mpmath import mp

from .constants import CannotCertifyError, Coeff
from . import expr as ex
from . import powlog as pw
from .evalbulk import BulkEvaluator
from .index_sets import default_checkpoints
from .traces import (DEFAULT_TOL_CONVERGE, DEFAULT_TOL_DIVERGE, ScalarTrace,
                     running_mean_trace)


class UnsupportedPhaseError(ValueError):
    """The phase function is outside the symbolic class."""


# -- scaled multiples of a constant phase ---------------------------------------

def phase_of_multiples(theta, a: np.ndarray, B: int = 192) -> tuple[np.ndarray, float]:
    """frac(theta * a_n) for an integer array, certified.

    Rational theta is exact; otherwise theta is rounded once to B bits
    and the error |a_n| * 2^-B is reported.
    """
    if isinstance(theta, ex.HardyExpr):
        if not isinstance(theta, ex.Const):
            raise ValueError("phase multiplier must be a constant")
        theta = theta.value
    if not isinstance(theta, Coeff):
        theta = Coeff.rational(Fraction(theta))
    a = np.asarray(a)
    if a.size and int(a.min()) < 0:
        raise ValueError("exponents must be non-negative")
    q = theta.rational_value()
    if q is not None:
        den = q.denominator
        rem = np.mod(np.mod(a.astype(np.int64), den) * (q.numerator % den), den)
        return rem.astype(np.float64) / den, 0.0
    enc = theta.interval(int(B * 0.302) + 20)
    old = mp.dps
    try:
        mp.dps = int(B * 0.302) + 30
        mid = (mp.mpf(enc.a) + mp.mpf(enc.b)) / 2
        A = int(mp.floor(mid * mp.mpf(2) ** B))
    finally:
        mp.dps = old
    mask = (1 << B) - 1
    scale = float(1 << B)
    out = np.empty(a.size, dtype=np.float64)
    flat = a.ravel()
    for i in range(flat.size):
        out[i] = ((int(flat[i]) * A) & mask) / scale
    amax = int(abs(flat).max()) if flat.size else 0
    return out.reshape(a.shape), (amax + 2) * 2.0 ** (-B)


# -- weight specs -----------------------------------------------------------------

@dataclass(frozen=True)
class GeneralizedPoly:
    """q(n) + sum alpha_i * floor(p_i(n)) with rational polynomials q, p_i."""
    q: ex.HardyExpr
    terms: tuple  # ((alpha: Coeff, p: HardyExpr), ...)

    def spec_string(self) -> str:
        parts = [f"gp:{ex.to_string(self.q)}"]
        for alpha, p in self.terms:
            c = ex.Const(alpha)
            parts.append(f"{ex.to_string(c)}*[{ex.to_string(p)}]")
        return "+".join(parts)


@dataclass(frozen=True)
class WeightSpec:
    """A phase function defining unimodular weights e(g(n))."""
    kind: str  # 'trivial' | 'hardy' | 'gpoly'
    g: Optional[ex.HardyExpr] = None
    gp: Optional[GeneralizedPoly] = None

    @staticmethod
    def trivial() -> "WeightSpec":
        return WeightSpec("trivial")

    @staticmethod
    def hardy(g) -> "WeightSpec":
        return WeightSpec("hardy", g=ex.parse(g) if isinstance(g, str) else g)

    @staticmethod
    def gpoly(q, terms) -> "WeightSpec":
        q = ex.parse(q) if isinstance(q, str) else q
        tt = []
        for alpha, p in terms:
            if isinstance(alpha, str):
                alpha = ex.parse(alpha)
            if isinstance(alpha, ex.HardyExpr):
                alpha = alpha.value
            tt.append((alpha, ex.parse(p) if isinstance(p, str) else p))
        return WeightSpec("gpoly", gp=GeneralizedPoly(q, tuple(tt)))

    def spec_string(self) -> str:
        if self.kind == "trivial":
            return "one"
        if self.kind == "hardy":
            return ex.to_string(self.g)
        return self.gp.spec_string()

    @staticmethod
    def parse(s: str) -> "WeightSpec":
        s = s.strip()
        if s in ("one", "1", "trivial"):
            return WeightSpec.trivial()
        if s.startswith("gp:"):
            body = s[3:]
            segments = _split_gp(body)
            q = segments[0]
            terms = []
            for seg in segments[1:]:
                alpha_s, _, p_s = seg.partition("*[")
                if not p_s.endswith("]"):
                    raise ValueError(f"bad generalized polynomial term {seg!r}")
                terms.append((alpha_s, p_s[:-1]))
            return WeightSpec.gpoly(q, terms)
        return WeightSpec.hardy(s)

    # ---- evaluation
    def phases(self, N: int, offset: int = 0) -> tuple[np.ndarray, float]:
        """frac(g(n + offset)) for n = 1..N with a certified error bound."""
        if self.kind == "trivial":
            return np.zeros(N, dtype=np.float64), 0.0
        if self.kind == "hardy":
            ev = _evaluator(self.g)
            return ev.fracs(N, offset=offset)
        total = np.zeros(N, dtype=np.float64)
        err = 0.0
        qv = _evaluator(self.gp.q)
        fr, e = qv.fracs(N, offset=offset)
        total += fr
        err += e
        for alpha, p in self.gp.terms:
            floors = _evaluator(p).floors(N + offset)
            fr, e = phase_of_multiples(alpha, floors[offset:])
            if fr.size < N:
                fr = np.concatenate([np.zeros(N - fr.size), fr])
            total += fr
            err += e
        return np.mod(total, 1.0), err

    def weights(self, N: int, offset: int = 0) -> tuple[np.ndarray, float]:
        """c_n = e(g(n + offset)) as complex128, plus the phase error bound."""
        if self.kind == "trivial":
            return np.ones(N, dtype=np.complex128), 0.0
        fr, err = self.phases(N, offset)
        return np.exp(2j * np.pi * fr), float(2 * np.pi * err)


def _split_gp(body: str) -> list:
    """Split 'q+alpha*[p]+...' on '+' at bracket depth zero."""
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "+" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


_eval_cache: dict = {}


def _evaluator(g: ex.HardyExpr) -> BulkEvaluator:
    key = ex.to_string(g)
    if key not in _eval_cache:
        _eval_cache[key] = BulkEvaluator(g)
    return _eval_cache[key]


# -- Weyl sums --------------------------------------------------------------------

@dataclass
class WeylReport:
    m_values: list
    traces: dict                 # m -> ScalarTrace
    per_m_pass: dict             # m -> bool
    overall_pass: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "m_values": self.m_values,
            "per_m": {str(m): {"final_abs": self.traces[m].final_abs,
                               "oscillation": self.traces[m].oscillation(),
                               "pass": self.per_m_pass[m]} for m in self.m_values},
            "overall_pass": self.overall_pass,
            "tol": self.tol,
        }


def weyl_test(spec: Union[WeightSpec, ex.HardyExpr, str], N: int, m_max: int = 5,
              tol: float = DEFAULT_TOL_CONVERGE,
              checkpoints: Optional[np.ndarray] = None) -> WeylReport:
    """Traces of |N^-1 sum e(m g(n))| for 1 <= m <= m_max."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    spec = _as_weight_spec(spec)
    if checkpoints is None:
        checkpoints = default_checkpoints(N)
    fr, err = spec.phases(N)
    traces, ok = {}, {}
    for m in range(1, m_max + 1):
        z = np.exp(2j * np.pi * m * fr)
        tr = running_mean_trace(z, checkpoints, err * m, {"m": m})
        mask = np.asarray(checkpoints) >= N / 10
        ok[m] = bool(tr.final_abs < tol and np.abs(tr.values[mask]).max() < 2 * tol)
        traces[m] = tr
    return WeylReport(list(range(1, m_max + 1)), traces, ok, all(ok.values()), tol)


def _as_weight_spec(spec) -> WeightSpec:
    if isinstance(spec, WeightSpec):
        return spec
    if isinstance(spec, str):
        return WeightSpec.parse(spec)
    return WeightSpec.hardy(spec)


def weyl_geometric_bound(theta: Coeff, m: int, N: int) -> float:
    """2 / (N |1 - e(m theta)|): the exact bound for linear phases."""
    old = mp.dps
    try:
        mp.dps = 30
        val = theta.mpf(30) * m
        denom = abs(1 - mp.e ** (2j * mp.pi * val))
        return float(2 / (N * denom))
    finally:
        mp.dps = old


# -- trichotomy --------------------------------------------------------------------

EQUIDISTRIBUTED = "equidistributed"
DENSE_NOT_EQUIDISTRIBUTED = "dense-not-equidistributed"
DEGENERATE = "degenerate"


@dataclass
class Trichotomy:
    verdict: str                  # one of the three above
    equidistributed: bool
    dense: bool
    cesaro: str                   # 'converges-to-0' | 'converges' | 'diverges'
    witness_poly: Optional[list]  # ascending rational coefficients, when degenerate
    residual_order: Optional[tuple]
    route: str = "symbolic"

    @property
    def diverges(self) -> bool:
        return self.cesaro == "diverges"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "equidistributed": self.equidistributed,
            "dense": self.dense,
            "cesaro": self.cesaro,
            "witness_poly": [str(c) for c in self.witness_poly] if self.witness_poly else None,
            "residual_order": [str(x) for x in self.residual_order] if self.residual_order else None,
            "route": self.route,
        }


def _trichotomy_powlog(pl: pw.PowLog) -> Trichotomy:
    """Classify e(g(n)) by splitting off the best rational polynomial."""
    poly, resid = pw.rational_polynomial_part(pl)
    witness = [t for t in poly]
    witness_coeffs = None
    if witness is not None:
        deg = max((int(t.a) for t in poly), default=0)
        witness_coeffs = [Fraction(0)] * (deg + 1)
        for t in poly:
            witness_coeffs[int(t.a)] = t.coeff.rational_value()
    if not resid:
        return Trichotomy(DEGENERATE, False, False, "converges", witness_coeffs, None)
    order = pw.growth_order(resid)
    if order <= pw.ZERO_ORDER:
        return Trichotomy(DEGENERATE, False, False, "converges", witness_coeffs, order)
    if order > pw.LOG_ORDER:
        return Trichotomy(EQUIDISTRIBUTED, True, True, "converges-to-0", None, order)
    return Trichotomy(DENSE_NOT_EQUIDISTRIBUTED, False, True, "diverges", None, order)


def boshernitzan_trichotomy(g: Union[ex.HardyExpr, str], N: Optional[int] = None,
                            tol: float = DEFAULT_TOL_CONVERGE) -> Trichotomy:
    """Equidistribution / density / Cesaro classification of e(g(n)).

    Symbolic on the power-log class; with N given, falls back to an
    empirical verdict (marked as such) outside it.
    """
    g = ex.parse(g) if isinstance(g, str) else g
    pl = pw.extract(g)
    if pl is not None and not ex.contains_float_constants(g):
        try:
            return _trichotomy_powlog(pl)
        except CannotCertifyError:
            pass
    if N is None:
        raise UnsupportedPhaseError(
            "phase outside the symbolic class; pass N for an empirical verdict")
    return _trichotomy_empirical(g, N, tol)


def _trichotomy_empirical(g: ex.HardyExpr, N: int, tol: float) -> Trichotomy:
    spec = WeightSpec.hardy(g)
    rep = weyl_test(spec, N, m_max=3, tol=tol)
    fr, err = spec.phases(N)
    tr = running_mean_trace(np.exp(2j * np.pi * fr), default_checkpoints(N), err)
    verdict_c = tr.verdict(tol, DEFAULT_TOL_DIVERGE)
    if rep.overall_pass:
        return Trichotomy(EQUIDISTRIBUTED, True, True, "converges-to-0",
                          None, None, route="empirical")
    if verdict_c in ("converges-to-0", "converges-nonzero"):
        return Trichotomy(DEGENERATE, False, False, "converges", None, None,
                          route="empirical")
    return Trichotomy(DENSE_NOT_EQUIDISTRIBUTED, False, True, "diverges",
                      None, None, route="empirical")


# -- property (Q) -------------------------------------------------------------------

def q2_tuples(k_max: int, m_bound: int) -> list:
    """Integer tuples (m_0..m_k), graded by (k, sum |m_j|), conjugates and
    shift-equivalent tuples removed."""
    out = []
    for k in range(0, k_max + 1):
        tuples = []

        def rec(prefix):
            if len(prefix) == k + 1:
                tuples.append(tuple(prefix))
                return
            used = sum(abs(v) for v in prefix)
            for v in range(-(m_bound - used), m_bound - used + 1):
                rec(prefix + [v])

        rec([])
        for m in tuples:
            if all(v == 0 for v in m):
                continue
            if m[0] == 0 or (k >= 1 and m[-1] == 0):
                continue
            first = next(v for v in m if v != 0)
            if first < 0:
                continue  # conjugate already enumerated
            out.append(m)
    out.sort(key=lambda m: (len(m) - 1, sum(abs(v) for v in m), m))
    return out


def tuple_power_sums(m: Sequence[int], i_max: int) -> list:
    """s_i = sum_j m_j j^i for i = 0..i_max, with 0^0 = 1."""
    return [sum(mj * (j ** i if not (j == 0 and i == 0) else 1)
                for j, mj in enumerate(m)) for i in range(i_max + 1)]


def tuple_combination(pl: pw.PowLog, m: Sequence[int],
                      max_order: int = 16) -> pw.PowLog:
    """Power-log germ h with m_0 g(t) + ... + m_k g(t+k) = h(t) + o(1)."""
    derivs = [pl]
    while not pw.tends_to_zero(derivs[-1]):
        derivs.append(pw.derivative(derivs[-1]))
        if len(derivs) > max_order:
            raise UnsupportedPhaseError("derivative chain does not vanish")
    i0 = len(derivs) - 1  # first index whose derivative tends to zero
    s = tuple_power_sums(m, max(i0 - 1, 0))
    h: pw.PowLog = ()
    for i in range(i0):
        h = pw.plus(h, pw.scale(derivs[i], Fraction(s[i], math.factorial(i))))
    return h


def window_witness(pl: pw.PowLog) -> Optional[tuple]:
    """For t^l strictly below g at most t^l ln t: the l-th finite
    difference tuple, whose combination lands in the divergence window."""
    order = pw.growth_order(pl)
    a = order[0]
    if a.denominator != 1 or a < 1:
        return None
    l = int(a)
    lo = (Fraction(l), Fraction(0), Fraction(0))
    hi = (Fraction(l), Fraction(1), Fraction(0))
    if not (lo < order <= hi):
        return None
    return tuple((-1) ** (l - j) * math.comb(l, j) for j in range(l + 1))


@dataclass
class TupleVerdict:
    m: tuple
    verdict: str        # 'converges' | 'converges-to-0' | 'diverges' | 'inconclusive'
    method: str         # 'symbolic' | 'empirical'
    oscillation: Optional[float] = None

    def to_dict(self) -> dict:
        return {"tuple": list(self.m), "verdict": self.verdict,
                "method": self.method, "oscillation": self.oscillation}


@dataclass
class QVerdict:
    overall: str        # 'Q-holds' | 'Q-fails' | 'empirical-only'
    route: str
    q1: dict
    q2pp: list          # [TupleVerdict]
    witness: Optional[tuple]
    averages_converge_by_other_means: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "route": self.route,
            "q1": self.q1,
            "q2pp": [t.to_dict() for t in self.q2pp],
            "witness": list(self.witness) if self.witness else None,
            "averages_converge_by_other_means": self.averages_converge_by_other_means,
            "notes": self.notes,
        }


def tuple_trace(spec: WeightSpec, m: Sequence[int], N: int,
                checkpoints: Optional[np.ndarray] = None) -> ScalarTrace:
    """Cesaro trace of e(m_0 g(n) + ... + m_k g(n+k))."""
    if checkpoints is None:
        checkpoints = default_checkpoints(N)
    total = np.zeros(N, dtype=np.float64)
    err = 0.0
    for j, mj in enumerate(m):
        if mj == 0:
            continue
        fr, e = spec.phases(N, offset=j)
        total += mj * fr
        err += abs(mj) * e
    z = np.exp(2j * np.pi * np.mod(total, 1.0))
    return running_mean_trace(z, checkpoints, err, {"tuple": tuple(m)})


def q_test(spec: Union[WeightSpec, ex.HardyExpr, str], k_max: int = 2,
           m_bound: int = 2, N: Optional[int] = None,
           tol_converge: float = DEFAULT_TOL_CONVERGE,
           tol_diverge: float = DEFAULT_TOL_DIVERGE,
           empirical_traces: bool = False) -> QVerdict:
    """Interval-regularity verdict via equidistribution plus tuple averages.

    Symbolic routes fire on the power-log class; outside it (or when
    coefficient rationality cannot be certified) every enumerated tuple
    is tested empirically at horizon N.  empirical_traces forces the
    tuple traces to run even when a symbolic route already decides.
    """
    if k_max > 4 or m_bound > 3:
        raise ValueError("combinatorial guard: k_max <= 4 and m_bound <= 3")
    spec = _as_weight_spec(spec)
    tuples = q2_tuples(k_max, m_bound)
    if spec.kind == "hardy" and not ex.contains_float_constants(spec.g):
        pl = pw.extract(spec.g)
        if pl is not None:
            try:
                return _q_test_symbolic(spec, pl, tuples, N, tol_converge,
                                        tol_diverge, empirical_traces)
            except CannotCertifyError:
                pass
    if N is None:
        raise UnsupportedPhaseError(
            "phase outside the symbolic class; pass N for empirical testing")
    return _q_test_empirical(spec, tuples, N, tol_converge, tol_diverge)


def _symbolic_tuple_verdict(pl: pw.PowLog, m: Sequence[int]) -> str:
    h = tuple_combination(pl, m)
    if not h:
        return "converges"
    tri = _trichotomy_powlog(h)
    return tri.cesaro


def _signed_for_growth(pl: pw.PowLog) -> pw.PowLog:
    """Flip sign so the leading coefficient is positive; e(g) and e(-g)
    have conjugate weights, so every (Q)-style verdict transfers."""
    return pl if pw.eventually_positive(pl) else pw.scale(pl, -1)


def _ml_order(pl: pw.PowLog, l_max: int = 8) -> Optional[int]:
    o = pw.growth_order(pl)
    for l in range(0, l_max + 1):
        lo = (Fraction(l), Fraction(1), Fraction(0))
        hi = (Fraction(l + 1), Fraction(0), Fraction(0))
        if lo < o < hi:
            return l
    return None


def _q_test_symbolic(spec: WeightSpec, pl: pw.PowLog, tuples: list,
                     N: Optional[int], tol_c: float, tol_d: float,
                     run_traces: bool) -> QVerdict:
    tri = _trichotomy_powlog(pl)
    notes = []

    def tuple_verdicts(method="symbolic"):
        out = []
        for m in tuples:
            v = _symbolic_tuple_verdict(pl, m)
            osc = None
            if run_traces and N is not None:
                osc = tuple_trace(spec, m, N).oscillation()
            out.append(TupleVerdict(tuple(m), v, method, osc))
        return out

    if not tri.equidistributed:
        q1 = {"status": "fail", "reason": tri.verdict, "route": "symbolic"}
        if tri.verdict == DEGENERATE:
            notes.append("weights are eventually periodic; averages converge "
                         "by passing to arithmetic progressions")
            return QVerdict("Q-fails", "rational-polynomial", q1, [], None,
                            averages_converge_by_other_means=True, notes=notes)
        return QVerdict("Q-fails", "not-equidistributed", q1, [], None, notes=notes)

    q1 = {"status": "pass", "reason": "equidistributed", "route": "symbolic"}
    signed = _signed_for_growth(pl)
    ml = _ml_order(signed)
    if ml is not None:
        return QVerdict("Q-holds", "Ml", q1, tuple_verdicts(), None,
                        notes=[f"strict window l={ml} certifies every tuple"])
    wit = window_witness(signed)
    if wit is not None and _symbolic_tuple_verdict(pl, wit) == "diverges":
        q2 = [TupleVerdict(wit, "diverges", "symbolic",
                           tuple_trace(spec, wit, N).oscillation() if N else None)]
        return QVerdict("Q-fails", "window-witness", q1, q2, wit)
    verdicts = tuple_verdicts()
    bad = [t for t in verdicts if t.verdict == "diverges"]
    if bad:
        return QVerdict("Q-fails", "tuple-witness", q1, verdicts, bad[0].m)
    pure_powers = all(t.b == 0 and t.g == 0 for t in pl)
    route = "power-sum" if pure_powers else "remark-case-3"
    if not pure_powers:
        notes.append("per-tuple symbolic certificates on the enumerated grid")
    return QVerdict("Q-holds", route, q1, verdicts, None, notes=notes)


def _q_test_empirical(spec: WeightSpec, tuples: list, N: int,
                      tol_c: float, tol_d: float) -> QVerdict:
    rep = weyl_test(spec, N, m_max=3, tol=tol_c)
    q1 = {"status": "pass" if rep.overall_pass else "fail",
          "route": "empirical", "weyl": rep.to_dict()}
    verdicts = []
    witness = None
    for m in tuples:
        tr = tuple_trace(spec, m, N)
        v = tr.verdict(tol_c, tol_d)
        if v == "converges-nonzero":
            v = "converges"
        elif v == "converges-to-0":
            v = "converges"
        verdicts.append(TupleVerdict(tuple(m), v, "empirical", tr.oscillation()))
        if v == "diverges" and witness is None:
            witness = tuple(m)
    if witness is not None:
        return QVerdict("Q-fails", "empirical", q1, verdicts, witness)
    if not rep.overall_pass:
        return QVerdict("Q-fails", "empirical", q1, verdicts, None)
    if all(t.verdict == "converges" for t in verdicts):
        return QVerdict("empirical-only", "empirical", q1, verdicts, None)
    return QVerdict("empirical-only", "empirical", q1, verdicts, None,
                    notes=["some tuples inconclusive at this horizon"])


# -- weighted scalar averages --------------------------------------------------------

def scalar_weighted_average(spec: Union[WeightSpec, ex.HardyExpr, str],
                            a: np.ndarray, lam, N: Optional[int] = None,
                            checkpoints: Optional[np.ndarray] = None) -> ScalarTrace:
    """Trace of N^-1 sum c_n lambda^(a_n).

    lam may be a unit complex number or a constant expression phase theta
    meaning lambda = e(theta); the symbolic form keeps lambda^(a_n)
    accurate for exponents of any size.
    """
    spec = _as_weight_spec(spec)
    a = np.asarray(a, dtype=np.int64)
    if N is None:
        N = len(a)
    if N > len(a):
        raise ValueError("N exceeds the generated sequence length")
    a = a[:N]
    if checkpoints is None:
        checkpoints = default_checkpoints(N)
    c, err = spec.weights(N)
    if isinstance(lam, (complex, float)):
        lam = complex(lam)
        if abs(abs(lam) - 1) > 1e-9:
            raise ValueError("lambda must be unimodular")
        theta_float = math.atan2(lam.imag, lam.real) / (2 * math.pi)
        powers = np.exp(2j * np.pi * np.mod(theta_float * a.astype(np.float64), 1.0))
        err += 1e-6
    else:
        fr, e2 = phase_of_multiples(lam, a)
        powers = np.exp(2j * np.pi * fr)
        err += 2 * math.pi * e2
    return running_mean_trace(c * powers, checkpoints, err,
                              {"weights": spec.spec_string()})
