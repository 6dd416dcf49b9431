"""Growth classification of eventually positive germs.

Two families are certified:

* P_m: f and its first m derivatives are eventually strictly positive,
  f^(m-1)/(t f^(m)) has bounded limsup, and the tail supremum ratio of
  f^(m) is bounded.  Least such m is reported.
* M_l: germs strictly between t^l ln t and t^(l+1) in growth.

For germs in power-log normal form all conditions are decided exactly by
leading-order arithmetic.  Outside that class the conditions are sampled
at log-spaced points t = t0 * 2^j up to a horizon; "bounded" then means
the running maximum over the second half of the samples grows by less
than one percent per doubling, and the evidence records the observed
bounds so the verdict is auditable.  Superpolynomial inputs are refused
with an explicit error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .constants import CannotCertifyError
from . import expr as ex
from . import powlog as pw


class SuperpolynomialError(ValueError):
    """The germ grows faster than every power of t."""


class NotEventuallyPositiveError(ValueError):
    """The germ is not certified eventually positive."""


@dataclass(frozen=True)
class Evidence:
    condition: str
    horizon: object
    observed: str


@dataclass
class GrowthClass:
    verdict: str  # 'Pm' | 'PmPrime' | 'Ml' | 'RationalPolyResidue' | 'Unclassified'
    order: Optional[int] = None
    route: str = "symbolic"
    evidence: list = field(default_factory=list)

    def is_pm(self, m: Optional[int] = None) -> bool:
        return self.verdict == "Pm" and (m is None or self.order == m)

    def is_ml(self, l: Optional[int] = None) -> bool:
        return self.verdict == "Ml" and (l is None or self.order == l)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "order": self.order,
            "route": self.route,
            "evidence": [
                {"condition": e.condition, "horizon": str(e.horizon), "observed": e.observed}
                for e in self.evidence
            ],
        }


GROWTH_RATE_TOL = 1.01  # running max may grow < 1% per doubling


def _order_str(o) -> str:
    return "(" + ", ".join(str(x) for x in o) + ")"


def _check_superpolynomial(f: ex.HardyExpr) -> None:
    """Refuse germs with a live exp of an unbounded positive argument."""
    for node in _walk(f):
        if isinstance(node, ex.Exp) and not node.args[0].is_constant():
            arg_pl = pw.extract(node.args[0])
            if arg_pl is not None and pw.tends_to_infinity(arg_pl):
                try:
                    if pw.eventually_positive(arg_pl):
                        raise SuperpolynomialError(
                            f"{node} grows superpolynomially; classification "
                            "covers subpolynomial growth only")
                except CannotCertifyError:
                    pass


def _walk(e: ex.HardyExpr):
    yield e
    for a in e.args:
        yield from _walk(a)


def _sample_points(f: ex.HardyExpr, horizon: float) -> list:
    t0 = max(2, f.validity_threshold)
    pts = []
    t = t0
    while t <= horizon:
        pts.append(t)
        t *= 2
    if len(pts) < 8:
        raise ValueError("horizon leaves fewer than 8 sample points")
    return pts


def _sample_superpoly_guard(f: ex.HardyExpr, pts: list) -> None:
    vals = []
    for t in pts:
        try:
            v, _ = ex.evaluate(f, t, dps=30)
            vals.append(float(v))
        except (OverflowError, ex.EvalOverflowError):
            raise SuperpolynomialError("overflow while sampling; growth is superpolynomial")
    ratios = [vals[j + 1] / vals[j] for j in range(len(vals) - 1) if vals[j] > 0]
    if len(ratios) >= 4 and ratios[-1] > 2.0 ** 64 and ratios[-1] > 4 * ratios[-2]:
        raise SuperpolynomialError("doubling ratio explodes; growth is superpolynomial")


def _running_max_bounded(values: list) -> tuple[bool, float]:
    """1 percent per doubling rule on the second half; returns (ok, bound)."""
    half = values[len(values) // 2:]
    if not half:
        return False, math.inf
    running = -math.inf
    ok = True
    prev = None
    for v in half:
        new = max(running, v)
        if prev is not None and prev > 0 and new > prev * GROWTH_RATE_TOL:
            ok = False
        prev = new
        running = new
    return ok, running


# -- P_m ----------------------------------------------------------------------

def classify_Pm(f: ex.HardyExpr, m_max: int = 4, horizon: float = 2.0 ** 40) -> GrowthClass:
    """Least m for which the three growth conditions are certified."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    _check_superpolynomial(f)
    pl = pw.extract(f)
    if pl is not None:
        try:
            return _classify_pm_symbolic(pl, m_max)
        except CannotCertifyError:
            pass
    return _classify_pm_numeric(f, m_max, horizon)


def _classify_pm_symbolic(pl: pw.PowLog, m_max: int) -> GrowthClass:
    if not pl or not pw.eventually_positive(pl):
        raise NotEventuallyPositiveError("germ is not eventually positive")
    ders = [pl]
    for _ in range(m_max):
        ders.append(pw.derivative(ders[-1]))
    evidence = []
    for m in range(1, m_max + 1):
        ok = True
        for i in range(m + 1):
            if not ders[i] or not pw.eventually_positive(ders[i]):
                evidence.append(Evidence(
                    "derivatives-positive", "symbolic",
                    f"m={m}: derivative {i} not eventually positive"))
                ok = False
                break
        if not ok:
            continue
        o_num = pw.growth_order(ders[m - 1])
        o_den = pw.growth_order(ders[m])
        shifted = (o_den[0] + 1, o_den[1], o_den[2])
        if not (o_num <= shifted):
            evidence.append(Evidence(
                "ratio-bounded", "symbolic",
                f"m={m}: order {_order_str(o_num)} exceeds t*f^({m}) order {_order_str(shifted)}"))
            continue
        if not (o_den <= pw.ZERO_ORDER):
            evidence.append(Evidence(
                "tail-sup-bounded", "symbolic",
                f"m={m}: f^({m}) grows, order {_order_str(o_den)}"))
            continue
        evidence.append(Evidence("derivatives-positive", "symbolic", f"m={m}: all positive"))
        evidence.append(Evidence(
            "ratio-bounded", "symbolic",
            f"m={m}: order {_order_str(o_num)} <= {_order_str(shifted)}"))
        evidence.append(Evidence(
            "tail-sup-bounded", "symbolic",
            f"m={m}: order {_order_str(o_den)} <= (0, 0, 0)"))
        return GrowthClass("Pm", m, "symbolic", evidence)
    return GrowthClass("Unclassified", None, "symbolic", evidence)


def _classify_pm_numeric(f: ex.HardyExpr, m_max: int, horizon: float) -> GrowthClass:
    pts = _sample_points(f, horizon)
    _sample_superpoly_guard(f, pts)
    evidence = []
    ders = [f]
    for _ in range(m_max):
        ders.append(ders[-1].diff())

    def samples(expr):
        out = []
        for t in pts:
            v, err = ex.evaluate(expr, t, dps=40, check_validity=False)
            out.append((float(v), err))
        return out

    cache = {}

    def sampled(i):
        if i not in cache:
            cache[i] = samples(ders[i])
        return cache[i]

    for m in range(1, m_max + 1):
        tail = len(pts) // 2
        ok = True
        for i in range(m + 1):
            vals = sampled(i)
            if not all(v - e > 0 for v, e in vals[tail:]):
                evidence.append(Evidence(
                    "derivatives-positive", horizon,
                    f"m={m}: derivative {i} not positive on sampled tail"))
                ok = False
                break
        if not ok:
            continue
        num = sampled(m - 1)
        den = sampled(m)
        ratios = [n / (t * d) for (n, _), (d, _), t in zip(num, den, pts) if d != 0]
        ok_b, bound_b = _running_max_bounded(ratios)
        evidence.append(Evidence(
            "ratio-bounded", horizon,
            f"m={m}: running max {bound_b:.6g}" + ("" if ok_b else " (growing)")))
        if not ok_b:
            continue
        # horizon-indexed proxy for sup_{s>=t} f^(m)(s)/f^(m)(t): the max
        # ratio over ordered sample pairs inside each growing prefix
        dvals = [v for v, _ in den if v > 0]
        stats, runmin, stat = [], math.inf, 0.0
        for v in dvals:
            runmin = min(runmin, v)
            stat = max(stat, v / runmin)
            stats.append(stat)
        ok_c, bound_c = _running_max_bounded(stats)
        evidence.append(Evidence(
            "tail-sup-bounded", horizon,
            f"m={m}: running max {bound_c:.6g}" + ("" if ok_c else " (growing)")))
        if not ok_c:
            continue
        evidence.append(Evidence(
            "derivatives-positive", horizon, f"m={m}: positive on sampled tail"))
        return GrowthClass("Pm", m, "numeric", evidence)
    return GrowthClass("Unclassified", None, "numeric", evidence)


def classify_Pm_prime(f: ex.HardyExpr, m_max: int = 4) -> GrowthClass:
    """The narrower class: t^(m-1) strictly below f, f at most t^m, plus
    the first-derivative-ratio comparability condition."""
    pl = pw.extract(f)
    if pl is None:
        return GrowthClass("Unclassified", None, "symbolic",
                           [Evidence("normal-form", "symbolic", "not extractable")])
    if not pl or not pw.eventually_positive(pl):
        raise NotEventuallyPositiveError("germ is not eventually positive")
    o = pw.growth_order(pl)
    evidence = []
    for m in range(1, m_max + 1):
        lo = (Fraction(m - 1), Fraction(0), Fraction(0))
        hi = (Fraction(m), Fraction(0), Fraction(0))
        if not (lo < o <= hi):
            continue
        dm1 = pw.nth_derivative(pl, m - 1)
        dm = pw.derivative(dm1)
        if not dm:
            continue
        o_num = pw.growth_order(dm1)
        o_den = pw.growth_order(dm)
        if o_num <= (o_den[0] + 1, o_den[1], o_den[2]):
            evidence.append(Evidence(
                "window", "symbolic",
                f"t^{m - 1} < f <= t^{m} with order {_order_str(o)}"))
            evidence.append(Evidence(
                "derivative-comparable", "symbolic",
                f"order {_order_str(o_num)} <= t*f^({m}) order"))
            return GrowthClass("PmPrime", m, "symbolic", evidence)
    return GrowthClass("Unclassified", None, "symbolic", evidence)


# -- M_l ----------------------------------------------------------------------

def classify_Ml(g: ex.HardyExpr, l_max: int = 6, horizon: float = 2.0 ** 40) -> GrowthClass:
    """The unique l with t^l ln t strictly below g strictly below t^(l+1)."""
    pl = pw.extract(g)
    if pl is not None:
        if not pl or not pw.eventually_positive(pl):
            raise NotEventuallyPositiveError("germ is not eventually positive")
        o = pw.growth_order(pl)
        for l in range(0, l_max + 1):
            lo = (Fraction(l), Fraction(1), Fraction(0))
            hi = (Fraction(l + 1), Fraction(0), Fraction(0))
            if lo < o < hi:
                return GrowthClass("Ml", l, "symbolic", [Evidence(
                    "strict-window", "symbolic",
                    f"t^{l}*ln(t) < g < t^{l + 1} with order {_order_str(o)}")])
        return GrowthClass("Unclassified", None, "symbolic", [Evidence(
            "strict-window", "symbolic", f"order {_order_str(o)} on a window boundary or outside")])
    return _classify_ml_numeric(g, l_max, horizon)


def _classify_ml_numeric(g: ex.HardyExpr, l_max: int, horizon: float) -> GrowthClass:
    pts = _sample_points(g, horizon)
    evidence = []
    for l in range(0, l_max + 1):
        lower = ex.pow_(ex.T, ex.const(l)) * ex.ln(ex.T)
        upper = ex.pow_(ex.T, ex.const(l + 1))
        r_lo = compare_growth(lower, g, horizon)
        r_hi = compare_growth(g, upper, horizon)
        evidence.append(Evidence(
            "strict-window", horizon, f"l={l}: lower {r_lo}, upper {r_hi}"))
        if r_lo == "<" and r_hi == "<":
            return GrowthClass("Ml", l, "numeric", evidence)
    return GrowthClass("Unclassified", None, "numeric", evidence)


# -- growth comparison ---------------------------------------------------------

def compare_growth(f: ex.HardyExpr, g: ex.HardyExpr, horizon: float = 2.0 ** 40) -> str:
    """'<', '~', '>' or 'undecided' for two eventually positive germs."""
    pf, pg = pw.extract(f), pw.extract(g)
    if pf is not None and pg is not None and pf and pg:
        try:
            if not pw.eventually_positive(pf) or not pw.eventually_positive(pg):
                raise NotEventuallyPositiveError("both germs must be eventually positive")
            return pw.compare(pf, pg)
        except CannotCertifyError:
            pass
    return _compare_numeric(f, g, horizon)


def _compare_numeric(f: ex.HardyExpr, g: ex.HardyExpr, horizon: float) -> str:
    t0 = max(2, f.validity_threshold, g.validity_threshold)
    ratios = []
    t = t0
    while t <= horizon:
        fv, _ = ex.evaluate(f, t, dps=40, check_validity=False)
        gv, _ = ex.evaluate(g, t, dps=40, check_validity=False)
        fv, gv = float(fv), float(gv)
        if fv <= 0 or gv <= 0:
            if t > t0 * 256:
                raise NotEventuallyPositiveError("sampled values are not positive")
            t *= 2
            continue
        ratios.append(fv / gv)
        t *= 2
    if len(ratios) < 8:
        return "undecided"
    tail = ratios[len(ratios) // 2:]
    quarter = ratios[3 * len(ratios) // 4:]
    decreasing = all(b < a for a, b in zip(tail, tail[1:]))
    increasing = all(b > a for a, b in zip(tail, tail[1:]))
    if decreasing and tail[-1] < 1e-4:
        return "<"
    if increasing and tail[-1] > 1e4:
        return ">"
    if max(quarter) / min(quarter) < 1.05:
        return "~"
    return "undecided"
