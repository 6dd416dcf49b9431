"""Power-log normal form: finite sums of c * t^a * ln(t)^b * lnln(t)^g.

This class of germs is closed under differentiation and contains every
growth function the classification and weight routes reason about
symbolically.  A normal form is a tuple of terms sorted by decreasing
growth order, where the growth order of a term is the lexicographic
triple (a, b, g).  Comparisons between two normal forms reduce to
comparing leading triples, and eventual positivity reduces to the sign
of the leading coefficient.

``positivity_threshold`` returns a rigorously certified point beyond
which the germ keeps the sign of its leading term: every non-leading
over leading term ratio is eventually monotone decreasing (an explicit
threshold comes out of differentiating the ratio), so once the ratio sum
is interval-certified below 1 at a single point it stays below 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from mpmath import iv

from .constants import CannotCertifyError, Coeff
from . import expr as ex


@dataclass(frozen=True)
class Term:
    coeff: Coeff
    a: Fraction  # exponent of t
    b: Fraction  # exponent of ln t
    g: Fraction  # exponent of lnln t

    @property
    def order(self) -> tuple:
        return (self.a, self.b, self.g)


PowLog = tuple  # tuple of Terms, canonical


def _merge(terms: list) -> PowLog:
    acc: dict[tuple, Coeff] = {}
    for t in terms:
        key = t.order
        acc[key] = acc[key] + t.coeff if key in acc else t.coeff
    out = [Term(c, *key) for key, c in acc.items() if not c.is_zero()]
    out.sort(key=lambda t: t.order, reverse=True)
    return tuple(out)


def scale(pl: PowLog, q) -> PowLog:
    q = Fraction(q)
    if q == 0:
        return ()
    return tuple(Term(t.coeff.scale(q), t.a, t.b, t.g) for t in pl)


def plus(p1: PowLog, p2: PowLog) -> PowLog:
    return _merge(list(p1) + list(p2))


def times(p1: PowLog, p2: PowLog) -> PowLog:
    out = []
    for t1 in p1:
        for t2 in p2:
            out.append(Term(t1.coeff * t2.coeff, t1.a + t2.a, t1.b + t2.b, t1.g + t2.g))
    return _merge(out)


def derivative(pl: PowLog) -> PowLog:
    """Term-wise derivative; closed in the class."""
    out = []
    for t in pl:
        if t.a:
            out.append(Term(t.coeff.scale(t.a), t.a - 1, t.b, t.g))
        if t.b:
            out.append(Term(t.coeff.scale(t.b), t.a - 1, t.b - 1, t.g))
        if t.g:
            out.append(Term(t.coeff.scale(t.g), t.a - 1, t.b - 1, t.g - 1))
    return _merge(out)


def nth_derivative(pl: PowLog, n: int) -> PowLog:
    for _ in range(n):
        pl = derivative(pl)
    return pl


def leading(pl: PowLog) -> Term:
    if not pl:
        raise ValueError("empty normal form has no leading term")
    return pl[0]


def growth_order(pl: PowLog) -> Optional[tuple]:
    return pl[0].order if pl else None


ZERO_ORDER = (Fraction(0), Fraction(0), Fraction(0))
LOG_ORDER = (Fraction(0), Fraction(1), Fraction(0))


def tends_to_zero(pl: PowLog) -> bool:
    return not pl or pl[0].order < ZERO_ORDER


def tends_to_infinity(pl: PowLog) -> bool:
    return bool(pl) and pl[0].order > ZERO_ORDER


def eventually_positive(pl: PowLog) -> bool:
    """Certified sign of the germ; raises when the leading sign is undecided."""
    if not pl:
        return False
    return pl[0].coeff.sign() > 0


def compare(p1: PowLog, p2: PowLog) -> str:
    """Growth comparison of two eventually positive germs: '<', '~' or '>'."""
    if not p1 or not p2:
        raise ValueError("cannot compare an identically zero germ")
    o1, o2 = p1[0].order, p2[0].order
    if o1 < o2:
        return "<"
    if o1 > o2:
        return ">"
    return "~"


# -- extraction from expression trees ----------------------------------------

def extract(e: ex.HardyExpr) -> Optional[PowLog]:
    """Normal form of an expression, or None when it leaves the class."""
    if isinstance(e, ex.Const):
        if e.value.is_zero():
            return ()
        return (Term(e.value, Fraction(0), Fraction(0), Fraction(0)),)
    if isinstance(e, ex.Var):
        return (Term(Coeff.rational(1), Fraction(1), Fraction(0), Fraction(0)),)
    if isinstance(e, ex.Neg):
        inner = extract(e.args[0])
        return None if inner is None else scale(inner, -1)
    if isinstance(e, (ex.Add, ex.Sub)):
        p1 = extract(e.args[0])
        p2 = extract(e.args[1])
        if p1 is None or p2 is None:
            return None
        return plus(p1, p2) if isinstance(e, ex.Add) else plus(p1, scale(p2, -1))
    if isinstance(e, ex.Mul):
        p1 = extract(e.args[0])
        p2 = extract(e.args[1])
        if p1 is None or p2 is None:
            return None
        return times(p1, p2)
    if isinstance(e, ex.Div):
        p1 = extract(e.args[0])
        p2 = extract(e.args[1])
        if p1 is None or p2 is None or len(p2) != 1:
            return None
        inv = p2[0].coeff.inverse()
        if inv is None:
            return None
        recip = (Term(inv, -p2[0].a, -p2[0].b, -p2[0].g),)
        return times(p1, recip)
    if isinstance(e, ex.Pow):
        base = extract(e.args[0])
        if base is None or not isinstance(e.args[1], ex.Const):
            return None
        alpha = e.args[1].value.rational_value()
        if alpha is None:
            return None
        if len(base) == 1:
            c = base[0].coeff.pow_rational(alpha)
            if c is None:
                return None
            return (Term(c, base[0].a * alpha, base[0].b * alpha, base[0].g * alpha),)
        if alpha.denominator == 1 and 0 <= alpha <= 8:
            out: PowLog = (Term(Coeff.rational(1), Fraction(0), Fraction(0), Fraction(0)),)
            for _ in range(int(alpha)):
                out = times(out, base)
            return out
        return None
    if isinstance(e, ex.Ln):
        arg = extract(e.args[0])
        if arg is None or len(arg) != 1:
            return None
        t = arg[0]
        if t.g != 0:
            return None
        out = []
        c = t.coeff
        if c.rational_value() != 1:
            q = c.rational_value()
            if q is not None and q > 0:
                lnc = Coeff.ln_of(q)
                if not lnc.is_zero():
                    out.append(Term(lnc, Fraction(0), Fraction(0), Fraction(0)))
            else:
                return None
        if t.a:
            out.append(Term(Coeff.rational(t.a), Fraction(0), Fraction(1), Fraction(0)))
        if t.b:
            out.append(Term(Coeff.rational(t.b), Fraction(0), Fraction(0), Fraction(1)))
        return _merge(out)
    if isinstance(e, ex.Exp):
        if isinstance(e.args[0], ex.Const):
            q = e.args[0].value.rational_value()
            if q is None:
                return None
            return (Term(Coeff.exp_of(q), Fraction(0), Fraction(0), Fraction(0)),)
        return None
    return None


def is_rational_polynomial(pl: PowLog) -> Optional[list]:
    """Coefficient list [c_0, c_1, ...] when the germ is a rational polynomial."""
    coeffs: dict[int, Fraction] = {}
    for t in pl:
        q = t.coeff.rational_value()
        if q is None or t.b or t.g or t.a.denominator != 1 or t.a < 0:
            return None
        coeffs[int(t.a)] = q
    deg = max(coeffs) if coeffs else 0
    return [coeffs.get(i, Fraction(0)) for i in range(deg + 1)]


def rational_polynomial_part(pl: PowLog) -> tuple[PowLog, PowLog]:
    """Split into (rational polynomial part, residual).

    A term belongs to the polynomial part when it is q * t^k with k a
    non-negative integer and q certified rational.  Terms whose coefficient
    is neither certified rational nor certified irrational make the split
    unsound, so they raise.
    """
    poly, resid = [], []
    for t in pl:
        q = t.coeff.rational_value()
        if q is not None and not t.b and not t.g and t.a.denominator == 1 and t.a >= 0:
            poly.append(t)
        else:
            if t.coeff.rational_value() is None and not t.coeff.certified_irrational():
                raise CannotCertifyError(
                    f"coefficient rationality undecided for term {t}")
            resid.append(t)
    return tuple(poly), _merge(resid)


# -- rigorous positivity thresholds -------------------------------------------

def _term_value_iv(t: Term, x, dps: int):
    v = t.coeff.interval(dps)
    lx = iv.log(x)
    out = v
    if t.a:
        out = out * iv.exp(iv.mpf(t.a.numerator) / t.a.denominator * lx)
    if t.b:
        out = out * iv.exp(iv.mpf(t.b.numerator) / t.b.denominator * iv.log(lx))
    if t.g:
        out = out * iv.exp(iv.mpf(t.g.numerator) / t.g.denominator * iv.log(iv.log(lx)))
    return out


def _ratio_monotone_from(lead: Term, other: Term) -> int:
    """Explicit t beyond which |other/lead| is decreasing."""
    da = other.a - lead.a
    db = other.b - lead.b
    dg = other.g - lead.g
    floor_t = 16  # keeps ln and lnln above 1
    if da < 0:
        # d/dt log ratio = da/t + db/(t ln t) + dg/(t ln t lnln t)
        bound = (abs(db) + abs(dg)) / (-da)
        return max(floor_t, math.ceil(math.exp(float(bound))) + 1)
    if da == 0 and db < 0:
        bound = abs(dg) / (-db)
        inner = math.exp(float(bound))
        if inner > 48 * math.log(2):
            raise CannotCertifyError("ratio monotonicity threshold out of range")
        return max(floor_t, math.ceil(math.exp(inner)) + 1)
    if da == 0 and db == 0 and dg < 0:
        return floor_t
    raise CannotCertifyError("term does not have strictly smaller growth order")


def positivity_threshold(pl: PowLog, max_t: int = 1 << 52) -> int:
    """A certified point beyond which the germ has the sign of its lead.

    Beyond the returned integer tau, |non-leading terms| sum to less than
    the leading term in absolute value, hence sign(germ) = sign(lead).
    """
    if not pl:
        raise ValueError("zero germ has no sign threshold")
    lead = pl[0]
    if len(pl) == 1:
        return 16 if (lead.b or lead.g) else 2
    start = 16
    for t in pl[1:]:
        start = max(start, _ratio_monotone_from(lead, t))
    tau = start
    while tau <= max_t:
        try:
            x = iv.mpf(tau)
            lead_v = _term_value_iv(lead, x, 40)
            rest = iv.mpf(0)
            for t in pl[1:]:
                rest = rest + abs(_term_value_iv(t, x, 40))
            if abs(lead_v).a > rest.b:
                return tau
        except (CannotCertifyError, ValueError):
            pass
        tau *= 2
    raise CannotCertifyError("no dominance point found below the cap")
