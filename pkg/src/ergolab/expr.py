"""Expression trees for eventually-defined real functions of one variable.

The grammar covers rational constants, the named irrationals (sqrtK, phi,
pi, e), the variable t, the field operations, real-exponent powers, ln and
exp.  Trees are immutable; differentiation is closed over the grammar and
evaluation comes in three flavours:

* exact rational evaluation when the value is provably rational,
* rigorous interval evaluation (mpmath ``iv``) with a certified radius,
* a convenience midpoint-plus-error wrapper over the two.

Each tree lazily discovers a *validity threshold*: the smallest power of
two beyond which every ln argument, fractional-power base and divisor is
certified positive resp. nonzero.  Functions are treated as germs at
infinity, so nothing below the threshold is trusted.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Union

from mpmath import iv, mp

from .constants import CannotCertifyError, Coeff, exact_fraction_root

Number = Union[int, Fraction]


class ExprError(ValueError):
    """Malformed expression or unsupported operation."""


class BelowValidityError(ValueError):
    """Evaluation requested below the expression's validity threshold."""


class EvalOverflowError(OverflowError):
    """exp overflowed the working precision range."""


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


def _as_expr(x) -> "HardyExpr":
    if isinstance(x, HardyExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(Coeff.rational(x))
    if isinstance(x, float):
        c = Const(Coeff.rational(Fraction(x)))
        c.float_origin = True
        return c
    raise TypeError(f"cannot coerce {x!r} to an expression")


class HardyExpr:
    """Base class; use the node classes or ``parse`` to build trees."""

    args: tuple
    float_origin: bool = False

    def __add__(self, other):
        return add(self, _as_expr(other))

    def __radd__(self, other):
        return add(_as_expr(other), self)

    def __sub__(self, other):
        return sub(self, _as_expr(other))

    def __rsub__(self, other):
        return sub(_as_expr(other), self)

    def __mul__(self, other):
        return mul(self, _as_expr(other))

    def __rmul__(self, other):
        return mul(_as_expr(other), self)

    def __truediv__(self, other):
        return div(self, _as_expr(other))

    def __rtruediv__(self, other):
        return div(_as_expr(other), self)

    def __pow__(self, other):
        return pow_(self, _as_expr(other))

    def __neg__(self):
        return neg(self)

    def __eq__(self, other):
        return type(self) is type(other) and self._payload() == other._payload() \
            and self.args == other.args

    def __hash__(self):
        return hash((type(self).__name__, self._payload(), self.args))

    def _payload(self):
        return None

    def diff(self) -> "HardyExpr":
        raise NotImplementedError

    def is_constant(self) -> bool:
        return all(a.is_constant() for a in self.args) if self.args else False

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"<expr {to_string(self)}>"

    # threshold cache, filled on first use
    _validity: Optional[int] = None

    @property
    def validity_threshold(self) -> int:
        if self._validity is None:
            object.__setattr__(self, "_validity", _discover_validity(self))
        return self._validity


class Const(HardyExpr):
    def __init__(self, value: Coeff, float_origin: bool = False):
        self.value = value
        self.args = ()
        self.float_origin = float_origin

    def _payload(self):
        return self.value

    def diff(self):
        return Const(Coeff.rational(0))

    def is_constant(self):
        return True


class Var(HardyExpr):
    def __init__(self):
        self.args = ()

    def diff(self):
        return Const(Coeff.rational(1))

    def is_constant(self):
        return False


class Add(HardyExpr):
    def __init__(self, a, b):
        self.args = (a, b)

    def diff(self):
        return add(self.args[0].diff(), self.args[1].diff())


class Sub(HardyExpr):
    def __init__(self, a, b):
        self.args = (a, b)

    def diff(self):
        return sub(self.args[0].diff(), self.args[1].diff())


class Neg(HardyExpr):
    def __init__(self, a):
        self.args = (a,)

    def diff(self):
        return neg(self.args[0].diff())


class Mul(HardyExpr):
    def __init__(self, a, b):
        self.args = (a, b)

    def diff(self):
        u, v = self.args
        return add(mul(u.diff(), v), mul(u, v.diff()))


class Div(HardyExpr):
    def __init__(self, a, b):
        self.args = (a, b)

    def diff(self):
        u, v = self.args
        return div(sub(mul(u.diff(), v), mul(u, v.diff())), mul(v, v))


class Pow(HardyExpr):
    """u ** alpha with a constant real exponent."""

    def __init__(self, base, expo):
        if not expo.is_constant():
            raise ExprError("power exponent must be a constant")
        self.args = (base, expo)

    def diff(self):
        u, a = self.args
        return mul(mul(a, pow_(u, sub(a, _as_expr(1)))), u.diff())


class Ln(HardyExpr):
    def __init__(self, a):
        self.args = (a,)

    def diff(self):
        return div(self.args[0].diff(), self.args[0])


class Exp(HardyExpr):
    def __init__(self, a):
        self.args = (a,)

    def diff(self):
        return mul(self, self.args[0].diff())


T = Var()


# -- smart constructors with light constant folding -------------------------

def _const_value(e: HardyExpr) -> Optional[Coeff]:
    return e.value if isinstance(e, Const) else None


def _is_rat(e: HardyExpr, q) -> bool:
    v = _const_value(e)
    return v is not None and v.rational_value() == Fraction(q)


def add(a, b):
    va, vb = _const_value(a), _const_value(b)
    if va is not None and vb is not None:
        return Const(va + vb, a.float_origin or b.float_origin)
    if va is not None and va.is_zero():
        return b
    if vb is not None and vb.is_zero():
        return a
    return Add(a, b)


def sub(a, b):
    va, vb = _const_value(a), _const_value(b)
    if va is not None and vb is not None:
        return Const(va - vb, a.float_origin or b.float_origin)
    if vb is not None and vb.is_zero():
        return a
    if va is not None and va.is_zero():
        return neg(b)
    return Sub(a, b)


def neg(a):
    va = _const_value(a)
    if va is not None:
        return Const(-va, a.float_origin)
    if isinstance(a, Neg):
        return a.args[0]
    return Neg(a)


def mul(a, b):
    va, vb = _const_value(a), _const_value(b)
    if va is not None and vb is not None:
        return Const(va * vb, a.float_origin or b.float_origin)
    if va is not None:
        if va.is_zero():
            return Const(Coeff.rational(0))
        if va.rational_value() == 1:
            return b
    if vb is not None:
        if vb.is_zero():
            return Const(Coeff.rational(0))
        if vb.rational_value() == 1:
            return a
    return Mul(a, b)


def div(a, b):
    va, vb = _const_value(a), _const_value(b)
    if vb is not None and vb.is_zero():
        raise ExprError("division by the zero constant")
    if va is not None and vb is not None:
        inv = vb.inverse()
        if inv is not None:
            return Const(va * inv, a.float_origin or b.float_origin)
    if va is not None and va.is_zero():
        return Const(Coeff.rational(0))
    if vb is not None and vb.rational_value() == 1:
        return a
    return Div(a, b)


def pow_(a, b):
    if not b.is_constant():
        raise ExprError("power exponent must be a constant")
    if _is_rat(b, 1):
        return a
    if _is_rat(b, 0):
        return Const(Coeff.rational(1))
    va, vb = _const_value(a), _const_value(b)
    if va is not None and vb is not None:
        q = vb.rational_value()
        if q is not None:
            folded = va.pow_rational(q)
            if folded is not None:
                return Const(folded, a.float_origin or b.float_origin)
    return Pow(a, b)


def ln(a):
    a = _as_expr(a)
    va = _const_value(a)
    if va is not None:
        q = va.rational_value()
        if q is not None and q > 0:
            return Const(Coeff.ln_of(q))
    return Ln(a)


def exp(a):
    a = _as_expr(a)
    va = _const_value(a)
    if va is not None:
        q = va.rational_value()
        if q is not None:
            return Const(Coeff.exp_of(q))
    return Exp(a)


def const(x) -> HardyExpr:
    return _as_expr(x)


def differentiate(expr: HardyExpr, order: int = 1) -> HardyExpr:
    """Symbolic derivative of the given order (>= 1)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    out = expr
    for _ in range(order):
        out = out.diff()
    return out


def contains_float_constants(expr: HardyExpr) -> bool:
    if expr.float_origin:
        return True
    return any(contains_float_constants(a) for a in expr.args)


# -- exact evaluation --------------------------------------------------------

def eval_exact(expr: HardyExpr, t: Fraction) -> Optional[Fraction]:
    """Exact rational value at rational t, or None when not provably rational."""
    if isinstance(expr, Const):
        return expr.value.rational_value()
    if isinstance(expr, Var):
        return Fraction(t)
    if isinstance(expr, (Add, Sub, Mul, Div)):
        a = eval_exact(expr.args[0], t)
        b = eval_exact(expr.args[1], t)
        if a is None or b is None:
            return None
        if isinstance(expr, Add):
            return a + b
        if isinstance(expr, Sub):
            return a - b
        if isinstance(expr, Mul):
            return a * b
        if b == 0:
            raise ZeroDivisionError("divisor vanished during exact evaluation")
        return a / b
    if isinstance(expr, Neg):
        a = eval_exact(expr.args[0], t)
        return None if a is None else -a
    if isinstance(expr, Pow):
        base = eval_exact(expr.args[0], t)
        if base is None:
            return None
        q = expr.args[1].value.rational_value() if isinstance(expr.args[1], Const) else None
        if q is None:
            return None
        if q.denominator == 1:
            n = q.numerator
            if n >= 0:
                return base ** n
            if base == 0:
                raise ZeroDivisionError("zero base with negative exponent")
            return Fraction(1) / base ** (-n)
        if base < 0:
            return None
        root = exact_fraction_root(base, q.denominator)
        if root is None:
            return None
        n = q.numerator
        return root ** n if n >= 0 else Fraction(1) / root ** (-n)
    if isinstance(expr, Ln):
        a = eval_exact(expr.args[0], t)
        return Fraction(0) if a == 1 else None
    if isinstance(expr, Exp):
        a = eval_exact(expr.args[0], t)
        return Fraction(1) if a == 0 else None
    return None


# -- interval evaluation ------------------------------------------------------

def _iv_from_fraction(q: Fraction):
    return iv.mpf(q.numerator) / q.denominator


def eval_interval(expr: HardyExpr, t, dps: int = 40):
    """Rigorous enclosure of expr(t); t may be an int, Fraction or iv interval."""
    old = iv.dps
    try:
        iv.dps = dps
        if isinstance(t, Fraction):
            tv = _iv_from_fraction(t)
        elif isinstance(t, iv.mpf):
            tv = t
        elif isinstance(t, float):
            tv = iv.mpf(t)
        else:
            tv = iv.mpf(int(t))  # covers numpy integer types
        return _eval_iv(expr, tv, dps)
    finally:
        iv.dps = old


def _eval_iv(expr: HardyExpr, tv, dps: int):
    if isinstance(expr, Const):
        return expr.value.interval(dps)
    if isinstance(expr, Var):
        return tv
    if isinstance(expr, Add):
        return _eval_iv(expr.args[0], tv, dps) + _eval_iv(expr.args[1], tv, dps)
    if isinstance(expr, Sub):
        return _eval_iv(expr.args[0], tv, dps) - _eval_iv(expr.args[1], tv, dps)
    if isinstance(expr, Neg):
        return -_eval_iv(expr.args[0], tv, dps)
    if isinstance(expr, Mul):
        return _eval_iv(expr.args[0], tv, dps) * _eval_iv(expr.args[1], tv, dps)
    if isinstance(expr, Div):
        num = _eval_iv(expr.args[0], tv, dps)
        den = _eval_iv(expr.args[1], tv, dps)
        if den.a <= 0 <= den.b:
            raise CannotCertifyError("divisor interval straddles zero")
        return num / den
    if isinstance(expr, Pow):
        base = _eval_iv(expr.args[0], tv, dps)
        q = expr.args[1].value.rational_value() if isinstance(expr.args[1], Const) else None
        if q is not None and q.denominator == 1 and -64 <= q <= 64:
            n = int(q)
            if n == 0:
                return iv.mpf(1)
            if n < 0 and base.a <= 0 <= base.b:
                raise CannotCertifyError("negative power of an enclosure straddling zero")
            factor = base if n > 0 else 1 / base
            out = factor
            for _ in range(abs(n) - 1):
                out = out * factor
            return out
        if base.a <= 0:
            raise CannotCertifyError("fractional power of a non-positive enclosure")
        expo = _eval_iv(expr.args[1], tv, dps)
        return iv.exp(expo * iv.log(base))
    if isinstance(expr, Ln):
        arg = _eval_iv(expr.args[0], tv, dps)
        if arg.a <= 0:
            raise CannotCertifyError("ln of a non-positive enclosure")
        return iv.log(arg)
    if isinstance(expr, Exp):
        arg = _eval_iv(expr.args[0], tv, dps)
        if arg.b > 10 ** 8:
            raise EvalOverflowError("exp argument too large")
        return iv.exp(arg)
    raise ExprError(f"cannot evaluate node {type(expr).__name__}")


def evaluate(expr: HardyExpr, t, dps: int = 32, check_validity: bool = True):
    """Value and certified error bound at t.

    Returns (mpf midpoint, float error bound).  The error bound is zero on
    the exact rational path and the interval radius otherwise; raising dps
    shrinks it.
    """
    t_num = t if isinstance(t, (int, Fraction)) else Fraction(t)
    if check_validity and t_num < expr.validity_threshold:
        raise BelowValidityError(
            f"t={t} below validity threshold {expr.validity_threshold}")
    exact = eval_exact(expr, Fraction(t_num))
    old = mp.dps
    try:
        mp.dps = dps
        if exact is not None:
            return mp.mpf(exact.numerator) / exact.denominator, 0.0
        enc = eval_interval(expr, t_num, dps)
        mid = (mp.mpf(enc.a) + mp.mpf(enc.b)) / 2
        return mid, float(mp.mpf(enc.delta) / 2)
    finally:
        mp.dps = old


# -- validity threshold -------------------------------------------------------

def _constraints(expr: HardyExpr, out: list):
    """Collect (subexpr, kind) pairs that must hold for large t."""
    if isinstance(expr, Ln):
        out.append((expr.args[0], "positive"))
    if isinstance(expr, Pow):
        q = expr.args[1].value.rational_value() if isinstance(expr.args[1], Const) else None
        if q is None or q.denominator != 1:
            out.append((expr.args[0], "positive"))
        elif q < 0:
            out.append((expr.args[0], "nonzero"))
    if isinstance(expr, Div):
        out.append((expr.args[1], "nonzero"))
    for a in expr.args:
        _constraints(a, out)


def _point_ok(sub: HardyExpr, kind: str, t: int) -> bool:
    for dps in (30, 60):
        try:
            enc = eval_interval(sub, t, dps)
        except (CannotCertifyError, EvalOverflowError):
            continue
        if kind == "positive" and enc.a > 0:
            return True
        if kind == "nonzero" and (enc.a > 0 or enc.b < 0):
            return True
    return False


def _discover_validity(expr: HardyExpr) -> int:
    cons: list = []
    _constraints(expr, cons)
    if not cons:
        return 1
    window = 8
    for j in range(0, 52):
        t0 = 1 << j
        if all(_point_ok(s, k, t0 << w) for s, k in cons for w in range(window)):
            return t0
    raise CannotCertifyError("no validity threshold found by scanning")


# -- parsing and printing -----------------------------------------------------

_NAMES = {"phi", "pi", "e"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg):
        raise ParseError(msg, self.pos)

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self) -> HardyExpr:
        e = self.expr()
        if self.peek():
            self.error("trailing input")
        return e

    def expr(self):
        e = self.term()
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                e = add(e, self.term())
            elif c == "-":
                self.pos += 1
                e = sub(e, self.term())
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                e = mul(e, self.factor())
            elif c == "/":
                self.pos += 1
                e = div(e, self.factor())
            else:
                return e

    def factor(self):
        if self.peek() == "-":
            self.pos += 1
            return neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            expo = self.factor()
            return pow_(base, expo)
        return base

    def atom(self):
        c = self.peek()
        if c == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if c.isdigit():
            return self.number()
        if c.isalpha():
            return self.name()
        self.error("expected a number, name or parenthesis")

    def number(self):
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit()
                                             or self.text[self.pos] == "."):
            self.pos += 1
        tok = self.text[start:self.pos]
        if "." in tok:
            whole, _, frac = tok.partition(".")
            q = Fraction(int(whole or 0)) + Fraction(int(frac or 0), 10 ** len(frac))
            return Const(Coeff.rational(q))
        return Const(Coeff.rational(int(tok)))

    def name(self):
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] == "_"):
            self.pos += 1
        tok = self.text[start:self.pos]
        if tok == "t":
            return T
        if tok == "ln":
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return ln(e)
        if tok == "exp":
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return exp(e)
        if tok in _NAMES or (tok.startswith("sqrt") and tok[4:].isdigit()):
            return Const(Coeff.named(tok))
        self.error(f"unknown name {tok!r}")


def parse(text: str) -> HardyExpr:
    """Parse the expression grammar; inverse of ``to_string`` up to whitespace."""
    return _Parser(text).parse()


def _coeff_to_string(c: Coeff) -> str:
    q = c.rational_value()
    if q is not None:
        return _frac_str(q) if q >= 0 else f"-{_frac_str(-q)}"
    pieces = []
    for key, v in sorted(c.parts.items()):
        if key == ():
            body = _frac_str(abs(v))
        else:
            name = "*".join(_atom_to_string(a, e) for a, e in key)
            body = name if abs(v) == 1 else f"{_frac_str(abs(v))}*{name}"
        pieces.append(("-" if v < 0 else "+", body))
    first_sign, first = pieces[0]
    s = (first_sign if first_sign == "-" else "") + first
    for sign, body in pieces[1:]:
        s += sign + body
    if len(pieces) > 1:
        return f"({s})"
    return s


def _pow_suffix(e: Fraction) -> str:
    if e.denominator == 1 and e > 0:
        return f"^{e.numerator}"
    return f"^({_frac_str(e)})"


def _atom_to_string(atom, e: Fraction) -> str:
    if atom[0] == "rad":
        if e == Fraction(1, 2):
            return f"sqrt{atom[1]}"
        return f"{atom[1]}{_pow_suffix(e)}"
    if atom[0] == "phi":
        return "phi" if e == 1 else f"phi{_pow_suffix(e)}"
    if atom[0] == "pi":
        return "pi" if e == 1 else f"pi{_pow_suffix(e)}"
    if atom[0] == "exp":
        return "e" if e == 1 else f"exp({_frac_str(e)})"
    if atom[0] == "ln":
        s = f"ln({_frac_str(atom[1])})"
        return s if e == 1 else f"{s}{_pow_suffix(e)}"
    raise ValueError(f"unknown atom {atom}")


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


_PREC = {"add": 1, "mul": 2, "neg": 3, "pow": 4, "atom": 5}


def _wrap(s: str, inner: int, outer: int) -> str:
    return f"({s})" if inner < outer else s


def _to_string(e: HardyExpr, outer: int) -> str:
    if isinstance(e, Const):
        s = _coeff_to_string(e.value)
        if s.startswith("("):
            level = _PREC["atom"]
        elif s.startswith("-"):
            level = _PREC["neg"] - 1
        elif "/" in s or "*" in s:
            level = _PREC["mul"]
        else:
            level = _PREC["atom"]
        return _wrap(s, level, outer)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Add):
        s = f"{_to_string(e.args[0], _PREC['add'])}+{_to_string(e.args[1], _PREC['add'] + 1)}"
        return _wrap(s, _PREC["add"], outer)
    if isinstance(e, Sub):
        s = f"{_to_string(e.args[0], _PREC['add'])}-{_to_string(e.args[1], _PREC['add'] + 1)}"
        return _wrap(s, _PREC["add"], outer)
    if isinstance(e, Neg):
        s = f"-{_to_string(e.args[0], _PREC['neg'])}"
        return _wrap(s, _PREC["neg"] - 1, outer)
    if isinstance(e, Mul):
        s = f"{_to_string(e.args[0], _PREC['mul'])}*{_to_string(e.args[1], _PREC['mul'] + 1)}"
        return _wrap(s, _PREC["mul"], outer)
    if isinstance(e, Div):
        s = f"{_to_string(e.args[0], _PREC['mul'])}/{_to_string(e.args[1], _PREC['mul'] + 1)}"
        return _wrap(s, _PREC["mul"], outer)
    if isinstance(e, Pow):
        s = f"{_to_string(e.args[0], _PREC['pow'] + 1)}^{_to_string(e.args[1], _PREC['pow'] + 1)}"
        return _wrap(s, _PREC["pow"], outer)
    if isinstance(e, Ln):
        return f"ln({_to_string(e.args[0], 0)})"
    if isinstance(e, Exp):
        return f"exp({_to_string(e.args[0], 0)})"
    raise ExprError(f"cannot print node {type(e).__name__}")


def to_string(e: HardyExpr) -> str:
    return _to_string(e, 0)
