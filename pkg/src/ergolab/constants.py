"""Exact arithmetic for the constants that appear in growth expressions.

A constant is a finite Q-linear combination of products of irrational
atoms: square roots of integers, the golden ratio, pi, exp(q) and ln(q)
for rational q.  Keeping constants in this structured form (instead of
floats) lets the symbolic classification routes decide questions such as
"is this coefficient rational?" honestly: a float cannot witness
irrationality.

The representation is a mapping ``key -> Fraction`` where a key is a
canonically sorted tuple of ``(atom, exponent)`` pairs and the empty key
stands for the rational part.  Zero testing is exact on the represented
form; it is *conservative* in the sense that algebraically equal but
structurally different combinations (say phi**2 versus phi + 1) are not
identified.  Sign queries fall back to interval arithmetic and raise if
the sign cannot be certified, so no route silently trusts an uncertified
comparison.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Optional

from mpmath import iv, mp


class CannotCertifyError(ArithmeticError):
    """A sign or comparison could not be certified at any tried precision."""


def _squarefree_split(n: int) -> tuple[int, int]:
    """Write n = s*s * r with r squarefree; returns (s, r)."""
    if n <= 0:
        raise ValueError("positive integer required")
    s, r = 1, n
    d = 2
    while d * d <= r:
        while r % (d * d) == 0:
            r //= d * d
            s *= d
        d += 1
    return s, r


def int_nth_root(x: int, n: int) -> int:
    """Floor of the n-th root of a non-negative integer, exactly."""
    if x < 0:
        raise ValueError("negative radicand")
    if n == 1 or x in (0, 1):
        return x
    if n == 2:
        return math.isqrt(x)
    r = int(round(x ** (1.0 / n))) if x.bit_length() < 900 else 1 << (x.bit_length() // n + 1)
    # Newton iteration on integers; converges in a handful of steps.
    while True:
        if r <= 0:
            r = 1
        rn = r ** (n - 1)
        nr = ((n - 1) * r + x // rn) // n
        if nr >= r:
            break
        r = nr
    while r ** n > x:
        r -= 1
    while (r + 1) ** n <= x:
        r += 1
    return r


def exact_fraction_root(q: Fraction, n: int) -> Optional[Fraction]:
    """The exact n-th root of q >= 0 if it is rational, else None."""
    if q < 0:
        return None
    pn = int_nth_root(q.numerator, n)
    pd = int_nth_root(q.denominator, n)
    if pn ** n == q.numerator and pd ** n == q.denominator:
        return Fraction(pn, pd)
    return None


# Atoms: ('rad', k) is k**(1/1) carrier for radical powers of the integer k,
# ('phi',) and ('pi',) are the named constants, ('exp',) carries exp(q) with
# q stored as the exponent slot, ('ln', q) is ln(q) for rational q.
Atom = tuple
Key = tuple  # sorted tuple of (Atom, Fraction) pairs


def _canonical_key(pairs: dict) -> tuple[Key, Fraction]:
    """Normalize atom powers; returns (key, rational multiplier extracted)."""
    mult = Fraction(1)
    rad_half: list[int] = []
    out: dict[Atom, Fraction] = {}
    for atom, e in pairs.items():
        if e == 0:
            continue
        if atom[0] == "rad":
            base = atom[1]
            # pull whole powers of the base into the rational multiplier
            whole = Fraction(math.floor(e))
            frac = e - whole
            if whole:
                mult *= Fraction(base) ** int(whole)
            if frac == Fraction(1, 2):
                rad_half.append(base)
            elif frac:
                out[atom] = out.get(atom, Fraction(0)) + frac
        else:
            out[atom] = out.get(atom, Fraction(0)) + e
    if rad_half:
        prod = 1
        for b in rad_half:
            prod *= b
        s, r = _squarefree_split(prod)
        mult *= s
        if r > 1:
            a = ("rad", r)
            out[a] = out.get(a, Fraction(0)) + Fraction(1, 2)
    items = tuple(sorted((a, e) for a, e in out.items() if e != 0))
    return items, mult


class Coeff:
    """A Q-linear combination of irrational atom products."""

    __slots__ = ("parts",)

    def __init__(self, parts: Optional[dict] = None):
        self.parts: dict[Key, Fraction] = {}
        if parts:
            for k, v in parts.items():
                if v != 0:
                    self.parts[k] = self.parts.get(k, Fraction(0)) + v
            self.parts = {k: v for k, v in self.parts.items() if v != 0}

    # -- constructors ---------------------------------------------------
    @staticmethod
    def rational(q) -> "Coeff":
        q = Fraction(q)
        return Coeff({(): q} if q else {})

    @staticmethod
    def sqrt(n: int) -> "Coeff":
        s, r = _squarefree_split(n)
        if r == 1:
            return Coeff.rational(s)
        return Coeff({((("rad", r), Fraction(1, 2)),): Fraction(s)})

    @staticmethod
    def named(name: str) -> "Coeff":
        if name == "phi":
            return Coeff({((("phi",), Fraction(1)),): Fraction(1)})
        if name == "pi":
            return Coeff({((("pi",), Fraction(1)),): Fraction(1)})
        if name == "e":
            return Coeff({((("exp",), Fraction(1)),): Fraction(1)})
        if name.startswith("sqrt"):
            return Coeff.sqrt(int(name[4:]))
        raise ValueError(f"unknown constant name {name!r}")

    @staticmethod
    def exp_of(q: Fraction) -> "Coeff":
        q = Fraction(q)
        if q == 0:
            return Coeff.rational(1)
        return Coeff({((("exp",), q),): Fraction(1)})

    @staticmethod
    def ln_of(q: Fraction) -> "Coeff":
        q = Fraction(q)
        if q <= 0:
            raise ValueError("ln of non-positive rational")
        if q == 1:
            return Coeff({})
        return Coeff({((("ln", q), Fraction(1)),): Fraction(1)})

    # -- ring operations -------------------------------------------------
    def __add__(self, other: "Coeff") -> "Coeff":
        parts = dict(self.parts)
        for k, v in other.parts.items():
            parts[k] = parts.get(k, Fraction(0)) + v
        return Coeff(parts)

    def __neg__(self) -> "Coeff":
        return Coeff({k: -v for k, v in self.parts.items()})

    def __sub__(self, other: "Coeff") -> "Coeff":
        return self + (-other)

    def _mul_keys(self, k1: Key, k2: Key) -> tuple[Key, Fraction]:
        # exp atoms combine additively in the slot since exp(a)*exp(b)=exp(a+b)
        pairs: dict[Atom, Fraction] = {}
        for atom, e in list(k1) + list(k2):
            pairs[atom] = pairs.get(atom, Fraction(0)) + e
        return _canonical_key(pairs)

    def __mul__(self, other: "Coeff") -> "Coeff":
        parts: dict[Key, Fraction] = {}
        for k1, v1 in self.parts.items():
            for k2, v2 in other.parts.items():
                key, m = self._mul_keys(k1, k2)
                parts[key] = parts.get(key, Fraction(0)) + v1 * v2 * m
        return Coeff(parts)

    def scale(self, q) -> "Coeff":
        q = Fraction(q)
        return Coeff({k: v * q for k, v in self.parts.items()})

    def inverse(self) -> Optional["Coeff"]:
        """Multiplicative inverse for single-product coefficients, else None."""
        if len(self.parts) != 1:
            return None
        (key, v), = self.parts.items()
        inv_pairs: dict[Atom, Fraction] = {}
        for atom, e in key:
            inv_pairs[atom] = -e
        k, m = _canonical_key(inv_pairs)
        return Coeff({k: m / v})

    def pow_rational(self, a: Fraction) -> Optional["Coeff"]:
        """self**a when exactly representable, else None."""
        a = Fraction(a)
        if a.denominator == 1:
            n = a.numerator
            if n == 0:
                return Coeff.rational(1)
            base = self if n > 0 else self.inverse()
            if base is None:
                return None
            out = Coeff.rational(1)
            for _ in range(abs(n)):
                out = out * base
            return out
        if len(self.parts) != 1:
            return None
        (key, v), = self.parts.items()
        if v < 0:
            return None
        if key == ():
            root = exact_fraction_root(v, a.denominator)
            if root is not None:
                return Coeff.rational(root ** abs(a.numerator)) if a > 0 else Coeff.rational(
                    Fraction(1) / root ** abs(a.numerator))
            if v.denominator == 1 and a.numerator > 0:
                # integer base: keep as a radical power of its squarefree kernel
                pairs = {("rad", int(v)): a}
                k, m = _canonical_key(pairs)
                return Coeff({k: m})
            return None
        if v == 1:
            pairs = {atom: e * a for atom, e in key}
            k, m = _canonical_key(pairs)
            return Coeff({k: m})
        return None

    # -- queries ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.parts

    def rational_value(self) -> Optional[Fraction]:
        if not self.parts:
            return Fraction(0)
        if set(self.parts) == {()}:
            return self.parts[()]
        return None

    def certified_irrational(self) -> bool:
        """True only when irrationality is provable from the structure."""
        irr_keys = [k for k in self.parts if k != ()]
        if not irr_keys:
            return False
        if all(self._key_all_sqrt(k) for k in irr_keys):
            # Q-linear independence of square roots of distinct squarefree ints
            return True
        if len(irr_keys) == 1 and self._key_known_irrational(irr_keys[0]):
            return True
        return False

    @staticmethod
    def _key_all_sqrt(key: Key) -> bool:
        return all(atom[0] == "rad" and e == Fraction(1, 2) for atom, e in key)

    @staticmethod
    def _key_known_irrational(key: Key) -> bool:
        if len(key) != 1:
            return False
        (atom, e), = key
        if atom[0] == "rad":
            return e.denominator > 1
        if atom[0] in ("phi", "pi"):
            return e.denominator == 1 and e > 0
        if atom[0] == "exp":
            return e != 0  # exp of a nonzero rational is transcendental
        if atom[0] == "ln":
            return e.denominator == 1 and e > 0  # ln of a rational != 1
        return False

    # -- numeric evaluation ------------------------------------------------
    @staticmethod
    def _atom_iv(atom: Atom, e: Fraction):
        if atom[0] == "rad":
            base = iv.mpf(atom[1])
            return iv.exp(iv.mpf(e.numerator) / e.denominator * iv.log(base))
        if atom[0] == "phi":
            v = (1 + iv.sqrt(5)) / 2
        elif atom[0] == "pi":
            v = +iv.pi
        elif atom[0] == "exp":
            return iv.exp(iv.mpf(e.numerator) / e.denominator)
        elif atom[0] == "ln":
            q = atom[1]
            v = iv.log(iv.mpf(q.numerator) / q.denominator)
        else:
            raise ValueError(f"unknown atom {atom}")
        if e == 1:
            return v
        return iv.exp(iv.mpf(e.numerator) / e.denominator * iv.log(v))

    def interval(self, dps: int = 40):
        """Rigorous interval enclosure at the given decimal precision."""
        old = iv.dps
        try:
            iv.dps = dps
            total = iv.mpf(0)
            for key, v in self.parts.items():
                term = iv.mpf(v.numerator) / v.denominator
                for atom, e in key:
                    term = term * self._atom_iv(atom, e)
                total = total + term
            return total
        finally:
            iv.dps = old

    def mpf(self, dps: int = 40):
        """Midpoint value at the given decimal precision."""
        x = self.interval(dps)
        old = mp.dps
        try:
            mp.dps = dps
            return (mp.mpf(x.a) + mp.mpf(x.b)) / 2
        finally:
            mp.dps = old

    def sign(self, max_dps: int = 200) -> int:
        """Certified sign in {-1, 0, +1}; raises if undecidable."""
        q = self.rational_value()
        if q is not None:
            return (q > 0) - (q < 0)
        dps = 40
        while dps <= max_dps:
            x = self.interval(dps)
            if x.a > 0:
                return 1
            if x.b < 0:
                return -1
            dps *= 2
        raise CannotCertifyError(f"sign of {self} undecided at {max_dps} digits")

    # -- misc ---------------------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, Coeff) and self.parts == other.parts

    def __hash__(self):
        return hash(tuple(sorted(self.parts.items())))

    def atoms(self) -> Iterator[Atom]:
        for key in self.parts:
            for atom, _ in key:
                yield atom

    def __repr__(self):
        if not self.parts:
            return "Coeff(0)"
        bits = []
        for key, v in sorted(self.parts.items()):
            if key == ():
                bits.append(str(v))
            else:
                names = "*".join(self._atom_str(a, e) for a, e in key)
                bits.append(f"{v}*{names}" if v != 1 else names)
        return "Coeff(" + " + ".join(bits) + ")"

    @staticmethod
    def _atom_str(atom: Atom, e: Fraction) -> str:
        if atom[0] == "rad" and e == Fraction(1, 2):
            return f"sqrt{atom[1]}"
        if atom[0] == "rad":
            return f"{atom[1]}^({e})"
        if atom[0] == "phi":
            return "phi" if e == 1 else f"phi^{e}"
        if atom[0] == "pi":
            return "pi" if e == 1 else f"pi^{e}"
        if atom[0] == "exp":
            return f"exp({e})"
        if atom[0] == "ln":
            return f"ln({atom[1]})" if e == 1 else f"ln({atom[1]})^{e}"
        return str(atom)


ZERO = Coeff({})
ONE = Coeff.rational(1)
