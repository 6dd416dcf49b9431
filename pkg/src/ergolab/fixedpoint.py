"""Exact scaled-integer brackets for values c * n^(p/q) with rational c.

Everything here is pure integer arithmetic.  ``scaled_power_bracket``
returns the unique integer L with  c * n^(p/q) * 2^B  in [L, L+1), which
is what certified floor computation and phase reduction need: summing the
per-term brackets gives an interval of known integer width around the
scaled value, and a floor or a fractional part is certified whenever the
interval does not cross the relevant boundary.
"""

from __future__ import annotations

from fractions import Fraction

from .constants import int_nth_root


def int_root_rational(x_num: int, x_den: int, q: int) -> tuple[int, bool]:
    """(floor((x_num/x_den)^(1/q)), exact?) for x >= 0, integer arithmetic."""
    if x_num < 0 or x_den <= 0:
        raise ValueError("non-negative rational required")
    r = int_nth_root(x_num // x_den, q)
    # adjust: want largest r with r^q * x_den <= x_num
    while (r + 1) ** q * x_den <= x_num:
        r += 1
    while r > 0 and r ** q * x_den > x_num:
        r -= 1
    return r, r ** q * x_den == x_num


def scaled_power_bracket(c: Fraction, n: int, p: int, q: int, B: int) -> int:
    """Integer L with c * n^(p/q) * 2^B in [L, L+1).

    p may be negative; q >= 1; n >= 1; c any rational.
    """
    n, p, q, B = int(n), int(p), int(q), int(B)
    if n < 1:
        raise ValueError("n must be >= 1")
    if c == 0:
        return 0
    neg = c < 0
    ac = -c if neg else c
    # |value| * 2^B = (ac^q * n^p * 2^(B q))^(1/q)
    num = ac.numerator ** q << (B * q)
    den = ac.denominator ** q
    if p >= 0:
        num *= n ** p
    else:
        den *= n ** (-p)
    m, exact = int_root_rational(num, den, q)
    if not neg:
        return m
    # -|v| lies in [-m-1, -m) unless |v| was exactly m
    return -m if exact else -m - 1


def decided_floor(lo_sum: int, width: int, cell: int) -> tuple[bool, int]:
    """Floor of X/cell for X in [lo_sum, lo_sum + width); (decided?, floor)."""
    f_lo = lo_sum // cell
    f_hi = (lo_sum + width - 1) // cell
    return f_lo == f_hi, f_lo


def frac_bits(lo_sum: int, width: int, B: int) -> tuple[int, int]:
    """Fractional part of X/2^B for X in [lo_sum, lo_sum+width), as (bits, width)."""
    return lo_sum & ((1 << B) - 1), width
