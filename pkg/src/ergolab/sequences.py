"""Integer sequences a_n = floor(f(n)) + h_n and the level-crossing table b_k.

The perturbation h_n is a bounded integer sequence (zero, a constant, a
periodic pattern, or seeded bounded random draws).  Exponents that are
negative or fall below the expression's validity threshold are mapped to
0 (the identity power) and flagged, so downstream averages can report or
exclude them.

b_k is the least integer n at which f is certified non-decreasing on
[n, oo) and f(n) >= k.  The monotonicity point comes from a rigorous
dominance threshold of f' refined downward by interval range checks;
the crossing points come from exponential bracketing plus binary search
with certified comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from mpmath import iv, mp

from .constants import CannotCertifyError
from . import expr as ex
from . import powlog as pw
from .evalbulk import BulkEvaluator


class NotEventuallyMonotoneError(ValueError):
    """f could not be certified eventually non-decreasing."""


# -- perturbations --------------------------------------------------------------

@dataclass(frozen=True)
class Perturbation:
    kind: str  # 'zero' | 'const' | 'period' | 'rand'
    values: tuple = ()
    bound: int = 0
    seed: int = 0

    @staticmethod
    def zero() -> "Perturbation":
        return Perturbation("zero")

    @staticmethod
    def constant(c: int) -> "Perturbation":
        return Perturbation("const", (int(c),), abs(int(c)))

    @staticmethod
    def periodic(pattern) -> "Perturbation":
        vals = tuple(int(v) for v in pattern)
        if not vals:
            raise ValueError("empty pattern")
        return Perturbation("period", vals, max(abs(v) for v in vals))

    @staticmethod
    def random(bound: int, seed: int) -> "Perturbation":
        if bound < 0:
            raise ValueError("bound must be >= 0")
        return Perturbation("rand", (), int(bound), int(seed))

    @property
    def sup_bound(self) -> int:
        return self.bound

    def sample(self, N: int) -> np.ndarray:
        """h_1 .. h_N as int64."""
        if self.kind == "zero":
            return np.zeros(N, dtype=np.int64)
        if self.kind == "const":
            return np.full(N, self.values[0], dtype=np.int64)
        if self.kind == "period":
            pat = np.array(self.values, dtype=np.int64)
            reps = -(-N // len(pat))
            return np.tile(pat, reps)[:N]
        rng = np.random.default_rng(self.seed)
        return rng.integers(-self.bound, self.bound + 1, size=N, dtype=np.int64)

    def spec_string(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "const":
            return f"const:{self.values[0]}"
        if self.kind == "period":
            return "period:" + ",".join(str(v) for v in self.values)
        return f"rand:r={self.bound},seed={self.seed}"

    @staticmethod
    def parse(s: str) -> "Perturbation":
        s = s.strip()
        if s == "zero":
            return Perturbation.zero()
        if s.startswith("const:"):
            return Perturbation.constant(int(s[6:]))
        if s.startswith("period:"):
            return Perturbation.periodic(int(v) for v in s[7:].split(","))
        if s.startswith("rand:"):
            kv = dict(part.split("=") for part in s[5:].split(","))
            return Perturbation.random(int(kv["r"]), int(kv["seed"]))
        raise ValueError(f"bad perturbation spec {s!r}")


@dataclass(frozen=True)
class SubsequenceSpec:
    """The data defining a_n = floor(f(n)) + h_n."""
    f: ex.HardyExpr
    perturbation: Perturbation = field(default_factory=Perturbation.zero)
    convention: str = "identity"  # undefined or negative exponents act as I

    def spec_string(self) -> str:
        return f"{ex.to_string(self.f)};{self.perturbation.spec_string()}"

    @staticmethod
    def parse(s: str) -> "SubsequenceSpec":
        if ";" in s:
            f_str, _, p_str = s.partition(";")
            return SubsequenceSpec(ex.parse(f_str), Perturbation.parse(p_str))
        return SubsequenceSpec(ex.parse(s))


@dataclass
class GeneratedSequence:
    spec: SubsequenceSpec
    a: np.ndarray       # int64, a[i] is a_{i+1}
    flags: np.ndarray   # bool, convention applied at these indices
    r: int              # sup |h_n|

    def __len__(self):
        return len(self.a)

    @property
    def flagged_count(self) -> int:
        return int(self.flags.sum())


_seq_cache: dict = {}


def generate_a(spec: SubsequenceSpec, N: int, cache: bool = True) -> GeneratedSequence:
    """a_1 .. a_N with certified floors; negatives and the undefined prefix
    are mapped to exponent 0 and flagged."""
    if N < 1:
        raise ValueError("N must be >= 1")
    key = (spec.spec_string(), N)
    if cache and key in _seq_cache:
        return _seq_cache[key]
    ev = BulkEvaluator(spec.f)
    n_min = ev.n_min
    a = np.zeros(N, dtype=np.int64)
    flags = np.zeros(N, dtype=bool)
    if n_min > 1:
        flags[: min(n_min - 1, N)] = True
    if N >= n_min:
        a[n_min - 1:] = ev.floors(N, n_start=n_min)
    h = spec.perturbation.sample(N)
    a = a + h
    flags = flags | (a < 0)
    a[flags] = 0
    out = GeneratedSequence(spec, a, flags, spec.perturbation.sup_bound)
    if cache:
        _seq_cache[key] = out
    return out


def clear_sequence_cache() -> None:
    _seq_cache.clear()


# -- exports ---------------------------------------------------------------------

def write_decimal(a: np.ndarray, fh) -> None:
    """Newline-delimited decimal integers."""
    close = False
    if isinstance(fh, (str, bytes)):
        fh = open(fh, "w")
        close = True
    try:
        fh.write("\n".join(str(int(v)) for v in a))
        fh.write("\n")
    finally:
        if close:
            fh.close()


def read_decimal(fh) -> np.ndarray:
    if isinstance(fh, (str, bytes)):
        with open(fh) as f:
            return read_decimal(f)
    return np.array([int(line) for line in fh.read().split()], dtype=np.int64)


def write_binary(a: np.ndarray, fh) -> None:
    """64-bit little-endian integers."""
    data = np.asarray(a, dtype="<i8").tobytes()
    if isinstance(fh, (str, bytes)):
        with open(fh, "wb") as f:
            f.write(data)
    else:
        fh.write(data)


def read_binary(fh) -> np.ndarray:
    if isinstance(fh, (str, bytes)):
        with open(fh, "rb") as f:
            data = f.read()
    else:
        data = fh.read()
    return np.frombuffer(data, dtype="<i8").astype(np.int64)


# -- monotonicity and b_k ----------------------------------------------------------

_mono_cache: dict = {}


def _certify_nonneg_on(e: ex.HardyExpr, a: int, b: int, dps: int = 40,
                       max_segments: int = 4096) -> bool:
    """Interval-certify e >= 0 on the real segment [a, b]."""
    if a > b:
        return True
    stack = [(mp.mpf(a), mp.mpf(b))]
    budget = max_segments
    min_width = max((b - a) / 1024.0, 1.0 / 64)
    while stack:
        x, y = stack.pop()
        budget -= 1
        if budget < 0:
            return False
        try:
            enc = ex.eval_interval(e, iv.mpf([x, y]), dps)
            if mp.mpf(enc.a) >= 0:
                continue
            if mp.mpf(enc.b) < 0:
                return False
        except (CannotCertifyError, ex.EvalOverflowError):
            pass
        if float(y - x) <= min_width:
            return False
        mid = (x + y) / 2
        stack.append((x, mid))
        stack.append((mid, y))
    return True


def monotone_threshold(f: ex.HardyExpr) -> int:
    """Least integer n with f certified non-decreasing on [n, oo)."""
    key = f
    if key in _mono_cache:
        return _mono_cache[key]
    fp = f.diff()
    base = max(1, f.validity_threshold)
    pl = pw.extract(fp)
    tau = None
    if pl is not None:
        if not pl:
            _mono_cache[key] = base
            return base  # constant germ
        try:
            if not pw.eventually_positive(pl):
                raise NotEventuallyMonotoneError(
                    f"derivative of {ex.to_string(f)} is eventually negative")
            tau = max(base, pw.positivity_threshold(pl))
        except CannotCertifyError:
            tau = None
    if tau is None:
        tau = _scan_positive_threshold(fp, base)
    if tau > 1 << 24:
        _mono_cache[key] = tau
        return tau
    lo, hi = base, tau
    # least n in [lo, hi] with f' certified >= 0 on [n, tau]
    while lo < hi:
        mid = (lo + hi) // 2
        if _certify_nonneg_on(fp, mid, tau):
            hi = mid
        else:
            lo = mid + 1
    _mono_cache[key] = lo
    return lo


def _scan_positive_threshold(fp: ex.HardyExpr, base: int) -> int:
    t = base
    window = 10
    while t <= 1 << 48:
        try:
            if all(ex.eval_interval(fp, t << w, 40).a > 0 for w in range(window)):
                return t
        except (CannotCertifyError, ex.EvalOverflowError):
            pass
        t *= 2
    raise NotEventuallyMonotoneError("no positivity point found by scanning")


@dataclass
class BkTable:
    """Minimal crossing points b_k: f non-decreasing from b_k and f(b_k) >= k."""
    f_str: str
    b: np.ndarray  # int64, b[k-1] = b_k
    mono_from: int

    @property
    def K(self) -> int:
        return len(self.b)

    @property
    def gaps(self) -> np.ndarray:
        """d_j = b_{j+1} - b_j for j = 1 .. K-1."""
        return np.diff(self.b)

    def validate(self) -> None:
        if np.any(np.diff(self.b) < 0):
            raise AssertionError("b_k must be non-decreasing")


def build_bk(f: ex.HardyExpr, K: int) -> BkTable:
    """Exact b_1..b_K by exponential bracketing and binary search."""
    if K < 1:
        raise ValueError("K must be >= 1")
    n0 = monotone_threshold(f)
    evb = BulkEvaluator(f)
    b = np.empty(K, dtype=np.int64)
    lo_floor = max(n0, 1)
    hi = lo_floor
    for k in range(1, K + 1):
        while not evb.ge(hi, k):
            hi = hi * 2
        lo = max(lo_floor, b[k - 2] if k >= 2 else lo_floor)
        hi_k = hi
        while lo < hi_k:
            mid = (lo + hi_k) // 2
            if evb.ge(mid, k):
                hi_k = mid
            else:
                lo = mid + 1
        b[k - 1] = lo
    table = BkTable(ex.to_string(f), b, n0)
    table.validate()
    return table


def build_bk_bruteforce(f: ex.HardyExpr, K: int) -> BkTable:
    """Enumeration oracle: scan n upward, advancing k at each crossing."""
    n0 = monotone_threshold(f)
    evb = BulkEvaluator(f)
    b = np.empty(K, dtype=np.int64)
    n = n0
    for k in range(1, K + 1):
        while not evb.ge(n, k):
            n += 1
        b[k - 1] = n
    return BkTable(ex.to_string(f), b, n0)


# -- diagnostics -------------------------------------------------------------------

@dataclass
class RatioDiagnostics:
    """Finite-horizon proxies for the doubling-ratio and step-ratio hypotheses."""
    sup_ratio: float
    sup_ratio_witness: int          # n maximizing a_{2n}/a_n
    sup_ratio_tail: float           # over n >= N/10
    tail_ratio_dev: float           # max |a_{n+1}/a_n - 1| over n >= N/2
    monotone_violations: int
    first_violation: Optional[int]

    def to_dict(self) -> dict:
        return {
            "sup_a2n_over_an": self.sup_ratio,
            "sup_a2n_over_an_witness_n": self.sup_ratio_witness,
            "sup_a2n_over_an_tail": self.sup_ratio_tail,
            "tail_step_ratio_deviation": self.tail_ratio_dev,
            "monotone_violations": self.monotone_violations,
            "first_violation_n": self.first_violation,
        }


def ratio_diagnostics(a: np.ndarray) -> RatioDiagnostics:
    a = np.asarray(a, dtype=np.float64)
    N = len(a)
    if N < 4:
        raise ValueError("sequence must have length >= 4")
    half = N // 2
    pos = a > 0
    ns = np.arange(1, half + 1)
    valid = pos[ns - 1] & pos[2 * ns - 1]
    ratios = np.where(valid, a[2 * ns - 1] / np.where(a[ns - 1] > 0, a[ns - 1], 1), -np.inf)
    iw = int(np.argmax(ratios))
    sup_ratio = float(ratios[iw])
    tail_lo = max(1, N // 10)
    tail_mask = (ns >= tail_lo) & valid
    sup_tail = float(ratios[tail_mask].max()) if tail_mask.any() else float("nan")
    steps = a[half:][1:] / np.where(a[half:-1] > 0, a[half:-1], 1)
    dev = float(np.abs(steps - 1).max()) if len(steps) else float("nan")
    diffs = np.diff(a)
    viol = np.nonzero(diffs < 0)[0]
    return RatioDiagnostics(
        sup_ratio=sup_ratio,
        sup_ratio_witness=iw + 1,
        sup_ratio_tail=sup_tail,
        tail_ratio_dev=dev,
        monotone_violations=int(len(viol)),
        first_violation=int(viol[0] + 1) if len(viol) else None,
    )


@dataclass
class BkDiagnostics:
    """Statistics behind the bounded-gap properties of the crossing table."""
    sup_k_dk_over_bk: float
    sup_k_dk_witness: int
    b_ratio_tail: float             # max b_{k+1}/b_k over the tail half
    sup_gap_ratio: float            # sup over j <= k of d_j/(d_k + 1)
    sup_gap_witness: tuple

    def to_dict(self) -> dict:
        return {
            "sup_k_dk_over_bk": self.sup_k_dk_over_bk,
            "sup_k_dk_witness_k": self.sup_k_dk_witness,
            "b_ratio_tail": self.b_ratio_tail,
            "sup_dj_over_dk_plus_1": self.sup_gap_ratio,
            "sup_dj_over_dk_witness": list(self.sup_gap_witness),
        }


def bk_diagnostics(table: BkTable) -> BkDiagnostics:
    if table.K < 4:
        raise ValueError("table must have K >= 4")
    b = table.b.astype(np.float64)
    d = np.diff(b)
    k = np.arange(1, len(d) + 1, dtype=np.float64)
    stat = k * d / b[:-1]
    iw = int(np.argmax(stat))
    half = len(b) // 2
    b_ratio_tail = float((b[half + 1:] / b[half:-1]).max()) if len(b) > half + 1 else 1.0
    prefmax = np.maximum.accumulate(d)
    gap_stat = prefmax / (d + 1)
    ig = int(np.argmax(gap_stat))
    ij = int(np.argmax(d[: ig + 1]))
    return BkDiagnostics(
        sup_k_dk_over_bk=float(stat[iw]),
        sup_k_dk_witness=iw + 1,
        b_ratio_tail=b_ratio_tail,
        sup_gap_ratio=float(gap_stat[ig]),
        sup_gap_witness=(ij + 1, ig + 1),
    )
