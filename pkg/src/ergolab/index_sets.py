"""Subsets of the positive integers with density and word statistics.

Generators: the full set, arithmetic progressions, return times of an
irrational rotation orbit to a half-open interval, seeded Bernoulli
draws, the Champernowne normal 0-1 word, and explicit finite sets.

Rotation membership is decided by exact integer arithmetic: the angle is
rounded once to an integer P against a modulus M = d * 2^B (d clears the
interval endpoints' denominators), so the orbit position of n is known to
within n units of M with no accumulation drift; a point lands inside or
outside the scaled interval with certainty unless it falls within the
margin of an endpoint, in which case the scale is escalated for that
point alone.  For irrational angles and rational endpoints exact hits
cannot occur, so escalation terminates immediately in practice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .constants import CannotCertifyError, Coeff
from . import expr as ex


class AmbiguousEndpointError(ValueError):
    """A rotation point sits exactly on an interval endpoint."""


def _parse_fraction(s: str) -> Fraction:
    return Fraction(s.strip())


# -- exact rotation membership core ---------------------------------------------

class _RotationCore:
    def __init__(self, alpha: Coeff, lo: Fraction, hi: Fraction, x0: Fraction):
        if not (0 <= lo < hi <= 1):
            raise ValueError("interval must satisfy 0 <= lo < hi <= 1")
        self.alpha = alpha
        self.lo, self.hi, self.x0 = lo, hi, x0
        self.d = math.lcm(lo.denominator, hi.denominator, x0.denominator)
        q = alpha.rational_value()
        if q is not None:
            self.d = math.lcm(self.d, q.denominator)
        self._levels: dict[int, tuple] = {}

    def level(self, B: int) -> tuple:
        lv = self._levels.get(B)
        if lv is None:
            M = self.d << B
            q = self.alpha.rational_value()
            if q is not None:
                P = q * M
                assert P.denominator == 1
                P = int(P) % M
                eP_zero = True
            else:
                dps = int(B * 0.302) + 25
                enc = self.alpha.interval(dps)
                from mpmath import mpf, mp
                old = mp.dps
                try:
                    mp.dps = dps + 10
                    mid = (mp.mpf(enc.a) + mp.mpf(enc.b)) / 2
                    P = int(mp.floor(mid * M + mp.mpf("0.5"))) % M
                    rad = float(mp.mpf(enc.delta) / 2 * M)
                finally:
                    mp.dps = old
                if rad > 0.25:
                    raise CannotCertifyError("angle enclosure too wide at this scale")
                eP_zero = False
            X0 = int(self.x0 * M)
            L1 = int(self.lo * M)
            L2 = int(self.hi * M)
            lv = (M, P, X0, L1, L2, eP_zero)
            self._levels[B] = lv
        return lv

    def decide(self, n: int, B: int = 320) -> bool:
        """Membership of n with escalation on endpoint ambiguity."""
        while B <= 20480:
            M, P, X0, L1, L2, exact = self.level(B)
            v = (X0 + n * P) % M
            E = 0 if exact else n  # |true scaled position - v| <= n units
            if L1 + E <= v < L2 - E:
                return True
            if (v + E < L1 or v - E >= L2) and E <= v < M - E:
                return False
            if exact:
                # rational angle: the comparison above was exact
                return L1 <= v < L2
            B *= 2
        raise AmbiguousEndpointError(f"orbit point n={n} undecidable at the scale cap")

    def bitmask(self, N: int, B: int = 320) -> np.ndarray:
        M, P, X0, L1, L2, exact = self.level(B)
        out = np.empty(N, dtype=bool)
        E = 0 if exact else N
        lo_safe, hi_safe = L1 + E, L2 - E
        lo_risk, hi_risk = L1 - E, L2 + E
        v = X0
        for i in range(N):
            v += P
            if v >= M:
                v -= M
            if lo_safe <= v < hi_safe:
                out[i] = True
            elif lo_risk <= v < hi_risk or v < E or v >= M - E:
                out[i] = self.decide(i + 1, B * 2) if not exact else (L1 <= v < L2)
            else:
                out[i] = False
        return out


# -- champernowne word -----------------------------------------------------------

def champernowne_bits(N: int) -> np.ndarray:
    """First N bits of the binary Champernowne word 1 10 11 100 ..."""
    chunks = []
    total = 0
    L = 1
    while total < N:
        lo, hi = 1 << (L - 1), 1 << L
        arr = np.arange(lo, hi, dtype=np.uint64)
        shifts = np.arange(L - 1, -1, -1, dtype=np.uint64)
        bits = ((arr[:, None] >> shifts) & 1).astype(bool).ravel()
        chunks.append(bits)
        total += bits.size
        L += 1
    return np.concatenate(chunks)[:N]


# -- the index set ----------------------------------------------------------------

@dataclass
class IndexSet:
    """Immutable set spec with lazy membership and enumeration."""
    kind: str  # 'nat' | 'ap' | 'rot' | 'bern' | 'normal' | 'explicit'
    offset: int = 1
    step: int = 1
    alpha_str: str = ""
    lo: Fraction = Fraction(0)
    hi: Fraction = Fraction(1)
    x0: Fraction = Fraction(0)
    p: Fraction = Fraction(1, 2)
    seed: int = 0
    elements_array: Optional[np.ndarray] = None
    _core: object = field(default=None, repr=False, compare=False)
    _mask_cache: dict = field(default_factory=dict, repr=False, compare=False)

    # ---- constructors
    @staticmethod
    def naturals() -> "IndexSet":
        return IndexSet("nat")

    @staticmethod
    def arithmetic(offset: int, step: int) -> "IndexSet":
        if step < 1 or offset < 1:
            raise ValueError("offset and step must be >= 1")
        return IndexSet("ap", offset=offset, step=step)

    @staticmethod
    def rotation(alpha, lo, hi, x0=0) -> "IndexSet":
        alpha_expr = ex.parse(alpha) if isinstance(alpha, str) else alpha
        if not isinstance(alpha_expr, ex.Const):
            raise ValueError("rotation angle must be a constant expression")
        s = IndexSet("rot", alpha_str=ex.to_string(alpha_expr),
                     lo=Fraction(lo), hi=Fraction(hi), x0=Fraction(x0))
        s._core = _RotationCore(alpha_expr.value, s.lo, s.hi, s.x0)
        return s

    @staticmethod
    def bernoulli(p, seed: int) -> "IndexSet":
        p = Fraction(p)
        if not (0 < p < 1):
            raise ValueError("p must be in (0, 1)")
        return IndexSet("bern", p=p, seed=int(seed))

    @staticmethod
    def normal_word() -> "IndexSet":
        return IndexSet("normal")

    @staticmethod
    def explicit(elements) -> "IndexSet":
        arr = np.unique(np.asarray(list(elements), dtype=np.int64))
        if len(arr) and arr[0] < 1:
            raise ValueError("elements must be >= 1")
        return IndexSet("explicit", elements_array=arr)

    # ---- core queries
    def bitmask(self, N: int) -> np.ndarray:
        """Boolean membership of 1..N, index i holds n = i + 1."""
        for cap, arr in self._mask_cache.items():
            if cap >= N:
                return arr[:N]
        cap = max(N, 1024)
        arr = self._build_mask(cap)
        self._mask_cache.clear()
        self._mask_cache[cap] = arr
        return arr[:N]

    def _build_mask(self, N: int) -> np.ndarray:
        if self.kind == "nat":
            return np.ones(N, dtype=bool)
        if self.kind == "ap":
            out = np.zeros(N, dtype=bool)
            out[self.offset - 1:: self.step] = True
            return out
        if self.kind == "rot":
            return self._core.bitmask(N)
        if self.kind == "bern":
            rng = np.random.default_rng(self.seed)
            return rng.random(N) < float(self.p)
        if self.kind == "normal":
            return champernowne_bits(N)
        out = np.zeros(N, dtype=bool)
        el = self.elements_array
        el = el[el <= N]
        out[el - 1] = True
        return out

    def counts(self, N: int) -> np.ndarray:
        """Cumulative counts: counts[i] = card(A intersect [1, i+1])."""
        return np.cumsum(self.bitmask(N), dtype=np.int64)

    def elements(self, N: int) -> np.ndarray:
        return np.nonzero(self.bitmask(N))[0].astype(np.int64) + 1

    def contains(self, n: int) -> bool:
        if self.kind == "nat":
            return n >= 1
        if self.kind == "ap":
            return n >= self.offset and (n - self.offset) % self.step == 0
        if self.kind == "rot":
            return self._core.decide(n)
        if self.kind == "explicit":
            return bool(np.isin(n, self.elements_array))
        return bool(self.bitmask(max(n, 1))[n - 1])

    def nth_element(self, n: int) -> int:
        """g_A(n): the n-th element in increasing order."""
        N = max(1024, 4 * n)
        while True:
            el = self.elements(N)
            if len(el) >= n:
                return int(el[n - 1])
            if self.kind == "explicit":
                raise IndexError("explicit set exhausted")
            N *= 2

    # ---- spec strings
    def spec_string(self) -> str:
        if self.kind == "nat":
            return "nat"
        if self.kind == "ap":
            return f"ap:{self.offset},{self.step}"
        if self.kind == "rot":
            return (f"rot:alpha={self.alpha_str},lo={self.lo},hi={self.hi},x0={self.x0}")
        if self.kind == "bern":
            return f"bern:p={self.p},seed={self.seed}"
        if self.kind == "normal":
            return "normal"
        return "list:" + ",".join(str(int(v)) for v in self.elements_array)

    @staticmethod
    def parse(s: str) -> "IndexSet":
        s = s.strip()
        if s == "nat":
            return IndexSet.naturals()
        if s == "normal":
            return IndexSet.normal_word()
        if s.startswith("ap:"):
            o, st = s[3:].split(",")
            return IndexSet.arithmetic(int(o), int(st))
        if s.startswith("rot:"):
            kv = dict(part.split("=", 1) for part in s[4:].split(","))
            return IndexSet.rotation(kv["alpha"], _parse_fraction(kv["lo"]),
                                     _parse_fraction(kv["hi"]),
                                     _parse_fraction(kv.get("x0", "0")))
        if s.startswith("bern:"):
            kv = dict(part.split("=", 1) for part in s[5:].split(","))
            return IndexSet.bernoulli(_parse_fraction(kv["p"]), int(kv["seed"]))
        if s.startswith("list:"):
            return IndexSet.explicit(int(v) for v in s[5:].split(","))
        raise ValueError(f"bad set spec {s!r}")


# -- density ----------------------------------------------------------------------

def default_checkpoints(n_max: int, start: int = 100, ratio: float = 2 ** 0.25) -> np.ndarray:
    """Geometric checkpoint schedule ending exactly at n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    pts = []
    x = float(min(start, n_max))
    while x < n_max:
        pts.append(int(round(x)))
        x *= ratio
    pts.append(n_max)
    return np.unique(np.array(pts, dtype=np.int64))


@dataclass
class DensityReport:
    checkpoints: np.ndarray
    counts: np.ndarray
    trace: np.ndarray          # counts / checkpoints
    extrapolated: float        # last value
    band: float                # max - min over the final decade
    converged: bool

    def to_dict(self) -> dict:
        return {
            "checkpoints": self.checkpoints.tolist(),
            "counts": self.counts.tolist(),
            "trace": [float(x) for x in self.trace],
            "extrapolated": self.extrapolated,
            "band": self.band,
            "converged": self.converged,
        }


def density(A: IndexSet, N: int, checkpoints: Optional[np.ndarray] = None,
            tol: float = 0.01) -> DensityReport:
    """Exact counting at checkpoints with a final-decade oscillation band."""
    if checkpoints is None:
        checkpoints = default_checkpoints(N)
    cum = A.counts(N)
    counts = cum[np.asarray(checkpoints) - 1]
    trace = counts / np.asarray(checkpoints, dtype=np.float64)
    decade = np.asarray(checkpoints) >= N / 10
    band = float(trace[decade].max() - trace[decade].min()) if decade.any() else math.inf
    return DensityReport(np.asarray(checkpoints), counts, trace,
                         float(trace[-1]), band, band < tol)


# -- derived sets -------------------------------------------------------------------

def extract_Akm(A: IndexSet, k: int, m: int, N: int) -> IndexSet:
    """Elements n of A with n+m in A and exactly k+1 elements in [n, n+m].

    Exact for n <= N - m; membership beyond that horizon would need A past N.
    """
    if not (1 <= k <= m):
        raise ValueError("need 1 <= k <= m")
    bits = A.bitmask(N)
    cum = np.concatenate([[0], np.cumsum(bits, dtype=np.int64)])
    n_hi = N - m
    if n_hi < 1:
        return IndexSet.explicit([])
    window = cum[m + 1:] - cum[: n_hi]  # card(A cap [n, n+m]) for n = 1..n_hi
    ok = bits[:n_hi] & bits[m:] & (window == k + 1)
    return IndexSet.explicit(np.nonzero(ok)[0] + 1)


# -- regularity ----------------------------------------------------------------------

@dataclass
class WordRecord:
    word: str
    count: int
    trace: np.ndarray
    verdict: str  # 'density-converged' | 'oscillating' | 'rare'

    def to_dict(self) -> dict:
        return {"word": self.word, "count": self.count,
                "trace": [float(x) for x in self.trace], "verdict": self.verdict}


@dataclass
class WordStats:
    K: int
    N: int
    checkpoints: np.ndarray
    records: dict  # word string -> WordRecord
    all_converged: bool
    weak_evidence: bool  # positive density and every window-count class has density
    density_report: DensityReport

    def verdicts(self) -> dict:
        return {w: r.verdict for w, r in self.records.items()}

    def to_dict(self) -> dict:
        return {
            "K": self.K, "N": self.N,
            "checkpoints": self.checkpoints.tolist(),
            "words": {w: r.to_dict() for w, r in sorted(self.records.items())},
            "all_converged": self.all_converged,
            "weak_evidence": self.weak_evidence,
        }


def regularity_report(A: IndexSet, K: int, N: int,
                      checkpoints: Optional[np.ndarray] = None,
                      tol: float = 0.01, rare_count: int = 30) -> WordStats:
    """Density trace and verdict for every 0-1 word of length <= K+1."""
    if K > 12:
        raise ValueError("K must be <= 12 (word count grows as 2^K)")
    if checkpoints is None:
        checkpoints = default_checkpoints(N)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    bits = A.bitmask(N).astype(np.uint16)
    records: dict[str, WordRecord] = {}
    for L in range(1, K + 2):
        n_windows = N - L + 1
        code = np.zeros(n_windows, dtype=np.uint16)
        for j in range(L):
            code |= bits[j: j + n_windows] << j
        order = np.argsort(code, kind="stable")
        sorted_code = code[order]
        bounds = np.searchsorted(sorted_code, np.arange((1 << L) + 1))
        for w in range(1 << L):
            positions = order[bounds[w]: bounds[w + 1]] + 1  # 1-based start n
            positions.sort()
            limits = np.maximum(checkpoints - L + 1, 0)
            counts = np.searchsorted(positions, limits, side="right")
            denom = np.maximum(limits, 1)
            trace = counts / denom
            word = format(w, f"0{L}b")[::-1]  # word[j] = membership of n + j
            total = int(counts[-1])
            decade = checkpoints >= N / 10
            band = float(trace[decade].max() - trace[decade].min())
            if band < tol:
                verdict = "density-converged"
            elif total < rare_count:
                verdict = "rare"
            else:
                verdict = "oscillating"
            records[word] = WordRecord(word, total, trace, verdict)
    top = [r for w, r in records.items() if len(w) == K + 1]
    all_conv = all(r.verdict == "density-converged" for r in top)
    dens = density(A, N, checkpoints, tol)
    weak = dens.converged and dens.extrapolated > 0 and _weak_evidence(A, N, checkpoints, tol)
    return WordStats(K, N, checkpoints, records, all_conv, weak, dens)


def _weak_evidence(A: IndexSet, N: int, checkpoints: np.ndarray, tol: float,
                   m_max: int = 4) -> bool:
    """Positive density plus every window-count class A_{k,m} has density."""
    for m in range(1, m_max + 1):
        for k in range(1, m + 1):
            sub = extract_Akm(A, k, m, N)
            rep = density(sub, N - m, checkpoints[checkpoints <= N - m], tol)
            if not rep.converged:
                return False
    return True


def check_word_additivity(stats: WordStats) -> int:
    """Max |count(w) - count(w0) - count(w1)| over extendable words."""
    worst = 0
    for w, rec in stats.records.items():
        if len(w) + 1 > stats.K + 1:
            continue
        c0 = stats.records[w + "0"].count
        c1 = stats.records[w + "1"].count
        worst = max(worst, abs(rec.count - c0 - c1))
    return worst


# -- set export --------------------------------------------------------------------

def write_set(A: IndexSet, N: int, fh, rle: bool = False) -> None:
    close = isinstance(fh, (str, bytes))
    f = open(fh, "w") if close else fh
    try:
        if rle:
            bits = A.bitmask(N)
            f.write("RLE1:")
            runs = []
            current = bool(bits[0])
            f.write("1;" if current else "0;")
            run = 1
            for b in bits[1:]:
                if bool(b) == current:
                    run += 1
                else:
                    runs.append(run)
                    run = 1
                    current = bool(b)
            runs.append(run)
            f.write(",".join(str(r) for r in runs))
            f.write("\n")
        else:
            for v in A.elements(N):
                f.write(f"{int(v)}\n")
    finally:
        if close:
            f.close()


def read_set(fh) -> IndexSet:
    close = isinstance(fh, (str, bytes))
    f = open(fh) if close else fh
    try:
        text = f.read()
    finally:
        if close:
            f.close()
    if text.startswith("RLE1:"):
        body = text[5:].strip()
        first, _, runs_s = body.partition(";")
        bit = first == "1"
        elements = []
        n = 1
        for run in runs_s.split(","):
            r = int(run)
            if bit:
                elements.extend(range(n, n + r))
            n += r
            bit = not bit
        return IndexSet.explicit(elements)
    return IndexSet.explicit(int(v) for v in text.split())
