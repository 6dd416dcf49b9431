"""Cesaro averages of operator powers along subsequences, with exact norms.

The squared norm of (1/N_eff) sum_{n in A, n<=N} c_n T^{a_n} x expands
into pairwise inner products gram(a_j, a_k).  For the shift family the
gram value depends only on the exponent difference (and, for the
similarity-twisted shift, the exponent residue), so the double sum is
bucketed by exponent value: group sums S_v = sum of weights with
exponent v, then

    sum_{j,k} c_j conj(c_k) gram(a_j, a_k)
        = sum_d r(d) sum_v S_{v+d} conj(S_v)

with d ranging over the autocorrelation support of the vector.  This
costs O(N * support) instead of O(N^2) and stays exact in integer or
rational arithmetic when the weights are trivial and the coefficients
rational.  The O(N^2) double sum and a direct materialization of the
average vector are implemented as independent cross-checks.

Duplicate exponents are kept by default; dedup mode replaces the
exponent multiset by its strictly increasing support, which is what the
difference-average hypothesis requires.  The identity convention maps
flagged exponents to 0; their count is recorded in the trace metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import expr as ex
from .index_sets import IndexSet, default_checkpoints
from .operators import (BilateralShift, DiagonalOperator, MatrixOperator,
                        ModelError, OperatorModel, SimilarShift, VectorModel,
                        similar_shift_gram_table)
from .sequences import GeneratedSequence, SubsequenceSpec, generate_a
from .traces import (DEFAULT_TOL_CONVERGE, DEFAULT_TOL_DIVERGE, assess,
                     oscillation)
from .weights import WeightSpec, phase_of_multiples


@dataclass
class ExperimentConfig:
    model: OperatorModel
    x: VectorModel
    subsequence: SubsequenceSpec
    index_set: IndexSet = field(default_factory=IndexSet.naturals)
    weights: WeightSpec = field(default_factory=WeightSpec.trivial)
    n_max: int = 10 ** 5
    checkpoints: Optional[np.ndarray] = None
    dedup: bool = False
    exact: bool = False
    witnesses: tuple = ()

    def __post_init__(self):
        if self.n_max < 100:
            raise ValueError("n_max must be >= 100")
        if self.checkpoints is None:
            self.checkpoints = default_checkpoints(self.n_max)
        cp = np.asarray(self.checkpoints, dtype=np.int64)
        if np.any(np.diff(cp) <= 0) or cp[-1] != self.n_max:
            raise ValueError("checkpoints must be strictly increasing and end at n_max")
        self.checkpoints = cp

    def describe(self) -> dict:
        return {
            "model": self.model.spec_string(),
            "vector": self.x.spec_string(),
            "subsequence": self.subsequence.spec_string(),
            "index_set": self.index_set.spec_string(),
            "weights": self.weights.spec_string(),
            "n_max": int(self.n_max),
            "dedup": self.dedup,
            "exact": self.exact,
        }


@dataclass
class AverageTrace:
    checkpoints: np.ndarray
    n_eff: np.ndarray
    norm2: np.ndarray                       # squared norm of the average
    exact_norm2: Optional[list] = None      # Fractions, exact mode only
    osc: Optional[np.ndarray] = None        # running oscillation of norm2
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(self.norm2 < -1e-12):
            raise AssertionError("squared norms must be non-negative")
        if np.any(np.diff(self.n_eff) < 0):
            raise AssertionError("effective counts must be non-decreasing")
        if self.osc is None:
            self.osc = _running_oscillation(self.checkpoints, self.norm2)

    @property
    def norm(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.norm2, 0.0))

    @property
    def final_norm2(self) -> float:
        return float(self.norm2[-1])

    def verdict(self, tol_converge: float = DEFAULT_TOL_CONVERGE,
                tol_diverge: float = DEFAULT_TOL_DIVERGE) -> str:
        return assess(self.checkpoints, self.norm2, tol_converge, tol_diverge)

    def oscillation(self) -> float:
        return oscillation(self.checkpoints, self.norm2)

    def to_rows(self):
        """Rows (N, N_eff, value_re, value_im, norm2, osc) for CSV export."""
        for i in range(len(self.checkpoints)):
            yield (int(self.checkpoints[i]), int(self.n_eff[i]), "", "",
                   float(self.norm2[i]), float(self.osc[i]))


def _running_oscillation(checkpoints: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = np.empty(len(values))
    for i in range(len(values)):
        mask = (checkpoints >= checkpoints[i] / 10) & (checkpoints <= checkpoints[i])
        vals = values[mask]
        out[i] = float(vals.max() - vals.min())
    return out


def verdict(trace: AverageTrace, tol_converge: float = DEFAULT_TOL_CONVERGE,
            tol_diverge: float = DEFAULT_TOL_DIVERGE) -> str:
    """Convergence verdict on a trace at the given tolerances."""
    return trace.verdict(tol_converge, tol_diverge)


# -- value bucketing core -------------------------------------------------------------

class _Buckets:
    """Exponent-value grouping shared by the shift-family norm engines."""

    def __init__(self, vals: np.ndarray):
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        new = np.empty(len(sv), dtype=bool)
        if len(sv):
            new[0] = True
            new[1:] = sv[1:] != sv[:-1]
        self.uvals = sv[new]
        run_sorted = np.cumsum(new) - 1
        self.run_of_member = np.empty(len(sv), dtype=np.int64)
        self.run_of_member[order] = run_sorted
        self.R = len(self.uvals)

    def neighbors(self, d: int) -> tuple:
        """(src runs, dst runs) with uvals[dst] = uvals[src] + d."""
        idx = np.searchsorted(self.uvals, self.uvals + d)
        idx = np.clip(idx, 0, self.R - 1)
        hit = self.uvals[idx] == self.uvals + d
        src = np.nonzero(hit)[0]
        return src, idx[src]


def _shift_r_table(model, x: VectorModel, exact: bool):
    """(r(d) dict, residue_table or None, period)."""
    if isinstance(model, BilateralShift):
        return x.autocorrelation(exact=exact), None, 1
    if isinstance(model, SimilarShift):
        table = similar_shift_gram_table(model, x, exact=exact)
        return None, table, model.period
    raise ModelError("not a shift-family model")


def _bucketed_norm2(model, x: VectorModel, vals: np.ndarray,
                    c: Optional[np.ndarray], counts_at: np.ndarray,
                    exact: bool) -> tuple:
    """Squared-norm numerators at checkpoints given member counts.

    counts_at[i] is the number of leading members included at checkpoint
    i.  Returns (float array, exact Fraction list or None) of
    sum_{j,k <= counts} c_j conj(c_k) gram(a_j, a_k).
    """
    w = x.support_width
    buckets = _Buckets(vals)
    R = buckets.R
    r_plain, r_table, L = _shift_r_table(model, x, exact)
    use_counts = c is None
    if use_counts:
        S = np.zeros(R, dtype=np.int64)
    else:
        S_re = np.zeros(R, dtype=np.float64)
        S_im = np.zeros(R, dtype=np.float64)
    neigh = {d: buckets.neighbors(d) for d in range(0, w)}
    if r_table is not None:
        res = (buckets.uvals % L).astype(np.int64)
        r0_by_run = np.array([complex(r_table[(int(res[v]), 0)]).real
                              for v in range(R)])
        rd_by_run = {}
        for d in range(1, w):
            src, dst = neigh[d]
            rd_by_run[d] = np.array(
                [complex(r_table[(int(buckets.uvals[s] + d) % L, d)]) for s in src],
                dtype=np.complex128)
    totals_f = []
    totals_e = [] if exact else None
    prev = 0
    for cnt in counts_at:
        cnt = int(cnt)
        seg = buckets.run_of_member[prev:cnt]
        if use_counts:
            if len(seg):
                S += np.bincount(seg, minlength=R).astype(np.int64)
        else:
            if len(seg):
                S_re += np.bincount(seg, weights=c[prev:cnt].real, minlength=R)
                S_im += np.bincount(seg, weights=c[prev:cnt].imag, minlength=R)
        prev = cnt
        if r_table is None:
            if use_counts:
                total_f, total_e = _plain_total_counts(S, neigh, r_plain, w, exact)
            else:
                total_f = _plain_total_complex(S_re, S_im, neigh, r_plain, w)
                total_e = None
        else:
            if use_counts:
                total_f, total_e = _residue_total_counts(
                    S, neigh, r_table, rd_by_run, r0_by_run, buckets, L, w, exact)
            else:
                total_f = _residue_total_complex(
                    S_re, S_im, neigh, rd_by_run, r0_by_run, w)
                total_e = None
        totals_f.append(total_f)
        if exact:
            totals_e.append(total_e)
    return np.array(totals_f, dtype=np.float64), totals_e


def _plain_total_counts(S, neigh, r, w, exact):
    total_e = None
    t0 = int(np.dot(S, S))
    if exact:
        total_e = Fraction(r[0]) * t0
        for d in range(1, w):
            src, dst = neigh[d]
            pd = int(np.dot(S[dst], S[src]))
            total_e += 2 * Fraction(r[d]) * pd
        return float(total_e), total_e
    total = float(r[0].real if isinstance(r[0], complex) else r[0]) * t0
    for d in range(1, w):
        src, dst = neigh[d]
        pd = float(np.dot(S[dst].astype(np.float64), S[src].astype(np.float64)))
        rd = complex(r[d])
        total += 2 * rd.real * pd
    return total, None


def _plain_total_complex(S_re, S_im, neigh, r, w):
    total = float(complex(r[0]).real) * float(np.dot(S_re, S_re) + np.dot(S_im, S_im))
    for d in range(1, w):
        src, dst = neigh[d]
        # P_d = sum S_{v+d} conj(S_v)
        p_re = np.dot(S_re[dst], S_re[src]) + np.dot(S_im[dst], S_im[src])
        p_im = np.dot(S_im[dst], S_re[src]) - np.dot(S_re[dst], S_im[src])
        rd = complex(r[d])
        total += 2 * (rd.real * p_re - rd.imag * p_im)
    return total


def _residue_total_counts(S, neigh, r_table, rd_by_run, r0_by_run, buckets, L, w, exact):
    if exact:
        total_e = Fraction(0)
        res = buckets.uvals % L
        Sq = S.astype(object)
        for v in range(buckets.R):
            total_e += r_table[(int(res[v]), 0)] * int(S[v]) ** 2
        for d in range(1, w):
            src, dst = neigh[d]
            for i, s in enumerate(src):
                rho = int((buckets.uvals[s] + d) % L)
                total_e += 2 * r_table[(rho, d)] * int(S[dst[i]]) * int(S[s])
        return float(total_e), total_e
    Sf = S.astype(np.float64)
    total = float(np.dot(r0_by_run, Sf * Sf))
    for d in range(1, w):
        src, dst = neigh[d]
        total += 2 * float(np.dot(rd_by_run[d].real, Sf[dst] * Sf[src]))
    return total, None


def _residue_total_complex(S_re, S_im, neigh, rd_by_run, r0_by_run, w):
    total = float(np.dot(r0_by_run, S_re * S_re + S_im * S_im))
    for d in range(1, w):
        src, dst = neigh[d]
        # 2 Re(R_d P_d) with P_d = S_{v+d} conj(S_v)
        p_re = S_re[dst] * S_re[src] + S_im[dst] * S_im[src]
        p_im = S_im[dst] * S_re[src] - S_re[dst] * S_im[src]
        total += 2 * float(np.dot(rd_by_run[d].real, p_re)
                           - np.dot(rd_by_run[d].imag, p_im))
    return total


# -- member extraction ------------------------------------------------------------------

def _members(cfg: ExperimentConfig) -> tuple:
    """(exponent values, weights or None, counts at checkpoints, meta)."""
    seq = generate_a(cfg.subsequence, cfg.n_max)
    mask = cfg.index_set.bitmask(cfg.n_max)
    idx = np.nonzero(mask)[0]
    vals = seq.a[idx]
    flagged = int(seq.flags[idx].sum())
    cum = np.cumsum(mask, dtype=np.int64)
    counts_at = cum[cfg.checkpoints - 1]
    meta = {"flagged": flagged, "mode": "dedup" if cfg.dedup else "keep-duplicates",
            "config": cfg.describe()}
    if cfg.weights.kind == "trivial":
        c = None
        meta["phase_err"] = 0.0
    else:
        fr, err = cfg.weights.phases(cfg.n_max)
        c = np.exp(2j * np.pi * fr)[idx]
        meta["phase_err"] = err
    if cfg.dedup:
        uvals, first = np.unique(vals, return_index=True)
        keep = np.sort(first)
        # effective count at N = number of distinct exponents seen so far
        counts_at = np.searchsorted(keep, counts_at - 1, side="right")
        vals = vals[keep]
        c = c[keep] if c is not None else None
    return vals, c, counts_at, meta


# -- the averages -------------------------------------------------------------------------

def vector_average(cfg: ExperimentConfig) -> AverageTrace:
    """Trace of || N_eff^-1 sum c_n T^(a_n) x ||^2 along the index set."""
    vals, c, counts_at, meta = _members(cfg)
    n_eff = counts_at.astype(np.int64)
    if n_eff[-1] == 0:
        raise ValueError("index set has no members below n_max")
    model = cfg.model
    if isinstance(model, (BilateralShift, SimilarShift)):
        exact = cfg.exact and c is None and all(
            isinstance(v, (int, Fraction)) for v in cfg.x.coeffs)
        totals_f, totals_e = _bucketed_norm2(model, cfg.x, vals, c, counts_at, exact)
        denom = np.maximum(n_eff, 1).astype(np.float64)
        norm2 = totals_f / denom ** 2
        exact_list = None
        if totals_e is not None:
            exact_list = [t / Fraction(int(m)) ** 2 if m else Fraction(0)
                          for t, m in zip(totals_e, n_eff)]
            norm2 = np.array([float(v) for v in exact_list])
        meta["engine"] = "bucketed-gram"
        return AverageTrace(cfg.checkpoints, n_eff, norm2, exact_list, meta=meta)
    if isinstance(model, DiagonalOperator):
        norm2 = _diag_norm2(model, cfg.x, vals, c, counts_at)
        meta["engine"] = "diagonal"
        return AverageTrace(cfg.checkpoints, n_eff, norm2, meta=meta)
    if isinstance(model, MatrixOperator):
        norm2 = _matrix_norm2(model, cfg.x, vals, c, counts_at)
        meta["engine"] = "matrix-truncated"
        return AverageTrace(cfg.checkpoints, n_eff, norm2, meta=meta)
    raise ModelError(f"unsupported model {model!r}")


def _diag_norm2(model: DiagonalOperator, x: VectorModel, vals, c, counts_at):
    if len(x.coeffs) != len(model.entries):
        raise ModelError("vector dimension mismatch")
    if c is None:
        c = np.ones(len(vals), dtype=np.complex128)
    acc = np.zeros(len(counts_at), dtype=np.float64)
    for entry, coeff in zip(model.entries, x.coeffs):
        if entry.turn is not None:
            fr, _ = phase_of_multiples(entry.turn, vals)
            lam_pow = np.exp(2j * np.pi * fr)
        else:
            lam_pow = np.ones(len(vals), dtype=np.complex128)
        if entry.modulus != 1:
            lam_pow = lam_pow * np.exp(float(np.log(float(entry.modulus)))
                                       * vals.astype(np.float64))
        sums = np.cumsum(c * lam_pow)
        take = np.maximum(counts_at - 1, 0)
        totals = np.where(counts_at > 0, sums[take], 0)
        means = totals / np.maximum(counts_at, 1)
        acc += (abs(complex(coeff)) ** 2) * np.abs(means) ** 2
    return acc


def _matrix_norm2(model: MatrixOperator, x: VectorModel, vals, c, counts_at):
    if c is None:
        c = np.ones(len(vals), dtype=np.complex128)
    cutoff = model.decay_cutoff(1e-25)
    m = model.array()
    vx = np.array([complex(v) for v in x.coeffs])
    if m.shape[0] != len(vx):
        raise ModelError("vector dimension mismatch")
    contributing = np.nonzero(vals <= cutoff)[0]
    powers_needed = np.unique(vals[contributing])
    power_vec = {}
    cur, e = vx.copy(), 0
    for target in powers_needed:
        while e < target:
            cur = m @ cur
            e += 1
        power_vec[int(target)] = cur.copy()
    out = np.empty(len(counts_at), dtype=np.float64)
    acc = np.zeros_like(vx)
    ptr = 0
    for i, cnt in enumerate(counts_at):
        while ptr < len(contributing) and contributing[ptr] < cnt:
            j = contributing[ptr]
            acc = acc + c[j] * power_vec[int(vals[j])]
            ptr += 1
        denom = max(int(cnt), 1)
        out[i] = float(np.vdot(acc, acc).real) / denom ** 2
    return out


def difference_average(cfg: ExperimentConfig, k: int) -> AverageTrace:
    """Trace of || J^-1 sum_{j<=J} T^(a_{j+k} - a_j) x ||^2.

    Runs on the strictly increasing exponent support (dedup semantics);
    weights do not enter the difference hypothesis.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    seq = generate_a(cfg.subsequence, cfg.n_max)
    mask = cfg.index_set.bitmask(cfg.n_max)
    vals = seq.a[np.nonzero(mask)[0]]
    u = np.unique(vals)
    if len(u) <= k + 10:
        raise ValueError("too few distinct exponents for a difference average")
    diffs = (u[k:] - u[:-k]).astype(np.int64)
    J = len(diffs)
    checkpoints = default_checkpoints(J)
    model = cfg.model
    meta = {"k": k, "mode": "dedup", "config": cfg.describe()}
    if isinstance(model, (BilateralShift, SimilarShift)):
        exact = cfg.exact and all(isinstance(v, (int, Fraction)) for v in cfg.x.coeffs)
        totals_f, totals_e = _bucketed_norm2(model, cfg.x, diffs, None,
                                             checkpoints, exact)
        norm2 = totals_f / checkpoints.astype(np.float64) ** 2
        exact_list = None
        if totals_e is not None:
            exact_list = [t / Fraction(int(m)) ** 2 for t, m in zip(totals_e, checkpoints)]
            norm2 = np.array([float(v) for v in exact_list])
        meta["engine"] = "bucketed-gram"
        return AverageTrace(checkpoints, checkpoints.copy(), norm2, exact_list, meta=meta)
    if isinstance(model, DiagonalOperator):
        norm2 = _diag_norm2(model, cfg.x, diffs, None, checkpoints)
        meta["engine"] = "diagonal"
        return AverageTrace(checkpoints, checkpoints.copy(), norm2, meta=meta)
    if isinstance(model, MatrixOperator):
        norm2 = _matrix_norm2(model, cfg.x, diffs, None, checkpoints)
        meta["engine"] = "matrix-truncated"
        return AverageTrace(checkpoints, checkpoints.copy(), norm2, meta=meta)
    raise ModelError(f"unsupported model {model!r}")


# -- weak averages ---------------------------------------------------------------------

@dataclass
class WeakAverageReport:
    checkpoints: np.ndarray
    n_eff: np.ndarray
    per_witness: list                 # (witness spec string, float array trace)
    sup_lower_bound: np.ndarray       # pointwise max over the witness family
    meta: dict = field(default_factory=dict)

    def final_sup(self) -> float:
        return float(self.sup_lower_bound[-1])


def _shift_weak_window(model, x: VectorModel, y: VectorModel) -> tuple:
    """(a_lo, values[a - a_lo] = <T^a x, y>) over the support window."""
    wx, wy = x.support_width, y.support_width
    a_lo = y.offset - (x.offset + wx - 1)
    a_hi = (y.offset + wy - 1) - x.offset
    vals = []
    for a in range(a_lo, a_hi + 1):
        s = 0j
        for i_rel in range(wx):
            i_abs = x.offset + i_rel
            j_rel = i_abs + a - y.offset
            if 0 <= j_rel < wy:
                xi = complex(x.coeffs[i_rel])
                yj = complex(y.coeffs[j_rel])
                if isinstance(model, SimilarShift):
                    xi *= float(model.d(i_abs + a) / model.d(i_abs))
                s += xi * yj.conjugate()
        vals.append(s)
    return a_lo, np.array(vals, dtype=np.complex128)


def weak_average(cfg: ExperimentConfig) -> WeakAverageReport:
    """Per-witness traces of N_eff^-1 sum |<T^(a_n) x, y>|.

    The reported supremum is over the finite witness family only, hence a
    lower bound for the dual-ball supremum.
    """
    if not cfg.witnesses:
        raise ValueError("witness family must be non-empty")
    vals, c, counts_at, meta = _members(cfg)
    n_eff = counts_at.astype(np.int64)
    model = cfg.model
    traces = []
    for y in cfg.witnesses:
        ynorm = math.sqrt(float(abs(y.norm2())))
        if isinstance(model, (BilateralShift, SimilarShift)):
            a_lo, window = _shift_weak_window(model, cfg.x, y)
            table = np.abs(window) / ynorm
            pos = vals - a_lo
            inside = (pos >= 0) & (pos < len(table))
            per_n = np.zeros(len(vals), dtype=np.float64)
            per_n[inside] = table[pos[inside]]
        elif isinstance(model, DiagonalOperator):
            per_n = np.zeros(len(vals), dtype=np.float64)
            inner = np.zeros(len(vals), dtype=np.complex128)
            for entry, xc, yc in zip(model.entries, cfg.x.coeffs, y.coeffs):
                if entry.turn is not None:
                    fr, _ = phase_of_multiples(entry.turn, vals)
                    lam_pow = np.exp(2j * np.pi * fr)
                else:
                    lam_pow = np.ones(len(vals), dtype=np.complex128)
                if entry.modulus != 1:
                    lam_pow = lam_pow * np.exp(
                        float(np.log(float(entry.modulus))) * vals.astype(np.float64))
                inner += lam_pow * complex(xc) * complex(yc).conjugate()
            per_n = np.abs(inner) / ynorm
        elif isinstance(model, MatrixOperator):
            cutoff = model.decay_cutoff(1e-25)
            m = model.array()
            vx = np.array([complex(v) for v in cfg.x.coeffs])
            vy = np.array([complex(v) for v in y.coeffs])
            per_n = np.zeros(len(vals), dtype=np.float64)
            needed = np.unique(vals[vals <= cutoff])
            cur, e = vx.copy(), 0
            tbl = {}
            for target in needed:
                while e < target:
                    cur = m @ cur
                    e += 1
                tbl[int(target)] = abs(complex(np.vdot(vy, cur))) / ynorm
            small = vals <= cutoff
            per_n[small] = [tbl[int(v)] for v in vals[small]]
        else:
            raise ModelError(f"unsupported model {model!r}")
        cs = np.cumsum(per_n)
        take = np.maximum(counts_at - 1, 0)
        totals = np.where(counts_at > 0, cs[take], 0.0)
        traces.append((y.spec_string(), totals / np.maximum(n_eff, 1)))
    sup = np.max(np.stack([t for _, t in traces]), axis=0)
    meta["note"] = "sup over finite witness family: a lower bound"
    return WeakAverageReport(cfg.checkpoints, n_eff, traces, sup, meta)


# -- independent cross-checks ------------------------------------------------------------

def brute_force_norm2(model, x: VectorModel, vals: Sequence[int],
                      c: Optional[np.ndarray] = None, exact: bool = False):
    """O(N^2) double sum over gram pairs, exact for rational inputs.

    Independent of the bucketing engine: no grouping of equal exponents.
    """
    vals = np.asarray(vals, dtype=np.int64)
    N = len(vals)
    w = x.support_width
    if isinstance(model, BilateralShift):
        r = x.autocorrelation(exact=exact)
        if exact and c is None:
            D = math.lcm(*[Fraction(v).denominator for v in x.coeffs])
            rint = {d: int(r[d] * D * D) for d in r}
            lut = np.zeros(2 * w + 1, dtype=np.int64)
            for d, v in rint.items():
                lut[d + w] = v
            diff = vals[:, None] - vals[None, :]
            diff = np.clip(diff + w, 0, 2 * w)
            total = int(lut[diff].sum())
            return Fraction(total, D * D) / Fraction(N) ** 2
        lut = np.zeros(2 * w + 1, dtype=np.complex128)
        for d, v in r.items():
            lut[d + w] = complex(v)
        diff = np.clip(vals[:, None] - vals[None, :] + w, 0, 2 * w)
        g = lut[diff]
        cc = np.ones(N, dtype=np.complex128) if c is None else c
        return float((cc[:, None] * cc[None, :].conj() * g).sum().real) / N ** 2
    if isinstance(model, SimilarShift):
        L = model.period
        table = similar_shift_gram_table(model, x, exact=exact)
        if exact and c is None:
            scale = Fraction(math.lcm(*[v.denominator for v in table.values()]))
            lut = np.zeros((L, 2 * w + 1), dtype=np.int64)
            for (rho, d), v in table.items():
                sv = v * scale
                assert sv.denominator == 1
                lut[rho, d + w] = int(sv)
            diff = np.clip(vals[:, None] - vals[None, :] + w, 0, 2 * w)
            rows = (vals[:, None] % L) * np.ones((1, N), dtype=np.int64)
            total = int(lut[rows, diff].sum())
            return Fraction(total) / scale / Fraction(N) ** 2
        lut = np.zeros((L, 2 * w + 1), dtype=np.complex128)
        for (rho, d), v in table.items():
            lut[rho, d + w] = complex(v)
        diff = np.clip(vals[:, None] - vals[None, :] + w, 0, 2 * w)
        rows = (vals[:, None] % L) * np.ones((1, N), dtype=np.int64)
        g = lut[rows, diff]
        cc = np.ones(N, dtype=np.complex128) if c is None else c
        return float((cc[:, None] * cc[None, :].conj() * g).sum().real) / N ** 2
    raise ModelError("brute force cross-check covers the shift family")


def materialized_norm2(model, x: VectorModel, vals: Sequence[int],
                       c: Optional[np.ndarray] = None) -> float:
    """Materialize the average vector coefficientwise and take its norm.

    Memory is proportional to max exponent; intended for n <= 10^4.
    """
    vals = np.asarray(vals, dtype=np.int64)
    N = len(vals)
    if isinstance(model, (BilateralShift, SimilarShift)):
        w = x.support_width
        size = int(vals.max()) + w + 1
        if size > 50_000_000:
            raise MemoryError("materialization would exceed the memory budget")
        acc = np.zeros(size, dtype=np.complex128)
        cc = np.ones(N, dtype=np.complex128) if c is None else c
        for i_rel in range(w):
            xi = complex(x.coeffs[i_rel])
            if isinstance(model, SimilarShift):
                i_abs = x.offset + i_rel
                ratios = np.array([float(model.d(i_abs + int(a)) / model.d(i_abs))
                                   for a in vals])
                np.add.at(acc, vals + i_rel, cc * xi * ratios)
            else:
                np.add.at(acc, vals + i_rel, cc * xi)
        return float(np.vdot(acc, acc).real) / N ** 2
    raise ModelError("materialization covers the shift family")
