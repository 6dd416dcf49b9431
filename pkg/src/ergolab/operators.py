"""Power bounded operator models with exact pairwise inner products.

Supported kinds:

* BilateralShift: the isometric shift on the two-sided sequence space,
  acting on finitely supported vectors; inner products of power images
  reduce to the autocorrelation of the coefficient word.
* SimilarShift: D S D^-1 for a periodic positive diagonal D; power
  bounded but not a contraction, with explicit norm table.
* DiagonalOperator: finitely many eigenvalues in the closed unit disk,
  unimodular ones given symbolically as fractions of a turn.
* MatrixOperator: a small dense matrix with spectral radius < 1.

Infinite-dimensional kinds are never truncated to matrices: they act on
finitely supported coordinates, so every inner product used by the
averaging engine is a finite exact sum.  Negative exponents follow the
identity convention and are clamped to 0 (T^0 = I gives the same
operator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .constants import CannotCertifyError, Coeff
from . import expr as ex


class ModelError(ValueError):
    """Invalid model construction (e.g. not power bounded)."""


Number = Union[int, Fraction, float, complex]


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def _conj(v):
    return v.conjugate() if isinstance(v, complex) else v


# -- vectors -----------------------------------------------------------------------

@dataclass(frozen=True)
class VectorModel:
    """Finitely supported coefficients on the basis, starting at `offset`."""
    coeffs: tuple
    offset: int = 0

    def __post_init__(self):
        if not self.coeffs:
            raise ModelError("empty vector")

    @property
    def support_width(self) -> int:
        return len(self.coeffs)

    def norm2(self):
        """Sum |x_i|^2, exact when the coefficients are."""
        if all(_is_exact(c) for c in self.coeffs):
            return sum(Fraction(c) * Fraction(c) for c in self.coeffs)
        return float(sum(abs(complex(c)) ** 2 for c in self.coeffs))

    def normalized_floats(self) -> np.ndarray:
        arr = np.array([complex(c) for c in self.coeffs], dtype=np.complex128)
        return arr / np.linalg.norm(arr)

    def autocorrelation(self, exact: bool = False) -> dict:
        """r(d) = sum_i x_i conj(x_{i+d}) for |d| < support width."""
        out = {}
        w = len(self.coeffs)
        for d in range(-(w - 1), w):
            if exact:
                s = Fraction(0)
                for i in range(w):
                    j = i + d
                    if 0 <= j < w:
                        s += Fraction(self.coeffs[i]) * Fraction(self.coeffs[j])
            else:
                s = 0j
                for i in range(w):
                    j = i + d
                    if 0 <= j < w:
                        s += complex(self.coeffs[i]) * _conj(complex(self.coeffs[j]))
            out[d] = s
        return out

    def spec_string(self) -> str:
        vals = ",".join(str(c) for c in self.coeffs)
        return f"coords:offset={self.offset};{vals}"

    @staticmethod
    def parse(s: str) -> "VectorModel":
        s = s.strip()
        if not s.startswith("coords:"):
            raise ValueError(f"bad vector spec {s!r}")
        head, _, vals = s[7:].partition(";")
        kv = dict(part.split("=") for part in head.split(",") if part)
        offset = int(kv.get("offset", 0))
        coeffs = tuple(Fraction(v) for v in vals.split(","))
        return VectorModel(coeffs, offset)

    @staticmethod
    def basis(index: int = 0) -> "VectorModel":
        return VectorModel((1,), index)


# -- eigenvalues for diagonal models -------------------------------------------------

@dataclass(frozen=True)
class DiagEntry:
    """One eigenvalue: modulus in [0, 1], phase as a fraction of a turn."""
    modulus: Fraction
    turn: Optional[Coeff] = None  # None means phase 0

    def __post_init__(self):
        if not (0 <= self.modulus <= 1):
            raise ModelError("eigenvalue modulus must lie in [0, 1]")

    @property
    def unimodular(self) -> bool:
        return self.modulus == 1

    def value(self) -> complex:
        lam = float(self.modulus)
        if self.turn is None:
            return complex(lam)
        return lam * complex(np.exp(2j * np.pi * float(self.turn.mpf(30))))

    def spec_string(self) -> str:
        if self.unimodular:
            t = self.turn if self.turn is not None else Coeff.rational(0)
            return f"u({ex.to_string(ex.Const(t))})"
        if self.turn is None:
            return str(self.modulus)
        return f"r({self.modulus};{ex.to_string(ex.Const(self.turn))})"


# -- models --------------------------------------------------------------------------

@dataclass(frozen=True)
class BilateralShift:
    kind: str = field(default="shift", init=False)

    def power_bound(self, n_max: int = 0) -> tuple:
        return Fraction(1), 0

    def peripheral_point_spectrum(self) -> tuple:
        return ()

    def spec_string(self) -> str:
        return "shift"


@dataclass(frozen=True)
class SimilarShift:
    """D S D^-1 with D the periodic diagonal given by `pattern`."""
    pattern: tuple
    kind: str = field(default="simshift", init=False)

    def __post_init__(self):
        if not self.pattern or any(Fraction(p) <= 0 for p in self.pattern):
            raise ModelError("pattern must be positive")

    @property
    def period(self) -> int:
        return len(self.pattern)

    def d(self, i: int) -> Fraction:
        return Fraction(self.pattern[i % self.period])

    def power_norm(self, n: int) -> Fraction:
        """||T^n|| = max_i d_{i+n} / d_i, exact."""
        return max(self.d(i + n) / self.d(i) for i in range(self.period))

    def power_bound(self, n_max: int = 1000) -> tuple:
        best, arg = Fraction(1), 0
        for n in range(0, min(n_max, self.period * 2) + 1):
            v = self.power_norm(n)
            if v > best:
                best, arg = v, n
        return best, arg

    def kappa(self) -> Fraction:
        return max(Fraction(p) for p in self.pattern) / min(Fraction(p) for p in self.pattern)

    def peripheral_point_spectrum(self) -> tuple:
        return ()

    def spec_string(self) -> str:
        return "simshift:pattern=" + ",".join(str(p) for p in self.pattern)


@dataclass(frozen=True)
class DiagonalOperator:
    entries: tuple  # DiagEntry

    def __post_init__(self):
        if not self.entries:
            raise ModelError("empty diagonal")

    @property
    def kind(self) -> str:
        return "diagu" if all(e.unimodular for e in self.entries) else "diag"

    def power_bound(self, n_max: int = 0) -> tuple:
        return Fraction(1), 0

    def peripheral_point_spectrum(self) -> tuple:
        return tuple(e for e in self.entries if e.unimodular)

    def spec_string(self) -> str:
        if self.kind == "diagu":
            return "diagu:" + ",".join(
                ex.to_string(ex.Const(e.turn if e.turn is not None else Coeff.rational(0)))
                for e in self.entries)
        return "diag:" + ",".join(e.spec_string() for e in self.entries)


@dataclass(frozen=True)
class MatrixOperator:
    rows: tuple  # tuple of tuples of floats/complex
    kind: str = field(default="mat", init=False)

    def __post_init__(self):
        m = self.array()
        if m.shape[0] != m.shape[1]:
            raise ModelError("matrix must be square")
        rho = max(abs(np.linalg.eigvals(m)))
        if rho >= 1 - 1e-9:
            raise ModelError(f"spectral radius {rho:.6f} is not < 1")

    def array(self) -> np.ndarray:
        return np.array([[complex(v) for v in row] for row in self.rows],
                        dtype=np.complex128)

    def power_bound(self, n_max: int = 10 ** 6) -> tuple:
        m = self.array()
        acc = np.eye(m.shape[0], dtype=np.complex128)
        best, arg, n = 1.0, 0, 0
        while n < n_max:
            acc = acc @ m
            n += 1
            nv = float(np.linalg.norm(acc, 2))
            if nv > best:
                best, arg = nv, n
            if nv < 0.5:
                break
        return best, arg

    def decay_cutoff(self, tol: float = 1e-30) -> int:
        """a with certified ||T^n|| < tol for all n >= a."""
        m = self.array()
        acc = np.eye(m.shape[0], dtype=np.complex128)
        j, q = 0, 1.0
        M, _ = self.power_bound()
        while True:
            acc = acc @ m
            j += 1
            q = float(np.linalg.norm(acc, 2))
            if q < 0.5:
                break
            if j > 10 ** 5:
                raise ModelError("matrix norm does not contract")
        # ||T^n|| <= M * q^(n // j)
        k = math.ceil(math.log(tol / M) / math.log(q))
        return j * max(k, 0) + j

    def peripheral_point_spectrum(self) -> tuple:
        return ()

    def spec_string(self) -> str:
        return "mat:" + ";".join(",".join(repr(float(v.real)) if not isinstance(v, complex) or v.imag == 0
                                          else repr(v) for v in row) for row in self.rows)


OperatorModel = Union[BilateralShift, SimilarShift, DiagonalOperator, MatrixOperator]


def parse_model(s: str) -> OperatorModel:
    s = s.strip()
    if s == "shift":
        return BilateralShift()
    if s.startswith("simshift:"):
        kv = dict(part.split("=") for part in s[9:].split(";"))
        return SimilarShift(tuple(Fraction(v) for v in kv["pattern"].split(",")))
    if s.startswith("diagu:"):
        entries = []
        for tok in s[6:].split(","):
            phase = ex.parse(tok)
            if not isinstance(phase, ex.Const):
                raise ValueError("diagonal phases must be constants")
            entries.append(DiagEntry(Fraction(1), phase.value))
        return DiagonalOperator(tuple(entries))
    if s.startswith("diag:"):
        entries = []
        for tok in s[5:].split(","):
            tok = tok.strip()
            if tok.startswith("u(") and tok.endswith(")"):
                phase = ex.parse(tok[2:-1])
                entries.append(DiagEntry(Fraction(1), phase.value))
            elif tok.startswith("r(") and tok.endswith(")"):
                mod_s, _, turn_s = tok[2:-1].partition(";")
                phase = ex.parse(turn_s)
                entries.append(DiagEntry(Fraction(mod_s), phase.value))
            else:
                entries.append(DiagEntry(abs(Fraction(tok)),
                                         None if Fraction(tok) >= 0 else Coeff.rational(Fraction(1, 2))))
        return DiagonalOperator(tuple(entries))
    if s.startswith("mat:"):
        rows = tuple(tuple(float(v) for v in row.split(","))
                     for row in s[4:].split(";"))
        return MatrixOperator(rows)
    raise ValueError(f"bad model spec {s!r}")


# -- inner products -------------------------------------------------------------------

def similar_shift_gram_table(model: SimilarShift, x: VectorModel,
                             exact: bool = False) -> dict:
    """R[(rho, d)] = <T^a x, T^b x> for a = rho mod period, d = a - b."""
    L = model.period
    w = x.support_width
    out = {}
    for rho in range(L):
        for d in range(-(w - 1), w):
            s = Fraction(0) if exact else 0j
            for i_rel in range(w):
                j_rel = i_rel + d
                if not (0 <= j_rel < w):
                    continue
                i = x.offset + i_rel
                da = model.d(i + rho)
                wt = da * da / (model.d(i) * model.d(i + d))
                if exact:
                    s += Fraction(x.coeffs[i_rel]) * Fraction(x.coeffs[j_rel]) * wt
                else:
                    s += (complex(x.coeffs[i_rel]) * _conj(complex(x.coeffs[j_rel]))
                          * float(wt))
            out[(rho, d)] = s
    return out


def gram(model: OperatorModel, x: VectorModel, a: int, b: int,
         exact: bool = False):
    """<T^a x, T^b x>; negative exponents act as the identity (clamped to 0)."""
    a, b = max(int(a), 0), max(int(b), 0)
    if isinstance(model, BilateralShift):
        r = x.autocorrelation(exact=exact)
        d = a - b
        if d not in r:
            return Fraction(0) if exact else 0j
        return r[d]
    if isinstance(model, SimilarShift):
        d = a - b
        if abs(d) >= x.support_width:
            return Fraction(0) if exact else 0j
        table = similar_shift_gram_table(model, x, exact=exact)
        return table[(a % model.period, d)]
    if isinstance(model, DiagonalOperator):
        if len(x.coeffs) != len(model.entries):
            raise ModelError("vector dimension mismatch")
        s = 0j
        for e, c in zip(model.entries, x.coeffs):
            lam = e.value()
            s += abs(complex(c)) ** 2 * lam ** a * _conj(lam) ** b
        return s
    if isinstance(model, MatrixOperator):
        m = model.array()
        vx = np.array([complex(c) for c in x.coeffs])
        va = np.linalg.matrix_power(m, a) @ vx
        vb = np.linalg.matrix_power(m, b) @ vx
        return complex(np.vdot(vb, va))
    raise ModelError(f"unsupported model {model!r}")


def power_bound(model: OperatorModel, n_max: int = 1000) -> tuple:
    """Certified M = sup ||T^n|| over n <= n_max (exact for shift kinds)."""
    return model.power_bound(n_max)


def jgdl_split(model: OperatorModel, tol: float = 1e-9) -> tuple:
    """(X1 indices, X2 indices): unimodular eigenvalue directions vs. the rest."""
    if isinstance(model, DiagonalOperator):
        x1 = tuple(i for i, e in enumerate(model.entries) if e.unimodular)
        x2 = tuple(i for i, e in enumerate(model.entries) if not e.unimodular)
        return x1, x2
    if isinstance(model, MatrixOperator):
        eig = np.linalg.eigvals(model.array())
        x1 = tuple(i for i, v in enumerate(eig) if abs(abs(v) - 1) <= tol)
        x2 = tuple(i for i, v in enumerate(eig) if abs(abs(v) - 1) > tol)
        return x1, x2
    raise ModelError("the split applies to diagonalizable finite models")
