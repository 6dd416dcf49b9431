"""Checkpointed traces of running averages and finite-horizon verdicts.

A verdict never claims more than the trace shows: "limit exists" means
the oscillation over the final decade of checkpoints stays below the
convergence tolerance, "diverges" needs oscillation above the divergence
tolerance, and the band in between is reported as inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

CONVERGES_TO_0 = "converges-to-0"
CONVERGES_NONZERO = "converges-nonzero"
DIVERGES = "diverges"
INCONCLUSIVE = "inconclusive"

DEFAULT_TOL_CONVERGE = 0.02
DEFAULT_TOL_DIVERGE = 0.1


def oscillation(checkpoints: np.ndarray, values: np.ndarray) -> float:
    """Max pairwise distance of trace values over the final decade."""
    checkpoints = np.asarray(checkpoints)
    mask = checkpoints >= checkpoints[-1] / 10
    vals = np.asarray(values)[mask]
    if np.iscomplexobj(vals):
        diff = np.abs(vals[:, None] - vals[None, :])
        return float(diff.max())
    return float(vals.max() - vals.min())


def assess(checkpoints: np.ndarray, values: np.ndarray,
           tol_converge: float = DEFAULT_TOL_CONVERGE,
           tol_diverge: float = DEFAULT_TOL_DIVERGE) -> str:
    """Finite-horizon verdict on a running-average trace."""
    checkpoints = np.asarray(checkpoints)
    values = np.asarray(values)
    if len(checkpoints) < 10:
        raise ValueError("need at least 10 checkpoints for a verdict")
    mags = np.abs(values)
    mask = checkpoints >= checkpoints[-1] / 10
    osc = oscillation(checkpoints, values)
    if mags[-1] < tol_converge and mags[mask].max() < 2 * tol_converge:
        return CONVERGES_TO_0
    if osc <= tol_converge:
        return CONVERGES_NONZERO
    if osc > tol_diverge:
        return DIVERGES
    return INCONCLUSIVE


@dataclass
class ScalarTrace:
    """Running mean of a scalar sequence at geometric checkpoints."""
    checkpoints: np.ndarray
    values: np.ndarray           # complex128 running means
    err: float = 0.0             # phase/rounding error bound on inputs
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> complex:
        return complex(self.values[-1])

    @property
    def final_abs(self) -> float:
        return float(abs(self.values[-1]))

    def oscillation(self) -> float:
        return oscillation(self.checkpoints, self.values)

    def verdict(self, tol_converge: float = DEFAULT_TOL_CONVERGE,
                tol_diverge: float = DEFAULT_TOL_DIVERGE) -> str:
        return assess(self.checkpoints, self.values, tol_converge, tol_diverge)

    def to_rows(self):
        """Rows (N, re, im, abs) for CSV export."""
        for n, v in zip(self.checkpoints, self.values):
            yield int(n), float(v.real), float(v.imag), float(abs(v))


def running_mean_trace(values: np.ndarray, checkpoints: np.ndarray,
                       err: float = 0.0, meta: dict | None = None) -> ScalarTrace:
    """Partial means of values at the given 1-based checkpoints."""
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    cs = np.cumsum(values)
    means = cs[checkpoints - 1] / checkpoints
    return ScalarTrace(checkpoints, means.astype(np.complex128), err,
                       dict(meta or {}))
