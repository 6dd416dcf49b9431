"""Deterministic machine-readable outputs: trace CSV, verdict JSON, manifests.

Identical runs must produce byte-identical files: JSON keys are sorted,
floats go through repr (shortest round-trip form), CSV rows are written
in a fixed order, and wall-clock timing lives only in the run manifest,
never in result files.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from .averaging import AverageTrace
from .traces import ScalarTrace


def write_json(obj, path: str) -> None:
    """Stable-key JSON written atomically."""
    text = json.dumps(obj, sort_keys=True, indent=2, default=_default)
    _atomic_write(path, text + "\n")


def _default(o):
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if isinstance(o, (set, tuple)):
        return list(o)
    try:
        import numpy as np
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
    except ImportError:
        pass
    from fractions import Fraction
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def average_trace_csv(trace: AverageTrace, path: str) -> None:
    """Columns: N, N_eff, value_re, value_im, norm2, osc."""
    rows = [["N", "N_eff", "value_re", "value_im", "norm2", "osc"]]
    for row in trace.to_rows():
        rows.append([_cell(v) for v in row])
    _write_csv(rows, path)


def scalar_trace_csv(trace: ScalarTrace, path: str) -> None:
    """Columns: N, re, im, abs."""
    rows = [["N", "re", "im", "abs"]]
    for row in trace.to_rows():
        rows.append([_cell(v) for v in row])
    _write_csv(rows, path)


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(rows, path: str) -> None:
    import io
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerows(rows)
    _atomic_write(path, buf.getvalue())


@dataclass
class RunManifest:
    """Provenance record paired with every output file."""
    subcommand: str
    config: dict
    outputs: list = field(default_factory=list)
    seeds: dict = field(default_factory=dict)
    precision: dict = field(default_factory=dict)
    version: str = __version__
    wall_clock_s: Optional[float] = None
    _t0: float = field(default_factory=time.monotonic, repr=False)

    def finish(self) -> None:
        self.wall_clock_s = round(time.monotonic() - self._t0, 3)

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "outputs": sorted(self.outputs),
            "seeds": self.seeds,
            "precision": self.precision,
            "version": self.version,
            "wall_clock_s": self.wall_clock_s,
        }

    def write(self, path: str) -> None:
        self.finish()
        write_json(self.to_dict(), path)
