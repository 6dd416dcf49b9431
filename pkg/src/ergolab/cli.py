"""Command line driver: every module as a subcommand, deterministic outputs.

Subcommands: classify, seq, bk, set, weyl, bosh, qtest, average, battery.
Each prints a JSON result to stdout; with --out-dir, full traces (CSV),
verdicts (JSON) and a run manifest are written atomically.  Exit codes:
0 success, 2 battery expectation failures, 3 single-run expectation
mismatch, 4 difference-to-main consistency gate violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from . import expr as ex
from .averaging import (AverageTrace, ExperimentConfig, difference_average,
                        vector_average)
from .classify import classify_Ml, classify_Pm
from .index_sets import IndexSet, default_checkpoints, density, extract_Akm, regularity_report
from .operators import VectorModel, parse_model, power_bound
from .reporting import RunManifest, average_trace_csv, scalar_trace_csv, write_json
from .sequences import (SubsequenceSpec, bk_diagnostics, build_bk, generate_a,
                        ratio_diagnostics, write_binary, write_decimal)
from .traces import DEFAULT_TOL_CONVERGE, DEFAULT_TOL_DIVERGE
from .weights import WeightSpec, boshernitzan_trichotomy, q_test, weyl_test


def _parse_n(s: str) -> int:
    return int(float(s))


def _out(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _emit(args, manifest: RunManifest, result: dict, stem: str) -> None:
    if args.out_dir:
        path = _out(args, f"{stem}.json")
        write_json(result, path)
        manifest.outputs.append(path)
        manifest.write(_out(args, f"{stem}.manifest.json"))
    print(json.dumps(result, sort_keys=True, indent=2, default=_json_default))


def _json_default(o):
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(str(type(o)))


# -- subcommands --------------------------------------------------------------------

def cmd_classify(args) -> int:
    manifest = RunManifest("classify", {"expr": args.expr, "m_max": args.m_max,
                                        "l_max": args.l_max})
    f = ex.parse(args.expr)
    pm = classify_Pm(f, m_max=args.m_max, horizon=args.horizon)
    ml = classify_Ml(f, l_max=args.l_max, horizon=args.horizon)
    result = {"expr": ex.to_string(f), "Pm": pm.to_dict(), "Ml": ml.to_dict()}
    _emit(args, manifest, result, "classify")
    return 0


def cmd_seq(args) -> int:
    spec = SubsequenceSpec.parse(args.spec)
    manifest = RunManifest("seq", {"spec": spec.spec_string(), "N": args.N})
    g = generate_a(spec, args.N)
    result = {"spec": spec.spec_string(), "N": args.N,
              "flagged": g.flagged_count, "r": g.r,
              "head": g.a[:10].tolist(), "tail": g.a[-3:].tolist()}
    if args.diagnostics:
        result["diagnostics"] = ratio_diagnostics(g.a).to_dict()
    if args.out_dir:
        path = _out(args, "sequence.bin" if args.binary else "sequence.txt")
        (write_binary if args.binary else write_decimal)(g.a, path)
        manifest.outputs.append(path)
    _emit(args, manifest, result, "seq")
    return 0


def cmd_bk(args) -> int:
    f = ex.parse(args.expr)
    manifest = RunManifest("bk", {"expr": args.expr, "K": args.K})
    table = build_bk(f, args.K)
    result = {"expr": ex.to_string(f), "K": args.K, "mono_from": table.mono_from,
              "head": table.b[:10].tolist(), "tail": table.b[-3:].tolist()}
    if args.diagnostics:
        result["diagnostics"] = bk_diagnostics(table).to_dict()
    if args.out_dir:
        path = _out(args, "bk.txt")
        write_decimal(table.b, path)
        manifest.outputs.append(path)
    _emit(args, manifest, result, "bk")
    return 0


def cmd_set(args) -> int:
    A = IndexSet.parse(args.spec)
    manifest = RunManifest("set", {"spec": A.spec_string(), "N": args.N},
                           seeds={"seed": args.seed})
    result = {"spec": A.spec_string(), "N": args.N}
    if args.density:
        rep = density(A, args.N, tol=args.tol)
        result["density"] = rep.to_dict()
    if args.regularity is not None:
        ws = regularity_report(A, args.regularity, args.N, tol=args.tol)
        result["regularity"] = {"all_converged": ws.all_converged,
                                "weak_evidence": ws.weak_evidence,
                                "verdicts": ws.verdicts()}
    if args.akm:
        k, m = (int(v) for v in args.akm.split(","))
        sub = extract_Akm(A, k, m, args.N)
        result["akm"] = {"k": k, "m": m, "count": int(len(sub.elements_array)),
                         "head": sub.elements_array[:10].tolist()}
    _emit(args, manifest, result, "set")
    return 0


def cmd_weyl(args) -> int:
    manifest = RunManifest("weyl", {"g": args.expr, "N": args.N, "m_max": args.m_max})
    rep = weyl_test(args.expr, args.N, m_max=args.m_max, tol=args.tol)
    result = {"g": args.expr, "N": args.N, **rep.to_dict()}
    if args.out_dir:
        for m in rep.m_values:
            path = _out(args, f"weyl_m{m}.csv")
            scalar_trace_csv(rep.traces[m], path)
            manifest.outputs.append(path)
    _emit(args, manifest, result, "weyl")
    return 0


def cmd_bosh(args) -> int:
    manifest = RunManifest("bosh", {"g": args.expr})
    tri = boshernitzan_trichotomy(args.expr, N=args.N)
    result = {"g": args.expr, **tri.to_dict()}
    _emit(args, manifest, result, "bosh")
    return 0


def cmd_qtest(args) -> int:
    manifest = RunManifest("qtest", {"g": args.expr, "k_max": args.k_max,
                                     "m_bound": args.m_bound, "N": args.N})
    qv = q_test(args.expr, k_max=args.k_max, m_bound=args.m_bound, N=args.N,
                tol_converge=args.tol, empirical_traces=args.traces)
    result = {"g": args.expr, **qv.to_dict()}
    _emit(args, manifest, result, "qtest")
    return 0


def _build_config(args) -> ExperimentConfig:
    return ExperimentConfig(
        model=parse_model(args.model),
        x=VectorModel.parse(args.vector),
        subsequence=SubsequenceSpec.parse(args.f),
        index_set=IndexSet.parse(args.set),
        weights=WeightSpec.parse(args.weights),
        n_max=args.N,
        dedup=args.dedup,
        exact=args.exact,
    )


def cmd_average(args) -> int:
    cfg = _build_config(args)
    manifest = RunManifest("average", cfg.describe())
    trace = vector_average(cfg)
    v = trace.verdict(args.tol, args.tol_diverge)
    M, argn = power_bound(cfg.model)
    result = {"config": cfg.describe(), "verdict": v,
              "final_norm2": trace.final_norm2,
              "oscillation": trace.oscillation(),
              "power_bound": {"M": float(M), "argmax_n": argn},
              "tolerances": {"converge": args.tol, "diverge": args.tol_diverge}}
    diffs = {}
    for k in args.diff_k:
        dtr = difference_average(cfg, k)
        diffs[str(k)] = {"verdict": dtr.verdict(args.tol, args.tol_diverge),
                         "final_norm2": dtr.final_norm2}
    if diffs:
        result["difference_averages"] = diffs
    if args.out_dir:
        path = _out(args, "average_trace.csv")
        average_trace_csv(trace, path)
        manifest.outputs.append(path)
    _emit(args, manifest, result, "average")
    if args.expect and v != args.expect:
        print(f"expectation failed: verdict {v} != expected {args.expect}",
              file=sys.stderr)
        return 3
    return 0


def run_battery_experiment(entry: dict, defaults: dict) -> dict:
    """One battery entry; returns the result record (raises nothing)."""
    kind = entry["kind"]
    out = {"name": entry.get("name", kind), "kind": kind, "ok": True, "detail": {}}
    try:
        if kind == "average":
            cfg = ExperimentConfig(
                model=parse_model(entry.get("model", "shift")),
                x=VectorModel.parse(entry.get("vector", "coords:offset=0;1")),
                subsequence=SubsequenceSpec.parse(entry["f"]),
                index_set=IndexSet.parse(entry.get("set", "nat")),
                weights=WeightSpec.parse(entry.get("weights", "one")),
                n_max=int(entry.get("N", defaults["N"])),
                dedup=bool(entry.get("dedup", False)),
                exact=bool(entry.get("exact", False)),
            )
            tol = float(entry.get("tol", defaults["tol"]))
            trace = vector_average(cfg)
            v = trace.verdict(tol, DEFAULT_TOL_DIVERGE)
            out["detail"] = {"verdict": v, "final_norm2": trace.final_norm2}
            expected = entry.get("expect")
            if expected and v != expected:
                out["ok"] = False
            diff_ks = entry.get("difference_k", [])
            if diff_ks:
                dv = {}
                for k in diff_ks:
                    dtr = difference_average(cfg, int(k))
                    dv[str(k)] = dtr.verdict(tol, DEFAULT_TOL_DIVERGE)
                out["detail"]["difference_verdicts"] = dv
                out["detail"]["gate"] = {
                    "diffs_converge": all(x == "converges-to-0" for x in dv.values()),
                    "main_verdict": v,
                }
        elif kind == "qtest":
            qv = q_test(entry["g"], k_max=int(entry.get("k_max", 2)),
                        m_bound=int(entry.get("m_bound", 2)),
                        N=entry.get("N"), empirical_traces=bool(entry.get("traces", False)))
            out["detail"] = qv.to_dict()
            if "expect_overall" in entry and qv.overall != entry["expect_overall"]:
                out["ok"] = False
        elif kind == "weyl":
            rep = weyl_test(entry["g"], int(entry.get("N", defaults["N"])),
                            m_max=int(entry.get("m_max", 5)),
                            tol=float(entry.get("tol", defaults["tol"])))
            out["detail"] = rep.to_dict()
            if "expect_pass" in entry and rep.overall_pass != bool(entry["expect_pass"]):
                out["ok"] = False
        elif kind == "bosh":
            tri = boshernitzan_trichotomy(entry["g"], N=entry.get("N"))
            out["detail"] = tri.to_dict()
            if "expect" in entry and tri.verdict != entry["expect"]:
                out["ok"] = False
        elif kind == "set":
            A = IndexSet.parse(entry["spec"])
            N = int(entry.get("N", defaults["N"]))
            rep = density(A, N, tol=float(entry.get("density_tol", 0.01)))
            out["detail"] = {"density": rep.extrapolated, "band": rep.band}
            if "expect_density" in entry:
                tol = float(entry.get("density_tol", 0.01))
                if abs(rep.extrapolated - float(entry["expect_density"])) > tol:
                    out["ok"] = False
            if "regularity_K" in entry:
                ws = regularity_report(A, int(entry["regularity_K"]), N)
                out["detail"]["regularity_all_converged"] = ws.all_converged
                if not ws.all_converged:
                    out["ok"] = False
        else:
            out["ok"] = False
            out["detail"] = {"error": f"unknown kind {kind!r}"}
    except Exception as e:  # noqa: BLE001 - battery reports, never crashes
        out["ok"] = False
        out["detail"] = {"error": f"{type(e).__name__}: {e}"}
    return out


def cmd_battery(args) -> int:
    with open(args.manifest) as f:
        spec = json.load(f)
    defaults = {"N": args.N or 10 ** 5, "tol": args.tol}
    entries = spec["experiments"]
    manifest = RunManifest("battery", {"manifest": args.manifest,
                                       "count": len(entries)})
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(lambda e: run_battery_experiment(e, defaults),
                                    entries))
    else:
        results = [run_battery_experiment(e, defaults) for e in entries]
    gate_violations = []
    for r in results:
        gate = r["detail"].get("gate") if isinstance(r["detail"], dict) else None
        if gate and gate["diffs_converge"] and gate["main_verdict"] == "diverges":
            gate_violations.append(r["name"])
    failures = [r["name"] for r in results if not r["ok"]]
    summary = {"name": spec.get("name", "battery"),
               "total": len(results),
               "failures": failures,
               "gate_violations": gate_violations,
               "results": results}
    if args.out_dir:
        path = _out(args, "battery_results.json")
        write_json(summary, path)
        manifest.outputs.append(path)
        manifest.write(_out(args, "battery.manifest.json"))
    print(json.dumps({k: summary[k] for k in
                      ("name", "total", "failures", "gate_violations")},
                     sort_keys=True, indent=2))
    if gate_violations:
        return 4
    if failures:
        return 2
    return 0


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ergolab",
                                description="subsequential and weighted averaging laboratory")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=_parse_n, default=10 ** 5,
                        help="horizon (accepts 1e6 style)")
    common.add_argument("--precision-digits", type=int, default=32)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL_CONVERGE)
    common.add_argument("--tol-diverge", type=float, default=DEFAULT_TOL_DIVERGE)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="growth classification")
    c.add_argument("expr")
    c.add_argument("--m-max", type=int, default=4)
    c.add_argument("--l-max", type=int, default=6)
    c.add_argument("--horizon", type=float, default=2.0 ** 40)
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("seq", parents=[common], help="generate a_n = [f(n)] + h_n")
    s.add_argument("spec", help="expression[;perturbation]")
    s.add_argument("--binary", action="store_true")
    s.add_argument("--diagnostics", action="store_true")
    s.set_defaults(func=cmd_seq)

    b = sub.add_parser("bk", parents=[common], help="level-crossing table")
    b.add_argument("expr")
    b.add_argument("--K", type=_parse_n, default=200)
    b.add_argument("--diagnostics", action="store_true")
    b.set_defaults(func=cmd_bk)

    st = sub.add_parser("set", parents=[common], help="index set reports")
    st.add_argument("spec")
    st.add_argument("--density", action="store_true")
    st.add_argument("--regularity", type=int, default=None, metavar="K")
    st.add_argument("--akm", default=None, metavar="k,m")
    st.set_defaults(func=cmd_set)

    w = sub.add_parser("weyl", parents=[common], help="equidistribution test")
    w.add_argument("expr")
    w.add_argument("--m-max", type=int, default=5)
    w.set_defaults(func=cmd_weyl)

    bo = sub.add_parser("bosh", parents=[common], help="distribution trichotomy")
    bo.add_argument("expr")
    bo.set_defaults(func=cmd_bosh)

    q = sub.add_parser("qtest", parents=[common], help="interval regularity test")
    q.add_argument("expr")
    q.add_argument("--k-max", type=int, default=2)
    q.add_argument("--m-bound", type=int, default=2)
    q.add_argument("--traces", action="store_true",
                   help="run empirical tuple traces even on symbolic routes")
    q.set_defaults(func=cmd_qtest)

    a = sub.add_parser("average", parents=[common], help="operator averages")
    a.add_argument("--model", default="shift")
    a.add_argument("--vector", default="coords:offset=0;1")
    a.add_argument("--f", required=True, help="subsequence spec")
    a.add_argument("--set", default="nat")
    a.add_argument("--weights", default="one")
    a.add_argument("--dedup", action="store_true")
    a.add_argument("--exact", action="store_true")
    a.add_argument("--expect", default=None)
    a.add_argument("--diff-k", type=int, nargs="*", default=[])
    a.set_defaults(func=cmd_average)

    bt = sub.add_parser("battery", parents=[common], help="run a manifest of experiments")
    bt.add_argument("manifest")
    bt.set_defaults(func=cmd_battery)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
