"""Command line scenario runner.

    ricci-compare list-builtins [--json]
    ricci-compare run CONFIG [--grid N] [--tol X] [--jobs K] [--out DIR] [--allow-inconclusive]

Exit status: 0 success, 1 check violation, 2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import comparison as cmp
from . import model_manifold as mmod
from .errors import ConfigError, NumericalFailure, RicciCompareError
from .gallery import INFORMATIONAL, Scenario, build_scenario, list_builtins
from .rigidity import verify_equality_case, verify_pole_smoothness

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SUMMARY_COLUMNS = (
    "check",
    "status",
    "verdict",
    "min_hypothesis_margin",
    "r_min_hypothesis",
    "min_conclusion_margin",
    "r_min_conclusion",
    "note",
)


@dataclass
class CheckResult:
    check: str
    status: str  # pass | inconclusive | violation | info | error | numerical
    verdict: str
    csv: str
    margins: tuple = (math.nan, math.nan, math.nan, math.nan)
    note: str = ""


@dataclass
class RunSummary:
    scenario: Scenario
    results: list
    exit_code: int
    wall_time: float
    config_echo: dict = field(default_factory=dict)

    def verdicts(self):
        return {r.check: r.verdict for r in self.results}


def _fmt(x):
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def _csv_field(text):
    text = str(text)
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _divergence_csv(name, dv, extra=""):
    buf = io.StringIO()
    buf.write(f"# {cmp.CSV_VERSION}; check={name}; verdict={dv}{extra}\n")
    buf.write("horizon,partial_integral\n")
    for h, v in dv.partial_integrals:
        buf.write(f"{h:.17g},{v:.17g}\n")
    return buf.getvalue()


def _keyvalue_csv(name, verdict, items):
    buf = io.StringIO()
    buf.write(f"# {cmp.CSV_VERSION}; check={name}; verdict={verdict}\n")
    buf.write("key,value\n")
    for k, v in items.items():
        buf.write(f"{k},{_fmt(v)}\n")
    return buf.getvalue()


def _from_report(name, rep, allow_inconclusive):
    kind = rep.verdict.kind
    if kind == cmp.PASS:
        status = "pass"
    elif kind == cmp.INCONCLUSIVE:
        status = "inconclusive"
    else:
        status = "violation"
    s = rep.summary()
    margins = (s["min_hypothesis_margin"], s["r_min_hypothesis"], s["min_conclusion_margin"], s["r_min_conclusion"])
    note = ";".join(f"{k}={_fmt(v)}" for k, v in rep.details.items())
    return CheckResult(name, status, str(rep.verdict), rep.to_csv(), margins, note)


def _run_check(name, scn, built):
    mm, mf = built.mm, built.mf
    tol, R, N = scn.tolerance, scn.R, scn.grid_size
    allow = scn.allow_inconclusive
    if name == "ricci_hypothesis":
        return _from_report(name, cmp.check_ricci_hypothesis(mm, mf, R, N, tol), allow)
    if name == "laplacian":
        return _from_report(name, cmp.check_laplacian_comparison(mm, mf, R, N, tol), allow)
    if name == "riccati":
        fd = cmp.Tolerance(max(tol.atol, 1e-6), max(tol.rtol, 1e-6))
        return _from_report(name, cmp.check_riccati_inequality(mm, mf, R, N, fd), allow)
    if name == "blowup":
        return _from_report(name, cmp.check_blowup(mm, mf, tol, N), allow)
    if name == "myers":
        return _from_report(name, cmp.check_myers(mm, mf, tol, N), allow)
    if name == "volume_element":
        return _from_report(name, cmp.check_volume_element(mm, mf, R, N, tol), allow)
    if name == "bg_s":
        return _from_report(name, cmp.check_bg_s(mm, mf, None, R, N, tol), allow)
    if name == "bg_r":
        return _from_report(name, cmp.check_bg_r(mm, mf, None, R, N, tol), allow)
    if name == "ball_growth":
        return _from_report(name, cmp.check_ball_growth(mm, scn.ball_pairs, tol, N), allow)
    if name == "kappa0":
        return _from_report(name, cmp.check_kappa0_bound(mm, R, N, tol), allow)
    if name == "completeness":
        dv = cmp.check_vm_completeness(mm, scn.horizons)
        return CheckResult(name, "info", str(dv), _divergence_csv(name, dv), note=f"exponent={_fmt(dv.fitted_growth_exponent)}")
    if name == "ambrose":
        dv, implied = cmp.check_ambrose(mm, scn.horizons)
        csv = _divergence_csv(name, dv, f"; compactness={implied}")
        return CheckResult(name, "info", f"{dv.classification},{implied}", csv, note=f"compactness={implied}")
    if name == "best_kappa":
        k = cmp.find_best_constant_kappa(mm, R, N)
        return CheckResult(name, "info", _fmt(k), _keyvalue_csv(name, _fmt(k), {"best_constant_kappa": k}))
    if name == "equality":
        rep = verify_equality_case(built.model, N, strict=False)
        return _from_report(name, rep, allow)
    if name == "pole_smoothness":
        diag = verify_pole_smoothness(built.model)
        return CheckResult(name, "pass", cmp.PASS, _keyvalue_csv(name, cmp.PASS, diag))
    raise ConfigError(f"unknown check {name!r}", "checks")


def _guarded(name, scn, built):
    try:
        return _run_check(name, scn, built)
    except NumericalFailure as exc:
        return CheckResult(name, "numerical", type(exc).__name__, "", note=str(exc))
    except (RicciCompareError, ValueError, ArithmeticError) as exc:
        return CheckResult(name, "error", type(exc).__name__, "", note=str(exc))


def _exit_code(results, allow_inconclusive):
    statuses = {r.status for r in results}
    if "numerical" in statuses:
        return EXIT_NUMERICAL
    if statuses & {"violation", "error"}:
        return EXIT_VIOLATION
    if "inconclusive" in statuses and not allow_inconclusive:
        return EXIT_VIOLATION
    return EXIT_OK


def _atomic_write(path, text):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def summary_csv(results):
    buf = io.StringIO()
    buf.write(f"# {cmp.CSV_VERSION}; summary\n")
    buf.write(",".join(SUMMARY_COLUMNS) + "\n")
    for r in results:
        row = [r.check, r.status, r.verdict, *(_fmt(float(x)) for x in r.margins), r.note]
        buf.write(",".join(_csv_field(x) for x in row) + "\n")
    return buf.getvalue()


def profile_csv(mm, points=1001):
    """Plot-ready radial data: r, f, v, V_gamma, s_p."""
    top = min(mm.extent, mm.r_max)
    r = np.linspace(0.0, top, points)
    buf = io.StringIO()
    buf.write(f"# {cmp.CSV_VERSION}; profile={mm.profile.label}\n")
    buf.write("r,f,v,V_gamma,s_p\n")
    cols = [r, mm.profile.f(r), mm.profile.v(r), np.asarray(mmod.v_gamma(mm, r)), np.asarray(mmod.s_p_eval(mm, r))]
    for row in zip(*cols):
        buf.write(",".join("%.17g" % x for x in row) + "\n")
    return buf.getvalue()


def run(scenario, jobs=1, out=None):
    """Execute the scenario's checks (in declared order) and write CSV outputs."""
    t0 = time.perf_counter()
    try:
        built = build_scenario(scenario)
        built.mm.geodesic  # build shared tables before any worker starts
    except NumericalFailure as exc:
        results = [CheckResult("setup", "numerical", type(exc).__name__, "", note=str(exc))]
        built = None
    except (RicciCompareError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        results = [CheckResult("setup", "error", type(exc).__name__, "", note=str(exc))]
        built = None
    if built is not None:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(lambda c: _guarded(c, scenario, built), scenario.checks))
        else:
            results = [_guarded(c, scenario, built) for c in scenario.checks]
        if built.best_kappa is not None:
            results.insert(0, CheckResult("kappa", "info", _fmt(built.best_kappa), "", note="best constant kappa used"))
    code = _exit_code(results, scenario.allow_inconclusive)
    out = out or scenario.output
    if out:
        os.makedirs(out, exist_ok=True)
        for r in results:
            if r.csv:
                _atomic_write(os.path.join(out, f"{r.check}.csv"), r.csv)
        _atomic_write(os.path.join(out, "summary.csv"), summary_csv(results))
        if built is not None:
            _atomic_write(os.path.join(out, "profile.csv"), profile_csv(built.mm))
            if built.model is not None:
                buf = io.StringIO()
                built.model.to_csv(buf)
                _atomic_write(os.path.join(out, "maximal_model.csv"), buf.getvalue())
        _atomic_write(os.path.join(out, "config.json"), json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n")
    return RunSummary(scenario, results, code, time.perf_counter() - t0, scenario.to_dict())


def _print_catalog(as_json, stream):
    cat = list_builtins()
    if as_json:
        stream.write(json.dumps(cat, indent=2, sort_keys=True) + "\n")
        return
    for name, entry in cat.items():
        stream.write(f"{name:12s} {entry['description']}\n")
        for key, p in entry["params"].items():
            stream.write(f"{'':12s}   {key} ({p['type']}, default {p['default']}): {p['doc']}\n")
        stream.write(f"{'':12s}   defaults: n={entry['n']} m={entry['m']} kappa={json.dumps(entry['kappa'])}\n")
        stream.write(f"{'':12s}   checks: {', '.join(entry['checks'])}\n")


def build_parser():
    parser = argparse.ArgumentParser(prog="ricci-compare", description="Verify comparison theorems on weighted model manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)
    lb = sub.add_parser("list-builtins", help="print the builtin gallery")
    lb.add_argument("--json", action="store_true", help="machine-readable catalog")
    rp = sub.add_parser("run", help="run a JSON scenario")
    rp.add_argument("config", help="scenario JSON file")
    rp.add_argument("--grid", type=int, metavar="N", help="grid size override")
    rp.add_argument("--tol", type=float, metavar="X", help="absolute and relative slack override")
    rp.add_argument("--jobs", type=int, default=1, metavar="K", help="checks run concurrently (default 1)")
    rp.add_argument("--out", metavar="DIR", help="output directory")
    rp.add_argument("--allow-inconclusive", action="store_true", help="do not fail on Inconclusive verdicts")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list-builtins":
        _print_catalog(args.json, sys.stdout)
        return EXIT_OK
    try:
        scn = Scenario.load(args.config)
        if args.grid is not None:
            if args.grid < 2:
                raise ConfigError("must be >= 2", "--grid")
            scn = replace(scn, grid_size=args.grid)
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("must be positive", "--tol")
            scn = replace(scn, tolerance=cmp.Tolerance(args.tol, args.tol))
        if args.jobs < 1:
            raise ConfigError("must be >= 1", "--jobs")
        if args.allow_inconclusive:
            scn = replace(scn, allow_inconclusive=True)
        summary = run(scn, args.jobs, args.out)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    for r in summary.results:
        sys.stdout.write(f"{r.check:18s} {r.status:12s} {r.verdict}\n")
    sys.stdout.write(f"exit {summary.exit_code} ({summary.wall_time:.2f} s)\n")
    return summary.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
