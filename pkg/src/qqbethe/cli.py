"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails (the report
carries the residuals), 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__, bethe, liedata, qqverify
from .operkit import kdv, monodromy, spectral

SCHEMA = 1
MAX_DEPTH = 10
THREADS_ENV = "QQBETHE_THREADS"


class UsageError(Exception):
    pass


def num(x) -> str:
    """Shortest round-trip text for a real number, numpy scalars included."""
    return repr(float(x))


@dataclass
class Outcome:
    report: dict
    ok: bool
    csv_header: list[str] = field(default_factory=list)
    csv_rows: list[list] = field(default_factory=list)
    text: str = ""
    timings: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    command: str
    fmt: str = "json"
    output: str | None = None
    max_depth: int = MAX_DEPTH
    threads: int = 1
    seed: int | None = None

    def check_depths(self, depths: list[int]) -> None:
        for d in depths:
            if d < 0:
                raise UsageError(f"depth {d} is negative")
            if d > self.max_depth:
                raise UsageError(f"depth {d} exceeds the configured maximum {self.max_depth}")


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    return max(1, n)


# --- argument parsing helpers ---------------------------------------------

def parse_complex(s: str) -> complex:
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse complex number {s!r}") from None


def parse_complex_list(s: str | None) -> list[complex]:
    if s is None or s.strip() == "":
        return []
    return [parse_complex(x) for x in s.split(",")]


def parse_int_list(s: str | None) -> list[int]:
    if s is None or s.strip() == "":
        return []
    try:
        return [int(x) for x in s.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse integer list {s!r}") from None


def parse_depths(s: str) -> list[int]:
    """'6' -> [6]; '1-6' -> [1..6]; '1,3,8' -> [1,3,8]."""
    out = []
    for part in s.split(","):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out += list(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_fraction(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse rational {s!r}") from None


def parse_algebras(s: str) -> list[liedata.AlgebraData]:
    if s.lower() == "all":
        return liedata.all_algebras()
    out = []
    for name in s.split(","):
        try:
            out.append(liedata.load_algebra(name))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return out


def positive(name: str, x: float) -> float:
    if not x > 0:
        raise UsageError(f"{name} must be positive")
    return x


def cpair(z: complex) -> list[float]:
    return [z.real, z.imag]


# --- handlers --------------------------------------------------------------

def _verify(args, cfg: RunConfig, identity: str) -> Outcome:
    algs = parse_algebras(args.algebra)
    depths = parse_depths(args.depth)
    cfg.check_depths(depths)
    if identity == "qq-system" and min(depths) < 1:
        raise UsageError("qq verify needs depth >= 1")
    t0 = time.perf_counter()
    if args.node is not None:
        reports = []
        for alg in algs:
            if args.node not in alg.nodes():
                raise UsageError(f"{alg.name} has no node {args.node}")
            for d in depths:
                reports.append(qqverify.IDENTITIES[identity](alg, args.node, d, args.k))
    else:
        reports = qqverify.sweep([a.name for a in algs], depths, identity, args.k, cfg.threads)
    elapsed = (time.perf_counter() - t0) * 1000
    ok = all(r.ok for r in reports)
    rows = [[r.identity, r.algebra, r.node, r.depth, r.status, len(r.residual_terms())] for r in reports]
    text = "\n".join(f"{r.algebra} node {r.node} depth {r.depth}: {r.status}" for r in reports)
    return Outcome(
        {"results": [r.to_json(timing=False) for r in reports], "all_exact_zero": ok},
        ok,
        ["identity", "algebra", "node", "depth", "status", "residual_terms"],
        rows,
        text,
        {"total_ms": round(elapsed, 3), "per_job_ms": [round(r.ms, 3) for r in reports]},
    )


def cmd_qq_verify(args, cfg):
    return _verify(args, cfg, "qq-system")


def cmd_qq_recursion(args, cfg):
    return _verify(args, cfg, "recursion")


def cmd_qq_star(args, cfg):
    algs = parse_algebras(args.algebra)
    results, rows = [], []
    for alg in algs:
        for i in alg.nodes():
            sd = qqverify.qq_star_shift_data(alg, i)
            rec = {
                "algebra": alg.name,
                "node": i,
                "minus_product": [list(p) for p in sd.minus_product],
                "plus_product": [list(p) for p in sd.plus_product],
                "bae_numerator": sorted(list(p) for p in sd.bae_from_star[0].elements()),
                "bae_denominator": sorted(list(p) for p in sd.bae_from_star[1].elements()),
                "agree": sd.agree,
            }
            results.append(rec)
            rows.append([alg.name, i, sd.agree])
    ok = all(r["agree"] for r in results)
    return Outcome({"results": results, "all_agree": ok}, ok, ["algebra", "node", "agree"], rows,
                   "\n".join(f"{r['algebra']} node {r['node']}: agree={r['agree']}" for r in results))


def _bethe_system(args) -> bethe.BetheSystem:
    try:
        alg = liedata.load_algebra(args.algebra)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    degrees = parse_int_list(args.degrees)
    v = parse_complex_list(args.v)
    beta2 = float(args.beta2)
    try:
        return bethe.BetheSystem(alg, beta2, v, degrees, parse_int_list(args.branch) or None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_bae_solve(args, cfg):
    system = _bethe_system(args)
    init = parse_complex_list(args.init)
    seed_used = None
    if not init and system.n_roots:
        seed_used = cfg.seed if cfg.seed is not None else 0
        rng = np.random.default_rng(seed_used)
        init = list(np.exp(1j * rng.uniform(0, 2 * math.pi, system.n_roots)))
    t0 = time.perf_counter()
    try:
        sol = bethe.solve_newton(system, init, tol=positive("--tol", args.tol),
                                 max_iter=args.max_iter, record=bool(args.trajectory))
    except bethe.SingularConfiguration as exc:
        return Outcome({"error": "singular-configuration", "detail": str(exc)}, False)
    elapsed = (time.perf_counter() - t0) * 1000
    if args.trajectory:
        with open(args.trajectory, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "node", "index", "re", "im"])
            for it, flat in enumerate(sol.trajectory):
                for (node, idx), z in zip(_slots(system), flat):
                    w.writerow([it, node, idx, num(z.real), num(z.imag)])
    ok = sol.converged
    rows = []
    flat_res = list(sol.residuals)
    for (node, idx), z, r in zip(_slots(system), [z for grp in sol.roots for z in grp], flat_res):
        rows.append([node, idx, num(z.real), num(z.imag), num(abs(r))])
    report = {
        "roots": [[cpair(complex(z)) for z in grp] for grp in sol.roots],
        "residual_max": sol.residual_max,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "status": sol.status,
        "nullity": sol.nullity,
        "sum_rule_defect": sol.sum_rule_defect,
        "seed": seed_used,
    }
    return Outcome(report, ok, ["node", "index", "re", "im", "residual_abs"], rows,
                   f"{sol.status}: residual_max={sol.residual_max:.3e} after {sol.iterations} iterations",
                   {"solve_ms": round(elapsed, 3)})


def _slots(system):
    out = []
    for i, n in enumerate(system.degrees, start=1):
        out += [(i, k) for k in range(n)]
    return out


def cmd_bae_residual(args, cfg):
    system = _bethe_system(args)
    roots = parse_complex_list(args.roots)
    if len(roots) != system.n_roots:
        raise UsageError(f"expected {system.n_roots} roots, got {len(roots)}")
    try:
        F = bethe.build_bae(system)
        res = F(np.array(roots, dtype=complex)) if roots else np.zeros(0)
    except bethe.SingularConfiguration as exc:
        return Outcome({"error": "singular-configuration", "detail": str(exc)}, False)
    rmax = float(np.max(np.abs(res))) if len(res) else 0.0
    ok = rmax < args.tol
    rows = [[node, idx, num(abs(r))] for (node, idx), r in zip(_slots(system), res)]
    return Outcome({"residuals": [cpair(complex(r)) for r in res], "residual_max": rmax, "ok": ok},
                   ok, ["node", "index", "residual_abs"], rows, f"residual_max={rmax:.3e}")


def cmd_gl1_check(args, cfg):
    q1 = parse_complex(args.q1)
    q2 = parse_complex(args.q2)
    q3 = 1 / (q1 * q2)
    tol = positive("--tol", args.tol)
    report: dict = {"q3": cpair(q3)}
    ok = True
    rows = []
    if args.roots is not None:
        roots = parse_complex_list(args.roots)
        if args.t is None:
            raise UsageError("--t is required with --roots")
        res = bethe.gl1_bae_residual(roots, q1, q2, q3, parse_complex(args.t))
        rmax = float(np.max(np.abs(res))) if len(res) else 0.0
        ok = rmax < tol
        report.update({"residuals": [cpair(complex(r)) for r in res], "residual_max": rmax})
        rows = [["user", i, num(abs(r))] for i, r in enumerate(res)]
    else:
        w = parse_complex(args.w)
        t1 = bethe.gl1_single_root_t(w, q1, q2, q3)
        r1 = float(np.max(np.abs(bethe.gl1_bae_residual([w], q1, q2, q3, t1))))
        pairs = []
        for s in bethe.gl1_resultant_roots(q1, q2, q3):
            Q = bethe.poly_from_roots([1.0, s])
            t0 = -Q(q1) * Q(q2) * Q(q3) / (Q(1 / q1) * Q(1 / q2) * Q(1 / q3))
            try:
                s2, t2, _ = bethe.gl1_solve_degree2(q1, q2, q3, s * (1 + 1e-4), t0 * (1 + 1e-4))
            except (RuntimeError, np.linalg.LinAlgError) as exc:
                pairs.append({"s_oracle": cpair(s), "error": str(exc)})
                continue
            r2 = float(np.max(np.abs(bethe.gl1_bae_residual([1.0, s2], q1, q2, q3, t2))))
            pairs.append({"s_oracle": cpair(s), "s": cpair(complex(s2)), "t": cpair(complex(t2)),
                          "residual_max": r2, "oracle_gap": abs(s2 - s)})
            rows.append(["degree2", len(rows), num(r2)])
        ok = r1 < tol and all("error" not in p and p["residual_max"] < tol and p["oracle_gap"] < 1e-8
                              for p in pairs)
        report.update({"single_root": {"w": cpair(w), "t": cpair(t1), "residual": r1},
                       "degree2": pairs})
        rows.insert(0, ["single", 0, num(r1)])
    report["ok"] = ok
    return Outcome(report, ok, ["case", "index", "residual_abs"], rows, f"ok={ok}")


def cmd_odeim_q(args, cfg):
    alpha = float(args.alpha)
    ell = float(args.ell)
    if alpha <= 0 or ell <= -0.5:
        raise UsageError("need alpha > 0 and ell > -1/2")
    qf = spectral.QFunction(alpha, ell, x_min=args.x_min, x_max=args.x_max, rtol=args.rtol)
    t0 = time.perf_counter()
    zeros = spectral.find_q_zeros(qf, args.emax, args.zeros)
    t_zeros = time.perf_counter() - t0
    report = {"alpha": alpha, "ell": ell, "normalization": qf.normalization, "zeros": zeros}
    ok = len(zeros) == args.zeros
    rows = []
    if args.samples:
        for E in np.linspace(0.0, args.emax, args.samples):
            val = qf(E)
            rows.append(["sample", num(float(E)), num(val.real), num(val.imag)])
    rows += [["zero", num(z), "0", "0"] for z in zeros]
    timings = {"zeros_ms": round(t_zeros * 1000, 3)}
    if args.check_ratio:
        beta2 = "auto" if args.beta2 == "auto" else float(args.beta2)
        try:
            rep = spectral.bae_ratio_check(qf, beta2)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report["ratio"] = rep.to_json()
        ok = ok and rep.spread < args.ratio_tol
        timings["ratio_ms"] = round((time.perf_counter() - t0) * 1000 - timings["zeros_ms"], 3)
    report["ok"] = ok
    return Outcome(report, ok, ["kind", "E", "Q_re", "Q_im"], rows,
                   "zeros: " + ", ".join(f"{z:.10g}" for z in zeros), timings)


def _oper_spec(args, w=()) -> kdv.OperSpec:
    try:
        return kdv.OperSpec(k=parse_fraction(args.k), r=parse_fraction(args.r), w=tuple(w),
                            s=parse_complex(args.s))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None


def cmd_oper_accessory(args, cfg):
    init = parse_complex_list(args.init)
    if len(init) != args.m:
        raise UsageError(f"--init needs {args.m} values")
    spec = _oper_spec(args, init)
    res = kdv.solve_accessory(spec, init, tol=positive("--tol", args.tol))
    rows = [[j + 1, num(z.real), num(z.imag)] for j, z in enumerate(res.w)]
    return Outcome(res.to_json(), res.converged, ["j", "re", "im"], rows,
                   f"{res.status}: residual_max={res.residual_max:.3e}")


def cmd_oper_monodromy(args, cfg):
    w = parse_complex_list(args.w)
    if args.solve:
        spec0 = _oper_spec(args, w)
        acc = kdv.solve_accessory(spec0, w)
        if not acc.converged:
            return Outcome({"accessory": acc.to_json()}, False)
        w = acc.w
    spec = _oper_spec(args, w)
    lams = parse_complex_list(args.lam)
    results, rows = [], []
    for lam in lams:
        try:
            rep = monodromy.monodromy_matrix(spec, args.node - 1, args.radius, lam)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rec = rep.to_json()
        rec["lambda"] = cpair(lam)
        results.append(rec)
        rows.append([num(lam.real), num(lam.imag), num(rep.deviation), num(rep.det.real),
                     num(rep.det.imag)])
    ok = all(r["deviation"] < args.tol and abs(complex(*r["det"]) - 1) < 1e-8 for r in results)
    return Outcome({"w": [cpair(z) for z in w], "results": results, "trivial": ok}, ok,
                   ["lambda_re", "lambda_im", "deviation", "det_re", "det_im"], rows,
                   "\n".join(f"lambda={r['lambda']}: deviation={r['deviation']:.3e}" for r in results))


def cmd_oper_constants(args, cfg):
    try:
        if args.algebra:
            alg = liedata.load_algebra(args.algebra)
            gc = kdv.general_constants(alg, parse_fraction(args.k))
            report = gc.to_json()
        else:
            report = kdv.constants(parse_fraction(args.r), parse_fraction(args.k)).to_json()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.r_check is not None and "alpha" in report:
        a = Fraction(report["alpha"])
        report["dual_alpha"] = str(liedata.dual_alpha(a, args.r_check))
    rows = [[k, v] for k, v in report.items()]
    return Outcome(report, True, ["name", "value"], rows,
                   "\n".join(f"{k} = {v}" for k, v in report.items()))


def cmd_lie_info(args, cfg):
    algs = parse_algebras(args.algebra)
    results = []
    for alg in algs:
        results.append({
            "algebra": alg.name,
            "cartan": [list(r) for r in alg.cartan],
            "sym": list(alg.sym),
            "bmatrix": [list(r) for r in alg.bmatrix],
            "exponents": list(alg.exponents),
            "coxeter": alg.coxeter,
            "dual_coxeter": alg.dual_coxeter,
            "kac_labels": list(alg.kac_labels),
            "problems": liedata.check_invariants(alg),
        })
    ok = all(not r["problems"] for r in results)
    lines = []
    for r in results:
        lines.append(f"{r['algebra']}:")
        lines.append("  C = " + "; ".join(" ".join(f"{x:2d}" for x in row) for row in r["cartan"]))
        lines.append("  d = " + " ".join(map(str, r["sym"])))
        lines.append("  B = " + "; ".join(" ".join(f"{x:2d}" for x in row) for row in r["bmatrix"]))
        lines.append("  exponents = " + " ".join(map(str, r["exponents"])))
        lines.append(f"  h = {r['coxeter']}, h_dual = {r['dual_coxeter']}")
    rows = [[r["algebra"], r["coxeter"], r["dual_coxeter"], " ".join(map(str, r["exponents"]))]
            for r in results]
    return Outcome({"results": results}, ok, ["algebra", "h", "h_dual", "exponents"], rows,
                   "\n".join(lines))


# --- batch -----------------------------------------------------------------

def parse_batch_config(text: str) -> dict:
    """Flat key = value lines; '#' starts a comment; each 'job' line is one command."""
    conf: dict = {"jobs": [], "threads": None, "seed": None, "output": None}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        if key == "job":
            conf["jobs"].append(value)
        elif key in ("threads", "seed"):
            try:
                conf[key] = int(value)
            except ValueError:
                raise UsageError(f"config line {lineno}: {key} must be an integer") from None
        elif key == "output":
            conf["output"] = value
        else:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
    return conf


def _batch_job(payload):
    line, seed = payload
    argv = shlex.split(line)
    if seed is not None and "--seed" not in argv:
        argv = ["--seed", str(seed)] + argv
    code, doc = run(argv)
    return line, code, doc


def cmd_batch(args, cfg):
    try:
        with open(args.config) as fh:
            conf = parse_batch_config(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    threads = conf["threads"] or cfg.threads
    seed = conf["seed"] if conf["seed"] is not None else cfg.seed
    payloads = [(line, seed) for line in conf["jobs"]]
    t0 = time.perf_counter()
    if threads > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            done = list(ex.map(_batch_job, payloads))
    else:
        done = [_batch_job(p) for p in payloads]
    jobs, timings, rows = [], [], []
    worst = 0
    for line, code, doc in done:
        timings.append(doc.pop("timings", {}))
        jobs.append({"job": line, "exit": code, "report": doc})
        rows.append([line, code])
        worst = max(worst, code)
    if conf["output"] and not cfg.output:
        cfg.output = conf["output"]
    out = Outcome({"jobs": jobs, "worst_exit": worst, "seed": seed}, worst == 0,
                  ["job", "exit"], rows,
                  "\n".join(f"[{c}] {line}" for line, c, _ in done),
                  {"total_ms": round((time.perf_counter() - t0) * 1000, 3), "jobs": timings})
    out.report["_exit"] = worst
    return out


# --- parser ------------------------------------------------------------------

def _global_options(p: argparse.ArgumentParser, default) -> None:
    def d(value):
        return value if default is None else default

    p.add_argument("--format", choices=("json", "csv", "text"), default=d("json"))
    p.add_argument("--output", "-o", default=d(None), help="write the report here instead of stdout")
    p.add_argument("--threads", type=int, default=d(None),
                   help=f"worker count (default ${THREADS_ENV} or 1)")
    p.add_argument("--seed", type=int, default=d(None))
    p.add_argument("--max-depth", type=int, default=d(MAX_DEPTH))
    p.add_argument("--timings", action="store_true", default=d(False),
                   help="include wall-clock timings in the JSON")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qqbethe", description="QQ-system verification and Bethe/oper numerics.")
    p.add_argument("--version", action="version", version=__version__)
    _global_options(p, None)
    common = argparse.ArgumentParser(add_help=False)
    # repeated after the subcommand; SUPPRESS keeps values given before it
    _global_options(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="group", parser_class=_Parser)

    def leaf(group_sub, name, fn: Callable, help_=None):
        sp = group_sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(fn=fn)
        return sp

    qq = sub.add_parser("qq", help="exact identities").add_subparsers(dest="action", parser_class=_Parser)
    for name, fn in (("verify", cmd_qq_verify), ("recursion", cmd_qq_recursion)):
        sp = leaf(qq, name, fn)
        sp.add_argument("--algebra", required=True, help="comma-separated names or 'all'")
        sp.add_argument("--depth", default="6", help="N, A-B or a comma list")
        sp.add_argument("--node", type=int)
        sp.add_argument("--k", type=int, default=0, help="base lattice shift")
    sp = leaf(qq, "star", cmd_qq_star)
    sp.add_argument("--algebra", required=True)

    bae = sub.add_parser("bae", help="Bethe equations").add_subparsers(dest="action", parser_class=_Parser)
    for name, fn in (("solve", cmd_bae_solve), ("residual", cmd_bae_residual)):
        sp = leaf(bae, name, fn)
        sp.add_argument("--algebra", required=True)
        sp.add_argument("--degrees", required=True)
        sp.add_argument("--beta2", type=float, required=True)
        sp.add_argument("--v", required=True, help="comma-separated complex v_i")
        sp.add_argument("--branch", help="one integer per root")
        sp.add_argument("--tol", type=float, default=1e-12 if name == "solve" else 1e-10)
    bae_solve = bae.choices["solve"]
    bae_solve.add_argument("--init", help="initial roots, node by node")
    bae_solve.add_argument("--max-iter", type=int, default=200)
    bae_solve.add_argument("--trajectory", help="CSV path for per-iteration roots")
    bae.choices["residual"].add_argument("--roots", required=True)

    gl1 = sub.add_parser("gl1", help="gl1 toroidal equations").add_subparsers(dest="action",
                                                                               parser_class=_Parser)
    sp = leaf(gl1, "check", cmd_gl1_check)
    sp.add_argument("--q1", required=True)
    sp.add_argument("--q2", required=True)
    sp.add_argument("--w", default="1.3+0.4j", help="root for the single-root check")
    sp.add_argument("--roots")
    sp.add_argument("--t")
    sp.add_argument("--tol", type=float, default=1e-10)

    ode = sub.add_parser("odeim", help="spectral determinant").add_subparsers(dest="action",
                                                                              parser_class=_Parser)
    sp = leaf(ode, "q", cmd_odeim_q)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--ell", required=True)
    sp.add_argument("--emax", type=float, default=40.0)
    sp.add_argument("--zeros", type=int, default=5)
    sp.add_argument("--samples", type=int, default=0, help="number of (E, Q) samples for CSV")
    sp.add_argument("--check-ratio", action="store_true")
    sp.add_argument("--beta2", default="auto")
    sp.add_argument("--ratio-tol", type=float, default=1e-3)
    sp.add_argument("--x-min", type=float, default=1e-3)
    sp.add_argument("--x-max", type=float, default=None)
    sp.add_argument("--rtol", type=float, default=1e-11)

    oper = sub.add_parser("oper", help="sl2 opers").add_subparsers(dest="action", parser_class=_Parser)
    sp = leaf(oper, "accessory", cmd_oper_accessory)
    sp.add_argument("--k", required=True)
    sp.add_argument("--r", required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--init", required=True)
    sp.add_argument("--s", default="1")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp = leaf(oper, "monodromy", cmd_oper_monodromy)
    sp.add_argument("--k", required=True)
    sp.add_argument("--r", required=True)
    sp.add_argument("--w", required=True, help="singular points (or starting values with --solve)")
    sp.add_argument("--solve", action="store_true", help="solve the accessory equations first")
    sp.add_argument("--s", default="1")
    sp.add_argument("--lambda", dest="lam", default="1")
    sp.add_argument("--radius", type=float, default=None)
    sp.add_argument("--node", type=int, default=1)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp = leaf(oper, "constants", cmd_oper_constants)
    sp.add_argument("--k", required=True)
    sp.add_argument("--r", default="0")
    sp.add_argument("--algebra")
    sp.add_argument("--r-check", type=int, default=None)

    lie = sub.add_parser("lie", help="Lie algebra tables").add_subparsers(dest="action", parser_class=_Parser)
    sp = leaf(lie, "info", cmd_lie_info)
    sp.add_argument("--algebra", required=True)

    sp = sub.add_parser("batch", help="run a config file of jobs", parents=[common])
    sp.set_defaults(fn=cmd_batch)
    sp.add_argument("config")
    return p


# --- rendering and entry points ----------------------------------------------

def render(outcome: Outcome, cfg: RunConfig, timings: bool) -> str:
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(outcome.csv_header)
        w.writerows(outcome.csv_rows)
        return buf.getvalue()
    if cfg.fmt == "text":
        return outcome.text + "\n"
    return json.dumps(document(outcome, cfg, timings), indent=2, sort_keys=True) + "\n"


def document(outcome: Outcome, cfg: RunConfig, timings: bool = True) -> dict:
    doc = {"schema": SCHEMA, "command": cfg.command, "ok": outcome.ok}
    doc.update({k: v for k, v in outcome.report.items() if not k.startswith("_")})
    if timings:
        doc["timings"] = outcome.timings
    return doc


def _dispatch(argv) -> tuple[int, Outcome | None, RunConfig | None, bool, str]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "fn", None):
            raise UsageError(parser.format_usage())
        threads = args.threads if args.threads is not None else default_threads()
        if threads < 1:
            raise UsageError("--threads must be >= 1")
        command = " ".join(x for x in (args.group, getattr(args, "action", None)) if x)
        cfg = RunConfig(command, args.format, args.output, args.max_depth, threads, args.seed)
        outcome = args.fn(args, cfg)
    except UsageError as exc:
        return 2, None, None, False, str(exc)
    code = outcome.report.get("_exit", 0 if outcome.ok else 1)
    return code, outcome, cfg, args.timings, ""


def run(argv) -> tuple[int, dict]:
    """Run one command and return (exit code, JSON document with timings kept separate)."""
    code, outcome, cfg, _, err = _dispatch(argv)
    if outcome is None:
        return code, {"schema": SCHEMA, "ok": False, "error": err.strip()}
    return code, document(outcome, cfg, True)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    code, outcome, cfg, timings, err = _dispatch(argv)
    if outcome is None:
        sys.stderr.write(err.rstrip() + "\n")
        return code
    text = render(outcome, cfg, timings)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == 1 and cfg.fmt != "json":
        sys.stderr.write(json.dumps(document(outcome, cfg, False), indent=2) + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
