"""Run orchestration, oracle checks, convergence studies, and report emission."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import hardy
from .benilan_crandall import BCContext, K_of_t, audit_bc, bc_residual, interior_mask
from .config import ExperimentConfig
from .errors import DegenLabError
from .estimates import (
    InteriorWindow,
    audit_delta,
    audit_gradient_tails,
    audit_interior,
    audit_lp,
    audit_time_weighted,
    interior_constants_for,
)
from .grid import FieldSeries, make_graded_grid
from .norms import complement, parabolic_holder_seminorm, truncate
from .solver import GridParams, RegularizedInstance, integrate_instance, solve
from .special import SeparatedSolution, classical_residual, kink_holder_quotient, lipschitz_sharpness_exhibit
from .weight import WeightContext, nu_quadrature_weights


@dataclass
class RunReport:
    config: dict
    runs: list = field(default_factory=list)
    oracles: dict = field(default_factory=dict)
    convergence: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict, repr=False)  # (problem, n) -> FieldSeries, not serialized

    def checks(self):
        """Every pass/fail record in report order."""
        for run in self.runs:
            yield from run.get("audits", [])
            if "bc" in run:
                yield run["bc"]
        for rec in self.oracles.values():
            yield rec

    @property
    def errors(self) -> list:
        return [r for r in self.runs if r.get("status") == "error"]

    @property
    def all_pass(self) -> bool:
        return all(c.get("pass", False) for c in self.checks())

    def summary(self) -> dict:
        checks = list(self.checks())
        return {"checks": len(checks), "failed": sum(1 for c in checks if not c.get("pass", False)),
                "run_errors": len(self.errors), "all_pass": self.all_pass and not self.errors}

    def to_dict(self) -> dict:
        return {"config": self.config, "runs": self.runs, "oracles": self.oracles,
                "convergence": self.convergence, "summary": self.summary()}

    def to_json(self) -> str:
        return dumps(self.to_dict())


def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, non-finite floats as strings, trailing newline."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


# -- per-run work


def _meta_record(meta: dict) -> dict:
    return {k: v for k, v in meta.items() if k != "instance"}


def run_one(cfg: ExperimentConfig, entry, n: int, keep_series: bool = False) -> tuple[dict, FieldSeries | None]:
    rec = {"problem": entry.name, "n": n}
    try:
        spec = entry.build()
        series = solve(spec, n, GridParams(cfg.grid_count, cfg.grid_grading), cfg.dt, save_every=cfg.save_every)
    except DegenLabError as exc:
        rec.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return rec, None
    rec["status"] = "ok"
    rec["meta"] = _meta_record(series.meta)
    a = cfg.audits
    ctx = WeightContext(spec.lam)
    kw = {"kappa": a.kappa, "audit_tol": a.audit_tol}
    reports = []
    for m in a.lp:
        reports.append(audit_lp(series, m, spec, ctx, **kw))
    for d in a.delta:
        reports.extend(audit_delta(series, d, spec, ctx, **kw))
    if a.time_weighted:
        reports.extend(audit_time_weighted(series, spec, ctx, **kw))
    tails = []
    for k in a.tails_k:
        tr = audit_gradient_tails(series, k, a.tails_delta, spec, ctx, audit_tol=a.audit_tol)
        reports.extend((tr.sublevel, tr.sublevel_delta_exponent))
        tails.append({"k": k, "superlevel_lhs": tr.superlevel_lhs})
    if tails:
        lhs = [t["superlevel_lhs"] for t in tails]
        rec["superlevel"] = {"values": tails, "monotone_nonincreasing": bool(np.all(np.diff(lhs) <= 1e-12))}
    if a.interior:
        t0, dm, dp = a.interior
        win = InteriorWindow(t0, dm, dp)
        consts = interior_constants_for(spec, win)
        reports.extend(audit_interior(series, win, consts, **kw))
        try:
            sub = series.window(t0, spec.T, dm, dp)
            rec["holder"] = {"alpha": a.holder_alpha,
                             "seminorm": parabolic_holder_seminorm(sub, a.holder_alpha, seed=cfg.seed),
                             "seed": cfg.seed}
        except DegenLabError as exc:
            rec["holder"] = {"error": str(exc)}
    grid_meta = {"nodes": len(series.grid), "h_max": series.grid.h_max, "dt": cfg.dt}
    rec["audits"] = [{**r.to_dict(), **grid_meta} for r in reports]
    if a.bc:
        bc = BCContext(spec.theta, n)
        res = audit_bc(series, bc)
        rec["bc"] = {"name": "bc_residual", **res.to_dict()}
    return rec, (series if keep_series else None)


def run_experiment(cfg: ExperimentConfig, keep_series: bool = False) -> RunReport:
    """Solve and audit every (problem, n); runs execute on a pool and merge in config order."""
    report = RunReport(cfg.echo())
    jobs = [(p, n) for p in cfg.problems for n in cfg.n_schedule]
    start = time.perf_counter()
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda j: run_one(cfg, j[0], j[1], keep_series), jobs))
    else:
        results = [run_one(cfg, p, n, keep_series) for p, n in jobs]
    for (p, n), (rec, series) in zip(jobs, results):
        report.runs.append(rec)
        if series is not None:
            report.series[(p.name, n)] = series
    report.timing["runs_seconds"] = time.perf_counter() - start
    t1 = time.perf_counter()
    for name in cfg.oracles:
        report.oracles[name] = ORACLE_FUNCS[name](cfg)
    report.timing["oracles_seconds"] = time.perf_counter() - t1
    if cfg.converge is not None:
        report.convergence = convergence_study(cfg.converge)
    return report


# -- oracles


LN2 = math.log(2.0)


def manufactured_solution() -> SeparatedSolution:
    """lam = 0, mu = 1, gamma = ln2/2, G(1) = 1: support [2, 4], saturating at t0 = 1."""
    return SeparatedSolution(lam=0.0, mu=1.0, G0=1.0, t0=1.0, gamma=LN2 / 2.0)


def manufactured_run(count: int, dt: float, T: float = 1.0, a: float = 0.5, b: float = 8.0,
                     sol: SeparatedSolution | None = None, save_every: int = 1) -> tuple[FieldSeries, SeparatedSolution]:
    sol = sol or manufactured_solution()
    grid = make_graded_grid(a, b, count)
    inst = RegularizedInstance.direct(grid, sol.F(grid.nodes), lam=sol.lam)
    return integrate_instance(inst, T, dt, t0=sol.t0, save_every=save_every), sol


def manufactured_error(series: FieldSeries, sol: SeparatedSolution, region=None) -> float:
    x = series.grid.nodes
    e = np.abs(series.values[-1] - sol.u(series.physical_times[-1], x))
    if region is not None:
        e = e[(x >= region[0]) & (x <= region[1])]
    return float(np.max(e))


def oracle_manufactured(cfg=None, count: int = 800, dt: float = 1e-3) -> dict:
    s1, sol = manufactured_run(count, dt, save_every=int(round(1.0 / dt)))
    s2, _ = manufactured_run(2 * count - 1, dt / 2, save_every=int(round(2.0 / dt)))
    e1, e2 = manufactured_error(s1, sol), manufactured_error(s2, sol)
    u0max = float(np.max(sol.F(np.linspace(2.0, 4.0, 20001))))
    tol = 2e-2 * u0max
    ratio = e1 / e2 if e2 > 0 else math.inf
    return {"name": "manufactured", "error": e1, "error_refined": e2, "tolerance": tol, "ratio": ratio,
            "pass": bool(e1 <= tol and ratio >= 1.8)}


def oracle_bc_saturation(cfg=None, count: int = 800, dt: float = 1e-3) -> dict:
    mins, tols = [], []
    for k in range(3):
        c, h = (count - 1) * 2**k + 1, dt / 2**k
        s, _ = manufactured_run(c, h)
        res = audit_bc(s, BCContext(0.0, None))
        mins.append(res.min_residual)
        tols.append(res.tol)
    decreasing = all(abs(mins[i + 1]) < abs(mins[i]) for i in range(2))
    return {"name": "bc_saturation", "min_residuals": mins, "bc_tols": tols,
            "pass": bool(abs(mins[0]) <= tols[0] and decreasing)}


SHARPNESS_ALPHA = 3.0


def oracle_sharpness(cfg=None, alpha: float = SHARPNESS_ALPHA, h: float = 1e-2) -> dict:
    sol = manufactured_solution()
    ex = lipschitz_sharpness_exhibit(sol)
    q1 = kink_holder_quotient(sol, alpha, h)
    q2 = kink_holder_quotient(sol, alpha, h / 2)
    expected = 0.25 - LN2 / 2.0
    return {"name": "sharpness", "left_slope": ex["left_slope"], "right_slope": ex["right_slope"],
            "jump": ex["jump"], "alpha": alpha, "quotient": q1, "quotient_refined": q2, "growth": q2 / q1,
            "pass": bool(abs(ex["jump"] - abs(expected)) < 1e-10 and q2 / q1 >= 4.0)}


def oracle_hardy(cfg=None) -> dict:
    mismatches = []
    rows = 0
    for qy in hardy.default_lattice():
        rows += 1
        v = hardy.verdict(qy, check=False)
        st = hardy.stated_classification(qy)
        for key in ("continuous", "compact"):
            want = st[key]
            got = getattr(v, key)
            if want is not None and got != want:
                mismatches.append({"lambda": qy.lam, "p": qy.p, "q": qy.q, "b": qy.b, "field": key,
                                   "computed": got, "stated": want})
    sup = hardy.verdict(hardy.EmbeddingQuery(0.0, 2.0, 2.0), check=False).sup_F
    return {"name": "hardy", "lattice_size": rows, "mismatches": mismatches, "sup_F_l0_p2_q2": sup,
            "pass": bool(not mismatches and abs(sup - 1.0) <= 1e-8)}


def oracle_identities(cfg=None) -> dict:
    from scipy import integrate

    worst_res = 0.0
    for sol in (manufactured_solution(),
                SeparatedSolution(lam=1.0, mu=1.0, G0=1.0, t0=1.0, c=-0.5, k=1.0)):
        lo, hi = sol.support()
        grid = make_graded_grid(max(lo, 1e-3), hi, 401)
        worst_res = max(worst_res, classical_residual(sol, grid, [1.0, 1.5, 2.0]))
    rng = np.random.default_rng(0)
    f = rng.uniform(0.0, 5.0, 1000)
    from .grid import Field, Grid
    fld = Field(Grid(np.linspace(1.0, 2.0, 1000)), f)
    # exact up to the single rounding in f - T_k(f), measured in ulps
    ident = float(np.max(np.abs(truncate(fld, 2.0).values + complement(fld, 2.0).values - f)
                         / np.spacing(np.maximum(f, 2.0))))
    # theta -> 0 limit plus agreement of the two evaluation branches at the switch
    from .benilan_crandall import SERIES_SWITCH
    k_gap = abs(float(K_of_t(1.0, 1e-10)) - 1.0)
    for t in (0.5, 1.0, 2.0):
        th = SERIES_SWITCH / t
        k_gap = max(k_gap, abs(float(K_of_t(t, th * (1 - 1e-9))) - float(-np.expm1(-th * t * (1 - 1e-9)) / (th * (1 - 1e-9)))))
    rel = 0.0
    for lam in (0.0, 1.0):
        ctx = WeightContext(lam)
        g = make_graded_grid(0.1, 10.0, 257, 2.0)
        w = nu_quadrature_weights(ctx, g)
        exact, _ = integrate.quad(lambda x: 1.0 / ctx.rho(x), 0.1, 10.0, epsabs=0, epsrel=1e-13, limit=200)
        rel = max(rel, abs(w.sum() - exact) / exact)
    return {"name": "identities", "classical_residual": worst_res, "truncation_identity_ulps": ident,
            "K_theta_limit_gap": k_gap, "nu_quadrature_rel": float(rel),
            "pass": bool(worst_res <= 1e-8 and ident <= 1.0 and k_gap <= 1e-10 and rel <= 1e-10)}


ORACLE_FUNCS = {
    "manufactured": oracle_manufactured,
    "bc_saturation": oracle_bc_saturation,
    "sharpness": oracle_sharpness,
    "hardy": oracle_hardy,
    "identities": oracle_identities,
}


# -- convergence


def convergence_study(cv) -> list[dict]:
    """Errors against an exact solution on a refinement ladder.

    mode 'both' halves h and dt together, 'space' halves h at fixed dt, 'time'
    halves dt on a fixed grid. The exact solution is the lam = 0 separated
    solution on (0.5, 8) from t = 1, or the zero solution. Observed order is
    log2 of successive error ratios (None when an error vanishes).
    """
    if cv.levels < 3:
        raise DegenLabError("a convergence ladder needs at least 3 levels")
    rows = []
    prev = None
    for k in range(cv.levels):
        count = (cv.base_count - 1) * (2**k if cv.mode in ("both", "space") else 1) + 1
        dt = cv.base_dt / (2**k if cv.mode in ("both", "time") else 1)
        every = max(1, int(round(cv.T / dt)))
        if getattr(cv, "solution", "separated") == "zero":
            grid = make_graded_grid(0.5, 8.0, count)
            s = integrate_instance(RegularizedInstance.direct(grid, np.zeros(count)), cv.T, dt, save_every=every)
            x = s.grid.nodes
            e = np.abs(s.values[-1])
            if cv.region is not None:
                e = e[(x >= cv.region[0]) & (x <= cv.region[1])]
            err = float(np.max(e))
        else:
            s, sol = manufactured_run(count, dt, T=cv.T, save_every=every)
            err = manufactured_error(s, sol, cv.region)
        order = math.log2(prev / err) if prev is not None and prev > 0 and err > 0 else None
        rows.append({"level": k, "nodes": count, "h": s.grid.h_max, "dt": dt, "error": err, "order": order})
        prev = err
    return rows


# -- emission


def _bc_rows(series: FieldSeries, bc: BCContext):
    r = bc_residual(series, bc).values
    mask = interior_mask(series)
    out = []
    for k, t in enumerate(series.physical_times):
        vals = r[k][mask[k]]
        out.append((t, float(vals.min()) if vals.size else math.nan))
    return out


def emit(report: RunReport, out_dir, formats=("json",)) -> list[Path]:
    """Write report.json (and metadata.json with timings); with csv also series and BC plot data."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        p = out / "report.json"
        p.write_text(report.to_json())
        written.append(p)
        m = out / "metadata.json"
        m.write_text(dumps({"timing": report.timing}))
        written.append(m)
    if "csv" in formats:
        lam_of = {p["name"]: p for p in report.config.get("problems", [])}
        for (name, n), series in sorted(report.series.items()):
            p = out / f"series_{name}_n{n}.csv"
            series.to_csv(p)
            written.append(p)
            theta = lam_of.get(name, {}).get("theta") or 0.0
            rows = _bc_rows(series, BCContext(theta, n))
            q = out / f"bc_min_{name}_n{n}.csv"
            q.write_text("t,min_residual\n" + "".join(f"{t:.17g},{v:.17g}\n" for t, v in rows))
            written.append(q)
        if "hardy" in report.oracles:
            p = out / "hardy.csv"
            p.write_text(hardy.verdict_table_csv(hardy.default_lattice()))
            written.append(p)
        if report.convergence:
            p = out / "convergence.csv"
            lines = ["level,nodes,h,dt,error,order"]
            for r in report.convergence:
                order = "" if r["order"] is None else f"{r['order']:.17g}"
                lines.append(f"{r['level']},{r['nodes']},{r['h']:.17g},{r['dt']:.17g},{r['error']:.17g},{order}")
            p.write_text("\n".join(lines) + "\n")
            written.append(p)
    return written
