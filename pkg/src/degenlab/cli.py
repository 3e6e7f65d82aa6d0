"""Command-line driver: ``degenlab {solve,audit,converge,hardy,special}``.

Exit codes: 0 when every check passes, 1 on an audit or oracle failure, 2 on a
configuration or run error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

from . import hardy
from .config import AuditSpec, ConvergeSpec, ExperimentConfig, load_config
from .errors import ConfigError, DegenLabError
from .experiment import RunReport, convergence_study, dumps, emit, run_experiment
from .special import SeparatedSolution, classical_residual, energy_norms, lipschitz_sharpness_exhibit
from .grid import make_graded_grid

EXIT_OK, EXIT_AUDIT, EXIT_ERROR = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="degenlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI experiment file")
    common.add_argument("--out", type=Path, help="output directory (overrides [outputs] dir)")
    common.add_argument("--seed", type=int, help="seed (overrides [run] seed)")
    common.add_argument("--format", choices=("json", "csv"), action="append",
                        help="output format; repeat for both (default from the config, else json)")
    sub.add_parser("solve", parents=[common], help="solve every problem, no audits")
    sub.add_parser("audit", parents=[common], help="solve, audit and run the configured oracles")
    sub.add_parser("converge", parents=[common], help="refinement study against the separated solution")
    hp = sub.add_parser("hardy", parents=[common], help="embedding verdicts from the Hardy modulus")
    hp.add_argument("--lambda", dest="lam", type=float, help="single query instead of the default lattice")
    hp.add_argument("--p", type=float)
    hp.add_argument("--q", type=float)
    hp.add_argument("--b", type=float, default=math.inf)
    sub.add_parser("special", parents=[common], help="closed-form diagnostics of a separated solution")
    return ap


def _config(args, need: bool) -> ExperimentConfig:
    if args.config is None:
        if need:
            raise ConfigError(["--config is required for this verb"])
        cfg = ExperimentConfig()
    else:
        cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = str(args.out)
    if args.format:
        changes["formats"] = tuple(dict.fromkeys(args.format))
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _status(report: RunReport) -> int:
    if report.errors:
        return EXIT_ERROR
    return EXIT_OK if report.all_pass else EXIT_AUDIT


def _write(out_dir, name, text):
    p = Path(out_dir)
    p.mkdir(parents=True, exist_ok=True)
    (p / name).write_text(text)
    return p / name


def cmd_solve(args) -> int:
    cfg = _config(args, True)
    cfg = dataclasses.replace(cfg, audits=AuditSpec(), oracles=(), converge=None)
    report = run_experiment(cfg, keep_series="csv" in cfg.formats)
    emit(report, cfg.out_dir, cfg.formats)
    _summarize(report)
    return EXIT_ERROR if report.errors else EXIT_OK


def cmd_audit(args) -> int:
    cfg = _config(args, True)
    report = run_experiment(cfg, keep_series="csv" in cfg.formats)
    emit(report, cfg.out_dir, cfg.formats)
    _summarize(report)
    return _status(report)


def cmd_converge(args) -> int:
    cfg = _config(args, False)
    cv = cfg.converge or ConvergeSpec()
    rows = convergence_study(cv)
    report = RunReport({"converge": dataclasses.asdict(cv)}, convergence=rows)
    emit(report, cfg.out_dir, cfg.formats)
    for r in rows:
        order = "" if r["order"] is None else f"  order {r['order']:.3f}"
        print(f"nodes {r['nodes']:6d}  dt {r['dt']:.3e}  error {r['error']:.3e}{order}")
    return EXIT_OK


def cmd_hardy(args) -> int:
    cfg = _config(args, False)
    if args.lam is not None:
        if args.p is None or args.q is None:
            raise ConfigError(["--lambda needs --p and --q"])
        queries = [hardy.EmbeddingQuery(args.lam, args.p, args.q, args.b)]
    else:
        queries = hardy.default_lattice()
    rows, mismatches = [], []
    for qy in queries:
        v = hardy.verdict(qy, check=False)
        st = hardy.stated_classification(qy)
        row = {"lambda": qy.lam, "p": qy.p, "q": qy.q, "b": qy.b, "sup_F": v.sup_F, "lim0": v.limit_at_0,
               "limb": v.limit_at_b, "continuous": v.continuous, "compact": v.compact, "stated": st}
        rows.append(row)
        if any(st[k] is not None and st[k] != row[k] for k in ("continuous", "compact")):
            mismatches.append(row)
    out = cfg.out_dir
    if "json" in cfg.formats:
        _write(out, "hardy.json", dumps({"verdicts": rows, "mismatches": len(mismatches)}))
    if "csv" in cfg.formats:
        _write(out, "hardy.csv", hardy.verdict_table_csv(queries))
        if len(queries) == 1:
            _write(out, "hardy_sweep.csv", hardy.sweep_csv(queries[0]))
    print(f"{len(rows)} queries, {len(mismatches)} disagree with the stated classification")
    return EXIT_AUDIT if mismatches else EXIT_OK


def cmd_special(args) -> int:
    cfg = _config(args, False)
    sp = dict(cfg.special)
    lam = sp.pop("lam", 0.0)
    mu = sp.pop("mu", 1.0)
    G0 = sp.pop("g0", 1.0)
    t0 = sp.pop("t0", 1.0)
    k = sp.pop("k", 0.0)
    if lam == 0:
        sol = SeparatedSolution(lam=0.0, mu=mu, G0=G0, t0=t0, gamma=sp.pop("gamma", math.log(2) / 2), k=k)
    else:
        sol = SeparatedSolution(lam=lam, mu=mu, G0=G0, t0=t0, c=sp.pop("c", -0.5), k=k if k else 1.0)
    if sp:
        raise ConfigError([f"[special] unknown key {key!r}" for key in sorted(sp)])
    lo, hi = sol.support()
    rec = {"params": dataclasses.asdict(sol), "support": [lo, hi], "energy": energy_norms(sol)}
    if math.isfinite(hi):
        grid = make_graded_grid(max(lo, 1e-3), hi, 401)
        rec["classical_residual"] = classical_residual(sol, grid, [t0, t0 + 0.5, t0 + 1.0])
    if lam == 0:
        rec["sharpness"] = lipschitz_sharpness_exhibit(sol)
    _write(cfg.out_dir, "special.json", dumps(rec))
    print(dumps(rec), end="")
    return EXIT_OK


def _summarize(report: RunReport):
    s = report.summary()
    print(f"{s['checks']} checks, {s['failed']} failed, {s['run_errors']} run errors")
    for run in report.runs:
        if run.get("status") == "error":
            print(f"  run {run['problem']} n={run['n']}: {run['error']}")
        for a in run.get("audits", []):
            if not a["pass"]:
                print(f"  FAIL {run['problem']} n={run['n']} {a['name']}: lhs={a['lhs']:.6g} rhs={a['rhs']:.6g}")
    for name, rec in report.oracles.items():
        if not rec["pass"]:
            print(f"  FAIL oracle {name}")


VERBS = {"solve": cmd_solve, "audit": cmd_audit, "converge": cmd_converge, "hardy": cmd_hardy,
         "special": cmd_special}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return VERBS[args.verb](args)
    except ConfigError as exc:
        print("configuration error:", file=sys.stderr)
        for p in exc.problems:
            print(f"  - {p}", file=sys.stderr)
        return EXIT_ERROR
    except DegenLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
