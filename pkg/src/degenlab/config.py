"""INI experiment configuration, validated all at once.

Sections: one or more ``[problem]`` / ``[problem NAME]``, plus ``[run]``,
``[audits]``, ``[oracles]``, ``[converge]``, ``[special]`` and ``[outputs]``.
See the README for every key.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import RHO_G0_CATALOG, U0_CATALOG
from .errors import ConfigError, DegenLabError
from .solver import ProblemSpec


@dataclass(frozen=True)
class ProblemEntry:
    name: str
    lam: float
    T: float
    u0: tuple
    g0: tuple
    theta: float | None

    def build(self) -> ProblemSpec:
        return ProblemSpec.from_catalog(self.lam, self.T, self.u0, self.g0, self.theta)

    def echo(self) -> dict:
        return {"name": self.name, "lambda": self.lam, "T": self.T, "u0": [self.u0[0], dict(self.u0[1])],
                "g0": [self.g0[0], dict(self.g0[1])], "theta": self.theta}


@dataclass(frozen=True)
class AuditSpec:
    lp: tuple = ()
    delta: tuple = ()
    time_weighted: bool = False
    tails_k: tuple = ()
    tails_delta: float = 0.5
    bc: bool = False
    interior: tuple | None = None  # (t0, d_minus, d_plus)
    holder_alpha: float = 0.5
    kappa: float = 1.0
    audit_tol: float = 0.05

    @property
    def empty(self) -> bool:
        return not (self.lp or self.delta or self.time_weighted or self.tails_k or self.bc or self.interior)


@dataclass(frozen=True)
class ConvergeSpec:
    mode: str = "both"
    base_count: int = 151
    base_dt: float = 0.01
    levels: int = 3
    T: float = 1.0
    region: tuple | None = None
    solution: str = "separated"


@dataclass(frozen=True)
class ExperimentConfig:
    problems: tuple = ()
    n_schedule: tuple = (10,)
    grid_count: int = 400
    grid_grading: float = 1.0
    dt: float = 1e-3
    save_every: int = 1
    workers: int = 1
    seed: int = 0
    audits: AuditSpec = field(default_factory=AuditSpec)
    oracles: tuple = ()
    converge: ConvergeSpec | None = None
    special: dict = field(default_factory=dict)
    out_dir: str = "out"
    formats: tuple = ("json",)

    def echo(self) -> dict:
        a = self.audits
        return {
            "problems": [p.echo() for p in self.problems],
            "run": {"n_schedule": list(self.n_schedule), "grid_count": self.grid_count,
                    "grid_grading": self.grid_grading, "dt": self.dt, "save_every": self.save_every,
                    "seed": self.seed},
            "audits": {"lp": list(a.lp), "delta": list(a.delta), "time_weighted": a.time_weighted,
                       "tails_k": list(a.tails_k), "tails_delta": a.tails_delta, "bc": a.bc,
                       "interior": list(a.interior) if a.interior else None, "holder_alpha": a.holder_alpha,
                       "kappa": a.kappa, "audit_tol": a.audit_tol},
            "oracles": list(self.oracles),
        }


ORACLES = ("manufactured", "bc_saturation", "sharpness", "hardy", "identities")
CONVERGE_MODES = ("both", "space", "time")
CONVERGE_SOLUTIONS = ("separated", "zero")


class _Reader:
    """Typed getters that collect problems instead of raising on the first one."""

    def __init__(self):
        self.problems: list[str] = []

    def _get(self, sec, key, conv, default, what):
        if sec is None or key not in sec:
            return default
        raw = sec[key].strip()
        try:
            return conv(raw)
        except (ValueError, TypeError):
            self.problems.append(f"[{sec.name}] {key} = {raw!r} is not {what}")
            return default

    def float(self, sec, key, default=None):
        return self._get(sec, key, float, default, "a number")

    def int(self, sec, key, default=None):
        return self._get(sec, key, int, default, "an integer")

    def bool(self, sec, key, default=False):
        def conv(v):
            v = v.lower()
            if v in ("1", "yes", "true", "on"):
                return True
            if v in ("0", "no", "false", "off"):
                return False
            raise ValueError
        return self._get(sec, key, conv, default, "a boolean")

    def floats(self, sec, key, default=()):
        return self._get(sec, key, lambda v: tuple(float(s) for s in v.split(",") if s.strip()), default,
                         "a comma-separated list of numbers")

    def ints(self, sec, key, default=()):
        return self._get(sec, key, lambda v: tuple(int(s) for s in v.split(",") if s.strip()), default,
                         "a comma-separated list of integers")

    def words(self, sec, key, default=()):
        if sec is None or key not in sec:
            return default
        return tuple(s.strip() for s in sec[key].split(",") if s.strip())


def _profile(reader, sec, key, catalog, kind):
    name = sec.get(key, "zero").strip()
    if name not in catalog:
        reader.problems.append(f"[{sec.name}] unknown {kind} profile {name!r}; known: {sorted(catalog)}")
    params = {}
    prefix = key + "."
    for k in sec:
        if k.startswith(prefix):
            v = reader.float(sec, k)
            if v is not None:
                params[k[len(prefix):]] = v
    return (name, params)


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError([str(exc)]) from exc
    r = _Reader()
    known = {"run", "audits", "oracles", "converge", "special", "outputs"}
    for name in cp.sections():
        if not (name == "problem" or name.startswith("problem ") or name in known):
            r.problems.append(f"unknown section [{name}]")

    problems = []
    for name in cp.sections():
        if not (name == "problem" or name.startswith("problem ")):
            continue
        sec = cp[name]
        label = name[len("problem"):].strip() or "default"
        lam = r.float(sec, "lambda", 0.0)
        T = r.float(sec, "t", None)
        if T is None:
            r.problems.append(f"[{name}] T is required")
        theta = r.float(sec, "theta", None)
        u0 = _profile(r, sec, "u0", U0_CATALOG, "u0")
        g0 = _profile(r, sec, "g0", RHO_G0_CATALOG, "g0")
        problems.append(ProblemEntry(label, lam, T if T is not None else 1.0, u0, g0, theta))

    run = cp["run"] if cp.has_section("run") else None
    n_schedule = r.ints(run, "n_schedule", (10,))
    grid_count = r.int(run, "grid_count", 400)
    grading = r.float(run, "grid_grading", 1.0)
    dt = r.float(run, "dt", 1e-3)
    save_every = r.int(run, "save_every", 1)
    workers = r.int(run, "workers", 1)
    seed = r.int(run, "seed", 0)

    au = cp["audits"] if cp.has_section("audits") else None
    interior = r.floats(au, "interior", None)
    audits = AuditSpec(
        lp=r.ints(au, "lp", ()),
        delta=r.floats(au, "delta", ()),
        time_weighted=r.bool(au, "time_weighted", False),
        tails_k=r.floats(au, "tails_k", ()),
        tails_delta=r.float(au, "tails_delta", 0.5),
        bc=r.bool(au, "bc", False),
        interior=interior,
        holder_alpha=r.float(au, "holder_alpha", 0.5),
        kappa=r.float(au, "kappa", 1.0),
        audit_tol=r.float(au, "audit_tol", 0.05),
    )
    orc = cp["oracles"] if cp.has_section("oracles") else None
    oracles = tuple(k for k in ORACLES if orc is not None and r.bool(orc, k, False))
    if orc is not None:
        for k in orc:
            if k not in ORACLES:
                r.problems.append(f"[oracles] unknown oracle {k!r}; known: {list(ORACLES)}")

    converge = None
    if cp.has_section("converge"):
        cv = cp["converge"]
        converge = ConvergeSpec(
            mode=cv.get("mode", "both").strip(),
            base_count=r.int(cv, "base_count", 151),
            base_dt=r.float(cv, "base_dt", 0.01),
            levels=r.int(cv, "levels", 3),
            T=r.float(cv, "t", 1.0),
            region=r.floats(cv, "region", None),
            solution=cv.get("solution", "separated").strip(),
        )
    special = {}
    if cp.has_section("special"):
        sp = cp["special"]
        for k in sp:
            v = r.float(sp, k)
            if v is not None:
                special[k] = v
    out = cp["outputs"] if cp.has_section("outputs") else None
    out_dir = out.get("dir", "out").strip() if out is not None else "out"
    formats = r.words(out, "formats", ("json",))

    cfg = ExperimentConfig(tuple(problems), n_schedule, grid_count, grading, dt, save_every, workers, seed,
                           audits, oracles, converge, special, out_dir, formats)
    r.problems.extend(validate(cfg))
    if r.problems:
        raise ConfigError(r.problems)
    return cfg


def validate(cfg: ExperimentConfig) -> list[str]:
    """Every problem with the config, including the dt * ||rho g|| < 1 condition."""
    out = []
    if any(n < 2 for n in cfg.n_schedule):
        out.append("[run] n_schedule entries must be >= 2")
    if cfg.grid_count is None or cfg.grid_count < 3:
        out.append("[run] grid_count must be >= 3")
    if cfg.grid_grading is None or cfg.grid_grading < 1:
        out.append("[run] grid_grading must be >= 1")
    if cfg.dt is None or not cfg.dt > 0:
        out.append("[run] dt must be positive")
    if cfg.save_every is None or cfg.save_every < 1:
        out.append("[run] save_every must be >= 1")
    if cfg.workers is None or cfg.workers < 1:
        out.append("[run] workers must be >= 1")
    for f in cfg.formats:
        if f not in ("json", "csv"):
            out.append(f"[outputs] unknown format {f!r}")
    a = cfg.audits
    for m in a.lp:
        if m not in (0, 1, 2):
            out.append(f"[audits] lp entry {m} not in 0, 1, 2")
    for d in (*a.delta, a.tails_delta):
        if d is not None and not 0 < d < 1:
            out.append(f"[audits] delta {d} must lie in (0, 1)")
    for k in a.tails_k:
        if k < 1:
            out.append(f"[audits] tails_k entry {k} must be >= 1")
    if a.interior is not None:
        if len(a.interior) != 3:
            out.append("[audits] interior needs t0, d_minus, d_plus")
        elif not (a.interior[0] > 0 and 0 < a.interior[1] < a.interior[2]):
            out.append("[audits] interior needs t0 > 0 and 0 < d_minus < d_plus")
    if a.holder_alpha is not None and not 0 < a.holder_alpha <= 1:
        out.append("[audits] holder_alpha must lie in (0, 1]")
    if cfg.converge is not None:
        c = cfg.converge
        if c.mode not in CONVERGE_MODES:
            out.append(f"[converge] mode must be one of {list(CONVERGE_MODES)}")
        if c.solution not in CONVERGE_SOLUTIONS:
            out.append(f"[converge] solution must be one of {list(CONVERGE_SOLUTIONS)}")
        if c.levels is None or c.levels < 3:
            out.append("[converge] levels must be >= 3")
        if c.base_count is None or c.base_count < 3:
            out.append("[converge] base_count must be >= 3")
    for p in cfg.problems:
        if cfg.dt and p.T and abs(round(p.T / cfg.dt) * cfg.dt - p.T) > 1e-9 * p.T:
            out.append(f"[problem {p.name}] dt does not divide T")
        if a.interior is not None and len(a.interior) == 3 and not a.interior[0] < p.T:
            out.append(f"[problem {p.name}] interior t0 must be < T")
        if p.u0[0] not in U0_CATALOG or p.g0[0] not in RHO_G0_CATALOG:
            continue  # already reported by the parser
        try:
            spec = p.build()
        except DegenLabError as exc:
            out.append(f"[problem {p.name}] {exc}")
            continue
        except TypeError as exc:
            out.append(f"[problem {p.name}] bad profile parameters: {exc}")
            continue
        if cfg.dt and cfg.dt * max(spec.rho_g0.sup, 0.0) >= 1.0:
            out.append(f"[problem {p.name}] dt * max(rho g0) = {cfg.dt * spec.rho_g0.sup:g} violates the M-matrix condition (< 1)")
    return out


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {p}: {exc}"]) from exc
    return parse_config_text(text, str(p))
