"""Left modulus F_L of the weighted Hardy inequality ||f||_{L^q(d nu_lam)} <= C ||f'||_{L^p(dx)} on (0, b).

F_L(x) = nu_lam((x, b))^{1/q} x^{(p-1)/p}. The inequality holds iff sup F_L < inf,
and the embedding is compact iff F_L vanishes at both ends of (0, b).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ArgumentError, ConsistencyError
from .weight import WeightContext, nu_interval

LOG_SPAN = (-8.0, 8.0)
SAMPLES = 4001


@dataclass(frozen=True)
class EmbeddingQuery:
    lam: float
    p: float
    q: float
    b: float = math.inf

    def __post_init__(self):
        if self.lam < 0:
            raise ArgumentError("lambda must be nonnegative")
        if not (1 <= self.p <= self.q < math.inf):
            raise ArgumentError("need 1 <= p <= q < inf")
        if not self.b > 0:
            raise ArgumentError("b must be positive")

    @property
    def p_conj(self) -> float:
        return math.inf if self.p == 1 else self.p / (self.p - 1.0)

    @property
    def head_exponent(self) -> float:
        """(p - 1)/p, the power of x in the L^{p'}(0, x) factor."""
        return (self.p - 1.0) / self.p


@dataclass(frozen=True)
class EmbeddingVerdict:
    continuous: bool
    compact: bool
    sup_F: float
    limit_at_0: float
    limit_at_b: float
    argmax: float = math.nan

    def __post_init__(self):
        if self.compact and not self.continuous:
            raise ConsistencyError("compact verdict without continuity")


def modulus_F_L(x, query: EmbeddingQuery):
    x = np.asarray(x, dtype=float)
    if np.any(~((x > 0) & (x < query.b))):
        raise ArgumentError("x must lie in (0, b)")
    ctx = WeightContext(query.lam)
    if query.lam == 0:
        # nu_0((x, b)) = 1/x - 1/b, kept in product form to avoid overflow
        tail = (1.0 / x) * (1.0 - x / query.b) if math.isfinite(query.b) else 1.0 / x
    else:
        tail = nu_interval(ctx, x, np.full_like(x, query.b))
    out = np.asarray(tail) ** (1.0 / query.q) * x**query.head_exponent
    return out if out.ndim else float(out)


def _trichotomy(e: float) -> float:
    """lim of z^e as z -> inf (e > 0), 1 (e = 0) or 0 (e < 0), with an exactness tolerance."""
    if abs(e) < 1e-12:
        return 1.0
    return math.inf if e > 0 else 0.0


def endpoint_limits(query: EmbeddingQuery) -> tuple[float, float]:
    """Closed-form limits of F_L at 0 and at b."""
    lam, p, q, b = query.lam, query.p, query.q, query.b
    e = query.head_exponent
    if lam == 0:
        # F_L ~ x^{e - 1/q} near 0
        lim0 = _trichotomy(1.0 / q - e)
        if math.isfinite(b):
            limb = 0.0
        else:
            limb = _trichotomy(e - 1.0 / q)
        return lim0, limb
    # p = 1: F_L(0+) = nu_lam((0, b))^{1/q}, finite since lam > 0
    lim0 = nu_interval(WeightContext(lam), 0.0, b) ** (1.0 / q) if p == 1 else 0.0
    # b = inf: F^q ~ lam^{q e - 1} z^{q e - 1} with z = (x + lam)/lam
    limb = 0.0 if math.isfinite(b) else _trichotomy(q * e - 1.0)
    return float(lim0), float(limb)


def _golden_refine(query, lo, hi):
    """Maximize F_L on [lo, hi] (log variable); returns (x*, F(x*))."""
    f = lambda s: -float(modulus_F_L(math.exp(s), query))
    res = optimize.minimize_scalar(f, bounds=(math.log(lo), math.log(hi)), method="bounded",
                                   options={"xatol": 1e-12})
    return math.exp(res.x), -res.fun


def sample_points(query: EmbeddingQuery, count: int = SAMPLES) -> np.ndarray:
    lo, hi = LOG_SPAN
    if math.isfinite(query.b):
        hi = min(hi, math.log10(query.b))
        x = np.logspace(lo, hi, count)
        x = x[x < query.b * (1.0 - 1e-12)]
    else:
        x = np.logspace(lo, hi, count)
    return x


def verdict(query: EmbeddingQuery, check: bool = True) -> EmbeddingVerdict:
    """Verdict from the sampled and refined sup of F_L and the closed-form limits.

    With ``check`` the result is compared against ``stated_classification`` and
    any disagreement raises ConsistencyError.
    """
    lim0, limb = endpoint_limits(query)
    x = sample_points(query)
    F = modulus_F_L(x, query)
    k = int(np.argmax(F))
    lo = x[max(k - 1, 0)]
    hi = x[min(k + 1, x.size - 1)]
    xs, fs = _golden_refine(query, lo, hi)
    if fs < F[k]:
        xs, fs = float(x[k]), float(F[k])
    sup_F = max(fs, lim0, limb)
    if math.isinf(lim0) or math.isinf(limb):
        sup_F = math.inf
    cont = math.isfinite(sup_F)
    comp = cont and lim0 == 0.0 and limb == 0.0
    v = EmbeddingVerdict(cont, comp, sup_F, lim0, limb, xs)
    if check:
        st = stated_classification(query)
        mismatch = [name for name, got, want in (("continuous", cont, st["continuous"]), ("compact", comp, st["compact"]))
                    if want is not None and got != want]
        if mismatch:
            raise ConsistencyError(
                f"modulus verdict disagrees with the stated theorem on {', '.join(mismatch)} for {query}: "
                f"computed continuous={cont}, compact={comp}; stated {st}"
            )
    return v


def stated_classification(query: EmbeddingQuery) -> dict:
    """The theorem statements as booleans (None where the statement only gives a necessary condition
    that is not violated)."""
    lam, p, q, b = query.lam, query.p, query.q, query.b
    pc = query.p_conj
    if lam > 0:
        if math.isfinite(b):
            return {"continuous": True, "compact": True}
        return {"continuous": p <= 2 and q <= pc, "compact": 1 < p < 2 and 2 < q < pc}
    if math.isfinite(b):
        # "if only" read as a necessary condition
        cont = None if pc <= q else False
        comp = None if (1 < p and cont is None) else False
        return {"continuous": cont, "compact": comp}
    return {"continuous": math.isclose(q, pc), "compact": False}


def default_lattice():
    out = []
    for lam in (0.0, 1.0):
        for p in (1.0, 1.5, 2.0, 3.0):
            qs = sorted({p, *[v for v in np.arange(1.0, 4.01, 0.5) if v >= p]})
            for q in qs:
                for b in (1.0, math.inf):
                    out.append(EmbeddingQuery(lam, p, float(q), b))
    return out


CSV_HEADER = ["lambda", "p", "q", "b", "sup_F", "lim0", "limb", "continuous", "compact"]


def verdict_table_csv(queries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for qy in queries:
        v = verdict(qy, check=False)
        w.writerow([f"{qy.lam:g}", f"{qy.p:g}", f"{qy.q:g}", f"{qy.b:g}", f"{v.sup_F:.17g}", f"{v.limit_at_0:.17g}",
                    f"{v.limit_at_b:.17g}", str(v.continuous).lower(), str(v.compact).lower()])
    return buf.getvalue()


def sweep_csv(query: EmbeddingQuery, count: int = 200) -> str:
    """x, F_L(x) plot data on log-spaced points."""
    x = sample_points(query, count)
    F = modulus_F_L(x, query)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "F_L"])
    for a, b in zip(x, F):
        w.writerow([f"{a:.17g}", f"{b:.17g}"])
    return buf.getvalue()
