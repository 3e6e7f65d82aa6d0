"""Code-registered data profiles for u0 and for the product rho_lam * g0.

Profiles are named, parameterized callables on (0, inf) with a known support,
so every piece of problem data can be traced and tested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArgumentError


def bump(x, center: float, width: float):
    """exp(1 - 1/(1 - r^2)) for |r| < 1, r = (x - center)/width; peak value 1."""
    r = (np.asarray(x, dtype=float) - center) / width
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)

    def psi(z):
        out = np.zeros_like(z)
        pos = z > 0
        out[pos] = np.exp(-1.0 / z[pos])
        return out

    a = psi(s)
    b = psi(1.0 - s)
    return a / (a + b)


@dataclass(frozen=True)
class Profile:
    name: str
    params: dict
    func: Callable = field(repr=False, compare=False)
    support: tuple  # (lo, hi); hi may be inf
    sup: float  # max value
    inf: float  # min value

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        ok = x > 0
        out[ok] = self.func(x[ok])
        return out

    @property
    def sup_abs(self) -> float:
        return max(abs(self.sup), abs(self.inf))


def _zero(**_):
    return Profile("zero", {}, lambda x: np.zeros_like(x), (1.0, 2.0), 0.0, 0.0)


def _bump(amplitude: float = 1.0, center: float = 2.0, width: float = 1.0):
    if width <= 0 or center - width <= 0:
        raise ArgumentError("bump must be supported inside (0, inf)")
    params = {"amplitude": amplitude, "center": center, "width": width}
    return Profile(
        "bump",
        params,
        lambda x: amplitude * bump(x, center, width),
        (center - width, center + width),
        max(amplitude, 0.0),
        min(amplitude, 0.0),
    )


def _dipole(positive: float = 1.0, negative: float = 0.5, center: float = 2.0, width: float = 1.0):
    """positive * bump on the left half, -negative * bump on the right half."""
    if positive < 0 or negative < 0:
        raise ArgumentError("dipole amplitudes are magnitudes")
    half = 0.5 * width
    lc, rc = center - half, center + half

    def f(x):
        return positive * bump(x, lc, half) - negative * bump(x, rc, half)

    params = {"positive": positive, "negative": negative, "center": center, "width": width}
    return Profile("dipole", params, f, (center - width, center + width), positive, -negative)


def _special(lam: float = 0.0, mu: float = 1.0, gamma: float = float(np.log(2) / 2), k: float = 0.0,
             c: float = -1.0, G0: float = 1.0):
    from .special import SeparatedSolution

    sol = SeparatedSolution(lam=lam, mu=mu, G0=G0, t0=0.0, gamma=gamma if lam == 0 else None,
                            c=None if lam == 0 else c, k=k)
    lo, hi = sol.support()
    grid = np.linspace(lo, hi, 4001)[1:-1]
    peak = float(np.max(G0 * sol.F(grid)))
    params = {"lam": lam, "mu": mu, "gamma": gamma, "k": k, "c": c, "G0": G0}
    return Profile("special", params, lambda x: G0 * sol.F(x), (lo, hi), peak, 0.0)


U0_CATALOG = {"zero": _zero, "bump": _bump, "special": _special}
RHO_G0_CATALOG = {"zero": _zero, "bump": _bump, "dipole": _dipole}


def make_u0(name: str, **params) -> Profile:
    try:
        factory = U0_CATALOG[name]
    except KeyError:
        raise ArgumentError(f"unknown u0 profile {name!r}; known: {sorted(U0_CATALOG)}") from None
    return factory(**params)


def make_rho_g0(name: str, **params) -> Profile:
    try:
        factory = RHO_G0_CATALOG[name]
    except KeyError:
        raise ArgumentError(f"unknown g0 profile {name!r}; known: {sorted(RHO_G0_CATALOG)}") from None
    return factory(**params)
