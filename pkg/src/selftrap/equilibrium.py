"""Self-consistent steady state of the two-mode trap.

The intracavity fields are slaved to the sphere position, so the steady
state reduces to one scalar equation in x0, the optical force balance

    |alpha1(x0)|^2 sin 2x0 + |alpha2(x0)|^2 sin 2(x0 - phase) = 0,

which for phase = pi/4 is tan 2x0 = |alpha2|^2 / |alpha1|^2 multiplied
through by cos 2x0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import AmbiguousEquilibriumError, NoEquilibriumError
from .params import ScaledParams

N_SCAN = 4096


@dataclass(frozen=True)
class Equilibrium:
    x0: float
    alpha1: complex
    alpha2: complex
    d1x: float
    d2x: float
    residual: float = 0.0
    # other force-balance roots, shallower traps than x0
    alternatives: tuple = ()

    @property
    def n1(self) -> float:
        return abs(self.alpha1) ** 2

    @property
    def n2(self) -> float:
        return abs(self.alpha2) ** 2


def effective_detunings(x0, p: ScaledParams):
    """Detunings shifted by the optical potential at position x0."""
    d1x = p.delta1 + 0.5 * (1 + np.cos(2 * x0))
    d2x = p.delta2 + 0.5 * (1 + np.cos(2 * (x0 - p.phase)))
    return d1x, d2x


def steady_fields(d1x, d2x, p: ScaledParams):
    alpha1 = 1 / (p.kappaA - 1j * d1x)
    alpha2 = p.drive_ratio / (p.kappaA - 1j * d2x)
    return alpha1, alpha2


def force_balance(x, p: ScaledParams):
    """Static force on the sphere divided by -eps2, with fields slaved to x.

    Works elementwise on arrays.
    """
    d1x, d2x = effective_detunings(x, p)
    k2 = p.kappaA**2
    n1 = 1 / (d1x**2 + k2)
    n2 = p.drive_ratio**2 / (d2x**2 + k2)
    return n1 * np.sin(2 * x) + n2 * np.sin(2 * (x - p.phase))


def trap_curvature(x0, n1, n2, p: ScaledParams):
    """omega_M^2 = 2 eps2 (|a1|^2 cos 2x0 + |a2|^2 cos 2(x0 - phase))."""
    return 2 * p.eps2 * (n1 * np.cos(2 * x0) + n2 * np.cos(2 * (x0 - p.phase)))


def equilibrium_at(x0: float, p: ScaledParams, residual=None, alternatives=()) -> Equilibrium:
    """Fields and effective detunings for a given trap position (no solve)."""
    d1x, d2x = effective_detunings(x0, p)
    a1, a2 = steady_fields(d1x, d2x, p)
    if residual is None:
        residual = float(force_balance(x0, p))
    return Equilibrium(
        x0=float(x0), alpha1=complex(a1), alpha2=complex(a2),
        d1x=float(d1x), d2x=float(d2x), residual=float(residual),
        alternatives=tuple(alternatives),
    )


def search_interval(phase: float) -> tuple[float, float]:
    if math.isclose(phase, math.pi / 4, rel_tol=0, abs_tol=1e-15):
        return 0.0, math.pi / 4
    return min(0.0, phase - math.pi / 2), max(math.pi / 4, phase)


def find_roots(p: ScaledParams, n_scan: int = N_SCAN) -> list[float]:
    """All sign changes of the force balance on the search interval, refined."""
    lo, hi = search_interval(p.phase)
    grid = np.linspace(lo, hi, n_scan + 1)
    f = force_balance(grid, p)
    roots = [float(x) for x in grid[f == 0.0]]
    idx = np.nonzero(f[:-1] * f[1:] < 0)[0]
    for i in idx:
        roots.append(
            brentq(force_balance, grid[i], grid[i + 1], args=(p,), xtol=1e-15, rtol=8.9e-16, maxiter=200)
        )
    return sorted(roots)


def solve_equilibrium(p: ScaledParams, strict: bool = False, n_scan: int = N_SCAN) -> Equilibrium:
    """Trap position and steady fields.

    When the force balance has several roots the deepest trap (largest
    omega_M^2) is returned and the remaining roots are listed in
    ``alternatives``; with ``strict=True`` an AmbiguousEquilibriumError
    carrying all roots is raised instead.
    """
    roots = find_roots(p, n_scan)
    if not roots:
        raise NoEquilibriumError(f"force balance has no sign change for {p}")
    if len(roots) == 1:
        return equilibrium_at(roots[0], p)

    eqs = [equilibrium_at(x, p) for x in roots]
    curv = [trap_curvature(e.x0, e.n1, e.n2, p) for e in eqs]
    best = int(np.argmax(curv))
    if strict:
        raise AmbiguousEquilibriumError(
            f"{len(roots)} equilibria found", roots=roots, chosen=roots[best]
        )
    others = tuple(x for i, x in enumerate(roots) if i != best)
    e = eqs[best]
    return equilibrium_at(e.x0, p, residual=e.residual, alternatives=others)


def raw_detunings_for(d1x: float, d2x: float, x0: float, p: ScaledParams) -> tuple[float, float]:
    """Invert effective_detunings at a known x0: the bare (delta1, delta2)."""
    return (
        d1x - 0.5 * (1 + math.cos(2 * x0)),
        d2x - 0.5 * (1 + math.cos(2 * (x0 - p.phase))),
    )
