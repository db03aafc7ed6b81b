"""Perturbative phonon transition rates and the optical phonon floor.

The up/down rates have the detailed-balance solution

    nmin = sum S(+omega_M) / (sum S(-omega_M) - sum S(+omega_M)),

finite only under net cooling.
"""

from __future__ import annotations

from dataclasses import dataclass

from .equilibrium import Equilibrium
from .errors import NoEquilibriumError
from .linear_response import cooling_rate
from .params import ScaledParams


@dataclass(frozen=True)
class PhononRates:
    up_coeff: float
    down_coeff: float
    nmin: float | None

    @property
    def net_cooling(self) -> float:
        """down - up, equal to -gamma."""
        return self.down_coeff - self.up_coeff


def phonon_rates(eq: Equilibrium, p: ScaledParams) -> PhononRates:
    rep = cooling_rate(eq, p)
    pref = p.eps2 * p.kappaA / rep.omegaM
    up = pref * rep.s_plus
    down = pref * rep.s_minus
    nmin = rep.s_plus / (rep.s_minus - rep.s_plus) if down > up else None
    return PhononRates(up_coeff=float(up), down_coeff=float(down), nmin=nmin)


def transition_rates(n: float, eq: Equilibrium, p: ScaledParams) -> tuple[float, float]:
    """(R_{n->n+1}, R_{n->n-1}) at occupancy n."""
    if n < 0:
        raise ValueError("occupancy must be non-negative")
    r = phonon_rates(eq, p)
    return (n + 1) * r.up_coeff, n * r.down_coeff


def nmin_from_weights(s_plus: float, s_minus: float) -> float:
    if not s_minus > s_plus:
        raise NoEquilibriumError("net heating: no finite phonon floor")
    return s_plus / (s_minus - s_plus)


def min_phonon(eq: Equilibrium, p: ScaledParams) -> float:
    rep = cooling_rate(eq, p)
    return nmin_from_weights(rep.s_plus, rep.s_minus)
