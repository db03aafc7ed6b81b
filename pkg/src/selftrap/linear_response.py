"""Linearised dynamics about the trap: frequency, cooling rate, splittings.

Sign convention everywhere: gamma is the growth rate of the mechanical
energy, so gamma < 0 is cooling. The amplitude decays at gamma / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import Equilibrium, trap_curvature
from .errors import UnstableEquilibriumError
from .params import ScaledParams


@dataclass(frozen=True)
class CoolingReport:
    omegaM: float
    omegaM2: float
    s1_plus: float
    s1_minus: float
    s2_plus: float
    s2_minus: float
    gamma: float
    gamma_field1: float
    gamma_field2: float
    nmin: float | None = None

    @property
    def s_plus(self) -> float:
        return self.s1_plus + self.s2_plus

    @property
    def s_minus(self) -> float:
        return self.s1_minus + self.s2_minus

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class LinearSystem:
    """Real first-order system over (dx, dp, Re a1, Im a1, Re a2, Im a2)."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    # (decay rate, oscillation frequency) per eigenvalue, decay = Re(lambda)
    eigen_decays: list
    mechanical: tuple | None = None


@dataclass(frozen=True)
class SplittingResult:
    which_field: int
    y: float | None
    approx_y: float | None

    @property
    def split(self) -> bool:
        return self.y is not None


def geometric_factors(x0: float, p: ScaledParams) -> tuple[float, float]:
    """Gradients of the two optical potentials at x0 (sin 2x0, sin 2(x0-phase))."""
    return math.sin(2 * x0), math.sin(2 * (x0 - p.phase))


def mechanical_frequency(eq: Equilibrium, p: ScaledParams) -> float:
    """omega_M^2 with fields frozen at their equilibrium values.

    A non-positive value (anti-trapping) is returned as is.
    """
    return float(trap_curvature(eq.x0, eq.n1, eq.n2, p))


def spectral_weights(omega, eq: Equilibrium, p: ScaledParams):
    """Lorentzian weights S1(omega), S2(omega) of the two fields."""
    g1, g2 = geometric_factors(eq.x0, p)
    k2 = p.kappaA**2
    s1 = eq.n1 * g1**2 / ((eq.d1x - omega) ** 2 + k2)
    s2 = eq.n2 * g2**2 / ((eq.d2x - omega) ** 2 + k2)
    return s1, s2


def cooling_rate(eq: Equilibrium, p: ScaledParams) -> CoolingReport:
    w2 = mechanical_frequency(eq, p)
    if not w2 > 0:
        raise UnstableEquilibriumError(f"omega_M^2 = {w2:.6g} <= 0 at x0 = {eq.x0:.6g}")
    w = math.sqrt(w2)
    s1p, s2p = spectral_weights(w, eq, p)
    s1m, s2m = spectral_weights(-w, eq, p)
    pref = p.eps2 * p.kappaA / w
    g1 = pref * (s1p - s1m)
    g2 = pref * (s2p - s2m)
    sp, sm = s1p + s2p, s1m + s2m
    nmin = sp / (sm - sp) if sm > sp else None
    return CoolingReport(
        omegaM=w, omegaM2=w2,
        s1_plus=float(s1p), s1_minus=float(s1m), s2_plus=float(s2p), s2_minus=float(s2m),
        gamma=float(g1 + g2), gamma_field1=float(g1), gamma_field2=float(g2),
        nmin=None if nmin is None else float(nmin),
    )


def _splitting(num: float, d_other: float, trig: float, kappaA: float):
    if trig <= 0 or d_other == 0:
        return None
    rad = num / (d_other**2 * trig) - kappaA**2
    return math.sqrt(rad) if rad >= 0 else None


def sideband_splitting(p: ScaledParams, eq: Equilibrium, which_field: int) -> SplittingResult:
    """Half-splitting of the r2+- (which_field=1) or r1+- (which_field=2) pair.

    ``y`` uses the exact radicand; ``approx_y`` is the small-angle form
    sqrt(2) eps / |delta2 + 1/2| (field 1 only, x0 near 0).
    """
    if which_field == 1:
        y = _splitting(2 * p.eps2, eq.d2x, math.cos(2 * eq.x0), p.kappaA)
        shift = p.delta2 + 0.5
        approx = math.sqrt(2) * p.eps / abs(shift) if shift != 0 else None
    elif which_field == 2:
        y = _splitting(2 * p.eps2 * p.drive_ratio**2, eq.d1x, math.sin(2 * eq.x0), p.kappaA)
        approx = None
    else:
        raise ValueError("which_field must be 1 or 2")
    return SplittingResult(which_field=which_field, y=y, approx_y=approx)


def linear_matrix(eq: Equilibrium, p: ScaledParams) -> np.ndarray:
    g1, g2 = geometric_factors(eq.x0, p)
    w2 = mechanical_frequency(eq, p)
    k = p.kappaA
    e2 = p.eps2
    a1r, a1i = eq.alpha1.real, eq.alpha1.imag
    a2r, a2i = eq.alpha2.real, eq.alpha2.imag
    # force from intensity fluctuations: -eps2 * G_i * 2 Re(alpha_i^* a_i)
    return np.array([
        [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [-w2, 0.0, -2 * e2 * g1 * a1r, -2 * e2 * g1 * a1i, -2 * e2 * g2 * a2r, -2 * e2 * g2 * a2i],
        [a1i * g1, 0.0, -k, -eq.d1x, 0.0, 0.0],
        [-a1r * g1, 0.0, eq.d1x, -k, 0.0, 0.0],
        [a2i * g2, 0.0, 0.0, 0.0, -k, -eq.d2x],
        [-a2r * g2, 0.0, 0.0, 0.0, eq.d2x, -k],
    ])


def _participation(vecs: np.ndarray, w: float) -> np.ndarray:
    """Share of each eigenvector's weight in the mechanical coordinates.

    Position is weighted by omega_M so x and p enter on an energy footing.
    """
    mech = (w * np.abs(vecs[0])) ** 2 + np.abs(vecs[1]) ** 2
    return mech / (mech + np.sum(np.abs(vecs[2:]) ** 2, axis=0)).clip(min=1e-300)


def build_linear_system(eq: Equilibrium, p: ScaledParams) -> LinearSystem:
    """Eigen-decomposition of the linearised dynamics.

    The mechanical mode is the eigenvalue (upper half-plane member of its
    pair) whose eigenvector sits most in (dx, dp). Near a sideband
    resonance the mechanical and optical frequencies cross, so proximity
    to omega_M alone can pick a field mode.
    """
    m = linear_matrix(eq, p)
    lam, vecs = np.linalg.eig(m)
    pairs = [(float(v.real), float(abs(v.imag))) for v in lam]
    w2 = mechanical_frequency(eq, p)
    mech = None
    if w2 > 0:
        part = _participation(vecs, math.sqrt(w2))
        # prefer the +omega member so the pair is reported once
        order = sorted(range(len(lam)), key=lambda i: (-round(part[i], 9), -lam[i].imag))
        mech = pairs[order[0]]
    return LinearSystem(matrix=m, eigenvalues=lam, eigen_decays=pairs, mechanical=mech)


def spring_shift(eq: Equilibrium, p: ScaledParams) -> float:
    """Dynamical optical-spring shift of omega_M^2 to lowest order in eps2.

    Positive stiffens the trap. Small values relative to omega_M^2 mark the
    weak back-action regime where the perturbative rate is trustworthy.
    """
    w2 = mechanical_frequency(eq, p)
    if not w2 > 0:
        raise UnstableEquilibriumError(f"omega_M^2 = {w2:.6g} <= 0 at x0 = {eq.x0:.6g}")
    w = math.sqrt(w2)
    g1, g2 = geometric_factors(eq.x0, p)
    k2 = p.kappaA**2
    total = 0.0
    for n, g, d in ((eq.n1, g1, eq.d1x), (eq.n2, g2, eq.d2x)):
        total += n * g**2 * ((w + d) / (k2 + (w + d) ** 2) - (w - d) / (k2 + (w - d) ** 2))
    return float(p.eps2 * total)


def eigen_gamma(eq: Equilibrium, p: ScaledParams) -> float:
    """Energy growth rate of the mechanical eigenmode, 2 Re(lambda_mech)."""
    ls = build_linear_system(eq, p)
    if ls.mechanical is None:
        raise UnstableEquilibriumError("no trapped mechanical mode")
    return 2 * ls.mechanical[0]
