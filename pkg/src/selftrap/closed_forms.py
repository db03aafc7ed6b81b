"""Closed-form single- and double-resonance cooling rates and their operating points.

All rates are negative for cooling, matching :func:`linear_response.cooling_rate`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .equilibrium import solve_equilibrium
from .errors import InvalidParameterError, SolverError
from .linear_response import cooling_rate, mechanical_frequency
from .params import DEFAULT_PHASE, ScaledParams

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ResonancePoint:
    delta1: float
    delta2: float
    omegaM: float
    gamma_predicted: float
    kind: str  # SR_r2 | DR_small_angle | DR_symmetric | DR_numeric
    eps2: float
    kappaA: float
    drive_ratio: float
    phase: float = DEFAULT_PHASE

    def params(self) -> ScaledParams:
        return ScaledParams(
            eps2=self.eps2, delta1=self.delta1, delta2=self.delta2,
            kappaA=self.kappaA, drive_ratio=self.drive_ratio, phase=self.phase,
        )

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# -- single resonance (r2) ---------------------------------------------------

def gamma_sr(eps: float, kappaA: float, R: float) -> float:
    """Rate at r2: field 1 on cavity resonance traps, field 2 cools."""
    return -(R**2) * eps * kappaA**2 / (SQRT2 * (2 * eps**2 + kappaA**4))


def sr_detunings(eps: float, kappaA: float, R: float, phase: float = DEFAULT_PHASE) -> ResonancePoint:
    w = SQRT2 * eps / kappaA
    return ResonancePoint(
        delta1=-1.0, delta2=-w - 0.5, omegaM=w,
        gamma_predicted=gamma_sr(eps, kappaA, R), kind="SR_r2",
        eps2=eps**2, kappaA=kappaA, drive_ratio=R, phase=phase,
    )


def sr_optimal_eps(kappaA: float) -> float:
    return kappaA**2 / SQRT2


# -- double resonance, small angle ------------------------------------------

def dr_frequency(eps: float, kappaA: float) -> float:
    """Positive root of w^2 (w^2 + kappaA^2) = 2 eps^2."""
    k2 = kappaA**2
    # 4 eps^2 / (sqrt(k^4 + 8 eps^2) + k^2) is the cancellation-free form
    w2 = 4 * eps**2 / (math.sqrt(k2 * k2 + 8 * eps**2) + k2)
    return math.sqrt(w2)


def gamma_dr(eps: float, kappaA: float, R: float) -> float:
    w = dr_frequency(eps, kappaA)
    if w == 0:
        return 0.0
    return -(eps**2) * (R**2 + R**4) / (kappaA * w * (w**2 + kappaA**2))


def gamma_dr_leading(eps: float, kappaA: float, R: float) -> float:
    """Strong-drive limit keeping only the field-2 (R^2) term."""
    return -(R**2) * math.sqrt(eps) / (2**0.75 * kappaA)


def gamma_dr_asymptotic(eps: float, kappaA: float, R: float) -> float:
    return -(R**2 + R**4) * math.sqrt(eps) / (2**0.75 * kappaA)


def dr_detunings(eps: float, kappaA: float, R: float, phase: float = DEFAULT_PHASE) -> ResonancePoint:
    """Bare detunings putting both effective detunings at -omega_M, x0 ~ R^2/2."""
    if R > 1:
        raise InvalidParameterError(f"drive ratio R = {R} > 1")
    if R > 0.7:
        warnings.warn(f"R = {R} is outside the small-angle regime", stacklevel=2)
    w = dr_frequency(eps, kappaA)
    two_x0 = R**2
    return ResonancePoint(
        delta1=-w - 0.5 * (1 + math.cos(two_x0)),
        delta2=-w - 0.5 * (1 + math.cos(two_x0 - 2 * phase)),
        omegaM=w, gamma_predicted=gamma_dr(eps, kappaA, R), kind="DR_small_angle",
        eps2=eps**2, kappaA=kappaA, drive_ratio=R, phase=phase,
    )


def resonance_residual(p: ScaledParams) -> np.ndarray:
    """(d1x + omega_M, d2x + omega_M) after a full equilibrium solve."""
    eq = solve_equilibrium(p)
    w2 = mechanical_frequency(eq, p)
    if w2 <= 0:
        raise SolverError(f"anti-trapping equilibrium at {p}")
    w = math.sqrt(w2)
    return np.array([eq.d1x + w, eq.d2x + w])


def dr_detunings_numeric(
    eps: float,
    kappaA: float,
    R: float,
    phase: float = DEFAULT_PHASE,
    tol: float = 1e-10,
    max_iter: int = 60,
    seed: ResonancePoint | None = None,
) -> ResonancePoint:
    """Refine the double resonance with damped Newton on the self-consistent residual.

    Seeded from the small-angle closed form unless ``seed`` is given.
    """
    if seed is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            seed = dr_detunings(eps, kappaA, R, phase)
    base = ScaledParams(eps2=eps**2, delta1=seed.delta1, delta2=seed.delta2,
                        kappaA=kappaA, drive_ratio=R, phase=phase)
    z = np.array([seed.delta1, seed.delta2])

    def F(z):
        return resonance_residual(base.with_(delta1=z[0], delta2=z[1]))

    f = F(z)
    h = 1e-7
    for _ in range(max_iter):
        norm = np.linalg.norm(f)
        if norm < tol:
            break
        J = np.empty((2, 2))
        for j in range(2):
            dz = np.zeros(2)
            dz[j] = h * max(1.0, abs(z[j]))
            J[:, j] = (F(z + dz) - f) / dz[j]
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(J, f, rcond=None)[0]
        t = 1.0
        while t > 1e-4:
            try:
                f_new = F(z + t * step)
            except SolverError:
                t *= 0.5
                continue
            if np.linalg.norm(f_new) < (1 - 1e-4 * t) * norm:
                break
            t *= 0.5
        else:
            raise SolverError(f"double-resonance Newton stalled at |F| = {norm:.3g}")
        z = z + t * step
        f = f_new
    else:
        if np.linalg.norm(f) >= tol:
            raise SolverError("double-resonance Newton did not converge")

    p = base.with_(delta1=float(z[0]), delta2=float(z[1]))
    rep = cooling_rate(solve_equilibrium(p), p)
    return ResonancePoint(
        delta1=float(z[0]), delta2=float(z[1]), omegaM=rep.omegaM,
        gamma_predicted=rep.gamma, kind="DR_numeric",
        eps2=eps**2, kappaA=kappaA, drive_ratio=R, phase=phase,
    )


# -- symmetric double resonance (R = 1, x0 = pi/8) ----------------------------

def symmetric_frequency(eps: float, kappaA: float) -> float:
    k2 = kappaA**2
    return math.sqrt(-k2 / 2 + math.sqrt(k2 * k2 / 4 + 2 * SQRT2 * eps**2))


def symmetric_eps2(omegaM: float, kappaA: float) -> float:
    """Drive giving a symmetric double resonance at frequency omegaM."""
    return (omegaM**4 + kappaA**2 * omegaM**2) / (2 * SQRT2)


def symmetric_dr(eps: float, kappaA: float) -> tuple[float, float]:
    """(omega_M, gamma_opt) of the symmetric double resonance."""
    w = symmetric_frequency(eps, kappaA)
    if w == 0:
        return 0.0, 0.0
    k2 = kappaA**2
    gamma = -(eps**2) * kappaA / w / (k2 + w**2) * (1 / k2 - 1 / (k2 + 4 * w**2))
    return w, gamma


def symmetric_gamma_asymptotic(eps: float, kappaA: float) -> float:
    return -(2 ** (-9 / 8)) * math.sqrt(eps) / kappaA


def symmetric_dr_detunings(eps: float, kappaA: float) -> ResonancePoint:
    w, g = symmetric_dr(eps, kappaA)
    d = -w - 0.5 * (1 + math.cos(math.pi / 4))
    return ResonancePoint(
        delta1=d, delta2=d, omegaM=w, gamma_predicted=g, kind="DR_symmetric",
        eps2=eps**2, kappaA=kappaA, drive_ratio=1.0, phase=DEFAULT_PHASE,
    )
