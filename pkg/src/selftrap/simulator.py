"""Nonlinear time evolution of the scaled equations of motion.

State vector: (x, p, Re a1, Im a1, Re a2, Im a2) with p = dx/dt, all in
scaled units. Adaptive runs use the Dormand-Prince 5(4) pair; fixed-step
runs use classical RK4 so the global error is O(h^4).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .equilibrium import Equilibrium, solve_equilibrium
from .errors import DivergenceError, FitRejectedError, StiffnessError
from .linear_response import cooling_rate, mechanical_frequency
from .params import ScaledParams

CSV_HEADER = ("t", "x", "p", "re_a1", "im_a1", "re_a2", "im_a2", "energy")
T_CAP = 1e4


@dataclass(frozen=True)
class SimState:
    x: float
    p: float
    a1: complex
    a2: complex

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.a1.real, self.a1.imag, self.a2.real, self.a2.imag])

    @classmethod
    def from_array(cls, y) -> "SimState":
        return cls(float(y[0]), float(y[1]), complex(y[2], y[3]), complex(y[4], y[5]))

    @classmethod
    def at_equilibrium(cls, eq: Equilibrium, dx: float = 0.0) -> "SimState":
        return cls(eq.x0 + dx, 0.0, eq.alpha1, eq.alpha2)


@dataclass(frozen=True)
class StepControl:
    """Either a fixed step ``h`` or adaptive tolerances.

    ``sample_dt`` resamples adaptive output onto a uniform grid (cubic
    Hermite); without it every accepted step is stored. Fixed-step runs
    store every ``stride``-th step.
    """

    h: float | None = None
    rtol: float = 1e-9
    atol: float = 1e-12
    h_init: float | None = None
    h_min: float = 1e-12
    h_max: float = math.inf
    sample_dt: float | None = None
    stride: int = 1
    max_steps: int = 50_000_000


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), 6)
    x0: float | None = None
    omegaM2: float | None = None
    n_steps: int = 0

    def __post_init__(self):
        if self.states.shape != (len(self.times), 6):
            raise ValueError("states must have shape (len(times), 6)")

    @property
    def x(self):
        return self.states[:, 0]

    @property
    def p(self):
        return self.states[:, 1]

    @property
    def a1(self):
        return self.states[:, 2] + 1j * self.states[:, 3]

    @property
    def a2(self):
        return self.states[:, 4] + 1j * self.states[:, 5]

    def state(self, i: int) -> SimState:
        return SimState.from_array(self.states[i])

    @property
    def energy(self) -> np.ndarray:
        """Mechanical energy about the trap, 0.5 p^2 + 0.5 omega_M^2 (x - x0)^2."""
        if self.x0 is None or self.omegaM2 is None:
            return np.full(len(self.times), np.nan)
        return 0.5 * self.p**2 + 0.5 * self.omegaM2 * (self.x - self.x0) ** 2

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            e = self.energy
            for t, row, en in zip(self.times, self.states, e):
                w.writerow([f"{v:.17g}" for v in (t, *row, en)])
        finally:
            if own:
                fh.close()


@dataclass(frozen=True)
class RateFit:
    gamma_num: float
    r_squared: float
    window: tuple
    capped: bool = False


def derivative(y: np.ndarray, p: ScaledParams) -> np.ndarray:
    """Right-hand side of the six real equations of motion."""
    x, v, u1, w1, u2, w2 = y
    n1 = u1 * u1 + w1 * w1
    n2 = u2 * u2 + w2 * w2
    s = x - p.phase
    c1 = math.cos(x) ** 2
    c2 = math.cos(s) ** 2
    d1 = p.delta1 + c1
    d2 = p.delta2 + c2
    k = p.kappaA
    # a' = (i d - k) a + drive
    return np.array([
        v,
        -p.eps2 * (n1 * math.sin(2 * x) + n2 * math.sin(2 * s)),
        -k * u1 - d1 * w1 + 1.0,
        d1 * u1 - k * w1,
        -k * u2 - d2 * w2 + p.drive_ratio,
        d2 * u2 - k * w2,
    ])


def state_derivative(s: SimState, p: ScaledParams) -> SimState:
    return SimState.from_array(derivative(s.to_array(), p))


# Dormand-Prince 5(4)
_A = tuple(np.array(row) for row in (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
))
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _check_finite(y, t):
    if not np.all(np.isfinite(y)):
        raise DivergenceError(f"non-finite state after t = {t:.6g}", last_good_time=t)


def _integrate_fixed(f, y0, t_end, ctrl):
    n = int(math.ceil(t_end / ctrl.h - 1e-9))
    h = t_end / n
    ts = [0.0]
    ys = [y0.copy()]
    y = y0
    for i in range(1, n + 1):
        y_new = _rk4_step(f, y, h)
        _check_finite(y_new, (i - 1) * h)
        y = y_new
        if i % ctrl.stride == 0 or i == n:
            ts.append(i * h)
            ys.append(y)
    return np.array(ts), np.array(ys), n


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _integrate_adaptive(f, y0, t_end, ctrl):
    t = 0.0
    y = y0.copy()
    k1 = f(y)
    scale0 = ctrl.atol + ctrl.rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale0) ** 2))
    d1 = np.sqrt(np.mean((k1 / scale0) ** 2))
    h = ctrl.h_init or (0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-4)
    h = min(h, ctrl.h_max, t_end)

    ts = [0.0]
    ys = [y.copy()]
    next_sample = ctrl.sample_dt
    steps = 0
    K = np.empty((7, y.size))
    while t < t_end:
        if steps >= ctrl.max_steps:
            raise StiffnessError(f"step budget exhausted at t = {t:.6g}")
        if h < ctrl.h_min:
            raise StiffnessError(f"step size underflow (h = {h:.3g}) at t = {t:.6g}")
        h = min(h, t_end - t)
        K[0] = k1
        for i in range(1, 7):
            K[i] = f(y + h * (_A[i] @ K[:i]))
        y_new = y + h * (_B5 @ K)
        err_vec = h * (_E @ K)
        scale = ctrl.atol + ctrl.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
        if not math.isfinite(err):
            if not np.all(np.isfinite(y_new)) and h <= ctrl.h_min * 2:
                raise DivergenceError(f"non-finite state after t = {t:.6g}", last_good_time=t)
            h *= 0.25
            continue
        if err <= 1.0:
            t_new = t + h
            k_new = K[6]  # FSAL
            _check_finite(y_new, t)
            if ctrl.sample_dt is None:
                ts.append(t_new)
                ys.append(y_new.copy())
            else:
                while next_sample <= t_new + 1e-12 * t_end:
                    ts.append(next_sample)
                    ys.append(_hermite(t, y, k1, t_new, y_new, k_new, min(next_sample, t_new)))
                    next_sample += ctrl.sample_dt
            t, y, k1 = t_new, y_new, k_new.copy()
            steps += 1
            fac = 0.9 * err ** (-0.2) if err > 0 else 5.0
            h *= min(5.0, max(0.2, fac))
        else:
            h *= max(0.2, 0.9 * err ** (-0.25))
        h = min(h, ctrl.h_max)
    return np.array(ts), np.array(ys), steps


def integrate(init: SimState, p: ScaledParams, t_end: float, ctrl: StepControl | None = None,
              eq: Equilibrium | None = None) -> Trajectory:
    """Evolve ``init`` to ``t_end``. Deterministic for fixed inputs.

    Passing ``eq`` attaches the trap centre and omega_M^2 so that
    ``Trajectory.energy`` is defined.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    ctrl = ctrl or StepControl()

    def f(y):
        try:
            return derivative(y, p)
        except (ValueError, OverflowError):
            # math.cos(inf) and friends: let the finiteness check report it
            return np.full(y.shape, np.nan)

    y0 = init.to_array()
    if ctrl.h is not None:
        ts, ys, n = _integrate_fixed(f, y0, t_end, ctrl)
    else:
        ts, ys, n = _integrate_adaptive(f, y0, t_end, ctrl)
    x0 = w2 = None
    if eq is not None:
        x0 = eq.x0
        w2 = mechanical_frequency(eq, p)
    return Trajectory(times=ts, states=ys, x0=x0, omegaM2=w2, n_steps=n)


def extract_rate(traj: Trajectory, eq: Equilibrium | None = None, t_skip: float = 0.0,
                 min_r2: float = 0.95, capped: bool = False) -> RateFit:
    """Least-squares slope of log E(t) after ``t_skip``.

    E decays as exp(gamma t), so gamma_num is directly comparable with the
    linear-response rate.
    """
    if eq is not None:
        traj.x0 = eq.x0
    if traj.x0 is None or traj.omegaM2 is None:
        raise ValueError("trajectory has no trap centre attached; pass eq")
    mask = traj.times >= t_skip
    t = traj.times[mask]
    e = traj.energy[mask]
    good = e > 0
    t, e = t[good], e[good]
    if len(t) < 10:
        raise FitRejectedError("fewer than 10 samples in the fit window")
    le = np.log(e)
    slope, icpt = np.polyfit(t, le, 1)
    resid = le - (slope * t + icpt)
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    if r2 < min_r2:
        raise FitRejectedError(f"energy envelope fit r^2 = {r2:.3f} < {min_r2}")
    return RateFit(gamma_num=float(slope), r_squared=r2, window=(float(t[0]), float(t[-1])), capped=capped)


def run_length(omegaM: float, gamma: float, periods: float = 40.0, e_folds: float = 5.0,
               cap: float = T_CAP) -> tuple[float, bool]:
    t = max(periods * 2 * math.pi / omegaM, e_folds / abs(gamma) if gamma != 0 else math.inf)
    return (cap, True) if t > cap else (t, False)


def simulate_rate(p: ScaledParams, dx: float = 0.01, ctrl: StepControl | None = None,
                  t_end: float | None = None, eq: Equilibrium | None = None):
    """Displace the sphere by ``dx`` from the trap and fit the energy decay.

    Returns (trajectory, fit, linear-response report).
    """
    eq = eq or solve_equilibrium(p)
    rep = cooling_rate(eq, p)
    capped = False
    if t_end is None:
        t_end, capped = run_length(rep.omegaM, rep.gamma)
        if capped:
            warnings.warn("run length hit the 1e4 cap; fitting the available window", stacklevel=2)
    if ctrl is None:
        period = 2 * math.pi / rep.omegaM
        ctrl = StepControl(sample_dt=period / 16)
    traj = integrate(SimState.at_equilibrium(eq, dx), p, t_end, ctrl, eq=eq)
    fit = extract_rate(traj, t_skip=10.0 / p.kappaA, capped=capped)
    return traj, fit, rep
