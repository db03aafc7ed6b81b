"""Detuning maps, resonance loci, phase and power scans.

Every grid cell or scan point is evaluated independently from its own
parameters, so results do not depend on evaluation order and the work can
be farmed out to a process pool.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .closed_forms import (
    dr_detunings_numeric, gamma_dr, gamma_sr, sr_detunings,
)
from .equilibrium import Equilibrium, equilibrium_at, raw_detunings_for, solve_equilibrium
from .errors import InvalidParameterError, SelfTrapError
from .linear_response import cooling_rate, mechanical_frequency
from .params import ScaledParams

SWEEP_COLUMNS = ("delta1", "delta2", "d1x", "d2x", "x0", "omegaM", "gamma", "nmin", "stable")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if v is None:
        return "nan"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


# -- single points -----------------------------------------------------------

def evaluate_point(p: ScaledParams, eq: Equilibrium | None = None) -> dict:
    """Full chain equilibrium -> omega_M -> gamma -> nmin at one parameter set."""
    row = dict(delta1=p.delta1, delta2=p.delta2, d1x=math.nan, d2x=math.nan, x0=math.nan,
               omegaM=math.nan, gamma=math.nan, nmin=math.nan, stable=False)
    try:
        eq = eq or solve_equilibrium(p)
    except SelfTrapError:
        return row
    row.update(d1x=eq.d1x, d2x=eq.d2x, x0=eq.x0)
    if mechanical_frequency(eq, p) <= 0:
        return row
    rep = cooling_rate(eq, p)
    row.update(omegaM=rep.omegaM, gamma=rep.gamma, stable=True,
               nmin=rep.nmin if rep.nmin is not None else math.nan)
    return row


def equilibrium_from_effective(d1x: float, d2x: float, template: ScaledParams):
    """Trap state for prescribed effective detunings.

    With the field intensities fixed by (d1x, d2x) the force balance is
    explicit: tan 2x0 = n2 sin 2phi / (n1 + n2 cos 2phi). Returns the
    equilibrium and the matching bare parameters.
    """
    k2 = template.kappaA**2
    n1 = 1 / (d1x**2 + k2)
    n2 = template.drive_ratio**2 / (d2x**2 + k2)
    phi = template.phase
    x0 = 0.5 * math.atan2(n2 * math.sin(2 * phi), n1 + n2 * math.cos(2 * phi))
    d1, d2 = raw_detunings_for(d1x, d2x, x0, template)
    p = template.with_(delta1=d1, delta2=d2)
    return equilibrium_at(x0, p), p


def evaluate_effective(d1x: float, d2x: float, template: ScaledParams) -> dict:
    eq, p = equilibrium_from_effective(d1x, d2x, template)
    row = evaluate_point(p, eq=eq)
    row.update(d1x=d1x, d2x=d2x)
    return row


# -- maps ----------------------------------------------------------------------

@dataclass
class SweepGrid:
    """Matrices are indexed [i, j] = (delta1_axis[i], delta2_axis[j]).

    ``axes`` says which detunings the axes hold: "raw" (bare delta) or
    "effective" (corrected delta^x). Both conventions are kept per cell.
    """

    delta1_axis: np.ndarray
    delta2_axis: np.ndarray
    gamma: np.ndarray
    omegaM: np.ndarray
    nmin: np.ndarray
    x0: np.ndarray
    d1x: np.ndarray
    d2x: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    stable: np.ndarray
    template: ScaledParams
    axes: str = "raw"

    def rows(self):
        n1, n2 = self.gamma.shape
        for i in range(n1):
            for j in range(n2):
                yield {c: getattr(self, c)[i, j] for c in SWEEP_COLUMNS}

    def to_csv(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in self.rows():
            w.writerow([fmt(r[c]) for c in SWEEP_COLUMNS])

    def to_json(self) -> dict:
        return {
            "axes": self.axes,
            "template": self.template.__dict__,
            "delta1_axis": [float(v) for v in self.delta1_axis],
            "delta2_axis": [float(v) for v in self.delta2_axis],
            "cells": [{c: (bool(r[c]) if c == "stable" else _jnum(r[c])) for c in SWEEP_COLUMNS}
                      for r in self.rows()],
        }

    def argmin(self) -> tuple[int, int]:
        g = np.where(self.stable, self.gamma, np.inf)
        return np.unravel_index(np.argmin(g), g.shape)


def _jnum(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _row_job(args):
    template, d1, d2_axis, axes = args
    if axes == "effective":
        return [evaluate_effective(d1, d2, template) for d2 in d2_axis]
    return [evaluate_point(template.with_(delta1=float(d1), delta2=float(d2))) for d2 in d2_axis]


def sweep_map(template: ScaledParams, d1_range, d2_range, resolution, threads: int = 1,
              axes: str = "raw") -> SweepGrid:
    """Evaluate the cooling chain on a (delta1, delta2) grid.

    ``resolution`` is an int or an (n1, n2) pair; each axis needs >= 2 points.
    Cells without a trapped equilibrium are masked (stable = False, NaN values).
    """
    if axes not in ("raw", "effective"):
        raise InvalidParameterError("axes must be 'raw' or 'effective'")
    n1, n2 = (resolution, resolution) if np.isscalar(resolution) else resolution
    if n1 < 2 or n2 < 2:
        raise InvalidParameterError("resolution must be >= 2 per axis")
    if not np.all(np.isfinite([*d1_range, *d2_range])):
        raise InvalidParameterError("detuning ranges must be finite")
    a1 = np.linspace(*d1_range, int(n1))
    a2 = np.linspace(*d2_range, int(n2))
    jobs = [(template, float(d1), a2, axes) for d1 in a1]
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(_row_job, jobs))
    else:
        rows = [_row_job(j) for j in jobs]

    def mat(key, dtype=float):
        return np.array([[r[key] for r in row] for row in rows], dtype=dtype)

    return SweepGrid(
        delta1_axis=a1, delta2_axis=a2,
        gamma=mat("gamma"), omegaM=mat("omegaM"), nmin=mat("nmin"), x0=mat("x0"),
        d1x=mat("d1x"), d2x=mat("d2x"), delta1=mat("delta1"), delta2=mat("delta2"),
        stable=mat("stable", bool), template=template, axes=axes,
    )


def local_minima(grid: SweepGrid) -> list[tuple[int, int]]:
    """Cells whose gamma is <= all stable 8-neighbours."""
    g = np.where(grid.stable, grid.gamma, np.inf)
    n1, n2 = g.shape
    out = []
    for i in range(n1):
        for j in range(n2):
            if not np.isfinite(g[i, j]):
                continue
            nb = g[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
            if g[i, j] <= nb.min():
                out.append((i, j))
    return out


def _gamma_at(z, template):
    p = template.with_(delta1=float(z[0]), delta2=float(z[1]))
    r = evaluate_point(p)
    return r["gamma"] if r["stable"] else 1e3


def multi_resonance_minimum(grid: SweepGrid, refine: bool = True) -> dict:
    """The cooling minimum of the map belonging to the r1-/r2- double resonance.

    Picks the local minimum of a raw-axis map closest to the numerically
    located double resonance, then (optionally) polishes it off-grid.
    """
    t = grid.template
    dr = dr_detunings_numeric(t.eps, t.kappaA, t.drive_ratio, t.phase)
    cands = [
        (math.hypot(grid.delta1[i, j] - dr.delta1, grid.delta2[i, j] - dr.delta2), i, j)
        for i, j in local_minima(grid) if grid.gamma[i, j] < 0
    ]
    if not cands:
        raise SelfTrapError("map has no cooling minimum")
    _, i, j = min(cands)
    z = np.array([grid.delta1[i, j], grid.delta2[i, j]])
    if refine:
        res = minimize(_gamma_at, z, args=(t,), method="Nelder-Mead",
                       options=dict(xatol=1e-9, fatol=1e-13, maxiter=2000))
        z = res.x
    row = evaluate_point(t.with_(delta1=float(z[0]), delta2=float(z[1])))
    row["grid_index"] = (int(i), int(j))
    row["dr_point"] = (dr.delta1, dr.delta2)
    return row


# -- resonance loci --------------------------------------------------------------

LOCUS_KINDS = ("r1+", "r1-", "r2+", "r2-", "a1+", "a1-", "a2+", "a2-")


@dataclass
class ResonanceLocus:
    kind: str
    points: list = field(default_factory=list)  # polylines: each an (n, 2) array of (delta1, delta2)

    @property
    def all_points(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, 2))
        return np.vstack(self.points)


def locus_residual(kind: str, p: ScaledParams, row: dict | None = None) -> float:
    """d_ix + omega_M for r-kinds, d_ix - omega_M for a-kinds; NaN if untrapped."""
    r = row or evaluate_point(p)
    if not r["stable"]:
        return math.nan
    d = r["d1x"] if kind[1] == "1" else r["d2x"]
    return d + r["omegaM"] if kind[0] == "r" else d - r["omegaM"]


def resonance_loci(template: ScaledParams, d1_range, d2_range, resolution=121,
                   grid: SweepGrid | None = None, tol: float | None = None) -> list[ResonanceLocus]:
    """Zero contours of d_ix -+ omega_M on a raw-detuning grid.

    Contours come from marching squares with linear interpolation; each
    point is re-solved and dropped if it misses the resonance by more than
    ``tol`` (default: one grid spacing), which removes spurious crossings
    at equilibrium-branch jumps. Polylines are split into +/- branches by
    the sign of the other field's effective detuning.
    """
    from skimage.measure import find_contours

    if grid is None:
        grid = sweep_map(template, d1_range, d2_range, resolution)
    a1, a2 = grid.delta1_axis, grid.delta2_axis
    h1, h2 = a1[1] - a1[0], a2[1] - a2[0]
    tol = tol if tol is not None else max(h1, h2)
    fields = {
        "r1": grid.d1x + grid.omegaM, "a1": grid.d1x - grid.omegaM,
        "r2": grid.d2x + grid.omegaM, "a2": grid.d2x - grid.omegaM,
    }
    out = {k: ResonanceLocus(k) for k in LOCUS_KINDS}
    for base, F in fields.items():
        mask = grid.stable & np.isfinite(F)
        if mask.sum() < 4:
            continue
        Fz = np.where(mask, F, 0.0)
        for c in find_contours(Fz, 0.0, mask=mask):
            pts = np.column_stack([a1[0] + c[:, 0] * h1, a2[0] + c[:, 1] * h2])
            current, cur_kind = [], None
            for d1, d2 in pts:
                row = evaluate_point(template.with_(delta1=float(d1), delta2=float(d2)))
                res = locus_residual(base, None, row)
                if not (math.isfinite(res) and abs(res) < tol):
                    kind = None
                else:
                    # r1/a1 split about d2x = 0, r2/a2 about d1x = 0
                    other = row["d2x"] if base[1] == "1" else row["d1x"]
                    kind = base + ("+" if other >= 0 else "-")
                if kind != cur_kind and current:
                    out[cur_kind].points.append(np.array(current))
                    current = []
                cur_kind = kind
                if kind is not None:
                    current.append((d1, d2))
            if current and cur_kind is not None:
                out[cur_kind].points.append(np.array(current))
    return [out[k] for k in LOCUS_KINDS]


def _segment_intersection(p1, p2, q1, q2):
    d1 = p2 - p1
    d2 = q2 - q1
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if den == 0:
        return None
    w = q1 - p1
    s = (w[0] * d2[1] - w[1] * d2[0]) / den
    u = (w[0] * d1[1] - w[1] * d1[0]) / den
    if 0 <= s <= 1 and 0 <= u <= 1:
        return p1 + s * d1
    return None


def locus_intersections(a: ResonanceLocus, b: ResonanceLocus) -> list[np.ndarray]:
    hits = []
    for pa in a.points:
        for pb in b.points:
            for i in range(len(pa) - 1):
                for j in range(len(pb) - 1):
                    x = _segment_intersection(pa[i], pa[i + 1], pb[j], pb[j + 1])
                    if x is not None:
                        hits.append(x)
    return hits


# -- one-dimensional scans ----------------------------------------------------------

def phase_sweep(template: ScaledParams, phi_values) -> list[tuple[float, float]]:
    """Gamma at fixed bare detunings while the inter-mode phase varies.

    Failed points (no trapped equilibrium) carry NaN.
    """
    out = []
    for phi in phi_values:
        phi = float(phi)
        if not 0 < phi < math.pi / 2:
            raise InvalidParameterError(f"phase {phi} outside (0, pi/2)")
        r = evaluate_point(template.with_(phase=phi))
        out.append((phi, r["gamma"] if r["stable"] else math.nan))
    return out


POWER_COLUMNS = ("eps2", "gamma_sr_point", "gamma_dr_point", "omegaM_over_kappaA",
                 "gamma_sr_closed", "gamma_dr_closed", "dr_delta1", "dr_delta2")


def power_scan(template: ScaledParams, eps2_values) -> list[dict]:
    """Full-theory gamma at the r2 point and at the refined double resonance."""
    rows = []
    k, R, phi = template.kappaA, template.drive_ratio, template.phase
    for eps2 in eps2_values:
        eps = math.sqrt(float(eps2))
        row = dict.fromkeys(POWER_COLUMNS, math.nan)
        row.update(eps2=float(eps2), gamma_sr_closed=gamma_sr(eps, k, R), gamma_dr_closed=gamma_dr(eps, k, R))
        sr = evaluate_point(sr_detunings(eps, k, R, phi).params())
        if sr["stable"]:
            row["gamma_sr_point"] = sr["gamma"]
        try:
            dr = dr_detunings_numeric(eps, k, R, phi)
        except SelfTrapError:
            dr = None
        if dr is not None:
            row.update(gamma_dr_point=dr.gamma_predicted, omegaM_over_kappaA=dr.omegaM / k,
                       dr_delta1=dr.delta1, dr_delta2=dr.delta2)
        rows.append(row)
    return rows


def loglog_slope(x, y) -> float:
    x = np.asarray(x, float)
    y = np.abs(np.asarray(y, float))
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def write_rows_csv(fh, rows, columns) -> None:
    w = csv.writer(fh)
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])


def dumps_json(obj) -> str:
    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, complex):
            return [o.real, o.imag]
        raise TypeError(type(o))

    def clean(o):
        if isinstance(o, float) and not math.isfinite(o):
            return None
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return o

    return json.dumps(clean(obj), default=default, indent=2)
