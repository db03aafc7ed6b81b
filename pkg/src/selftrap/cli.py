"""Command-line interface.

Exit codes: 0 success, 2 invalid parameters, 3 solver failure, 4 fit rejection.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import sys

import numpy as np

from . import closed_forms as cf
from .equilibrium import solve_equilibrium
from .errors import FitRejectedError, InvalidParameterError, SolverError
from .linear_response import cooling_rate, sideband_splitting
from .params import ScaledParams, load_config
from .quantum_rates import phonon_rates
from .simulator import StepControl, simulate_rate
from .sweeps import (
    POWER_COLUMNS, dumps_json, fmt, phase_sweep, power_scan,
    resonance_loci, sweep_map, write_rows_csv,
)

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_FIT = 0, 2, 3, 4


def _scaled_from_args(args, swept: bool = False) -> ScaledParams:
    """Parameters from --config plus command-line overrides.

    With ``swept`` the detunings default to zero since the command scans them.
    """
    base = None
    if args.config:
        cfg = load_config(args.config)
        if args.scaled and cfg.source != "scaled":
            raise InvalidParameterError("--scaled given but config has no [scaled] section")
        base = cfg.scaled
    overrides = {
        k: getattr(args, k) for k in ("eps2", "delta1", "delta2", "kappaA", "phase")
        if getattr(args, k) is not None
    }
    if args.R is not None:
        overrides["drive_ratio"] = args.R
    if base is None:
        if swept:
            overrides.setdefault("delta1", 0.0)
            overrides.setdefault("delta2", 0.0)
        missing = {"eps2", "delta1", "delta2"} - set(overrides)
        if missing:
            raise InvalidParameterError(
                f"no --config given and missing scaled parameters: {sorted(missing)}"
            )
        return ScaledParams(**overrides)
    return base.with_(**overrides)


def _emit_record(rec: dict, args, out) -> None:
    if args.format == "json":
        out.write(dumps_json(rec) + "\n")
        return
    keys = list(rec)
    write_rows_csv(out, [rec], keys)


def _complex_fields(prefix, z):
    return {f"re_{prefix}": z.real, f"im_{prefix}": z.imag}


def cmd_equilibrium(args, out):
    p = _scaled_from_args(args)
    eq = solve_equilibrium(p, strict=args.strict)
    rec = dict(x0=eq.x0, **_complex_fields("alpha1", eq.alpha1), **_complex_fields("alpha2", eq.alpha2),
               d1x=eq.d1x, d2x=eq.d2x, residual=eq.residual,
               alternatives=";".join(fmt(x) for x in eq.alternatives))
    if args.format == "json":
        rec["alternatives"] = list(eq.alternatives)
    _emit_record(rec, args, out)


def cmd_rates(args, out):
    p = _scaled_from_args(args)
    eq = solve_equilibrium(p)
    rep = cooling_rate(eq, p)
    ph = phonon_rates(eq, p)
    rec = rep.as_dict()
    rec.update(up_coeff=ph.up_coeff, down_coeff=ph.down_coeff, x0=eq.x0, d1x=eq.d1x, d2x=eq.d2x)
    for which in (1, 2):
        s = sideband_splitting(p, eq, which)
        rec[f"y{which}"] = s.y
    _emit_record(rec, args, out)


def cmd_sweep(args, out):
    p = _scaled_from_args(args, swept=True)
    grid = sweep_map(p, args.d1_range, args.d2_range, args.resolution, threads=args.threads, axes=args.axes)
    if args.format == "json":
        out.write(dumps_json(grid.to_json()) + "\n")
    else:
        grid.to_csv(out)


def cmd_loci(args, out):
    p = _scaled_from_args(args, swept=True)
    grid = sweep_map(p, args.d1_range, args.d2_range, args.resolution, threads=args.threads)
    loci = resonance_loci(p, args.d1_range, args.d2_range, grid=grid)
    rows = []
    for L in loci:
        for seg, pts in enumerate(L.points):
            for d1, d2 in pts:
                rows.append(dict(kind=L.kind, segment=seg, delta1=d1, delta2=d2))
    if args.format == "json":
        out.write(dumps_json({L.kind: [q.tolist() for q in L.points] for L in loci}) + "\n")
    else:
        write_rows_csv(out, rows, ("kind", "segment", "delta1", "delta2"))


def cmd_simulate(args, out):
    p = _scaled_from_args(args)
    ctrl = None
    if args.h is not None:
        ctrl = StepControl(h=args.h, stride=args.stride)
    elif args.rtol is not None or args.atol is not None:
        ctrl = StepControl(rtol=args.rtol or 1e-9, atol=args.atol or 1e-12)
    traj, fit, rep = simulate_rate(p, dx=args.dx, ctrl=ctrl, t_end=args.t_end)
    if args.trajectory:
        traj.to_csv(args.trajectory)
    rec = dict(gamma_num=fit.gamma_num, r_squared=fit.r_squared, t_start=fit.window[0],
               t_end=fit.window[1], capped=fit.capped, gamma_linear=rep.gamma, omegaM=rep.omegaM)
    _emit_record(rec, args, out)


def _eps2_values(args):
    if args.eps2_values:
        return args.eps2_values
    lo, hi, n = args.eps2_range
    return list(np.geomspace(lo, hi, int(n)))


def cmd_power_scan(args, out):
    if args.eps2 is None and not args.config:
        args.eps2 = 1.0  # placeholder, replaced by each scanned value
    p = _scaled_from_args(args, swept=True)
    vals = _eps2_values(args)
    if any(v <= 0 for v in vals):
        raise InvalidParameterError("eps2 values must be positive")
    rows = power_scan(p, vals)
    if args.format == "json":
        out.write(dumps_json(rows) + "\n")
    else:
        write_rows_csv(out, rows, POWER_COLUMNS)


def cmd_phase_sweep(args, out):
    p = _scaled_from_args(args)
    lo, hi, n = args.phi_range
    if args.relative:
        lo, hi = lo * p.phase, hi * p.phase
    rows = [dict(phi=phi, gamma=g) for phi, g in phase_sweep(p, np.linspace(lo, hi, int(n)))]
    if args.format == "json":
        out.write(dumps_json(rows) + "\n")
    else:
        write_rows_csv(out, rows, ("phi", "gamma"))


def cmd_find_dr(args, out):
    p = _scaled_from_args(args, swept=True)
    eps, kappaA, R = p.eps, p.kappaA, p.drive_ratio
    if args.kind == "sr":
        pt = cf.sr_detunings(eps, kappaA, R, p.phase)
    elif args.kind == "dr":
        pt = cf.dr_detunings(eps, kappaA, R, p.phase)
    elif args.kind == "symmetric":
        pt = cf.symmetric_dr_detunings(eps, kappaA)
    else:
        pt = cf.dr_detunings_numeric(eps, kappaA, R, p.phase)
    _emit_record(pt.as_dict(), args, out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("parameters")
    g.add_argument("--config", help="INI-style file with a [scaled] or [physical] section")
    g.add_argument("--scaled", action="store_true", help="only accept scaled parameters (no physical conversion)")
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    for name in ("eps2", "delta1", "delta2", "kappaA", "phase"):
        g.add_argument(f"--{name}", type=float, help="scaled override")
    g.add_argument("--R", type=float, help="drive ratio override")

    ap = argparse.ArgumentParser(prog="selftrap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("equilibrium", parents=[common], help="solve the trap position and fields")
    s.add_argument("--strict", action="store_true", help="fail when several equilibria exist")
    s.set_defaults(func=cmd_equilibrium)

    s = sub.add_parser("rates", parents=[common], help="cooling report at one point")
    s.set_defaults(func=cmd_rates)

    for name, func, hlp in (("sweep", cmd_sweep, "detuning map"), ("loci", cmd_loci, "resonance loci")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--d1-range", nargs=2, type=float, default=(-8.0, 2.0), metavar=("LO", "HI"))
        s.add_argument("--d2-range", nargs=2, type=float, default=(-8.0, 2.0), metavar=("LO", "HI"))
        s.add_argument("--resolution", type=int, default=101)
        if name == "sweep":
            s.add_argument("--axes", choices=("raw", "effective"), default="raw")
        s.set_defaults(func=func)

    s = sub.add_parser("simulate", parents=[common], help="nonlinear run and fitted decay rate")
    s.add_argument("--dx", type=float, default=0.01)
    s.add_argument("--t-end", type=float)
    s.add_argument("--h", type=float, help="fixed RK4 step (default: adaptive)")
    s.add_argument("--stride", type=int, default=1)
    s.add_argument("--rtol", type=float)
    s.add_argument("--atol", type=float)
    s.add_argument("--trajectory", help="write the trajectory CSV here")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("power-scan", parents=[common], help="SR vs DR rates against drive")
    s.add_argument("--eps2-values", nargs="+", type=float)
    s.add_argument("--eps2-range", nargs=3, type=float, default=(10.0, 1000.0, 9), metavar=("LO", "HI", "N"))
    s.set_defaults(func=cmd_power_scan)

    s = sub.add_parser("phase-sweep", parents=[common], help="gamma against inter-mode phase")
    s.add_argument("--phi-range", nargs=3, type=float, default=(0.7, 1.3, 13), metavar=("LO", "HI", "N"))
    s.add_argument("--relative", action="store_true", help="range is in units of the config phase")
    s.set_defaults(func=cmd_phase_sweep)

    s = sub.add_parser("find-dr", parents=[common], help="closed-form or refined resonance point")
    s.add_argument("--kind", choices=("sr", "dr", "dr-numeric", "symmetric"), default="dr-numeric")
    s.set_defaults(func=cmd_find_dr)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FitRejectedError as exc:
        print(f"fit rejected: {exc}", file=sys.stderr)
        return EXIT_FIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        with contextlib.suppress(BrokenPipeError):
            sys.stdout.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
