"""Cooling rate against drive strength at the single- and double-resonance points.

Writes one CSV row per eps2 and prints the fitted power-law slopes.
"""

import argparse
from pathlib import Path

import numpy as np

from selftrap.params import ScaledParams, eps2_from_power
from selftrap.sweeps import POWER_COLUMNS, loglog_slope, power_scan, write_rows_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps2-min", type=float, default=1.0)
    ap.add_argument("--eps2-max", type=float, default=1000.0)
    ap.add_argument("--n", type=int, default=31)
    ap.add_argument("--R", type=float, default=0.5)
    ap.add_argument("--kappaA", type=float, default=1.0)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    eps2 = np.geomspace(args.eps2_min, args.eps2_max, args.n)
    template = ScaledParams(eps2=1.0, delta1=0.0, delta2=0.0, kappaA=args.kappaA, drive_ratio=args.R)
    rows = power_scan(template, eps2)

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "power_scan.csv", "w", newline="") as fh:
        write_rows_csv(fh, rows, POWER_COLUMNS)

    sel = eps2 >= 10
    eps = np.sqrt(eps2[sel])
    dr = [r["gamma_dr_point"] for r, s in zip(rows, sel) if s]
    sr = [r["gamma_sr_point"] for r, s in zip(rows, sel) if s]
    print(f"slope |gamma| vs eps for eps2 >= 10: DR {loglog_slope(eps, dr):.3f}, SR {loglog_slope(eps, sr):.3f}")
    print(f"DR/SR at eps2 = {eps2[-1]:g}: {rows[-1]['gamma_dr_point'] / rows[-1]['gamma_sr_point']:.1f}")
    e10 = eps2_from_power(10e-3)
    [r10] = power_scan(template, [e10])
    print(f"10 mW -> eps2 = {e10:.1f}, omega_M / kappaA at the double resonance = {r10['omegaM_over_kappaA']:.2f}")


if __name__ == "__main__":
    main()
