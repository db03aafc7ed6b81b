"""Cooling-rate maps over the two detunings, with resonance loci.

Two maps are produced: unequal drives (R = 0.5) on bare detuning axes, and
equal drives (R = 1) on effective detuning axes with eps2 chosen so that the
symmetric double resonance sits at omega_M = 2.72.
"""

import argparse
import csv
from pathlib import Path

from selftrap import closed_forms as cf
from selftrap.params import ScaledParams
from selftrap.sweeps import multi_resonance_minimum, resonance_loci, sweep_map


def write_loci(path, loci):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("kind", "segment", "delta1", "delta2"))
        for L in loci:
            for s, pts in enumerate(L.points):
                for d1, d2 in pts:
                    w.writerow((L.kind, s, f"{d1:.17g}", f"{d2:.17g}"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps2", type=float, default=50.0, help="drive for the R = 0.5 map")
    ap.add_argument("--resolution", type=int, default=151)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    t = ScaledParams(eps2=args.eps2, delta1=0.0, delta2=0.0, kappaA=1.0, drive_ratio=0.5)
    grid = sweep_map(t, (-10, 2), (-10, 2), args.resolution, threads=args.threads)
    with open(out / "map_unequal.csv", "w", newline="") as fh:
        grid.to_csv(fh)
    write_loci(out / "loci_unequal.csv", resonance_loci(t, (-10, 2), (-10, 2), grid=grid))
    m = multi_resonance_minimum(grid)
    print(f"R = 0.5, eps2 = {args.eps2:g}: double-resonance minimum gamma = {m['gamma']:.4f} "
          f"at (delta1, delta2) = ({m['delta1']:.3f}, {m['delta2']:.3f}); "
          f"global map minimum {grid.gamma[grid.argmin()]:.4f}")

    eps2_sym = cf.symmetric_eps2(2.72, 1.0)
    ts = ScaledParams(eps2=eps2_sym, delta1=0.0, delta2=0.0, kappaA=1.0, drive_ratio=1.0)
    sym = sweep_map(ts, (-4, 1), (-4, 1), args.resolution, threads=args.threads, axes="effective")
    with open(out / "map_equal.csv", "w", newline="") as fh:
        sym.to_csv(fh)
    i, j = sym.argmin()
    print(f"R = 1, eps2 = {eps2_sym:.3f}: minimum gamma = {sym.gamma[i, j]:.4f} at "
          f"d1x = {sym.delta1_axis[i]:.3f}, d2x = {sym.delta2_axis[j]:.3f}")


if __name__ == "__main__":
    main()
