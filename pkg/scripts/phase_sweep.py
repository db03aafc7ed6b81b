"""Sensitivity of the strongest cooling to the phase between the two cavity modes."""

import argparse
import math
from pathlib import Path

import numpy as np

from selftrap.params import ScaledParams
from selftrap.sweeps import multi_resonance_minimum, phase_sweep, sweep_map, write_rows_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps2", type=float, default=50.0)
    ap.add_argument("--span", type=float, default=0.3, help="relative half-width of the phase window")
    ap.add_argument("--n", type=int, default=25)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    t = ScaledParams(eps2=args.eps2, delta1=0.0, delta2=0.0)
    m = multi_resonance_minimum(sweep_map(t, (-10, 2), (-10, 2), 100))
    p = t.with_(delta1=m["delta1"], delta2=m["delta2"])
    phis = math.pi / 4 * np.linspace(1 - args.span, 1 + args.span, args.n)
    rows = [dict(phi=phi, phi_rel=phi / (math.pi / 4), gamma=g, ratio=abs(g) / abs(m["gamma"]))
            for phi, g in phase_sweep(p, phis)]

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "phase_sweep.csv", "w", newline="") as fh:
        write_rows_csv(fh, rows, ("phi", "phi_rel", "gamma", "ratio"))
    ratios = np.array([r["ratio"] for r in rows])
    print(f"operating point (delta1, delta2) = ({p.delta1:.4f}, {p.delta2:.4f}), gamma = {m['gamma']:.4f}")
    print(f"|gamma(phi)| / |gamma(pi/4)|: min {ratios.min():.3f}, max {ratios.max():.3f}")


if __name__ == "__main__":
    main()
