"""Frequency, boundary mass and matching profiles of u - p for one opening.

Writes ``profiles.csv`` with one row per radius.
"""
import argparse
import csv

import numpy as np

from obstaclelab.functionals import (FunctionalConfig, almgren_profile, boundary_profile,
                                     matching_profile)
from obstaclelab.potential import ParaboloidDeviation


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--r-max", type=float, default=40.0)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--n-angular", type=int, default=512)
    ap.add_argument("--out", default="profiles.csv")
    args = ap.parse_args()
    w = ParaboloidDeviation(args.gamma)
    q = FunctionalConfig(n_angular=args.n_angular, n_radial=64)
    radii = np.geomspace(1.0, args.r_max, args.n)
    phi = almgren_profile(w, radii, q).values
    H = boundary_profile(w, radii, q).values
    m = matching_profile(w, radii, q).values
    with open(args.out, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["r", "phi", "H", "matching"])
        for row in zip(radii, phi, H, m):
            out.writerow([f"{v:.17g}" for v in row])
    for r, a, b in zip(radii, phi, m):
        print(f"r = {r:7.2f}  phi = {a:.5f}  matching = {b:.5f}")


if __name__ == "__main__":
    main()
