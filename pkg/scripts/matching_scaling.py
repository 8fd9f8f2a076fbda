"""Blow-down coefficient against opening: checks alpha_gamma / alpha_1 = sqrt(gamma)."""
import argparse
import math

from obstaclelab.blowdown import alpha_estimate, gamma_match, richardson_limit
from obstaclelab.functionals import FunctionalConfig
from obstaclelab.potential import ParaboloidDeviation


def coefficient(gamma, radii, q):
    w = ParaboloidDeviation(gamma)
    return richardson_limit(radii, [alpha_estimate(w, r, q).alpha for r in radii])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0, 4.0])
    ap.add_argument("--radii", type=float, nargs=3, default=[50.0, 100.0, 200.0])
    args = ap.parse_args()
    q = FunctionalConfig(n_angular=2048, n_radial=2)
    a1 = coefficient(1.0, args.radii, q)
    print(f"{'gamma':>7} {'alpha':>12} {'ratio/sqrt':>11} {'matched':>10}")
    for g in args.gammas:
        a = coefficient(g, args.radii, q)
        print(f"{g:7.3f} {a:12.8f} {a / a1 / math.sqrt(g):11.6f} {gamma_match(a, a1):10.5f}")


if __name__ == "__main__":
    main()
