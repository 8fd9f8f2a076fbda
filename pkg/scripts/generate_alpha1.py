"""Recompute the reference blow-down coefficient of the unit paraboloid.

The matching functional of u - p is evaluated at three radii with the
potential-based sampler and extrapolated to r = infinity in t = r^{-1/2}.
The printed value is what ``obstaclelab.blowdown.ALPHA_1`` stores.
"""
import argparse

from obstaclelab.blowdown import ALPHA_1_PROTOCOL, alpha_estimate, richardson_limit
from obstaclelab.functionals import FunctionalConfig
from obstaclelab.potential import ParaboloidDeviation, PotentialConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--radii", type=float, nargs="+", default=list(ALPHA_1_PROTOCOL["radii"]))
    ap.add_argument("--n-angular", type=int, default=ALPHA_1_PROTOCOL["n_angular"])
    ap.add_argument("--abs-tol", type=float, default=ALPHA_1_PROTOCOL["abs_tol"])
    args = ap.parse_args()
    w = ParaboloidDeviation(1.0, PotentialConfig(abs_tol=args.abs_tol))
    q = FunctionalConfig(n_angular=args.n_angular, n_radial=2)
    alphas = []
    for r in args.radii:
        est = alpha_estimate(w, r, q)
        alphas.append(est.alpha)
        print(f"r = {r:8.1f}  alpha_r = {est.alpha:.12f}  residual = {est.residual:.3e}")
    print(f"ALPHA_1 = {richardson_limit(args.radii, alphas)!r}")


if __name__ == "__main__":
    main()
