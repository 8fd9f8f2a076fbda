"""Sign regions of u_gamma - u_{gamma', sigma} over a range of shifts.

Prints the number of regions, their sizes and the sign pattern for each
shift, which shows when the difference has three separated phases.
"""
import argparse

import numpy as np

from obstaclelab.blowdown import region_decomposition
from obstaclelab.geometry import Grid2, Paraboloid
from obstaclelab.potential import ParaboloidSolution, PotentialConfig
from obstaclelab.solver import SolverConfig, solve_obstacle


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--gamma-sigma", type=float, default=1.0)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.1, 0.25, 0.5, 1.0])
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--half-width", type=float, default=6.0)
    args = ap.parse_args()
    L = args.half_width
    grid = Grid2.from_spacing(-L, L, -2.0, 2 * L - 2.0, args.h)
    cfg = SolverConfig(omega=1.95, tol=1e-9)
    pc = PotentialConfig(abs_tol=1e-10)
    u, _ = solve_obstacle(grid, ParaboloidSolution(Paraboloid(args.gamma), pc), cfg)
    for s in args.sigmas:
        us, _ = solve_obstacle(grid, ParaboloidSolution(Paraboloid(args.gamma_sigma, s), pc), cfg)
        R = region_decomposition(u, us)
        print(f"sigma = {s:5.2f}  k = {R.k}  sizes = {R.sizes()}  signs = {list(R.signs)}  "
              f"max|diff| = {np.abs(u.array - us.array).max():.3e}")


if __name__ == "__main__":
    main()
