"""Projected SOR for the discrete obstacle problem on a box.

Interior nodes satisfy the complementarity system
``u >= 0, L u <= 1, u (1 - L u) = 0`` with ``L`` the 5-point Laplacian;
boundary nodes carry Dirichlet data. Sweeps are red-black, so one sweep is two
vectorised half-updates and the result is independent of traversal order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import NonConvergenceError, PreconditionError
from .geometry import Grid2, Paraboloid, ScalarField, distance_to_paraboloid

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    omega: float = 1.8
    tol: float = 1e-9
    max_iter: int = 200_000
    u_zero_tol: float = 0.5
    check_every: int = 20
    nested: bool = True

    def __post_init__(self):
        if not 0 < self.omega < 2:
            raise PreconditionError("omega must lie in (0, 2)")
        if not self.tol > 0:
            raise PreconditionError("tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise PreconditionError("max_iter must be a positive integer")
        if not self.u_zero_tol > 0:
            raise PreconditionError("u_zero_tol must be positive")
        if self.check_every < 1:
            raise PreconditionError("check_every must be >= 1")


@dataclass(frozen=True)
class CoincidenceMask:
    grid: Grid2
    flags: np.ndarray                      # (ny, nx) bool
    violations: tuple = ()                 # rows whose flagged nodes are not contiguous

    @property
    def convex_slices(self) -> bool:
        return not self.violations

    def points(self):
        """Coordinates of flagged nodes, shape (k, 2)."""
        X, Y = self.grid.mesh()
        return np.column_stack([X[self.flags], Y[self.flags]])

    def to_field(self) -> ScalarField:
        return ScalarField.from_array(self.grid, self.flags.astype(float))


@dataclass
class SolverReport:
    iterations: int
    residual: float
    mask: CoincidenceMask
    hessian_bound: float
    converged: bool = True
    history: list = field(default_factory=list)    # (sweep, residual) at checkpoints

    def residual_increases(self, start: int = 1) -> int:
        """Checkpoints (after the first ``start``) where the residual went up."""
        r = [v for _, v in self.history[start:]]
        return int(sum(b > a for a, b in zip(r, r[1:])))

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "hessian_bound": self.hessian_bound,
            "converged": self.converged,
            "mask_nodes": int(self.mask.flags.sum()),
            "convexity_violations": list(self.mask.violations),
        }


def _red_black(ny, nx):
    J, I = np.indices((ny, nx))
    red = ((I + J) % 2 == 0)
    inner = np.zeros((ny, nx), bool)
    inner[1:-1, 1:-1] = True
    return red & inner, ~red & inner


def laplacian(a: np.ndarray, h: float) -> np.ndarray:
    """5-point Laplacian on interior nodes, shape ``(ny-2, nx-2)``."""
    return (a[1:-1, 2:] + a[1:-1, :-2] + a[2:, 1:-1] + a[:-2, 1:-1] - 4 * a[1:-1, 1:-1]) / (h * h)


def complementarity_residual(a: np.ndarray, h: float) -> float:
    """``max |min(4u/h^2, 1 - L u)|`` over interior nodes."""
    F = 1.0 - laplacian(a, h)
    return float(np.max(np.abs(np.minimum(4.0 * a[1:-1, 1:-1] / (h * h), F))))


def _sor(a, h, omega, tol, max_iter, check_every):
    ny, nx = a.shape
    red, black = _red_black(ny, nx)
    hq = 0.25 * h * h
    history = []
    res = complementarity_residual(a, h)
    history.append((0, res))
    it = 0
    while res > tol and it < max_iter:
        for _ in range(min(check_every, max_iter - it)):
            for colour in (red, black):
                avg = np.zeros_like(a)
                avg[1:-1, 1:-1] = 0.25 * (a[1:-1, 2:] + a[1:-1, :-2] + a[2:, 1:-1] + a[:-2, 1:-1])
                new = np.maximum(0.0, (1 - omega) * a + omega * (avg - hq))
                a[colour] = new[colour]
            it += 1
        res = complementarity_residual(a, h)
        history.append((it, res))
    return it, res, history


def _prolong(c: np.ndarray, shape) -> np.ndarray:
    f = np.empty(shape)
    f[::2, ::2] = c
    f[1::2, ::2] = 0.5 * (c[:-1] + c[1:])
    f[::2, 1::2] = 0.5 * (c[:, :-1] + c[:, 1:])
    f[1::2, 1::2] = 0.25 * (c[:-1, :-1] + c[1:, :-1] + c[:-1, 1:] + c[1:, 1:])
    return f


def _initial_guess(grid: Grid2, bnd: np.ndarray, cfg: SolverConfig):
    """Coarse-grid solution prolonged to this grid, or the boundary mean."""
    coarse = grid.coarsen() if cfg.nested else None
    if coarse is None:
        a = np.full(bnd.shape, max(float(np.mean(bnd[grid.boundary_mask()])), 0.0))
    else:
        cb = bnd[::2, ::2].copy()
        ca = _initial_guess(coarse, cb, cfg)
        _sor(ca, coarse.h, cfg.omega, cfg.tol, cfg.max_iter, cfg.check_every)
        a = np.maximum(_prolong(ca, bnd.shape), 0.0)
    edge = grid.boundary_mask()
    a[edge] = bnd[edge]
    return a


def sample_boundary(grid: Grid2, boundary) -> np.ndarray:
    """Boundary sampler evaluated on the box edge; interior entries are 0."""
    X, Y = grid.mesh()
    edge = grid.boundary_mask()
    out = np.zeros(X.shape)
    out[edge] = np.asarray(boundary(X[edge], Y[edge]), dtype=float)
    if not np.all(np.isfinite(out)):
        raise PreconditionError("boundary data is not finite")
    if np.any(out < 0):
        raise PreconditionError("boundary data must be non-negative")
    return out


def solve_obstacle(grid: Grid2, boundary, cfg: SolverConfig = SolverConfig()):
    """Solve on ``grid`` with Dirichlet data from ``boundary(x1, x2)``.

    Returns ``(ScalarField, SolverReport)``; raises NonConvergenceError if the
    residual is still above ``cfg.tol`` after ``cfg.max_iter`` sweeps.
    """
    bnd = sample_boundary(grid, boundary)
    a = _initial_guess(grid, bnd, cfg)
    it, res, hist = _sor(a, grid.h, cfg.omega, cfg.tol, cfg.max_iter, cfg.check_every)
    log.debug("projected SOR: %d sweeps, residual %.3e", it, res)
    if res > cfg.tol:
        raise NonConvergenceError(
            f"projected SOR stopped at residual {res:.3e} after {it} sweeps",
            residual=res, iterations=it)
    u = ScalarField.from_array(grid, a)
    mask = extract_mask(u, cfg)
    report = SolverReport(iterations=it, residual=res, mask=mask,
                          hessian_bound=hessian_bound(u), history=hist)
    return u, report


def extract_mask(u: ScalarField, cfg: SolverConfig = SolverConfig()) -> CoincidenceMask:
    """Flag nodes below ``u_zero_tol h^2``; rows with gaps are reported.

    Ties go to the free side (relative margin 1e-9): with the default 0.5 the
    first free column of a half-space solution sits exactly at ``h^2/2``.
    """
    a = u.array
    flags = a < cfg.u_zero_tol * u.grid.h ** 2 * (1 - 1e-9)
    bad = []
    for j, row in enumerate(flags):
        idx = np.flatnonzero(row)
        if idx.size and idx[-1] - idx[0] + 1 != idx.size:
            bad.append(j)
    if bad:
        log.warning("coincidence mask is not slice-convex in %d rows", len(bad))
    return CoincidenceMask(u.grid, flags, tuple(bad))


def hessian_bound(u: ScalarField) -> float:
    """Largest magnitude among the discrete second differences of ``u``."""
    a, h = u.array, u.grid.h
    uxx = (a[1:-1, 2:] - 2 * a[1:-1, 1:-1] + a[1:-1, :-2]) / h ** 2
    uyy = (a[2:, 1:-1] - 2 * a[1:-1, 1:-1] + a[:-2, 1:-1]) / h ** 2
    uxy = (a[2:, 2:] - a[2:, :-2] - a[:-2, 2:] + a[:-2, :-2]) / (4 * h ** 2)
    return float(max(np.abs(uxx).max(), np.abs(uyy).max(), np.abs(uxy).max()))


def coincidence_growth_check(mask: CoincidenceMask, delta: float, r2: float) -> bool:
    """Every flagged node with ``y2 >= r2`` obeys ``y1^2 <= y2^(1+delta)``."""
    if not 0 < delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    pts = mask.points()
    sel = pts[pts[:, 1] >= r2]
    return bool(np.all(sel[:, 0] ** 2 <= sel[:, 1] ** (1 + delta)))


def hausdorff_to_paraboloid(mask: CoincidenceMask, P: Paraboloid, n_boundary: int = 20001) -> float:
    """Hausdorff distance between flagged nodes and ``P`` intersected with the box.

    ``P`` inside the box is represented by its nodes plus a dense sample of the
    boundary curve, which keeps the continuum side accurate to well below ``h``.
    """
    g = mask.grid
    pts = mask.points()
    X, Y = g.mesh()
    s = X + P.sigma
    inside = (Y >= 0) & (s * s <= P.gamma * Y)
    t = np.linspace(g.xmin + P.sigma, g.xmax + P.sigma, n_boundary)
    curve = np.column_stack([t - P.sigma, t * t / P.gamma])
    curve = curve[(curve[:, 1] >= g.ymin) & (curve[:, 1] <= g.ymax)]
    ref = np.vstack([np.column_stack([X[inside], Y[inside]]), curve])
    if pts.size == 0 or ref.size == 0:
        return 0.0 if pts.size == ref.size else float("inf")
    d_ref = cKDTree(pts).query(ref)[0].max()
    d_pts = np.max(distance_to_paraboloid(P, pts[:, 0], pts[:, 1]))
    return float(max(d_ref, d_pts))
