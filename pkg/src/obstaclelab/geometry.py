"""Grids, fields, point samplers, circle quadrature and the model geometry.

Coordinates are ``(x1, x2)``. Everything that evaluates a function of a point
is vectorised: ``x1`` and ``x2`` may be scalars or broadcastable arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError

SPACING_TOL = 1e-12


@dataclass(frozen=True)
class Point2:
    x1: float
    x2: float

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise DomainError(f"non-finite point ({self.x1}, {self.x2})")

    def __iter__(self):
        yield self.x1
        yield self.x2

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x1, self.x2], dtype=dtype or float)


def split_point(x):
    """Return ``(x1, x2)`` arrays from a Point2, a pair, or an ``(..., 2)`` array."""
    if isinstance(x, Point2):
        return np.float64(x.x1), np.float64(x.x2)
    a = np.asarray(x, dtype=float)
    if a.shape[-1] != 2:
        raise DomainError(f"expected trailing dimension 2, got shape {a.shape}")
    return a[..., 0], a[..., 1]


def _scalar_or_array(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class Grid2:
    """Uniform node grid on ``[xmin, xmax] x [ymin, ymax]`` with square cells."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise PreconditionError("a grid needs at least two nodes per axis")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise PreconditionError("grid extents must satisfy max > min")
        hx = (self.xmax - self.xmin) / (self.nx - 1)
        hy = (self.ymax - self.ymin) / (self.ny - 1)
        if abs(hx - hy) > SPACING_TOL * max(1.0, hx):
            raise PreconditionError(f"anisotropic spacing hx={hx!r} hy={hy!r}")

    @classmethod
    def from_spacing(cls, xmin, xmax, ymin, ymax, h):
        """Build a grid of spacing ``h`` whose nodes include the origin axes.

        The extents are snapped outward to multiples of ``h`` so that the lines
        ``{x1 = 0}`` and ``{x2 = 0}`` carry nodes whenever they cross the box.
        """
        if h <= 0:
            raise PreconditionError("spacing must be positive")
        i0, i1 = math.floor(xmin / h + 1e-9), math.ceil(xmax / h - 1e-9)
        j0, j1 = math.floor(ymin / h + 1e-9), math.ceil(ymax / h - 1e-9)
        return cls(i0 * h, i1 * h, j0 * h, j1 * h, i1 - i0 + 1, j1 - j0 + 1)

    @property
    def h(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return self.xmin + self.h * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.ymin + self.h * np.arange(self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def mesh(self):
        """Node coordinate arrays of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y)

    def boundary_mask(self) -> np.ndarray:
        m = np.zeros((self.ny, self.nx), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m

    def contains(self, x1, x2):
        eps = 1e-12 * max(1.0, self.h)
        return ((x1 >= self.xmin - eps) & (x1 <= self.xmax + eps)
                & (x2 >= self.ymin - eps) & (x2 <= self.ymax + eps))

    def coarsen(self):
        """The grid with every other node, or None if the node counts are even."""
        if (self.nx - 1) % 2 or (self.ny - 1) % 2 or min(self.nx, self.ny) < 5:
            return None
        return Grid2(self.xmin, self.xmax, self.ymin, self.ymax,
                     (self.nx - 1) // 2 + 1, (self.ny - 1) // 2 + 1)

    def header(self):
        return (self.nx, self.ny, self.xmin, self.xmax, self.ymin, self.ymax)


@dataclass(frozen=True)
class ScalarField:
    """Nodal values on a Grid2, stored row-major (x fastest) from ``(xmin, ymin)``."""

    grid: Grid2
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float).reshape(-1))
        if v.size != self.grid.size:
            raise PreconditionError(f"expected {self.grid.size} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DomainError("field contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_array(cls, grid: Grid2, arr):
        return cls(grid, np.asarray(arr, dtype=float).reshape(grid.ny, grid.nx))

    @classmethod
    def from_sampler(cls, grid: Grid2, sampler):
        X, Y = grid.mesh()
        return cls.from_array(grid, sampler(X, Y))

    @property
    def array(self) -> np.ndarray:
        """Read-only ``(ny, nx)`` view."""
        return self.values.reshape(self.grid.ny, self.grid.nx)

    def to_csv(self, path):
        g = self.grid
        with open(path, "w", newline="\n") as fh:
            fh.write("nx,ny,xmin,xmax,ymin,ymax\n")
            fh.write(f"{g.nx},{g.ny},{g.xmin:.17g},{g.xmax:.17g},{g.ymin:.17g},{g.ymax:.17g}\n")
            fh.write("".join(f"{v:.17g}\n" for v in self.values))

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            head = fh.readline().strip()
            if head != "nx,ny,xmin,xmax,ymin,ymax":
                raise PreconditionError(f"unexpected header {head!r}")
            nx, ny, xmin, xmax, ymin, ymax = fh.readline().strip().split(",")
            grid = Grid2(float(xmin), float(xmax), float(ymin), float(ymax), int(nx), int(ny))
            values = np.array([float(line) for line in fh if line.strip()])
        return cls(grid, values)


class Sampler:
    """An evaluable scalar function of a point.

    Subclasses implement ``__call__(x1, x2)``; ``grad`` falls back to central
    differences with a step relative to ``max(1, |x|)``.
    """

    step = 1e-6

    def __call__(self, x1, x2):
        raise NotImplementedError

    def grad(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        e = self.step * np.maximum(1.0, np.hypot(x1, x2))
        g1 = (self(x1 + e, x2) - self(x1 - e, x2)) / (2 * e)
        g2 = (self(x1, x2 + e) - self(x1, x2 - e)) / (2 * e)
        return g1, g2

    def at(self, x):
        """Evaluate at a Point2, a pair or an ``(..., 2)`` array."""
        return _scalar_or_array(self(*split_point(x)))


class FunctionSampler(Sampler):
    """Wrap plain vectorised callables ``f(x1, x2)`` and optionally ``grad(x1, x2)``."""

    def __init__(self, f, grad=None, step=None, name=None):
        self._f = f
        self._grad = grad
        if step is not None:
            self.step = step
        self.name = name or getattr(f, "__name__", "sampler")

    def __call__(self, x1, x2):
        return self._f(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))

    def grad(self, x1, x2):
        if self._grad is None:
            return super().grad(x1, x2)
        return self._grad(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))

    def __repr__(self):
        return f"FunctionSampler({self.name})"


class GridSampler(Sampler):
    """Bilinear interpolant of a ScalarField, with its piecewise gradient."""

    def __init__(self, f: ScalarField):
        self.field = f

    def _locate(self, x1, x2):
        g = self.field.grid
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if not np.all(g.contains(x1, x2)):
            raise DomainError("point outside the grid box")
        s = (x1 - g.xmin) / g.h
        t = (x2 - g.ymin) / g.h
        # snap rounding residue so node coordinates reproduce node values exactly
        s = np.where(np.abs(s - np.rint(s)) < 1e-9, np.rint(s), s)
        t = np.where(np.abs(t - np.rint(t)) < 1e-9, np.rint(t), t)
        i = np.clip(np.floor(s).astype(int), 0, g.nx - 2)
        j = np.clip(np.floor(t).astype(int), 0, g.ny - 2)
        return i, j, s - i, t - j

    def __call__(self, x1, x2):
        a = self.field.array
        i, j, s, t = self._locate(x1, x2)
        return ((1 - s) * (1 - t) * a[j, i] + s * (1 - t) * a[j, i + 1]
                + (1 - s) * t * a[j + 1, i] + s * t * a[j + 1, i + 1])

    def grad(self, x1, x2):
        a = self.field.array
        h = self.field.grid.h
        i, j, s, t = self._locate(x1, x2)
        g1 = ((1 - t) * (a[j, i + 1] - a[j, i]) + t * (a[j + 1, i + 1] - a[j + 1, i])) / h
        g2 = ((1 - s) * (a[j + 1, i] - a[j, i]) + s * (a[j + 1, i + 1] - a[j, i + 1])) / h
        return g1, g2


def bilinear_sample(f: ScalarField, x):
    """Bilinear interpolation of ``f`` at ``x``; exact at nodes and on affine data."""
    return GridSampler(f).at(x)


def halfspace_poly(x):
    """The blow-down ``p(x) = x1**2 / 2``."""
    x1, _ = split_point(x)
    return _scalar_or_array(0.5 * x1 * x1)


def halfspace_solution(x1, x2):
    """``(x1)_+**2 / 2``, the half-space solution with coincidence set ``{x1 <= 0}``."""
    x1 = np.asarray(x1, dtype=float)
    return 0.5 * np.maximum(x1, 0.0) ** 2 + 0.0 * np.asarray(x2, dtype=float)


@dataclass(frozen=True)
class Paraboloid:
    """The region ``{(x1 + sigma)**2 <= gamma * x2}``, i.e. ``gamma P`` moved by ``-sigma e1``."""

    gamma: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise PreconditionError("gamma must be positive")


def paraboloid_contains(P: Paraboloid, x):
    x1, x2 = split_point(x)
    inside = (x2 >= 0) & ((x1 + P.sigma) ** 2 <= P.gamma * x2)
    return bool(inside) if np.ndim(inside) == 0 else inside


def distance_to_paraboloid(P: Paraboloid, x1, x2, n_boundary=4001, reach=None):
    """Euclidean distance from points to the closed region, by boundary sampling + projection.

    Points inside get distance 0. The boundary curve ``x2 = (x1 + sigma)**2 / gamma``
    is sampled on ``|x1 + sigma| <= reach`` and refined by a few Newton steps on the
    squared distance.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    g = P.gamma
    s = x1 + P.sigma
    reach = reach or (np.max(np.abs(s)) + np.sqrt(g * max(np.max(np.abs(x2)), 1.0)) + 1.0)
    t = np.linspace(-reach, reach, n_boundary)
    # coarse nearest boundary parameter, chunked to bound memory
    flat_s, flat_y = s.reshape(-1), x2.reshape(-1)
    best = np.empty_like(flat_s)
    for k in range(0, flat_s.size, 2048):
        ds = flat_s[k:k + 2048, None] - t[None, :]
        dy = flat_y[k:k + 2048, None] - t[None, :] ** 2 / g
        best[k:k + 2048] = t[np.argmin(ds * ds + dy * dy, axis=1)]
    for _ in range(8):
        # d/dt of |(s - t, y - t^2/g)|^2 / 2
        f1 = -(flat_s - best) - (flat_y - best ** 2 / g) * (2 * best / g)
        f2 = 1 + (2 * best / g) ** 2 - (flat_y - best ** 2 / g) * (2 / g)
        best = best - f1 / np.where(np.abs(f2) > 1e-12, f2, 1e-12)
    d = np.hypot(flat_s - best, flat_y - best ** 2 / g).reshape(s.shape)
    inside = (x2 >= 0) & (s * s <= g * x2)
    return np.where(inside, 0.0, d)


@dataclass(frozen=True)
class CircleRule:
    r: float
    theta: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``(n, 2)``."""
        return self.r * np.column_stack([np.cos(self.theta), np.sin(self.theta)])

    @property
    def x1(self):
        return self.r * np.cos(self.theta)

    @property
    def x2(self):
        return self.r * np.sin(self.theta)

    def integrate(self, values):
        return float(np.dot(self.weights, values))


def circle_rule(r: float, n: int) -> CircleRule:
    """Trapezoid rule on ``dB_r`` with ``n`` equispaced nodes starting at angle 0."""
    if not r > 0:
        raise PreconditionError("radius must be positive")
    if n < 8:
        raise PreconditionError("circle rule needs at least 8 nodes")
    theta = 2 * np.pi * np.arange(n) / n
    return CircleRule(float(r), theta, np.full(n, 2 * np.pi * r / n))
