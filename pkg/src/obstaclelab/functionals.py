"""Radial functionals of a sampler: boundary mass, Dirichlet energy, frequency,
doubling, matching, the three-phase ACF product and identity residuals.

Normalisations (plane, so the dimension factors collapse):

* ``H(r) = r^{-1} int_{dB_r} w^2 = int_{dB_1} w(r theta)^2``
* ``D(r) = int_{B_r} |grad w|^2``
* ``phi(r) = D(r) / H(r)``

Area integrals use Gauss-Legendre in the radius times a trapezoid rule in the
angle, shifted by half a step so no node lands on a coordinate axis (where
slit profiles have a one-sided gradient).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DegenerateError, PreconditionError
from .geometry import FunctionSampler, Sampler, circle_rule
from .thin import VhatSampler


@dataclass(frozen=True)
class FunctionalConfig:
    n_angular: int = 1024
    n_radial: int = 256
    gradient_step: float = 1e-6

    def __post_init__(self):
        if self.n_angular < 64:
            raise PreconditionError("n_angular must be at least 64")
        if self.n_radial < 2:
            raise PreconditionError("n_radial must be at least 2")
        if not self.gradient_step > 0:
            raise PreconditionError("gradient_step must be positive")


DEFAULT = FunctionalConfig()


@dataclass(frozen=True)
class RadialProfile:
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.shape != v.shape or r.ndim != 1:
            raise PreconditionError("radii and values must be 1-D of equal length")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise PreconditionError("radii must be positive and strictly increasing")
        if not np.all(np.isfinite(v)):
            raise PreconditionError("profile values must be finite")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)

    def steps(self):
        """Successive differences of the values."""
        return np.diff(self.values)

    def loglog_slope(self) -> float:
        return float(np.polyfit(np.log(self.radii), np.log(np.abs(self.values)), 1)[0])

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("r,value\n")
            for r, v in zip(self.radii, self.values):
                fh.write(f"{r:.17g},{v:.17g}\n")


# ---------------------------------------------------------------------------
# quadrature helpers

def _grad(w: Sampler, x1, x2, cfg: FunctionalConfig):
    # samplers that keep the generic finite-difference gradient use the configured step
    if type(w).grad is Sampler.grad or getattr(w, "_grad", 0) is None:
        e = cfg.gradient_step * np.maximum(1.0, np.hypot(x1, x2))
        return ((w(x1 + e, x2) - w(x1 - e, x2)) / (2 * e),
                (w(x1, x2 + e) - w(x1, x2 - e)) / (2 * e))
    return w.grad(x1, x2)


def area_rule(r0: float, r1: float, n_radial: int, n_angular: int):
    """Nodes ``(x1, x2)`` and weights for the annulus ``r0 <= |x| <= r1``."""
    if not 0 <= r0 < r1:
        raise PreconditionError("annulus needs 0 <= r0 < r1")
    xi, wi = leggauss(n_radial)
    rho = r0 + (r1 - r0) * (xi + 1) / 2
    wr = (r1 - r0) * wi / 2 * rho
    th = 2 * np.pi * (np.arange(n_angular) + 0.5) / n_angular
    x1 = (rho[:, None] * np.cos(th)).ravel()
    x2 = (rho[:, None] * np.sin(th)).ravel()
    w = (wr[:, None] * np.full(n_angular, 2 * np.pi / n_angular)).ravel()
    return x1, x2, w


def _energy_density(w, x1, x2, cfg):
    g1, g2 = _grad(w, x1, x2, cfg)
    return np.asarray(g1) ** 2 + np.asarray(g2) ** 2


def _check_r(r):
    if not r > 0:
        raise PreconditionError("radius must be positive")


# ---------------------------------------------------------------------------
# the functionals

def boundary_L2(w: Sampler, r: float, cfg: FunctionalConfig = DEFAULT) -> float:
    """``H(r) = r^{-1} int_{dB_r} w^2``."""
    _check_r(r)
    c = circle_rule(r, cfg.n_angular)
    return c.integrate(np.asarray(w(c.x1, c.x2)) ** 2) / r


def dirichlet_energy(w: Sampler, r: float, cfg: FunctionalConfig = DEFAULT) -> float:
    """``D(r) = int_{B_r} |grad w|^2`` by polar tensor quadrature."""
    _check_r(r)
    x1, x2, wt = area_rule(0.0, r, cfg.n_radial, cfg.n_angular)
    return float(np.dot(wt, _energy_density(w, x1, x2, cfg)))


def almgren(w: Sampler, r: float, cfg: FunctionalConfig = DEFAULT) -> float:
    """Frequency ``D(r)/H(r)``."""
    H = boundary_L2(w, r, cfg)
    if H <= 0:
        raise DegenerateError(f"boundary mass vanishes at r={r}")
    return dirichlet_energy(w, r, cfg) / H


def _annulus_counts(radii, n_radial):
    edges = np.concatenate([[0.0], radii])
    lens = np.diff(edges)
    return edges, [max(8, int(math.ceil(n_radial * L / radii[-1]))) for L in lens]


def energy_profile(w: Sampler, radii, cfg: FunctionalConfig = DEFAULT) -> RadialProfile:
    """``D`` at every radius, accumulated annulus by annulus.

    The budget ``n_radial`` is shared between annuli in proportion to their
    width (at least 8 Gauss layers each).
    """
    radii = np.asarray(radii, dtype=float)
    edges, counts = _annulus_counts(radii, cfg.n_radial)
    acc, out = 0.0, []
    for r0, r1, n in zip(edges[:-1], edges[1:], counts):
        x1, x2, wt = area_rule(r0, r1, n, cfg.n_angular)
        acc += float(np.dot(wt, _energy_density(w, x1, x2, cfg)))
        out.append(acc)
    return RadialProfile(radii, np.array(out))


def boundary_profile(w: Sampler, radii, cfg: FunctionalConfig = DEFAULT) -> RadialProfile:
    radii = np.asarray(radii, dtype=float)
    return RadialProfile(radii, np.array([boundary_L2(w, r, cfg) for r in radii]))


def almgren_profile(w: Sampler, radii, cfg: FunctionalConfig = DEFAULT) -> RadialProfile:
    D = energy_profile(w, radii, cfg)
    H = boundary_profile(w, radii, cfg)
    if np.any(H.values <= 0):
        raise DegenerateError("boundary mass vanishes on the profile")
    return RadialProfile(D.radii, D.values / H.values)


def doubling_ratio(w: Sampler, r: float, cfg: FunctionalConfig = DEFAULT) -> float:
    """``int_{dB_1} w(2r.)^2 / int_{dB_1} w(r.)^2``."""
    H1 = boundary_L2(w, r, cfg)
    if H1 <= 0:
        raise DegenerateError(f"boundary mass vanishes at r={r}")
    return boundary_L2(w, 2 * r, cfg) / H1


def matching_functional(w: Sampler, r: float, cfg: FunctionalConfig = DEFAULT) -> float:
    """``r^{-3/2} int_{dB_1} vhat(theta) w(r theta)``."""
    _check_r(r)
    c = circle_rule(1.0, cfg.n_angular)
    vh = VhatSampler()(c.x1, c.x2)
    return c.integrate(vh * np.asarray(w(r * c.x1, r * c.x2))) / r ** 1.5


def matching_profile(w: Sampler, radii, cfg: FunctionalConfig = DEFAULT) -> RadialProfile:
    radii = np.asarray(radii, dtype=float)
    return RadialProfile(radii, np.array([matching_functional(w, r, cfg) for r in radii]))


# ---------------------------------------------------------------------------
# three-phase functional

def _acf_from_densities(densities, supports, x1, x2, wt, r, beta):
    masks = [np.asarray(s(x1, x2), dtype=bool) for s in supports]
    overlap = np.sum(masks, axis=0) > 1
    if np.any(overlap):
        raise PreconditionError("supports overlap on quadrature nodes")
    prod = 1.0
    for dens, m in zip(densities, masks):
        prod *= float(np.dot(wt, np.where(m, dens, 0.0)))
    return prod / r ** beta


def acf_modified(v1, v2, v3, supports, r: float, beta: float = 9.0,
                 cfg: FunctionalConfig = DEFAULT) -> float:
    """``r^{-beta} prod_i int_{B_r} |grad v_i|^2`` with each integral restricted to its support."""
    _check_r(r)
    if len(supports) != 3:
        raise PreconditionError("exactly three supports are required")
    x1, x2, wt = area_rule(0.0, r, cfg.n_radial, cfg.n_angular)
    dens = [_energy_density(v, x1, x2, cfg) for v in (v1, v2, v3)]
    return _acf_from_densities(dens, supports, x1, x2, wt, r, beta)


def acf_profile(v1, v2, v3, supports, radii, beta: float = 9.0,
                cfg: FunctionalConfig = DEFAULT) -> RadialProfile:
    radii = np.asarray(radii, dtype=float)
    vals = [acf_modified(v1, v2, v3, supports, r, beta, cfg) for r in radii]
    return RadialProfile(radii, np.array(vals))


class SectorEigenfunction(Sampler):
    """``rho^kappa sin(kappa theta')`` on the sector ``start <= theta < start + width``, zero outside.

    ``kappa = m pi / width`` so the function vanishes on both sector edges.
    """

    def __init__(self, start: float, width: float, m: int = 1):
        if not 0 < width <= 2 * np.pi:
            raise PreconditionError("sector width must lie in (0, 2 pi]")
        self.start, self.width, self.m = float(start), float(width), int(m)
        self.kappa = self.m * np.pi / self.width

    def local_angle(self, x1, x2):
        return np.mod(np.arctan2(x2, x1) - self.start, 2 * np.pi)

    def contains(self, x1, x2):
        return self.local_angle(np.asarray(x1, float), np.asarray(x2, float)) < self.width

    def __call__(self, x1, x2):
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        t = self.local_angle(x1, x2)
        v = np.hypot(x1, x2) ** self.kappa * np.sin(self.kappa * t)
        return np.where(t < self.width, v, 0.0)

    def grad(self, x1, x2):
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        t = self.local_angle(x1, x2)
        rho = np.hypot(x1, x2)
        k = self.kappa
        safe = np.where(rho > 0, rho, 1.0)
        gr = k * safe ** (k - 1) * np.sin(k * t)
        gt = k * safe ** (k - 1) * np.cos(k * t)
        th = np.arctan2(x2, x1)
        g1 = gr * np.cos(th) - gt * np.sin(th)
        g2 = gr * np.sin(th) + gt * np.cos(th)
        inside = (t < self.width) & (rho > 0)
        return np.where(inside, g1, 0.0), np.where(inside, g2, 0.0)


def sector_triple(starts, widths, ms=(1, 1, 1)):
    """Three sector eigenfunctions with their support predicates."""
    fs = [SectorEigenfunction(s, w, m) for s, w, m in zip(starts, widths, ms)]
    return fs, [f.contains for f in fs]


def sliding_phi(u: Sampler, u_sigma: Sampler, regions, r: float,
                cfg: FunctionalConfig = DEFAULT, beta: float = 9.0) -> float:
    """Three-phase functional of ``|u - u_sigma|`` cut into the labelled regions.

    ``regions`` is a RegionDecomposition with exactly three labels; quadrature
    nodes take the label of their nearest grid node.
    """
    _check_r(r)
    if regions.k != 3:
        raise PreconditionError(f"sliding functional needs 3 regions, got {regions.k}")
    x1, x2, wt = area_rule(0.0, r, cfg.n_radial, cfg.n_angular)
    g1u, g2u = _grad(u, x1, x2, cfg)
    g1s, g2s = _grad(u_sigma, x1, x2, cfg)
    dens = (np.asarray(g1u) - g1s) ** 2 + (np.asarray(g2u) - g2s) ** 2
    supports = [regions.predicate(i) for i in (1, 2, 3)]
    return _acf_from_densities([dens] * 3, supports, x1, x2, wt, r, beta)


# ---------------------------------------------------------------------------
# identity residuals and diagnostics

def _area_pairing(w, density, r, cfg):
    x1, x2, wt = area_rule(0.0, r, cfg.n_radial, cfg.n_angular)
    return float(np.dot(wt, np.asarray(w(x1, x2)) * np.asarray(density(x1, x2))))


def _dlogH(w, r, cfg, rel_step=1e-3):
    # central differences at steps d and d/2, combined to cancel the d^2 term
    def central(d):
        Hp, Hm = boundary_L2(w, r + d, cfg), boundary_L2(w, r - d, cfg)
        if Hp <= 0 or Hm <= 0:
            raise DegenerateError(f"boundary mass vanishes near r={r}")
        return (math.log(Hp) - math.log(Hm)) / (2 * d)
    d = r * rel_step
    return (4 * central(d / 2) - central(d)) / 3


def hprime_identity_gap(w: Sampler, laplacian_density: Sampler, r: float,
                        cfg: FunctionalConfig = DEFAULT) -> float:
    """Mismatch in ``(log H)' = (2/r)(phi + int_{B_r} w Lap w / H)``.

    The left side is a central difference with step ``1e-3 r`` (one
    Richardson step); the pairing
    uses ``laplacian_density`` as ``Lap w``.
    """
    H = boundary_L2(w, r, cfg)
    if H <= 0:
        raise DegenerateError(f"boundary mass vanishes at r={r}")
    rhs = 2.0 / r * (dirichlet_energy(w, r, cfg) / H + _area_pairing(w, laplacian_density, r, cfg) / H)
    return abs(_dlogH(w, r, cfg) - rhs)


def frequency_derivative_residual(w: Sampler, coincidence: Sampler, r: float,
                                  cfg: FunctionalConfig = DEFAULT, rel_step: float = 1e-2) -> float:
    """``phi'(r) + (2 / (r H)) int_{B_r} y1^2 chi`` which should be ``>= 0``.

    ``coincidence`` is the indicator of the contact set (1 inside, 0 outside).
    """
    d = r * rel_step
    dphi = (almgren(w, r + d, cfg) - almgren(w, r - d, cfg)) / (2 * d)
    H = boundary_L2(w, r, cfg)
    return dphi + 2.0 / (r * H) * _area_pairing(_X1SQ, coincidence, r, cfg)


_X1SQ = FunctionSampler(lambda x1, x2: x1 * x1, name="x1^2")


def energy_ratio(u1: Sampler, u2: Sampler, r: float, cfg: FunctionalConfig = DEFAULT) -> float:
    """Empirical constant in ``avg_{B_r}|grad d|^2 <= C r^{-2} avg_{B_2r} d^2``, ``d = u1 - u2``."""
    _check_r(r)
    x1, x2, wt = area_rule(0.0, r, cfg.n_radial, cfg.n_angular)
    a1, a2 = _grad(u1, x1, x2, cfg), _grad(u2, x1, x2, cfg)
    grad_avg = np.dot(wt, (a1[0] - a2[0]) ** 2 + (a1[1] - a2[1]) ** 2) / (np.pi * r * r)
    y1, y2, wt2 = area_rule(0.0, 2 * r, cfg.n_radial, cfg.n_angular)
    d = np.asarray(u1(y1, y2)) - np.asarray(u2(y1, y2))
    l2_avg = np.dot(wt2, d * d) / (4 * np.pi * r * r)
    if l2_avg <= 0:
        raise DegenerateError("difference vanishes on B_2r")
    return float(grad_avg * r * r / l2_avg)
