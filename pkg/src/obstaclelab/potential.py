"""The kernel G, the generalised Newtonian potential of a paraboloid, and the
paraboloid solution ``u = p + V``.

``V_M(x) = -(1/2pi) * int_M G(x, y) dy`` with
``G(x, y) = log|x - y| - log|y| + x.y / |y|^2``. In complex notation
``G = Re(log(1 - x/y) + x/y)``, which is how the far field is evaluated.

Quadrature layout for ``V_{gamma P}(x)``:

* near field ``0 <= y2 <= Y`` with ``Y = max(2|x|, gamma, near_cell)``: the
  ``y1`` integral across the slice ``|y1| <= sqrt(gamma y2)`` is done in closed
  form, leaving a 1-D integral in ``s = sqrt(y2)``. Its only non-smooth points
  are ``s = 0``, ``s = sqrt(x2)`` (kink) and ``s = |x1|/sqrt(gamma)`` (log-type
  when ``x`` sits on the boundary); Gauss panels are graded geometrically
  toward each of them.
* far field ``Y <= y2 <= R*``: ``y2 = Y / tau^2``, ``y1 = sqrt(gamma y2) v``,
  tensor Gauss in ``(tau, v)``; ``G`` by its power series where ``|x/y|`` is small.
* ``y2 > R*`` is dropped, with ``R*`` chosen so the certified tail bound is at
  most ``abs_tol / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import xlogy

from .errors import DomainError, PreconditionError
from .geometry import Paraboloid, Sampler, split_point, _scalar_or_array

TWO_PI = 2.0 * math.pi
_CHUNK = 256


@dataclass(frozen=True)
class PotentialConfig:
    """Quadrature controls.

    abs_tol: target absolute error of V; fixes the truncation radius and the
        depth of the geometric grading (innermost panel ``sqrt(abs_tol)`` of its half-interval).
    near_cell: minimal height of the near-field slab handled by the
        semi-analytic line rule.
    base_panel: ratio of a graded panel's length to its distance from the
        singular point it is graded toward.
    """

    abs_tol: float = 1e-8
    near_cell: float = 1.0
    base_panel: float = 0.5
    gauss_order: int = 8
    far_tau: int = 24
    far_v: int = 16

    def __post_init__(self):
        if not (0 < self.abs_tol <= 1):
            raise PreconditionError("abs_tol must lie in (0, 1]")
        if not self.near_cell >= 2e-12:
            raise PreconditionError("near_cell too small")
        if not self.base_panel > 0:
            raise PreconditionError("base_panel must be positive")

    def refined(self):
        """Halved base_panel and abs_tol (used by self-consistency checks)."""
        return PotentialConfig(self.abs_tol / 2, self.near_cell, self.base_panel / 2,
                               self.gauss_order, self.far_tau, self.far_v)


DEFAULT_CONFIG = PotentialConfig()


# ---------------------------------------------------------------------------
# kernel

def _check_kernel_args(x1, x2, y1, y2):
    if np.any((y1 == 0) & (y2 == 0)):
        raise DomainError("kernel G is undefined at y = 0")
    if np.any((x1 == y1) & (x2 == y2)):
        raise DomainError("kernel G is undefined at y = x")


def kernel_G(x, y):
    x1, x2 = split_point(x)
    y1, y2 = split_point(y)
    _check_kernel_args(x1, x2, y1, y2)
    ry2 = y1 * y1 + y2 * y2
    g = (0.5 * np.log((x1 - y1) ** 2 + (x2 - y2) ** 2) - 0.5 * np.log(ry2)
         + (x1 * y1 + x2 * y2) / ry2)
    return _scalar_or_array(g)


def grad_kernel_G(x, y):
    """Gradient of G in its first argument, ``(x-y)/|x-y|^2 + y/|y|^2``."""
    x1, x2 = split_point(x)
    y1, y2 = split_point(y)
    _check_kernel_args(x1, x2, y1, y2)
    dx1, dx2 = x1 - y1, x2 - y2
    rd2 = dx1 * dx1 + dx2 * dx2
    ry2 = y1 * y1 + y2 * y2
    return np.stack([dx1 / rd2 + y1 / ry2, dx2 / rd2 + y2 / ry2], axis=-1)


def tail_bound(gamma: float, R: float, xnorm: float) -> float:
    """Upper bound on ``|(1/2pi) int_{gamma P, y2 >= R} G(x, y) dy|`` for ``|x| = xnorm``.

    Uses ``|G(x, y)| <= 6|x|^2/|y|^2`` for ``|y| >= 2|x|`` and
    ``int_R^inf 2 sqrt(gamma t) / t^2 dt = 4 sqrt(gamma/R)``.
    """
    if not R > 0 or R < 2 * xnorm:
        raise PreconditionError("tail_bound needs R > 0 and R >= 2|x|")
    return 6.0 * xnorm ** 2 * 4.0 * math.sqrt(gamma / R) / TWO_PI


def _grad_tail_bound(gamma, R, xnorm):
    # |grad_x G| <= 4|x|/|y|^2 for |y| >= 2|x|
    return 4.0 * xnorm * 4.0 * math.sqrt(gamma / R) / TWO_PI


def truncation_radius(gamma: float, xnorm: float, abs_tol: float) -> float:
    """Smallest R with both the value and gradient tail bounds <= abs_tol / 2."""
    c_val = 6.0 * 4.0 * xnorm ** 2 * math.sqrt(gamma) / TWO_PI
    c_grad = 16.0 * xnorm * math.sqrt(gamma) / TWO_PI
    c = max(c_val, c_grad)
    return (c / (0.5 * abs_tol)) ** 2


# ---------------------------------------------------------------------------
# quadrature building blocks

@lru_cache(maxsize=None)
def _graded_unit_rule(order: int, ratio: float, levels: int):
    """Composite Gauss rule on [0, 1] graded geometrically toward both ends."""
    q = 1.0 / (1.0 + ratio)
    half = 0.5 * q ** np.arange(levels, -1, -1)          # 0.5 q^L ... 0.5
    left = np.concatenate([[0.0], half])
    edges = np.concatenate([left, 1.0 - left[-2::-1]])
    xi, wi = leggauss(order)
    a, b = edges[:-1], edges[1:]
    nodes = (a[:, None] + (b - a)[:, None] * (xi + 1) / 2).ravel()
    weights = ((b - a)[:, None] * wi / 2).ravel()
    return nodes, weights


def _levels(cfg: PotentialConfig) -> int:
    q = 1.0 / (1.0 + cfg.base_panel)
    return int(math.ceil(math.log(math.sqrt(cfg.abs_tol) * 1e-2) / math.log(q)))


def _slab_L(t, a):
    # int_0^t log sqrt(s^2 + a^2) ds + t  (the -t part cancels between terms)
    aa = np.abs(a)
    return 0.5 * xlogy(t, t * t + a * a) + aa * np.arctan2(t, aa)


def _near_integrands(x1, x2, gamma, y2, want_grad):
    """Integrals over ``|y1| <= sqrt(gamma y2)`` of G and grad_x G at height ``y2``."""
    b = np.sqrt(gamma * y2)
    d = x2 - y2
    t2 = b - x1
    t1 = -b - x1
    val = (_slab_L(t2, d) - _slab_L(t1, d) - 2.0 * _slab_L(b, y2)
           + 2.0 * x2 * np.arctan2(b, y2))
    if not want_grad:
        return val, None, None
    dd = d * d
    g1 = -0.5 * (np.log(t2 * t2 + dd) - np.log(t1 * t1 + dd))
    ad = np.abs(d)
    g2 = np.sign(d) * (np.arctan2(t2, ad) - np.arctan2(t1, ad)) + 2.0 * np.arctan2(b, y2)
    return val, g1, g2


def _G_complex(xc, yc):
    """Re(log(1 - xi) + xi), xi = x/y, accurate for small |xi|."""
    xi = xc / yc
    small = np.abs(xi) < 0.05
    xs = np.where(small, xi, 0.0)
    # -sum_{k>=2} xi^k / k, Horner form
    acc = np.zeros_like(xs)
    for k in range(13, 1, -1):
        acc = (acc + 1.0 / k) * xs
    series = -(acc * xs).real
    xl = np.where(small, 0.5, xi)
    direct = (np.log1p(-xl) + xl).real
    return np.where(small, series, direct)


def _potential_block(x1, x2, gamma, cfg, want_grad):
    """V and optionally grad V for 1-D arrays of unshifted points."""
    n = x1.size
    xnorm = np.hypot(x1, x2)
    Y = np.maximum.reduce([2.0 * xnorm, np.full(n, gamma), np.full(n, cfg.near_cell)])
    S = np.sqrt(Y)
    sa = np.sqrt(np.clip(x2, 0.0, None))
    sb = np.abs(x1) / math.sqrt(gamma)
    sa, sb = np.minimum(sa, S), np.minimum(sb, S)
    bps = np.stack([np.zeros(n), np.minimum(sa, sb), np.maximum(sa, sb), S], axis=1)

    un, uw = _graded_unit_rule(cfg.gauss_order, cfg.base_panel, _levels(cfg))
    a = bps[:, :-1, None]
    ln = (bps[:, 1:] - bps[:, :-1])[:, :, None]
    s = (a + ln * un).reshape(n, -1)
    w = (ln * uw).reshape(n, -1)
    y2 = s * s
    jac = 2.0 * s * w
    X1, X2 = x1[:, None], x2[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        hv, hg1, hg2 = _near_integrands(X1, X2, gamma, y2, want_grad)
    live = jac != 0
    total = np.sum(np.where(live, hv * jac, 0.0), axis=1)
    if want_grad:
        gt1 = np.sum(np.where(live, hg1 * jac, 0.0), axis=1)
        gt2 = np.sum(np.where(live, hg2 * jac, 0.0), axis=1)

    # far field
    Rstar = np.array([truncation_radius(gamma, r, cfg.abs_tol) for r in xnorm])
    has_far = Rstar > Y
    if np.any(has_far):
        idx = np.nonzero(has_far)[0]
        tstar = np.sqrt(Y[idx] / Rstar[idx])
        ti, tw = leggauss(cfg.far_tau)
        tau = tstar[:, None] + (1 - tstar)[:, None] * (ti + 1) / 2
        wt = (1 - tstar)[:, None] * tw / 2
        vi, vw = leggauss(cfg.far_v)
        v = np.concatenate([(vi - 1) / 2, (vi + 1) / 2])
        wv = np.concatenate([vw / 2, vw / 2])
        Yi = Y[idx][:, None]
        yy2 = Yi / tau ** 2                                  # (m, nt)
        bb = np.sqrt(gamma * yy2)
        jac_far = (bb * 2.0 * Yi / tau ** 3 * wt)[:, :, None] * wv    # (m, nt, nv)
        yc = bb[:, :, None] * v + 1j * yy2[:, :, None]
        xc = (x1[idx] + 1j * x2[idx])[:, None, None]
        total[idx] += np.sum(_G_complex(xc, yc) * jac_far, axis=(1, 2))
        if want_grad:
            gp = np.conj(-xc / (yc * (yc - xc)))
            gt1[idx] += np.sum(gp.real * jac_far, axis=(1, 2))
            gt2[idx] += np.sum(gp.imag * jac_far, axis=(1, 2))

    V = -total / TWO_PI
    if not want_grad:
        return V, None
    return V, np.stack([-gt1 / TWO_PI, -gt2 / TWO_PI], axis=-1)


def _potential_arrays(P: Paraboloid, x1, x2, cfg, want_grad):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    x1, x2 = np.broadcast_arrays(x1, x2)
    shape = x1.shape
    f1 = (x1 + P.sigma).reshape(-1)
    f2 = x2.reshape(-1)
    V = np.empty(f1.size)
    G = np.empty((f1.size, 2)) if want_grad else None
    for k in range(0, f1.size, _CHUNK):
        sl = slice(k, k + _CHUNK)
        v, g = _potential_block(f1[sl], f2[sl], P.gamma, cfg, want_grad)
        V[sl] = v
        if want_grad:
            G[sl] = g
    V = V.reshape(shape)
    if want_grad:
        return V, G.reshape(shape + (2,))
    return V, None


def potential_paraboloid(P: Paraboloid, x, cfg: PotentialConfig = DEFAULT_CONFIG):
    """``V_{gamma P}`` evaluated at ``x + sigma e1``.

    ``x`` is a Point2, a pair, or an ``(..., 2)`` array.
    """
    V, _ = _potential_arrays(P, *split_point(x), cfg, False)
    return _scalar_or_array(V)


def grad_potential_paraboloid(P: Paraboloid, x, cfg: PotentialConfig = DEFAULT_CONFIG):
    """Gradient of ``V_{gamma P}`` at ``x + sigma e1``; shape ``(..., 2)``."""
    _, G = _potential_arrays(P, *split_point(x), cfg, True)
    return G


def _inside(P, x1, x2):
    s = x1 + P.sigma
    return (x2 >= 0) & (s * s <= P.gamma * x2)


def u_paraboloid(P: Paraboloid, x, cfg: PotentialConfig = DEFAULT_CONFIG):
    """The paraboloid solution ``u(x) = p + V`` at the shifted point, clamped at 0.

    Inside the coincidence set the result is exactly 0.
    """
    x1, x2 = split_point(x)
    x1 = np.asarray(x1, dtype=float)
    V, _ = _potential_arrays(P, x1, x2, cfg, False)
    s = x1 + P.sigma
    u = np.maximum(0.5 * s * s + V, 0.0)
    return _scalar_or_array(np.where(_inside(P, x1, x2), 0.0, u))


class ParaboloidSolution(Sampler):
    """Sampler of ``u_sigma(x) = u_{gamma P}(x1 + sigma, x2)`` with quadrature gradient."""

    def __init__(self, P: Paraboloid, cfg: PotentialConfig = DEFAULT_CONFIG):
        self.P = P
        self.cfg = cfg

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        V, _ = _potential_arrays(self.P, x1, x2, self.cfg, False)
        s = x1 + self.P.sigma
        u = np.maximum(0.5 * s * s + V, 0.0)
        return np.where(_inside(self.P, x1, x2), 0.0, u)

    def grad(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        V, G = _potential_arrays(self.P, x1, x2, self.cfg, True)
        s = x1 + self.P.sigma
        off = ~_inside(self.P, x1, x2) & (0.5 * s * s + V > 0)
        return np.where(off, s + G[..., 0], 0.0), np.where(off, G[..., 1], 0.0)

    def __repr__(self):
        return f"ParaboloidSolution(gamma={self.P.gamma}, sigma={self.P.sigma})"


class ParaboloidDeviation(Sampler):
    """``w = u_{gamma P} - p`` for the unshifted paraboloid solution."""

    def __init__(self, gamma: float = 1.0, cfg: PotentialConfig = DEFAULT_CONFIG):
        self.u = ParaboloidSolution(Paraboloid(gamma, 0.0), cfg)

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        return self.u(x1, x2) - 0.5 * x1 * x1

    def grad(self, x1, x2):
        g1, g2 = self.u.grad(x1, x2)
        return g1 - np.asarray(x1, dtype=float), g2

    def coincidence_density(self):
        """Sampler of ``Laplacian(w) = -chi_{gamma P}``."""
        P = self.u.P
        return _IndicatorSampler(P, -1.0)

    def __repr__(self):
        return f"ParaboloidDeviation(gamma={self.u.P.gamma})"


class _IndicatorSampler(Sampler):
    def __init__(self, P, scale):
        self.P, self.scale = P, scale

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        return np.where(_inside(self.P, x1, np.asarray(x2, dtype=float)), self.scale, 0.0)


def growth_exponent_fit(P: Paraboloid, direction, r_lo: float, r_hi: float, n: int,
                        cfg: PotentialConfig = DEFAULT_CONFIG) -> float:
    """Least-squares slope of ``log|V|`` against ``log r`` along a ray."""
    if not (r_hi > r_lo >= 1):
        raise PreconditionError("need r_hi > r_lo >= 1")
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    r = np.geomspace(r_lo, r_hi, n)
    pts = r[:, None] * e
    if np.any(paraboloid_inside_points(P, pts)):
        raise PreconditionError("ray does not leave the paraboloid on [r_lo, r_hi]")
    V = np.asarray(potential_paraboloid(P, pts, cfg))
    if np.any(np.abs(V) < 1e-14):
        raise DomainError("degenerate ray: |V| vanishes at a sample")
    return float(np.polyfit(np.log(r), np.log(np.abs(V)), 1)[0])


def paraboloid_inside_points(P: Paraboloid, pts):
    pts = np.asarray(pts, dtype=float)
    return _inside(P, pts[..., 0], pts[..., 1])
