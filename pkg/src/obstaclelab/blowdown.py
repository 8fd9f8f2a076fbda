"""Rescalings, the 3/2-blow-down coefficient, the gamma-matching map and the
sign-region decomposition of a difference of two solutions."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DegenerateError, PreconditionError
from .functionals import DEFAULT, FunctionalConfig, boundary_L2, matching_functional
from .geometry import Grid2, Sampler, ScalarField, circle_rule
from .thin import VhatSampler

# Reference coefficient of the unit paraboloid; produced by scripts/generate_alpha1.py
# (matching functional at r = 50, 100, 200, extrapolated in r^{-1/2}).
ALPHA_1 = 1.1817670458375729
ALPHA_1_VERSION = "1"
ALPHA_1_PROTOCOL = {"radii": (50.0, 100.0, 200.0), "n_angular": 2048,
                    "abs_tol": 1e-8, "extrapolation": "quadratic in r^-1/2"}


class RescaleKind(enum.Enum):
    QUADRATIC = "quadratic"      # w(rx) / r^2
    FREQUENCY = "frequency"      # w(rx) / r^{3/2}
    NORMALIZED = "normalized"    # w(rx) / ||w(r.)||_{L2(dB_1)}


class RescaledSampler(Sampler):
    """``x -> factor * w(r x)``."""

    def __init__(self, w: Sampler, r: float, factor: float):
        self.w, self.r, self.factor = w, float(r), float(factor)

    def __call__(self, x1, x2):
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        return self.factor * np.asarray(self.w(self.r * x1, self.r * x2))

    def grad(self, x1, x2):
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        g1, g2 = self.w.grad(self.r * x1, self.r * x2)
        s = self.factor * self.r
        return s * np.asarray(g1), s * np.asarray(g2)

    def __repr__(self):
        return f"RescaledSampler({self.w!r}, r={self.r}, factor={self.factor:.6g})"


def rescale(w: Sampler, r: float, kind, cfg: FunctionalConfig = DEFAULT) -> RescaledSampler:
    if not r > 0:
        raise PreconditionError("radius must be positive")
    kind = RescaleKind(kind)
    if kind is RescaleKind.QUADRATIC:
        return RescaledSampler(w, r, r ** -2)
    if kind is RescaleKind.FREQUENCY:
        return RescaledSampler(w, r, r ** -1.5)
    H = boundary_L2(w, r, cfg)
    if H <= 0:
        raise DegenerateError(f"rescaling has zero boundary norm at r={r}")
    return RescaledSampler(w, r, 1.0 / math.sqrt(H))


@dataclass(frozen=True)
class BlowdownEstimate:
    r: float
    alpha: float
    residual: float                 # ||r^{-3/2} w(r.) - alpha vhat||_{L2(dB_1)}
    normalized_residual: float = float("nan")   # ||w(r.)/||w(r.)|| - vhat||

    def __post_init__(self):
        if self.residual < 0:
            raise PreconditionError("residual must be non-negative")


def _unit_circle_values(w, r, cfg):
    c = circle_rule(1.0, cfg.n_angular)
    return c, np.asarray(w(r * c.x1, r * c.x2), dtype=float), VhatSampler()(c.x1, c.x2)


def alpha_estimate(w: Sampler, r: float, cfg: FunctionalConfig = DEFAULT) -> BlowdownEstimate:
    """Projection of ``r^{-3/2} w(r.)`` on ``vhat`` together with the orthogonal remainder."""
    alpha = matching_functional(w, r, cfg)
    c, vals, vh = _unit_circle_values(w, r, cfg)
    rem = vals / r ** 1.5 - alpha * vh
    return BlowdownEstimate(float(r), alpha, math.sqrt(max(c.integrate(rem * rem), 0.0)))


def gamma_match(alpha_u: float, alpha_1: float = ALPHA_1) -> float:
    """Opening of the paraboloid whose coefficient equals ``alpha_u``."""
    if not (alpha_u > 0 and alpha_1 > 0):
        raise DegenerateError("coefficients must be positive to match an opening")
    return (alpha_u / alpha_1) ** 2


def richardson_limit(radii, values) -> float:
    """Limit of ``values`` in ``t = r^{-1/2}`` from a fit ``a + b t + c t^2``.

    Exactly three radii give the interpolating quadratic; more radii give a
    least-squares fit.
    """
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.size < 3 or r.shape != v.shape:
        raise PreconditionError("need at least three (radius, value) pairs")
    A = np.vander(r ** -0.5, 3, increasing=True)
    coef = np.linalg.lstsq(A, v, rcond=None)[0]
    return float(coef[0])


@dataclass
class BlowdownReport:
    estimates: list
    diverging: bool = False

    def __iter__(self):
        return iter(self.estimates)

    def __len__(self):
        return len(self.estimates)

    def __getitem__(self, i):
        return self.estimates[i]

    @property
    def alphas(self):
        return np.array([e.alpha for e in self.estimates])


def blowdown_report(w: Sampler, r_list, cfg: FunctionalConfig = DEFAULT) -> BlowdownReport:
    """Coefficient estimates over ``r_list``; flags divergence when ``|alpha|`` at
    least doubles between the first and last radius."""
    out = []
    for r in r_list:
        est = alpha_estimate(w, r, cfg)
        c, vals, vh = _unit_circle_values(w, r, cfg)
        norm = math.sqrt(c.integrate(vals * vals))
        nres = float("nan")
        if norm > 0:
            d = vals / norm - vh
            nres = math.sqrt(c.integrate(d * d))
        out.append(BlowdownEstimate(est.r, est.alpha, est.residual, nres))
    a = np.abs([e.alpha for e in out])
    diverging = bool(len(a) > 1 and a[0] > 0 and a[-1] >= 2 * a[0])
    return BlowdownReport(out, diverging)


# ---------------------------------------------------------------------------
# sign regions

@dataclass(frozen=True)
class RegionDecomposition:
    grid: Grid2
    labels: np.ndarray                 # (ny, nx) int, 0 = unlabelled
    k: int
    signs: tuple = field(default=())   # sign of u - u_sigma on each region

    def sizes(self):
        return [int(np.sum(self.labels == i)) for i in range(1, self.k + 1)]

    def predicate(self, label: int):
        """Membership test for region ``label`` via the nearest grid node."""
        g = self.grid

        def inside(x1, x2):
            x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
            i = np.rint((x1 - g.xmin) / g.h).astype(int)
            j = np.rint((x2 - g.ymin) / g.h).astype(int)
            ok = (i >= 0) & (i < g.nx) & (j >= 0) & (j < g.ny)
            out = np.zeros(np.shape(x1), bool)
            out[ok] = self.labels[j[ok], i[ok]] == label
            return out
        return inside

    def to_field(self) -> ScalarField:
        return ScalarField.from_array(self.grid, self.labels.astype(float))


def region_decomposition(u: ScalarField, u_sigma: ScalarField, min_size: int = 8,
                         u_zero_tol: float = 0.5) -> RegionDecomposition:
    """4-connected components of ``{u - u_sigma > band}`` and ``{u - u_sigma < -band}``.

    ``band = u_zero_tol h^2``. Components with fewer than ``min_size`` nodes are
    dropped unless they reach the box edge. Labels are numbered by the smallest
    flat node index in each component.
    """
    if u.grid != u_sigma.grid:
        raise PreconditionError("fields must share a grid")
    if min_size < 1:
        raise PreconditionError("min_size must be >= 1")
    g = u.grid
    d = u.array - u_sigma.array
    band = u_zero_tol * g.h ** 2
    edge = g.boundary_mask()
    comps = []
    for sign, sel in ((1, d > band), (-1, d < -band)):
        lab, n = ndimage.label(sel)
        for i in range(1, n + 1):
            m = lab == i
            if m.sum() >= min_size or np.any(m & edge):
                comps.append((int(np.flatnonzero(m.ravel())[0]), sign, m))
    comps.sort(key=lambda c: c[0])
    labels = np.zeros(d.shape, dtype=int)
    for k, (_, _, m) in enumerate(comps, start=1):
        labels[m] = k
    return RegionDecomposition(g, labels, len(comps), tuple(s for _, s, _ in comps))


def sign_changes_on_circle(diff: Sampler, center, radius: float, n: int = 720,
                           band: float = 0.0) -> int:
    """Number of sign alternations of ``diff`` around a circle, ignoring ``|diff| <= band``."""
    c = circle_rule(radius, n)
    vals = np.asarray(diff(c.x1 + center[0], c.x2 + center[1]), dtype=float)
    s = np.sign(np.where(np.abs(vals) <= band, 0.0, vals))
    s = s[s != 0]
    if s.size == 0:
        return 0
    return int(np.sum(s != np.roll(s, 1)))
