"""Homogeneous thin-obstacle profiles in closed form.

Two slit conventions appear. The homogeneous family is written with the
slit on ``{x1 <= 0, x2 = 0}`` and uses ``zeta = x1 + i|x2|``. The blow-down
profile ``vhat32`` lives on the rotated slit ``{x1 = 0, x2 >= 0}``; the
rotation is ``(x1~, x2~) = (-x2, x1)``, so ``vhat32`` uses ``-x2 + i|x1|``.
Principal branch throughout, so the argument stays in ``[0, pi]``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .geometry import Sampler, split_point, _scalar_or_array

_NORM = 1.0 / math.sqrt(math.pi)


class ThinKind(enum.Enum):
    EVEN_POLYNOMIAL = "even_polynomial_2m"
    RE_HALFINTEGER = "re_halfinteger_2m_minus_half"
    IM_ODD = "im_odd_2m_plus_1"


@dataclass(frozen=True)
class ThinProfile:
    kind: ThinKind
    m: int = 1
    scale: float = 1.0

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", ThinKind(self.kind))
        if int(self.m) != self.m or self.m < 1:
            raise PreconditionError("m must be a positive integer")

    @property
    def kappa(self) -> float:
        """Homogeneity degree."""
        return {ThinKind.EVEN_POLYNOMIAL: 2.0 * self.m,
                ThinKind.RE_HALFINTEGER: 2.0 * self.m - 0.5,
                ThinKind.IM_ODD: 2.0 * self.m + 1.0}[self.kind]


def _cpow(z, k):
    # z**k with 0**k = 0 for k > 0 (numpy gives nan for complex 0 ** fractional)
    out = np.where(z == 0, 0.0 + 0.0j, z) ** k
    return np.where(z == 0, 0.0 + 0.0j, out) if k > 0 else out


def _thin_arrays(p: ThinProfile, x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if p.kind is ThinKind.EVEN_POLYNOMIAL:
        return p.scale * _cpow(x1 + 1j * x2, 2 * p.m).real
    z = x1 + 1j * np.abs(x2)
    zk = _cpow(z, p.kappa)
    if p.kind is ThinKind.IM_ODD:
        return p.scale * zk.imag
    # exact zero on the slit instead of a rounding residue
    return np.where((x2 == 0) & (x1 < 0), 0.0, p.scale * zk.real)


def thin_homogeneous(p: ThinProfile, x):
    return _scalar_or_array(_thin_arrays(p, *split_point(x)))


def _thin_grad(p: ThinProfile, x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    k = p.kappa
    if p.kind is ThinKind.EVEN_POLYNOMIAL:
        d = k * _cpow(x1 + 1j * x2, k - 1)
        return p.scale * d.real, -p.scale * d.imag
    d = k * _cpow(x1 + 1j * np.abs(x2), k - 1)
    sg = np.sign(x2)
    if p.kind is ThinKind.RE_HALFINTEGER:
        return p.scale * d.real, -p.scale * d.imag * sg
    return p.scale * d.imag, p.scale * d.real * sg


class ThinSampler(Sampler):
    def __init__(self, profile: ThinProfile):
        self.profile = profile

    def __call__(self, x1, x2):
        return _thin_arrays(self.profile, x1, x2)

    def grad(self, x1, x2):
        return _thin_grad(self.profile, x1, x2)

    def __repr__(self):
        return f"ThinSampler({self.profile})"


def _vhat_arrays(x1, x2):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    v = _NORM * _cpow(-x2 + 1j * np.abs(x1), 1.5).real
    return np.where(_on_slit(x1, x2), 0.0, v)


def _on_slit(x1, x2):
    return (x1 == 0) & (x2 >= 0)


def vhat32(x):
    """Unit-norm 3/2-homogeneous profile vanishing on ``{x1 = 0, x2 >= 0}``."""
    return _scalar_or_array(_vhat_arrays(*split_point(x)))


def _vhat_grad_arrays(x1, x2, check=True):
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if check and np.any(_on_slit(x1, x2)):
        raise DomainError("vhat32 is not differentiable on the slit")
    h = 1.5 * _NORM * _cpow(-x2 + 1j * np.abs(x1), 0.5)
    return -h.imag * np.sign(x1), -h.real


def vhat32_grad(x):
    g1, g2 = _vhat_grad_arrays(*split_point(x))
    return np.stack([g1, g2], axis=-1)


class VhatSampler(Sampler):
    """``scale * vhat32``; the gradient returns 0 on the slit (a null set for quadrature)."""

    def __init__(self, scale: float = 1.0):
        self.scale = scale

    def __call__(self, x1, x2):
        return self.scale * _vhat_arrays(x1, x2)

    def grad(self, x1, x2):
        g1, g2 = _vhat_grad_arrays(x1, x2, check=False)
        slit = _on_slit(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        return (np.where(slit, 0.0, self.scale * g1),
                np.where(slit, 0.0, self.scale * g2))

    def __repr__(self):
        return f"VhatSampler(scale={self.scale})"
