"""Independent reference values used only by the tests.

The unit-width paraboloid solution has an explicit form through the Schwarz
function of the parabola: outside the coincidence set

    u - p = gamma x2 / 2 + sqrt(gamma) Re(zeta^{3/2}) / 12 - gamma^2 / 12,
    zeta = gamma - 4 x2 + 4 i x1   (principal branch),

and ``u - p = -x1^2 / 2`` inside. It was derived by hand and checked against
u >= 0, Lap u = 1 off the set, u = grad u = 0 on its boundary and
u(0) = grad u(0) = 0. The library never uses it.
"""
import math

import numpy as np


def deviation(x1, x2, gamma=1.0):
    """Closed-form ``u_{gamma P} - p``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    z = gamma - 4 * x2 + 4j * x1
    outside = gamma * x2 / 2 + math.sqrt(gamma) * np.real(z ** 1.5) / 12 - gamma * gamma / 12
    inside = (x2 >= 0) & (x1 ** 2 <= gamma * x2)
    return np.where(inside, -0.5 * x1 ** 2, outside)


def solution(x1, x2, gamma=1.0, sigma=0.0):
    s = np.asarray(x1, dtype=float) + sigma
    return np.maximum(0.5 * s * s + deviation(s, x2, gamma), 0.0)


def alpha_exact(gamma=1.0):
    """Blow-down coefficient of the paraboloid solution from the expansion of ``zeta^{3/2}``."""
    return 2.0 / 3.0 * math.sqrt(math.pi * gamma)


def central_gradient(f, x1, x2, step=1e-6):
    return ((f(x1 + step, x2) - f(x1 - step, x2)) / (2 * step),
            (f(x1, x2 + step) - f(x1, x2 - step)) / (2 * step))
