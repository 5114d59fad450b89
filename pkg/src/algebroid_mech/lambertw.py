"""Principal-branch Lambert W by Halley iteration.

W(z) solves w e^w = z for z >= -1/e, with W(0) = 0, W(e) = 1.  Halley
steps from a branch-aware initial guess; tolerance 1e-12 on the update,
at most 50 iterations.
"""

from __future__ import annotations

import math

from .errors import DomainError

_INV_E = math.exp(-1.0)
MAX_ITER = 50
TOL = 1e-12


def lambert_w(z: float) -> float:
    z = float(z)
    if math.isnan(z):
        raise DomainError("Lambert W of NaN")
    if z < -_INV_E - 1e-12:
        raise DomainError(f"Lambert W argument {z:g} below -1/e on the principal branch")
    if z == 0.0:
        return 0.0
    # initial guess
    if z < -_INV_E + 0.25:
        # series around the branch point
        p = math.sqrt(max(0.0, 2.0 * (math.e * z + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 * p ** 3 / 72.0
    elif z < math.e:
        w = z / (1.0 + z)
    else:
        lz = math.log(z)
        w = lz - math.log(lz)
    for _ in range(MAX_ITER):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            # at the branch point the series guess is already exact
            if abs(f) < 1e-12:
                break
            w = -1.0 + 1e-7
            continue
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= TOL * (1.0 + abs(w)):
            break
    else:
        raise DomainError(f"Lambert W failed to converge for z={z:g}")
    return w
