"""Quadratic expansion of the profile at the coordinate singularity r = 0.

The radial equation degenerates at the origin ((n-1)/r term), so integration
starts from the local expansion v = eta + c2*r^2 + O(r^4) instead. Matching
the O(1) terms of the equation fixes

    c2 = -alpha * eta^(2-m) / (2*n*(n-1)).

Order 2 is enough: the handoff radius can be made small because the
integrator is adaptive and cheap near the origin, and the quality of the
truncation is monitored through the equation residual rather than through
the (algebraically heavy) next coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange
from .model import Parameters

__all__ = ["SeriesExpansion", "expand_at_origin", "eval_series", "series_residual"]

# Never hand off above this radius; all interior bounds are cheapest well
# inside r = 1.
_R_SWITCH_CAP = 0.05


@dataclass(frozen=True)
class SeriesExpansion:
    """v = eta + c2*r^2 on [0, r_switch], with an error estimate at the edge.

    r_switch is infinite when c2 = 0 (the expansion is then the exact
    constant solution). truncation_estimate approximates the error in v at
    r_switch, inferred from the equation residual of the truncated series.
    """

    eta: float
    c2: float
    r_switch: float
    truncation_estimate: float


def expand_at_origin(p: Parameters, r_switch: float | None = None) -> SeriesExpansion:
    """Build the order-2 origin expansion for the profile equation."""
    c2 = -p.alpha * p.eta ** (2.0 - p.m) / (2.0 * p.n * (p.n - 1))
    if r_switch is None:
        if c2 == 0.0:
            r_switch = math.inf
        else:
            r_switch = min(_R_SWITCH_CAP, 1e-4 * max(1.0, abs(c2) ** -0.5))
    se = SeriesExpansion(eta=p.eta, c2=c2, r_switch=float(r_switch), truncation_estimate=0.0)
    if math.isfinite(se.r_switch):
        resid = abs(series_residual(p, se, se.r_switch))
        # Convert the equation residual into a local error scale for v by
        # inverting the dominant (Laplacian) part of the operator.
        est = resid * se.r_switch**2 * p.eta ** (1.0 - p.m) / (2.0 * p.n * (p.n - 1))
        se = SeriesExpansion(eta=se.eta, c2=se.c2, r_switch=se.r_switch, truncation_estimate=est)
    return se


def eval_series(se: SeriesExpansion, r):
    """Evaluate (v, v') of the expansion; valid only for 0 <= r <= r_switch."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > se.r_switch * (1.0 + 1e-12)):
        raise OutOfRange(f"series is valid on [0, {se.r_switch:.6g}], requested r={r}")
    v = se.eta + se.c2 * arr * arr
    dv = 2.0 * se.c2 * arr
    if arr.ndim == 0:
        return float(v), float(dv)
    return v, dv


def series_residual(p: Parameters, se: SeriesExpansion, r: float) -> float:
    """Residual of the radial equation on the truncated series at radius r.

    Vanishes to O(1) by construction of c2, so the result is O(r^2) as r -> 0.
    """
    v = se.eta + se.c2 * r * r
    dv = 2.0 * se.c2 * r
    ddv = 2.0 * se.c2
    m = p.m
    vm1 = v ** (m - 1.0)
    lap_vm = m * vm1 * ddv + m * (m - 1.0) * v ** (m - 2.0) * dv * dv + (p.n - 1) / r * m * vm1 * dv
    return (p.n - 1) / m * lap_vm + p.alpha * v + p.beta * r * dv
