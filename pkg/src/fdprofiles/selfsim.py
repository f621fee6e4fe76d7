"""Self-similar solutions assembled from a profile, and their PDE residual.

A radial profile v generates a space-time solution of u_t = (n-1)/m * Delta u^m
in one of three forms, each valid only under its exponent relation:

    forward    u(x,t) = t^(-alpha)   * v(|x| t^(-beta)),     t > 0
    backward   u(x,t) = (T-t)^alpha  * v(|x| (T-t)^beta),    t < T
    eternal    u(x,t) = e^(-alpha t) * v(|x| e^(-beta t)),   all t

The verifier differences u and u^m on an (r, t) grid with second-order
central stencils and reports the worst relative residual of the diffusion
equation, the empirical order under step halving, and the gap between the
finite-difference time derivative and the closed-form one from (v, v').
Perturbing alpha off its relation must blow the residual up; that test is
what ties the profile to the PDE rather than to itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OutOfRange, RegimeMismatch
from .integrate import Solution
from .model import Regime, classify_regime

__all__ = ["SelfSimilarSolution", "ResidualStats", "build_selfsimilar", "pde_residual"]


@dataclass(frozen=True)
class SelfSimilarSolution:
    """Evaluable self-similar solution (|x|, t) -> u built on a Solution.

    The exponents are stored separately from the underlying solution so a
    deliberately inconsistent prefactor can be constructed for sensitivity
    tests; ``build_selfsimilar`` is the validated entry point.
    """

    regime: Regime
    solution: Solution
    n: int
    m: float
    alpha: float
    beta: float
    T: float | None = None

    def _scales(self, t: float) -> tuple[float, float]:
        """(prefactor, argument scale) at time t."""
        if self.regime is Regime.FORWARD:
            if t <= 0.0:
                raise OutOfRange(f"forward self-similar solutions live on t > 0, got t = {t}")
            return t**-self.alpha, t**-self.beta
        if self.regime is Regime.BACKWARD:
            if t >= self.T:
                raise OutOfRange(f"backward self-similar solutions live on t < T = {self.T}, got t = {t}")
            tt = self.T - t
            return tt**self.alpha, tt**self.beta
        return math.exp(-self.alpha * t), math.exp(-self.beta * t)

    def value(self, x_abs: float, t: float) -> float:
        pref, scale = self._scales(t)
        return pref * self.solution.v(x_abs * scale)

    def time_derivative_chain(self, x_abs: float, t: float) -> float:
        """du/dt in closed form from (v, v') via the chain rule."""
        pref, scale = self._scales(t)
        arg = x_abs * scale
        v = self.solution.v(arg)
        dv = self.solution.dv(arg)
        core = self.alpha * v + self.beta * arg * dv
        if self.regime is Regime.FORWARD:
            return -pref / t * core
        if self.regime is Regime.BACKWARD:
            return -pref / (self.T - t) * core
        return -pref * core


def build_selfsimilar(
    sol: Solution,
    regime: Regime,
    T: float | None = None,
    tol: float = 1e-9,
) -> SelfSimilarSolution:
    """Validated constructor: the regime must match the parameters' relation."""
    actual = classify_regime(sol.params, tol)
    if regime is Regime.GENERIC or actual is not regime:
        raise RegimeMismatch(
            f"parameters classify as {actual.value}; cannot build a {regime.value} self-similar solution"
        )
    if regime is Regime.BACKWARD:
        if T is None or not T > 0.0:
            raise RegimeMismatch("backward self-similar solutions need a horizon T > 0")
    else:
        T = None
    p = sol.params
    return SelfSimilarSolution(
        regime=regime, solution=sol, n=p.n, m=p.m, alpha=p.alpha, beta=p.beta, T=T
    )


@dataclass(frozen=True)
class ResidualStats:
    """Finite-difference residual summary over the (r, t) grid."""

    max_rel_residual: float
    max_rel_residual_half: float
    order_estimate: float
    chain_rule_max_rel_diff: float
    h: float
    dt: float
    n_points: int


def _max_residual(ss: SelfSimilarSolution, radii, times, h, dt, eps_scale):
    coef = (ss.n - 1) / ss.m
    worst = 0.0
    chain_worst = 0.0
    for t in times:
        for r in radii:
            u_t = (ss.value(r, t + dt) - ss.value(r, t - dt)) / (2.0 * dt)
            f0 = ss.value(r, t) ** ss.m
            fp = ss.value(r + h, t) ** ss.m
            fm = ss.value(r - h, t) ** ss.m
            lap = (fp - 2.0 * f0 + fm) / (h * h) + (ss.n - 1) / r * (fp - fm) / (2.0 * h)
            rhs = coef * lap
            resid = abs(u_t - rhs) / (abs(u_t) + abs(rhs) + eps_scale)
            worst = max(worst, resid)
            chain = ss.time_derivative_chain(r, t)
            chain_worst = max(
                chain_worst, abs(u_t - chain) / (abs(u_t) + abs(chain) + eps_scale)
            )
    return worst, chain_worst


def pde_residual(
    ss: SelfSimilarSolution,
    radii=(0.5, 1.0, 2.0, 5.0),
    times=None,
    h: float = 1e-3,
    dt: float | None = None,
) -> ResidualStats:
    """Residual of the diffusion equation on the (radii x times) grid.

    Residuals are computed at (h, dt) and (h/2, dt/2); the empirical order
    is log2 of their ratio and sits near 2 for smooth regions. The relative
    normalization carries a small absolute floor so the check stays finite
    where both sides vanish.
    """
    if dt is None:
        dt = h
    if ss.regime is Regime.FORWARD and times is None:
        times = (0.8, 1.0, 1.25)
    elif ss.regime is Regime.BACKWARD and times is None:
        span = ss.T
        times = (0.25 * span, 0.5 * span, 0.7 * span)
    elif times is None:
        times = (-0.2, 0.0, 0.2)

    # fail fast if any stencil point leaves the covered range
    r_need = 0.0
    for t in times:
        _, scale = ss._scales(t)
        r_need = max(r_need, (max(radii) + 2.0 * h) * scale)
    if r_need > ss.solution.r_cover:
        raise OutOfRange(
            f"stencil reaches r = {r_need:.4g} which exceeds the covered range {ss.solution.r_cover:.4g}"
        )

    eps_scale = 1e-12 * ss.solution.params.eta
    full, chain = _max_residual(ss, radii, times, h, dt, eps_scale)
    half, _ = _max_residual(ss, radii, times, 0.5 * h, 0.5 * dt, eps_scale)
    order = math.log2(full / half) if half > 0.0 else math.inf
    return ResidualStats(
        max_rel_residual=full,
        max_rel_residual_half=half,
        order_estimate=order,
        chain_rule_max_rel_diff=chain,
        h=h,
        dt=dt,
        n_points=len(radii) * len(times),
    )
