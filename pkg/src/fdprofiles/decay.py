"""Decay-limit extraction from computed solutions.

Two regimes are measured. Under the eternal relation alpha = 2*beta/(1-m) > 0
the quantity q = r*w_r (equal to w_s in the log chart) tends to

    a0 = 2*(n-1)*(n-2-n*m) / ((1-m)*beta),

equivalently |x|^2 v^(1-m) / log|x| -> a0; the approach is slow, so the tail
of w_s is fitted with a + c/s and a is reported. Under the wider condition
2*beta/(1-m) > max(alpha, 0) the quantity q = r^(alpha/beta) * v plateaus at
a positive constant A with no closed form; the plateau is detected through
the relative drift over the final decade, and the tail-decay proxy
r^p0 * q'/q with p0 = 2 - (alpha/2beta)*(1-m) is reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EndpointExponentError, HypothesisViolation
from .integrate import Solution
from .model import Parameters, check_hypotheses

__all__ = [
    "DecayKind",
    "DecayEstimate",
    "expected_log_constant",
    "estimate_log_decay",
    "estimate_power_decay",
    "tail_limit_fit",
]

_LN10 = math.log(10.0)


class DecayKind(Enum):
    LOG_CORRECTED = "log-corrected"
    POWER = "power"


@dataclass(frozen=True)
class DecayEstimate:
    """Estimator trace plus the extrapolated limit and convergence verdict.

    ``scales`` is the log-radius s for the log-corrected kind and the radius
    r for the power kind; ``values`` holds w_s(s) or q(r) respectively.
    NotConverged is soft: converged=False with the full trace retained.
    """

    kind: DecayKind
    scales: np.ndarray
    values: np.ndarray
    raw_last: float
    extrapolated: float
    converged: bool
    expected: float | None = None
    rel_error_vs_expected: float | None = None
    # power kind diagnostics
    drift: float | None = None
    proxy_values: np.ndarray | None = None
    proxy_decreasing: bool | None = None
    direction: str | None = None
    # log kind diagnostics
    fit_slope: float | None = None
    w_over_s_last: float | None = None


def expected_log_constant(p: Parameters) -> float:
    """The closed-form limit 2*(n-1)*(n-2-n*m)/((1-m)*beta).

    At m = (n-2)/(n+2) this reduces to (n-1)*(n-2)/beta identically. The
    range endpoint m = (n-2)/n is refused: the constant degenerates to zero
    there and the decay law changes character.
    """
    if p.at_endpoint:
        raise EndpointExponentError(
            f"m = {p.m} sits at the endpoint (n-2)/n where the log-corrected decay degenerates"
        )
    if not p.beta > 0.0:
        raise HypothesisViolation(f"decay constant needs beta > 0, got {p.beta}")
    return 2.0 * (p.n - 1) * (p.n - 2 - p.n * p.m) / ((1.0 - p.m) * p.beta)


def tail_limit_fit(s: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Least-squares fit values ~ a + c/s; returns (a, c).

    1/s is the generic first correction for the log-chart slope; no rate is
    available analytically, so this is an extrapolation assumption.
    """
    A = np.column_stack([np.ones_like(s), 1.0 / s])
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    return float(coef[0]), float(coef[1])


def _require_strict_interior(p: Parameters) -> None:
    if p.at_endpoint:
        raise EndpointExponentError(
            f"decay estimation refuses the exponent endpoint m = (n-2)/n = {p.m_upper:.16g}"
        )


def estimate_log_decay(
    sol: Solution,
    trace_start: float = 10.0,
    trace_step: float = 5.0,
    converged_rtol: float = 0.02,
) -> DecayEstimate:
    """Extrapolated limit of w_s under the eternal relation.

    The trace samples w_s at s = trace_start, trace_start + trace_step, ...
    up to the chart end; the fit window is the upper half of the chart.
    """
    p = sol.params
    _require_strict_interior(p)
    hyp = check_hypotheses(p)
    if not hyp.log_decay_ok:
        raise HypothesisViolation(
            "log-corrected decay needs the eternal relation alpha = 2*beta/(1-m) > 0; "
            f"got alpha = {p.alpha}, 2*beta/(1-m) = {2.0 * p.beta / (1.0 - p.m):.6g}"
        )
    lp = sol.logprofile
    s_end = lp.s_end
    if s_end < 2.0 * trace_start:
        raise HypothesisViolation(
            f"log chart reaches only s = {s_end:.3g}; need at least {2 * trace_start:.3g}"
        )
    sgrid = np.arange(trace_start, s_end + 1e-9, trace_step)
    if s_end - sgrid[-1] > 1e-9:
        sgrid = np.append(sgrid, s_end)
    vals = lp.eval_ws(sgrid)
    window = sgrid >= 0.5 * s_end - 1e-9
    a_fit, c_fit = tail_limit_fit(sgrid[window], vals[window])
    expected = expected_log_constant(p)
    raw_last = float(vals[-1])
    return DecayEstimate(
        kind=DecayKind.LOG_CORRECTED,
        scales=sgrid,
        values=vals,
        raw_last=raw_last,
        extrapolated=a_fit,
        converged=bool(abs(raw_last - a_fit) < converged_rtol * abs(a_fit)),
        expected=expected,
        rel_error_vs_expected=abs(a_fit - expected) / abs(expected),
        fit_slope=c_fit,
        w_over_s_last=float(lp.eval_w(s_end) / s_end) if s_end > 0 else None,
    )


def estimate_power_decay(sol: Solution, drift_rtol: float = 1e-3) -> DecayEstimate:
    """Plateau of q = r^(alpha/beta) * v at decade radii.

    alpha = 0 short-circuits to A = eta (q is then v itself, a constant).
    Otherwise q and its logarithmic derivative are read from the log chart,
    where the decay residual is held as exact state, and from (v, v') on the
    r-chart below the handoff.
    """
    p = sol.params
    _require_strict_interior(p)
    hyp = check_hypotheses(p)
    if not hyp.power_decay_ok:
        raise HypothesisViolation(
            f"power decay needs 2*beta/(1-m) > max(alpha, 0); got alpha = {p.alpha}, "
            f"2*beta/(1-m) = {2.0 * p.beta / (1.0 - p.m):.6g}"
        )
    if p.alpha == 0.0:
        scales = np.array([1.0])
        values = np.array([p.eta])
        return DecayEstimate(
            kind=DecayKind.POWER,
            scales=scales,
            values=values,
            raw_last=p.eta,
            extrapolated=p.eta,
            converged=True,
            expected=p.eta,
            rel_error_vs_expected=0.0,
            drift=0.0,
            direction="constant",
        )

    a = p.alpha / p.beta
    lp = sol.logprofile
    one_m = 1.0 - p.m
    n_dec = int(math.floor(lp.s_end / _LN10 + 1e-9))
    if n_dec < 3:
        raise HypothesisViolation(
            f"log chart reaches only r = {math.exp(lp.s_end):.3g}; need at least three decades"
        )
    sgrid = np.arange(0, n_dec + 1) * _LN10
    w = lp.eval_w(sgrid)
    g = lp.eval_g(sgrid)
    logq = a * sgrid + (np.log(w) - 2.0 * sgrid) / one_m
    q = np.exp(logq)
    scales = np.exp(sgrid)

    drift = float(abs(q[-1] - q[-2]) / abs(q[-1]))
    extrapolated = float(np.mean(q[-3:]))
    p0 = 2.0 - 0.5 * a * one_m
    # r^p0 * q'/q with q'/q = g / ((1-m)*w*r)
    proxy = np.exp((p0 - 1.0) * sgrid) * g / (one_m * w)
    absP = np.abs(proxy)
    tol_dir = 100.0 * lp.rtol
    diffs = np.diff(q)
    if np.all(diffs >= -tol_dir * np.abs(q[:-1])):
        direction = "nondecreasing"
    elif np.all(diffs <= tol_dir * np.abs(q[:-1])):
        direction = "nonincreasing"
    else:
        direction = "mixed"

    return DecayEstimate(
        kind=DecayKind.POWER,
        scales=scales,
        values=q,
        raw_last=float(q[-1]),
        extrapolated=extrapolated,
        converged=bool(drift < drift_rtol and extrapolated > 0.0),
        drift=drift,
        proxy_values=proxy,
        proxy_decreasing=bool(absP[-3] > absP[-2] > absP[-1]),
        direction=direction,
    )
