import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdprofiles import (
    HypothesisViolation,
    OutOfRange,
    Parameters,
    PositivityLoss,
    SolveConfig,
    expand_at_origin,
    handoff_to_log,
    integrate_log,
    integrate_r,
    solve_profile,
)


def P(alpha, n=3, m=0.2, beta=1.0, eta=1.0):
    return Parameters(n=n, m=m, alpha=alpha, beta=beta, eta=eta)


class TestConstantSolution:
    """alpha = 0 makes v = eta exact; everything must reproduce it."""

    def test_r_chart_constant_to_machine_precision(self):
        p = P(0.0)
        prof = integrate_r(p, expand_at_origin(p), 100.0)
        assert np.all(prof.v == p.eta)
        assert np.all(prof.dv == 0.0)

    def test_log_chart_reproduces_exponential(self):
        p = P(0.0)
        sol = solve_profile(p, SolveConfig(s_end=20.0))
        lp = sol.logprofile
        s = np.linspace(0.0, 20.0, 101)
        exact = p.eta ** (1.0 - p.m) * np.exp(2.0 * s)
        assert np.max(np.abs(lp.eval_w(s) - exact) / exact) < 1e-7
        # the growth-excess component stays pinned at zero up to roundoff
        # accumulation (its source term cancels only in exact arithmetic)
        assert np.max(np.abs(lp.g)) < 1e-8

    def test_solution_dense_eval(self):
        sol = solve_profile(P(0.0))
        rr = np.linspace(0.0, 9.0, 50)
        assert np.max(np.abs(sol.v(rr) - 1.0)) < 1e-13


class TestMonotonicity:
    def test_decreasing_positive_for_positive_alpha(self, eternal_n3):
        prof = eternal_n3.profile
        assert np.all(prof.v > 0.0)
        assert np.all(prof.v <= 1.0)
        assert np.all(prof.dv[prof.r > 0] < 0.0)

    def test_increasing_for_negative_alpha(self, solved):
        sol = solved(3, 0.2, -1.0, 1.0)
        prof = sol.profile
        assert np.all(prof.dv[prof.r > 0] > 0.0)

    def test_growth_bound_for_negative_alpha(self, solved):
        # v(r) <= v(r0) * (r/r0)^(1/|k|) for r >= r0, here |k| = 1
        sol = solved(3, 0.2, -1.0, 1.0)
        v1 = sol.v(1.0)
        rr = np.geomspace(1.0, 9.0, 40)
        assert np.all(sol.v(rr) <= v1 * rr * (1.0 + 1e-9))
        assert np.all(sol.v(rr) >= v1 * (1.0 - 1e-9))


class TestHandoff:
    def test_constant_profile_values(self):
        p = P(0.0)
        prof = integrate_r(p, expand_at_origin(p), 3.0)
        s, w, ws = handoff_to_log(prof, 1.0, p.m)
        assert s == 0.0
        assert w == pytest.approx(1.0, rel=1e-13)  # eta^(1-m) with eta = 1
        assert ws == pytest.approx(2.0, rel=1e-13)

    def test_log_radius_zero_at_unit_handoff(self, eternal_n3):
        s, _, _ = handoff_to_log(eternal_n3.profile, 1.0, 0.2)
        assert s == 0.0

    def test_positive_slope_at_large_handoff(self, eternal_n3):
        _, w, ws = handoff_to_log(eternal_n3.profile, 10.0, 0.2)
        assert w > 0 and ws > 0


class TestOverlap:
    GRID = [
        (3, 0.2, 2.5, 1.0),
        (3, 0.2, 1.25, 1.0),
        (3, 0.2, -1.0, 1.0),
        (4, 1 / 3, 3.0, 1.0),
        (5, 0.5, 4.0, 1.0),
        (5, 3 / 7, 7.0, 2.0),
        (6, 0.4, 0.0, 1.0),
    ]

    @pytest.mark.parametrize("n,m,alpha,beta", GRID)
    def test_charts_agree_on_overlap(self, solved, n, m, alpha, beta):
        sol = solved(n, m, alpha, beta)
        tol = max(sol.config.rtol_r, sol.config.rtol_s)
        assert sol.diagnostics["overlap_error"] < 10.0 * tol

    def test_halving_tolerance_reduces_overlap_error(self):
        p = P(2.5)
        base = solve_profile(p, SolveConfig())
        tight = solve_profile(p, SolveConfig().tightened(0.5))
        assert tight.diagnostics["overlap_error"] < base.diagnostics["overlap_error"]


class TestGuards:
    def test_existence_range_enforced(self):
        with pytest.raises(HypothesisViolation):
            solve_profile(P(6.0))  # bound is beta*(n-2)/m = 5

    def test_override_flag_allows_out_of_range(self):
        sol = solve_profile(P(5.5), SolveConfig(override_hypotheses=True, r_max=2.5, s_end=2.0))
        assert sol.profile.r_end == 2.5

    def test_positivity_loss_on_gross_violation(self):
        # beta < 0 leaves the existence range entirely; the profile dives
        # below the representable floor at a finite radius
        with pytest.raises(PositivityLoss) as exc:
            solve_profile(
                P(3.0, beta=-1.0), SolveConfig(override_hypotheses=True, r_max=120.0, s_end=1.0)
            )
        assert 0.0 < exc.value.location < 120.0

    def test_steep_decay_beyond_existence_bound_stays_positive(self):
        # alpha far above beta*(n-2)/m: the profile plunges but settles on
        # the universal r^(-2/(1-m)) tail instead of vanishing
        sol = solve_profile(P(50.0), SolveConfig(override_hypotheses=True, r_max=50.0, s_end=1.0))
        assert np.all(sol.profile.v > 0.0)
        assert sol.profile.v[-1] < 1e-6

    def test_dense_eval_out_of_range(self, eternal_n3):
        with pytest.raises(OutOfRange):
            eternal_n3.v(10.0 * eternal_n3.r_cover)
        with pytest.raises(OutOfRange):
            eternal_n3.profile.eval(-1.0)


class TestLogChartDirect:
    @settings(max_examples=60)
    @given(
        n=st.integers(3, 8),
        mfrac=st.floats(0.05, 0.99),
        beta=st.floats(0.1, 5.0),
        c=st.floats(0.2, 3.0),
        s=st.floats(-2.0, 2.0),
    )
    def test_exponential_is_exact_orbit_when_alpha_zero(self, n, mfrac, beta, c, s):
        # for alpha = 0 the closed form w = c*e^(2s) satisfies the chart
        # equation identically: the quadratic terms cancel and the linear
        # coefficients sum to 4
        from fdprofiles.integrate import _log_rhs

        m = mfrac * (n - 2) / n
        rhs, sigma, _ = _log_rhs(n, m, 0.0, beta)
        w = c * math.exp(2.0 * s)
        ws = 2.0 * w
        dw, dg = rhs(s, w, ws - sigma * w)
        wss = dg + sigma * dw
        assert dw == pytest.approx(ws, rel=1e-12)
        assert wss == pytest.approx(4.0 * w, rel=1e-12, abs=1e-12 * w)

    def test_supports_m_zero(self):
        lp = integrate_log(3, 0.0, 2.0, 1.0, (0.0, 1.0, 2.5), 5.0)
        assert lp.s_end == 5.0
        assert np.all(lp.w > 0)

    def test_rejects_m_one(self):
        with pytest.raises(ValueError):
            integrate_log(3, 1.0, 2.0, 1.0, (0.0, 1.0, 2.0), 5.0)

    def test_w_recovers_v(self, eternal_n3):
        lp = eternal_n3.logprofile
        s = 3.0
        v_from_log = lp.eval_v(s)
        assert v_from_log == pytest.approx(eternal_n3.v(math.exp(s)), rel=1e-8)


class TestStiffTail:
    """Exponentially growing w switches to the slow-manifold continuation."""

    @pytest.mark.parametrize("alpha", [1.25, 0.5, -1.0])
    def test_full_span_reached(self, solved, alpha):
        sol = solved(3, 0.2, alpha, 1.0)
        lp = sol.logprofile
        assert lp.s_end == pytest.approx(40.0)
        assert lp.qss_switch_s is not None
        assert np.all(np.diff(lp.s) > 0)
        assert np.all(lp.w > 0)

    def test_seam_is_smooth(self, solved):
        sol = solved(3, 0.2, 1.25, 1.0)
        lp = sol.logprofile
        s_star = lp.qss_switch_s
        s = np.linspace(s_star - 0.5, s_star + 0.5, 201)
        lnw = np.log(lp.eval_w(s))
        # second difference of log w stays tiny across the switch
        d2 = np.diff(lnw, 2)
        assert np.max(np.abs(d2)) < 1e-4

    def test_eternal_never_switches(self, eternal_n3):
        assert eternal_n3.logprofile.qss_switch_s is None


@settings(max_examples=10, deadline=None)
@given(
    n=st.integers(3, 6),
    mfrac=st.floats(0.2, 0.95),
    afrac=st.floats(-0.5, 0.99).filter(lambda a: abs(a) > 0.02),
    beta=st.floats(0.5, 2.0),
    eta=st.floats(0.5, 2.0),
)
def test_admissible_solves_are_well_behaved(n, mfrac, afrac, beta, eta):
    m = mfrac * (n - 2) / n
    alpha = afrac * beta * (n - 2) / m  # inside the existence range
    p = Parameters(n=n, m=m, alpha=alpha, beta=beta, eta=eta)
    sol = solve_profile(p, SolveConfig(r_max=5.0, s_end=10.0))
    prof = sol.profile
    assert np.all(prof.v > 0)
    if alpha > 0:
        assert np.all(prof.dv[prof.r > 0] < 0)
    elif alpha < 0:
        assert np.all(prof.dv[prof.r > 0] > 0)
    assert sol.diagnostics["overlap_error"] < 10.0 * max(sol.config.rtol_r, sol.config.rtol_s)
