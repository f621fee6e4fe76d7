import dataclasses

import pytest

from fdprofiles import (
    OutOfRange,
    Regime,
    RegimeMismatch,
    SelfSimilarSolution,
    build_selfsimilar,
    pde_residual,
)


@pytest.fixture(scope="module")
def eternal_wide(solved):
    return solved(3, 0.2, 2.5, 1.0, r_max=8.0)


@pytest.fixture(scope="module")
def forward_sol(solved):
    return solved(3, 0.2, 1.25, 1.0, r_max=9.0)


@pytest.fixture(scope="module")
def backward_sol(solved):
    return solved(3, 0.2, 3.75, 1.0, r_max=14.0)


class TestBuild:
    def test_eternal_anchor_at_time_zero(self, eternal_wide):
        ss = build_selfsimilar(eternal_wide, Regime.ETERNAL)
        for r in (0.5, 1.0, 3.0):
            assert ss.value(r, 0.0) == pytest.approx(eternal_wide.v(r), rel=1e-14)

    def test_forward_anchor_at_time_one(self, forward_sol):
        ss = build_selfsimilar(forward_sol, Regime.FORWARD)
        for r in (0.5, 2.0):
            assert ss.value(r, 1.0) == pytest.approx(forward_sol.v(r), rel=1e-14)

    def test_backward_anchor_one_before_horizon(self, backward_sol):
        ss = build_selfsimilar(backward_sol, Regime.BACKWARD, T=2.0)
        for r in (0.5, 2.0):
            assert ss.value(r, 1.0) == pytest.approx(backward_sol.v(r), rel=1e-14)

    def test_regime_mismatch_rejected(self, eternal_wide):
        with pytest.raises(RegimeMismatch):
            build_selfsimilar(eternal_wide, Regime.FORWARD)

    def test_backward_needs_horizon(self, backward_sol):
        with pytest.raises(RegimeMismatch):
            build_selfsimilar(backward_sol, Regime.BACKWARD)

    def test_generic_rejected(self, solved):
        sol = solved(3, 0.2, 0.7, 1.0)
        with pytest.raises(RegimeMismatch):
            build_selfsimilar(sol, Regime.ETERNAL)

    def test_time_domains_enforced(self, forward_sol, backward_sol):
        fwd = build_selfsimilar(forward_sol, Regime.FORWARD)
        with pytest.raises(OutOfRange):
            fwd.value(1.0, 0.0)
        bwd = build_selfsimilar(backward_sol, Regime.BACKWARD, T=2.0)
        with pytest.raises(OutOfRange):
            bwd.value(1.0, 2.0)


class TestResidual:
    def test_constant_solution_is_exact(self, solved):
        sol = solved(3, 0.2, 0.0, 1.0)
        ss = SelfSimilarSolution(
            regime=Regime.ETERNAL, solution=sol, n=3, m=0.2, alpha=0.0, beta=1.0
        )
        stats = pde_residual(ss, radii=(0.5, 1.0, 2.0), times=(-0.2, 0.0, 0.2))
        assert stats.max_rel_residual < 1e-10

    def test_eternal_residual_small_and_second_order(self, eternal_wide):
        ss = build_selfsimilar(eternal_wide, Regime.ETERNAL)
        stats = pde_residual(ss)
        assert stats.max_rel_residual < 1e-5
        assert 1.8 <= stats.order_estimate <= 2.2
        assert stats.chain_rule_max_rel_diff < 1e-5

    def test_forward_residual(self, forward_sol):
        stats = pde_residual(build_selfsimilar(forward_sol, Regime.FORWARD))
        assert stats.max_rel_residual < 1e-5
        assert 1.8 <= stats.order_estimate <= 2.2
        assert stats.chain_rule_max_rel_diff < 1e-5

    def test_backward_residual(self, backward_sol):
        stats = pde_residual(build_selfsimilar(backward_sol, Regime.BACKWARD, T=2.0))
        assert stats.max_rel_residual < 1e-5
        assert 1.8 <= stats.order_estimate <= 2.2
        assert stats.chain_rule_max_rel_diff < 1e-5

    def test_perturbed_exponent_detected(self, eternal_wide):
        ss = build_selfsimilar(eternal_wide, Regime.ETERNAL)
        base = pde_residual(ss).max_rel_residual
        bad = dataclasses.replace(ss, alpha=1.01 * ss.alpha)
        assert pde_residual(bad).max_rel_residual >= 100.0 * base

    def test_out_of_range_stencil_rejected(self, eternal_wide):
        ss = build_selfsimilar(eternal_wide, Regime.ETERNAL)
        with pytest.raises(OutOfRange):
            pde_residual(ss, radii=(1.0, 1e20), times=(0.0,))
