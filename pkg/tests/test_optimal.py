import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sta_crane.model import CraneParams, LoadState, ProtocolKind, TransportTask, integrate
from sta_crane.optimal import (
    DegenerateDurationError, constants_from_boundary_conditions, costates,
    minimal_consumption_bound, optimal_protocol, short_time_asymptote, simple_lower_bound,
    verify_pmp, _resonance_denominator,
)
from sta_crane.sta import sta_protocol

W = 1.4


def x_op_reference(t, d, t_f, w):
    """Optimal trolley displacement typed in directly from its closed form."""
    cb, sb = math.cos(w * t_f), math.sin(w * t_f)
    num = d * (-2 + w**2 * t_f * t + 2 * math.cos(w * t) - 2 * math.cos(w * (t - t_f)) + 2 * cb + w * t * sb)
    return num / (-4 + t_f**2 * w**2 + 4 * cb + w * t_f * sb)


def bound_reference(gamma, d, t_f, w):
    return gamma * d**2 / (t_f + 4 * (-1 + math.cos(w * t_f)) / (w * (w * t_f + math.sin(w * t_f))))


@pytest.fixture
def params():
    return CraneParams(m=10.0, M=10.0, l=5.0, gamma=15.0)


@pytest.fixture
def task():
    return TransportTask(10.0, 7.0)


class TestCostates:
    def test_initial(self):
        assert costates(0.3, -0.7, W, 0.0) == (pytest.approx(0.3), pytest.approx(-0.7))

    def test_quarter_period(self):
        k1, k2 = costates(0.0, 1.0, W, math.pi / (2 * W))
        assert k1 == pytest.approx(1.4) and k2 == pytest.approx(0.0, abs=1e-15)

    def test_costate_equations_finite_difference(self):
        rng = np.random.default_rng(7)
        c1, c2, h = 0.8, -1.3, 1e-5
        for t in rng.uniform(0, 10, 20):
            k1p, k2p = costates(c1, c2, W, t + h)
            k1m, k2m = costates(c1, c2, W, t - h)
            k1, k2 = costates(c1, c2, W, t)
            assert (k1p - k1m) / (2 * h) == pytest.approx(W**2 * k2, abs=1e-8)
            assert (k2p - k2m) / (2 * h) == pytest.approx(-k1, abs=1e-8)


class TestOptimalProtocol:
    def test_endpoints(self, params, task):
        sol = optimal_protocol(params, task)
        assert sol.protocol.kind is ProtocolKind.OPTIMAL_OCT
        assert sol.protocol.x(0.0) == pytest.approx(0.0, abs=1e-12)
        assert sol.protocol.x(7.0) == pytest.approx(10.0, rel=1e-12)
        assert sol.protocol.x(-0.5) == 0.0 and sol.protocol.x(7.5) == 10.0

    def test_matches_closed_form_reference(self, params, task):
        sol = optimal_protocol(params, task)
        for t in np.linspace(0.0, 7.0, 15):
            assert sol.protocol.x(t) == pytest.approx(x_op_reference(t, 10.0, 7.0, W), abs=1e-12)

    def test_edge_velocity(self, params, task):
        sol = optimal_protocol(params, task)
        # one-sided finite differences of the reference formula
        h = 1e-6
        v0 = (x_op_reference(h, 10, 7, W) - x_op_reference(0.0, 10, 7, W)) / h
        vf = (x_op_reference(7.0, 10, 7, W) - x_op_reference(7.0 - h, 10, 7, W)) / h
        assert sol.protocol.xdot(0.0) == pytest.approx(v0, rel=1e-5)
        assert sol.protocol.xdot(7.0) == pytest.approx(vf, rel=1e-5)
        assert sol.protocol.xdot(0.0) == pytest.approx(1.680, abs=5e-4)
        assert sol.protocol.xdot(0.0) == pytest.approx(sol.protocol.xdot(7.0), rel=1e-12)
        assert sol.protocol.xddot(0.0) == pytest.approx(-sol.protocol.xddot(7.0), rel=1e-12)
        assert sol.protocol.jump_start == pytest.approx(sol.protocol.xdot(0.0))
        assert sol.protocol.jump_end == pytest.approx(-sol.protocol.xdot(7.0))
        assert _resonance_denominator(W * 7.0) == pytest.approx(84.73, abs=5e-3)

    def test_linear_solve_cross_check(self, params, task):
        sol = optimal_protocol(params, task)
        c = constants_from_boundary_conditions(params, task)
        np.testing.assert_allclose(c, [sol.c1, sol.c2, sol.c3, sol.c4], rtol=1e-9, atol=1e-12)

    def test_xi_boundary_conditions_and_newton_equation(self, params, task):
        sol = optimal_protocol(params, task)
        for tb, target in ((0.0, 0.0), (7.0, 10.0)):
            assert sol.xi(tb) == pytest.approx(target, abs=1e-12)
            assert sol.xi(tb, 1) == pytest.approx(0.0, abs=1e-12)
            assert sol.xi(tb, 2) == pytest.approx(0.0, abs=1e-11)
        t, h = np.linspace(0.5, 6.5, 13), 1e-4
        second = (sol.xi(t + h) - 2 * sol.xi(t) + sol.xi(t - h)) / h**2
        np.testing.assert_allclose(second, -W**2 * (sol.xi(t) - sol.protocol.x(t)), atol=1e-6)
        first = (sol.xi(t + h) - sol.xi(t - h)) / (2 * h)
        np.testing.assert_allclose(first, sol.xi(t, 1), atol=1e-7)

    def test_harmonic_run_follows_xi(self, params, task):
        sol = optimal_protocol(params, task)
        tr = integrate(sol.protocol, params)
        assert np.abs(tr.X - sol.xi(tr.t)).max() < 1e-10

    def test_degenerate_guard(self):
        with pytest.raises(DegenerateDurationError):
            optimal_protocol(CraneParams(l=5.0), TransportTask(10.0, 1e-60))
        # tiny but representable durations stay well defined through the series
        optimal_protocol(CraneParams(l=5.0), TransportTask(10.0, 1e-9))


class TestJumpBookkeeping:
    def test_integrals_and_energies(self, params, task):
        sol = optimal_protocol(params, task)
        tr = integrate(sol.protocol, params)
        qx = tr.q * tr.xdot
        assert abs(np.trapezoid(qx, tr.t)) < 1e-4 * np.trapezoid(np.abs(qx), tr.t)
        # interior part of int x'' x' vanishes, impulses give +/- x'^2/2
        interior = np.trapezoid(tr.xddot * tr.xdot, tr.t)
        v = sol.protocol.jump_start
        assert interior == pytest.approx(0.0, abs=1e-6)
        assert interior + 0.5 * v**2 - 0.5 * tr.xdot[-1] ** 2 == pytest.approx(0.0, abs=1e-6)
        Emax = tr.E_load.max()
        assert abs(tr.E_end - tr.E_start) < 1e-4 * Emax
        # E(0-) = E(0+) and E(t_f-) = E(t_f+)
        assert tr.E_load[0] == pytest.approx(tr.E_start, abs=1e-12 * Emax)
        assert tr.E_load[-1] == pytest.approx(tr.E_end, abs=1e-9 * Emax)

    def test_q_dot_jumps(self, params, task):
        sol = optimal_protocol(params, task)
        init = LoadState.from_deviation(0.0, 0.05, -0.02, params)
        tr = integrate(sol.protocol, params, init)
        assert tr.q_dot[0] == pytest.approx(init.q_dot - tr.xdot[0], rel=1e-12)
        assert tr.end.q_dot == pytest.approx(tr.q_dot[-1] + tr.xdot[-1], rel=1e-12)


class TestBounds:
    def test_tight_bound_value(self, params, task):
        b = minimal_consumption_bound(params, task)
        assert b == pytest.approx(bound_reference(15.0, 10.0, 7.0, W), rel=1e-12)
        assert b == pytest.approx(233.8, abs=0.05)
        assert 15.0 * 100.0 / b == pytest.approx(6.4153, abs=1e-4)

    def test_simple_bound(self, params, task):
        assert simple_lower_bound(params, task) == pytest.approx(214.2857142857, rel=1e-10)
        assert simple_lower_bound(CraneParams(), task) == 0.0
        assert minimal_consumption_bound(CraneParams(), task) == 0.0
        assert short_time_asymptote(CraneParams(), task) == 0.0

    def test_long_time_limit(self, params):
        task = TransportTask(10.0, 200.0 / W)
        ratio = minimal_consumption_bound(params, task) / simple_lower_bound(params, task)
        assert abs(ratio - 1.0) < 0.01

    def test_short_time_limit(self, params):
        task = TransportTask(10.0, 0.1 / W)
        ratio = minimal_consumption_bound(params, task) / short_time_asymptote(params, task)
        assert abs(ratio - 1.0) < 0.01

    def test_short_time_outside_regime(self, params, task):
        ratio = minimal_consumption_bound(params, task) / short_time_asymptote(params, task)
        assert ratio > 10.0

    def test_denominator_series_matches_direct(self):
        # z^6/360 leading term, and continuity with the direct formula across the switch
        assert _resonance_denominator(1e-3) == pytest.approx(1e-18 / 360, rel=1e-5)
        for z in (0.6, 0.9, 0.999):
            direct = z * z + z * math.sin(z) + 4 * (math.cos(z) - 1)
            assert _resonance_denominator(z) == pytest.approx(direct, rel=1e-8)

    @settings(max_examples=50, deadline=None)
    @given(gamma=st.floats(0.1, 50.0), d=st.floats(0.5, 30.0), t_f=st.floats(0.3, 40.0))
    def test_tight_never_below_simple(self, gamma, d, t_f):
        p = CraneParams(gamma=gamma)
        task = TransportTask(d, t_f)
        assert minimal_consumption_bound(p, task) >= simple_lower_bound(p, task) * (1 - 1e-12)


class TestPMP:
    def test_optimal_solution_satisfies_conditions(self, params, task):
        sol = optimal_protocol(params, task)
        rep = verify_pmp(sol, params, task)
        assert rep.hamiltonian_drift < 1e-8
        assert rep.stationarity_residual < 1e-8
        assert rep.max_endpoint_residual < 1e-8
        assert rep.fitted_c1 == pytest.approx(sol.c1, rel=1e-8)
        assert rep.fitted_c2 == pytest.approx(sol.c2, rel=1e-8)

    def test_hamiltonian_constant_at_edges(self, params, task):
        sol = optimal_protocol(params, task)
        w = params.omega
        vals = []
        for t in (0.0, task.t_f):
            k1, k2 = sol.costates(t)
            u = sol.protocol.x(t)
            vals.append(k1 * sol.xi(t, 1) - k2 * w**2 * (sol.xi(t) - u) - sol.k0 * sol.protocol.xdot(t) ** 2)
        assert vals[0] == pytest.approx(vals[1], rel=1e-10)
        assert verify_pmp(sol, params, task).hamiltonian_value == pytest.approx(vals[0], rel=1e-10)

    def test_polynomial_shortcut_is_not_optimal(self, params, task):
        rep = verify_pmp(sta_protocol(params, task), params, task)
        assert rep.stationarity_residual > 0.1
        assert rep.max_endpoint_residual < 1e-8

    def test_optimal_as_plain_protocol(self, params, task):
        sol = optimal_protocol(params, task)
        rep = verify_pmp(sol.protocol, params, task)
        assert rep.stationarity_residual < 1e-8
        assert rep.max_endpoint_residual < 1e-8
