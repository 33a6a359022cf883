import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from stickslip import (
    AnalyticTemperature,
    EngineConfig,
    EventKind,
    FrictionParams,
    HarmonicForcing,
    MaxSubphasesError,
    PhaseLabel,
    TemperatureSpringForcing,
    constant_temperature,
    dynamic_subphase,
    dynamic_subphase_generic,
    eval_forcing,
    next_departure,
    ou_path,
    perturbed_temperature,
    simulate_events,
)


# --------------------------------------------------------------------------
# Independent oracle for the undamped harmonic configuration.
#
# During a slip with sign eps the motion solves x'' + x = beta cos(Om t) - eps f_d
# (m = 1, alpha = 0), whose general solution is
#   x(t) = -eps f_d + beta/(1-Om^2) cos(Om t) + C cos(t - tau) + D sin(t - tau),
# fitted to x(tau) = x_s, x'(tau) = 0.  Event times come from brentq on x'.
# --------------------------------------------------------------------------

def _harmonic_slip_oracle(x_s, tau, eps, beta=6.0, Om=0.25, f_d=1.0):
    amp = beta / (1.0 - Om * Om)
    const = -eps * f_d
    # fit x(tau) = x_s, x'(tau) = 0
    C = x_s - const - amp * math.cos(Om * tau)
    D = amp * Om * math.sin(Om * tau)

    def x(t):
        return const + amp * math.cos(Om * t) + C * math.cos(t - tau) \
            + D * math.sin(t - tau)

    def v(t):
        return -amp * Om * math.sin(Om * t) - C * math.sin(t - tau) \
            + D * math.cos(t - tau)

    # first zero of v after tau: scan then refine
    t = tau + 1e-6
    step = 0.05
    while v(t) * eps > 0 or t < tau + 1e-3:
        t += step
    t_stop = brentq(v, t - step, t, xtol=1e-12)
    return t_stop, x(t_stop)


def _fig_oracle():
    """Exact event chain for the harmonic benchmark (beta=6, Om=1/4, x0=6)."""
    f_s, beta, Om = 1.2, 6.0, 0.25
    tau_half = math.acos(1.0 - f_s / beta) / Om
    t1, x1 = _harmonic_slip_oracle(6.0, tau_half, eps=-1)
    # second departure: b(x1, t) = beta cos(Om t) - x1 crosses +f_s
    tau_32 = brentq(lambda t: beta * math.cos(Om * t) - x1 - f_s, t1, t1 + 5,
                    xtol=1e-12)
    t2, x2 = _harmonic_slip_oracle(x1, tau_32, eps=+1)
    return tau_half, t1, x1, tau_32, t2, x2


class TestNextDeparture:
    def test_linear_ramp(self):
        f = TemperatureSpringForcing(
            K=1.0, beta=1.0, T=AnalyticTemperature(lambda t: 0.1 * np.asarray(t)))
        cfg = EngineConfig(t_end=50.0, root_tol=1e-6)
        t = next_departure(0.0, 0.0, f, 1.0, cfg)
        assert t == pytest.approx(10.0, abs=1e-6)

    def test_static_forever(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(0.5))
        cfg = EngineConfig(t_end=100.0)
        assert math.isinf(next_departure(0.0, 0.0, f, 1.2, cfg))

    def test_harmonic_closed_form(self, harmonic_forcing):
        cfg = EngineConfig(t_end=20.0, root_tol=1e-6)
        t = next_departure(6.0, 0.0, harmonic_forcing, 1.2, cfg)
        assert t == pytest.approx(4.0 * math.acos(0.8), abs=1e-6)

    def test_departure_after_restart(self, harmonic_forcing):
        # from the second stick level the crossing is upward through +f_s
        cfg = EngineConfig(t_end=30.0, root_tol=1e-9)
        _, t1, x1, tau_32, _, _ = _fig_oracle()
        t = next_departure(x1, t1, harmonic_forcing, 1.2, cfg)
        assert t == pytest.approx(tau_32, abs=1e-6)


class TestDynamicSubphase:
    def setup_method(self):
        self.cfg = EngineConfig(t_end=50.0, root_tol=1e-9)

    def test_constant_temperature_closed_form(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(1.0))
        p = FrictionParams(m=1.0, f_d=0.5, f_s=1.5)
        sub = dynamic_subphase(-0.5, 0.0, 1, f, p, self.cfg)
        assert sub.tau_next == pytest.approx(math.pi, abs=1e-9)
        assert sub.x_next == pytest.approx(1.5, abs=1e-8)
        x_star = 0.5
        closed = x_star + (-0.5 - x_star) * np.cos(sub.path_t)
        assert np.max(np.abs(sub.path_x - closed)) < 1e-8

    def test_equal_coefficients_return_to_start(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(1.0))
        p = FrictionParams(m=1.0, f_d=1.5, f_s=1.5)
        sub = dynamic_subphase(-0.5, 0.0, 1, f, p, self.cfg)
        assert sub.x_next == pytest.approx(-0.5, abs=1e-8)

    def test_free_oscillator_half_period(self):
        f = TemperatureSpringForcing(K=1.0, beta=0.0, T=constant_temperature(0.0))
        p = FrictionParams(m=1.0, f_d=0.0, f_s=0.0)
        sub = dynamic_subphase(1.0, 0.0, -1, f, p, self.cfg)
        assert sub.tau_next == pytest.approx(math.pi, abs=1e-9)
        assert sub.x_next == pytest.approx(-1.0, abs=1e-9)

    def test_generic_agrees_with_quadrature(self):
        f = TemperatureSpringForcing(K=1.0, beta=0.0, T=constant_temperature(0.0))
        p = FrictionParams(m=1.0, f_d=0.0, f_s=0.0)
        s_quad = dynamic_subphase(1.0, 0.0, -1, f, p, self.cfg)
        s_rk = dynamic_subphase_generic(1.0, 0.0, -1, f, p, self.cfg)
        assert abs(s_quad.x_next - s_rk.x_next) < 1e-6
        assert abs(s_quad.tau_next - s_rk.tau_next) < 1e-6

    def test_scaled_stiffness_half_period(self):
        f = TemperatureSpringForcing(K=4.0, beta=1.0, T=constant_temperature(1.0))
        p = FrictionParams(m=1.0, f_d=1.0, f_s=2.0)
        sub = dynamic_subphase(0.0, 0.0, 1, f, p, self.cfg)
        assert sub.tau_next == pytest.approx(math.pi / 2.0, abs=1e-9)
        # x* = beta*T - eps*f_d/K = 0.75; lands at 2*x* - x0
        assert sub.x_next == pytest.approx(1.5, abs=1e-8)

    def test_harmonic_slip_matches_oracle(self, harmonic_forcing, harmonic_params):
        tau_half, t1, x1, *_ = _fig_oracle()
        sub = dynamic_subphase_generic(6.0, tau_half, -1, harmonic_forcing,
                                       harmonic_params, EngineConfig(t_end=30.0))
        assert sub.tau_next == pytest.approx(t1, abs=1e-5)
        assert sub.x_next == pytest.approx(x1, abs=1e-5)

    def test_second_harmonic_slip_from_reference_level(self, harmonic_forcing,
                                                       harmonic_params):
        # restarted from the coarse-run level -6.24223 the slip still ends
        # near t = 25.74; the landing level reflects the exact dynamics
        t_dep = brentq(lambda t: 6.0 * math.cos(0.25 * t) + 6.24223 - 1.2,
                       14.0, 15.5, xtol=1e-12)
        assert t_dep == pytest.approx(14.8577, abs=1e-3)
        t2_oracle, x2_oracle = _harmonic_slip_oracle(-6.24223, t_dep, eps=+1)
        sub = dynamic_subphase_generic(-6.24223, t_dep, 1, harmonic_forcing,
                                       harmonic_params, EngineConfig(t_end=40.0))
        assert sub.tau_next == pytest.approx(t2_oracle, abs=1e-5)
        assert sub.tau_next == pytest.approx(25.74, abs=0.05)
        assert sub.x_next == pytest.approx(x2_oracle, abs=1e-5)

    def test_horizon_truncation(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(1.0))
        p = FrictionParams(m=1.0, f_d=0.5, f_s=1.5)
        sub = dynamic_subphase(-0.5, 0.0, 1, f, p, EngineConfig(t_end=1.0))
        assert sub.truncated
        assert sub.tau_next == 1.0

    @settings(max_examples=60, deadline=None)
    @given(K=st.floats(0.25, 4.0), m=st.floats(0.5, 2.0),
           target=st.floats(-2.0, 2.0), f_d=st.floats(0.0, 1.0),
           gap=st.floats(0.1, 1.0), offset=st.floats(0.2, 2.0),
           sign=st.sampled_from([-1, 1]))
    def test_constant_temperature_slip_law(self, K, m, target, f_d, gap,
                                           offset, sign):
        # from any start with |b| > f_d the slip lasts pi*sqrt(m/K) and lands
        # mirrored about the shifted equilibrium x* = beta*T - eps*f_d/K
        f = TemperatureSpringForcing(K=K, beta=1.0,
                                     T=constant_temperature(target))
        p = FrictionParams(m=m, f_d=f_d, f_s=f_d + gap)
        eps = sign
        x0 = target - eps * (f_d + offset) / K  # b(x0) = eps*(f_d + offset)
        cfg = EngineConfig(t_end=4.0 * math.pi * math.sqrt(m / K))
        sub = dynamic_subphase(x0, 0.0, eps, f, p, cfg)
        x_star = target - eps * f_d / K
        assert sub.tau_next == pytest.approx(math.pi * math.sqrt(m / K),
                                             abs=1e-7)
        assert sub.x_next == pytest.approx(2 * x_star - x0, abs=1e-7)

    def test_linear_ramp_closed_form_through_sampled_series(self):
        # T(t) = 0.1 t sampled at 0.25 spacing: the quadrature panels split at
        # every sample breakpoint, and the slip from x = 0 at t = 10 solves
        # x'' + x = 0.1 t - 0.5 with x(t) = 0.1t - 0.5 - 0.5 cos(t-10) - 0.1 sin(t-10)
        from stickslip import SampledTemperature, TemperatureSeries
        times = 0.25 * np.arange(81)
        series = TemperatureSeries(times, 0.1 * times)
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=SampledTemperature(series))
        p = FrictionParams(m=1.0, f_d=0.5, f_s=1.0)
        sub = dynamic_subphase(0.0, 10.0, 1, f, p, EngineConfig(t_end=20.0))

        def v_closed(t):
            return 0.1 + 0.5 * math.sin(t - 10.0) - 0.1 * math.cos(t - 10.0)

        t_stop = brentq(v_closed, 11.0, 14.0, xtol=1e-13)
        x_closed = 0.1 * sub.path_t - 0.5 - 0.5 * np.cos(sub.path_t - 10.0) \
            - 0.1 * np.sin(sub.path_t - 10.0)
        assert np.max(np.abs(sub.path_x - x_closed)) < 1e-10
        assert sub.tau_next == pytest.approx(t_stop, abs=1e-8)


class TestSimulateEvents:
    def test_static_forever_log(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(0.5))
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        traj = simulate_events(0.0, f, p, EngineConfig(t_end=50.0))
        assert len(traj.events) == 1
        assert traj.events[0].kind == EventKind.ENTER_STATIC
        assert np.all(traj.x == 0.0)
        assert traj.t[-1] == 50.0

    def test_harmonic_benchmark_chain(self, harmonic_forcing, harmonic_params):
        oracle = _fig_oracle()
        traj = simulate_events(6.0, harmonic_forcing, harmonic_params,
                               EngineConfig(t_end=26.0, root_tol=1e-9))
        kinds = [e.kind for e in traj.events]
        assert kinds == [EventKind.ENTER_STATIC, EventKind.ENTER_DYNAMIC,
                         EventKind.ENTER_STATIC, EventKind.ENTER_DYNAMIC,
                         EventKind.ENTER_STATIC]
        times = [e.time for e in traj.events]
        assert times[0] == 0.0
        tau_half, t1, x1, tau_32, t2, x2 = oracle
        assert times[1] == pytest.approx(tau_half, abs=1e-6)
        assert times[2] == pytest.approx(t1, abs=2e-4)
        assert times[3] == pytest.approx(tau_32, abs=2e-4)
        assert times[4] == pytest.approx(t2, abs=2e-4)
        assert traj.events[2].position == pytest.approx(x1, abs=1e-4)
        assert traj.events[4].position == pytest.approx(x2, abs=1e-4)
        assert traj.events[1].epsilon == -1
        assert traj.events[3].epsilon == 1
        traj.validate(harmonic_params, b_tol=1e-6)
        traj.events.validate(harmonic_forcing, harmonic_params, tol=1e-5)

    def test_starts_dynamic_when_threshold_exceeded(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(2.0))
        p = FrictionParams(m=1.0, f_d=0.5, f_s=1.5)
        traj = simulate_events(0.0, f, p, EngineConfig(t_end=10.0))
        assert traj.events[0].kind == EventKind.ENTER_DYNAMIC
        assert traj.events[0].time == 0.0

    def test_exact_boundary_start(self):
        # |b(x0, 0)| = f_s exactly: static with immediate departure
        f = TemperatureSpringForcing(
            K=1.0, beta=1.0, T=AnalyticTemperature(lambda t: 1.5 + 0.1 * np.asarray(t)))
        p = FrictionParams(m=1.0, f_d=0.5, f_s=1.5)
        traj = simulate_events(0.0, f, p, EngineConfig(t_end=5.0))
        kinds = [e.kind for e in traj.events]
        assert kinds[0] == EventKind.ENTER_STATIC
        assert kinds[1] == EventKind.ENTER_DYNAMIC
        assert traj.events[1].time == pytest.approx(0.0, abs=1e-6)

    def test_prop_isolated_zeros_and_sign_coherence(self, harmonic_forcing,
                                                    harmonic_params):
        traj = simulate_events(6.0, harmonic_forcing, harmonic_params,
                               EngineConfig(t_end=26.0))
        self._check_subphase_samples(traj, harmonic_forcing, harmonic_params)

    def test_prop_on_noisy_run(self):
        path = ou_path(3501, 0.01, 2)
        T = perturbed_temperature(0.25, 0.25, path)
        f = TemperatureSpringForcing(K=1.0, beta=6.0, T=T)
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        traj = simulate_events(6.0, f, p, EngineConfig(t_end=30.0))
        assert len(traj.events.of_kind(EventKind.SUBPHASE_BOUNDARY)) >= 2
        self._check_subphase_samples(traj, f, p)

    @staticmethod
    def _check_subphase_samples(traj, f, p):
        """Interior slip samples: v != 0, sign(v) = eps, VI residual <= 1e-6."""
        events = list(traj.events)
        checked = 0
        for left, right in zip(events, events[1:]):
            if left.kind == EventKind.ENTER_STATIC:
                continue
            inside = (traj.t > left.time) & (traj.t < right.time)
            v = traj.v[inside]
            b = traj.b[inside]
            assert np.all(v != 0.0)
            assert np.all(np.sign(v) == left.epsilon)
            # residual of the slip inequality with acceleration from the
            # signed equation of motion
            acc = (b - left.epsilon * p.f_d) / p.m
            for phi in (-2 * np.abs(v), np.zeros_like(v), 2 * np.abs(v)):
                res = (b - p.m * acc) * (phi - v) + p.f_d * np.abs(v) \
                    - p.f_d * np.abs(phi)
                assert np.max(res) <= 1e-6
            checked += 1
        assert checked >= 1

    def test_separation_of_events(self, harmonic_forcing, harmonic_params):
        traj = simulate_events(6.0, harmonic_forcing, harmonic_params,
                               EngineConfig(t_end=26.0))
        events = list(traj.events)
        for a, b in zip(events, events[1:]):
            assert a.time < b.time

    def test_c1_continuity_at_events(self, harmonic_forcing, harmonic_params):
        traj = simulate_events(6.0, harmonic_forcing, harmonic_params,
                               EngineConfig(t_end=26.0, root_tol=1e-10))
        for e in traj.events:
            at = np.isclose(traj.t, e.time, rtol=0, atol=1e-12)
            if np.any(at):
                assert np.all(traj.v[at] == 0.0)
                assert np.allclose(traj.x[at], e.position, atol=1e-9)

    def test_cross_solver_terminal_state(self, harmonic_forcing, harmonic_params):
        from stickslip import EulerConfig, simulate_euler
        ev = simulate_events(6.0, harmonic_forcing, harmonic_params,
                             EngineConfig(t_end=26.0))
        h = 5e-3
        eu = simulate_euler(6.0, harmonic_forcing, harmonic_params,
                            EulerConfig(h=h, n_steps=int(26.0 / h)))
        assert abs(ev.x[-1] - eu.x[-1]) < 0.05

    def test_damped_harmonic_against_adaptive_integration(self, harmonic_params):
        # velocity-dependent damping goes through the generic RK4 path
        from scipy.integrate import solve_ivp
        alpha = 0.05
        f = HarmonicForcing(beta=6.0, Omega=0.25, alpha=alpha)
        traj = simulate_events(6.0, f, harmonic_params, EngineConfig(t_end=26.0))
        tau_half = traj.events[1].time

        def rhs(t, y):
            return [y[1], 6.0 * math.cos(0.25 * t) - 2 * alpha * y[1] - y[0] + 1.0]

        def v_zero(t, y):
            return y[1]
        v_zero.terminal, v_zero.direction = True, +1
        sol = solve_ivp(rhs, [tau_half + 1e-10, 40.0], [6.0, -1e-14],
                        events=v_zero, rtol=1e-12, atol=1e-14)
        assert traj.events[2].time == pytest.approx(sol.t_events[0][0], abs=1e-6)
        assert traj.events[2].position == pytest.approx(sol.y_events[0][0][0],
                                                        abs=1e-6)

    def test_damped_harmonic_euler_convergence(self, harmonic_params):
        from stickslip import EulerConfig, simulate_euler
        f = HarmonicForcing(beta=6.0, Omega=0.25, alpha=0.05)
        x_ref = simulate_events(6.0, f, harmonic_params,
                                EngineConfig(t_end=26.0)).x[-1]
        errs = []
        for h in (5e-3, 2.5e-3, 1.25e-3):
            eu = simulate_euler(6.0, f, harmonic_params,
                                EulerConfig(h=h, n_steps=int(26.0 / h)))
            errs.append(abs(eu.x[-1] - x_ref))
        assert errs[0] / errs[1] == pytest.approx(2.0, abs=0.4)
        assert errs[1] / errs[2] == pytest.approx(2.0, abs=0.4)

    def test_max_subphases_diagnostic(self):
        path = ou_path(3501, 0.01, 2)  # seed with >= 2 sub-phase boundaries
        T = perturbed_temperature(0.25, 0.25, path)
        f = TemperatureSpringForcing(K=1.0, beta=6.0, T=T)
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        with pytest.raises(MaxSubphasesError) as err:
            simulate_events(6.0, f, p, EngineConfig(t_end=30.0, max_subphases=1))
        assert err.value.partial is not None
        assert len(err.value.partial) > 0

    def test_trajectory_validates(self, harmonic_forcing, harmonic_params):
        traj = simulate_events(6.0, harmonic_forcing, harmonic_params,
                               EngineConfig(t_end=26.0))
        traj.validate(harmonic_params, b_tol=1e-6)

    def test_horizon_capped_by_forcing_domain(self):
        # a noise path shorter than t_end caps the run cleanly
        path = ou_path(1001, 0.01, 4)  # covers [0, 10]
        T = perturbed_temperature(0.25, 0.25, path)
        f = TemperatureSpringForcing(K=1.0, beta=6.0, T=T)
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        traj = simulate_events(6.0, f, p, EngineConfig(t_end=50.0))
        assert traj.t[-1] <= 10.0
        assert traj.t[-1] > 9.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EngineConfig(t_end=1.0, quad_points=8)
        with pytest.raises(ValueError):
            EngineConfig(t_end=1.0, root_tol=0.0)
