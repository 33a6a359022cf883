import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stickslip import (
    AnalyticTemperature,
    Event,
    EventKind,
    EventLog,
    FrictionParams,
    HarmonicForcing,
    PhaseLabel,
    SystemState,
    TemperatureSeries,
    TemperatureSpringForcing,
    Trajectory,
    constant_temperature,
    eval_forcing,
    friction_force,
)
from stickslip.model import SampledTemperature, TemperatureDomainError


class TestFrictionParams:
    def test_valid(self):
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        assert not p.unified
        assert FrictionParams(m=2.0, f_d=0.5, f_s=0.5).unified

    @pytest.mark.parametrize("m,fd,fs", [(0.0, 1, 1), (-1, 1, 1), (1, -0.1, 1),
                                         (1, 1.3, 1.2)])
    def test_invalid(self, m, fd, fs):
        with pytest.raises(ValueError):
            FrictionParams(m=m, f_d=fd, f_s=fs)


class TestEvalForcing:
    def test_temperature_spring_direct(self):
        f = TemperatureSpringForcing(K=1.0, beta=6.0, T=constant_temperature(1.0))
        assert eval_forcing(f, 0.0, 0.0, 0.0) == 6.0

    def test_harmonic_at_start(self):
        f = HarmonicForcing(beta=6.0, Omega=0.25, alpha=0.0)
        assert eval_forcing(f, 6.0, 0.0, 0.0) == 0.0

    def test_harmonic_reference_marker(self):
        # published force-plane marker of the h=0.01 benchmark run
        f = HarmonicForcing(beta=6.0, Omega=0.25, alpha=0.0)
        b = eval_forcing(f, -6.24223, 0.0, 13.38)
        assert b == pytest.approx(0.365928, abs=1e-5)

    def test_damping_term(self):
        f = HarmonicForcing(beta=0.0, Omega=1.0, alpha=0.5)
        assert eval_forcing(f, 0.0, 2.0, 0.0) == -2.0

    def test_array_evaluation(self):
        f = HarmonicForcing(beta=6.0, Omega=0.25, alpha=0.0)
        ts = np.array([0.0, 1.0, 2.0])
        out = eval_forcing(f, 6.0, 0.0, ts)
        assert out.shape == (3,)
        assert out[0] == 0.0

    @given(x=st.integers(-8, 8), k=st.integers(-4, 4), kk=st.integers(1, 5))
    def test_affine_in_x_exact(self, x, k, kk):
        # dyadic inputs make the affine identity b(x+d) - b(x) = -K d exact
        f = TemperatureSpringForcing(K=float(kk), beta=2.0,
                                     T=constant_temperature(3.0))
        delta = math.ldexp(1.0, k)
        lhs = eval_forcing(f, x + delta, 0.0, 0.0) - eval_forcing(f, x, 0.0, 0.0)
        assert lhs == -kk * delta

    @given(x=st.floats(-1e3, 1e3), delta=st.floats(-10, 10),
           K=st.floats(0.01, 1e3))
    def test_affine_in_x(self, x, delta, K):
        f = TemperatureSpringForcing(K=K, beta=1.0, T=constant_temperature(0.5))
        lhs = eval_forcing(f, x + delta, 0.0, 1.0) - eval_forcing(f, x, 0.0, 1.0)
        assert lhs == pytest.approx(-K * delta, rel=1e-9, abs=1e-9)


class TestFrictionForce:
    def setup_method(self):
        self.p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)

    def test_static_equilibrium(self):
        assert friction_force(self.p, 0.0, 0.9, PhaseLabel.STATIC) == 0.9

    def test_static_requires_rest(self):
        with pytest.raises(ValueError):
            friction_force(self.p, 0.1, 0.9, PhaseLabel.STATIC)

    def test_dynamic_sign_law(self):
        assert friction_force(self.p, -2.0, 0.0, PhaseLabel.DYNAMIC) == -1.0
        assert friction_force(self.p, 3.0, -5.0, PhaseLabel.DYNAMIC) == 1.0

    def test_isolated_zero_clamps(self):
        assert friction_force(self.p, 0.0, 3.0, PhaseLabel.DYNAMIC) == 1.0
        assert friction_force(self.p, 0.0, -3.0, PhaseLabel.DYNAMIC) == -1.0
        assert friction_force(self.p, 0.0, 0.4, PhaseLabel.DYNAMIC) == 0.4

    def test_isolated_zero_value_outside_vi(self):
        # at a stuck step (v'=0) the discrete VI residual involves only
        # (v, v', b, f); the reported friction value never enters, so any
        # bounded convention is admissible -- the clamp keeps |F| <= f_d
        from conftest import vi_residual
        phis = np.linspace(-3, 3, 601)
        res = vi_residual(v_old=0.0, v_new=0.0, b=0.9, f=1.2, h=0.01, m=1.0,
                          phis=phis)
        assert np.all(res <= 1e-15)
        for reported in (-1.0, 0.0, 0.9, 1.0):
            assert abs(reported) <= self.p.f_s
            assert np.all(res <= 1e-15)  # residual independent of the report

    @given(v=st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6,
                       max_value=1e6),
           b=st.floats(-1e3, 1e3))
    def test_magnitude_bounds(self, v, b):
        p = FrictionParams(m=1.0, f_d=0.7, f_s=1.1)
        out = friction_force(p, v, b, PhaseLabel.DYNAMIC)
        if v != 0:
            assert out == math.copysign(0.7, v)
        else:
            assert abs(out) <= 0.7


class TestTemperatureSources:
    def test_series_interpolation_midpoint(self):
        s = TemperatureSeries(np.array([0.0, 600.0]), np.array([10.0, 10.5]))
        assert s.at(300.0) == 10.25
        assert s.at(0.0) == 10.0
        assert s.at(600.0) == 10.5

    def test_series_domain_error(self):
        s = TemperatureSeries(np.array([0.0, 600.0]), np.array([10.0, 10.5]))
        with pytest.raises(TemperatureDomainError):
            s.at(601.0)
        with pytest.raises(TemperatureDomainError):
            s.at(-1.0)

    def test_series_validation(self):
        with pytest.raises(ValueError):
            TemperatureSeries(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            TemperatureSeries(np.array([0.0, 1.0]), np.array([1.0]))

    def test_sampled_source_vectorized(self):
        s = TemperatureSeries(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 0.0]))
        src = SampledTemperature(s)
        out = src.at(np.array([0.5, 1.5]))
        assert np.allclose(out, [1.0, 1.0])

    def test_analytic_source(self):
        src = AnalyticTemperature(lambda t: np.cos(t))
        assert src.at(0.0) == 1.0
        assert math.isinf(src.t_max)


class TestStateAndEvents:
    def test_state_finite(self):
        with pytest.raises(ValueError):
            SystemState(0.0, math.nan, 0.0)

    def test_event_log_validate(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(1.3))
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.3)
        log = EventLog([
            Event(0.0, EventKind.ENTER_STATIC, 0.0, j=0),
            Event(1.0, EventKind.ENTER_DYNAMIC, 0.0, epsilon=1, j=0),
        ])
        log.validate(f, p, tol=1e-9)

    def test_event_log_rejects_unsorted(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(0.0))
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        log = EventLog([
            Event(1.0, EventKind.ENTER_STATIC, 0.0, j=0),
            Event(0.5, EventKind.ENTER_DYNAMIC, 0.0, epsilon=1, j=0),
        ])
        with pytest.raises(AssertionError):
            log.validate(f, p, tol=1e-9)

    def test_event_log_rejects_nonalternating(self):
        f = TemperatureSpringForcing(K=1.0, beta=1.0, T=constant_temperature(0.0))
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        log = EventLog([
            Event(0.0, EventKind.ENTER_STATIC, 0.0, j=0),
            Event(1.0, EventKind.ENTER_STATIC, 0.0, j=1),
        ])
        with pytest.raises(AssertionError):
            log.validate(f, p, tol=1e-9)


class TestTrajectory:
    def _make(self, phase, v, friction, b):
        n = len(phase)
        return Trajectory(t=np.arange(n, dtype=float), x=np.zeros(n),
                          v=np.asarray(v, dtype=float),
                          friction=np.asarray(friction, dtype=float),
                          b=np.asarray(b, dtype=float),
                          phase=np.asarray(phase, dtype=np.int8))

    def test_validate_accepts_consistent(self):
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        traj = self._make(phase=[0, 1, 1], v=[0.0, 2.0, -1.0],
                          friction=[0.5, 1.0, -1.0], b=[0.5, 3.0, 0.2])
        traj.validate(p)

    def test_validate_rejects_static_motion(self):
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        traj = self._make(phase=[0], v=[0.5], friction=[0.1], b=[0.1])
        with pytest.raises(AssertionError):
            traj.validate(p)

    def test_validate_rejects_overthreshold_static(self):
        p = FrictionParams(m=1.0, f_d=1.0, f_s=1.2)
        traj = self._make(phase=[0], v=[0.0], friction=[1.5], b=[1.5])
        with pytest.raises(AssertionError):
            traj.validate(p)

    def test_rejects_decreasing_times(self):
        with pytest.raises(ValueError):
            Trajectory(t=np.array([1.0, 0.0]), x=np.zeros(2), v=np.zeros(2),
                       friction=np.zeros(2), b=np.zeros(2),
                       phase=np.zeros(2, dtype=np.int8))
