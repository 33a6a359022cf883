"""Finite-difference solver: the discrete variational-inequality Euler scheme.

Each step advances position with the old velocity and obtains the new
velocity as the unique solution w of the scalar discrete VI

    forall phi:  (b - m (w - v)/h)(phi - w) + f |w| <= f |phi|,

whose closed form is the soft-threshold (shrink) of the free-flight velocity
u = v + (h/m) b.  In the unified model (f_d = f_s = f) the threshold is
(h/m) f throughout.  In the two-coefficient model the stick gate uses f_s
while the slip magnitude uses f_d: if |u| <= (h/m) f_s the new velocity is 0,
otherwise w = u - sign(u) * (h/m) f_d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Event,
    EventKind,
    EventLog,
    ForcingModel,
    FrictionParams,
    PhaseLabel,
    SystemState,
    Trajectory,
    eval_forcing,
)

__all__ = [
    "EulerConfig",
    "shrink",
    "euler_step_unified",
    "euler_step_two_coeff",
    "simulate_euler",
]


@dataclass(frozen=True)
class EulerConfig:
    """Step size, step count and output decimation for the Euler scheme."""

    h: float
    n_steps: int
    record_every: int = 1

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


def shrink(u: float, tau: float) -> float:
    """Soft-threshold: 0 if |u| <= tau, else u - sign(u)*tau.

    This is the minimizer of w -> (w - u)^2 / 2 + tau |w|, i.e. the unique
    solution of the scalar discrete VI step.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    if abs(u) <= tau:
        return 0.0
    return u - math.copysign(tau, u)


def euler_step_unified(state: SystemState, f: ForcingModel, p: FrictionParams,
                       h: float) -> SystemState:
    """One step of the unified (f_d = f_s) scheme; forcing frozen at the old state."""
    b = eval_forcing(f, state.x, state.v, state.t)
    hm = h / p.m
    v_new = shrink(state.v + hm * b, hm * p.f_s)
    return SystemState(state.t + h, state.x + h * state.v, v_new)


def euler_step_two_coeff(state: SystemState, f: ForcingModel, p: FrictionParams,
                         h: float) -> SystemState:
    """One step of the two-coefficient scheme: gate on f_s, slip magnitude f_d."""
    b = eval_forcing(f, state.x, state.v, state.t)
    hm = h / p.m
    u = state.v + hm * b
    if abs(u) <= hm * p.f_s:
        v_new = 0.0
    else:
        v_new = u - math.copysign(hm * p.f_d, u)
    return SystemState(state.t + h, state.x + h * state.v, v_new)


def simulate_euler(x0: float, f: ForcingModel, p: FrictionParams,
                   cfg: EulerConfig) -> Trajectory:
    """Run the stepped scheme from rest and assemble the sampled trajectory.

    A recorded sample is labeled STATIC when the stick gate fired for the
    step that produced it *and* the applied force at the sample itself is
    within the static threshold; the instant where v = 0 but |b| > f_s is a
    (dynamic) departure point.  The event log is rebuilt from label changes,
    so its times are accurate to within one step h.
    """
    h, n_steps, every = cfg.h, cfg.n_steps, cfg.record_every
    m, f_d, f_s = p.m, p.f_d, p.f_s
    hm = h / m
    gate = hm * f_s
    slip = hm * f_d
    unified = p.unified

    n_rec = n_steps // every + 1
    t_arr = np.empty(n_rec)
    x_arr = np.empty(n_rec)
    v_arr = np.empty(n_rec)
    fr_arr = np.empty(n_rec)
    b_arr = np.empty(n_rec)
    ph_arr = np.empty(n_rec, dtype=np.int8)

    def classify(x, v, b):
        """Label + friction for a sample from its own fields."""
        if v == 0.0 and abs(b) <= f_s:
            return PhaseLabel.STATIC, b
        if v != 0.0:
            return PhaseLabel.DYNAMIC, math.copysign(f_d, v)
        return PhaseLabel.DYNAMIC, min(max(b, -f_d), f_d)

    t, x, v = 0.0, float(x0), 0.0
    b = eval_forcing(f, x, v, t)
    phase, fr = classify(x, v, b)
    t_arr[0], x_arr[0], v_arr[0], fr_arr[0], b_arr[0], ph_arr[0] = \
        t, x, v, fr, b, phase.value

    events = EventLog()
    j = 0
    if phase is PhaseLabel.STATIC:
        events.append(Event(time=0.0, kind=EventKind.ENTER_STATIC, position=x, j=0))
    else:
        eps = int(math.copysign(1.0, b)) if v == 0.0 else int(math.copysign(1.0, v))
        events.append(Event(time=0.0, kind=EventKind.ENTER_DYNAMIC, position=x,
                            epsilon=eps, j=0))
    prev_phase = phase

    rec = 0
    for n in range(1, n_steps + 1):
        u = v + hm * b
        if abs(u) <= gate:
            v_new = 0.0
        elif unified:
            v_new = u - math.copysign(gate, u)
        else:
            v_new = u - math.copysign(slip, u)
        x = x + h * v
        v = v_new
        t = n * h
        b = eval_forcing(f, x, v, t)
        phase, fr = classify(x, v, b)

        if phase is not prev_phase:
            if phase is PhaseLabel.DYNAMIC:
                eps = int(math.copysign(1.0, b)) if b != 0.0 else 1
                events.append(Event(time=t, kind=EventKind.ENTER_DYNAMIC,
                                    position=x, epsilon=eps, j=j))
            else:
                j += 1
                events.append(Event(time=t, kind=EventKind.ENTER_STATIC,
                                    position=x, j=j))
            prev_phase = phase

        if n % every == 0:
            rec += 1
            t_arr[rec], x_arr[rec], v_arr[rec] = t, x, v
            fr_arr[rec], b_arr[rec], ph_arr[rec] = fr, b, phase.value

    return Trajectory(t=t_arr[:rec + 1], x=x_arr[:rec + 1], v=v_arr[:rec + 1],
                      friction=fr_arr[:rec + 1], b=b_arr[:rec + 1],
                      phase=ph_arr[:rec + 1], events=events)
