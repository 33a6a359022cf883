"""Exact event-driven solver.

The run alternates stick (static) phases with slip (dynamic) phases.  A stick
at level x_j ends at the first time |b(x_j, t)| exceeds f_s (located by a
forward scan plus bisection).  A slip decomposes into sub-phases of constant
velocity sign eps = sign(b) at the sub-phase start; within one sub-phase the
motion solves the smooth signed ODE

    m x'' = b(x, x', t) - eps * f_d,   x(tau) = x_jk, x'(tau) = 0,

and the sub-phase ends at the first zero of x'.  For the temperature-spring
forcing the ODE is linear and solved through the Duhamel convolution
evaluated with composite Gauss-Legendre quadrature; the generic path (any
forcing, including velocity-dependent damping) integrates with fixed-step
RK4.  Zero-velocity instants are bracketed on the scan grid and refined by
bisection to the configured root tolerance.
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
    TemperatureSpringForcing,
    Trajectory,
    eval_forcing,
)

__all__ = [
    "EngineConfig",
    "SubphaseResult",
    "MaxSubphasesError",
    "next_departure",
    "dynamic_subphase",
    "dynamic_subphase_generic",
    "simulate_events",
]

_SCAN_CHUNK = 2048


@dataclass(frozen=True)
class EngineConfig:
    """Engine resolution knobs.

    ``bracket_dt`` (the event-scan step) defaults to 1/64 of the fastest
    relevant period -- the natural period of the slip oscillation, and for
    harmonic forcing also the forcing period -- so brief threshold crossings
    are not stepped over.  ``quad_points`` is the Gauss-Legendre node count
    per quadrature panel.
    """

    t_end: float
    quad_points: int = 24
    root_tol: float = 1e-9
    bracket_dt: float | None = None
    max_subphases: int = 1000

    def __post_init__(self):
        if self.quad_points < 16:
            raise ValueError("quad_points must be >= 16")
        if self.root_tol <= 0:
            raise ValueError("root_tol must be positive")
        if self.bracket_dt is not None and self.bracket_dt <= 0:
            raise ValueError("bracket_dt must be positive")
        if self.max_subphases < 1:
            raise ValueError("max_subphases must be >= 1")


@dataclass
class SubphaseResult:
    """One dynamic sub-phase: end event plus the sampled path.

    ``truncated`` marks a sub-phase cut by the horizon before reaching
    x' = 0; then ``tau_next``/``x_next`` hold the horizon state.
    """

    tau_next: float
    x_next: float
    path_t: np.ndarray
    path_x: np.ndarray
    path_v: np.ndarray
    truncated: bool = False


class MaxSubphasesError(RuntimeError):
    """Sub-phase cascade exceeded the configured safety cap."""

    def __init__(self, message: str, partial: Trajectory | None = None):
        super().__init__(message)
        self.partial = partial


def _scan_step(f: ForcingModel, p: FrictionParams | None, cfg: EngineConfig) -> float:
    """Default event-scan step: 1/64 of the fastest relevant period.

    Without friction parameters (pure departure searches) the natural period
    is taken at unit mass.
    """
    if cfg.bracket_dt is not None:
        return cfg.bracket_dt
    m = p.m if p is not None else 1.0
    K = f.K if isinstance(f, TemperatureSpringForcing) else 1.0
    omega_n = math.sqrt(K / m)
    step = (2.0 * math.pi / omega_n) / 64.0
    if not isinstance(f, TemperatureSpringForcing) and f.Omega > 0:
        step = min(step, (2.0 * math.pi / f.Omega) / 64.0)
    return step


def _horizon(f: ForcingModel, cfg: EngineConfig) -> float:
    return min(cfg.t_end, f.t_max)


# --------------------------------------------------------------------------
# Departure from a stick
# --------------------------------------------------------------------------

def next_departure(x_j: float, tau_j: float, f: ForcingModel, f_s: float,
                   cfg: EngineConfig) -> float:
    """First t >= tau_j with |b(x_j, t)| > f_s, or +inf if none before the horizon.

    Forward scan with step ``bracket_dt`` followed by bisection on
    |b| - f_s down to ``root_tol``.
    """
    t_hi = _horizon(f, cfg)
    if tau_j >= t_hi:
        return math.inf
    step = _scan_step(f, None, cfg)

    def excess(ts):
        return np.abs(eval_forcing(f, x_j, 0.0, ts)) - f_s

    t_prev = tau_j
    i = 1
    while t_prev < t_hi:
        ts = tau_j + step * np.arange(i, i + _SCAN_CHUNK)
        ts = ts[ts <= t_hi]
        last_chunk = len(ts) < _SCAN_CHUNK
        if last_chunk and (len(ts) == 0 or ts[-1] < t_hi):
            ts = np.append(ts, t_hi)
        g = excess(ts)
        hit = np.nonzero(g > 0)[0]
        if len(hit):
            k = hit[0]
            lo = t_prev if k == 0 else ts[k - 1]
            hi = ts[k]
            while hi - lo > cfg.root_tol:
                mid = 0.5 * (lo + hi)
                if excess(mid) > 0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)
        t_prev = ts[-1]
        i += _SCAN_CHUNK
        if last_chunk:
            break
    return math.inf


# --------------------------------------------------------------------------
# Temperature-spring sub-phase: Duhamel quadrature
# --------------------------------------------------------------------------

class _DuhamelIntegrator:
    """Evaluates x(t), x'(t) for  m x'' = K(beta T(t) - x) - eps f_d  from rest.

    With omega = sqrt(K/m) and g(s) = K beta T(s) - eps f_d,

        x(t)  = x0 cos w(t-tau) + [sin(wt) C(t) - cos(wt) S(t)] / (m w)
        x'(t) = -w x0 sin w(t-tau) + [cos(wt) C(t) + sin(wt) S(t)] / m

    where C(t) = int_tau^t cos(ws) g(s) ds and S(t) likewise with sin.  C and
    S accumulate panel-by-panel as the evaluation front advances, so a full
    scan costs one pass of quadrature.  Panels are split at the temperature
    source's interpolation breakpoints, making the quadrature exact on
    piecewise-linear (sampled or noise-perturbed) temperature inputs.
    """

    def __init__(self, f: TemperatureSpringForcing, p: FrictionParams,
                 eps: int, tau: float, x0: float, quad_points: int):
        self.f = f
        self.m = p.m
        self.omega = math.sqrt(f.K / p.m)
        self.eps_fd = eps * p.f_d
        self.tau = tau
        self.x0 = x0
        self.nodes, self.weights = np.polynomial.legendre.leggauss(quad_points)
        breaks = f.T.breakpoints
        self.breaks = None if breaks is None else np.asarray(breaks, dtype=float)
        self.t_front = tau
        self.C = 0.0
        self.S = 0.0

    def _panel_integrals(self, a: float, b: float) -> tuple[float, float]:
        """(dC, dS) over [a, b] by composite GL split at breakpoints."""
        if b <= a:
            return 0.0, 0.0
        if self.breaks is None:
            edges = np.array([a, b])
        else:
            lo = np.searchsorted(self.breaks, a, side="right")
            hi = np.searchsorted(self.breaks, b, side="left")
            edges = np.concatenate(([a], self.breaks[lo:hi], [b]))
        mids = 0.5 * (edges[1:] + edges[:-1])
        halfs = 0.5 * (edges[1:] - edges[:-1])
        # nodes: (n_panels, n_nodes); weights scale with half-lengths
        s = mids[:, None] + halfs[:, None] * self.nodes[None, :]
        w = halfs[:, None] * self.weights[None, :]
        g = self.f.K * self.f.beta * self.f.T.at(s) - self.eps_fd
        ws = self.omega * s
        dC = float(np.sum(w * np.cos(ws) * g))
        dS = float(np.sum(w * np.sin(ws) * g))
        return dC, dS

    def eval(self, t: float) -> tuple[float, float]:
        """(x, x') at t >= committed front; does not move the front."""
        dC, dS = self._panel_integrals(self.t_front, t)
        C = self.C + dC
        S = self.S + dS
        w = self.omega
        rel = t - self.tau
        sin_wt, cos_wt = math.sin(w * t), math.cos(w * t)
        x = self.x0 * math.cos(w * rel) + (sin_wt * C - cos_wt * S) / (self.m * w)
        v = -w * self.x0 * math.sin(w * rel) + (cos_wt * C + sin_wt * S) / self.m
        return x, v

    def commit(self, t: float) -> None:
        dC, dS = self._panel_integrals(self.t_front, t)
        self.C += dC
        self.S += dS
        self.t_front = t


def _locate_stop(eval_xv, eps: int, tau: float, step: float, t_hi: float,
                 root_tol: float, commit=None):
    """Scan forward for the first zero of eps * x' and refine by bisection.

    ``eval_xv(t)`` returns (x, v) for t at/after the last committed front;
    ``commit(t)`` (optional) advances the front.  Returns
    (tau_stop, x_stop, path_t, path_x, path_v, truncated) where the path
    holds the interior scan samples (start/end excluded).
    """
    ts: list[float] = []
    xs: list[float] = []
    vs: list[float] = []
    t_prev = tau
    i = 1
    while True:
        t_i = tau + i * step
        if t_i >= t_hi:
            x_i, v_i = eval_xv(t_hi)
            if eps * v_i > 0.0:  # still moving at the horizon
                return t_hi, x_i, np.array(ts), np.array(xs), np.array(vs), True
            t_i = t_hi  # the stop lies in (t_prev, t_hi]: fall through to bisect
        else:
            x_i, v_i = eval_xv(t_i)
        if eps * v_i <= 0.0:
            # sign change in (t_prev, t_i]; ensure a strictly-moving left end
            lo, hi = t_prev, t_i
            if not ts:  # no interior sample yet: probe for motion after tau
                probe = step
                moving = False
                while probe > root_tol:
                    probe *= 0.5
                    x_p, v_p = eval_xv(tau + probe)
                    if eps * v_p > 0.0:
                        lo, moving = tau + probe, True
                        break
                if not moving:
                    # degenerate sub-phase shorter than root_tol
                    x_stop, _ = eval_xv(tau + probe)
                    return tau + probe, x_stop, np.array(ts), np.array(xs), \
                        np.array(vs), False
            while hi - lo > root_tol:
                mid = 0.5 * (lo + hi)
                _, v_mid = eval_xv(mid)
                if eps * v_mid > 0.0:
                    lo = mid
                else:
                    hi = mid
            t_stop = 0.5 * (lo + hi)
            x_stop, _ = eval_xv(t_stop)
            return t_stop, x_stop, np.array(ts), np.array(xs), np.array(vs), False
        ts.append(t_i)
        xs.append(x_i)
        vs.append(v_i)
        if commit is not None:
            commit(t_i)
        t_prev = t_i
        i += 1


def dynamic_subphase(x_jk: float, tau_jk: float, eps_jk: int,
                     f: TemperatureSpringForcing, p: FrictionParams,
                     cfg: EngineConfig) -> SubphaseResult:
    """Solve one sub-phase of the temperature-spring model from rest.

    Evaluates the explicit oscillator solution (Duhamel quadrature) and
    locates the first x' = 0 instant by bracketing and bisection.
    """
    if not isinstance(f, TemperatureSpringForcing):
        raise TypeError("dynamic_subphase requires temperature-spring forcing")
    integ = _DuhamelIntegrator(f, p, eps_jk, tau_jk, x_jk, cfg.quad_points)
    step = _scan_step(f, p, cfg)
    t_hi = _horizon(f, cfg)
    tau_next, x_next, ts, xs, vs, truncated = _locate_stop(
        integ.eval, eps_jk, tau_jk, step, t_hi, cfg.root_tol, commit=integ.commit
    )
    path_t = np.concatenate(([tau_jk], ts, [tau_next]))
    path_x = np.concatenate(([x_jk], xs, [x_next]))
    end_v = integ.eval(tau_next)[1] if truncated else 0.0
    path_v = np.concatenate(([0.0], vs, [end_v]))
    return SubphaseResult(tau_next, x_next, path_t, path_x, path_v, truncated)


# --------------------------------------------------------------------------
# Generic sub-phase: RK4 on the signed ODE
# --------------------------------------------------------------------------

def _rk4_span(f: ForcingModel, inv_m: float, eps_fd: float,
              t: float, x: float, v: float, dt: float, n: int):
    """Advance (x, v) by n RK4 steps of size dt; returns the end state."""
    for _ in range(n):
        a1 = (eval_forcing(f, x, v, t) - eps_fd) * inv_m
        x2, v2 = x + 0.5 * dt * v, v + 0.5 * dt * a1
        a2 = (eval_forcing(f, x2, v2, t + 0.5 * dt) - eps_fd) * inv_m
        x3, v3 = x + 0.5 * dt * v2, v + 0.5 * dt * a2
        a3 = (eval_forcing(f, x3, v3, t + 0.5 * dt) - eps_fd) * inv_m
        x4, v4 = x + dt * v3, v + dt * a3
        a4 = (eval_forcing(f, x4, v4, t + dt) - eps_fd) * inv_m
        x = x + dt * (v + 2.0 * v2 + 2.0 * v3 + v4) / 6.0
        v = v + dt * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        t = t + dt
    return x, v


_RK_SUBSTEPS = 8


def dynamic_subphase_generic(x_jk: float, tau_jk: float, eps_jk: int,
                             f: ForcingModel, p: FrictionParams,
                             cfg: EngineConfig) -> SubphaseResult:
    """Solve one sub-phase for any forcing by fixed-step RK4 dense output.

    The scan grid spacing is ``bracket_dt`` with ``_RK_SUBSTEPS`` internal RK4
    steps per scan interval; the first x' sign change is refined by bisection
    re-integrating from the last grid state.
    """
    step = _scan_step(f, p, cfg)
    dt = step / _RK_SUBSTEPS
    t_hi = _horizon(f, cfg)
    inv_m = 1.0 / p.m
    eps_fd = eps_jk * p.f_d

    state = {"t": tau_jk, "x": x_jk, "v": 0.0}

    def eval_xv(t: float):
        span = t - state["t"]
        if span <= 0:
            return state["x"], state["v"]
        n = max(1, math.ceil(span / dt))
        return _rk4_span(f, inv_m, eps_fd, state["t"], state["x"], state["v"],
                         span / n, n)

    def commit(t: float):
        state["x"], state["v"] = eval_xv(t)
        state["t"] = t

    tau_next, x_next, ts, xs, vs, truncated = _locate_stop(
        eval_xv, eps_jk, tau_jk, step, t_hi, cfg.root_tol, commit=commit
    )
    path_t = np.concatenate(([tau_jk], ts, [tau_next]))
    path_x = np.concatenate(([x_jk], xs, [x_next]))
    end_v = eval_xv(tau_next)[1] if truncated else 0.0
    path_v = np.concatenate(([0.0], vs, [end_v]))
    return SubphaseResult(tau_next, x_next, path_t, path_x, path_v, truncated)


# --------------------------------------------------------------------------
# Full cascade
# --------------------------------------------------------------------------

def _sub_solver(f: ForcingModel):
    return dynamic_subphase if isinstance(f, TemperatureSpringForcing) \
        else dynamic_subphase_generic


class _Recorder:
    """Accumulates trajectory columns and classifies samples."""

    def __init__(self, f: ForcingModel, p: FrictionParams):
        self.f = f
        self.p = p
        self.t: list[np.ndarray] = []
        self.x: list[np.ndarray] = []
        self.v: list[np.ndarray] = []
        self.fr: list[np.ndarray] = []
        self.b: list[np.ndarray] = []
        self.ph: list[np.ndarray] = []

    def add_static(self, ts: np.ndarray, level: float):
        if len(ts) == 0:
            return
        xs = np.full_like(ts, level)
        vs = np.zeros_like(ts)
        bs = np.asarray(eval_forcing(self.f, xs, vs, ts), dtype=float)
        self.t.append(ts)
        self.x.append(xs)
        self.v.append(vs)
        self.fr.append(bs.copy())
        self.b.append(bs)
        self.ph.append(np.full(len(ts), PhaseLabel.STATIC.value, dtype=np.int8))

    def add_dynamic(self, ts: np.ndarray, xs: np.ndarray, vs: np.ndarray):
        if len(ts) == 0:
            return
        bs = np.asarray(eval_forcing(self.f, xs, vs, ts), dtype=float)
        fr = np.where(vs != 0.0, np.sign(vs) * self.p.f_d,
                      np.clip(bs, -self.p.f_d, self.p.f_d))
        self.t.append(ts)
        self.x.append(xs)
        self.v.append(vs)
        self.fr.append(fr)
        self.b.append(bs)
        self.ph.append(np.full(len(ts), PhaseLabel.DYNAMIC.value, dtype=np.int8))

    def build(self, events: EventLog) -> Trajectory:
        cat = lambda chunks: np.concatenate(chunks) if chunks else np.array([])
        return Trajectory(t=cat(self.t), x=cat(self.x), v=cat(self.v),
                          friction=cat(self.fr), b=cat(self.b),
                          phase=np.concatenate(self.ph).astype(np.int8)
                          if self.ph else np.array([], dtype=np.int8),
                          events=events)


def simulate_events(x0: float, f: ForcingModel, p: FrictionParams,
                    cfg: EngineConfig) -> Trajectory:
    """Run the full stick/slip cascade up to the horizon.

    Starts static when |b(x0, 0)| <= f_s, otherwise directly in a dynamic
    phase at t = 0.  Raises :class:`MaxSubphasesError` (with the partial
    trajectory attached) if a single dynamic phase exceeds the sub-phase cap.
    """
    t_hi = _horizon(f, cfg)
    step = _scan_step(f, p, cfg)
    solve_sub = _sub_solver(f)
    rec = _Recorder(f, p)
    events = EventLog()

    t = 0.0
    x = float(x0)
    j = 0
    b0 = eval_forcing(f, x, 0.0, 0.0)
    static = abs(b0) <= p.f_s
    if static:
        events.append(Event(time=0.0, kind=EventKind.ENTER_STATIC, position=x, j=0))

    while t < t_hi:
        if static:
            tau_half = next_departure(x, t, f, p.f_s, cfg)
            span_end = min(tau_half, t_hi)
            ts = t + step * np.arange(0, max(1, math.ceil((span_end - t) / step)))
            ts = ts[ts < span_end]
            rec.add_static(ts, x)
            if tau_half >= t_hi:
                rec.add_static(np.array([t_hi]), x)
                return rec.build(events)
            t = tau_half
        # dynamic phase j starting at time t, position x
        eps = 1 if eval_forcing(f, x, 0.0, t) >= 0 else -1
        events.append(Event(time=t, kind=EventKind.ENTER_DYNAMIC, position=x,
                            epsilon=eps, j=j))
        k = 0
        while True:
            sub = solve_sub(x, t, eps, f, p, cfg)
            interior = sub.path_t < sub.tau_next
            rec.add_dynamic(sub.path_t[interior], sub.path_x[interior],
                            sub.path_v[interior])
            if sub.truncated:
                rec.add_dynamic(sub.path_t[-1:], sub.path_x[-1:], sub.path_v[-1:])
                return rec.build(events)
            t, x = sub.tau_next, sub.x_next
            k += 1
            b_end = eval_forcing(f, x, 0.0, t)
            if abs(b_end) <= p.f_s:
                break
            if k >= cfg.max_subphases:
                rec.add_dynamic(np.array([t]), np.array([x]), np.array([0.0]))
                raise MaxSubphasesError(
                    f"dynamic phase {j} exceeded {cfg.max_subphases} sub-phases "
                    f"at t={t}", partial=rec.build(events))
            eps = 1 if b_end >= 0 else -1
            events.append(Event(time=t, kind=EventKind.SUBPHASE_BOUNDARY,
                                position=x, epsilon=eps, j=j, k=k))
        j += 1
        events.append(Event(time=t, kind=EventKind.ENTER_STATIC, position=x, j=j))
        static = True
        if t >= t_hi:
            break
    rec.add_static(np.array([min(t, t_hi)]), x)
    return rec.build(events)
