"""Parameter identification from displacement/temperature records.

Fits (z0, K, beta, f_d, f_s) by least squares: the quasistatic model is run
on the measured temperature record, the modeled displacement is corrected
for elastic bearing shear (z = x + F/K_BP with known bearing stiffness
K_BP), and the squared mismatch against the measured displacement is
integrated over the record,

    err = sum_i (z0 + z_model(t_i) - z_obs(t_i))^2 * dt_i.

The minimizer is a seeded rand/1/bin differential evolution over a box: the
(f_d, f_s) pair is reparameterized so the search space stays rectangular
while f_d <= f_s always holds.  Mass is fixed to 1: the quasistatic output
depends on it only through the slip duration pi*sqrt(m/K), far below any
realistic acquisition cadence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .model import TemperatureSeries
from .quasistatic import stick_levels_on_grid

__all__ = [
    "FitParams",
    "CalibrationProblem",
    "CalibrationResult",
    "corrected_displacement",
    "model_displacement",
    "objective",
    "calibrate",
    "PARAM_NAMES",
]

PARAM_NAMES = ("z0", "K", "beta", "f_d", "f_s")

_DE_POP_PER_DIM = 15
_DE_CR = 0.9
_DE_F = 0.7


class FitParams(NamedTuple):
    z0: float
    K: float
    beta: float
    f_d: float
    f_s: float


@dataclass
class CalibrationProblem:
    """Observed record, parameter box and optimizer budget.

    ``bounds`` maps each of ``PARAM_NAMES`` to (lo, hi).  ``shear_force``
    selects the bearing correction: "friction" uses the transmitted friction
    force (the applied force during sticks), "zero" disables the correction.
    """

    temps: TemperatureSeries
    displs: np.ndarray
    bounds: dict[str, tuple[float, float]]
    K_BP: float = 2.0e6
    budget: int = 20_000
    seed: int = 0
    shear_force: str = "friction"

    def __post_init__(self):
        self.displs = np.asarray(self.displs, dtype=float)
        if len(self.displs) != len(self.temps.times):
            raise ValueError(
                f"displacement series length {len(self.displs)} does not match "
                f"temperature series length {len(self.temps.times)}"
            )
        if len(self.displs) < 2:
            raise ValueError("need at least two samples")
        if self.K_BP <= 0:
            raise ValueError("K_BP must be positive")
        if self.shear_force not in ("friction", "zero"):
            raise ValueError(f"unknown shear_force mode {self.shear_force!r}")
        missing = [k for k in PARAM_NAMES if k not in self.bounds]
        if missing:
            raise ValueError(f"missing bounds for {missing}")
        for name in PARAM_NAMES:
            lo, hi = self.bounds[name]
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds for {name} must be finite with lo < hi")
        if self.bounds["K"][0] <= 0:
            raise ValueError("K bounds must be positive")
        if self.bounds["f_d"][0] < 0:
            raise ValueError("f_d bounds must be nonnegative")
        lo_fd = self.bounds["f_d"][0]
        hi_fs = self.bounds["f_s"][1]
        if lo_fd > hi_fs:
            raise ValueError("f_d <= f_s is infeasible for these bounds")

    def dt_weights(self) -> np.ndarray:
        dts = np.diff(self.temps.times)
        return np.concatenate((dts, dts[-1:]))


@dataclass
class CalibrationResult:
    params: FitParams
    residual: float
    evaluations: int
    history: np.ndarray = field(repr=False)


def corrected_displacement(x, friction_force, K_BP: float):
    """Observed displacement including the elastic bearing shear x + F/K_BP."""
    if K_BP <= 0:
        raise ValueError("K_BP must be positive")
    return x + friction_force / K_BP


def model_displacement(params: FitParams, prob: CalibrationProblem) -> np.ndarray:
    """Quasistatic model displacement (shear-corrected, without z0 offset)
    at the problem's sample times.

    The model starts at the zero-spring-force level x(0) = beta*T(0), so the
    run begins stuck; the z0 offset absorbs the resulting anchor.
    """
    _, K, beta, f_d, f_s = params
    temps = prob.temps.temps
    x0 = beta * temps[0]
    levels = stick_levels_on_grid(temps, x0, K, beta, f_d, f_s)
    if prob.shear_force == "zero":
        return levels
    stick_force = K * (beta * temps - levels)
    return corrected_displacement(levels, stick_force, prob.K_BP)


def objective(params, prob: CalibrationProblem) -> float:
    """Integrated squared mismatch of the candidate against the record.

    Infeasible or degenerate candidates (non-finite model output) yield +inf
    so derivative-free optimizers treat them as infeasible.
    """
    params = FitParams(*params)
    if not (params.K > 0 and 0 <= params.f_d <= params.f_s):
        return math.inf
    z = params.z0 + model_displacement(params, prob)
    if not np.all(np.isfinite(z)):
        return math.inf
    r = z - prob.displs
    return float(np.sum(r * r * prob.dt_weights()))


# --------------------------------------------------------------------------
# Box reparameterization: f_d <= f_s inside a rectangle
# --------------------------------------------------------------------------

def _from_unit(u: np.ndarray, bounds: dict[str, tuple[float, float]]) -> FitParams:
    """Map the unit cube onto the feasible set (bijective for fixed bounds).

    z0, K, beta scale affinely; f_d spans its box clipped to stay below
    hi(f_s); f_s spans [max(lo_fs, f_d), hi_fs], which keeps f_d <= f_s while
    filling both boxes.
    """
    lo_z, hi_z = bounds["z0"]
    lo_K, hi_K = bounds["K"]
    lo_b, hi_b = bounds["beta"]
    lo_fd, hi_fd = bounds["f_d"]
    lo_fs, hi_fs = bounds["f_s"]
    z0 = lo_z + u[0] * (hi_z - lo_z)
    K = lo_K + u[1] * (hi_K - lo_K)
    beta = lo_b + u[2] * (hi_b - lo_b)
    fd_hi = min(hi_fd, hi_fs)
    f_d = lo_fd + u[3] * (fd_hi - lo_fd)
    fs_lo = max(lo_fs, f_d)
    f_s = fs_lo + u[4] * (hi_fs - fs_lo)
    return FitParams(z0, K, beta, f_d, f_s)


def _to_unit(params: FitParams, bounds: dict[str, tuple[float, float]]) -> np.ndarray:
    """Inverse of :func:`_from_unit` (used to verify bijectivity)."""
    lo_z, hi_z = bounds["z0"]
    lo_K, hi_K = bounds["K"]
    lo_b, hi_b = bounds["beta"]
    lo_fd, hi_fd = bounds["f_d"]
    lo_fs, hi_fs = bounds["f_s"]
    fd_hi = min(hi_fd, hi_fs)
    fs_lo = max(lo_fs, params.f_d)
    span = lambda v, lo, hi: 0.0 if hi == lo else (v - lo) / (hi - lo)
    return np.array([
        span(params.z0, lo_z, hi_z),
        span(params.K, lo_K, hi_K),
        span(params.beta, lo_b, hi_b),
        span(params.f_d, lo_fd, fd_hi),
        span(params.f_s, fs_lo, hi_fs),
    ])


# --------------------------------------------------------------------------
# Differential evolution (rand/1/bin)
# --------------------------------------------------------------------------

def calibrate(prob: CalibrationProblem) -> CalibrationResult:
    """Minimize the record mismatch with seeded differential evolution.

    rand/1/bin, population 15 per dimension, CR = 0.9, F = 0.7; the budget
    caps objective evaluations exactly.  Deterministic under the problem's
    seed.
    """
    dim = len(PARAM_NAMES)
    pop_size = _DE_POP_PER_DIM * dim
    if prob.budget < pop_size:
        raise ValueError(
            f"budget {prob.budget} below the population minimum {pop_size}"
        )
    rng = np.random.default_rng(prob.seed)
    pop = rng.random((pop_size, dim))
    fitness = np.empty(pop_size)
    history = np.empty(prob.budget)
    best = math.inf
    evals = 0
    for i in range(pop_size):
        fitness[i] = objective(_from_unit(pop[i], prob.bounds), prob)
        best = min(best, fitness[i])
        history[evals] = best
        evals += 1

    idx = np.arange(pop_size)
    while evals < prob.budget:
        for i in range(pop_size):
            if evals >= prob.budget:
                break
            r1, r2, r3 = rng.choice(idx[idx != i], size=3, replace=False)
            mutant = np.clip(pop[r1] + _DE_F * (pop[r2] - pop[r3]), 0.0, 1.0)
            cross = rng.random(dim) < _DE_CR
            cross[rng.integers(dim)] = True
            trial = np.where(cross, mutant, pop[i])
            f_trial = objective(_from_unit(trial, prob.bounds), prob)
            if f_trial <= fitness[i]:
                pop[i] = trial
                fitness[i] = f_trial
            best = min(best, f_trial)
            history[evals] = best
            evals += 1

    winner = int(np.argmin(fitness))
    return CalibrationResult(
        params=_from_unit(pop[winner], prob.bounds),
        residual=float(fitness[winner]),
        evaluations=evals,
        history=history[:evals],
    )
