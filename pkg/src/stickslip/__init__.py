"""Stick/slip dry-friction oscillator toolkit.

Three mutually verifying solvers for the one-dimensional Coulomb-friction
oscillator (a discrete variational-inequality Euler stepper, an exact
event-driven engine, and a quasistatic approximation), plus Ornstein-
Uhlenbeck forcing noise and least-squares parameter calibration from
displacement/temperature records.
"""

from .model import (
    AnalyticTemperature,
    Event,
    EventKind,
    EventLog,
    ForcingModel,
    FrictionParams,
    HarmonicForcing,
    PerturbedTemperature,
    PhaseLabel,
    SampledTemperature,
    SystemState,
    TemperatureSeries,
    TemperatureSource,
    TemperatureSpringForcing,
    Trajectory,
    constant_temperature,
    eval_forcing,
    friction_force,
    natural_frequency,
)
from .euler import (
    EulerConfig,
    euler_step_two_coeff,
    euler_step_unified,
    shrink,
    simulate_euler,
)
from .events import (
    EngineConfig,
    MaxSubphasesError,
    SubphaseResult,
    dynamic_subphase,
    dynamic_subphase_generic,
    next_departure,
    simulate_events,
)
from .noise import (
    OuPath,
    SeriesParseError,
    load_temperature_series,
    ou_path,
    perturbed_temperature,
)
from .quasistatic import (
    QuasistaticStep,
    admissible_window,
    quasistatic_step,
    simulate_quasistatic,
    stick_levels_on_grid,
)
from .calibrate import (
    PARAM_NAMES,
    CalibrationProblem,
    CalibrationResult,
    FitParams,
    calibrate,
    corrected_displacement,
    model_displacement,
    objective,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
