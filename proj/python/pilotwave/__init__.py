"""Pilot-wave trajectories for perturbed two-dimensional oscillator states."""

from ._core import (
    PERIOD,
    IntegrationError,
    InvalidArgument,
    InvalidSpec,
    NodeProximity,
    ParseError,
    Trajectory,
    WaveFunctionSpec,
    __version__,
    angular_drift_rate,
    born_density,
    canonical_points,
    classify,
    coverage,
    eigenstate,
    grad_psi,
    hbar,
    integrate,
    phase_set_names,
    psi,
    run_scenario,
    sample_ensemble,
    scenario_names,
    scenario_text,
    square_cohort,
    velocity,
)

__all__ = [
    "PERIOD",
    "IntegrationError",
    "InvalidArgument",
    "InvalidSpec",
    "NodeProximity",
    "ParseError",
    "Trajectory",
    "WaveFunctionSpec",
    "__version__",
    "angular_drift_rate",
    "born_density",
    "canonical_points",
    "classify",
    "coverage",
    "eigenstate",
    "grad_psi",
    "hbar",
    "integrate",
    "phase_set_names",
    "psi",
    "run_scenario",
    "sample_ensemble",
    "scenario_names",
    "scenario_text",
    "square_cohort",
    "velocity",
]
