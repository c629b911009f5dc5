"""Loss-tolerant EPR-steering bounds for qubit measurements on Platonic-solid axes."""
from .geometry import BlochVector, MeasurementSet, WernerParams, build_measurement_set
from .loss_bounds import (
    BoundCurve,
    Envelope,
    ResponsePlan,
    critical_purity,
    deterministic_linear,
    deterministic_variance,
    linear_bound_perfect,
    post_selected_curve,
    variance_bound_perfect,
)
from .simulator import Scenario, SimulationReport, run, verdict
from .strategies import optimal_ensembles

__version__ = "0.1.0"

__all__ = [
    "BlochVector",
    "BoundCurve",
    "Envelope",
    "MeasurementSet",
    "ResponsePlan",
    "Scenario",
    "SimulationReport",
    "WernerParams",
    "build_measurement_set",
    "critical_purity",
    "deterministic_linear",
    "deterministic_variance",
    "linear_bound_perfect",
    "optimal_ensembles",
    "post_selected_curve",
    "run",
    "variance_bound_perfect",
    "verdict",
]
