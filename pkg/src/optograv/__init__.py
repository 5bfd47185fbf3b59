"""Optomechanical signatures of quantum versus semiclassical gravity."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    NumericalFailure,
    OptogravError,
    SingularGeometryError,
    UnstableSystemError,
    ValidationError,
)
from .gravity import Scenario, scenario_force_set  # noqa: E402
from .merit import theta_argmax, theta_at, theta_star  # noqa: E402
from .params import ParameterSet, derive, preset, validate  # noqa: E402
from .spectrum import response_D, spectrum_baseline, variance  # noqa: E402
from .steady import select_branch, solve_steady, stability_check  # noqa: E402
