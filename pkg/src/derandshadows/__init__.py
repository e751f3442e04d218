"""Derandomized shallow shadows: greedy derandomization of brickwork Clifford
measurement circuits for estimating many Pauli observables."""

__version__ = "0.1.0"

from .api import DerandomizedShadows
from .clifford import StateVector, ground_state
from .derandomize import CostParams, RunConfig, cost, derandomize, derandomize_until_covered
from .estimator import MeasurementPlan, build_report
from .models import load_dataset
from .pauli import PauliString, WeightedPauliSet, parse_pauli, parse_pauli_list

__all__ = [
    "__version__",
    "DerandomizedShadows",
    "StateVector",
    "ground_state",
    "CostParams",
    "RunConfig",
    "cost",
    "derandomize",
    "derandomize_until_covered",
    "MeasurementPlan",
    "build_report",
    "load_dataset",
    "PauliString",
    "WeightedPauliSet",
    "parse_pauli",
    "parse_pauli_list",
]
