"""Shortcut-to-adiabaticity transport with an overhead crane."""

from .model import (CraneParams, LoadState, ModelValidityError, ProtocolKind, SimTrace,
                    TransportTask, TrolleyProtocol, integrate)
from .sta import PolynomialAnsatz, design_alpha, sta_protocol, trolley_from_alpha
from .optimal import (OCTSolution, minimal_consumption_bound, optimal_protocol,
                      short_time_asymptote, simple_lower_bound, verify_pmp)
from .energy import EnergyReport, PowerTrace, consumption, peak_power_bounds, power_trace
from .largeangle import (ExcitationResult, excitation_scan, final_excitation,
                         optimize_excitation)

__all__ = [
    "CraneParams", "LoadState", "ModelValidityError", "ProtocolKind", "SimTrace", "TransportTask",
    "TrolleyProtocol", "integrate", "PolynomialAnsatz", "design_alpha", "sta_protocol",
    "trolley_from_alpha", "OCTSolution", "minimal_consumption_bound", "optimal_protocol",
    "short_time_asymptote", "simple_lower_bound", "verify_pmp", "EnergyReport", "PowerTrace",
    "consumption", "peak_power_bounds", "power_trace", "ExcitationResult", "excitation_scan",
    "final_excitation", "optimize_excitation",
]
