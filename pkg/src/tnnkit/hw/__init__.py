"""Hardware back end: netlist emission, netlist simulation, PPA estimation."""

from .emit import DEFAULT_EMISSION_CAP, EmissionError, emit_netlist
from .netlist import Gate, Netlist, StructuralError, cell_library, lint, parse_netlist
from .ppa import PpaReport, TechModel, TECH_MODELS, estimate_gates, estimate_ppa, tech_model
from .sim import CompiledNetlist, simulate_netlist, simulate_netlist_batch

__all__ = [
    "CompiledNetlist",
    "DEFAULT_EMISSION_CAP",
    "EmissionError",
    "Gate",
    "Netlist",
    "PpaReport",
    "StructuralError",
    "TECH_MODELS",
    "TechModel",
    "cell_library",
    "emit_netlist",
    "estimate_gates",
    "estimate_ppa",
    "lint",
    "parse_netlist",
    "simulate_netlist",
    "simulate_netlist_batch",
    "tech_model",
]
