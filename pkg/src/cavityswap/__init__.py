"""
Simulator for a cavity-mediated adiabatic-passage SWAP gate (and its CNOT
extension) between two five-level atoms in a single-mode cavity.

Units are dimensionless throughout: times in the pulse width Tp, rates in 1/Tp.
"""
__version__ = "0.1.0"

from .darkstates import analyze_step, dark7, dark16, kernel_residual
from .gateanalysis import (CNOT, IDENTITY, SWAP, GateResult, evaluate_gate, gate_fidelity, parameter_scan,
                           physical_estimates)
from .hamiltonian import HamiltonianModel, LossParams
from .hilbert import AtomLevel, Basis, BasisState, StateVector, block_partition, build_basis
from .propagator import GateMatrix, TimeGrid, Trajectory, default_grid, gate_matrix, propagate
from .pulses import Pulse, PulseEnvelope, Schedule, Step, Transition, build_schedule, schedule_diagnostics

__all__ = [
    "AtomLevel", "Basis", "BasisState", "StateVector", "block_partition", "build_basis",
    "Pulse", "PulseEnvelope", "Schedule", "Step", "Transition", "build_schedule", "schedule_diagnostics",
    "HamiltonianModel", "LossParams",
    "GateMatrix", "TimeGrid", "Trajectory", "default_grid", "gate_matrix", "propagate",
    "analyze_step", "dark7", "dark16", "kernel_residual",
    "CNOT", "IDENTITY", "SWAP", "GateResult", "evaluate_gate", "gate_fidelity", "parameter_scan",
    "physical_estimates",
]
