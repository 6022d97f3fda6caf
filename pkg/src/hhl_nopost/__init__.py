"""HHL linear-system solver simulation with and without ancilla postselection."""

__version__ = "0.1.0"

from .circuit import CircuitSpec, FullState, RotationMode, extract_branches, run_hhl_circuit
from .estimator import EstimateWithError, SamplingPlan, ShotTally
from .families import PauliPolynomial, PauliString, TridiagSpec, postselection_free_check
from .numkit import EigenDecomposition, HermitianOperator, eigh
from .spectral import HHLBranches, SpectralProblem, classical_solution, hhl_branches

__all__ = [
    "CircuitSpec",
    "EigenDecomposition",
    "EstimateWithError",
    "FullState",
    "HHLBranches",
    "HermitianOperator",
    "PauliPolynomial",
    "PauliString",
    "RotationMode",
    "SamplingPlan",
    "ShotTally",
    "SpectralProblem",
    "TridiagSpec",
    "classical_solution",
    "eigh",
    "extract_branches",
    "hhl_branches",
    "postselection_free_check",
    "run_hhl_circuit",
]
