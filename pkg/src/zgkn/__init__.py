"""Spectral solver for Dirac bound states around a charged ring.

The angular and radial Prufer phases each define a flow on a finite
cylinder; bound states are parameter values where both flows have a
saddle connector with prescribed winding numbers.
"""
from .params import ALPHA_S, ModelParams, SpectroLabel, WindingTarget, spectroscopic_label, validate
from .solver import BoundState, contraction_probe, solve_pair

__all__ = [
    "ALPHA_S",
    "BoundState",
    "ModelParams",
    "SpectroLabel",
    "WindingTarget",
    "contraction_probe",
    "solve_pair",
    "spectroscopic_label",
    "validate",
]
__version__ = "0.1.0"
