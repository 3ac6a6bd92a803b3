"""Two-photon resonant four-wave mixing on a periodic cell lattice.

Split-step propagation of the two-photon wavefunction, closed-form
solutions, mode-space and Fock-space reference integrators, and a
scenario harness with a command-line frontend.
"""
from .analytic import PhysicalParams, derive_kappa, xi_after_full_cycle
from .config import SimConfig
from .lattice import (
    Envelope,
    Lattice,
    ModeCoefficients,
    TwoPhotonState,
    diagonal_entangled_input,
    from_modes,
    make_gaussian_envelope,
    make_point_envelope,
    separable_input,
    to_modes,
)
from .propagator import MediumMask, StepPlan, Trajectory, run, step

__version__ = "0.1.0"

__all__ = [
    "Envelope", "Lattice", "MediumMask", "ModeCoefficients", "PhysicalParams", "SimConfig",
    "StepPlan", "Trajectory", "TwoPhotonState", "derive_kappa", "diagonal_entangled_input",
    "from_modes", "make_gaussian_envelope", "make_point_envelope", "run", "separable_input",
    "step", "to_modes", "xi_after_full_cycle",
]
