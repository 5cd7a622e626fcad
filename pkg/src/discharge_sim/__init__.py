"""Simulator and property-verification harness for charged-carrier
transport in a narrow capacitor gap: elliptic potential solve coupled to
parabolic drift-diffusion of two carrier densities, with a truncated
auxiliary variant, a spectral cross-check, manufactured-solution
verification, and run-time monitors.
"""

__version__ = "0.1.0"

from .geometry import BoundaryTag, DomainSpec, Mesh, Rectangle, TouchDown, build_mesh
from .model import PhysParams, State, StreamFunction, VelocityField, Zero, build_velocity, init_state
from .transport import AuxiliaryM, OriginalF, StepConfig, Trajectory, advance_step, run_simulation

__all__ = [
    "__version__",
    "BoundaryTag", "DomainSpec", "Mesh", "Rectangle", "TouchDown", "build_mesh",
    "PhysParams", "State", "StreamFunction", "VelocityField", "Zero",
    "build_velocity", "init_state",
    "AuxiliaryM", "OriginalF", "StepConfig", "Trajectory", "advance_step",
    "run_simulation",
]
