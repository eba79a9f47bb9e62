"""Kinetostatic design tools for parallel kinematic machines.

Closed-form kinematics for four mechanisms (bipod, biglide, planar 3-RPR,
Orthoglide), Jacobian conditioning and manipulability ellipsoids, workspace
maps and the dimensional synthesis of the Orthoglide for a prescribed cube.
"""

from .diffkin import KinematicMatrices, kinematic_matrices, numeric_jacobian
from .kinetostatics import (
    Ellipsoid,
    KinetostaticReport,
    SingularityClass,
    classify_configuration,
    conditioning_index,
    evaluate,
    force_amplification_factors,
    manipulability_ellipsoid,
    velocity_amplification_factors,
)
from .mechanisms import (
    AssemblyMode,
    Kind,
    MechanismModel,
    WorkingMode,
    biglide,
    bipod,
    constraint_residual,
    enumerate_assembly_modes,
    enumerate_working_modes,
    forward_kinematics,
    inverse_kinematics,
    orthoglide,
    three_rpr,
)
from .synthesis import SynthesisResult, SynthesisSpec, joint_ranges_for_region, synthesize_orthoglide
from .workspace import (
    Axis,
    CubeResult,
    FactorBounds,
    Region,
    WorkspaceGrid,
    dextrous_region,
    largest_inscribed_cube,
    sweep_grid,
)

__version__ = "0.1.0"
