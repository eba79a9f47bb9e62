"""Dimensional synthesis of the Orthoglide for a prescribed cubic workspace.

The Jacobian depends only on length ratios, so the admissible cube scales
linearly with the leg length. One cube search at unit leg length fixes the
ratio ``edge / L``; any prescribed edge then gives ``L`` directly, and the
joint ranges follow from inverse kinematics over the final cube.
"""

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleSpecError, OutOfReachError
from .mechanisms import WorkingMode, check_working_mode, ik_batch, orthoglide
from .workspace import FactorBounds, Region, evaluate_poses, largest_inscribed_cube, region_for

SYNTHESIS_MODE = WorkingMode((-1, -1, -1))


@dataclass(frozen=True)
class SynthesisSpec:
    cube_edge: float
    bounds: FactorBounds = field(default_factory=lambda: FactorBounds(0.6, 1.7))
    lattice: int = 9  # verification points per cube edge

    def __post_init__(self):
        if not self.cube_edge > 0:
            raise ValueError("cube edge must be positive")
        if self.lattice < 2:
            raise ValueError("verification lattice needs at least 2 points per edge")


@dataclass(frozen=True)
class SynthesisResult:
    leg_length: float
    cube_center: np.ndarray
    cube_edge: float
    joint_ranges: np.ndarray          # (3, 2) rows of [min, max]
    achieved_factor_range: tuple      # (min sigma_min, max sigma_max) over the cube
    lattice: int
    unit_edge: float                  # admissible edge at unit leg length

    @property
    def model(self):
        """The synthesised machine, with the joint ranges as its limits."""
        return orthoglide(self.leg_length, joint_limits=[tuple(r) for r in self.joint_ranges])

    def region(self, count=None):
        return Region.cube(self.cube_center, self.cube_edge, count or self.lattice)

    def report(self):
        return {
            "L": self.leg_length,
            "cube_edge": self.cube_edge,
            "cube_center": self.cube_center.tolist(),
            "joint_ranges": self.joint_ranges.tolist(),
            "achieved_factor_range": list(self.achieved_factor_range),
            "lattice_density": self.lattice,
            "unit_edge": self.unit_edge,
        }


def joint_ranges_for_region(model, region, working_mode):
    """Per-actuator ``[min, max]`` of the inverse kinematics over the region lattice.

    Raises:
        OutOfReachError: some lattice pose is unreachable; ``pose`` carries it.
    """
    mode = check_working_mode(model, working_mode)
    poses = region_for(model, region).lattice()
    q, reach, bad = ik_batch(model, poses, mode)
    if not reach.all():
        k = int(np.flatnonzero(~reach)[0])
        raise OutOfReachError(f"lattice pose {poses[k].tolist()} out of reach of leg {int(bad[k])}",
                              leg=int(bad[k]), pose=poses[k])
    return np.stack([q.min(axis=0), q.max(axis=0)], axis=-1)


@functools.lru_cache(maxsize=32)
def _unit_cube(lo, hi, lattice):
    """Cube search at unit leg length; it depends only on the bounds and the lattice."""
    cube = largest_inscribed_cube(orthoglide(1.0), SYNTHESIS_MODE, FactorBounds(lo, hi), count=lattice)
    return cube.found, (None if cube.center is None else tuple(cube.center)), cube.edge


def synthesize_orthoglide(spec):
    """Leg length, cube placement and joint ranges meeting ``spec``.

    Raises:
        InfeasibleSpecError: the bounds exclude the isotropic value 1, or no
            admissible cube exists at unit leg length.
    """
    if not spec.bounds.straddles(1.0):
        raise InfeasibleSpecError(
            f"bounds [{spec.bounds.lo}, {spec.bounds.hi}] exclude the isotropic factor 1")
    found, center, unit_edge = _unit_cube(spec.bounds.lo, spec.bounds.hi, spec.lattice)
    if not found:
        raise InfeasibleSpecError("no admissible cube at unit leg length")

    L = spec.cube_edge / unit_edge
    center = np.array(center) * L
    model = orthoglide(L)
    region = Region.cube(center, spec.cube_edge, spec.lattice)
    ranges = joint_ranges_for_region(model, region, SYNTHESIS_MODE)
    _, _, _, smin, smax, _, _ = evaluate_poses(model, region.lattice(), SYNTHESIS_MODE)
    return SynthesisResult(
        leg_length=L,
        cube_center=center,
        cube_edge=float(spec.cube_edge),
        joint_ranges=ranges,
        achieved_factor_range=(float(smin.min()), float(smax.max())),
        lattice=spec.lattice,
        unit_edge=unit_edge,
    )
