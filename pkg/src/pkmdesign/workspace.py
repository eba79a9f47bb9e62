"""Grid sweeps of kinetostatic metrics, dextrous regions and inscribed cubes.

A sweep evaluates every lattice pose of a :class:`Region` on one working mode.
Cells are stored column-wise in numpy arrays, row-major over the region axes
(first axis slowest), and evaluated in one vectorised pass, so results are
deterministic.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .kinetostatics import batch_metrics
from .mechanisms import Kind, check_working_mode, ik_batch


@dataclass(frozen=True)
class Axis:
    """Closed sampling interval; ``count == 1`` denotes a single value (``lo == hi``)."""

    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("axis sample count must be at least 1")
        if self.count == 1 and self.lo != self.hi:
            raise ValueError("a single-sample axis needs lo == hi")
        if self.count >= 2 and not self.lo < self.hi:
            raise ValueError(f"axis interval must have lo < hi, got [{self.lo}, {self.hi}]")

    def samples(self):
        return np.linspace(self.lo, self.hi, self.count)

    @classmethod
    def point(cls, value):
        return cls(value, value, 1)


@dataclass(frozen=True)
class Region:
    axes: tuple  # one Axis per pose coordinate, in pose order

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))

    @property
    def shape(self):
        return tuple(a.count for a in self.axes)

    @property
    def size(self):
        return math.prod(self.shape)

    def lattice(self):
        """All sample poses, ``(size, dim)``, row-major."""
        grids = np.meshgrid(*(a.samples() for a in self.axes), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    @classmethod
    def cube(cls, center, edge, count, fixed=()):
        """Axis-aligned cube (square in 2-D) of the given edge; ``fixed`` appends point axes."""
        h = 0.5 * edge
        if edge == 0:
            axes = [Axis.point(c) for c in center]
        else:
            axes = [Axis(c - h, c + h, count) for c in center]
        return cls(tuple(axes) + tuple(Axis.point(v) for v in fixed))


def region_for(model, region):
    """Validate ``region`` against the pose layout; a 3-RPR region may omit phi (taken as 0)."""
    axes = tuple(region.axes)
    if model.kind is Kind.THREE_RPR and len(axes) == 2:
        axes = axes + (Axis.point(0.0),)
    if len(axes) != model.pose_dim:
        raise ValueError(f"{model.kind.value} region needs {model.pose_dim} axes, got {len(axes)}")
    return Region(axes)


@dataclass(frozen=True)
class FactorBounds:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo <= self.hi:
            raise ValueError(f"factor bounds need 0 < lo <= hi, got ({self.lo}, {self.hi})")

    def straddles(self, value=1.0):
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class Cell:
    pose: np.ndarray
    reachable: bool
    within_joint_limits: bool
    sigma_min: float | None
    sigma_max: float | None
    kappa: float | None
    classification: str | None


@dataclass(frozen=True)
class WorkspaceGrid:
    region: Region
    working_mode: object
    poses: np.ndarray
    joints: np.ndarray
    reachable: np.ndarray
    within_limits: np.ndarray
    sigma_min: np.ndarray
    sigma_max: np.ndarray
    kappa: np.ndarray
    classes: np.ndarray

    def __len__(self):
        return len(self.poses)

    def cell(self, k):
        if not self.reachable[k]:
            return Cell(self.poses[k], False, False, None, None, None, None)
        return Cell(self.poses[k], True, bool(self.within_limits[k]), float(self.sigma_min[k]),
                    float(self.sigma_max[k]), float(self.kappa[k]), self.classes[k])

    @property
    def cells(self):
        return [self.cell(k) for k in range(len(self))]


def evaluate_poses(model, poses, working_mode, characteristic_length=None, classify=True):
    """Metrics for an arbitrary ``(N, dim)`` stack of poses; the engine behind :func:`sweep_grid`."""
    poses = np.asarray(poses, dtype=float)
    n = len(poses)
    q, reach, _ = ik_batch(model, poses, working_mode)
    smin = np.full(n, np.nan)
    smax = np.full(n, np.nan)
    kappa = np.full(n, np.nan)
    classes = np.full(n, None, dtype=object)
    in_lim = np.zeros(n, dtype=bool)
    if reach.any():
        idx = np.flatnonzero(reach)
        a, b, c, d = batch_metrics(model, poses[idx], q[idx],
                                   characteristic_length=characteristic_length, classify=classify)
        smin[idx], smax[idx], kappa[idx] = a, b, c
        if classify:
            classes[idx] = d
        in_lim[idx] = model.within_limits(q[idx])
    return q, reach, in_lim, smin, smax, kappa, classes


def sweep_grid(model, region, working_mode, characteristic_length=None):
    """Evaluate inverse kinematics and kinetostatic metrics on every lattice pose.

    Unreachable cells keep NaN metrics and ``None`` class; no per-cell failure
    is raised.
    """
    mode = check_working_mode(model, working_mode)
    region = region_for(model, region)
    poses = region.lattice()
    q, reach, in_lim, smin, smax, kappa, classes = evaluate_poses(model, poses, mode,
                                                                  characteristic_length)
    return WorkspaceGrid(region, mode, poses, q, reach, in_lim, smin, smax, kappa, classes)


def dextrous_mask(reachable, within_limits, sigma_min, sigma_max, bounds):
    with np.errstate(invalid="ignore"):
        return (np.asarray(reachable, dtype=bool) & np.asarray(within_limits, dtype=bool)
                & (np.asarray(sigma_min) >= bounds.lo) & (np.asarray(sigma_max) <= bounds.hi))


def dextrous_region(grid, bounds):
    """Boolean mask of cells that are reachable, within limits and inside the factor bounds."""
    return dextrous_mask(grid.reachable, grid.within_limits, grid.sigma_min, grid.sigma_max, bounds)


@dataclass(frozen=True)
class CubeResult:
    found: bool
    center: np.ndarray | None
    edge: float

    @property
    def region_bounds(self):
        if not self.found:
            return None
        return np.stack([self.center - self.edge / 2, self.center + self.edge / 2], axis=-1)


#: verification lattice per cube edge used while searching
VERIFY_COUNT = 9
#: coarse centre lattice per axis
CENTER_COUNT = 5


def default_center_domain(model):
    """Box of candidate cube centres, ``(dim, 2)``."""
    s = model.scale
    if model.kind is Kind.ORTHOGLIDE:
        return np.array([[-0.5 * s, 0.5 * s]] * 3)
    if model.kind is Kind.BIGLIDE:
        return np.array([[-s, s], [0.0, s]])
    c = np.asarray(model.geometry.base_points).mean(axis=0)
    return np.stack([c - s, c + s], axis=-1)


class _CubeChecker:
    """Admissibility of axis-aligned cubes for one model, mode and bound pair."""

    def __init__(self, model, mode, bounds, count, fixed):
        self.model = model
        self.mode = mode
        self.bounds = bounds
        self.fixed = tuple(fixed)
        dim = model.pose_dim - len(self.fixed)
        u = np.linspace(-0.5, 0.5, count)
        unit = np.stack([g.ravel() for g in np.meshgrid(*([u] * dim), indexing="ij")], -1)
        # corners first: most failing cubes fail there, so they are rejected cheaply
        corner = np.all(np.abs(unit) == 0.5, axis=1)
        self.unit = np.concatenate([unit[corner], unit[~corner]])
        self.n_corners = int(corner.sum())

    def poses(self, center, edge, unit=None):
        unit = self.unit if unit is None else unit
        pts = np.asarray(center) + edge * unit
        if self.fixed:
            pts = np.concatenate([pts, np.tile(self.fixed, (len(pts), 1))], axis=-1)
        return pts

    def _passes(self, poses):
        _, reach, in_lim, smin, smax, _, _ = evaluate_poses(self.model, poses, self.mode,
                                                            classify=False)
        return bool(dextrous_mask(reach, in_lim, smin, smax, self.bounds).all())

    def ok(self, center, edge):
        if edge > 0 and not self._passes(self.poses(center, edge, self.unit[:self.n_corners])):
            return False
        return self._passes(self.poses(center, edge))

    def max_edge(self, center, e_hi, tol, at_least=0.0):
        """Bisection for the largest admissible edge at ``center``; 0 if the centre fails.

        Returns 0 early when ``at_least`` (the best edge so far) is not admissible,
        since the candidate cannot win.
        """
        if not self.ok(center, 0.0):
            return 0.0
        lo = 0.0
        if at_least > 0:
            if not self.ok(center, at_least):
                return 0.0
            lo = at_least
        hi = e_hi
        if self.ok(center, hi):
            return hi
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.ok(center, mid):
                lo = mid
            else:
                hi = mid
        return lo


def largest_inscribed_cube(model, working_mode, bounds, center_domain=None, edge_tolerance=None,
                           phi=0.0, count=VERIFY_COUNT):
    """Largest axis-aligned cube (square for planar models) inside the dextrous region.

    Candidate centres come from a ``5^dim`` lattice over ``center_domain``,
    visited nearest to its middle first so ties favour the middle. For each
    the edge is maximised by bisection to ``edge_tolerance`` (default
    ``scale * 1e-3``), checking every point of a ``count^dim`` lattice,
    corners included. The best centre is refined by a compass search. Finally
    the edge is shrunk, if needed, until a lattice twice as dense also passes.
    A 3-RPR square is searched at fixed orientation ``phi``.

    Returns:
        CubeResult with ``found=False`` when no cube of edge at least
        ``edge_tolerance`` exists.
    """
    mode = check_working_mode(model, working_mode)
    tol = model.scale * 1e-3 if edge_tolerance is None else float(edge_tolerance)
    dom = default_center_domain(model) if center_domain is None else np.asarray(center_domain, float)
    fixed = (phi,) if model.kind is Kind.THREE_RPR else ()
    checker = _CubeChecker(model, mode, bounds, count, fixed)
    e_hi = 2.0 * model.scale if model.kind is not Kind.THREE_RPR else 4.0 * model.scale

    best_edge, best_center = 0.0, None
    axes = [np.linspace(lo, hi, CENTER_COUNT) for lo, hi in dom]
    mid = dom.mean(axis=1)
    # nearest-to-middle first, so ties resolve toward the middle of the domain
    candidates = sorted((np.array(c) for c in itertools.product(*axes)),
                        key=lambda c: float(np.linalg.norm(c - mid)))
    for c in candidates:
        e = checker.max_edge(c, e_hi, tol, at_least=best_edge + tol if best_center is not None else 0.0)
        if e > best_edge:
            best_edge, best_center = e, c

    if best_center is None:
        return CubeResult(False, None, 0.0)

    step = float(np.max(dom[:, 1] - dom[:, 0])) / (CENTER_COUNT - 1) / 2
    dim = len(best_center)
    while step >= tol:
        improved = False
        for k, sgn in itertools.product(range(dim), (1.0, -1.0)):
            c = best_center.copy()
            c[k] += sgn * step
            e = checker.max_edge(c, e_hi, tol, at_least=best_edge + tol)
            if e > best_edge:
                best_edge, best_center, improved = e, c, True
        if not improved:
            step *= 0.5

    fine = _CubeChecker(model, mode, bounds, 2 * count - 1, fixed)
    while best_edge >= tol and not fine.ok(best_center, best_edge):
        best_edge -= tol
    if best_edge < tol:
        return CubeResult(False, None, 0.0)
    return CubeResult(True, best_center, float(best_edge))
