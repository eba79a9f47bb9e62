"""Mechanism models, closed-form kinematics and working/assembly modes.

Four planar or translational parallel mechanisms are supported:

* ``BIPOD``: two telescopic struts pivoting on fixed base points.
* ``BIGLIDE``: two fixed-length struts whose lower ends glide on one rail
  (the x axis); slider ``i`` sits at ``(rho_i, 0)``.
* ``THREE_RPR``: planar platform on three telescopic struts, pose ``(x, y, phi)``.
* ``ORTHOGLIDE``: three-axis translational machine, three orthogonal prismatic
  actuators along x, y, z, each joined to the tool point by a leg of length L.

Every leg ``i`` closes a loop ``f_i = |tool point - joint point|^2 - length^2 = 0``.
The vectorised ``*_batch`` helpers evaluate stacks of configurations at once and
back both the scalar API and the workspace sweeps. Lengths are in millimetres,
angles in radians.
"""

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, NoAssemblyError, OutOfReachError, UnsupportedOperationError

#: closures whose discriminant is within this fraction of scale^2 of zero are tangential
TANGENT_RTOL = 1e-12
#: Newton tolerance on the residual for 3-RPR forward kinematics, as a fraction of scale^2
NEWTON_RTOL = 1e-10
NEWTON_MAX_ITER = 50


class Kind(str, enum.Enum):
    BIPOD = "bipod"
    BIGLIDE = "biglide"
    THREE_RPR = "3rpr"
    ORTHOGLIDE = "orthoglide"


@dataclass(frozen=True)
class BipodGeometry:
    base_points: tuple  # ((x1, y1), (x2, y2))

    def __post_init__(self):
        pts = np.asarray(self.base_points, dtype=float)
        if pts.shape != (2, 2):
            raise ValueError("bipod needs two planar base points")
        if np.allclose(pts[0], pts[1], rtol=0.0, atol=0.0):
            raise ValueError("bipod base points must be distinct")
        object.__setattr__(self, "base_points", tuple(map(tuple, pts.tolist())))


@dataclass(frozen=True)
class BiglideGeometry:
    strut_length: float

    def __post_init__(self):
        if not self.strut_length > 0:
            raise ValueError("strut length must be positive")


@dataclass(frozen=True)
class ThreeRPRGeometry:
    base_points: tuple      # three (x, y) anchors in the base frame
    platform_points: tuple  # three (x, y) attachments in the platform frame

    def __post_init__(self):
        a = np.asarray(self.base_points, dtype=float)
        b = np.asarray(self.platform_points, dtype=float)
        if a.shape != (3, 2) or b.shape != (3, 2):
            raise ValueError("3-RPR needs three planar base and platform points")
        e1, e2 = a[1] - a[0], a[2] - a[0]
        spread = max(np.linalg.norm(e1), np.linalg.norm(e2), np.linalg.norm(a[2] - a[1]))
        if spread == 0 or abs(e1[0] * e2[1] - e1[1] * e2[0]) <= 1e-12 * spread**2:
            raise ValueError("3-RPR base points must not be collinear")
        if np.ptp(b, axis=0).max() == 0:
            raise ValueError("3-RPR platform points must not all coincide")
        object.__setattr__(self, "base_points", tuple(map(tuple, a.tolist())))
        object.__setattr__(self, "platform_points", tuple(map(tuple, b.tolist())))


@dataclass(frozen=True)
class OrthoglideGeometry:
    leg_length: float

    def __post_init__(self):
        if not self.leg_length > 0:
            raise ValueError("leg length must be positive")


_GEOMETRY = {
    Kind.BIPOD: BipodGeometry,
    Kind.BIGLIDE: BiglideGeometry,
    Kind.THREE_RPR: ThreeRPRGeometry,
    Kind.ORTHOGLIDE: OrthoglideGeometry,
}
_LEGS = {Kind.BIPOD: 2, Kind.BIGLIDE: 2, Kind.THREE_RPR: 3, Kind.ORTHOGLIDE: 3}
_POSE_AXES = {
    Kind.BIPOD: ("x", "y"),
    Kind.BIGLIDE: ("x", "y"),
    Kind.THREE_RPR: ("x", "y", "phi"),
    Kind.ORTHOGLIDE: ("x", "y", "z"),
}
_TELESCOPIC = {Kind.BIPOD, Kind.THREE_RPR}


@dataclass(frozen=True)
class MechanismModel:
    """One parallel mechanism: its kind, geometry block and joint limits.

    ``joint_limits`` is a tuple of ``(rho_min, rho_max)`` per actuator, or
    ``None`` for unlimited actuators.
    """

    kind: Kind
    geometry: object
    joint_limits: tuple | None = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not isinstance(self.geometry, _GEOMETRY[kind]):
            raise TypeError(f"{kind.value} needs {_GEOMETRY[kind].__name__}")
        if self.joint_limits is not None:
            lim = tuple((float(lo), float(hi)) for lo, hi in self.joint_limits)
            if len(lim) != self.n_legs:
                raise ValueError(f"{kind.value} needs {self.n_legs} joint limits, got {len(lim)}")
            for i, (lo, hi) in enumerate(lim):
                if not lo < hi:
                    raise ValueError(f"joint limit {i}: rho_min must be below rho_max")
            object.__setattr__(self, "joint_limits", lim)

    @property
    def n_legs(self):
        return _LEGS[self.kind]

    @property
    def pose_dim(self):
        return len(_POSE_AXES[self.kind])

    @property
    def pose_axes(self):
        return _POSE_AXES[self.kind]

    @property
    def telescopic(self):
        return self.kind in _TELESCOPIC

    @property
    def scale(self):
        """Characteristic length (mm) used to make tolerances unit-robust."""
        g = self.geometry
        if self.kind is Kind.BIGLIDE:
            return float(g.strut_length)
        if self.kind is Kind.ORTHOGLIDE:
            return float(g.leg_length)
        a = np.asarray(g.base_points)
        return float(max(np.linalg.norm(p - q) for p, q in itertools.combinations(a, 2)))

    def scaled(self, factor):
        """Copy with every length multiplied by ``factor``."""
        g = self.geometry
        if self.kind is Kind.BIGLIDE:
            geom = BiglideGeometry(g.strut_length * factor)
        elif self.kind is Kind.ORTHOGLIDE:
            geom = OrthoglideGeometry(g.leg_length * factor)
        elif self.kind is Kind.BIPOD:
            geom = BipodGeometry(np.asarray(g.base_points) * factor)
        else:
            geom = ThreeRPRGeometry(np.asarray(g.base_points) * factor,
                                    np.asarray(g.platform_points) * factor)
        limits = None
        if self.joint_limits is not None:
            limits = tuple(sorted((lo * factor, hi * factor)) for lo, hi in self.joint_limits)
        return MechanismModel(self.kind, geom, limits)

    def within_limits(self, joints):
        """Elementwise joint-limit flag; works on a vector or an ``(N, n)`` stack."""
        q = np.asarray(joints, dtype=float)
        if self.joint_limits is None:
            return np.ones(q.shape[:-1], dtype=bool)
        lim = np.asarray(self.joint_limits)
        return np.all((q >= lim[:, 0]) & (q <= lim[:, 1]), axis=-1)


def bipod(base_points=((0.0, 0.0), (10.0, 0.0)), joint_limits=None):
    return MechanismModel(Kind.BIPOD, BipodGeometry(base_points), joint_limits)


def biglide(strut_length, joint_limits=None):
    return MechanismModel(Kind.BIGLIDE, BiglideGeometry(strut_length), joint_limits)


def three_rpr(base_points, platform_points, joint_limits=None):
    return MechanismModel(Kind.THREE_RPR, ThreeRPRGeometry(base_points, platform_points), joint_limits)


def orthoglide(leg_length, joint_limits=None):
    return MechanismModel(Kind.ORTHOGLIDE, OrthoglideGeometry(leg_length), joint_limits)


@dataclass(frozen=True)
class WorkingMode:
    """Inverse-kinematic branch: one sign per leg."""

    signs: tuple = field()

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (-1, 1) for s in signs):
            raise ValueError(f"working-mode signs must be -1 or +1, got {self.signs}")
        object.__setattr__(self, "signs", signs)

    def __iter__(self):
        return iter(self.signs)

    def __len__(self):
        return len(self.signs)


@dataclass(frozen=True)
class AssemblyMode:
    """Forward-kinematic branch, 1-based."""

    index: int = 1

    def __post_init__(self):
        if int(self.index) < 1:
            raise ValueError("assembly-mode index is 1-based")
        object.__setattr__(self, "index", int(self.index))


def wrap_angle(phi):
    """Map angles into (-pi, pi]."""
    out = np.mod(np.asarray(phi, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(out == -np.pi, np.pi, out)


def default_working_mode(model):
    """The branch used when a caller names none.

    Orthoglide: all -1, the branch holding the isotropic configuration.
    Biglide: (-1, +1), sliders on either side of the tool.
    """
    if model.kind is Kind.ORTHOGLIDE:
        return WorkingMode((-1, -1, -1))
    if model.kind is Kind.BIGLIDE:
        return WorkingMode((-1, 1))
    return WorkingMode((1,) * model.n_legs)


def check_working_mode(model, mode):
    mode = mode if isinstance(mode, WorkingMode) else WorkingMode(mode)
    if len(mode) != model.n_legs:
        raise ValueError(f"{model.kind.value} needs {model.n_legs} working-mode signs, got {len(mode)}")
    if model.telescopic and any(s != 1 for s in mode):
        raise ValueError(f"{model.kind.value} has a single working mode (all +1)")
    return mode


def _pose_array(model, pose):
    p = np.asarray(pose, dtype=float)
    if p.shape[-1] != model.pose_dim:
        raise ValueError(f"{model.kind.value} pose has {model.pose_dim} coordinates, got {p.shape[-1]}")
    return p


def _joint_array(model, joints):
    q = np.asarray(joints, dtype=float)
    if q.shape[-1] != model.n_legs:
        raise ValueError(f"{model.kind.value} has {model.n_legs} joints, got {q.shape[-1]}")
    return q


def _rot(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def _rpr_points(model, poses):
    """World platform points ``(N, 3, 2)`` and their d/dphi ``(N, 3, 2)``."""
    b = np.asarray(model.geometry.platform_points)
    R = _rot(poses[..., 2])                          # (N, 2, 2)
    Rb = np.einsum("...ij,kj->...ki", R, b)          # (N, 3, 2)
    world = poses[..., None, :2] + Rb
    dphi = np.stack([-Rb[..., 1], Rb[..., 0]], -1)   # E @ R b, E = [[0, -1], [1, 0]]
    return world, dphi


def leg_vectors_batch(model, poses, joints):
    """Vector from each leg's joint-side point to its tool-side point, ``(N, n, 2|3)``."""
    g = model.geometry
    if model.kind is Kind.BIGLIDE:
        d = np.repeat(poses[..., None, :], 2, axis=-2).copy()
        d[..., 0] -= joints
        return d
    if model.kind is Kind.ORTHOGLIDE:
        d = np.repeat(poses[..., None, :], 3, axis=-2).copy()
        idx = np.arange(3)
        d[..., idx, idx] -= joints
        return d
    if model.kind is Kind.BIPOD:
        return poses[..., None, :] - np.asarray(g.base_points)
    world, _ = _rpr_points(model, poses)
    return world - np.asarray(g.base_points)


def _leg_lengths(model, joints):
    if model.kind is Kind.BIGLIDE:
        return np.full(joints.shape, float(model.geometry.strut_length))
    if model.kind is Kind.ORTHOGLIDE:
        return np.full(joints.shape, float(model.geometry.leg_length))
    return joints


def residual_batch(model, poses, joints):
    d = leg_vectors_batch(model, poses, joints)
    length = _leg_lengths(model, joints)
    return np.sum(d * d, axis=-1) - length**2


def constraint_residual(model, pose, joints):
    """Loop-closure residuals ``|tool point - joint point|^2 - length^2`` (mm^2), one per leg.

    Zero in every component exactly when ``(pose, joints)`` is an assembled
    configuration of ``model``.

    Raises:
        ValueError: if ``pose`` or ``joints`` has the wrong dimension.
    """
    p = _pose_array(model, pose)
    q = _joint_array(model, joints)
    if p.ndim != 1 or q.ndim != 1:
        raise ValueError("pose and joints must be vectors")
    return residual_batch(model, p[None], q[None])[0]


def ik_batch(model, poses, mode):
    """Vectorised inverse kinematics.

    Returns ``(joints, reachable, first_bad_leg)`` where ``first_bad_leg`` is -1
    for reachable rows. Unreachable rows hold NaN joints.
    """
    poses = np.asarray(poses, dtype=float)
    signs = np.asarray(mode.signs, dtype=float)
    tiny = TANGENT_RTOL * model.scale**2
    if model.kind is Kind.BIGLIDE:
        L = model.geometry.strut_length
        disc = np.repeat((L * L - poses[..., 1] ** 2)[..., None], 2, axis=-1)
        base = np.repeat(poses[..., :1], 2, axis=-1)
    elif model.kind is Kind.ORTHOGLIDE:
        L = model.geometry.leg_length
        sq = poses**2
        disc = L * L - (sq.sum(axis=-1, keepdims=True) - sq)
        base = poses
    else:
        d = leg_vectors_batch(model, poses, np.zeros(poses.shape[:-1] + (model.n_legs,)))
        q = np.linalg.norm(d, axis=-1)
        reach = np.ones(q.shape[:-1], dtype=bool)
        return q, reach, np.full(q.shape[:-1], -1)
    bad = disc < -tiny
    reach = ~bad.any(axis=-1)
    root = np.sqrt(np.clip(disc, 0.0, None))
    q = base - signs * root
    q = np.where(reach[..., None], q, np.nan)
    first_bad = np.where(reach, -1, np.argmax(bad, axis=-1))
    return q, reach, first_bad


def inverse_kinematics(model, pose, mode=None):
    """Actuated joint coordinates reaching ``pose`` on the working-mode branch.

    Biglide ``rho_i = x - s_i sqrt(L^2 - y^2)``; Orthoglide
    ``rho_i = p_i - s_i sqrt(L^2 - sum of the other two squared coordinates)``;
    telescopic models take the (unique) strut length.

    Joint limits are not enforced here; use :meth:`MechanismModel.within_limits`.

    Raises:
        OutOfReachError: a leg cannot reach the pose; ``leg`` is its 0-based index.
    """
    mode = check_working_mode(model, default_working_mode(model) if mode is None else mode)
    p = _pose_array(model, pose)
    q, reach, bad = ik_batch(model, p[None], mode)
    if not reach[0]:
        raise OutOfReachError(f"pose {p.tolist()} out of reach of leg {int(bad[0])}",
                              leg=int(bad[0]), pose=p)
    return q[0]


def working_mode_of(model, pose, joints):
    """Branch signs of an assembled configuration (+1 on a serial-singular tie)."""
    p = _pose_array(model, pose)
    q = _joint_array(model, joints)
    if model.telescopic:
        return WorkingMode((1,) * model.n_legs)
    coord = np.repeat(p[:1], 2) if model.kind is Kind.BIGLIDE else p
    return WorkingMode(tuple(1 if c >= 0 else -1 for c in coord - q))


def enumerate_working_modes(model):
    """Every working mode of ``model``, lexicographic with -1 before +1."""
    if model.telescopic:
        return [WorkingMode((1,) * model.n_legs)]
    return [WorkingMode(s) for s in itertools.product((-1, 1), repeat=model.n_legs)]


def _tangent_pair(center, offset, h2, tiny):
    """Solutions ``center +/- sqrt(h2) * offset``, merged when tangential."""
    if h2 < -tiny:
        return []
    if abs(h2) <= tiny:
        return [center]
    h = math.sqrt(h2)
    return [center + h * offset, center - h * offset]


def _assemblies_biglide(model, q):
    L = model.geometry.strut_length
    if q[0] == q[1]:
        # coincident sliders: the tool may sit anywhere on a circle
        raise NoAssemblyError("coincident sliders: closures form a continuum")
    half = 0.5 * (q[1] - q[0])
    center = np.array([0.5 * (q[0] + q[1]), 0.0])
    return _tangent_pair(center, np.array([0.0, 1.0]), L * L - half * half, TANGENT_RTOL * L * L)


def _assemblies_bipod(model, q):
    if np.any(q < 0):
        return []
    P = np.asarray(model.geometry.base_points)
    e = P[1] - P[0]
    d = np.linalg.norm(e)
    e = e / d
    a = (q[0] ** 2 - q[1] ** 2 + d * d) / (2 * d)
    left = np.array([-e[1], e[0]])
    return _tangent_pair(P[0] + a * e, left, q[0] ** 2 - a * a, TANGENT_RTOL * d * d)


def _assemblies_orthoglide(model, q):
    L = model.geometry.leg_length
    c = np.diag(q)  # sphere centres rho_i e_i
    ex = c[1] - c[0]
    d = np.linalg.norm(ex)
    if d == 0:
        raise NoAssemblyError("two actuators at the origin: closures form a continuum")
    ex /= d
    r3 = c[2] - c[0]
    i = ex @ r3
    ey = r3 - i * ex
    j = np.linalg.norm(ey)
    if j <= 1e-15 * L:
        raise NoAssemblyError("collinear sphere centres: closures form a continuum")
    ey /= j
    ez = np.cross(ex, ey)
    # equal radii L simplify the usual trilateration formulas
    x = 0.5 * d
    y = (i * i + j * j) / (2 * j) - i * x / j
    sols = _tangent_pair(c[0] + x * ex + y * ey, ez, L * L - x * x - y * y, TANGENT_RTOL * L * L)
    return sorted(sols, key=lambda p: float(p.sum()))


def enumerate_assembly_modes(model, joints):
    """All poses closing the loops for ``joints``, in assembly-mode order.

    Biglide and bipod: the solution on the upper (left of base 1 -> base 2) side
    first, then its mirror image. Orthoglide: ascending ``x + y + z``. A
    tangential closure is returned once. An empty list means no closure.

    Raises:
        NoAssemblyError: the closures form a continuum (coincident biglide
            sliders, or Orthoglide sphere centres on one line).
        UnsupportedOperationError: for the 3-RPR, whose assembly modes are not enumerated.
    """
    q = _joint_array(model, joints)
    if model.kind is Kind.BIGLIDE:
        return _assemblies_biglide(model, q)
    if model.kind is Kind.BIPOD:
        return _assemblies_bipod(model, q)
    if model.kind is Kind.ORTHOGLIDE:
        return _assemblies_orthoglide(model, q)
    raise UnsupportedOperationError("assembly-mode enumeration is not supported for the 3-RPR")


def _rpr_newton(model, q, seed):
    scale = model.scale
    tol = NEWTON_RTOL * scale**2
    x = np.asarray(seed, dtype=float).copy()

    def res(x):
        return residual_batch(model, x[None], q[None])[0]

    f = res(x)
    for it in range(1, NEWTON_MAX_ITER + 1):
        if np.max(np.abs(f)) <= tol:
            # one polishing step: quadratic convergence takes the error far below tol
            G = 2.0 * _rpr_gradient(model, x[None], q[None])[0]
            step = np.linalg.lstsq(G, f, rcond=None)[0]
            y = x - step
            if np.max(np.abs(res(y))) <= np.max(np.abs(f)):
                x = y
            x[2] = float(wrap_angle(x[2]))
            return x
        G = 2.0 * _rpr_gradient(model, x[None], q[None])[0]
        step = np.linalg.lstsq(G, f, rcond=None)[0]
        norm0 = np.linalg.norm(f)
        alpha = 1.0
        while alpha > 1e-6:
            y = x - alpha * step
            fy = res(y)
            if np.linalg.norm(fy) < norm0:
                break
            alpha *= 0.5
        x, f = y, fy
    if np.max(np.abs(f)) <= tol:
        x[2] = float(wrap_angle(x[2]))
        return x
    raise ConvergenceError(f"3-RPR forward kinematics did not converge in {NEWTON_MAX_ITER} iterations",
                           iterations=NEWTON_MAX_ITER)


def _rpr_gradient(model, poses, joints):
    d = leg_vectors_batch(model, poses, joints)
    _, dphi = _rpr_points(model, poses)
    return np.concatenate([d, np.sum(d * dphi, axis=-1, keepdims=True)], axis=-1)


def forward_kinematics(model, joints, mode=1, seed=None):
    """Tool pose for the given joints on assembly-mode branch ``mode``.

    For the 3-RPR ``seed`` (a pose) is required and a damped Newton iteration
    replaces the branch selection.

    Raises:
        NoAssemblyError: no closure exists, or ``mode`` exceeds the number of branches.
        ConvergenceError: 3-RPR Newton iteration failed.
    """
    q = _joint_array(model, joints)
    if model.kind is Kind.THREE_RPR:
        if seed is None:
            raise ValueError("3-RPR forward kinematics needs a seed pose")
        if np.any(q < 0):
            raise NoAssemblyError("telescopic joints must be non-negative")
        return _rpr_newton(model, q, _pose_array(model, seed))
    index = mode.index if isinstance(mode, AssemblyMode) else AssemblyMode(mode).index
    sols = enumerate_assembly_modes(model, q)
    if not sols:
        raise NoAssemblyError(f"joints {q.tolist()} admit no assembly")
    if len(sols) == 1:
        # coalesced branches at a parallel singularity
        return sols[0]
    if index > len(sols):
        raise NoAssemblyError(f"assembly mode {index} does not exist ({len(sols)} branches)")
    return sols[index - 1]
