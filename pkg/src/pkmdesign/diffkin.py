"""First-order kinematics: parallel matrix A, serial matrix B and Jacobian J.

Differentiating the closure ``f(pose, joints) = 0`` gives
``A @ pose_rate = B @ joint_rate`` with

* ``A[i] = 1/2 d f_i / d pose`` (the parallel matrix),
* ``B[i, i] = -1/2 d f_i / d rho_i`` (the serial matrix, diagonal for every model),

so ``J = A^-1 B`` maps joint rates to tool velocities. The common factor 1/2
cancels in J and keeps the entries in plain lengths. ``det B = 0`` is a serial
singularity, ``det A = 0`` a parallel one.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidConfigurationError, OracleInvalidError
from .mechanisms import (
    Kind,
    _joint_array,
    _pose_array,
    _rpr_gradient,
    check_working_mode,
    enumerate_assembly_modes,
    forward_kinematics,
    leg_vectors_batch,
    residual_batch,
    working_mode_of,
)

#: closure residual accepted by :func:`kinematic_matrices`, as a fraction of scale^2
CLOSURE_RTOL = 1e-6


@dataclass(frozen=True)
class KinematicMatrices:
    A: np.ndarray
    B: np.ndarray
    J: np.ndarray | None
    singular: bool  # True when A is singular and J is undefined


def matrices_batch(model, poses, joints):
    """Stacks ``(A, b)`` with ``A`` of shape ``(N, n, d)`` and ``b`` the diagonal of B."""
    poses = np.asarray(poses, dtype=float)
    joints = np.asarray(joints, dtype=float)
    if model.kind is Kind.THREE_RPR:
        A = _rpr_gradient(model, poses, joints)
        return A, joints.copy()
    d = leg_vectors_batch(model, poses, joints)
    if model.kind is Kind.BIGLIDE:
        b = d[..., 0]
    elif model.kind is Kind.ORTHOGLIDE:
        b = np.diagonal(d, axis1=-2, axis2=-1).copy()
    else:
        b = joints.copy()
    return d, b


def jacobian_batch(model, poses, joints):
    """``(J, singular)`` stacks; singular rows of J are NaN."""
    A, b = matrices_batch(model, poses, joints)
    return linalg.solve_adjugate(A, b[..., None, :] * np.eye(model.n_legs))


def kinematic_matrices(model, pose, joints):
    """A, B and J at one assembled configuration.

    Raises:
        InvalidConfigurationError: the closure residual exceeds ``1e-6 * scale^2``.
    """
    p = _pose_array(model, pose)
    q = _joint_array(model, joints)
    res = residual_batch(model, p[None], q[None])[0]
    if np.max(np.abs(res)) > CLOSURE_RTOL * model.scale**2:
        raise InvalidConfigurationError(f"configuration not closed (residual {res.tolist()})")
    A, b = matrices_batch(model, p[None], q[None])
    A, B = A[0], np.diag(b[0])
    J, singular = linalg.solve_adjugate(A, B)
    singular = bool(singular)
    return KinematicMatrices(A=A, B=B, J=None if singular else J, singular=singular)


def homogenize(J, characteristic_length):
    """Scale the rotational row of a 3-RPR Jacobian so every entry is dimensionless."""
    J = np.array(J, dtype=float)
    J[..., 2, :] *= characteristic_length
    return J


def _nearest(sols, pose):
    return int(np.argmin([np.linalg.norm(s - pose) for s in sols]))


def numeric_jacobian(model, pose, joints, working_mode, step):
    """Central-difference estimate of J from forward kinematics.

    Each joint is perturbed by ``+/- step`` and the pose re-solved on the same
    assembly branch, so the estimate is independent of the analytic A and B.

    Raises:
        ValueError: ``step`` outside ``(0, scale/1000]`` or a working mode
            inconsistent with ``(pose, joints)``.
        OracleInvalidError: a perturbation switched branch.
    """
    p = _pose_array(model, pose)
    q = _joint_array(model, joints)
    if not 0 < step <= model.scale / 1000:
        raise ValueError(f"step must lie in (0, {model.scale / 1000:g}], got {step}")
    mode = check_working_mode(model, working_mode)
    if working_mode_of(model, p, q) != mode:
        raise ValueError("working mode does not match the configuration")

    branch = None
    if model.kind is not Kind.THREE_RPR:
        sols = enumerate_assembly_modes(model, q)
        if len(sols) < 2:
            raise OracleInvalidError("coalesced assembly modes: configuration is parallel-singular")
        branch = _nearest(sols, p) + 1

    n = model.n_legs
    J = np.empty((model.pose_dim, n))
    for k in range(n):
        cols = []
        for sgn in (1.0, -1.0):
            qk = q.copy()
            qk[k] += sgn * step
            if branch is None:
                pk = forward_kinematics(model, qk, seed=p)
            else:
                sols = enumerate_assembly_modes(model, qk)
                if len(sols) < 2 or _nearest(sols, p) + 1 != branch:
                    raise OracleInvalidError(f"assembly branch changed when perturbing joint {k}")
                pk = sols[branch - 1]
            if working_mode_of(model, pk, qk) != mode:
                raise OracleInvalidError(f"working mode changed when perturbing joint {k}")
            cols.append(pk)
        diff = cols[0] - cols[1]
        if model.kind is Kind.THREE_RPR:
            diff[2] = (diff[2] + np.pi) % (2 * np.pi) - np.pi
        J[:, k] = diff / (2 * step)
    return J
