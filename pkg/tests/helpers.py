"""Shared model fixtures, random configuration samplers and independent oracles."""

import numpy as np

from pkmdesign.diffkin import homogenize, jacobian_batch, matrices_batch
from pkmdesign.mechanisms import biglide, bipod, enumerate_working_modes, ik_batch, orthoglide, three_rpr

RPR_BASE = [[0.0, 0.0], [10.0, 0.0], [3.0, 8.0]]
RPR_PLATFORM = [[-1.0, -1.0], [1.0, -1.0], [0.0, 1.0]]


def models():
    return {
        "bipod": bipod([[0.0, 0.0], [10.0, 0.0]]),
        "biglide": biglide(5.0),
        "3rpr": three_rpr(RPR_BASE, RPR_PLATFORM),
        "orthoglide": orthoglide(10.0),
    }


def pose_box(model):
    s = model.scale
    name = model.kind.value
    if name == "bipod":
        return np.array([[-5.0, 15.0], [-10.0, 10.0]])
    if name == "biglide":
        return np.array([[-s, s], [-s, s]])
    if name == "3rpr":
        return np.array([[0.0, 10.0], [0.0, 8.0], [-np.pi, np.pi]])
    return np.array([[-s, s]] * 3)


def full_kappa(model, J):
    """Conditioning of the (homogenised for 3-RPR) Jacobian stack."""
    if model.kind.value == "3rpr":
        J = homogenize(J, model.scale)
    s = np.linalg.svd(J, compute_uv=False)
    return s[..., 0] / s[..., -1]


def random_configurations(model, n, rng, kappa_max=1e3):
    """``n`` reachable configurations (poses, joints, modes) with finite, bounded conditioning."""
    box = pose_box(model)
    modes = enumerate_working_modes(model)
    poses, joints, picked = [], [], []
    while len(poses) < n:
        m = 4 * n
        p = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((m, len(box)))
        k = rng.integers(len(modes))
        q, reach, _ = ik_batch(model, p, modes[k])
        p, q = p[reach], q[reach]
        J, sing = jacobian_batch(model, p, q)
        p, q, J = p[~sing], q[~sing], J[~sing]
        _, b = matrices_batch(model, p, q)
        keep = (full_kappa(model, J) < kappa_max) & (np.abs(b).min(axis=-1) > 1e-3 * model.scale)
        for pi, qi in zip(p[keep], q[keep]):
            poses.append(pi)
            joints.append(qi)
            picked.append(modes[k])
    return np.array(poses[:n]), np.array(joints[:n]), picked[:n]


def svd_rank_oracle(M, tol):
    """Rank-deficiency test from the symmetric eigenvalues of [[0, M], [M^T, 0]].

    Its eigenvalues are +/- the singular values of M, so this is an SVD computed
    by a different algorithm (symmetric eigensolver) from the implementation.
    """
    M = np.asarray(M, dtype=float)
    r, c = M.shape
    H = np.zeros((r + c, r + c))
    H[:r, r:] = M
    H[r:, :r] = M.T
    w = np.linalg.eigvalsh(H)  # ascending: -sigma..., zeros, +sigma...
    sv = np.abs(w[::-1][: min(r, c)])
    return bool(sv[-1] <= tol * max(1.0, float(np.abs(M).max())))


def fd_jacobian_of_ik(model, pose, mode, h):
    """Central differences of inverse kinematics with respect to the pose: the inverse Jacobian."""
    pose = np.asarray(pose, dtype=float)
    cols = []
    for k in range(len(pose)):
        e = np.zeros_like(pose)
        e[k] = h
        qp, _, _ = ik_batch(model, (pose + e)[None], mode)
        qm, _, _ = ik_batch(model, (pose - e)[None], mode)
        cols.append((qp[0] - qm[0]) / (2 * h))
    return np.stack(cols, axis=-1)
