"""Conditioning index, manipulability ellipsoid, amplification factors and singularity class.

Velocity amplification factors are the singular values of J (descending).
Because actuator efforts equal ``J.T @ tool_force``, the force amplification
factors along the same principal axes are their reciprocals, which are also the
semi-axis lengths of the ellipsoid built from ``(J J^T)^-1``.

For the 3-RPR the Jacobian mixes mm/mm and rad/mm rows. Unless a
characteristic length is supplied to homogenise it, metrics are taken on the
2x3 translational block and the rotational row is reported separately as a gain.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .diffkin import homogenize, kinematic_matrices, matrices_batch
from .errors import DegenerateEllipsoidError, InfiniteFactorError
from .mechanisms import Kind
from . import linalg

#: sigma_min below this fraction of sigma_max counts as zero
SIGMA_RTOL = 1e-12


class SingularityClass(str, enum.Enum):
    REGULAR = "Regular"
    SERIAL = "SerialSingular"
    PARALLEL = "ParallelSingular"
    BOTH = "Both"

    @classmethod
    def from_flags(cls, serial, parallel):
        if serial and parallel:
            return cls.BOTH
        if serial:
            return cls.SERIAL
        if parallel:
            return cls.PARALLEL
        return cls.REGULAR


@dataclass(frozen=True)
class Ellipsoid:
    axes: np.ndarray          # row i is the i-th principal direction
    semi_lengths: np.ndarray  # ascending


@dataclass(frozen=True)
class KinetostaticReport:
    sigma: np.ndarray
    kappa: float
    ellipsoid: Ellipsoid | None
    classification: SingularityClass
    rotation_gain: float | None = None  # 3-RPR without a characteristic length

    @property
    def isotropic(self):
        return self.kappa <= 1 + 1e-9


def velocity_amplification_factors(J):
    J = np.asarray(J, dtype=float)
    if not np.all(np.isfinite(J)):
        raise ValueError("Jacobian has non-finite entries")
    return np.linalg.svd(J, compute_uv=False)


def force_amplification_factors(J):
    """Reciprocal singular values, ascending, paired with the velocity factors.

    Raises:
        InfiniteFactorError: J is singular; ``direction`` is the tool-space axis
            along which J transmits no velocity.
    """
    U, s, _ = np.linalg.svd(np.asarray(J, dtype=float))
    if s[-1] <= SIGMA_RTOL * s[0]:
        raise InfiniteFactorError("force amplification factor is unbounded", direction=U[:, -1])
    return 1.0 / s


def conditioning_index(J):
    """``sigma_max / sigma_min`` in ``[1, inf]``; ``None`` (undefined J) gives ``inf``."""
    if J is None:
        return math.inf
    J = np.asarray(J, dtype=float)
    if not np.all(np.isfinite(J)):
        return math.inf
    s = np.linalg.svd(J, compute_uv=False)
    if s[0] == 0 or s[-1] < SIGMA_RTOL * s[0]:
        return math.inf
    return float(s[0] / s[-1])


def manipulability_ellipsoid(J):
    """Principal axes and semi-axis lengths from the eigendecomposition of ``(J J^T)^-1``.

    Raises:
        DegenerateEllipsoidError: J is singular.
    """
    J = np.asarray(J, dtype=float)
    if not np.all(np.isfinite(J)):
        raise DegenerateEllipsoidError("Jacobian is undefined")
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] <= SIGMA_RTOL * s[0]:
        raise DegenerateEllipsoidError("singular Jacobian: ellipsoid has an infinite axis")
    M = np.linalg.inv(J @ J.T)
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return Ellipsoid(axes=V.T.copy(), semi_lengths=np.sqrt(w))


def _threshold(M, tol):
    return tol * max(1.0, float(np.max(np.abs(M))))


def classify_matrices(A, B, tol=1e-9):
    sa = np.linalg.svd(A, compute_uv=False)
    sb = np.linalg.svd(B, compute_uv=False)
    return SingularityClass.from_flags(serial=sb[-1] <= _threshold(B, tol),
                                       parallel=sa[-1] <= _threshold(A, tol))


def classify_configuration(model, pose, joints, tol=1e-9):
    """Serial (B rank-deficient), parallel (A rank-deficient), both or regular."""
    km = kinematic_matrices(model, pose, joints)
    return classify_matrices(km.A, km.B, tol)


def metric_jacobian(model, J, characteristic_length=None):
    """The matrix whose singular values are reported for ``model``."""
    if model.kind is not Kind.THREE_RPR:
        return J
    if characteristic_length is not None:
        return homogenize(J, characteristic_length)
    return J[..., :2, :]


def evaluate(model, pose, joints, tol=1e-9, characteristic_length=None):
    """Full kinetostatic report at one configuration, plus its kinematic matrices."""
    km = kinematic_matrices(model, pose, joints)
    cls = classify_matrices(km.A, km.B, tol)
    rot = None
    if km.J is None:
        sigma = batch_sigma(model, np.asarray(pose)[None], np.asarray(joints)[None],
                            characteristic_length)[0]
        if model.kind is Kind.THREE_RPR and characteristic_length is None:
            rot = math.inf
        return km, KinetostaticReport(sigma=sigma, kappa=math.inf, ellipsoid=None,
                                      classification=cls, rotation_gain=rot)
    Jm = metric_jacobian(model, km.J, characteristic_length)
    if model.kind is Kind.THREE_RPR and characteristic_length is None:
        rot = float(np.linalg.norm(km.J[2]))
    sigma = velocity_amplification_factors(Jm)
    try:
        ell = manipulability_ellipsoid(Jm)
    except DegenerateEllipsoidError:
        ell = None
    return km, KinetostaticReport(sigma=sigma, kappa=conditioning_index(Jm), ellipsoid=ell,
                                  classification=cls, rotation_gain=rot)


def batch_sigma(model, poses, joints, characteristic_length=None):
    """Descending singular values of the metric Jacobian for a stack of configurations.

    Where A is singular but B is not, the values come from the inverse Jacobian
    ``B^-1 A`` so the finite factors stay available and the largest one is ``inf``.
    Where both are singular the range is ``[0, inf]``.
    """
    A, b = matrices_batch(model, poses, joints)
    n = model.n_legs
    B = b[..., None, :] * np.eye(n)
    J, a_sing = linalg.solve_adjugate(A, B)
    m = n - 1 if (model.kind is Kind.THREE_RPR and characteristic_length is None) else n
    sigma = np.full(J.shape[:-2] + (m,), np.nan)
    ok = ~a_sing
    if ok.any():
        sigma[ok] = np.linalg.svd(metric_jacobian(model, J[ok], characteristic_length),
                                  compute_uv=False)
    bad = np.flatnonzero(a_sing)
    if bad.size:
        bb = np.abs(b[bad])
        b_sing = bb.min(axis=-1) <= SIGMA_RTOL * bb.max(axis=-1)
        for k, row in zip(bad, b_sing):
            sigma[k] = np.nan
            sigma[k, 0] = np.inf
            if row:
                sigma[k, -1] = 0.0
            elif m == n:
                K = A[k] / b[k][:, None]
                if characteristic_length is not None:
                    K = K.copy()
                    K[:, 2] /= characteristic_length
                sk = np.linalg.svd(K, compute_uv=False)
                with np.errstate(divide="ignore"):
                    sigma[k] = np.sort(1.0 / sk)[::-1]
    return sigma


_CLASS_NAMES = np.array([c.value for c in SingularityClass], dtype=object)


def batch_metrics(model, poses, joints, tol=1e-9, characteristic_length=None, classify=True):
    """``(sigma_min, sigma_max, kappa, classes)`` arrays for a stack of configurations.

    With ``classify=False`` the class array is ``None`` and the rank test of A is skipped.
    """
    sigma = batch_sigma(model, poses, joints, characteristic_length)
    smax = sigma[..., 0]
    smin = sigma[..., -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(smin < SIGMA_RTOL * smax, np.inf, smax / smin)
    kappa = np.where(np.isnan(smax) | np.isnan(smin), np.inf, kappa)
    if not classify:
        return smin, smax, kappa, None
    A, b = matrices_batch(model, poses, joints)
    sa = np.linalg.svd(A, compute_uv=False)[..., -1]
    amax = np.maximum(1.0, np.abs(A).max(axis=(-1, -2)))
    bmin = np.abs(b).min(axis=-1)
    bmax = np.maximum(1.0, np.abs(b).max(axis=-1))
    parallel = sa <= tol * amax
    serial = bmin <= tol * bmax
    # enum order: Regular, Serial, Parallel, Both
    return smin, smax, kappa, _CLASS_NAMES[serial.astype(int) + 2 * parallel.astype(int)]
