import itertools

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from helpers import RPR_BASE, RPR_PLATFORM, models
from pkmdesign.linalg import is_singular
from pkmdesign.diffkin import matrices_batch
from pkmdesign.errors import ConvergenceError, NoAssemblyError, OutOfReachError, UnsupportedOperationError
from pkmdesign.mechanisms import (
    AssemblyMode,
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
    working_mode_of,
    wrap_angle,
)


def sympy_orthoglide_fk(L, rho):
    """Exact solutions of the three-sphere system, sorted by x + y + z."""
    x, y, z = sp.symbols("x y z", real=True)
    eqs = [(x - rho[0]) ** 2 + y**2 + z**2 - L**2,
           x**2 + (y - rho[1]) ** 2 + z**2 - L**2,
           x**2 + y**2 + (z - rho[2]) ** 2 - L**2]
    sols = sp.solve(eqs, [x, y, z], dict=True)
    pts = [np.array([float(s[x]), float(s[y]), float(s[z])]) for s in sols]
    return sorted(pts, key=lambda p: p.sum())


class TestModels:
    def test_rejects_nonpositive_lengths(self):
        with pytest.raises(ValueError):
            biglide(0.0)
        with pytest.raises(ValueError):
            orthoglide(-1.0)

    def test_rejects_degenerate_geometry(self):
        with pytest.raises(ValueError):
            bipod([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(ValueError):
            three_rpr([[0, 0], [1, 1], [2, 2]], RPR_PLATFORM)
        with pytest.raises(ValueError):
            three_rpr(RPR_BASE, [[1, 1], [1, 1], [1, 1]])

    def test_joint_limits_validated(self):
        with pytest.raises(ValueError):
            biglide(5.0, joint_limits=[(1, 0), (0, 1)])
        with pytest.raises(ValueError):
            biglide(5.0, joint_limits=[(0, 1)])
        m = biglide(5.0, joint_limits=[(-4, 4), (-4, 4)])
        assert m.within_limits([3, -3])
        assert not m.within_limits([5, -3])

    def test_scaled_model(self):
        m = orthoglide(10.0, joint_limits=[(0, 20)] * 3).scaled(2.0)
        assert m.geometry.leg_length == 20.0
        assert m.joint_limits == ((0.0, 40.0),) * 3

    def test_wrap_angle(self):
        assert wrap_angle(np.pi) == pytest.approx(np.pi)
        assert wrap_angle(-np.pi) == pytest.approx(np.pi)
        assert wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)


class TestResidual:
    def test_biglide_closed(self):
        np.testing.assert_array_equal(constraint_residual(biglide(5), [0, 4], [3, -3]), [0, 0])

    def test_orthoglide_isotropic_closure(self):
        np.testing.assert_array_equal(constraint_residual(orthoglide(10), [0, 0, 0], [10, 10, 10]), [0, 0, 0])

    def test_biglide_open_loop(self):
        # (0 - 4)^2 + 4^2 - 5^2 = 7
        np.testing.assert_array_equal(constraint_residual(biglide(5), [0, 4], [4, -3]), [7, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            constraint_residual(biglide(5), [0, 4, 1], [3, -3])
        with pytest.raises(ValueError):
            constraint_residual(orthoglide(5), [0, 0, 0], [3, -3])


class TestInverseKinematics:
    def test_biglide_345(self):
        np.testing.assert_array_equal(inverse_kinematics(biglide(5), [0, 4], (-1, 1)), [3, -3])

    @pytest.mark.parametrize("L", [0.5, 10.0, 300.0])
    def test_orthoglide_isotropic(self, L):
        np.testing.assert_allclose(inverse_kinematics(orthoglide(L), [0, 0, 0], (-1, -1, -1)), [L, L, L],
                                   rtol=0, atol=1e-12 * L)

    @pytest.mark.parametrize("mode", enumerate_working_modes(biglide(5)))
    def test_biglide_out_of_reach(self, mode):
        with pytest.raises(OutOfReachError) as err:
            inverse_kinematics(biglide(5), [0, 6], mode)
        assert err.value.leg == 0

    def test_orthoglide_reports_offending_leg(self):
        # leg 3 (index 2) sees x^2 + y^2 = 0.2 + 0.98 > 1
        with pytest.raises(OutOfReachError) as err:
            inverse_kinematics(orthoglide(1.0), [0.2 ** 0.5, 0.98 ** 0.5, 0.0], (-1, -1, -1))
        assert err.value.leg == 2

    def test_branch_signs_agree(self):
        m = orthoglide(10.0)
        p = np.array([1.0, -2.0, 3.0])
        for mode in enumerate_working_modes(m):
            q = inverse_kinematics(m, p, mode)
            assert working_mode_of(m, p, q) == mode
            assert np.abs(constraint_residual(m, p, q)).max() <= 1e-9 * 100

    def test_telescopic_rejects_negative_mode(self):
        with pytest.raises(ValueError):
            inverse_kinematics(bipod(), [3, 4], (-1, 1))

    def test_bipod_distance(self):
        np.testing.assert_allclose(inverse_kinematics(bipod([[0, 0], [10, 0]]), [3, 4]), [5, np.hypot(7, 4)])


class TestForwardKinematics:
    def test_biglide_modes(self):
        m = biglide(5)
        np.testing.assert_allclose(forward_kinematics(m, [3, -3], AssemblyMode(1)), [0, 4])
        np.testing.assert_allclose(forward_kinematics(m, [3, -3], 2), [0, -4])

    @pytest.mark.parametrize("L", [1.0, 10.0])
    def test_orthoglide_against_symbolic_solution(self, L):
        oracle = sympy_orthoglide_fk(L, [L, L, L])
        assert len(oracle) == 2
        m = orthoglide(L)
        for k, expected in enumerate(oracle, start=1):
            got = forward_kinematics(m, [L, L, L], k)
            np.testing.assert_allclose(got, expected, atol=1e-12 * L)
            assert np.abs(constraint_residual(m, got, [L, L, L])).max() <= 1e-9 * L * L
        np.testing.assert_allclose(oracle[1], [2 * L / 3] * 3, atol=1e-12 * L)

    def test_orthoglide_generic_against_symbolic_solution(self):
        rho = [9, 11, 12]
        oracle = sympy_orthoglide_fk(10, rho)
        got = enumerate_assembly_modes(orthoglide(10), rho)
        assert len(got) == len(oracle) == 2
        for g, o in zip(got, oracle):
            np.testing.assert_allclose(g, o, atol=1e-10)

    def test_biglide_no_assembly(self):
        for mode in (1, 2):
            with pytest.raises(NoAssemblyError):
                forward_kinematics(biglide(5), [0, 20], mode)

    def test_three_rpr_needs_seed(self):
        with pytest.raises(ValueError):
            forward_kinematics(three_rpr(RPR_BASE, RPR_PLATFORM), [5, 5, 5])

    def test_three_rpr_newton(self):
        m = three_rpr(RPR_BASE, RPR_PLATFORM)
        p = np.array([4.0, 3.0, 0.2])
        q = inverse_kinematics(m, p)
        got = forward_kinematics(m, q, seed=p + [0.3, -0.2, 0.1])
        np.testing.assert_allclose(got, p, atol=1e-9 * m.scale)

    def test_three_rpr_newton_normalises_angle(self):
        m = three_rpr(RPR_BASE, RPR_PLATFORM)
        p = np.array([4.0, 3.0, np.pi - 0.05])
        q = inverse_kinematics(m, p)
        got = forward_kinematics(m, q, seed=p + [0.0, 0.0, 0.1])
        assert -np.pi < got[2] <= np.pi
        np.testing.assert_allclose(got, p, atol=1e-9 * m.scale)

    def test_three_rpr_non_convergence(self):
        m = three_rpr(RPR_BASE, RPR_PLATFORM)
        with pytest.raises(ConvergenceError) as err:
            forward_kinematics(m, [0.0, 0.0, 0.0], seed=[4, 3, 0])
        assert err.value.iterations == 50


class TestModes:
    def test_biglide_working_modes(self):
        modes = enumerate_working_modes(biglide(5))
        assert [m.signs for m in modes] == [(-1, -1), (-1, 1), (1, -1), (1, 1)]

    def test_bipod_single_mode(self):
        assert [m.signs for m in enumerate_working_modes(bipod())] == [(1, 1)]

    def test_counts(self):
        counts = {k: len(enumerate_working_modes(m)) for k, m in models().items()}
        assert counts == {"bipod": 1, "biglide": 4, "3rpr": 1, "orthoglide": 8}

    def test_orthoglide_every_branch_closes(self):
        m = orthoglide(10.0)
        p = np.array([0.5, -1.0, 2.0])
        joints = {tuple(inverse_kinematics(m, p, mode)) for mode in enumerate_working_modes(m)}
        assert len(joints) == 8
        for q in joints:
            assert np.abs(constraint_residual(m, p, q)).max() <= 1e-9 * 100

    def test_biglide_assembly_pair(self):
        sols = enumerate_assembly_modes(biglide(5), [3, -3])
        np.testing.assert_allclose(sols, [[0, 4], [0, -4]])

    def test_orthoglide_assembly_pair(self):
        L = 7.0
        sols = enumerate_assembly_modes(orthoglide(L), [L, L, L])
        np.testing.assert_allclose(sols, [[0, 0, 0], [2 * L / 3] * 3], atol=1e-12 * L)

    def test_tangential_closure_coalesces(self):
        sols = enumerate_assembly_modes(biglide(5), [5, -5])
        assert len(sols) == 1
        np.testing.assert_allclose(sols[0], [0, 0])

    def test_no_closure_is_empty(self):
        assert enumerate_assembly_modes(biglide(5), [0, 20]) == []
        assert enumerate_assembly_modes(bipod([[0, 0], [10, 0]]), [1, 1]) == []

    def test_three_rpr_unsupported(self):
        with pytest.raises(UnsupportedOperationError):
            enumerate_assembly_modes(three_rpr(RPR_BASE, RPR_PLATFORM), [5, 5, 5])

    def test_working_mode_validation(self):
        with pytest.raises(ValueError):
            WorkingMode((0, 1))
        with pytest.raises(ValueError):
            inverse_kinematics(biglide(5), [0, 4], (-1, 1, 1))


coord = st.floats(-1.0, 1.0, allow_nan=False)


def _reachable_pose(model, u):
    """Map a point of the unit cube to a reachable pose inside each model's workspace."""
    s = model.scale
    name = model.kind.value
    if name == "biglide":
        return np.array([u[0] * s, 0.05 * s + 0.9 * s * abs(u[1])]) * np.array([1, np.sign(u[1]) or 1])
    if name == "orthoglide":
        return 0.5 * s * np.asarray(u[:3])
    if name == "bipod":
        return np.array([5 + 8 * u[0], 8 * u[1]])
    return np.array([5 + 2 * u[0], 3 + 2 * u[1], np.pi * u[2]])


@pytest.mark.parametrize("name", ["bipod", "biglide", "3rpr", "orthoglide"])
@settings(max_examples=60, deadline=None)
@given(u=st.tuples(coord, coord, coord))
def test_round_trip(name, u):
    model = models()[name]
    p = _reachable_pose(model, u)
    for mode in enumerate_working_modes(model):
        try:
            q = inverse_kinematics(model, p, mode)
        except OutOfReachError:
            continue
        assert np.abs(constraint_residual(model, p, q)).max() <= 1e-9 * model.scale**2
        A, _ = matrices_batch(model, p[None], q[None])
        if is_singular(A[0], rtol=1e-6):
            # within ~1e-6 scale of a parallel singularity the assembly branches coalesce
            continue
        if name == "3rpr":
            # Newton lands on the branch whose basin holds the seed; stay well clear of singularities
            if is_singular(A[0], rtol=1e-2):
                continue
            err = forward_kinematics(model, q, seed=p + 0.01) - p
            err[2] = np.arctan2(np.sin(err[2]), np.cos(err[2]))  # angles modulo 2 pi
            assert np.abs(err).max() <= 1e-9 * model.scale
            continue
        if name == "biglide" and mode.signs[0] == mode.signs[1]:
            # same-sign branches put both sliders on one point: a continuum of closures
            with pytest.raises(NoAssemblyError):
                enumerate_assembly_modes(model, q)
            continue
        sols = enumerate_assembly_modes(model, q)
        for s in sols:
            assert np.abs(constraint_residual(model, s, q)).max() <= 1e-9 * model.scale**2
        assert min(np.abs(s - p).max() for s in sols) <= 1e-9 * model.scale


@settings(max_examples=100, deadline=None)
@given(r1=st.floats(-8, 8), r2=st.floats(-8, 8))
def test_biglide_mirror_symmetry(r1, r2):
    assume(r1 != r2)
    sols = enumerate_assembly_modes(biglide(5), [r1, r2])
    if len(sols) == 2:
        np.testing.assert_allclose(sols[0], sols[1] * [1, -1], atol=1e-12)
        assert sols[0][1] > 0


@settings(max_examples=60, deadline=None)
@given(u=st.tuples(coord, coord, coord))
def test_orthoglide_permutation_symmetry(u):
    m = orthoglide(10.0)
    p = 5.0 * np.asarray(u)
    for perm in itertools.permutations(range(3)):
        perm = list(perm)
        for mode in enumerate_working_modes(m):
            q = inverse_kinematics(m, p, mode)
            signs = tuple(np.asarray(mode.signs)[perm])
            assert np.abs(constraint_residual(m, p[perm], q[perm])).max() <= 1e-9 * 100
            np.testing.assert_allclose(inverse_kinematics(m, p[perm], signs), q[perm], atol=1e-12)
