import numpy as np
import pytest

from baecv.fem import build_rect_mesh
from baecv.models import AffineMap, QuadraticMap, RobinProblem, SemilinearProblem
from baecv.sensitivity import (
    assemble_jacobian,
    fd_best_over_steps,
    fd_hessian_action,
    fd_jacobian_action,
    hessian_action,
    hessian_bilinear,
    jacobian_action,
)

from conftest import EX1_LABELS, EX2_LABELS, rel_err

FD_STEPS = (1e-4, 1e-5, 1e-6)


@pytest.fixture(scope="module")
def robin_lp():
    mesh = build_rect_mesh(12, 5, 1.0, 0.25, labels=EX1_LABELS)
    pts = np.array([[0.3, 0.1], [0.62, 0.21], [0.81, 0.04], [0.15, 0.17]])
    prob = RobinProblem(mesh, pts)
    G = prob.accurate()
    z0 = np.full(G.dim, 7.0)
    return G, z0, G.linearize(z0)


@pytest.fixture(scope="module")
def semilinear_lp():
    mesh = build_rect_mesh(7, 7, 1.0, 1.0, labels=EX2_LABELS)
    prob = SemilinearProblem(mesh, np.array([[0.3, 0.4], [0.7, 0.6], [0.5, 0.2]]))
    G = prob.accurate()
    n = prob.n_param
    z0 = np.concatenate([np.zeros(n), np.full(n, 2.0)])
    return G, z0, G.linearize(z0)


class TestJacobianAction:
    def test_zero_direction(self, robin_lp):
        G, z0, lp = robin_lp
        assert np.array_equal(jacobian_action(lp, np.zeros(G.dim)), np.zeros(G.out_dim))

    @pytest.mark.parametrize("fixture", ["robin_lp", "semilinear_lp"])
    def test_matches_central_fd(self, fixture, request):
        G, z0, lp = request.getfixturevalue(fixture)
        rng = np.random.default_rng(0)
        for _ in range(3):
            dz = rng.standard_normal(G.dim)
            exact = lp.jac_action(dz)
            err = fd_best_over_steps(
                lambda h: fd_jacobian_action(G, z0, dz, h), exact, FD_STEPS)
            assert err <= 1e-5

    def test_affine_map_is_exact(self):
        rng = np.random.default_rng(1)
        J = rng.standard_normal((3, 5))
        G = AffineMap(J)
        lp = G.linearize(rng.standard_normal(5))
        dz = rng.standard_normal(5)
        assert np.allclose(jacobian_action(lp, dz), J @ dz, rtol=1e-14)

    def test_fd_error_second_order_in_h(self, robin_lp):
        G, z0, lp = robin_lp
        rng = np.random.default_rng(2)
        dz = rng.standard_normal(G.dim)
        exact = lp.jac_action(dz)
        errs = []
        for h in (1e-2, 1e-3):
            errs.append(np.linalg.norm(fd_jacobian_action(G, z0, dz, h) - exact))
        order = np.log10(errs[0] / errs[1])
        assert 1.5 <= order <= 2.5


class TestHessianAction:
    @pytest.mark.parametrize("fixture", ["robin_lp", "semilinear_lp"])
    def test_matches_fd_of_jacobian(self, fixture, request):
        G, z0, lp = request.getfixturevalue(fixture)
        rng = np.random.default_rng(3)
        for _ in range(3):
            dz = rng.standard_normal(G.dim)
            exact = hessian_action(lp, dz)
            err = fd_best_over_steps(
                lambda h: fd_hessian_action(G, z0, dz, h), exact, (1e-3, 1e-4, 1e-5))
            assert err <= 1e-4

    def test_affine_map_has_zero_curvature(self):
        rng = np.random.default_rng(4)
        G = AffineMap(rng.standard_normal((2, 4)))
        lp = G.linearize(np.zeros(4))
        assert np.array_equal(hessian_action(lp, rng.standard_normal(4)), np.zeros(2))

    def test_quadratic_map_returns_stored_tensor(self):
        rng = np.random.default_rng(5)
        T = rng.standard_normal((2, 3, 3))
        T = 0.5 * (T + np.transpose(T, (0, 2, 1)))
        G = QuadraticMap(rng.standard_normal((2, 3)), T)
        lp = G.linearize(rng.standard_normal(3))
        dz = rng.standard_normal(3)
        assert np.allclose(hessian_action(lp, dz),
                           np.einsum("pij,i,j->p", T, dz, dz), rtol=1e-13)


class TestHessianBilinear:
    def test_polarization_identity(self, robin_lp):
        G, z0, lp = robin_lp
        rng = np.random.default_rng(6)
        a, b = rng.standard_normal(G.dim), rng.standard_normal(G.dim)
        hab = hessian_bilinear(lp, a, b)
        pol = 0.25 * (hessian_action(lp, a + b) - hessian_action(lp, a - b))
        assert rel_err(hab, pol) <= 1e-10

    def test_diagonal_equals_action(self, semilinear_lp):
        G, z0, lp = semilinear_lp
        rng = np.random.default_rng(7)
        a = rng.standard_normal(G.dim)
        assert rel_err(hessian_bilinear(lp, a, a), hessian_action(lp, a)) <= 1e-12

    def test_symmetry_in_arguments(self, semilinear_lp):
        G, z0, lp = semilinear_lp
        rng = np.random.default_rng(8)
        a, b = rng.standard_normal(G.dim), rng.standard_normal(G.dim)
        assert rel_err(hessian_bilinear(lp, a, b), hessian_bilinear(lp, b, a)) <= 1e-10

    def test_quadratic_map_bilinear_matches_dense_contraction(self):
        rng = np.random.default_rng(9)
        T = rng.standard_normal((3, 4, 4))
        T = 0.5 * (T + np.transpose(T, (0, 2, 1)))
        G = QuadraticMap(rng.standard_normal((3, 4)), T)
        lp = G.linearize(rng.standard_normal(4))
        a, b = rng.standard_normal(4), rng.standard_normal(4)
        assert np.allclose(hessian_bilinear(lp, a, b),
                           np.einsum("pij,i,j->p", T, a, b), rtol=1e-12)


class TestRobinStructure:
    def test_pure_second_derivatives_vanish(self, robin_lp):
        # linear in u, bilinear in (m, u) and (beta, u): D_uu = D_zz = 0, so
        # the Hessian action reduces to the mixed term evaluated on the
        # first-order states; verified by linearity of second_rhs in each slot
        G, z0, lp = robin_lp
        rng = np.random.default_rng(10)
        a = rng.standard_normal(G.dim)
        ra = lp.sensitivity_state(a)
        # zero parameter direction with nonzero state: rhs must vanish
        rhs = G.second_rhs(lp.u, z0, np.zeros(G.dim), np.zeros(G.dim), ra, ra)
        assert np.abs(rhs).max() == 0.0

    def test_mixed_term_linear_in_state(self, robin_lp):
        G, z0, lp = robin_lp
        rng = np.random.default_rng(11)
        a = rng.standard_normal(G.dim)
        ra = lp.sensitivity_state(a)
        rhs1 = G.second_rhs(lp.u, z0, a, a, ra, ra)
        rhs2 = G.second_rhs(lp.u, z0, a, a, 2.0 * ra, 2.0 * ra)
        assert np.allclose(2.0 * rhs1, rhs2, rtol=1e-12)


class TestAssembledJacobian:
    def test_adjoint_and_forward_paths_agree(self, robin_lp):
        G, z0, lp = robin_lp
        J_adj = assemble_jacobian(lp, method="adjoint")
        lp2 = G.linearize(z0)
        J_fwd = assemble_jacobian(lp2, method="forward")
        assert rel_err(J_fwd, J_adj) <= 1e-9

    def test_rows_are_adjoint_actions(self, robin_lp):
        G, z0, lp = robin_lp
        J = lp.jacobian()
        for i in (0, 2):
            e = np.zeros(G.out_dim)
            e[i] = 1.0
            assert np.allclose(J[i], lp.jac_t_action(e), rtol=1e-13)

    def test_adjoint_consistency(self, semilinear_lp):
        G, z0, lp = semilinear_lp
        rng = np.random.default_rng(12)
        for _ in range(5):
            dz = rng.standard_normal(G.dim)
            w = rng.standard_normal(G.out_dim)
            lhs = lp.jac_action(dz) @ w
            rhs = dz @ lp.jac_t_action(w)
            assert abs(lhs - rhs) <= 1e-9 * np.linalg.norm(dz) * np.linalg.norm(w)

    def test_shapes_on_canonical_examples(self, robin_lp):
        G, z0, lp = robin_lp
        assert lp.jacobian().shape == (4, G.dim)

    def test_affine_recovers_stored_matrix(self):
        rng = np.random.default_rng(13)
        J = rng.standard_normal((4, 6))
        G = AffineMap(J)
        lp = G.linearize(rng.standard_normal(6))
        assert np.allclose(lp.jacobian(), J, rtol=1e-14)


class TestSolveCounters:
    def test_sensitivity_solves_are_counted(self, robin_lp):
        G, z0, lp = robin_lp
        rng = np.random.default_rng(14)
        before = G.counters.snapshot()
        lp.jac_action(rng.standard_normal(G.dim))
        d1 = G.counters.delta(before)
        assert (d1.sensitivity_first, d1.sensitivity_second) == (1, 0)
        before = G.counters.snapshot()
        lp.hess_action(rng.standard_normal(G.dim))
        d2 = G.counters.delta(before)
        assert (d2.sensitivity_first, d2.sensitivity_second) == (1, 1)
