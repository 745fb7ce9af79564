import numpy as np
import pytest
import scipy.sparse.linalg as spla

from baecv.errors import ArgumentError, SolverError
from baecv.fem import build_rect_mesh, observation_matrix
from baecv.models import (
    AffineMap,
    NoiseModel,
    QuadraticMap,
    RobinProblem,
    SemilinearProblem,
    auto_noise_level,
    make_data,
)

from conftest import EX1_LABELS, EX2_LABELS


def _strip_problem(nx=12, ny=5, flux=1.0, labels=None):
    mesh = build_rect_mesh(nx, ny, 1.0, 0.25, labels=labels or EX1_LABELS)
    pts = np.array([[0.3, 0.1], [0.62, 0.21], [0.81, 0.04], [0.15, 0.17]])
    return RobinProblem(mesh, pts, flux=flux)


class TestRobinSolve:
    def test_linear_profile_against_closed_form(self):
        # flux only on top, natural sides: u(y) = g/m + (g/beta) y exactly
        labels = {"bottom": "I", "top": "A"}
        mesh = build_rect_mesh(6, 9, 1.0, 0.25, labels=labels)
        pts = np.array([[0.5, 0.125]])
        prob = RobinProblem(mesh, pts, flux=1.0)
        mval, bval, g = 2.0, 5.0, 1.0
        z = np.concatenate([np.full(prob.n_m, mval), np.full(prob.n_beta, bval)])
        G = prob.accurate()
        u, _, _ = G.solve_forward(z)
        exact = g / mval + (g / bval) * mesh.vertices[:, 1]
        assert np.allclose(u, exact, atol=1e-10)

    def test_matches_dense_solve_of_same_system(self):
        prob = _strip_problem()
        rng = np.random.default_rng(0)
        m = 7.0 + 0.3 * rng.standard_normal(prob.n_m)
        beta = 7.0 + 0.3 * rng.standard_normal(prob.n_beta)
        z = np.concatenate([m, beta])
        G = prob.accurate()
        u, _, _ = G.solve_forward(z)
        dense = np.linalg.solve(prob.system_matrix(m, beta).toarray(), prob.load)
        assert np.allclose(u, dense, atol=1e-10)

    def test_homogeneous_in_flux(self):
        p1 = _strip_problem(flux=1.0)
        p2 = _strip_problem(flux=2.0)
        z = np.concatenate([np.full(p1.n_m, 7.0), np.full(p1.n_beta, 7.0)])
        y1 = p1.accurate().evaluate(z)
        y2 = p2.accurate().evaluate(z)
        assert np.allclose(2.0 * y1, y2, rtol=1e-12)

    def test_surrogate_equals_accurate_at_nominal(self):
        prob = _strip_problem()
        rng = np.random.default_rng(1)
        beta_star = 7.0 + 0.1 * rng.standard_normal(prob.n_beta)
        m = 7.0 + 0.2 * rng.standard_normal(prob.n_m)
        F = prob.surrogate(beta_star)
        G = prob.accurate()
        assert np.allclose(F.evaluate(m), G.evaluate(np.concatenate([m, beta_star])),
                           rtol=1e-13)

    def test_deterministic_replay(self):
        prob = _strip_problem()
        z = np.concatenate([np.full(prob.n_m, 6.5), np.full(prob.n_beta, 7.5)])
        G = prob.accurate()
        assert np.array_equal(G.evaluate(z), G.evaluate(z))

    def test_singular_system_raises(self):
        prob = _strip_problem(labels={"bottom": "I", "top": "A"})
        # m == 0 with flux-only remainder leaves the constant nullspace
        z = np.concatenate([np.zeros(prob.n_m), np.full(prob.n_beta, 7.0)])
        with pytest.raises(SolverError):
            prob.accurate().evaluate(z)


def _square_problem(nx=8):
    mesh = build_rect_mesh(nx, nx, 1.0, 1.0, labels=EX2_LABELS)
    pts = np.array([[0.3, 0.4], [0.7, 0.2], [0.5, 0.8], [0.25, 0.65]])
    return SemilinearProblem(mesh, pts)


class TestSemilinearSolve:
    def test_disabled_nonlinearity_matches_surrogate(self):
        prob = _square_problem()
        n = prob.n_param
        m = 0.1 * np.sin(np.arange(n))
        z = np.concatenate([m, np.full(n, -np.inf)])
        G, F = prob.accurate(), prob.surrogate()
        ug, iters, _ = G.solve_forward(z)
        uf, _, _ = F.solve_forward(m)
        assert iters == 0
        assert np.array_equal(ug, uf)

    def test_newton_converges_in_few_iterations(self):
        prob = _square_problem()
        n = prob.n_param
        rng = np.random.default_rng(2)
        z = np.concatenate([0.05 * rng.standard_normal(n),
                            2.0 + 0.05 * rng.standard_normal(n)])
        u, iters, _ = prob.accurate().solve_forward(z)
        assert 1 <= iters <= 8
        assert np.all(np.isfinite(u))

    def test_residual_reduction_factor(self):
        prob = _square_problem()
        n = prob.n_param
        z = np.concatenate([np.zeros(n), np.full(n, 2.0)])
        G = prob.accurate()
        u, _, _ = G.solve_forward(z)
        r = G._residual(u, np.exp(z[:n]), np.exp(z[n:]))
        u0, _ = G._surrogate_state(np.exp(z[:n]))
        r0 = G._residual(u0, np.exp(z[:n]), np.exp(z[n:]))
        assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(r0)

    def test_against_damped_fixed_point_oracle(self):
        # 3x3 mesh, m = 0, beta fixed: compare Newton to a brute-force
        # damped Picard iteration on the same discrete system.
        mesh = build_rect_mesh(3, 3, 1.0, 1.0, labels=EX2_LABELS)
        prob = SemilinearProblem(mesh, np.array([[0.5, 0.5]]))
        n = prob.n_param
        z = np.concatenate([np.zeros(n), np.full(n, 1.0)])
        G = prob.accurate()
        u_newton, _, _ = G.solve_forward(z)

        c = np.exp(z[:n])
        g = np.exp(z[n:])
        A = prob.linear_operator(c)
        A_ff = A[prob.free][:, prob.free].tocsc()
        lu = spla.splu(A_ff)
        u = prob.lift.copy()
        for _ in range(4000):
            w = np.abs(u) * u
            rhs = -(A @ prob.lift)[prob.free] - prob.tri_ops.wmass_action(g, w)[prob.free]
            u_new = prob.lift.copy()
            u_new[prob.free] = lu.solve(rhs)
            u = 0.5 * u + 0.5 * u_new
        assert np.allclose(u, u_newton, atol=1e-8)

    def test_surrogate_maximum_principle(self):
        prob = _square_problem()
        u, _, _ = prob.surrogate().solve_forward(np.zeros(prob.n_param))
        assert u.max() <= 1.0 + 1e-12
        assert u.min() >= -1e-12

    def test_surrogate_is_single_linear_solve(self):
        prob = _square_problem()
        F = prob.surrogate()
        before = F.counters.forward
        F.evaluate(np.zeros(prob.n_param))
        assert F.counters.forward - before == 1

    def test_nonconvergence_raises_with_residual(self):
        mesh = build_rect_mesh(5, 5, 1.0, 1.0, labels=EX2_LABELS)
        prob = SemilinearProblem(mesh, np.array([[0.5, 0.5]]), max_newton=1)
        n = prob.n_param
        z = np.concatenate([np.zeros(n), np.full(n, 4.0)])
        with pytest.raises(SolverError) as err:
            prob.accurate().solve_forward(z)
        assert err.value.residual_norm is not None


class TestSyntheticMaps:
    def test_affine_evaluate(self):
        J = np.array([[1.0, 2.0], [0.0, -1.0]])
        c = np.array([0.5, 1.5])
        G = AffineMap(J, c)
        x = np.array([2.0, 3.0])
        assert np.allclose(G.evaluate(x), c + J @ x)

    def test_quadratic_evaluate_and_shapes(self):
        rng = np.random.default_rng(0)
        J = rng.standard_normal((2, 3))
        T = rng.standard_normal((2, 3, 3))
        T = 0.5 * (T + np.transpose(T, (0, 2, 1)))
        G = QuadraticMap(J, T)
        x = rng.standard_normal(3)
        expected = J @ x + 0.5 * np.einsum("pij,i,j->p", T, x, x)
        assert np.allclose(G.evaluate(x), expected)

    def test_asymmetric_slices_rejected(self):
        T = np.zeros((1, 2, 2))
        T[0, 0, 1] = 1.0
        with pytest.raises(ArgumentError):
            QuadraticMap(np.zeros((1, 2)), T)


class TestMakeData:
    def test_zero_noise_returns_noiseless(self):
        G = AffineMap(np.eye(2), np.zeros(2))
        data = make_data(G, [1.0, 2.0], None, seed=0)
        assert np.array_equal(data.d, [1.0, 2.0])
        assert data.delta == 0.0

    def test_auto_delta_is_range_fraction(self):
        prob = _square_problem()
        G = prob.accurate()
        n = prob.n_param
        truth = np.concatenate([np.zeros(n), np.full(n, 2.0)])
        y = G.evaluate(truth)
        data = make_data(G, truth, 0.01, seed=3)
        assert data.delta == pytest.approx((y.max() - y.min()) / 100.0, rel=1e-12)

    def test_same_seed_same_noise(self):
        G = AffineMap(np.eye(3), np.zeros(3))
        noise = NoiseModel(0.5, 3)
        a = make_data(G, [0.0, 1.0, 2.0], noise, seed=11)
        b = make_data(G, [0.0, 1.0, 2.0], noise, seed=11)
        assert np.array_equal(a.d, b.d)
        c = make_data(G, [0.0, 1.0, 2.0], noise, seed=12)
        assert not np.array_equal(a.d, c.d)

    def test_noise_model_requires_positive_delta(self):
        with pytest.raises(ArgumentError):
            NoiseModel(0.0, 2)
