import os
import tempfile
import unittest
from unittest import mock

import numpy as np
import scipy.sparse as spspa

from csvr.core import DimensionMismatchError, InvalidArgumentError
from csvr.solver import (BallBlock, ConicProgram, ReferenceBackend, SolverConfig, SolverStatus,
                         dump_program, get_backend, load_program, project_ball, solve)

INF = np.inf
ADMM_ONLY = SolverConfig(fallback=False)


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))

def random_qp(seed, n=6, m=9):
    """Strictly convex QP with a known feasible point."""
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    P = M.T @ M + 0.1 * np.eye(n)
    q = rng.normal(size=n)
    A = rng.normal(size=(m, n))
    centre = A @ rng.normal(size=n)
    l = centre - rng.uniform(0.1, 1.0, size=m)
    u = centre + rng.uniform(0.1, 1.0, size=m)
    u[:2] = INF
    l[2:4] = -INF
    return ConicProgram(P, q, A, l, u)


class TestSmallPrograms(unittest.TestCase):
    def test_one_dimensional_qp(self):
        program = ConicProgram(np.array([[1.0]]), [0.0], np.array([[1.0]]), [1.0], [INF])
        solution = solve(program)
        self.assertEqual(solution.status, SolverStatus.OPTIMAL)
        self.assertTrue(close(solution.z[0], 1.0, 1e-5))
        self.assertTrue(close(solution.objective, 0.5, 1e-5))

    def test_crossed_bounds_are_rejected(self):
        self.assertRaises(InvalidArgumentError, ConicProgram, np.zeros((1, 1)), [0.0],
                          np.array([[1.0]]), [1.0], [0.0])

    def test_primal_infeasible(self):
        # z >= 1 and z <= 0
        program = ConicProgram(np.zeros((1, 1)), [0.0], np.array([[1.0], [1.0]]), [1.0, -INF], [INF, 0.0])
        self.assertEqual(solve(program).status, SolverStatus.PRIMAL_INFEASIBLE)
        self.assertEqual(solve(program, backend='reference').status, SolverStatus.PRIMAL_INFEASIBLE)

    def test_dual_infeasible(self):
        # minimize -z subject to z >= 0
        program = ConicProgram(np.zeros((1, 1)), [-1.0], np.array([[1.0]]), [0.0], [INF])
        self.assertEqual(solve(program).status, SolverStatus.DUAL_INFEASIBLE)

    def test_ball_projection_problem(self):
        # closest point of the unit ball to (3, 4)
        program = ConicProgram(np.eye(2), [-3.0, -4.0], spspa.csc_matrix((0, 2)), [], [],
                               ball_blocks=(BallBlock([0, 1], 1.0),))
        solution = solve(program)
        self.assertEqual(solution.status, SolverStatus.OPTIMAL)
        np.testing.assert_allclose(solution.z, [0.6, 0.8], atol=1e-4)

    def test_lp_scaling(self):
        A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        l, u = [1.0, 2.0, -INF], [INF, INF, 10.0]
        base = solve(ConicProgram(np.zeros((2, 2)), [1.0, 1.0], A, l, u))
        scaled = solve(ConicProgram(np.zeros((2, 2)), [10.0, 10.0], A, l, u))
        self.assertTrue(close(base.objective, 3.0, 1e-5))
        self.assertTrue(close(scaled.objective, 10.0 * base.objective, 1e-5))
        np.testing.assert_allclose(scaled.z, base.z, atol=1e-5)
        np.testing.assert_allclose(base.z, [1.0, 2.0], atol=1e-5)

    def test_deterministic(self):
        program = random_qp(0)
        first, second = solve(program), solve(program)
        np.testing.assert_array_equal(first.z, second.z)
        self.assertEqual(first.iterations, second.iterations)

    def test_max_iterations(self):
        solution = solve(random_qp(1), SolverConfig(max_iter=3, polish=False, fallback=False))
        self.assertEqual(solution.status, SolverStatus.MAX_ITERATIONS)
        self.assertEqual(solution.iterations, 3)

    def test_reference_answers_at_iteration_cap(self):
        program = random_qp(1)
        solution = solve(program, SolverConfig(max_iter=3, polish=False))
        self.assertEqual(solution.status, SolverStatus.OPTIMAL)
        self.assertEqual(solution.backend, 'admm+reference')
        self.assertGreater(solution.iterations, 3)
        self.assertLessEqual(program.constraint_violation(solution.z), 1e-6)

    def test_feasibility_is_absolute(self):
        # projection of (1e4, 1e4) onto z0 + z1 <= 1e4; relative tolerances alone would allow a violation near 1e-2
        program = ConicProgram(np.eye(2), [-1e4, -1e4], np.array([[1.0, 1.0]]), [-INF], [1e4])
        solution = solve(program, SolverConfig(polish=False, fallback=False))
        self.assertEqual(solution.status, SolverStatus.OPTIMAL)
        self.assertLessEqual(program.constraint_violation(solution.z), 1e-6)
        np.testing.assert_allclose(solution.z, [5e3, 5e3], rtol=1e-6)

    def test_sparse_and_dense_updates_agree(self):
        program = random_qp(3, n=8, m=12)
        dense = solve(program, ADMM_ONLY)
        with mock.patch('csvr.solver.admm.DENSE_MAX_VARS', 0):
            sparse = solve(program, ADMM_ONLY)
        self.assertEqual(dense.status, SolverStatus.OPTIMAL)
        self.assertEqual(sparse.status, SolverStatus.OPTIMAL)
        self.assertTrue(close(dense.objective, sparse.objective, 1e-5), (dense.objective, sparse.objective))


class TestReferenceAgreement(unittest.TestCase):
    def test_random_qps(self):
        for seed in range(10):
            program = random_qp(seed)
            admm = solve(program, ADMM_ONLY)
            ref = solve(program, backend=ReferenceBackend())
            self.assertEqual(admm.status, SolverStatus.OPTIMAL)
            self.assertEqual(ref.status, SolverStatus.OPTIMAL)
            self.assertTrue(close(admm.objective, ref.objective, 1e-5), (seed, admm.objective, ref.objective))
            self.assertLessEqual(program.constraint_violation(admm.z), 1e-6)
            self.assertLessEqual(admm.primal_residual, admm.eps_primal)
            self.assertLessEqual(admm.dual_residual, admm.eps_dual)

    def test_random_lps(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            n = 4
            A = np.vstack([np.eye(n), rng.uniform(0.5, 1.5, size=(3, n))])
            l = np.concatenate([np.zeros(n), np.full(3, -INF)])
            u = np.concatenate([np.full(n, INF), rng.uniform(5.0, 10.0, size=3)])
            program = ConicProgram(np.zeros((n, n)), -rng.uniform(0.5, 2.0, size=n), A, l, u)
            admm, ref = solve(program, ADMM_ONLY), solve(program, backend='reference')
            self.assertEqual(admm.backend, 'admm')
            self.assertTrue(close(admm.objective, ref.objective, 1e-5), (admm.objective, ref.objective))


class TestProjections(unittest.TestCase):
    def test_outside(self):
        np.testing.assert_allclose(project_ball([3.0, 4.0], 1.0), [0.6, 0.8])

    def test_inside(self):
        v = np.array([0.1, -0.2])
        out = project_ball(v, 1.0)
        np.testing.assert_array_equal(out, v)
        self.assertIsNot(out, v)

    def test_wrongdata(self):
        self.assertRaises(InvalidArgumentError, project_ball, [1.0, 2.0], 0.0)
        self.assertRaises(InvalidArgumentError, project_ball, [np.nan, 2.0], 1.0)


class TestProgram(unittest.TestCase):
    def test_dimensions(self):
        self.assertRaises(DimensionMismatchError, ConicProgram, np.eye(2), [0.0, 0.0], np.ones((1, 3)), [0.0], [1.0])
        self.assertRaises(DimensionMismatchError, ConicProgram, np.eye(2), [0.0, 0.0], np.ones((1, 2)), [0.0, 0.0], [1.0])

    def test_matrix_checks(self):
        self.assertRaises(InvalidArgumentError, ConicProgram, np.array([[1.0, 1.0], [0.0, 1.0]]), [0.0, 0.0],
                          np.ones((1, 2)), [0.0], [1.0])
        self.assertRaises(InvalidArgumentError, ConicProgram, np.diag([1.0, -1.0]), [0.0, 0.0],
                          np.ones((1, 2)), [0.0], [1.0])

    def test_unknown_backend(self):
        self.assertRaises(InvalidArgumentError, get_backend, 'simplex')
        self.assertEqual(get_backend().name(), 'admm')

    def test_dump_and_load(self):
        program = ConicProgram(np.diag([1.0, 0.0, 2.5]), [0.1, -1.0 / 3.0, 0.0],
                               np.array([[1.0, 2.0, 0.0], [0.0, 1.0, -1.0]]), [-INF, 0.5], [1.0, INF],
                               ball_blocks=(BallBlock([1, 2], 0.75),),
                               var_names={'alpha': slice(0, 1), 'beta': slice(1, 3)})
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'program.txt')
            dump_program(program, path)
            loaded = load_program(path)
        self.assertEqual((loaded.p != program.p).nnz, 0)
        self.assertEqual((loaded.a != program.a).nnz, 0)
        np.testing.assert_array_equal(loaded.q, program.q)
        np.testing.assert_array_equal(loaded.l, program.l)
        np.testing.assert_array_equal(loaded.u, program.u)
        self.assertEqual(loaded.ball_blocks[0].radius, 0.75)
        np.testing.assert_array_equal(loaded.ball_blocks[0].indices, [1, 2])
        self.assertEqual(loaded.var_names, program.var_names)


if __name__ == '__main__':
    unittest.main()
