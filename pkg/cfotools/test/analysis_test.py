""" Analysis Module Tests. """

import unittest
import warnings

import numpy as np
import pandas as pd

from cfotools import analysis
from cfotools.assembly import solve_cfo, weak_divergence
from cfotools.cases import test_case, scale_problem, quadrant_index, UNIT_SQUARE
from cfotools.mesh import Mesh, build_uniform
from cfotools.problem import ProblemSpec, ExactSolution, identity_alpha


def linear_problem():
    def u(x, y, tag=None):
        return 1 + 2 * x - y

    def grad(x, y, tag=None):
        return np.stack([np.full(np.shape(x), 2.0), np.full(np.shape(x), -1.0)], axis=-1)

    return ProblemSpec(UNIT_SQUARE, identity_alpha, lambda x, y, t: np.zeros(np.shape(x)),
                       lambda x, y: u(x, y), exact=ExactSolution(u, grad), name='linear')


def constant_problem(value):
    def u(x, y, tag=None):
        return np.full(np.shape(x), float(value))

    def grad(x, y, tag=None):
        return np.zeros(np.shape(x) + (2,))

    return ProblemSpec(UNIT_SQUARE, identity_alpha, lambda x, y, t: np.zeros(np.shape(x)),
                       lambda x, y: u(x, y), exact=ExactSolution(u, grad))


def within(testcase, value, expected, rel):
    testcase.assertLessEqual(abs(value - expected), rel * abs(expected),
                             '{:.4g} not within {:.0%} of {:.4g}'.format(value, rel, expected))


class NormTestCase(unittest.TestCase):
    ''' Unit tests for error norms.'''

    def setUp(self):
        self.mesh = build_uniform(UNIT_SQUARE, 4)

    def test_interpolant_of_linear(self):
        problem = linear_problem()
        u_h = analysis.interpolate(self.mesh, problem)
        self.assertLess(analysis.error_l2(self.mesh, u_h, problem), 1e-13)
        self.assertLess(analysis.error_h1(self.mesh, u_h, problem), 1e-13)

    def test_unit_constant(self):
        error = analysis.error_l2(self.mesh, np.zeros(self.mesh.n_nodes), constant_problem(1.0))
        self.assertAlmostEqual(error, 1.0, places=13)

    def test_exact_edge_flux(self):
        problem = linear_problem()
        q_h = -self.mesh.edge_normal.dot([2.0, -1.0])
        self.assertLess(analysis.flux_error(self.mesh, q_h, problem), 1e-13)

    def test_interpolant_order(self):
        for case_id in (1, 2):
            problem = test_case(case_id)
            errors = []
            for n in (8, 16, 32):
                mesh = build_uniform(problem.domain, n)
                errors.append(analysis.error_l2(mesh, analysis.interpolate(mesh, problem), problem))
            orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
            np.testing.assert_allclose(orders, 2.0, atol=0.15)

    def test_missing_exact(self):
        problem = ProblemSpec(UNIT_SQUARE, identity_alpha, lambda x, y, t: x, lambda x, y: x)
        with self.assertRaises(ValueError):
            analysis.error_l2(self.mesh, np.zeros(self.mesh.n_nodes), problem)
        with self.assertRaises(ValueError):
            analysis.flux_error(self.mesh, np.zeros(self.mesh.n_edges), problem)

    def test_lambda_norm(self):
        self.assertEqual(analysis.lambda_norm(self.mesh, np.zeros(self.mesh.n_elements)), 0.0)
        self.assertAlmostEqual(analysis.lambda_norm(self.mesh, np.ones(self.mesh.n_elements)), 1.0,
                               places=14)

    def test_scaling(self):
        problem = test_case(1)
        scaled = scale_problem(problem, 3.0)
        solution = solve_cfo(self.mesh, problem)
        scaled_solution = solve_cfo(self.mesh, scaled)
        report = analysis.error_report(self.mesh, problem, solution)
        scaled_report = analysis.error_report(self.mesh, scaled, scaled_solution)
        for field in ('l2', 'h1', 'residual', 'flux', 'lam'):
            within(self, getattr(scaled_report, field), 3 * getattr(report, field), 1e-9)
        for field in ('l2_rel', 'h1_rel', 'flux_rel'):
            within(self, getattr(scaled_report, field), getattr(report, field), 1e-9)


class DiscreteNormTestCase(unittest.TestCase):
    ''' Unit tests for jumps, the discrete H1 norm and the inf-sup flux.'''

    def test_constant(self):
        mesh = build_uniform(UNIT_SQUARE, 5)
        sigma = np.full(mesh.n_elements, 2.0)
        self.assertAlmostEqual(analysis.discrete_h1_norm(mesh, sigma), 2.0 * np.sqrt(20), places=12)
        self.assertEqual(analysis.discrete_h1_norm(mesh, np.zeros(mesh.n_elements)), 0.0)
        np.testing.assert_array_equal(analysis.build_inf_sup_flux(mesh, np.zeros(mesh.n_elements)), 0.0)

    def test_two_elements(self):
        mesh = Mesh([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2], [0, 2, 3]])
        self.assertAlmostEqual(analysis.discrete_h1_norm(mesh, np.array([0.0, 1.0])), np.sqrt(3),
                               places=14)

    def test_inf_sup_identity(self):
        mesh = build_uniform(UNIT_SQUARE, 8)
        rng = np.random.RandomState(8)
        for _ in range(100):
            sigma = rng.randn(mesh.n_elements)
            p = analysis.build_inf_sup_flux(mesh, sigma)
            norm = analysis.discrete_h1_norm(mesh, sigma)
            pairing = np.sum(mesh.area * weak_divergence(mesh, p) * sigma)
            self.assertLess(abs(pairing - norm ** 2), 1e-12 * norm ** 2)
            self.assertLess(abs(analysis.edge_flux_norm(mesh, p) - norm), 1e-12 * norm)


class CaseCatalogTestCase(unittest.TestCase):
    ''' Unit tests for the manufactured problems.'''

    def setUp(self):
        self.y = np.linspace(-0.99, 0.99, 100)

    def test_smooth_source(self):
        problem = test_case(1)
        self.assertAlmostEqual(float(problem.source(0.0, 0.0, 0)), 2 * np.pi ** 2, places=12)

    def test_half_plane_interface(self):
        problem = test_case(3)
        x = np.full(100, 0.5)
        y = np.linspace(0.0, 1.0, 100)
        left = np.zeros(100, dtype=np.int64)
        right = np.ones(100, dtype=np.int64)
        np.testing.assert_allclose(problem.exact.u(x, y, left), 4 + 4 * y - 2 * y ** 2, rtol=1e-12)
        np.testing.assert_allclose(problem.exact.u(x, y, right), 4 + 4 * y - 2 * y ** 2, rtol=1e-12)
        normal = np.array([1.0, 0.0])
        np.testing.assert_allclose(problem.exact_flux(x, y, left, normal),
                                   problem.exact_flux(x, y, right, normal), rtol=1e-12, atol=1e-12)

    def test_quadrant_interfaces(self):
        problem = test_case(4)
        zero = np.zeros(100)
        # x = 0: left and right quadrants at each y
        left = quadrant_index(-1e-3 + zero, self.y)
        right = quadrant_index(1e-3 + zero, self.y)
        normal = np.array([1.0, 0.0])
        np.testing.assert_allclose(problem.exact.u(zero, self.y, left),
                                   problem.exact.u(zero, self.y, right), atol=1e-12)
        np.testing.assert_allclose(problem.exact_flux(zero, self.y, left, normal),
                                   problem.exact_flux(zero, self.y, right, normal),
                                   rtol=1e-12, atol=1e-12)
        # y = 0
        below = quadrant_index(self.y, -1e-3 + zero)
        above = quadrant_index(self.y, 1e-3 + zero)
        normal = np.array([0.0, 1.0])
        np.testing.assert_allclose(problem.exact_flux(self.y, zero, below, normal),
                                   problem.exact_flux(self.y, zero, above, normal),
                                   rtol=1e-12, atol=1e-12)

    def test_quadrant_boundary(self):
        problem = test_case(4)
        for x, y in ((np.full(100, -1.0), self.y), (np.full(100, 1.0), self.y),
                     (self.y, np.full(100, -1.0)), (self.y, np.full(100, 1.0))):
            np.testing.assert_allclose(problem.exact.u(x, y, quadrant_index(x, y)), 0.0, atol=1e-12)

    def test_unknown_case(self):
        with self.assertRaises(ValueError):
            test_case(6)
        with self.assertRaises(ValueError):
            test_case('smooth')


class ConvergenceTestCase(unittest.TestCase):
    ''' Unit tests for convergence tables and observed orders.'''

    def test_check_levels(self):
        self.assertEqual(analysis.check_levels([2, 4, 8]), [2, 4, 8])
        for levels in ([3, 5], [], [0, 0], [4, 2]):
            with self.assertRaises(ValueError):
                analysis.check_levels(levels)

    def test_unknown_family(self):
        with self.assertRaises(ValueError):
            analysis.build_mesh(UNIT_SQUARE, 4, family='hexagonal')

    def test_table_layout(self):
        table = analysis.convergence_study(1, [2, 4])
        self.assertEqual(list(table.columns), analysis.TABLE_COLUMNS)
        self.assertEqual(list(table.index), [2, 4])
        self.assertEqual(table.index.name, 'n')
        self.assertTrue(np.isnan(table.loc[2, 'l2_order']))
        self.assertAlmostEqual(table.loc[4, 'h'], 0.25)

    def test_threads_match_serial(self):
        serial = analysis.convergence_study(1, [4, 8])
        threaded = analysis.convergence_study(1, [4, 8], workers=2)
        pd.testing.assert_frame_equal(serial, threaded)

    def test_rounding_level_orders(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            table = analysis.convergence_study(linear_problem(), [2, 4])
        self.assertTrue(caught)
        self.assertLess(table['l2'].max(), analysis.ROUNDING_FLOOR)
        for column in analysis.ERROR_COLUMNS:
            self.assertTrue(table[column + '_order'].isnull().all())

    def test_smooth_uniform(self):
        table = analysis.convergence_study(1, [16, 32, 64])
        for n, l2, h1, residual, lam in ((16, 7.80e-3, 0.218, 0.676, 8.12e-3),
                                         (32, 1.99e-3, 0.109, 0.339, 2.07e-3)):
            within(self, table.loc[n, 'l2'], l2, 0.05)
            within(self, table.loc[n, 'h1'], h1, 0.05)
            within(self, table.loc[n, 'residual'], residual, 0.05)
            within(self, table.loc[n, 'lambda'], lam, 0.05)
        within(self, table.loc[64, 'lambda'], 5.18e-4, 0.05)
        for n in (32, 64):
            self.assertAlmostEqual(table.loc[n, 'l2_order'], 2.0, delta=0.15)
            self.assertAlmostEqual(table.loc[n, 'h1_order'], 1.0, delta=0.1)
            self.assertAlmostEqual(table.loc[n, 'residual_order'], 1.0, delta=0.1)
            self.assertAlmostEqual(table.loc[n, 'lambda_order'], 2.0, delta=0.15)

    def test_smooth_perturbed(self):
        table = analysis.convergence_study(1, [16, 32, 64], family='perturbed', seed=42)
        for n in (32, 64):
            self.assertAlmostEqual(table.loc[n, 'l2_order'], 2.0, delta=0.2)
            self.assertAlmostEqual(table.loc[n, 'h1_order'], 1.0, delta=0.15)

    def test_hoelder(self):
        # (-1, 1)^2 with 64 cells per side has h = 1/32
        table = analysis.convergence_study(2, [16, 32, 64])
        self.assertAlmostEqual(table.loc[64, 'h'], 1 / 32.)
        within(self, table.loc[64, 'l2'], 4.36e-3, 0.05)
        within(self, table.loc[64, 'h1'], 0.218, 0.05)
        within(self, table.loc[64, 'flux'], 0.67, 0.05)
        within(self, table.loc[32, 'l2'], 1.79e-2, 0.05)
        for n in (32, 64):
            self.assertAlmostEqual(table.loc[n, 'l2_order'], 2.0, delta=0.15)
            self.assertAlmostEqual(table.loc[n, 'h1_order'], 1.0, delta=0.15)
            self.assertAlmostEqual(table.loc[n, 'flux_order'], 1.0, delta=0.15)

    def test_discontinuous(self):
        table = analysis.convergence_study(3, [8, 16, 32, 64], relative=True)
        for n in (32, 64):
            self.assertAlmostEqual(table.loc[n, 'h1_order'], 1.0, delta=0.05)
            self.assertGreaterEqual(table.loc[n, 'l2_order'], 1.6 - 0.1)
            self.assertLessEqual(table.loc[n, 'l2_order'], 2.0)
        self.assertAlmostEqual(table.loc[32, 'flux_order'], 1.11, delta=0.1)
        self.assertAlmostEqual(table.loc[64, 'flux_order'], 1.05, delta=0.1)
        flux_orders = table.loc[[16, 32, 64], 'flux_order'].values
        self.assertTrue(np.all(np.diff(flux_orders) < 0))

    def test_four_quadrants(self):
        table = analysis.convergence_study(4, [32, 64, 128], relative=True)
        self.assertAlmostEqual(table.loc[64, 'h'], 1 / 32.)
        within(self, table.loc[64, 'l2'], 5.07e-2, 0.10)
        within(self, table.loc[64, 'h1'], 1.10e-1, 0.10)
        within(self, table.loc[64, 'flux'], 7.69e-2, 0.10)
        self.assertAlmostEqual(table.loc[128, 'h1_order'], 1.05, delta=0.15)
        self.assertGreaterEqual(table.loc[128, 'l2_order'], 1.75)
        self.assertLessEqual(table.loc[128, 'l2_order'], 2.1)
        self.assertAlmostEqual(table.loc[128, 'flux_order'], 1.1, delta=0.2)


class FittedOrderTestCase(unittest.TestCase):
    ''' Unit tests for the least-squares order fit.'''

    def setUp(self):
        h = np.array([1 / 4., 1 / 8., 1 / 16., 1 / 32.])
        self.table = pd.DataFrame({'h': h,
                                   'l2': 3 * h ** 2 * np.array([1.0, 1.01, 0.99, 1.0]),
                                   'h1': 0.5 * h},
                                  index=pd.Index([4, 8, 16, 32], name='n'))

    def test_order(self):
        order, ci, calc_info = analysis.fitted_order(self.table, 'l2')
        self.assertAlmostEqual(order, 2.0, delta=0.02)
        self.assertLessEqual(ci[0], order)
        self.assertGreaterEqual(ci[1], order)
        self.assertAlmostEqual(np.exp(calc_info['intercept']), 3.0, delta=0.1)
        self.assertIn('ols_result', calc_info)

    def test_two_levels(self):
        order, ci, _ = analysis.fitted_order(self.table.iloc[:2], 'h1')
        self.assertAlmostEqual(order, 1.0, places=10)
        self.assertEqual(ci, (order, order))

    def test_rejects(self):
        with self.assertRaises(ValueError):
            analysis.fitted_order(self.table, 'h')
        with self.assertRaises(ValueError):
            analysis.fitted_order(self.table.iloc[:1], 'l2')


if __name__ == '__main__':
    unittest.main()
