# tests/test_solver.py
import math

import numpy as np
from django.test import SimpleTestCase, tag

from core.exceptions import DivergenceError, InsufficientSamples, InvalidProblem, UsageError
from core.funcspace import Grid, sup_dist
from core.operators import apply_T
from core.problems import get_problem
from core.schemas import ProblemId, QuadConfig, SolveConfig
from core.solver import condensing_probe, contraction_probe, initial_state, iterate_set_diagnostic, picard_solve


class PicardSolveTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(t_max=1.0, n_nodes=201)

    def test_decoupled_problem_converges_immediately(self):
        report = picard_solve(get_problem("decoupled_identity"), self.grid)
        self.assertTrue(report.converged)
        self.assertEqual(report.status, "converged")
        self.assertEqual(report.iterations, 1)
        self.assertEqual(report.final_residual, 0.0)
        self.assertEqual([c(0.5) for c in report.final], [1.0, -0.5, 2.0])

    def test_linear_volterra_reaches_the_exponential(self):
        report = picard_solve(get_problem("linear_volterra"), self.grid, SolveConfig(tol=1e-6))
        self.assertTrue(report.converged)
        self.assertLessEqual(report.final_residual, 1e-6)
        self.assertLess(report.residuals[-1], report.residuals[0])
        self.assertLess(abs(report.final.x(1.0) - math.e), 1e-4)
        np.testing.assert_array_equal(report.final.y.values, np.zeros(self.grid.n_nodes))

    def test_iteration_cap_is_inconclusive(self):
        report = picard_solve(get_problem("linear_volterra"), self.grid, SolveConfig(tol=1e-30, max_iter=5))
        self.assertFalse(report.converged)
        self.assertEqual(report.status, "inconclusive")
        self.assertEqual(report.iterations, 5)
        self.assertEqual(len(report.residuals), 5)

    def test_damping_slows_but_does_not_stop_convergence(self):
        spec = get_problem("linear_volterra")
        plain = picard_solve(spec, self.grid, SolveConfig(tol=1e-6))
        damped = picard_solve(spec, self.grid, SolveConfig(tol=1e-6, damping=0.5))
        self.assertTrue(damped.converged)
        self.assertGreater(damped.iterations, plain.iterations)

    def test_growing_residuals_trip_the_divergence_guard(self):
        spec = get_problem(ProblemId(name="linear_volterra", parameters={"lam": 50.0}))
        with self.assertRaises(DivergenceError) as ctx:
            picard_solve(spec, self.grid)
        residuals = ctx.exception.residuals
        self.assertGreater(residuals[-1], ctx.exception.threshold)
        self.assertGreater(len(residuals), 2)

    def test_structurally_invalid_problem_is_refused(self):
        spec = get_problem("decoupled_identity").with_component(1, xi=lambda t: t - 1.0)
        with self.assertRaises(InvalidProblem) as ctx:
            picard_solve(spec, self.grid)
        self.assertEqual(ctx.exception.violations[0].condition, "warp negative")

    def test_retained_trace_starts_from_initial_state(self):
        spec = get_problem("linear_volterra")
        report = picard_solve(spec, self.grid, SolveConfig(tol=1e-6), retain_trace=True)
        self.assertEqual(len(report.trace), report.iterations)
        self.assertEqual(report.trace[0].distance(initial_state(spec, self.grid)), 0.0)

    def test_trace_is_dropped_by_default(self):
        report = picard_solve(get_problem("decoupled_identity"), self.grid)
        self.assertIsNone(report.trace)

    def test_zero_initial_policy(self):
        spec = get_problem("decoupled_identity")
        report = picard_solve(spec, self.grid, SolveConfig(init="zero"))
        self.assertEqual(report.iterations, 2)
        self.assertEqual(report.residuals[0], 2.0)


class IterateWindowTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(t_max=1.0, n_nodes=201)

    def test_needs_a_trace(self):
        report = picard_solve(get_problem("decoupled_identity"), self.grid)
        with self.assertRaises(UsageError):
            iterate_set_diagnostic(report, 1)

    def test_window_bounds(self):
        report = picard_solve(get_problem("decoupled_identity"), self.grid, retain_trace=True)
        with self.assertRaises(UsageError):
            iterate_set_diagnostic(report, 0)
        with self.assertRaises(UsageError):
            iterate_set_diagnostic(report, 2)

    def test_single_constant_iterate_has_zero_measure(self):
        report = picard_solve(get_problem("decoupled_identity"), self.grid, retain_trace=True)
        (window,) = iterate_set_diagnostic(report, 1)
        self.assertEqual((window.start, window.stop), (0, 1))
        self.assertEqual(window.mu_max, 0.0)
        self.assertEqual(window.mu_sum, 0.0)

    def test_measure_of_late_windows_is_below_early_ones(self):
        report = picard_solve(get_problem("linear_volterra"), self.grid, SolveConfig(tol=1e-6), retain_trace=True)
        windows = iterate_set_diagnostic(report, 3)
        self.assertEqual(len(windows), report.iterations - 2)
        self.assertLess(windows[-1].mu_max, windows[0].mu_max)
        for w in windows:
            self.assertGreaterEqual(w.mu_sum, w.mu_max)


class ProbeTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(t_max=1.0, n_nodes=101)

    def test_constant_operator_has_zero_contraction_ratio(self):
        probe = contraction_probe(get_problem("decoupled_identity"), self.grid, n_pairs=4, seed=1)
        self.assertEqual(probe.max_ratio, 0.0)
        self.assertEqual(probe.pairs_used + probe.pairs_skipped, 4)

    def test_volterra_ratio_is_bounded_by_horizon(self):
        probe = contraction_probe(get_problem("linear_volterra"), self.grid, n_pairs=5, seed=2)
        self.assertGreater(probe.max_ratio, 0.0)
        self.assertLessEqual(probe.max_ratio, 1.0 + 1e-6)
        self.assertEqual(probe.witness.component, 1)

    def test_witness_pair_replays_without_the_generator(self):
        spec = get_problem("linear_volterra")
        w = contraction_probe(spec, self.grid, n_pairs=5, seed=2).witness
        image_a, image_b = apply_T(spec, w.a).output, apply_T(spec, w.b).output
        self.assertEqual(w.a.distance(w.b), w.distance)
        self.assertEqual(sup_dist(image_a[w.component - 1], image_b[w.component - 1]) / w.distance, w.ratio)
        for norm in w.norms:
            self.assertLessEqual(norm, 1.0 + 1e-12)

    def test_volterra_ratio_on_longer_horizon(self):
        probe = contraction_probe(get_problem("linear_volterra"), Grid(t_max=2.0, n_nodes=201), n_pairs=5, seed=4)
        self.assertLessEqual(probe.max_ratio, 2.0 + 1e-6)

    def test_probe_needs_pairs(self):
        with self.assertRaises(InsufficientSamples):
            contraction_probe(get_problem("decoupled_identity"), self.grid, n_pairs=0, seed=0)

    @tag("slow")
    def test_condensing_probe_on_constant_operator(self):
        probe = condensing_probe(get_problem("decoupled_identity"), self.grid, n_trials=2, family_size=2, seed=3)
        self.assertEqual(len(probe.trials), 2)
        self.assertEqual(probe.max_ratio, 0.0)
        for trial in probe.trials:
            self.assertGreater(trial.mu_in, 0.0)
            self.assertEqual(trial.mu_out, (0.0, 0.0, 0.0))


@tag("slow")
class ExponentialOracleTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.grid = Grid.from_step(2.0, 2**-9)
        cls.report = picard_solve(
            get_problem("linear_volterra"), cls.grid,
            SolveConfig(tol=1e-9), QuadConfig(rel_tol=1e-8, abs_tol=1e-12),
            retain_trace=True,
        )

    def test_solution_matches_closed_form(self):
        self.assertTrue(self.report.converged)
        exact = np.exp(self.grid.nodes)
        rel = np.abs(self.report.final.x.values - exact) / exact
        self.assertLess(rel.max(), 1e-4)

    def test_window_measure_does_not_grow(self):
        mus = [w.mu_max for w in iterate_set_diagnostic(self.report, 5)]
        for j in range(3, len(mus) - 1):
            self.assertLessEqual(mus[j + 1], mus[j] + 1e-8)


@tag("slow")
class WorkedExampleTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.spec = get_problem("paper_example")
        cls.grid = Grid(t_max=1.0)
        cls.report = picard_solve(cls.spec, cls.grid)
        cls.probe = contraction_probe(cls.spec, cls.grid, n_pairs=20, seed=42)

    def test_unit_horizon_converges(self):
        self.assertTrue(self.report.converged)
        self.assertLessEqual(self.report.iterations, 200)
        self.assertLessEqual(self.report.final_residual, 1e-8)

    def test_sampled_contraction_ratio_is_below_one(self):
        self.assertLess(self.probe.max_ratio, 1.0)

    def test_residuals_shrink_at_the_sampled_rate(self):
        k = self.probe.max_ratio
        residuals = self.report.residuals
        for n in range(1, len(residuals) - 1):
            if residuals[n] < 1e-6:
                break
            self.assertLessEqual(residuals[n + 1], (k + 0.05) * residuals[n])

    def test_damping_keeps_the_fixed_point(self):
        damped = picard_solve(self.spec, self.grid, SolveConfig(damping=0.5), initial=self.report.final)
        self.assertTrue(damped.converged)
        self.assertEqual(damped.iterations, 1)


@tag("slow")
class WorkedExampleLongerHorizonTests(SimpleTestCase):

    def setUp(self):
        self.spec = get_problem("paper_example")
        self.grid = Grid(t_max=2.0)

    def test_pure_iteration_settles_into_a_two_cycle(self):
        report = picard_solve(self.spec, self.grid, SolveConfig(max_iter=60), retain_trace=True)
        self.assertFalse(report.converged)
        self.assertEqual(report.status, "inconclusive")
        self.assertGreater(report.final_residual, 0.1)
        self.assertLess(report.trace[-1].distance(report.trace[-3]), 1e-6)

    def test_damping_breaks_the_cycle(self):
        report = picard_solve(self.spec, self.grid, SolveConfig(damping=0.5))
        self.assertTrue(report.converged)
        self.assertLessEqual(report.iterations, 200)
        self.assertLessEqual(report.final_residual, 1e-8)
