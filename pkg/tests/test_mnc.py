# tests/test_mnc.py
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from core.exceptions import ContractViolation, DomainError
from core.funcspace import Grid, GridFunction
from core.mnc import (
    axiom_suite,
    diam_at,
    family_modulus,
    mnc_estimate,
    modulus,
    product_mnc,
    random_family,
    tail_diam,
)
from core.schemas import MncParams


class ModulusTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(t_max=10.0, n_nodes=1001)
        self.ramp = GridFunction.sample(self.grid, lambda t: t)

    def test_ramp_modulus_equals_eps(self):
        self.assertAlmostEqual(modulus(self.ramp, 5.0, 0.5), 0.5, places=12)
        self.assertAlmostEqual(modulus(self.ramp, 10.0, 0.01), 0.01, places=12)

    def test_constant_has_zero_modulus(self):
        self.assertEqual(modulus(GridFunction.constant(self.grid, 4.0), 10.0, 0.5), 0.0)

    def test_window_is_restricted_to_zero_k(self):
        # tent supported on [6, 7]
        bump = GridFunction.sample(self.grid, lambda t: np.clip(1.0 - np.abs(t - 6.5) * 2.0, 0.0, None))
        self.assertEqual(modulus(bump, 5.0, 0.5), 0.0)
        self.assertGreater(modulus(bump, 10.0, 0.5), 0.0)

    def test_family_modulus_is_worst_member(self):
        steep = GridFunction.sample(self.grid, lambda t: 2 * t)
        self.assertAlmostEqual(family_modulus([self.ramp, steep], 5.0, 0.5), 1.0, places=12)

    def test_window_arguments(self):
        with self.assertRaises(DomainError):
            modulus(self.ramp, 11.0, 0.5)
        with self.assertRaises(DomainError):
            modulus(self.ramp, 5.0, 0.0)
        with self.assertRaises(DomainError):
            modulus(self.ramp, -1.0, 0.5)


class DiameterTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(t_max=10.0, n_nodes=101)

    def test_diam_at_point(self):
        family = [GridFunction.constant(self.grid, c) for c in (0.0, 1.0, -1.0)]
        self.assertEqual(diam_at(family, 3.0), 2.0)

    def test_tail_diameter_uses_trailing_window(self):
        family = [GridFunction.sample(self.grid, lambda t: t / 10), GridFunction.zeros(self.grid)]
        self.assertAlmostEqual(tail_diam(family), 1.0)
        self.assertAlmostEqual(tail_diam(family, MncParams(tail_start=2.0)), 1.0)

    def test_empty_and_mixed_families(self):
        with self.assertRaises(DomainError):
            diam_at([], 1.0)
        other = GridFunction.zeros(Grid(t_max=10.0, n_nodes=11))
        with self.assertRaises(ContractViolation):
            tail_diam([GridFunction.zeros(self.grid), other])


class MncEstimateTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(t_max=1.0, n_nodes=11)

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(st.lists(st.floats(-100.0, 100.0), min_size=1, max_size=6))
    def test_constant_family_measure_is_its_spread(self, levels):
        report = mnc_estimate([GridFunction.constant(self.grid, c) for c in levels])
        self.assertEqual(report.omega0_est, 0.0)
        self.assertEqual(report.mu_est, max(levels) - min(levels))

    def test_modulus_table_ends_at_largest_k_smallest_eps(self):
        ramp = GridFunction.sample(self.grid, lambda t: t)
        report = mnc_estimate([ramp], MncParams(eps_ladder=[0.5, 0.2], k_ladder=[0.5, 1.0]))
        self.assertEqual([(e.k, e.eps) for e in report.modulus_table], [(0.5, 0.5), (0.5, 0.2), (1.0, 0.5), (1.0, 0.2)])
        self.assertAlmostEqual(report.omega0_est, 0.2)
        self.assertEqual(report.tail_diam_est, 0.0)

    def test_tail_start_must_precede_horizon(self):
        with self.assertRaises(DomainError):
            mnc_estimate([GridFunction.zeros(self.grid)], MncParams(tail_start=1.0))

    def test_diameter_csv(self):
        report = mnc_estimate([GridFunction.zeros(self.grid), GridFunction.constant(self.grid, 2.0)])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "diam.csv"
            report.diam_to_csv(path)
            lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "t,diam")
        self.assertEqual(lines[1], "0,2")

    def test_product_combiners(self):
        reports = [mnc_estimate([GridFunction.constant(self.grid, 0.0), GridFunction.constant(self.grid, c)]) for c in (1.0, 2.0, 4.0)]
        self.assertEqual(product_mnc(reports, "max"), 4.0)
        self.assertEqual(product_mnc(reports, "sum"), 7.0)
        with self.assertRaises(DomainError):
            product_mnc(reports[:2])
        with self.assertRaises(DomainError):
            product_mnc(reports, "mean")


class AxiomSuiteTests(SimpleTestCase):

    def test_random_families_satisfy_both_axioms(self):
        grid = Grid(t_max=5.0, n_nodes=51)
        suite = axiom_suite(random_family(grid, size=3), n_trials=10, seed=0)
        self.assertEqual(suite.trials, 10)
        self.assertEqual(suite.monotonicity_passed, 10)
        self.assertEqual(suite.convexity_passed, 10)
        self.assertTrue(suite.passed)
        self.assertEqual(suite.failures, ())

    @tag("slow")
    def test_hundred_trials_of_five_member_families(self):
        suite = axiom_suite(random_family(Grid(t_max=5.0, n_nodes=51), size=5), n_trials=100, seed=7)
        self.assertEqual((suite.monotonicity_passed, suite.convexity_passed), (100, 100))
        self.assertTrue(suite.passed)

    def test_bad_arguments(self):
        grid = Grid(t_max=5.0, n_nodes=51)
        with self.assertRaises(DomainError):
            random_family(grid, size=0)
        with self.assertRaises(DomainError):
            axiom_suite(random_family(grid), n_trials=0, seed=0)


@st.composite
def families(draw):
    """(grid, values, k, eps) with up to eight members on a short grid."""
    n_nodes = draw(st.integers(2, 25))
    members = draw(st.integers(1, 8))
    grid = Grid(t_max=1.0, n_nodes=n_nodes)
    values = draw(arrays(np.float64, (members, n_nodes), elements=st.floats(-1e3, 1e3)))
    k = draw(st.floats(grid.step, 1.0))
    eps = draw(st.floats(1e-3, 1.5))
    return grid, values, k, eps


def brute_force_modulus(grid, values, k, eps):
    inside = grid.count_upto(k)
    lag = int(np.floor(eps / grid.step + 1e-9))
    best = 0.0
    for row in values:
        for i in range(inside):
            for j in range(i + 1, min(inside, i + lag + 1)):
                best = max(best, abs(row[j] - row[i]))
    return best


class ModulusOracleTests(SimpleTestCase):

    @settings(max_examples=100, deadline=None, derandomize=True)
    @given(families())
    def test_matches_pairwise_scan(self, case):
        grid, values, k, eps = case
        family = [GridFunction(grid, row) for row in values]
        self.assertEqual(family_modulus(family, k, eps), brute_force_modulus(grid, values, k, eps))

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(families())
    def test_monotone_in_window_and_eps(self, case):
        grid, values, k, eps = case
        family = [GridFunction(grid, row) for row in values]
        here = family_modulus(family, k, eps)
        self.assertLessEqual(here, family_modulus(family, 1.0, eps))
        self.assertLessEqual(here, family_modulus(family, k, 2 * eps))

    def test_line_pair_on_unit_interval(self):
        grid = Grid(t_max=1.0, n_nodes=101)
        family = [GridFunction.sample(grid, lambda t: t), GridFunction.sample(grid, lambda t: 2 * t)]
        self.assertAlmostEqual(family_modulus(family, 1.0, 0.1), 0.2, places=12)

    def test_decaying_tail(self):
        grid = Grid(t_max=20.0, n_nodes=201)
        family = [GridFunction.sample(grid, lambda t: np.exp(-t)), GridFunction.zeros(grid)]
        self.assertAlmostEqual(tail_diam(family, MncParams(tail_start=16.0)), np.exp(-16.0), places=15)

    def test_sum_combiner_adds_components(self):
        grid = Grid(t_max=1.0, n_nodes=11)
        reports = [mnc_estimate([GridFunction.zeros(grid), GridFunction.constant(grid, c)]) for c in (1.0, 2.0, 3.0)]
        self.assertEqual(product_mnc(reports, "sum"), 6.0)
