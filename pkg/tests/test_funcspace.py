# tests/test_funcspace.py
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from core.exceptions import ContractViolation, DomainError, NumericError
from core.funcspace import Grid, GridFunction, TripleState, eval_at, random_function, sup_dist, sup_norm


class GridTests(SimpleTestCase):

    def test_default_grid_has_hundredth_step(self):
        grid = Grid()
        self.assertEqual(grid.n_nodes, 2001)
        self.assertAlmostEqual(grid.step, 0.01)
        self.assertEqual(grid.nodes[0], 0.0)
        self.assertEqual(grid.nodes[-1], 20.0)

    def test_rejects_bad_horizon_and_node_count(self):
        with self.assertRaises(DomainError):
            Grid(t_max=0.0)
        with self.assertRaises(DomainError):
            Grid(t_max=math.inf)
        with self.assertRaises(DomainError):
            Grid(n_nodes=1)

    def test_from_step(self):
        grid = Grid.from_step(2.0, 0.5)
        self.assertEqual(grid.n_nodes, 5)
        with self.assertRaises(DomainError):
            Grid.from_step(2.0, 0.3)

    def test_node_counting(self):
        grid = Grid(t_max=10.0, n_nodes=11)
        self.assertEqual(grid.count_upto(2.5), 3)
        self.assertEqual(grid.count_upto(-1.0), 0)
        self.assertEqual(grid.count_upto(100.0), 11)
        self.assertEqual(grid.first_at_or_after(2.5), 3)
        self.assertEqual(grid.first_at_or_after(3.0), 3)


class GridFunctionTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(t_max=2.0, n_nodes=201)

    def test_linear_interpolation_between_nodes(self):
        f = GridFunction.sample(self.grid, lambda t: 2 * t)
        self.assertAlmostEqual(f(0.005), 0.01, places=12)
        np.testing.assert_allclose(f.evaluate([0.0, 0.5, 1.234]), [0.0, 1.0, 2.468], atol=1e-12)

    def test_constant_extension_beyond_horizon(self):
        f = GridFunction.sample(self.grid, np.exp)
        self.assertEqual(f(50.0), f.values[-1])
        self.assertEqual(eval_at(f, 2.0), f.values[-1])

    def test_negative_or_non_finite_points_are_rejected(self):
        f = GridFunction.zeros(self.grid)
        with self.assertRaises(DomainError):
            f(-0.1)
        with self.assertRaises(DomainError):
            eval_at(f, math.nan)
        with self.assertRaises(DomainError):
            f.evaluate(np.array([0.5, -1.0]))

    def test_values_are_read_only_and_finite(self):
        f = GridFunction.constant(self.grid, 3.0)
        with self.assertRaises(ValueError):
            f.values[0] = 1.0

        values = np.zeros(self.grid.n_nodes)
        values[7] = np.nan
        with self.assertRaises(NumericError) as ctx:
            GridFunction(self.grid, values)
        self.assertEqual(ctx.exception.location["node"], 7)

    def test_wrong_length_is_a_contract_violation(self):
        with self.assertRaises(ContractViolation):
            GridFunction(self.grid, np.zeros(5))

    def test_sup_distance_and_norm(self):
        f = GridFunction.sample(self.grid, np.sin)
        g = f.shifted(0.25)
        self.assertAlmostEqual(sup_dist(f, g), 0.25)
        self.assertAlmostEqual(sup_norm(f.scaled(-2.0)), 2.0 * float(np.max(np.abs(np.sin(self.grid.nodes)))))

    def test_mismatched_grids(self):
        f = GridFunction.zeros(self.grid)
        g = GridFunction.zeros(Grid(t_max=2.0, n_nodes=11))
        with self.assertRaises(ContractViolation):
            sup_dist(f, g)
        with self.assertRaises(ContractViolation):
            f + g

    def test_csv_header_and_reload(self):
        f = GridFunction.sample(self.grid, lambda t: t**2 / 3)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "f.csv"
            f.to_csv(path)
            self.assertEqual(path.read_text().splitlines()[0], "t,value")
            loaded = GridFunction.from_csv(path)
        self.assertEqual(loaded.grid, self.grid)
        np.testing.assert_array_equal(loaded.values, f.values)


class TripleStateTests(SimpleTestCase):

    def setUp(self):
        self.grid = Grid(t_max=1.0, n_nodes=11)

    def test_distance_is_the_largest_component_distance(self):
        a = TripleState.zeros(self.grid)
        b = TripleState(
            GridFunction.constant(self.grid, 0.1),
            GridFunction.constant(self.grid, -0.7),
            GridFunction.constant(self.grid, 0.3),
        )
        self.assertAlmostEqual(a.distance(b), 0.7)
        self.assertAlmostEqual(b.norm(), 0.7)

    def test_blend(self):
        a = TripleState.zeros(self.grid)
        b = TripleState(*(GridFunction.constant(self.grid, c) for c in (1.0, 2.0, 4.0)))
        self.assertIs(a.blend(b, 1.0), b)
        half = a.blend(b, 0.5)
        self.assertEqual([c(0.3) for c in half], [0.5, 1.0, 2.0])

    def test_components_must_share_a_grid(self):
        other = GridFunction.zeros(Grid(t_max=1.0, n_nodes=21))
        zero = GridFunction.zeros(self.grid)
        with self.assertRaises(ContractViolation):
            TripleState(zero, zero, other)

    def test_csv_header(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "state.csv"
            TripleState.zeros(self.grid).to_csv(path)
            lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "t,x,y,z")
        self.assertEqual(len(lines), 12)


class RandomFunctionTests(SimpleTestCase):

    @settings(max_examples=30, deadline=None, derandomize=True)
    @given(seed=st.integers(0, 2**32 - 1), bound=st.floats(1e-3, 1e3))
    def test_sup_norm_never_exceeds_bound(self, seed, bound):
        grid = Grid(t_max=5.0, n_nodes=101)
        f = random_function(np.random.default_rng(seed), grid, bound)
        self.assertLessEqual(sup_norm(f), bound)

    def test_same_seed_same_function(self):
        grid = Grid(t_max=5.0, n_nodes=101)
        a = random_function(np.random.default_rng(3), grid)
        b = random_function(np.random.default_rng(3), grid)
        np.testing.assert_array_equal(a.values, b.values)


class NormExampleTests(SimpleTestCase):

    def test_interpolated_square(self):
        f = GridFunction.sample(Grid(t_max=1.0, n_nodes=101), np.square)
        self.assertAlmostEqual(f(0.505), 0.255025, delta=5e-5)

    def test_identity_against_square(self):
        grid = Grid(t_max=1.0, n_nodes=101)
        f = GridFunction.sample(grid, lambda t: t)
        g = GridFunction.sample(grid, np.square)
        self.assertAlmostEqual(sup_dist(f, g), 0.25, delta=1e-6)
        self.assertEqual(sup_dist(f, f), 0.0)

    def test_first_forcing_term_peaks_at_one(self):
        grid = Grid(t_max=10.0, n_nodes=1001)
        g1 = GridFunction.sample(grid, lambda t: t**2 / (2 + 2 * t**4))
        self.assertAlmostEqual(sup_norm(g1), 0.25, delta=1e-4)
        self.assertEqual(sup_norm(GridFunction.constant(grid, -3.0)), 3.0)

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(arrays(np.float64, (3, 21), elements=st.floats(-1e6, 1e6)))
    def test_sup_dist_is_a_metric(self, rows):
        grid = Grid(t_max=1.0, n_nodes=21)
        f, g, h = (GridFunction(grid, row) for row in rows)
        self.assertEqual(sup_dist(f, g), sup_dist(g, f))
        self.assertGreaterEqual(sup_dist(f, g), 0.0)
        self.assertLessEqual(sup_dist(f, h), sup_dist(f, g) + sup_dist(g, h) + 1e-6)

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(arrays(np.float64, 11, elements=st.floats(-100, 100)), st.floats(0.0, 5.0))
    def test_evaluation_stays_within_node_values(self, values, t):
        f = GridFunction(Grid(t_max=1.0, n_nodes=11), values)
        self.assertGreaterEqual(f(t), values.min() - 1e-12)
        self.assertLessEqual(f(t), values.max() + 1e-12)
