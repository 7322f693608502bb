# tests/test_config.py
import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from core.config import load_run_config
from core.exceptions import ConfigError


class LoadRunConfigTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text: str) -> Path:
        path = Path(self.tmp.name) / "run.json"
        path.write_text(text, encoding="utf-8")
        return path

    def test_defaults(self):
        config = load_run_config()
        self.assertEqual(config.problem.name, "paper_example")
        self.assertEqual(config.grid.t_max, 20.0)
        self.assertEqual(config.grid.n_nodes, 2001)
        self.assertEqual(config.solve.tol, 1e-8)
        self.assertEqual(config.solve.max_iter, 500)
        self.assertEqual(config.quad.rel_tol, 1e-9)
        self.assertFalse(config.retain_trace)

    def test_file_values_and_flag_overrides(self):
        path = self.write(json.dumps({"grid": {"t_max": 5.0, "n_nodes": 51}, "solve": {"tol": 1e-3}}))
        config = load_run_config(path, {"t_max": 3.0, "tol": None, "problem": "linear_volterra"})
        self.assertEqual(config.grid.t_max, 3.0)
        self.assertEqual(config.grid.n_nodes, 51)
        self.assertEqual(config.solve.tol, 1e-3)
        self.assertEqual(config.problem.name, "linear_volterra")

    def test_malformed_json_reports_position(self):
        path = self.write('{\n  "grid": {"t_max": 5.0,\n}')
        with self.assertRaises(ConfigError) as ctx:
            load_run_config(path)
        self.assertIn("line 3", str(ctx.exception))

    def test_top_level_must_be_object(self):
        with self.assertRaises(ConfigError):
            load_run_config(self.write("[1, 2]"))

    def test_missing_file(self):
        with self.assertRaises(ConfigError) as ctx:
            load_run_config(Path(self.tmp.name) / "absent.json")
        self.assertIn("cannot read config", str(ctx.exception))

    def test_schema_errors_name_dotted_keys(self):
        cases = {
            '{"solve": {"damping": 2}}': "solve.damping",
            '{"quad": {"base_panels": 3}}': "quad.base_panels",
            '{"mnc": {"eps_ladder": [0.1, 0.2]}}': "mnc.eps_ladder",
            '{"gird": {}}': "gird",
            '{"grid": {"t_max": -1}}': "grid.t_max",
        }
        for text, key in cases.items():
            with self.subTest(key=key):
                with self.assertRaises(ConfigError) as ctx:
                    load_run_config(self.write(text))
                self.assertIn(key, str(ctx.exception))

    def test_unknown_override(self):
        with self.assertRaises(ConfigError):
            load_run_config(None, {"colour": "red"})
