import io
import json
import math
import unittest

from hestonvar.model import OptionKind
from hestonvar.oracle import MCScheme
from hestonvar.config import RunConfig, ConfigError, parse_override, apply_overrides

from .common import STANDARD, TemporaryDirectory, path_in


MINIMAL = '''
{
  // hjson comments are allowed
  model: {kappa: 2, m: 0.04, sigma: 0.3, rho: 0.1}
  option: {K: 1, T: 1}
}
'''


class RunConfigTest(unittest.TestCase):
    def test_standard(self):
        cfg = RunConfig.standard()
        self.assertEqual(cfg.model, STANDARD)
        self.assertIs(cfg.option.kind, OptionKind.call)
        self.assertEqual((cfg.domain.nx, cfg.domain.ny), (128, 96))
        self.assertEqual(cfg.domain.a, 1e-4)
        self.assertAlmostEqual(cfg.domain.y_max, 0.48, 12)
        self.assertEqual(cfg.time.nt, 256)
        self.assertIs(cfg.mc.scheme, MCScheme.full_truncation_euler)
        self.assertEqual(cfg.mc.seed, 20240101)
        self.assertTrue(cfg.parity)
        self.assertIsNone(cfg.variational)
        self.assertTrue(cfg.lumped)
        self.assertEqual(cfg.pde_option, cfg.option)
        self.assertEqual(cfg.quadrature.order, 5)
        self.assertEqual(cfg.search_grid.grid_points, 32)

    def test_minimal_defaults(self):
        cfg = RunConfig.loads(MINIMAL)
        self.assertEqual(cfg.S0, 1.0)
        self.assertEqual(cfg.y0, 0.04)
        self.assertFalse(cfg.parity)
        self.assertEqual(cfg.mc.paths, 100000)
        self.assertTrue(cfg.lumped)
        self.assertEqual(cfg.output_dir, '.')
        self.assertEqual(cfg.processes, 1)

    def test_strike_rescaled_by_spot(self):
        cfg = RunConfig.loads(MINIMAL, ["pricing.S0=2.0", "option.K=1.5"])
        self.assertEqual(cfg.option.K, 1.5)
        self.assertEqual(cfg.pde_option.K, 0.75)
        self.assertIs(cfg.pde_option.kind, cfg.option.kind)
        self.assertAlmostEqual(0.5 * (cfg.domain.x_min + cfg.domain.x_max), math.log(0.75), 12)

    def test_plain_json(self):
        text = json.dumps({'model': {'kappa': 2, 'm': 0.04, 'sigma': 0.3, 'rho': 0.1},
                           'option': {'K': 1.1, 'T': 0.5, 'kind': 'put'}})
        cfg = RunConfig.load(io.StringIO(text))
        self.assertIs(cfg.option.kind, OptionKind.put)
        self.assertEqual(cfg.time.T, 0.5)

    def test_file(self):
        with TemporaryDirectory() as tmp:
            path = path_in(tmp, "run.hjson")
            with open(path, 'w') as fh:
                fh.write(MINIMAL)
            self.assertEqual(RunConfig.load(path, ["model.rho=-0.2"]).model.rho, -0.2)
        self.assertRaises(ConfigError, RunConfig.load, "/no/such/config.hjson")

    def test_overrides(self):
        cfg = RunConfig.standard(["model.rho=0.2", "domain.nx=32", "pricing.parity=false",
                                  "outputs.directory=elsewhere", "delta=0.01"])
        self.assertEqual(cfg.model.rho, 0.2)
        self.assertEqual(cfg.domain.nx, 32)
        self.assertFalse(cfg.parity)
        self.assertEqual(cfg.output_dir, 'elsewhere')
        self.assertEqual(cfg.delta, 0.01)
        again = cfg.with_overrides(["model.rho=0.0"])
        self.assertEqual(again.model.rho, 0.0)
        self.assertEqual(again.domain.nx, 32)

    def test_parse_override(self):
        self.assertEqual(parse_override("model.kappa=1.5"), (('model', 'kappa'), 1.5))
        self.assertEqual(parse_override("option.kind=put"), (('option', 'kind'), 'put'))
        self.assertEqual(parse_override("pricing.parity=true"), (('pricing', 'parity'), True))
        self.assertRaises(ConfigError, parse_override, "model.kappa")
        self.assertRaises(ConfigError, parse_override, "a.b.c=1")
        self.assertRaises(ConfigError, parse_override, ".kappa=1")
        raw = {'delta': 0.1}
        self.assertRaises(ConfigError, apply_overrides, raw, ["delta.value=1"])

    def test_rejections(self):
        self.assertRaises(ConfigError, RunConfig.loads, "{model: {kappa: 2}")
        self.assertRaises(ConfigError, RunConfig.loads, MINIMAL, ["model.speed=1"])
        self.assertRaises(ConfigError, RunConfig.loads, MINIMAL, ["colour.red=1"])
        self.assertRaises(ConfigError, RunConfig.loads, MINIMAL, ["model.kappa=-1"])
        self.assertRaises(ConfigError, RunConfig.loads, MINIMAL, ["variational.nu=0.1"])
        self.assertRaises(ConfigError, RunConfig.loads, MINIMAL, ["pricing.S0=0"])
        self.assertRaises(ConfigError, RunConfig.loads, MINIMAL, ["domain.nx=1"])
        self.assertRaises(ConfigError, RunConfig.loads, "{option: {K: 1, T: 1}}")
        self.assertRaises(ConfigError, RunConfig.loads, "[1, 2]")

    def test_explicit_variational(self):
        overrides = ["variational.a=0.001", "variational.nu=0.01", "variational.mu=1.0",
                     "variational.omega=1.2", "epsilons.eps1=0.1", "epsilons.eps2=0.5",
                     "epsilons.eps3=1.0"]
        cfg = RunConfig.loads(MINIMAL, overrides)
        self.assertEqual(cfg.variational.omega, 1.2)
        self.assertEqual(cfg.domain.a, 0.001)
        self.assertRaises(ConfigError, RunConfig.loads, MINIMAL, overrides + ["domain.a=0.01"])


if __name__ == '__main__':
    unittest.main()
