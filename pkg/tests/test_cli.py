import io
import csv
import json
import os
import unittest
from unittest import mock

from hestonvar import cli
from hestonvar.config import RunConfig
from hestonvar.coercivity import CoercivityCertificate

from .common import TemporaryDirectory, path_in


STANDARD_CONFIG = os.path.join(os.path.dirname(cli.__file__), "data", "standard.hjson")

SMALL_RUN = ["--set", "domain.nx=32", "--set", "domain.ny=24", "--set", "time.nt=16",
             "--set", "mc.paths=2000", "--set", "mc.steps=10", "--set", "search.grid_points=16"]


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with mock.patch('sys.stdout', out), mock.patch('sys.stderr', err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()


def read_rows(path):
    with open(path, newline='') as fh:
        return list(csv.reader(fh))


class CommandLineTest(unittest.TestCase):
    def test_feasibility(self):
        with TemporaryDirectory() as tmp:
            code, out, _ = run("feasibility", "--config", STANDARD_CONFIG, "--out", tmp, *SMALL_RUN)
            self.assertEqual(code, cli.EXIT_OK)
            self.assertIn("certified (truncated)", out)
            cert = CoercivityCertificate.load(path_in(tmp, "certificate.json"))
            self.assertTrue(cert.certified)
            with open(path_in(tmp, "certificate.json")) as fh:
                self.assertEqual(json.load(fh)['mode'], 'truncated')

    def test_infeasible_exit_code(self):
        with TemporaryDirectory() as tmp:
            code, _, err = run("feasibility", "--config", STANDARD_CONFIG, "--out", tmp,
                               "--set", "model.rho=0.99", *SMALL_RUN)
            self.assertEqual(code, cli.EXIT_INFEASIBLE)
            self.assertIn("rho-window", err)
            self.assertTrue(os.path.exists(path_in(tmp, "certificate.json")))

    def test_feller_exit_code(self):
        with TemporaryDirectory() as tmp:
            code, _, err = run("feasibility", "--config", STANDARD_CONFIG, "--out", tmp,
                               "--set", "model.sigma=0.5")
            self.assertEqual(code, cli.EXIT_INFEASIBLE)
            self.assertIn("feller", err)

    def test_configuration_errors(self):
        with TemporaryDirectory() as tmp:
            code, _, err = run("feasibility", "--config", STANDARD_CONFIG, "--out", tmp,
                               "--set", "model.kappa=-2")
            self.assertEqual(code, cli.EXIT_CONFIG)
            code, _, _ = run("price", "--config", path_in(tmp, "missing.hjson"), "--out", tmp)
            self.assertEqual(code, cli.EXIT_CONFIG)

    def test_numerical_failure(self):
        def explode(cfg, out_dir):
            raise cli.NumericalFailure("singular", condition=float('inf'))
        with TemporaryDirectory() as tmp:
            with mock.patch.dict(cli.COMMANDS, {'price': explode}):
                code, _, err = run("price", "--config", STANDARD_CONFIG, "--out", tmp)
            self.assertEqual(code, cli.EXIT_NUMERICAL)
            self.assertIn("singular", err)

    def test_price(self):
        with TemporaryDirectory() as tmp:
            code, _, _ = run("price", "--config", STANDARD_CONFIG, "--out", tmp, *SMALL_RUN)
            self.assertEqual(code, cli.EXIT_OK)
            for name in ("certificate.json", "norms.csv", "surface.csv", "compare.csv"):
                self.assertTrue(os.path.exists(path_in(tmp, name)), name)
            rows = read_rows(path_in(tmp, "compare.csv"))
            self.assertEqual(rows[0], cli.COMPARE_HEADER)
            self.assertEqual([r[0] for r in rows[1:]], ['analytic', 'pde', 'mc', 'pde-parity'])
            self.assertLess(float(rows[4][3]), 1e-10)
            norms = read_rows(path_in(tmp, "norms.csv"))
            self.assertEqual(norms[0], ['t', 'l2_norm'])
            self.assertEqual(len(norms), 18)
            with open(path_in(tmp, "compare.csv"), 'rb') as fh:
                self.assertNotIn(b'\r', fh.read())

    def test_price_is_reproducible(self):
        outputs = []
        with TemporaryDirectory() as first, TemporaryDirectory() as second:
            for tmp in (first, second):
                code, _, _ = run("price", "--config", STANDARD_CONFIG, "--out", tmp, *SMALL_RUN)
                self.assertEqual(code, cli.EXIT_OK)
            for name in ("certificate.json", "norms.csv", "surface.csv", "compare.csv"):
                with open(path_in(first, name), 'rb') as a, open(path_in(second, name), 'rb') as b:
                    outputs.append(name)
                    self.assertEqual(a.read(), b.read(), name)
        self.assertEqual(len(outputs), 4)

    def test_price_rescales_strike(self):
        overrides = [o for o in SMALL_RUN if o != "--set"] + ["pricing.parity=false"]
        base = RunConfig.load(STANDARD_CONFIG, overrides)
        scaled = base.with_overrides(["pricing.S0=1.25", "option.K=1.25"])
        self.assertEqual(scaled.pde_option, base.pde_option)
        self.assertEqual(scaled.domain, base.domain)
        with TemporaryDirectory() as tmp:
            unit = cli.cmd_price(base, tmp)
            moved = cli.cmd_price(scaled, tmp)
            surface = read_rows(path_in(tmp, "surface.csv"))
        self.assertAlmostEqual(moved['pde'], 1.25 * unit['pde'], 12)
        self.assertAlmostEqual(moved['analytic'], 1.25 * unit['analytic'], 10)
        spots = sorted({float(row[0]) for row in surface[1:]})
        self.assertLess(spots[0], 1.25)
        self.assertGreater(spots[-1], 1.25)

    def test_spot_outside_domain(self):
        with TemporaryDirectory() as tmp:
            code, _, err = run("price", "--config", STANDARD_CONFIG, "--out", tmp,
                               "--set", "pricing.S0=100", *SMALL_RUN)
            self.assertEqual(code, cli.EXIT_CONFIG)
            self.assertIn("outside", err)
            self.assertFalse(os.path.exists(path_in(tmp, "compare.csv")))

    def test_malformed_thread_count(self):
        with TemporaryDirectory() as tmp:
            with mock.patch.dict(os.environ, {'HESTONVAR_THREADS': 'many'}):
                code, _, err = run("mc-compare", "--config", STANDARD_CONFIG, "--out", tmp,
                                   *SMALL_RUN)
            self.assertEqual(code, cli.EXIT_CONFIG)
            self.assertIn("HESTONVAR_THREADS", err)

    def test_mc_compare(self):
        with TemporaryDirectory() as tmp:
            code, _, _ = run("mc-compare", "--config", STANDARD_CONFIG, "--out", tmp, *SMALL_RUN)
            self.assertEqual(code, cli.EXIT_OK)
            rows = read_rows(path_in(tmp, "compare.csv"))
            self.assertEqual([r[0] for r in rows[1:]], ['analytic', 'mc'])
            self.assertGreater(float(rows[2][2]), 0.0)

    def test_convergence(self):
        cfg = RunConfig.load(STANDARD_CONFIG, [o for o in SMALL_RUN if o != "--set"])
        with TemporaryDirectory() as tmp:
            results = cli.cmd_convergence(cfg, tmp, levels=2)
            rows = read_rows(path_in(tmp, "convergence.csv"))
        self.assertEqual(rows[0], ['axis', 'level', 'value', 'price', 'difference', 'observed_order'])
        self.assertEqual(len(rows), 1 + 4 * 2)
        self.assertEqual(sorted(results), ['nt', 'nx', 'ny', 'y_max'])
        for prices in results.values():
            self.assertEqual(len(prices), 2)

    def test_parser(self):
        parser = cli.build_parser()
        args = parser.parse_args(["price", "--config", "x.hjson", "--set", "a.b=1", "-vv"])
        self.assertEqual(args.command, "price")
        self.assertEqual(args.overrides, ["a.b=1"])
        self.assertEqual(args.verbose, 2)
        with mock.patch('sys.stderr', io.StringIO()):
            self.assertRaises(SystemExit, parser.parse_args, ["unknown"])


if __name__ == '__main__':
    unittest.main()
