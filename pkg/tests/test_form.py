import io
import math
import unittest
from types import SimpleNamespace

import numpy as np
from scipy import integrate

from hestonvar.model import OptionSpec, ParameterError
from hestonvar.coercivity import VariationalParams, continuity_constant
from hestonvar.wspace import CellQuadrature, v_norm
from hestonvar.form import (
    ALL_TERMS, PAIRINGS, assemble, form_coefficients, lumped_mass, export_triplets, dirac_source,
    GaussianBump, ZeroFunction, check_ibp_identities, strong_form_residual, form_on_handles,
    garding_residual, continuity_ratio, beurling_deny_defect)

from .common import STANDARD, CALL, QUAD, certified, small_domain, random_function, rng


VP = VariationalParams(1e-4, 0.05, 3.0, 3.5)


def random_bump(gen, sx=(0.15, 0.25), x0=(-0.3, 0.3)):
    return GaussianBump(gen.uniform(*x0), gen.uniform(0.2, 0.28), gen.uniform(*sx), 0.04,
                        gen.uniform(0.5, 2.0))


class AssemblyTest(unittest.TestCase):
    def test_terms_add_up(self):
        dom = small_domain(16, 12)
        full = assemble(dom, QUAD, STANDARD, VP)
        total = None
        for k in sorted(ALL_TERMS):
            part = assemble(dom, QUAD, STANDARD, VP, terms={k}).A
            total = part if total is None else total + part
        self.assertLess(abs(total - full.A).max(), 1e-12 * abs(full.A).max())

    def test_correlation_terms_vanish(self):
        dom = small_domain(16, 12)
        p = STANDARD._replace(rho=0.0)
        full = assemble(dom, QUAD, p, VP).A
        reduced = assemble(dom, QUAD, p, VP, terms=ALL_TERMS - {6, 7}).A
        self.assertEqual(abs(full - reduced).max(), 0.0)

    def test_second_order_block_structure(self):
        dom = small_domain(16, 12)
        diagonal = assemble(dom, QUAD, STANDARD, VP, terms={1, 3}).A
        cross = assemble(dom, QUAD, STANDARD, VP, terms={7}).A
        block = assemble(dom, QUAD, STANDARD, VP, terms={1, 3, 7}).A
        scale = abs(block).max()
        self.assertLess(abs(diagonal - diagonal.T).max(), 1e-14 * scale)
        symmetric = 0.5 * (block + block.T)
        self.assertLess(abs(symmetric - symmetric.T).max(), 1e-14 * scale)
        self.assertLess(abs(symmetric - diagonal - 0.5 * (cross + cross.T)).max(), 1e-14 * scale)
        skew = 0.5 * (block - block.T)
        self.assertLess(abs(skew - 0.5 * (cross - cross.T)).max(), 1e-14 * scale)
        self.assertGreater(abs(skew).max(), 0.0)
        gen = rng(12)
        for _ in range(20):
            v = gen.standard_normal(dom.size)
            self.assertGreater(v.dot(symmetric.dot(v)), 0.0)

    def test_unknown_terms(self):
        self.assertRaises(ParameterError, form_coefficients, np.ones(3), np.zeros(3),
                          STANDARD, VP, {11})

    def test_mass_matrix(self):
        dom = small_domain(16, 12)
        fm = assemble(dom, QUAD, STANDARD, VP)
        self.assertEqual(fm.mass.shape, (dom.size, dom.size))
        self.assertLess(abs(fm.mass - fm.mass.T).max(), 1e-14 * abs(fm.mass).max())
        lumped = lumped_mass(fm)
        self.assertTrue(np.allclose(lumped.diagonal(), np.asarray(fm.mass.sum(axis=1)).ravel()))
        self.assertEqual(lumped.nnz, dom.size)

    def test_export_triplets(self):
        dom = small_domain(4, 3)
        fm = assemble(dom, QUAD, STANDARD, VP)
        buf = io.StringIO()
        export_triplets(fm.A, buf)
        lines = buf.getvalue().strip().split('\n')
        self.assertEqual(len(lines), fm.A.nnz)
        row, col, value = lines[0].split()
        self.assertEqual((int(row), int(col)), (0, 0))
        self.assertAlmostEqual(float(value), fm.A[0, 0], 14)


def unchecked(record, **changes):
    '''The fields of `record` with `changes` applied, without the
    positivity checks, so a coefficient can be set to zero.'''
    values = record.to_dict()
    values.update(changes)
    return SimpleNamespace(**values)


class TermDeletionTest(unittest.TestCase):
    y = np.linspace(1e-4, 0.5, 7)[:, None]
    s = VP.nu * np.array([-1.0, 0.0, 1.0])[None, :]

    def assert_only_changes(self, reference, changed, expected):
        for name in PAIRINGS:
            delta = np.broadcast_to(expected.get(name, 0.0), reference[name].shape)
            self.assertTrue(np.allclose(reference[name] - changed[name], delta, rtol=0, atol=1e-14),
                            name)
            if name not in expected:
                self.assertTrue(np.array_equal(reference[name], changed[name]), name)

    def assert_matrix_terms(self, p, vp, p0, vp0, affected):
        dom = small_domain(16, 12)
        others = ALL_TERMS - affected
        kept = assemble(dom, QUAD, p, vp, terms=others).A
        kept0 = assemble(dom, QUAD, p0, vp0, terms=others).A
        self.assertEqual(abs(kept - kept0).max(), 0.0)
        full = assemble(dom, QUAD, p, vp).A
        full0 = assemble(dom, QUAD, p0, vp0).A
        removed = (assemble(dom, QUAD, p, vp, terms=affected).A -
                   assemble(dom, QUAD, p0, vp0, terms=affected).A)
        self.assertGreater(abs(removed).max(), 0.0)
        self.assertLess(abs(full - full0 - removed).max(), 1e-14 * abs(full).max())
        return removed

    def test_rate(self):
        r = 0.03
        p = STANDARD._replace(r=r)
        self.assertEqual(STANDARD.r, 0.0)
        self.assert_only_changes(form_coefficients(self.y, self.s, p, VP),
                                 form_coefficients(self.y, self.s, STANDARD, VP),
                                 {'ux_v': -r, 'u_v': r})
        self.assert_matrix_terms(p, VP, STANDARD, VP, frozenset({8, 10}))
        dom = small_domain(16, 12)
        fm = assemble(dom, QUAD, STANDARD, VP)
        discount = (assemble(dom, QUAD, p, VP, terms={10}).A -
                    assemble(dom, QUAD, STANDARD, VP, terms={10}).A)
        self.assertLess(abs(discount - r * fm.mass).max(), 1e-14 * abs(fm.A).max())

    def test_mean_reversion(self):
        p, y = STANDARD, self.y
        p0 = unchecked(STANDARD, kappa=0.0)
        drift = p.kappa * (p.m - y)
        self.assert_only_changes(form_coefficients(y, self.s, p, VP),
                                 form_coefficients(y, self.s, p0, VP),
                                 {'uy_v': -drift, 'u_v': -VP.omega * y * drift})
        self.assert_matrix_terms(p, VP, p0, VP, frozenset({9, 10}))

    def test_transform_exponent(self):
        p, y = STANDARD, self.y
        vp0 = unchecked(VP, omega=0.0)
        omega, sigma2 = VP.omega, p.sigma ** 2
        self.assert_only_changes(form_coefficients(y, self.s, p, VP),
                                 form_coefficients(y, self.s, p, vp0), {
                                     'ux_v': -omega * p.rho * p.sigma * y ** 2,
                                     'uy_v': -omega * sigma2 * y ** 2,
                                     'u_v': -(0.5 * omega * sigma2 * y * (omega * y ** 2 + 1.0) +
                                              omega * y * p.kappa * (p.m - y)),
                                 })
        self.assert_matrix_terms(p, VP, p, vp0, frozenset({8, 9, 10}))


class GardingTest(unittest.TestCase):
    def test_random_functions(self):
        vp, eps, delta, cert = certified()
        dom = small_domain()
        fm = assemble(dom, QUAD, STANDARD, vp)
        gen = rng(2024)
        worst = float('inf')
        for k in range(200):
            v = random_function(dom, gen, smooth=(k % 2 == 0))
            scale = v_norm(v, dom, fm.cells, vp.nu, vp.mu) ** 2
            residual = garding_residual(v, fm, cert)
            worst = min(worst, residual / scale)
            self.assertGreaterEqual(residual, -1e-8 * scale)
        self.assertGreaterEqual(worst, -1e-8)

    def test_requires_certificate(self):
        from hestonvar.coercivity import certify, EpsilonTriple
        dom = small_domain(8, 6)
        fm = assemble(dom, QUAD, STANDARD, VP)
        cert = certify(STANDARD, VP, EpsilonTriple(0.1, 0.5, 1.0))
        self.assertRaises(ParameterError, garding_residual, dom.zeros(), fm, cert)


class ContinuityTest(unittest.TestCase):
    def test_random_pairs(self):
        vp = certified().vp
        dom = small_domain()
        fm = assemble(dom, QUAD, STANDARD, vp)
        bound = continuity_constant(STANDARD, vp, dom)
        gen = rng(99)
        largest = 0.0
        for k in range(500):
            u = random_function(dom, gen, smooth=(k % 3 == 0))
            v = random_function(dom, gen, smooth=(k % 2 == 0))
            largest = max(largest, continuity_ratio(u, v, fm))
        self.assertLessEqual(largest, bound)
        self.assertGreater(largest, 0.0)

    def test_zero_function(self):
        dom = small_domain(8, 6)
        fm = assemble(dom, QUAD, STANDARD, VP)
        self.assertRaises(ParameterError, continuity_ratio, dom.zeros(), dom.zeros() + 1, fm)


class IdentityTest(unittest.TestCase):
    def test_weighted_parts_in_y(self):
        vp = certified().vp
        dom = small_domain()
        gen = rng(17)
        for _ in range(10):
            u, v = random_bump(gen), random_bump(gen)
            for residual, scale in check_ibp_identities(u, v, dom, QUAD, vp.mu, vp.nu):
                self.assertLessEqual(residual, 1e-6 * scale)

    def test_cubic_moment_bound(self):
        vp = certified().vp
        dom = small_domain()
        cells = CellQuadrature(dom, QUAD)
        w = cells.weights(vp.nu, vp.mu)
        x = np.broadcast_to(cells.x_points(), w.shape)
        y = np.broadcast_to(cells.y_points(), w.shape)
        gen = rng(18)
        for _ in range(10):
            v = random_bump(gen)
            lhs = math.sqrt(np.sum(y ** 3 * v.value(x, y) ** 2 * w))
            rhs = math.sqrt(np.sum(y * v.dy(x, y) ** 2 * w)) / vp.mu
            self.assertLessEqual(lhs, rhs * (1 + 1e-9))

    def test_form_matches_operator(self):
        vp = certified().vp
        dom = small_domain()
        gen = rng(19)
        for _ in range(5):
            u = random_bump(gen, sx=(0.12, 0.15), x0=(-0.2, 0.2))
            weak, strong = strong_form_residual(u, u, dom, QUAD, STANDARD, vp)
            self.assertLessEqual(abs(weak - strong), 1e-6 * max(abs(weak), abs(strong)))
            self.assertGreater(weak, 0)

    def test_zero_handle(self):
        dom = small_domain(16, 12)
        bump = GaussianBump(0.0, 0.24, 0.2, 0.04)
        self.assertEqual(form_on_handles(ZeroFunction(), bump, dom, QUAD, STANDARD, VP), 0.0)


class SourceTest(unittest.TestCase):
    def test_total_mass(self):
        dom = small_domain()
        load = dirac_source(0.0, dom, STANDARD, VP, CALL, QUAD)
        self.assertTrue(np.all(load >= 0))

        def density(y):
            return 0.5 * y * math.exp((VP.mu - 0.5 * VP.omega) * y * y)

        a, top, h = dom.a, dom.y_max, dom.hy
        whole = integrate.quad(density, a, top, epsabs=1e-14, epsrel=1e-13)[0]
        low = integrate.quad(lambda y: density(y) * (1 - (y - a) / h), a, a + h, epsabs=1e-16)[0]
        high = integrate.quad(lambda y: density(y) * (y - top + h) / h, top - h, top, epsabs=1e-16)[0]
        self.assertAlmostEqual(load.sum() / (whole - low - high), 1.0, 9)

    def test_single_column(self):
        dom = small_domain()
        load = dirac_source(0.0, dom, STANDARD, VP, CALL, QUAD).reshape(dom.interior_shape)
        touched = np.nonzero(np.abs(load).sum(axis=0) > 1e-12)[0]
        self.assertTrue(1 <= len(touched) <= 2)

    def test_line_outside(self):
        dom = small_domain()
        far = OptionSpec(100.0, 1.0)
        self.assertFalse(np.any(dirac_source(0.0, dom, STANDARD, VP, far, QUAD)))

    def test_moving_line(self):
        dom = small_domain()
        p = STANDARD._replace(r=0.05)
        early = dirac_source(0.0, dom, p, VP, CALL, QUAD).reshape(dom.interior_shape)
        late = dirac_source(0.9, dom, p, VP, CALL, QUAD).reshape(dom.interior_shape)
        self.assertLess(np.argmax(late.sum(axis=0)), np.argmax(early.sum(axis=0)))


class PositivityTest(unittest.TestCase):
    def test_beurling_deny_defect(self):
        vp = certified().vp
        dom = small_domain()
        fm = assemble(dom, QUAD, STANDARD, vp)
        gen = rng(23)
        positive = np.abs(gen.standard_normal(dom.size))
        self.assertEqual(beurling_deny_defect(positive, fm), 0.0)
        for _ in range(20):
            v = gen.standard_normal(dom.size)
            scale = float(np.abs(v).dot(abs(fm.A).dot(np.abs(v))))
            self.assertLessEqual(beurling_deny_defect(v, fm), 1e-12 * scale)


if __name__ == '__main__':
    unittest.main()
