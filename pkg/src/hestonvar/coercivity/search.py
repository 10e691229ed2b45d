'''
Deterministic coarse-to-fine search for a certified parameter tuple.

The search walks a fixed grid over ``(delta, eps1, eps2, nu, mu, eps3,
omega)``. ``eps3`` and ``omega`` are placed at fixed fractions of their
admissible windows, which depend on the other axes, so every candidate
already honours the windows it can. Ties between candidates are broken by
grid order, so the result is reproducible whether or not a process pool
evaluates the ``delta`` axis.
'''
import logging
import multiprocessing

import numpy as np

from hestonvar.utils.base import Struct, worker_count
from hestonvar.model import feller_margin

from .constants import (
    InfeasibleError, VariationalParams, EpsilonTriple, DEFAULT_CUTOFF,
    delta_max, aux_constants, alpha_coefficients, omega_discriminant,
    omega_upper_cap, _omega_endpoints, tbar_of)
from .certificate import certify, CertificateMode, DEFAULT_SLACK


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


class SearchGrid(Struct):
    '''
    The axes of the feasibility search.

    Attributes
    ----------
    delta_fractions: tuple
        Fractions of ``delta_max``
    eps1_values: tuple
    eps2_fractions: tuple
        Fractions of the window ``(2 rho^2 / (2 - tbar), 1 - eps1)``
    log_min, log_max: float
        Bounds of the logarithmic ``nu`` and ``mu`` axes
    grid_points: int
        Points on each logarithmic axis
    coarse_stride: int
        The coarse pass visits every ``coarse_stride``-th point
    t_fractions: tuple
        Fractions of the ``t = 2 eps3 mu`` window ``(tbar, 1 + 1 / (1 + 2 gamma))``
    omega_fractions: tuple
        Fractions of the admissible ``omega`` window
    fine_t_fractions, fine_omega_fractions: tuple
        The same, used in the fine pass
    '''
    __slots__ = ('delta_fractions', 'eps1_values', 'eps2_fractions', 'log_min', 'log_max',
                 'grid_points', 'coarse_stride', 't_fractions', 'omega_fractions',
                 'fine_t_fractions', 'fine_omega_fractions')

    @classmethod
    def _defaults(cls):
        return {
            'delta_fractions': (0.5, 0.75, 0.9, 0.99),
            'eps1_values': (0.05, 0.2),
            'eps2_fractions': (0.5, 0.9),
            'log_min': 1e-4,
            'log_max': 10.0,
            'grid_points': 32,
            'coarse_stride': 4,
            't_fractions': (0.1, 0.5),
            'omega_fractions': (0.1, 0.5),
            'fine_t_fractions': (0.02, 0.1, 0.25, 0.5, 0.75),
            'fine_omega_fractions': (0.02, 0.1, 0.25, 0.5, 0.75),
        }

    def _validate(self):
        for name in ('delta_fractions', 'eps1_values', 'eps2_fractions', 't_fractions',
                     'omega_fractions', 'fine_t_fractions', 'fine_omega_fractions'):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, 'grid_points', int(self.grid_points))
        object.__setattr__(self, 'coarse_stride', max(int(self.coarse_stride), 1))

    def log_axis(self):
        return np.geomspace(self.log_min, self.log_max, self.grid_points)


class SearchResult(Struct):
    '''The winning tuple of :func:`search_feasible`.'''
    __slots__ = ('vp', 'eps', 'delta', 'certificate')

    def __iter__(self):
        return iter(self.__getstate__())


def _window(lo, hi, fraction):
    return lo + fraction * (hi - lo)


def _build_candidate(p, a, delta, eps1, eps2, nu, mu, t_fraction, omega_fraction):
    '''Place ``eps3`` and ``omega`` inside their windows for the other axes.'''
    probe = EpsilonTriple(eps1, eps2, 1.0)
    aux = aux_constants(p, VariationalParams(a, nu, mu, 2.0 * mu), probe, delta)
    t_lo = aux.tbar
    t_hi = 1.0 + 1.0 / (1.0 + 2.0 * aux.gamma) if aux.gamma > 0 else 2.0
    if t_hi <= t_lo:
        t_hi = t_lo * 1.01
    eps3 = _window(t_lo, t_hi, t_fraction) / (2.0 * mu)
    eps = EpsilonTriple(eps1, eps2, eps3)

    omega_lo, omega_hi = mu, omega_upper_cap(p, VariationalParams(a, nu, mu, 2.0 * mu), aux)
    trial = VariationalParams(a, nu, mu, 2.0 * mu)
    disc = omega_discriminant(p, trial, eps, aux)
    if disc >= 0:
        strip_lo, strip_hi = _omega_endpoints(p, trial, eps, aux, disc)
        if strip_lo < strip_hi:
            omega_lo, omega_hi = strip_lo, strip_hi
    if not omega_hi > omega_lo:
        omega_hi = omega_lo * 1.01
    omega = _window(omega_lo, omega_hi, omega_fraction)
    return VariationalParams(a, nu, mu, omega), eps


def _rank(cert):
    return (cert.mode == CertificateMode.strip, cert.c1)


def _failure_count(cert, truncated):
    mode = CertificateMode.truncated if truncated else CertificateMode.strip
    return len(cert.failures(mode))


class _Best(object):
    '''Running optimum over candidates visited in grid order.'''

    def __init__(self):
        self.rank = None
        self.index = None
        self.payload = None
        self.fail_count = None
        self.fail_index = None
        self.fail_payload = None

    def offer(self, index, payload, cert, truncated):
        if cert.certified:
            rank = _rank(cert)
            if self.rank is None or rank > self.rank or (rank == self.rank and index < self.index):
                self.rank, self.index, self.payload = rank, index, payload
        else:
            count = _failure_count(cert, truncated)
            if self.fail_count is None or count < self.fail_count or (
                    count == self.fail_count and index < self.fail_index):
                self.fail_count, self.fail_index, self.fail_payload = count, index, payload

    def merge(self, other):
        if other.rank is not None:
            if self.rank is None or other.rank > self.rank or (
                    other.rank == self.rank and other.index < self.index):
                self.rank, self.index, self.payload = other.rank, other.index, other.payload
        if other.fail_count is not None:
            if self.fail_count is None or other.fail_count < self.fail_count or (
                    other.fail_count == self.fail_count and other.fail_index < self.fail_index):
                self.fail_count = other.fail_count
                self.fail_index = other.fail_index
                self.fail_payload = other.fail_payload

    def __getstate__(self):
        return (self.rank, self.index, self.payload, self.fail_count, self.fail_index, self.fail_payload)

    def __setstate__(self, state):
        (self.rank, self.index, self.payload, self.fail_count, self.fail_index, self.fail_payload) = state


def _coarse_slice(work):
    '''Evaluate the coarse pass for one ``delta`` value. Top-level so a
    process pool can pickle it.'''
    p, band, a, delta_index, delta, grid, slack_margin = work
    axis = grid.log_axis()
    coarse = range(0, grid.grid_points, grid.coarse_stride)
    best = _Best()
    truncated = band is not None
    for i1, eps1 in enumerate(grid.eps1_values):
        eps2_lo = 2.0 * p.rho ** 2 / (2.0 - tbar_of(delta))
        eps2_hi = 1.0 - eps1
        if eps2_hi <= eps2_lo:
            eps2_lo = 0.5 * eps2_hi
        for i2, f2 in enumerate(grid.eps2_fractions):
            eps2 = _window(eps2_lo, eps2_hi, f2)
            for inu in coarse:
                for imu in coarse:
                    for it, ft in enumerate(grid.t_fractions):
                        for iw, fw in enumerate(grid.omega_fractions):
                            vp, eps = _build_candidate(
                                p, a, delta, eps1, eps2, axis[inu], axis[imu], ft, fw)
                            cert = certify(p, vp, eps, delta, domain=band, slack_margin=slack_margin)
                            index = (delta_index, i1, i2, inu, imu, it, iw)
                            best.offer(index, (vp, eps, delta), cert, truncated)
    return best


class FeasibilitySearch(object):
    '''
    Grid search for a coercivity certificate.

    Parameters
    ----------
    p: :class:`~.HestonParams`
    domain: object, optional
        Anything with ``a`` and ``y_max``; enables truncated certificates
    grid: :class:`SearchGrid`, optional
    processes: int, optional
        Worker processes for the coarse pass; 1 runs inline
    slack_margin: float
    a: float, optional
        Variance cutoff when no domain is given
    '''

    def __init__(self, p, domain=None, grid=None, processes=1, slack_margin=DEFAULT_SLACK, a=None):
        self.p = p
        self.domain = domain
        self.grid = grid if grid is not None else SearchGrid()
        self.processes = worker_count(processes)
        self.slack_margin = slack_margin
        if domain is not None:
            self.a = domain.a
        else:
            self.a = a if a is not None else DEFAULT_CUTOFF
        self.pool = None

    def _work(self, dmax):
        for k, fraction in enumerate(self.grid.delta_fractions):
            yield (self.p, self.domain, self.a, k, fraction * dmax, self.grid, self.slack_margin)

    def _create_pool(self):
        self.pool = multiprocessing.Pool(self.processes)

    def coarse_pass(self, dmax):
        best = _Best()
        work = list(self._work(dmax))
        if self.processes > 1 and len(work) > 1:
            if self.pool is None:
                self._create_pool()
            try:
                results = self.pool.map(_coarse_slice, work)
            finally:
                self.pool.close()
                self.pool.join()
                self.pool = None
        else:
            results = [_coarse_slice(w) for w in work]
        for result in results:
            best.merge(result)
        logger.debug("Coarse pass: best rank %r at %r", best.rank, best.index)
        return best

    def fine_pass(self, best):
        grid = self.grid
        axis = grid.log_axis()
        delta_index, i1, i2, inu, imu = best.index[:5]
        vp0, eps0, delta = best.payload
        reach = grid.coarse_stride - 1
        truncated = self.domain is not None
        refined = _Best()
        refined.merge(best)
        for jnu in range(max(inu - reach, 0), min(inu + reach + 1, grid.grid_points)):
            for jmu in range(max(imu - reach, 0), min(imu + reach + 1, grid.grid_points)):
                for it, ft in enumerate(grid.fine_t_fractions):
                    for iw, fw in enumerate(grid.fine_omega_fractions):
                        vp, eps = _build_candidate(
                            self.p, self.a, delta, eps0.eps1, eps0.eps2, axis[jnu], axis[jmu], ft, fw)
                        cert = certify(self.p, vp, eps, delta, domain=self.domain,
                                       slack_margin=self.slack_margin)
                        # fine candidates sort after every coarse one
                        index = (len(grid.delta_fractions), jnu, jmu, it, iw)
                        refined.offer(index, (vp, eps, delta), cert, truncated)
        return refined

    def run(self):
        '''
        Returns
        -------
        :class:`SearchResult`

        Raises
        ------
        InfeasibleError
            With the tightest failing constraint of the closest candidate
        '''
        p = self.p
        if feller_margin(p) <= 0:
            try:
                delta_max(p)
            except InfeasibleError as err:
                vp = VariationalParams(self.a, 0.1, 0.1, 0.2)
                err.report = certify(p, vp, EpsilonTriple(0.1, 0.5, 1.0), domain=self.domain)
                raise
        dmax = delta_max(p)
        best = self.coarse_pass(dmax)
        if best.rank is not None:
            best = self.fine_pass(best)
        if best.rank is None:
            vp, eps, delta = best.fail_payload
            cert = certify(p, vp, eps, delta, domain=self.domain, slack_margin=self.slack_margin)
            mode = CertificateMode.truncated if self.domain is not None else CertificateMode.strip
            name = cert.tightest_failure(mode)
            logger.info("No certificate found; tightest failing constraint %r", name)
            raise InfeasibleError(
                "Feasibility search exhausted, tightest failing constraint %r" % name,
                constraint=name, report=cert)
        vp, eps, delta = best.payload
        cert = certify(p, vp, eps, delta, domain=self.domain, slack_margin=self.slack_margin)
        logger.info("Certified %s tuple with c1=%0.4g, c2=%0.4g", cert.mode, cert.c1, cert.c2)
        return SearchResult(vp, eps, delta, cert)


def search_feasible(p, domain=None, grid=None, processes=1, slack_margin=DEFAULT_SLACK, a=None):
    '''
    Search for a certified ``(VariationalParams, EpsilonTriple, delta)``.

    Strip certificates rank above truncated ones; within a mode the largest
    ``c1`` wins and ties go to the earliest grid index.

    Returns
    -------
    :class:`SearchResult`
        Unpacks as ``vp, eps, delta, certificate``

    Raises
    ------
    InfeasibleError
    '''
    return FeasibilitySearch(p, domain=domain, grid=grid, processes=processes,
                             slack_margin=slack_margin, a=a).run()
