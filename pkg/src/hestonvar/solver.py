'''
Theta-scheme time stepping of the forward problem

.. math::

    (M + \\theta \\Delta t A) u^{n+1} = (M - (1 - \\theta) \\Delta t A) u^n + \\Delta t F^{n+\\theta}

from zero initial data, the discrete semigroup checks, and the recovery of
option prices from the final snapshot.
'''
import csv
import math
import logging

import numpy as np
from scipy.sparse import linalg as splinalg

from hestonvar.utils.base import Struct, NumericalFailure, opened, fmt_float
from hestonvar.model import ParameterError, recover_price
from hestonvar.wspace import interpolate, coefficients
from hestonvar.form import dirac_source, lumped_mass


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


RESIDUAL_TOLERANCE = 1e-10


class TimeGrid(Struct):
    __slots__ = ('T', 'nt', 'theta')

    @classmethod
    def _defaults(cls):
        return {'theta': 1.0}

    def _validate(self):
        T = float(self.T)
        if not T > 0 or not math.isfinite(T):
            raise ParameterError("T must be positive, got %r" % (self.T,))
        if int(self.nt) != self.nt or self.nt < 1:
            raise ParameterError("nt must be an integer >= 1, got %r" % (self.nt,))
        theta = float(self.theta)
        if not 0.5 <= theta <= 1.0:
            raise ParameterError("theta must lie in [1/2, 1], got %r" % (self.theta,))
        object.__setattr__(self, 'T', T)
        object.__setattr__(self, 'nt', int(self.nt))
        object.__setattr__(self, 'theta', theta)

    @property
    def dt(self):
        return self.T / self.nt

    def times(self):
        return np.linspace(0.0, self.T, self.nt + 1)


class SolveResult(object):
    '''
    Snapshots of a forward solve.

    Forward time ``t`` corresponds to calendar time ``T - t``, so the final
    snapshot holds the solution at calendar time zero.

    Attributes
    ----------
    times: np.ndarray
    snapshots: list of np.ndarray
    l2_norm_history: np.ndarray
        ``||u(t)||`` in the weighted L^2 norm of the mass matrix
    '''

    def __init__(self, times, snapshots, l2_norm_history, fm, spec, tg, lumped=False):
        self.times = times
        self.snapshots = snapshots
        self.l2_norm_history = l2_norm_history
        self.fm = fm
        self.spec = spec
        self.tg = tg
        self.lumped = lumped

    @property
    def dom(self):
        return self.fm.dom

    @property
    def final(self):
        return self.snapshots[-1]

    def __len__(self):
        return len(self.snapshots)

    def __repr__(self):
        return "SolveResult(steps=%d, final_norm=%0.6g)" % (len(self) - 1, self.l2_norm_history[-1])

    def price_surface(self, S_grid, y_grid):
        return price_surface(self, S_grid, y_grid)

    def price_at(self, S, y):
        return float(self.price_surface([S], [y])[0, 0])

    def to_csv(self, fp):
        '''Write the ``t,l2_norm`` history.'''
        with opened(fp, 'w') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(['t', 'l2_norm'])
            for t, norm in zip(self.times, self.l2_norm_history):
                writer.writerow([fmt_float(t), fmt_float(norm)])

    def surface_to_csv(self, fp, S_grid, y_grid, scale=1.0):
        '''Write ``S,y,U`` rows of the recovered price surface. Spots and
        prices are multiplied by `scale`, the spot the solve was normalized
        by.'''
        surface = self.price_surface(S_grid, y_grid)
        with opened(fp, 'w') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(['S', 'y', 'U'])
            for i, S in enumerate(S_grid):
                for j, y in enumerate(y_grid):
                    writer.writerow([fmt_float(scale * S), fmt_float(y),
                                     fmt_float(scale * surface[i, j])])


def _bicgstab(matrix, rhs, x0):
    try:
        return splinalg.bicgstab(matrix, rhs, x0=x0, rtol=RESIDUAL_TOLERANCE, atol=0.0, maxiter=5000)
    except TypeError:  # pragma: no cover
        return splinalg.bicgstab(matrix, rhs, x0=x0, tol=RESIDUAL_TOLERANCE, atol=0.0, maxiter=5000)


def _condition_estimate(matrix):
    try:
        lu = splinalg.splu(matrix.tocsc())
        inverse = splinalg.LinearOperator(
            matrix.shape, matvec=lu.solve, rmatvec=lambda b: lu.solve(b, trans='T'))
        return splinalg.onenormest(matrix) * splinalg.onenormest(inverse)
    except (RuntimeError, ValueError):
        return float('inf')


class _Stepper(object):
    '''Factorizes the stepping matrix once and applies it each step.'''

    def __init__(self, lhs, method='lu'):
        self.lhs = lhs.tocsc()
        self.method = method
        self.lu = None
        if method == 'lu':
            try:
                self.lu = splinalg.splu(self.lhs)
            except RuntimeError as err:
                logger.warning("Sparse LU failed (%s); falling back to BiCGSTAB", err)
                self.method = 'bicgstab'
        elif method != 'bicgstab':
            raise ParameterError("Unknown linear solver %r" % (method,))

    def __call__(self, rhs, x0):
        scale = np.linalg.norm(rhs)
        if scale == 0:
            return np.zeros_like(rhs)
        if self.lu is not None:
            x = self.lu.solve(rhs)
            if self._residual(x, rhs, scale) <= RESIDUAL_TOLERANCE:
                return x
            logger.warning("LU residual above tolerance; refining with BiCGSTAB")
            x0 = x
        x, info = _bicgstab(self.lhs, rhs, x0)
        residual = self._residual(x, rhs, scale)
        if info != 0 or not residual <= RESIDUAL_TOLERANCE:
            raise NumericalFailure(
                "Linear solve did not converge (info=%r, relative residual %r)" % (info, residual),
                condition=_condition_estimate(self.lhs))
        return x

    def _residual(self, x, rhs, scale):
        return np.linalg.norm(self.lhs.dot(x) - rhs) / scale


def solve(fm, spec, tg, u0=None, with_source=True, lumped=False, method='lu'):
    '''
    Step the forward problem over ``[0, T]``.

    Parameters
    ----------
    fm: :class:`~.FormMatrices`
    spec: :class:`~.OptionSpec`
    tg: :class:`TimeGrid`
    u0: np.ndarray, optional
        Initial data; zero by default
    with_source: bool
        Include the strike-line source
    lumped: bool
        Use the row-sum lumped mass matrix
    method: {'lu', 'bicgstab'}

    Returns
    -------
    :class:`SolveResult`

    Raises
    ------
    NumericalFailure
    '''
    dom, p, vp = fm.dom, fm.p, fm.vp
    if abs(tg.T - spec.T) > 1e-12 * spec.T:
        raise ParameterError("Time grid horizon %r does not match maturity %r" % (tg.T, spec.T))
    mass = lumped_mass(fm) if lumped else fm.mass
    dt, theta = tg.dt, tg.theta
    lhs = (mass + theta * dt * fm.A)
    explicit = (mass - (1.0 - theta) * dt * fm.A).tocsr()
    step = _Stepper(lhs, method)

    u = dom.zeros() if u0 is None else coefficients(u0, dom).copy()
    times = tg.times()
    snapshots = [u.copy()]
    norms = [math.sqrt(max(float(u.dot(fm.mass.dot(u))), 0.0))]
    for n in range(tg.nt):
        rhs = explicit.dot(u)
        if with_source:
            rhs = rhs + dt * dirac_source(times[n] + theta * dt, dom, p, vp, spec, fm.quad)
        u = step(rhs, u)
        if not np.all(np.isfinite(u)):
            raise NumericalFailure("Non-finite values at step %d" % (n + 1,),
                                   condition=_condition_estimate(step.lhs))
        snapshots.append(u.copy())
        norms.append(math.sqrt(max(float(u.dot(fm.mass.dot(u))), 0.0)))
    logger.debug("Solved %d steps (theta=%g), final norm %0.6g", tg.nt, theta, norms[-1])
    return SolveResult(times, snapshots, np.array(norms), fm, spec, tg, lumped=lumped)


def decay_check(sr, cert, rtol=1e-9):
    '''
    Check the discrete quasi-contraction
    ``||u^{n+1}|| <= ||u^n|| / (1 + dt c2)`` at every implicit Euler step.
    '''
    if sr.tg.theta != 1.0:
        raise ParameterError("decay_check applies to implicit Euler runs only")
    if not cert.certified:
        raise ParameterError("decay_check needs a certified tuple")
    growth = 1.0 + sr.tg.dt * cert.c2
    if growth <= 0:
        raise ParameterError("1 + dt * c2 must be positive, got %r" % growth)
    norms = sr.l2_norm_history
    for n in range(len(norms) - 1):
        bound = norms[n] / growth
        if norms[n + 1] > bound * (1.0 + rtol) + 1e-300:
            logger.info("Quasi-contraction fails at step %d: %r > %r", n + 1, norms[n + 1], bound)
            return False
    return True


def positivity_check(sr, tol=1e-6):
    '''
    Returns
    -------
    min_value: float
        Smallest nodal value over all snapshots
    passed: bool
        Whether ``min_value >= -tol * max_value``
    '''
    lowest = min(float(np.min(s)) if s.size else 0.0 for s in sr.snapshots)
    highest = max(float(np.max(s)) if s.size else 0.0 for s in sr.snapshots)
    return lowest, lowest >= -tol * max(highest, 0.0)


def price_surface(sr, S_grid, y_grid):
    '''
    Recover ``U(0, S, y)`` on the tensor grid ``S_grid x y_grid``. Points
    outside the truncated rectangle come back as ``nan``.
    '''
    S = np.asarray(S_grid, dtype=float)
    y = np.asarray(y_grid, dtype=float)
    if np.any(S <= 0):
        raise ParameterError("Spot prices must be strictly positive")
    SS, YY = np.meshgrid(S, y, indexing='ij')
    u = interpolate(sr.final, sr.dom, np.log(SS), YY)
    outside = np.isnan(u)
    if np.any(outside):
        logger.warning("%d of %d surface points lie outside the truncated domain",
                       int(outside.sum()), outside.size)
    return recover_price(u, 0.0, SS, YY, sr.spec, sr.fm.p, sr.fm.vp.omega)
