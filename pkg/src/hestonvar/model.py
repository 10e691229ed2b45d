'''
Heston model parameters, European payoffs and the change of unknowns linking
the backward pricing problem to the forward weighted problem.

The price ``U(t, S, y)`` of a European claim with payoff ``h`` solves the
backward Heston equation. Writing ``x = ln S`` and reversing time, the excess
over the discounted forward payoff

.. math::

    \\tilde u = U - e^{-r(T-t)} h(S e^{r(T-t)}),\\qquad u = e^{-\\omega y^2 / 2} \\tilde u

solves a forward parabolic problem with zero initial data and a line source
supported on the moving strike line ``x = ln K - r t``.
'''
import math
import logging

import numpy as np

from hestonvar.utils.base import Struct, HestonvarError
from hestonvar.utils.enum import Enum


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


class ParameterError(HestonvarError, ValueError):
    '''Raised when a parameter record violates its invariants.'''
    pass


class OptionKind(Enum):
    call = 1
    put = 2


def _finite(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError("%s must be a real number, got %r" % (name, value))
    if not math.isfinite(value):
        raise ParameterError("%s must be finite, got %r" % (name, value))
    return value


class HestonParams(Struct):
    '''Risk-neutral Heston dynamics.

    Attributes
    ----------
    kappa: float
        Rate of mean reversion of the variance
    m: float
        Long-run variance level
    sigma: float
        Volatility of variance
    rho: float
        Correlation between the asset and variance noises
    r: float
        Risk-free rate
    eta: float
        Physical drift of the asset. Stored for reference, never used in pricing.
    '''
    __slots__ = ('kappa', 'm', 'sigma', 'rho', 'r', 'eta')

    @classmethod
    def _defaults(cls):
        return {'r': 0.0, 'eta': 0.0}

    def _validate(self):
        for field in self.__slots__:
            object.__setattr__(self, field, _finite(field, getattr(self, field)))
        if self.kappa <= 0:
            raise ParameterError("kappa must be positive, got %r" % self.kappa)
        if self.m <= 0:
            raise ParameterError("m must be positive, got %r" % self.m)
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive, got %r" % self.sigma)
        if self.r < 0:
            raise ParameterError("r must be non-negative, got %r" % self.r)
        if abs(self.rho) > 1:
            raise ParameterError("|rho| must not exceed 1, got %r" % self.rho)


class OptionSpec(Struct):
    '''A European vanilla option on an asset with spot normalized to 1.'''
    __slots__ = ('K', 'T', 'kind')

    @classmethod
    def _defaults(cls):
        return {'kind': OptionKind.call}

    def _validate(self):
        object.__setattr__(self, 'K', _finite('K', self.K))
        object.__setattr__(self, 'T', _finite('T', self.T))
        if self.K <= 0:
            raise ParameterError("K must be positive, got %r" % self.K)
        if self.T <= 0:
            raise ParameterError("T must be positive, got %r" % self.T)
        try:
            object.__setattr__(self, 'kind', OptionKind[self.kind])
        except KeyError:
            raise ParameterError("Unknown option kind %r" % (self.kind,))

    def to_dict(self):
        d = super(OptionSpec, self).to_dict()
        d['kind'] = str(self.kind)
        return d


def feller_margin(p):
    '''``kappa * m - sigma**2 / 2``. The model is admissible iff this is
    strictly positive.'''
    return p.kappa * p.m - p.sigma ** 2 / 2.0


def bessel_dimension(p):
    '''Dimension ``4 kappa m / sigma**2`` of the squared Bessel process
    underlying the variance. It exceeds 2 exactly when the Feller margin is
    positive.'''
    return 4.0 * p.kappa * p.m / p.sigma ** 2


def payoff(spec, S):
    '''European payoff, vectorized over `S`.'''
    S = np.asarray(S, dtype=float)
    if spec.kind == OptionKind.call:
        out = np.maximum(S - spec.K, 0.0)
    else:
        out = np.maximum(spec.K - S, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def discounted_payoff(spec, S, tau, r):
    '''The baseline ``e^{-r tau} h(S e^{r tau})`` for time to maturity `tau`.'''
    growth = math.exp(r * tau)
    return payoff(spec, np.asarray(S, dtype=float) * growth) / growth


def recover_price(u_value, t, S, y, spec, p, omega):
    '''
    Invert the change of unknowns: rebuild the option price from the forward
    solution.

    Parameters
    ----------
    u_value: float or array
        Forward solution evaluated at forward time ``T - t``, ``x = ln S``
        and variance `y`
    t: float
        Calendar time in ``[0, T]``
    S: float or array
        Spot price(s), strictly positive
    y: float or array
        Variance level(s)
    spec: :class:`OptionSpec`
    p: :class:`HestonParams`
    omega: float
        Transform exponent

    Returns
    -------
    float or np.ndarray

    Raises
    ------
    ParameterError
        If any spot is not strictly positive or `t` lies outside ``[0, T]``
    '''
    S = np.asarray(S, dtype=float)
    if np.any(S <= 0):
        raise ParameterError("Spot prices must be strictly positive")
    if t < 0 or t > spec.T:
        raise ParameterError("t=%r lies outside [0, %r]" % (t, spec.T))
    y = np.asarray(y, dtype=float)
    tau = spec.T - t
    out = np.exp(0.5 * omega * y ** 2) * np.asarray(u_value, dtype=float) + \
        discounted_payoff(spec, S, tau, p.r)
    if np.ndim(out) == 0:
        return float(out)
    return out


def forward_transform(U, t, S, y, spec, p, omega):
    '''The map ``U -> u`` that :func:`recover_price` inverts.'''
    S = np.asarray(S, dtype=float)
    if np.any(S <= 0):
        raise ParameterError("Spot prices must be strictly positive")
    tau = spec.T - t
    excess = np.asarray(U, dtype=float) - discounted_payoff(spec, S, tau, p.r)
    out = np.exp(-0.5 * omega * np.asarray(y, dtype=float) ** 2) * excess
    if np.ndim(out) == 0:
        return float(out)
    return out


def strike_line(spec, p, t):
    '''Log-price location ``ln K - r t`` of the source at forward time `t`.'''
    return math.log(spec.K) - p.r * t
