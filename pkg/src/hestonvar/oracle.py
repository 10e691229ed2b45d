'''
Independent price references for the PDE pipeline.

:func:`heston_price` integrates the Heston characteristic function written
in the form whose complex logarithm never crosses its branch cut, and
:func:`mc_price` simulates the risk-neutral dynamics with the
full-truncation Euler scheme. :func:`black_scholes_price` and
:func:`implied_volatility` serve the low vol-of-vol limit check and the
comparison tables.
'''
import math
import logging
import multiprocessing
import warnings

import numpy as np
from scipy import integrate, optimize, stats

from hestonvar.utils.base import Struct, NumericalFailure, worker_count
from hestonvar.utils.enum import Enum
from hestonvar.model import ParameterError, OptionKind, payoff


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


QUADRATURE_TOLERANCE = 1e-8

#: Paths per random substream; fixing it keeps results independent of the
#: worker count
PATH_CHUNK = 25000


class MCScheme(Enum):
    full_truncation_euler = 1

    __aliases__ = {"full-truncation-euler": "full_truncation_euler"}


class MCConfig(Struct):
    '''Monte Carlo settings.

    Attributes
    ----------
    paths: int
    steps: int
        Time steps per path
    seed: int
        Seed of the :class:`numpy.random.SeedSequence` all substreams derive from
    scheme: :class:`MCScheme`
    '''
    __slots__ = ('paths', 'steps', 'seed', 'scheme')

    @classmethod
    def _defaults(cls):
        return {'seed': 0, 'scheme': MCScheme.full_truncation_euler}

    def _validate(self):
        for name in ('paths', 'steps'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ParameterError("%s must be an integer >= 1, got %r" % (name, value))
            object.__setattr__(self, name, int(value))
        if int(self.seed) != self.seed or self.seed < 0:
            raise ParameterError("seed must be a non-negative integer, got %r" % (self.seed,))
        object.__setattr__(self, 'seed', int(self.seed))
        try:
            object.__setattr__(self, 'scheme', MCScheme[self.scheme])
        except KeyError:
            raise ParameterError("Unknown Monte Carlo scheme %r" % (self.scheme,))

    def to_dict(self):
        d = super(MCConfig, self).to_dict()
        d['scheme'] = str(self.scheme)
        return d


def characteristic_function(u, p, T, S0, y0):
    '''
    ``E[exp(i u ln S_T)]`` under the risk-neutral Heston dynamics.

    `u` may be complex. The ratio ``g`` is formed with ``kappa - i rho sigma u - d``
    in the numerator and ``exp(-d T)`` throughout, so ``|g exp(-d T)| < 1``
    and the logarithm stays on its principal branch.
    '''
    kappa, m, sigma, rho, r = p.kappa, p.m, p.sigma, p.rho, p.r
    iu = 1j * u
    b = kappa - rho * sigma * iu
    d = np.sqrt(b * b + sigma ** 2 * (iu + u * u))
    g = (b - d) / (b + d)
    decay = np.exp(-d * T)
    C = r * iu * T + kappa * m / sigma ** 2 * ((b - d) * T - 2.0 * np.log((1.0 - g * decay) / (1.0 - g)))
    D = (b - d) / sigma ** 2 * (1.0 - decay) / (1.0 - g * decay)
    return np.exp(C + D * y0 + iu * math.log(S0))


def _probability(integrand):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, error = integrate.quad(integrand, 0.0, np.inf, limit=500, epsabs=1e-12, epsrel=1e-10)
    if not math.isfinite(value) or error > QUADRATURE_TOLERANCE:
        raise NumericalFailure("Fourier integral did not converge (estimate %r, error %r)" % (value, error))
    return 0.5 + value / math.pi


def heston_price(p, spec, S0, y0):
    '''
    Semi-analytic European price.

    Parameters
    ----------
    p: :class:`~.HestonParams`
    spec: :class:`~.OptionSpec`
    S0: float
    y0: float
        Initial variance

    Returns
    -------
    float

    Raises
    ------
    NumericalFailure
        When the Fourier integral does not reach the target accuracy
    '''
    if S0 <= 0:
        raise ParameterError("S0 must be positive, got %r" % (S0,))
    if y0 < 0:
        raise ParameterError("y0 must be non-negative, got %r" % (y0,))
    T, K = spec.T, spec.K
    log_k = math.log(K)
    forward = S0 * math.exp(p.r * T)

    def stock_measure(u):
        phi = characteristic_function(u - 1j, p, T, S0, y0) / forward
        return (np.exp(-1j * u * log_k) * phi / (1j * u)).real

    def bond_measure(u):
        phi = characteristic_function(u, p, T, S0, y0)
        return (np.exp(-1j * u * log_k) * phi / (1j * u)).real

    P1 = _probability(stock_measure)
    P2 = _probability(bond_measure)
    discount = math.exp(-p.r * T)
    if spec.kind == OptionKind.call:
        return S0 * P1 - K * discount * P2
    return K * discount * (1.0 - P2) - S0 * (1.0 - P1)


def black_scholes_price(spec, S0, vol, r=0.0):
    '''Black-Scholes price of `spec` at volatility `vol`.'''
    T, K = spec.T, spec.K
    if vol <= 0:
        intrinsic = payoff(spec, S0 * math.exp(r * T))
        return math.exp(-r * T) * intrinsic
    sd = vol * math.sqrt(T)
    d1 = (math.log(S0 / K) + (r + 0.5 * vol ** 2) * T) / sd
    d2 = d1 - sd
    if spec.kind == OptionKind.call:
        return S0 * stats.norm.cdf(d1) - K * math.exp(-r * T) * stats.norm.cdf(d2)
    return K * math.exp(-r * T) * stats.norm.cdf(-d2) - S0 * stats.norm.cdf(-d1)


def implied_volatility(price, spec, S0, r=0.0, bounds=(1e-6, 5.0)):
    '''
    Invert :func:`black_scholes_price` by Brent's method.

    Raises
    ------
    ParameterError
        When `price` lies outside the range spanned by `bounds`
    '''
    lo, hi = bounds

    def objective(vol):
        return black_scholes_price(spec, S0, vol, r) - price

    if objective(lo) * objective(hi) > 0:
        raise ParameterError("Price %r has no implied volatility in %r" % (price, bounds))
    return optimize.brentq(objective, lo, hi, xtol=1e-12)


def _simulate_chunk(work):
    p, S0, y0, T, steps, n_paths, seed_seq = work
    rng = np.random.default_rng(seed_seq)
    dt = T / steps
    root_dt = math.sqrt(dt)
    rho_bar = math.sqrt(1.0 - p.rho ** 2)
    log_s = np.full(n_paths, math.log(S0))
    y = np.full(n_paths, float(y0))
    for _ in range(steps):
        z1 = rng.standard_normal(n_paths)
        z2 = p.rho * z1 + rho_bar * rng.standard_normal(n_paths)
        positive = np.maximum(y, 0.0)
        root_y = np.sqrt(positive)
        log_s += (p.r - 0.5 * positive) * dt + root_y * root_dt * z1
        y += p.kappa * (p.m - positive) * dt + p.sigma * root_y * root_dt * z2
    return np.exp(log_s), y


def mc_simulate(p, S0, y0, T, cfg, processes=1):
    '''
    Simulate terminal ``(S_T, Y_T)`` under the risk-neutral measure with the
    full-truncation Euler scheme: the variance is clipped at zero inside
    both its drift and diffusion, and the log-price uses the clipped value.

    Paths are split into chunks of :data:`PATH_CHUNK`, each drawing from its
    own substream spawned from ``cfg.seed``, so the output does not depend on
    `processes`.

    Returns
    -------
    S_T: np.ndarray
    Y_T: np.ndarray
        The unclipped variance state at maturity
    '''
    if cfg.scheme != MCScheme.full_truncation_euler:  # pragma: no cover
        raise ParameterError("Unsupported scheme %r" % (cfg.scheme,))
    sizes = [PATH_CHUNK] * (cfg.paths // PATH_CHUNK)
    if cfg.paths % PATH_CHUNK:
        sizes.append(cfg.paths % PATH_CHUNK)
    streams = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    work = [(p, S0, y0, T, cfg.steps, n, s) for n, s in zip(sizes, streams)]
    processes = worker_count(processes)
    if processes > 1 and len(work) > 1:
        pool = multiprocessing.Pool(min(processes, len(work)))
        try:
            chunks = pool.map(_simulate_chunk, work)
        finally:
            pool.close()
            pool.join()
    else:
        chunks = [_simulate_chunk(w) for w in work]
    S = np.concatenate([c[0] for c in chunks])
    Y = np.concatenate([c[1] for c in chunks])
    return S, Y


def mc_price(p, spec, S0, y0, cfg, processes=1):
    '''
    Monte Carlo price of `spec`.

    Returns
    -------
    price: float
    std_error: float
    '''
    S, _ = mc_simulate(p, S0, y0, spec.T, cfg, processes=processes)
    discounted = math.exp(-p.r * spec.T) * payoff(spec, S)
    price = float(np.mean(discounted))
    std_error = float(np.std(discounted, ddof=1) / math.sqrt(len(discounted))) if len(discounted) > 1 else float('nan')
    logger.debug("Monte Carlo price %0.6f +/- %0.6f over %d paths", price, std_error, len(discounted))
    return price, std_error
