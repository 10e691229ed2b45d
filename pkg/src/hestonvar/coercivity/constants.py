'''
Closed-form constants behind the Gårding inequality of the weighted Heston
form: the Feller slack, the auxiliary quantities, the six coefficients of the
lower bound, the three gate functions and the admissible windows for
``omega`` and ``eps3``.

Every function here is pure and works on plain floats.
'''
import math

from hestonvar.utils.base import Struct, HestonvarError
from hestonvar.model import ParameterError, feller_margin


class InfeasibleError(HestonvarError):
    '''Raised when a parameter tuple cannot satisfy a required constraint.

    Attributes
    ----------
    constraint: str
        Identifier of the failing constraint
    report: object
        The certificate or partial report explaining the failure, if any
    '''

    def __init__(self, message, constraint=None, report=None):
        super(InfeasibleError, self).__init__(message)
        self.constraint = constraint
        self.report = report


def _positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParameterError("%s must be a real number, got %r" % (name, value))
    if not value > 0 or math.isinf(value):
        raise ParameterError("%s must be positive and finite, got %r" % (name, value))
    return value


class VariationalParams(Struct):
    '''Weight and transform exponents.

    Attributes
    ----------
    a: float
        Lower variance cutoff of the strip
    nu: float
        Exponent of the log-price weight ``exp(nu |x|)``
    mu: float
        Exponent of the variance weight ``exp(mu y^2 / 2)``
    omega: float
        Exponent of the transform ``u = exp(-omega y^2 / 2) u~``

    Construction only checks that each field is positive and finite.
    ``omega > mu`` is a certification constraint: :func:`~.certify` reports
    it as ``omega-above-mu`` and withholds ``c1``/``c2`` when it fails.
    '''
    __slots__ = ('a', 'nu', 'mu', 'omega')

    def _validate(self):
        for field in self.__slots__:
            object.__setattr__(self, field, _positive(field, getattr(self, field)))


class EpsilonTriple(Struct):
    __slots__ = ('eps1', 'eps2', 'eps3')

    def _validate(self):
        for field in self.__slots__:
            object.__setattr__(self, field, _positive(field, getattr(self, field)))


class AuxConstants(Struct):
    '''Auxiliary quantities ``delta, tbar, tau, gamma, beta`` and
    ``c = 2 beta / (mu sigma^2)``.'''
    __slots__ = ('delta', 'tbar', 'tau', 'gamma', 'beta', 'c')

    @property
    def gamma_positive(self):
        return self.gamma > 0


class AlphaCoefficients(Struct):
    __slots__ = ('alpha1', 'alpha2', 'alpha3', 'alpha4', 'alpha5', 'alpha6')


def delta_max(p):
    '''
    Supremum of the Feller slack ``delta`` for which
    ``kappa m > (1 + 2 sqrt(delta)) sigma^2 / 2``.

    Raises
    ------
    InfeasibleError
        When the Feller margin is not strictly positive
    '''
    margin = feller_margin(p)
    if margin <= 0:
        raise InfeasibleError(
            "Feller condition fails: kappa*m - sigma^2/2 = %r" % margin, constraint='feller')
    return (margin / p.sigma ** 2) ** 2


def rho_bound(delta):
    '''Largest admissible ``|rho|`` for a given Feller slack.'''
    if delta <= 0:
        return 0.0
    return math.sqrt(0.5 - 0.5 / math.sqrt(1.0 + delta))


def tbar_of(delta):
    return 1.0 + 1.0 / math.sqrt(1.0 + delta)


def aux_constants(p, vp, eps, delta):
    '''
    Evaluate the auxiliary constants for one parameter tuple.

    ``gamma`` is not forced positive here; a non-positive value means the
    ``eps2`` window ``2 rho^2 / (2 - tbar) < eps2`` is violated and is
    flagged by :meth:`AuxConstants.gamma_positive`.

    Returns
    -------
    :class:`AuxConstants`
    '''
    tbar = tbar_of(delta)
    tau = 1.0 - p.rho ** 2 / eps.eps2
    gamma = 2.0 * tau / tbar - 1.0
    beta = vp.nu ** 2 / (2.0 * eps.eps1) + vp.nu / 2.0
    c = 2.0 * beta / (vp.mu * p.sigma ** 2)
    return AuxConstants(delta=delta, tbar=tbar, tau=tau, gamma=gamma, beta=beta, c=c)


def alpha_coefficients(p, vp, eps, aux):
    '''
    The six coefficients of the lower bound for ``Re a(v, v)``.

    The correlation enters ``alpha3`` and ``alpha4`` only through bounds of
    integrals weighted by ``sign(x)``, so it appears there as ``|rho|``.
    '''
    kappa, m, sigma, r = p.kappa, p.m, p.sigma, p.r
    arho = abs(p.rho)
    nu, mu, omega = vp.nu, vp.mu, vp.omega
    drift = kappa * m - sigma ** 2 / 2.0
    alpha1 = (1.0 - eps.eps1 - eps.eps2) / 2.0
    alpha2 = sigma ** 2 / 2.0 * aux.tau
    alpha3 = -r * nu - kappa / 2.0 - arho * sigma * nu + r
    alpha4 = omega * kappa - kappa * mu - omega * arho * sigma * nu - 2.0 * arho * sigma * nu * mu
    alpha5 = omega * drift + sigma ** 2 * mu + aux.beta - drift * mu
    alpha6 = mu * alpha5 + omega * mu * sigma ** 2 - sigma ** 2 * mu ** 2 - omega ** 2 * sigma ** 2 / 2.0
    return AlphaCoefficients(alpha1, alpha2, alpha3, alpha4, alpha5, alpha6)


def nu_bound(p, vp):
    '''Upper bound on ``nu`` keeping ``alpha4 >= 0`` when ``rho > 0``;
    ``inf`` otherwise.'''
    if p.rho <= 0:
        return float('inf')
    return p.kappa * (vp.omega - vp.mu) / (p.rho * p.sigma * (vp.omega + 2.0 * vp.mu))


POLE_TOLERANCE = 1e-12


def gating_functions(t, aux):
    '''
    Evaluate the gates ``g``, ``f`` and ``f~`` at ``t = 2 eps3 mu``.

    Raises
    ------
    InfeasibleError
        When `t` sits on a pole of one of the rational functions
    '''
    if abs(t - 1.0) < POLE_TOLERANCE:
        raise InfeasibleError("Gate evaluation at the pole t=1", constraint='gate-pole')
    denom = t * (1.0 + 2.0 * aux.gamma) - (2.0 + 2.0 * aux.gamma)
    if abs(denom) < POLE_TOLERANCE:
        raise InfeasibleError("Gate evaluation at the pole of f~ (t=%r)" % t, constraint='gate-pole')
    c = aux.c
    g = ((2.0 + c) * t - (1.0 + c) * t ** 2) / (t - 1.0) ** 2
    lead = aux.gamma - c / 2.0
    f = t / (t - 1.0) * lead
    f_tilde = t / denom * lead ** 2
    return g, f, f_tilde


def omega_discriminant(p, vp, eps, aux):
    drift = feller_margin(p)
    s = vp.mu - 1.0 / (2.0 * eps.eps3)
    return (drift ** 2 * s ** 2 + vp.mu * p.sigma ** 4 * (vp.mu - 1.0 / eps.eps3) +
            2.0 * aux.beta * p.sigma ** 2 * s)


def omega_upper_cap(p, vp, aux):
    '''``mu + (gamma sigma^2 mu - beta) / (kappa m - sigma^2/2)``: the part of
    the upper ``omega`` endpoint that keeps ``alpha2 - alpha5 eps3 / 2``
    positive once ``2 eps3 mu > tbar``.'''
    drift = feller_margin(p)
    if drift <= 0:
        return float('nan')
    return vp.mu + (aux.gamma * p.sigma ** 2 * vp.mu - aux.beta) / drift


def omega_interval(p, vp, eps, aux, alphas=None):
    '''
    The open interval ``(omega_lo, omega_hi)`` of transform exponents that
    make ``alpha6 - alpha5 / (2 eps3)`` non-negative while keeping the
    ``eps3`` window open.

    Returns
    -------
    omega_lo: float
    omega_hi: float
    delta_omega: float
        The discriminant of the quadratic in ``omega``

    Raises
    ------
    InfeasibleError
        With constraint ``omega-discriminant`` when the quadratic has no real
        roots, or ``omega-interval`` when ``omega_lo >= omega_hi``
    '''
    delta_omega = omega_discriminant(p, vp, eps, aux)
    if delta_omega < 0:
        raise InfeasibleError("Negative omega discriminant %r" % delta_omega,
                              constraint='omega-discriminant')
    lo, hi = _omega_endpoints(p, vp, eps, aux, delta_omega)
    if not lo < hi:
        raise InfeasibleError("Empty omega interval (%r, %r)" % (lo, hi), constraint='omega-interval')
    return lo, hi, delta_omega


def _omega_endpoints(p, vp, eps, aux, delta_omega):
    drift = feller_margin(p)
    s2 = p.sigma ** 2
    center = (drift * (vp.mu - 1.0 / (2.0 * eps.eps3)) + s2 * vp.mu) / s2
    half = math.sqrt(delta_omega) / s2
    lo = max(center - half, vp.mu)
    hi = min(center + half, omega_upper_cap(p, vp, aux))
    return lo, hi


def eps3_window(alphas, aux, vp):
    '''
    The open window for ``eps3``.

    Raises
    ------
    ParameterError
        When ``alpha5 <= 0``
    InfeasibleError
        With constraint ``eps3-window`` when the window is empty
    '''
    if alphas.alpha5 <= 0:
        raise ParameterError("alpha5 must be positive, got %r" % alphas.alpha5)
    lo, hi = _eps3_endpoints(alphas, aux, vp)
    if not lo < hi:
        raise InfeasibleError("Empty eps3 window (%r, %r)" % (lo, hi), constraint='eps3-window')
    return lo, hi


def _eps3_endpoints(alphas, aux, vp):
    lo = aux.tbar / (2.0 * vp.mu)
    cap = 1.0 / (2.0 * vp.mu) * (1.0 + 1.0 / (1.0 + 2.0 * aux.gamma))
    if alphas.alpha5 > 0:
        hi = min(2.0 * alphas.alpha2 / alphas.alpha5, cap)
    else:
        hi = cap
    return lo, hi


def beta_cap(p, vp, eps, aux):
    '''``min{mu gamma sigma^2, mu (kappa m - sigma^2/2) + mu sigma^2 / (2 eps3 mu - 1)}``'''
    first = vp.mu * aux.gamma * p.sigma ** 2
    t = 2.0 * eps.eps3 * vp.mu
    if t <= 1.0:
        return first
    second = vp.mu * feller_margin(p) + vp.mu * p.sigma ** 2 / (t - 1.0)
    return min(first, second)


#: Default lower variance cutoff ``a`` of the computational strip
DEFAULT_CUTOFF = 1e-4
