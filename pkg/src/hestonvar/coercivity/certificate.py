'''
Machine-checkable coercivity certificates.

:func:`certify` evaluates every constraint that the lower bound

.. math::

    \\mathrm{Re}\\, a(v, v) \\ge c_1 \\|v\\|_V^2 + c_2 \\|v\\|^2

depends on and, when the constraints hold, emits ``c1`` and ``c2``. Two
flavours exist:

``strip``
    Valid on the whole half-strip ``y >= a``. It needs the full constraint
    list, including ``alpha6 - alpha5 / (2 eps3) >= 0``.

``truncated``
    Valid on a truncated rectangle ``y in [a, y_max]`` with zero boundary
    values. The ``y^2`` and ``y^3`` weighted terms are bounded by ``a^k``
    and ``y_max^k`` instead of being absorbed, so only ``alpha1 > 0`` and
    ``alpha2 - |alpha5| eps3 / 2 > 0`` (plus the parameter windows) are
    needed.
'''
import json
import math
import logging

from hestonvar.utils.base import Struct, opened, fmt_float
from hestonvar.utils.enum import Enum
from hestonvar.model import HestonParams, ParameterError, feller_margin

from .constants import (
    InfeasibleError, VariationalParams, EpsilonTriple, AlphaCoefficients, AuxConstants,
    rho_bound, aux_constants, alpha_coefficients, nu_bound, gating_functions,
    omega_discriminant, omega_upper_cap, _omega_endpoints, _eps3_endpoints, beta_cap)


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


DEFAULT_SLACK = 1e-10


class CertificateMode(Enum):
    strip = 1
    truncated = 2


class VarianceBand(Struct):
    '''The variance range ``[a, y_max]`` a truncated certificate is valid on.
    Any object with ``a`` and ``y_max`` attributes, such as
    :class:`~.TruncatedDomain`, can stand in for it.'''
    __slots__ = ('a', 'y_max')

    def _validate(self):
        if not 0 < self.a < self.y_max:
            raise ParameterError("Need 0 < a < y_max, got a=%r, y_max=%r" % (self.a, self.y_max))


class ConstraintCheck(Struct):
    '''One row of a constraint report. ``slack`` is positive when the
    constraint holds with room to spare.'''
    __slots__ = ('name', 'satisfied', 'slack', 'strip_only')


STRIP_ONLY = frozenset([
    'nu-bound', 'alpha4-nonnegative', 'beta-cap', 'omega-discriminant', 'omega-interval',
    'gate-g', 'gate-f', 'gate-f-tilde', 'alpha6-margin'])


class CoercivityCertificate(object):
    '''
    The outcome of :func:`certify`: every derived constant plus the
    per-constraint report. ``c1`` and ``c2`` are ``None`` unless
    :attr:`certified` is true.

    Attributes
    ----------
    p: :class:`~.HestonParams`
    vp: :class:`~.VariationalParams`
    eps: :class:`~.EpsilonTriple`
    band: :class:`VarianceBand` or None
    aux: :class:`~.AuxConstants`
    alphas: :class:`~.AlphaCoefficients`
    omega_lo, omega_hi: float
        Endpoints of the admissible ``omega`` interval (``nan`` when the
        discriminant is negative)
    delta_omega: float
    eps3_lo, eps3_hi: float
    gates: tuple of float
        ``(g, f, f~)`` at ``t = 2 eps3 mu``
    mode: :class:`CertificateMode` or None
    c1, c2: float or None
    constraint_report: list of :class:`ConstraintCheck`
    '''

    def __init__(self, p, vp, eps, band, aux, alphas, omega_lo, omega_hi, delta_omega,
                 eps3_lo, eps3_hi, gates, constraint_report, mode=None, c1=None, c2=None):
        self.p = p
        self.vp = vp
        self.eps = eps
        self.band = band
        self.aux = aux
        self.alphas = alphas
        self.omega_lo = omega_lo
        self.omega_hi = omega_hi
        self.delta_omega = delta_omega
        self.eps3_lo = eps3_lo
        self.eps3_hi = eps3_hi
        self.gates = gates
        self.constraint_report = constraint_report
        self.mode = mode
        self.c1 = c1
        self.c2 = c2

    @property
    def certified(self):
        return self.mode is not None

    @property
    def delta(self):
        return self.aux.delta

    @property
    def omega_interval(self):
        return (self.omega_lo, self.omega_hi)

    def __getitem__(self, name):
        for check in self.constraint_report:
            if check.name == name:
                return check
        raise KeyError(name)

    def failures(self, mode=CertificateMode.strip):
        '''Constraints that fail and are required for `mode`.'''
        mode = CertificateMode[mode]
        return [c for c in self.constraint_report
                if not c.satisfied and (mode == CertificateMode.strip or not c.strip_only)]

    def tightest_failure(self, mode=CertificateMode.strip):
        failures = self.failures(mode)
        if not failures:
            return None
        return failures[0].name

    def require(self):
        '''Return self if certified, else raise :class:`~.InfeasibleError`.'''
        if not self.certified:
            mode = CertificateMode.truncated if self.band is not None else CertificateMode.strip
            name = self.tightest_failure(mode)
            raise InfeasibleError("Parameters not certified, failing constraint %r" % name,
                                  constraint=name, report=self)
        return self

    def __repr__(self):
        return "CoercivityCertificate(mode=%s, c1=%r, c2=%r, failures=%r)" % (
            self.mode, self.c1, self.c2, [c.name for c in self.failures()])

    def to_dict(self):
        '''A flat mapping with snake_case keys and floats as decimal strings.'''
        d = {}
        for key, value in self.p.to_dict().items():
            d[key] = fmt_float(value)
        for key, value in self.vp.to_dict().items():
            d[key] = fmt_float(value)
        for key, value in self.eps.to_dict().items():
            d[key] = fmt_float(value)
        for key, value in self.aux.to_dict().items():
            d[key] = fmt_float(value)
        for key, value in self.alphas.to_dict().items():
            d[key] = fmt_float(value)
        if self.band is not None:
            d['band_a'] = fmt_float(self.band.a)
            d['band_y_max'] = fmt_float(self.band.y_max)
        d['omega_lo'] = fmt_float(self.omega_lo)
        d['omega_hi'] = fmt_float(self.omega_hi)
        d['delta_omega'] = fmt_float(self.delta_omega)
        d['eps3_lo'] = fmt_float(self.eps3_lo)
        d['eps3_hi'] = fmt_float(self.eps3_hi)
        d['gate_g'], d['gate_f'], d['gate_f_tilde'] = [fmt_float(g) for g in self.gates]
        d['certified'] = self.certified
        d['mode'] = str(self.mode) if self.mode is not None else None
        d['c1'] = fmt_float(self.c1) if self.c1 is not None else None
        d['c2'] = fmt_float(self.c2) if self.c2 is not None else None
        for check in self.constraint_report:
            key = check.name.replace('-', '_')
            d['constraint_%s_satisfied' % key] = check.satisfied
            d['constraint_%s_slack' % key] = fmt_float(check.slack)
        return d

    def _dump(self):
        return self.to_dict()

    def dumps(self):
        return json.dumps(self._dump(), sort_keys=True, indent=2)

    def dump(self, fp):
        with opened(fp, 'w') as handle:
            handle.write(self.dumps())
            handle.write("\n")

    @classmethod
    def _load(cls, d):
        p = HestonParams(**{k: float(d[k]) for k in HestonParams.__slots__})
        vp = VariationalParams(**{k: float(d[k]) for k in VariationalParams.__slots__})
        eps = EpsilonTriple(**{k: float(d[k]) for k in EpsilonTriple.__slots__})
        band = None
        if 'band_a' in d:
            band = VarianceBand(float(d['band_a']), float(d['band_y_max']))
        return certify(p, vp, eps, float(d['delta']), domain=band)

    @classmethod
    def loads(cls, text):
        '''Rebuild a certificate by re-certifying the stored inputs.'''
        return cls._load(json.loads(text))

    @classmethod
    def load(cls, fp):
        with opened(fp, 'r') as handle:
            return cls.loads(handle.read())

    def format_table(self):
        '''A fixed-width, human readable constraint table.'''
        lines = ["%-20s %-9s %-10s %s" % ("constraint", "status", "scope", "slack")]
        for check in self.constraint_report:
            lines.append("%-20s %-9s %-10s %.6g" % (
                check.name, "ok" if check.satisfied else "FAIL",
                "strip" if check.strip_only else "all", check.slack))
        if self.certified:
            lines.append("certified (%s): c1=%.6g c2=%.6g" % (self.mode, self.c1, self.c2))
        else:
            lines.append("not certified")
        return "\n".join(lines)


def _slack(value):
    try:
        value = float(value)
    except (TypeError, ValueError):  # pragma: no cover
        return float('nan')
    return value


class _Report(object):
    def __init__(self, slack_margin):
        self.slack_margin = slack_margin
        self.checks = []

    def strict(self, name, slack):
        slack = _slack(slack)
        self.checks.append(ConstraintCheck(
            name, bool(slack > self.slack_margin), slack, name in STRIP_ONLY))

    def weak(self, name, slack):
        slack = _slack(slack)
        self.checks.append(ConstraintCheck(
            name, bool(slack >= 0), slack, name in STRIP_ONLY))

    def passes(self, strip):
        return all(c.satisfied for c in self.checks if strip or not c.strip_only)


def certify(p, vp, eps, delta=None, domain=None, slack_margin=DEFAULT_SLACK):
    '''
    Evaluate every constraint of the coercivity estimate for one tuple.

    Parameters
    ----------
    p: :class:`~.HestonParams`
    vp: :class:`~.VariationalParams`
    eps: :class:`~.EpsilonTriple`
    delta: float, optional
        Feller slack in ``(0, delta_max)``. Defaults to ``delta_max / 2``.
    domain: object, optional
        Anything with ``a`` and ``y_max`` attributes. When given and the strip
        constraints fail, a truncated certificate is attempted.
    slack_margin: float
        Margin applied to every strict inequality

    Returns
    -------
    :class:`CoercivityCertificate`
        Always returned; ``certified`` tells whether ``c1``/``c2`` were issued.
    '''
    report = _Report(slack_margin)
    sigma2 = p.sigma ** 2
    drift = feller_margin(p)
    report.strict('feller', drift)
    dmax = (drift / sigma2) ** 2 if drift > 0 else 0.0
    if delta is None:
        delta = dmax / 2.0
    report.strict('delta-range', min(delta, dmax - delta))
    report.strict('rho-window', rho_bound(delta) - abs(p.rho))
    report.strict('omega-above-mu', vp.omega - vp.mu)

    aux = aux_constants(p, vp, eps, delta)
    alphas = alpha_coefficients(p, vp, eps, aux)

    eps2_lo = 2.0 * p.rho ** 2 / (2.0 - aux.tbar) if aux.tbar < 2.0 else float('inf')
    report.strict('eps2-window', min(eps.eps2 - eps2_lo, 1.0 - eps.eps1 - eps.eps2))
    report.strict('gamma-positive', aux.gamma)

    eps3_lo, eps3_hi = _eps3_endpoints(alphas, aux, vp)
    report.strict('eps3-window', min(eps.eps3 - eps3_lo, eps3_hi - eps.eps3))

    k2 = alphas.alpha2 - abs(alphas.alpha5) * eps.eps3 / 2.0
    k3 = alphas.alpha6 - abs(alphas.alpha5) / (2.0 * eps.eps3)

    report.strict('nu-bound', nu_bound(p, vp) - vp.nu)
    report.weak('alpha4-nonnegative', alphas.alpha4)
    report.strict('beta-cap', beta_cap(p, vp, eps, aux) - aux.beta)

    delta_omega = omega_discriminant(p, vp, eps, aux)
    report.weak('omega-discriminant', delta_omega)
    if delta_omega >= 0 and drift > 0:
        omega_lo, omega_hi = _omega_endpoints(p, vp, eps, aux, delta_omega)
    else:
        omega_lo = omega_hi = float('nan')
    report.strict('omega-interval', min(vp.omega - omega_lo, omega_hi - vp.omega))

    t = 2.0 * eps.eps3 * vp.mu
    try:
        gates = gating_functions(t, aux)
    except InfeasibleError:
        gates = (float('nan'),) * 3
    report.weak('gate-g', delta - gates[0])
    report.weak('gate-f', delta - gates[1])
    report.strict('gate-f-tilde', delta - gates[2])

    report.strict('alpha2-margin', k2)
    report.weak('alpha6-margin', k3)

    band = None
    if domain is not None:
        band = domain if isinstance(domain, VarianceBand) else VarianceBand(domain.a, domain.y_max)

    mode = c1 = c2 = None
    if report.passes(strip=True):
        c1 = min(alphas.alpha1, k2, vp.a ** 3 * k3)
        c2 = alphas.alpha3
        if c1 > slack_margin:
            mode = CertificateMode.strip
    if mode is None and band is not None and report.passes(strip=False):
        c1 = min(alphas.alpha1, k2)
        l4 = min(alphas.alpha4 * band.a ** 2, alphas.alpha4 * band.y_max ** 2)
        l3 = min(k3 * band.a ** 3, k3 * band.y_max ** 3)
        c2 = alphas.alpha3 + l4 + l3 - c1
        if c1 > slack_margin:
            mode = CertificateMode.truncated
    if mode is None:
        c1 = c2 = None

    cert = CoercivityCertificate(
        p, vp, eps, band, aux, alphas, omega_lo, omega_hi, delta_omega,
        eps3_lo, eps3_hi, gates, report.checks, mode=mode, c1=c1, c2=c2)
    if mode is not None:
        logger.debug("Certified %s tuple nu=%0.3g mu=%0.3g omega=%0.4g: c1=%0.4g c2=%0.4g",
                     mode, vp.nu, vp.mu, vp.omega, c1, c2)
    return cert


def continuity_constant(p, vp, domain):
    '''
    Explicit constant ``cont_M`` with ``|a(u, v)| <= cont_M ||u||_V ||v||_V``
    for functions vanishing on the boundary of the truncated rectangle.

    Each of the ten terms of the form is bounded by Cauchy-Schwarz, using
    ``|phi'/phi| <= nu``, ``||d v|| <= ||sqrt(y) d v|| / sqrt(a)`` and
    ``y^k <= y_max^k`` on the rectangle.
    '''
    a, ymax = domain.a, domain.y_max
    kappa, m, sigma, r = p.kappa, p.m, p.sigma, p.r
    arho = abs(p.rho)
    nu, mu, omega = vp.nu, vp.mu, vp.omega
    sqa = math.sqrt(a)
    root_y = math.sqrt(ymax)
    y32 = ymax ** 1.5
    mean_gap = max(abs(m - a), abs(ymax - m))
    terms = [
        0.5,
        nu * root_y,
        sigma ** 2 / 2.0,
        sigma ** 2 / (2.0 * sqa),
        mu * sigma ** 2 * y32,
        2.0 * arho * sigma * nu * root_y,
        arho * sigma,
        omega * arho * sigma * y32 + 0.5 * root_y + r / sqa,
        omega * sigma ** 2 * y32 + kappa * mean_gap / sqa,
        0.5 * omega * sigma ** 2 * ymax * (omega * ymax ** 2 + 1.0) + omega * ymax * kappa * mean_gap + r,
    ]
    return math.fsum(terms)
