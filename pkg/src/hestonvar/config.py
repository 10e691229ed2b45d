'''
Run configuration for the command line front end.

Configurations are hjson documents (plain JSON is valid hjson) with the
sections listed in :data:`SCHEMA`. Unknown sections or keys are rejected.
``section.key=value`` overrides are applied to the raw mapping before it is
validated, with `value` parsed as hjson so numbers and booleans keep their
type.
'''
import os
import copy
import logging

import hjson

from hestonvar.utils.base import HestonvarError, opened
from hestonvar.model import HestonParams, OptionSpec, ParameterError
from hestonvar.coercivity import VariationalParams, EpsilonTriple, DEFAULT_CUTOFF
from hestonvar.coercivity.search import SearchGrid
from hestonvar.wspace import TruncatedDomain, QuadratureRule
from hestonvar.solver import TimeGrid
from hestonvar.oracle import MCConfig


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


class ConfigError(HestonvarError, ValueError):
    '''Raised for unreadable configurations, unknown keys and bad overrides.'''
    pass


#: Allowed keys per section; ``None`` marks a scalar entry
SCHEMA = {
    'model': ('kappa', 'm', 'sigma', 'rho', 'r', 'eta'),
    'option': ('K', 'T', 'kind'),
    'variational': ('a', 'nu', 'mu', 'omega'),
    'epsilons': ('eps1', 'eps2', 'eps3'),
    'delta': None,
    'domain': ('x_min', 'x_max', 'a', 'y_max', 'nx', 'ny', 'width', 'quadrature'),
    'time': ('nt', 'theta'),
    'mc': ('paths', 'steps', 'seed', 'scheme'),
    'pricing': ('S0', 'y0', 'parity', 'lumped'),
    'search': ('grid_points', 'processes'),
    'outputs': ('directory',),
}

REQUIRED = ('model', 'option')


def _check_keys(raw):
    if not isinstance(raw, dict):
        raise ConfigError("Configuration must be a mapping, got %s" % type(raw).__name__)
    for section, value in raw.items():
        if section not in SCHEMA:
            raise ConfigError("Unknown configuration section %r" % (section,))
        allowed = SCHEMA[section]
        if allowed is None:
            if isinstance(value, dict):
                raise ConfigError("%r must be a scalar" % (section,))
            continue
        if not isinstance(value, dict):
            raise ConfigError("Section %r must be a mapping" % (section,))
        for key in value:
            if key not in allowed:
                raise ConfigError("Unknown key %r in section %r" % (key, section))
    for section in REQUIRED:
        if section not in raw:
            raise ConfigError("Missing required section %r" % (section,))


def parse_override(text):
    '''
    Split ``section.key=value`` (or ``key=value`` for scalar sections) into
    its path and parsed value.
    '''
    if '=' not in text:
        raise ConfigError("Override %r is not of the form section.key=value" % (text,))
    path, _, literal = text.partition('=')
    path = tuple(part.strip() for part in path.split('.'))
    if not path or not all(path) or len(path) > 2:
        raise ConfigError("Bad override path %r" % (text,))
    try:
        value = hjson.loads(literal)
    except Exception:
        value = literal.strip()
    return path, value


def apply_overrides(raw, overrides):
    raw = copy.deepcopy(dict(raw))
    for text in overrides or ():
        path, value = parse_override(text)
        if len(path) == 1:
            raw[path[0]] = value
        else:
            section = raw.setdefault(path[0], {})
            if not isinstance(section, dict):
                raise ConfigError("Cannot set %r inside scalar section %r" % (path[1], path[0]))
            section[path[1]] = value
    return raw


def _build(section, factory, values):
    try:
        return factory(**values)
    except (ParameterError, TypeError) as err:
        raise ConfigError("Invalid %s section: %s" % (section, err))


class RunConfig(object):
    '''
    A validated run configuration.

    Attributes
    ----------
    model: :class:`~.HestonParams`
    option: :class:`~.OptionSpec`
    variational: :class:`~.VariationalParams` or None
        Searched for when absent
    epsilons: :class:`~.EpsilonTriple` or None
    delta: float or None
    domain: :class:`~.TruncatedDomain`
    quadrature: :class:`~.QuadratureRule`
    time: :class:`~.TimeGrid`
    mc: :class:`~.MCConfig`
    S0, y0: float
    parity: bool
    lumped: bool
        Step with the lumped mass matrix; on by default
    pde_option: :class:`~.OptionSpec`
        `option` with the strike divided by `S0`, the contract the PDE prices
        with spot 1
    search_grid: :class:`~.SearchGrid`
    processes: int
    output_dir: str
    raw: dict
        The mapping the configuration was built from
    '''

    def __init__(self, raw):
        _check_keys(raw)
        self.raw = raw
        self.model = _build('model', HestonParams, raw['model'])
        self.option = _build('option', OptionSpec, raw['option'])

        variational = raw.get('variational')
        epsilons = raw.get('epsilons')
        if (variational is None) != (epsilons is None):
            raise ConfigError("'variational' and 'epsilons' must be given together")
        self.variational = _build('variational', VariationalParams, variational) if variational else None
        self.epsilons = _build('epsilons', EpsilonTriple, epsilons) if epsilons else None
        self.delta = raw.get('delta')
        if self.delta is not None:
            try:
                self.delta = float(self.delta)
            except (TypeError, ValueError):
                raise ConfigError("delta must be a number, got %r" % (self.delta,))

        pricing = raw.get('pricing', {})
        self.S0 = float(pricing.get('S0', 1.0))
        self.y0 = float(pricing.get('y0', self.model.m))
        self.parity = bool(pricing.get('parity', False))
        self.lumped = bool(pricing.get('lumped', True))
        if self.S0 <= 0 or self.y0 < 0:
            raise ConfigError("pricing needs S0 > 0 and y0 >= 0")
        self.pde_option = _build('option', self.option._replace, {'K': self.option.K / self.S0})

        self.domain, self.quadrature = self._domain(raw.get('domain', {}))

        time = dict(raw.get('time', {}))
        time.setdefault('nt', 256)
        self.time = _build('time', TimeGrid, dict(time, T=self.option.T))

        mc = dict(raw.get('mc', {}))
        mc.setdefault('paths', 100000)
        mc.setdefault('steps', 250)
        self.mc = _build('mc', MCConfig, mc)

        search = raw.get('search', {})
        self.search_grid = _build('search', SearchGrid, {
            k: v for k, v in search.items() if k == 'grid_points'})
        self.processes = search.get('processes', 1)

        self.output_dir = raw.get('outputs', {}).get('directory', '.')

    def _domain(self, section):
        section = dict(section)
        quadrature = _build('domain', QuadratureRule, {'order': section.pop('quadrature', 5)})
        a = section.pop('a', None)
        if self.variational is not None:
            if a is not None and float(a) != self.variational.a:
                raise ConfigError("domain.a=%r disagrees with variational.a=%r" % (a, self.variational.a))
            a = self.variational.a
        if a is None:
            a = DEFAULT_CUTOFF
        try:
            default = TruncatedDomain.default(
                self.model, self.pde_option, nx=section.pop('nx', 128), ny=section.pop('ny', 96),
                a=a, y0=self.y0, width=section.pop('width', 6.0))
        except (ParameterError, TypeError, ValueError) as err:
            raise ConfigError("Invalid domain section: %s" % (err,))
        return _build('domain', default._replace, section), quadrature

    @classmethod
    def loads(cls, text, overrides=None):
        try:
            raw = hjson.loads(text)
        except Exception as err:
            raise ConfigError("Could not parse configuration: %s" % (err,))
        raw = _plain(raw)
        return cls(apply_overrides(raw, overrides))

    @classmethod
    def load(cls, fp, overrides=None):
        try:
            with opened(fp, 'r') as handle:
                text = handle.read()
        except (IOError, OSError) as err:
            raise ConfigError("Could not read configuration %r: %s" % (fp, err))
        return cls.loads(text, overrides)

    @classmethod
    def standard(cls, overrides=None):
        '''The bundled configuration for the standard parameter set.'''
        return cls.load(os.path.join(DATA_DIR, "standard.hjson"), overrides)

    def with_overrides(self, overrides):
        return self.__class__(apply_overrides(self.raw, overrides))

    def __repr__(self):
        return "RunConfig(model=%r, option=%r)" % (self.model, self.option)


def _plain(obj):
    '''Turn the ordered mappings hjson returns into plain dicts.'''
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    return obj
