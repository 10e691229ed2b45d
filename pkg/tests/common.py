import os
import shutil
import tempfile

import numpy as np

from hestonvar.model import HestonParams, OptionSpec, OptionKind
from hestonvar.coercivity import search_feasible
from hestonvar.wspace import TruncatedDomain, QuadratureRule


STANDARD = HestonParams(kappa=2.0, m=0.04, sigma=0.3, rho=0.1, r=0.0)
CALL = OptionSpec(K=1.0, T=1.0, kind=OptionKind.call)
PUT = OptionSpec(K=1.0, T=1.0, kind=OptionKind.put)

QUAD = QuadratureRule(5)

_searches = {}


def emit(arg):
    print(arg)
    return arg


def small_domain(nx=64, ny=48, p=STANDARD, spec=CALL):
    return TruncatedDomain.default(p, spec, nx=nx, ny=ny)


def standard_domain():
    return TruncatedDomain.default(STANDARD, CALL, nx=128, ny=96)


def certified(p=STANDARD, domain=None):
    '''Search once per parameter set and band; the result is shared across
    test modules.'''
    domain = domain if domain is not None else small_domain()
    key = (p, domain.a, domain.y_max)
    if key not in _searches:
        _searches[key] = search_feasible(p, domain=domain)
    return _searches[key]


def rng(seed=0):
    return np.random.default_rng(seed)


def random_function(dom, generator, smooth=False):
    '''A random discrete function. Smooth draws are random combinations of
    low-order sines, rough draws are white noise.'''
    if not smooth:
        return generator.standard_normal(dom.size)
    x = np.linspace(0, 1, dom.nx + 1)[1:-1]
    y = np.linspace(0, 1, dom.ny + 1)[1:-1]
    X, Y = np.meshgrid(x, y)
    out = np.zeros_like(X)
    for k in range(1, 4):
        for l in range(1, 4):
            out += generator.standard_normal() * np.sin(k * np.pi * X) * np.sin(l * np.pi * Y) / (k * l)
    return out.ravel()


class TemporaryDirectory(object):
    def __enter__(self):
        self.path = tempfile.mkdtemp(prefix="hestonvar-test-")
        return self.path

    def __exit__(self, *args):
        shutil.rmtree(self.path, ignore_errors=True)


def path_in(directory, name):
    return os.path.join(directory, name)
