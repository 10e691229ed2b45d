'''
The truncated computational rectangle, the weights ``phi(x) = exp(nu |x|)``
and ``psi(y) = exp(mu y^2 / 2)``, tensor Gauss-Legendre quadrature and the
discrete space of piecewise-bilinear functions vanishing on the boundary.

A discrete function is a plain :class:`numpy.ndarray` of coefficients on the
interior nodes, ordered row-major with ``x`` varying fastest: interior node
``(i, j)`` with ``1 <= i <= nx - 1`` and ``1 <= j <= ny - 1`` sits at position
``(j - 1) * (nx - 1) + (i - 1)``.
'''
import csv
import math
import logging

import numpy as np
from numpy.polynomial.legendre import leggauss

from hestonvar.utils.base import Struct, opened, fmt_float
from hestonvar.model import ParameterError
from hestonvar.coercivity.constants import DEFAULT_CUTOFF


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


class TruncatedDomain(Struct):
    '''
    The rectangle ``[x_min, x_max] x [a, y_max]`` split into ``nx`` by ``ny``
    uniform cells.
    '''
    __slots__ = ('x_min', 'x_max', 'a', 'y_max', 'nx', 'ny')

    def _validate(self):
        for name in ('x_min', 'x_max', 'a', 'y_max'):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError("%s must be finite, got %r" % (name, value))
            object.__setattr__(self, name, value)
        for name in ('nx', 'ny'):
            value = getattr(self, name)
            if int(value) != value or value < 2:
                raise ParameterError("%s must be an integer >= 2, got %r" % (name, value))
            object.__setattr__(self, name, int(value))
        if not self.x_min < self.x_max:
            raise ParameterError("Need x_min < x_max, got %r, %r" % (self.x_min, self.x_max))
        if not 0 < self.a < self.y_max:
            raise ParameterError("Need 0 < a < y_max, got a=%r, y_max=%r" % (self.a, self.y_max))

    @classmethod
    def default(cls, p, spec, nx=128, ny=96, a=DEFAULT_CUTOFF, y0=None, width=6.0):
        '''
        The default truncation for pricing `spec` under `p`: ``width``
        standard deviations of log-price around ``ln K`` and a variance range
        reaching well past the bulk of the variance distribution.
        '''
        level = max(p.m, y0 if y0 is not None else p.m)
        half = width * math.sqrt(level * spec.T)
        center = math.log(spec.K)
        y_max = max(4.0 * p.m, 8.0 * p.sigma * math.sqrt(p.m * spec.T))
        return cls(center - half, center + half, a, y_max, nx, ny)

    @property
    def hx(self):
        return (self.x_max - self.x_min) / self.nx

    @property
    def hy(self):
        return (self.y_max - self.a) / self.ny

    @property
    def interior_shape(self):
        '''``(ny - 1, nx - 1)``, the shape of the reshaped coefficient vector.'''
        return (self.ny - 1, self.nx - 1)

    @property
    def size(self):
        return (self.nx - 1) * (self.ny - 1)

    def x_nodes(self):
        return np.linspace(self.x_min, self.x_max, self.nx + 1)

    def y_nodes(self):
        return np.linspace(self.a, self.y_max, self.ny + 1)

    def node_index(self, i, j):
        '''Position of interior node ``(i, j)`` in a coefficient vector.'''
        if not (1 <= i <= self.nx - 1 and 1 <= j <= self.ny - 1):
            raise ParameterError("(%r, %r) is not an interior node" % (i, j))
        return (j - 1) * (self.nx - 1) + (i - 1)

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x >= self.x_min) & (x <= self.x_max) & (y >= self.a) & (y <= self.y_max)

    def zeros(self):
        return np.zeros(self.size)

    def with_resolution(self, nx=None, ny=None):
        return self._replace(nx=nx or self.nx, ny=ny or self.ny)


class QuadratureRule(Struct):
    '''Gauss-Legendre rule with ``order`` points per axis per cell.'''
    __slots__ = ('order',)

    @classmethod
    def _defaults(cls):
        return {'order': 5}

    def _validate(self):
        if int(self.order) != self.order or self.order < 3:
            raise ParameterError("Quadrature order must be an integer >= 3, got %r" % (self.order,))
        object.__setattr__(self, 'order', int(self.order))

    def refine(self):
        return self.__class__(self.order + 2)

    def reference(self):
        '''Points and weights on ``[0, 1]``.'''
        xi, wi = leggauss(self.order)
        return (xi + 1.0) / 2.0, wi / 2.0


def weight_phi(x, nu):
    '''``exp(nu |x|)``'''
    return np.exp(nu * np.abs(x))


def weight_psi(y, mu):
    '''``exp(mu y^2 / 2)``'''
    return np.exp(0.5 * mu * np.square(y))


def sign(x):
    '''``sign(x)`` with ``sign(0) = 0``.'''
    return np.sign(x)


def coefficients(v, dom):
    '''
    Validate `v` as a discrete function on `dom`.

    Raises
    ------
    ParameterError
        On a length mismatch or non-finite entries
    '''
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != dom.size:
        raise ParameterError("Expected %d interior coefficients, got shape %r" % (dom.size, v.shape))
    if not np.all(np.isfinite(v)):
        raise ParameterError("Discrete function has non-finite entries")
    return v


def nodal_array(v, dom):
    '''Embed interior coefficients in the ``(ny + 1, nx + 1)`` nodal array
    with zero boundary values.'''
    full = np.zeros((dom.ny + 1, dom.nx + 1))
    full[1:-1, 1:-1] = np.reshape(v, dom.interior_shape)
    return full


class CellQuadrature(object):
    '''
    Quadrature points, weights and reference shape functions for every cell
    of a :class:`TruncatedDomain`.

    Per-cell arrays are laid out ``(ny, nx, q, q)``: cell row, cell column,
    quadrature point in ``y``, quadrature point in ``x``.
    '''

    #: local corners as (cx, cy) offsets
    corners = ((0, 0), (1, 0), (0, 1), (1, 1))

    def __init__(self, dom, quad=None):
        quad = quad if quad is not None else QuadratureRule()
        self.dom = dom
        self.quad = quad
        s, w = quad.reference()
        self.s = s
        hx, hy = dom.hx, dom.hy
        self.x = dom.x_min + (np.arange(dom.nx)[:, None] + s[None, :]) * hx
        self.y = dom.a + (np.arange(dom.ny)[:, None] + s[None, :]) * hy
        self.area = np.outer(w, w) * hx * hy
        self.lx = (1.0 - s, s)
        self.dlx = (-np.ones_like(s) / hx, np.ones_like(s) / hx)
        self.ly = (1.0 - s, s)
        self.dly = (-np.ones_like(s) / hy, np.ones_like(s) / hy)

    def shape(self, cx, cy):
        '''Value, x-derivative and y-derivative of the local shape function at
        corner ``(cx, cy)``, each of shape ``(q, q)``.'''
        value = np.outer(self.ly[cy], self.lx[cx])
        dx = np.outer(self.ly[cy], self.dlx[cx])
        dy = np.outer(self.dly[cy], self.lx[cx])
        return value, dx, dy

    def y_points(self):
        '''``y`` at every quadrature point, broadcastable to the cell layout.'''
        return self.y[:, None, :, None]

    def x_points(self):
        return self.x[None, :, None, :]

    def weights(self, nu, mu):
        '''``phi^2 psi^2`` times the quadrature weight at every point.'''
        wx = np.exp(2.0 * nu * np.abs(self.x))
        wy = np.exp(mu * np.square(self.y))
        return wy[:, None, :, None] * wx[None, :, None, :] * self.area[None, None, :, :]

    def corner_index(self, cx, cy):
        '''Global interior index of local corner ``(cx, cy)`` for every cell,
        ``-1`` where the corner lies on the boundary. Shape ``(ny, nx)``.'''
        dom = self.dom
        i = np.arange(dom.nx)[None, :] + cx
        j = np.arange(dom.ny)[:, None] + cy
        inside = (i >= 1) & (i <= dom.nx - 1) & (j >= 1) & (j <= dom.ny - 1)
        index = (j - 1) * (dom.nx - 1) + (i - 1)
        return np.where(inside, index, -1)

    def evaluate(self, v):
        '''Value and broken gradient of the discrete function `v` at every
        quadrature point.'''
        dom = self.dom
        full = nodal_array(v, dom)
        value = np.zeros((dom.ny, dom.nx, self.quad.order, self.quad.order))
        dx = np.zeros_like(value)
        dy = np.zeros_like(value)
        for cx, cy in self.corners:
            nodal = full[cy:cy + dom.ny, cx:cx + dom.nx][:, :, None, None]
            n, nx_, ny_ = self.shape(cx, cy)
            value += nodal * n
            dx += nodal * nx_
            dy += nodal * ny_
        return value, dx, dy


def _cells(dom, quad):
    if isinstance(quad, CellQuadrature):
        return quad
    return CellQuadrature(dom, quad)


def weighted_inner(u, v, dom, quad, nu, mu):
    '''``(u, v)`` in ``L^2`` weighted by ``phi^2 psi^2``.'''
    cells = _cells(dom, quad)
    uu = cells.evaluate(coefficients(u, dom))[0]
    vv = cells.evaluate(coefficients(v, dom))[0]
    return float(np.sum(uu * vv * cells.weights(nu, mu)))


def weighted_l2_norm(v, dom, quad, nu, mu):
    cells = _cells(dom, quad)
    value = cells.evaluate(coefficients(v, dom))[0]
    return math.sqrt(float(np.sum(np.square(value) * cells.weights(nu, mu))))


def v_norm_parts(v, dom, quad, nu, mu):
    '''
    The three components of the V-norm.

    Returns
    -------
    tuple of float
        ``||v||``, ``||sqrt(y) d_x v||`` and ``||sqrt(y) d_y v||``, all
        weighted by ``phi^2 psi^2``
    '''
    cells = _cells(dom, quad)
    value, dx, dy = cells.evaluate(coefficients(v, dom))
    w = cells.weights(nu, mu)
    yw = cells.y_points() * w
    return (math.sqrt(float(np.sum(np.square(value) * w))),
            math.sqrt(float(np.sum(np.square(dx) * yw))),
            math.sqrt(float(np.sum(np.square(dy) * yw))))


def v_norm(v, dom, quad, nu, mu):
    l2, gx, gy = v_norm_parts(v, dom, quad, nu, mu)
    return math.sqrt(l2 ** 2 + gx ** 2 + gy ** 2)


def project(f, dom):
    '''Nodal interpolant of the vectorized callable ``f(x, y)`` at the interior
    nodes.'''
    x = dom.x_nodes()[1:-1]
    y = dom.y_nodes()[1:-1]
    X, Y = np.meshgrid(x, y)
    values = np.broadcast_to(np.asarray(f(X, Y), dtype=float), X.shape)
    return np.ascontiguousarray(values).ravel()


def hat_function(dom, i, j):
    '''Coefficients of the nodal basis function at interior node ``(i, j)``.'''
    v = dom.zeros()
    v[dom.node_index(i, j)] = 1.0
    return v


def interpolate(v, dom, x, y):
    '''
    Evaluate the discrete function `v` at arbitrary points by bilinear
    interpolation. Points outside the rectangle evaluate to ``nan``.
    '''
    full = nodal_array(coefficients(v, dom), dom)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    inside = dom.contains(x, y)
    sx = np.clip((x - dom.x_min) / dom.hx, 0, dom.nx)
    sy = np.clip((y - dom.a) / dom.hy, 0, dom.ny)
    sx = np.where(np.isfinite(sx), sx, 0)
    sy = np.where(np.isfinite(sy), sy, 0)
    ic = np.minimum(np.floor(sx).astype(int), dom.nx - 1)
    jc = np.minimum(np.floor(sy).astype(int), dom.ny - 1)
    fx = sx - ic
    fy = sy - jc
    out = (full[jc, ic] * (1 - fx) * (1 - fy) + full[jc, ic + 1] * fx * (1 - fy) +
           full[jc + 1, ic] * (1 - fx) * fy + full[jc + 1, ic + 1] * fx * fy)
    out = np.where(inside, out, np.nan)
    if out.ndim == 0:
        return float(out)
    return out


def to_csv(v, dom, fp):
    '''Write ``x,y,value`` rows for every node, boundary included, ``y``
    major and ``x`` minor.'''
    full = nodal_array(coefficients(v, dom), dom)
    xs = dom.x_nodes()
    ys = dom.y_nodes()
    with opened(fp, 'w') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['x', 'y', 'value'])
        for j, y in enumerate(ys):
            for i, x in enumerate(xs):
                writer.writerow([fmt_float(x), fmt_float(y), fmt_float(full[j, i])])
