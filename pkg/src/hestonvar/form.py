'''
Assembly of the weighted mass matrix and of the integrated-by-parts form

.. math::

    a(u, v) = \\int_\\Omega (\\mathcal{L}^H u)\\, v\\, \\phi^2 \\psi^2

on the space of piecewise-bilinear functions, together with the line source
and the numerical checks of the identities and inequalities the form obeys.

The form is written as a sum of ten terms. Grouped by the derivatives they
pair, each term contributes to one of six coefficient fields
(:func:`form_coefficients`); the same table drives matrix assembly and the
evaluation of the form on smooth functions.
'''
import math
import logging

import numpy as np
from scipy import sparse

from hestonvar.utils.base import opened
from hestonvar.model import ParameterError, strike_line
from hestonvar.wspace import CellQuadrature, QuadratureRule, coefficients, v_norm, weighted_l2_norm


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


ALL_TERMS = frozenset(range(1, 11))

#: Derivative pairings, trial factor first
PAIRINGS = ('ux_vx', 'ux_v', 'uy_vy', 'uy_v', 'uy_vx', 'u_v')


def form_coefficients(y, s, p, vp, terms=ALL_TERMS):
    '''
    Pointwise coefficients of the six derivative pairings.

    Parameters
    ----------
    y: np.ndarray
        Variance at the evaluation points
    s: np.ndarray
        ``phi'/phi = nu sign(x)`` at the evaluation points
    p: :class:`~.HestonParams`
    vp: :class:`~.VariationalParams`
    terms: set of int
        Which of the ten terms to include

    Returns
    -------
    dict
        Maps each name in :data:`PAIRINGS` to an array broadcast against
        ``y`` and ``s``
    '''
    terms = frozenset(terms)
    unknown = terms - ALL_TERMS
    if unknown:
        raise ParameterError("Unknown form terms %r" % sorted(unknown))
    kappa, m, sigma, rho, r = p.kappa, p.m, p.sigma, p.rho, p.r
    mu, omega = vp.mu, vp.omega
    zero = np.zeros(np.broadcast(y, s).shape)
    out = {name: zero.copy() for name in PAIRINGS}
    if 1 in terms:
        out['ux_vx'] = out['ux_vx'] + 0.5 * y
    if 2 in terms:
        out['ux_v'] = out['ux_v'] + y * s
    if 3 in terms:
        out['uy_vy'] = out['uy_vy'] + 0.5 * sigma ** 2 * y
    if 4 in terms:
        out['uy_v'] = out['uy_v'] + 0.5 * sigma ** 2
    if 5 in terms:
        out['uy_v'] = out['uy_v'] + mu * sigma ** 2 * y ** 2
    if 6 in terms:
        out['uy_v'] = out['uy_v'] + 2.0 * rho * sigma * y * s
    if 7 in terms:
        out['uy_vx'] = out['uy_vx'] + rho * sigma * y
    if 8 in terms:
        out['ux_v'] = out['ux_v'] - (omega * rho * sigma * y ** 2 - 0.5 * y + r)
    if 9 in terms:
        out['uy_v'] = out['uy_v'] - (omega * sigma ** 2 * y ** 2 + kappa * (m - y))
    if 10 in terms:
        out['u_v'] = out['u_v'] - (0.5 * omega * sigma ** 2 * y * (omega * y ** 2 + 1.0) +
                                   omega * y * kappa * (m - y) - r)
    return out


class FormMatrices(object):
    '''
    Assembled stiffness and mass matrices.

    Attributes
    ----------
    A: scipy.sparse.csr_matrix
        ``A[i, j] = a(basis_j, basis_i)``
    mass: scipy.sparse.csr_matrix
        Weighted mass matrix
    dom: :class:`~.TruncatedDomain`
    quad: :class:`~.QuadratureRule`
    p: :class:`~.HestonParams`
    vp: :class:`~.VariationalParams`
    cells: :class:`~.CellQuadrature`
    '''

    def __init__(self, A, mass, dom, quad, p, vp, cells):
        self.A = A
        self.mass = mass
        self.dom = dom
        self.quad = quad
        self.p = p
        self.vp = vp
        self.cells = cells

    @property
    def size(self):
        return self.A.shape[0]

    def __repr__(self):
        return "FormMatrices(size=%d, nnz=%d)" % (self.size, self.A.nnz)


def _scatter(cells, fields, dom):
    '''Integrate each local corner pair against `fields` and return the
    assembled CSR matrix.'''
    rows, cols, vals = [], [], []
    shapes = {c: cells.shape(*c) for c in cells.corners}
    index = {c: cells.corner_index(*c) for c in cells.corners}
    for test in cells.corners:
        v, vx, vy = shapes[test]
        for trial in cells.corners:
            u, ux, uy = shapes[trial]
            products = {'ux_vx': ux * vx, 'ux_v': ux * v, 'uy_vy': uy * vy,
                        'uy_v': uy * v, 'uy_vx': uy * vx, 'u_v': u * v}
            local = np.zeros((dom.ny, dom.nx))
            for name, field in fields.items():
                local += np.einsum('abij,ij->ab', field, products[name])
            row = index[test]
            col = index[trial]
            keep = (row >= 0) & (col >= 0)
            rows.append(row[keep])
            cols.append(col[keep])
            vals.append(local[keep])
    n = dom.size
    matrix = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return matrix.tocsr()


def assemble(dom, quad, p, vp, terms=ALL_TERMS):
    '''
    Assemble the stiffness matrix of the ten-term form and the weighted mass
    matrix.

    Parameters
    ----------
    dom: :class:`~.TruncatedDomain`
    quad: :class:`~.QuadratureRule` or None
    p: :class:`~.HestonParams`
    vp: :class:`~.VariationalParams`
    terms: set of int, optional
        Subset of the ten terms to include, for term-by-term checks

    Returns
    -------
    :class:`FormMatrices`
    '''
    quad = quad if quad is not None else QuadratureRule()
    cells = CellQuadrature(dom, quad)
    w = cells.weights(vp.nu, vp.mu)
    y = cells.y_points()
    s = vp.nu * np.sign(cells.x_points())
    coeffs = form_coefficients(y, s, p, vp, terms)
    fields = {name: np.broadcast_to(c, w.shape) * w for name, c in coeffs.items() if np.any(c)}
    A = _scatter(cells, fields, dom)
    mass = _scatter(cells, {'u_v': w}, dom)
    logger.debug("Assembled %d x %d system with %d nonzeros", A.shape[0], A.shape[1], A.nnz)
    return FormMatrices(A, mass, dom, quad, p, vp, cells)


def lumped_mass(fm):
    '''Row-sum lumping of the mass matrix.'''
    return sparse.diags(np.asarray(fm.mass.sum(axis=1)).ravel(), format='csr')


def export_triplets(matrix, fp):
    '''Write ``row col value`` lines, 0-based and sorted by position.'''
    coo = sparse.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with opened(fp, 'w') as handle:
        for k in order:
            handle.write("%d %d %r\n" % (coo.row[k], coo.col[k], float(coo.data[k])))


def dirac_source(t, dom, p, vp, spec, quad=None):
    '''
    Load vector of the line source

    .. math::

        F(t, y) = \\frac{K}{2} y e^{-rt} e^{-\\omega y^2 / 2} \\delta_{x = \\ln K - rt}

    tested against every basis function with weight ``phi^2 psi^2``.
    Entries are restricted exactly to the line and integrated in ``y`` by
    Gauss-Legendre quadrature. The vector is zero when the line misses the
    interior of the rectangle.
    '''
    quad = quad if quad is not None else QuadratureRule()
    load = dom.zeros()
    xs = strike_line(spec, p, t)
    if not dom.x_min < xs < dom.x_max:
        return load
    sx = (xs - dom.x_min) / dom.hx
    ic = min(int(math.floor(sx)), dom.nx - 1)
    fx = sx - ic
    s, w = quad.reference()
    y = dom.a + (np.arange(dom.ny)[:, None] + s[None, :]) * dom.hy
    density = (0.5 * spec.K * math.exp(-p.r * t) * math.exp(2.0 * vp.nu * abs(xs)) *
               y * np.exp((vp.mu - 0.5 * vp.omega) * y ** 2))
    line = np.zeros(dom.ny + 1)
    for cy, shape in enumerate((1.0 - s, s)):
        line[cy:cy + dom.ny] += np.sum(density * shape[None, :] * w[None, :], axis=1) * dom.hy
    grid = load.reshape(dom.interior_shape)
    for cx, hat in ((0, 1.0 - fx), (1, fx)):
        i = ic + cx
        if 1 <= i <= dom.nx - 1 and hat != 0:
            grid[:, i - 1] += hat * line[1:-1]
    return load


class GaussianBump(object):
    '''
    ``amplitude * exp(-((x - x0)^2 / (2 sx^2) + (y - y0)^2 / (2 sy^2)))``
    with its first and second derivatives, a smooth stand-in for a compactly
    supported test function.
    '''

    def __init__(self, x0, y0, sx, sy, amplitude=1.0):
        self.x0 = x0
        self.y0 = y0
        self.sx = sx
        self.sy = sy
        self.amplitude = amplitude

    def __repr__(self):
        return "GaussianBump(%r, %r, %r, %r, %r)" % (self.x0, self.y0, self.sx, self.sy, self.amplitude)

    def _parts(self, x, y):
        px = (x - self.x0) / self.sx ** 2
        py = (y - self.y0) / self.sy ** 2
        value = self.amplitude * np.exp(-0.5 * ((x - self.x0) ** 2 / self.sx ** 2 +
                                                (y - self.y0) ** 2 / self.sy ** 2))
        return value, px, py

    def value(self, x, y):
        return self._parts(x, y)[0]

    def dx(self, x, y):
        value, px, _ = self._parts(x, y)
        return -px * value

    def dy(self, x, y):
        value, _, py = self._parts(x, y)
        return -py * value

    def dxx(self, x, y):
        value, px, _ = self._parts(x, y)
        return (px ** 2 - 1.0 / self.sx ** 2) * value

    def dyy(self, x, y):
        value, _, py = self._parts(x, y)
        return (py ** 2 - 1.0 / self.sy ** 2) * value

    def dxy(self, x, y):
        value, px, py = self._parts(x, y)
        return px * py * value


class ZeroFunction(object):
    '''The zero handle.'''

    def value(self, x, y):
        return np.zeros(np.broadcast(x, y).shape)

    dx = dy = dxx = dyy = dxy = value


def _points(dom, quad, nu, mu):
    cells = CellQuadrature(dom, quad)
    w = cells.weights(nu, mu)
    x = np.broadcast_to(cells.x_points(), w.shape)
    y = np.broadcast_to(cells.y_points(), w.shape)
    return x, y, w


def check_ibp_identities(u, v, dom, quad, mu, nu=0.0):
    '''
    Check the three weighted integration-by-parts identities in ``y``

    .. math::

        \\int y u v w &= -\\frac{1}{2\\mu}\\left(\\int u_y v w + \\int u v_y w\\right) \\\\
        \\int y^2 u v w &= -\\frac{1}{2\\mu}\\left(\\int y u_y v w + \\int y u v_y w + \\int u v w\\right) \\\\
        \\int y^3 u v w &= -\\frac{1}{2\\mu}\\left(2\\int y u v w + \\int y^2 u_y v w + \\int y^2 u v_y w\\right)

    with ``w = phi^2 psi^2``, for handles `u` and `v` vanishing near the
    boundary.

    Returns
    -------
    list of tuple
        ``(residual, scale)`` per identity, where ``scale`` is the largest
        magnitude among the integrals involved
    '''
    x, y, w = _points(dom, quad, nu, mu)
    uu, uy = u.value(x, y), u.dy(x, y)
    vv, vy = v.value(x, y), v.dy(x, y)

    def integral(f):
        return float(np.sum(f * w))

    results = []
    for k in (1, 2, 3):
        lhs = integral(y ** k * uu * vv)
        parts = [integral(y ** (k - 1) * uy * vv), integral(y ** (k - 1) * uu * vy)]
        if k == 2:
            parts.append(integral(uu * vv))
        elif k == 3:
            parts.append(2.0 * integral(y * uu * vv))
        rhs = -sum(parts) / (2.0 * mu)
        scale = max([abs(lhs)] + [abs(q) / (2.0 * mu) for q in parts])
        results.append((abs(lhs - rhs), scale))
    return results


def strong_operator(u, x, y, p, vp):
    '''Apply ``L^H`` to the handle `u` pointwise.'''
    kappa, m, sigma, rho, r = p.kappa, p.m, p.sigma, p.rho, p.r
    omega = vp.omega
    return (-0.5 * y * u.dxx(x, y) - 0.5 * sigma ** 2 * y * u.dyy(x, y) -
            rho * sigma * y * u.dxy(x, y) -
            (omega * rho * sigma * y ** 2 - 0.5 * y + r) * u.dx(x, y) -
            (omega * sigma ** 2 * y ** 2 + kappa * (m - y)) * u.dy(x, y) -
            (0.5 * omega * sigma ** 2 * y * (omega * y ** 2 + 1.0) + omega * y * kappa * (m - y) - r) *
            u.value(x, y))


def form_on_handles(u, v, dom, quad, p, vp, terms=ALL_TERMS):
    '''Quadrature of the ten-term form for smooth handles.'''
    x, y, w = _points(dom, quad, vp.nu, vp.mu)
    coeffs = form_coefficients(y, vp.nu * np.sign(x), p, vp, terms)
    u0, ux, uy = u.value(x, y), u.dx(x, y), u.dy(x, y)
    v0, vx, vy = v.value(x, y), v.dx(x, y), v.dy(x, y)
    products = {'ux_vx': ux * vx, 'ux_v': ux * v0, 'uy_vy': uy * vy,
                'uy_v': uy * v0, 'uy_vx': uy * vx, 'u_v': u0 * v0}
    return float(sum(np.sum(coeffs[name] * products[name] * w) for name in PAIRINGS))


def strong_form_residual(u, v, dom, quad, p, vp):
    '''
    Compare the ten-term form with the weighted integral of ``(L^H u) v``
    for smooth handles supported inside the rectangle.

    Returns
    -------
    weak: float
    strong: float
    '''
    x, y, w = _points(dom, quad, vp.nu, vp.mu)
    strong = float(np.sum(strong_operator(u, x, y, p, vp) * v.value(x, y) * w))
    weak = form_on_handles(u, v, dom, quad, p, vp)
    return weak, strong


def garding_residual(v, fm, cert):
    '''
    ``Re a(v, v) - c1 ||v||_V^2 - c2 ||v||^2``, non-negative whenever `cert`
    is a valid certificate for the assembled parameters.
    '''
    if not cert.certified:
        raise ParameterError("garding_residual needs a certified tuple")
    v = coefficients(v, fm.dom)
    quadratic = float(v.dot(fm.A.dot(v)))
    vn = v_norm(v, fm.dom, fm.cells, fm.vp.nu, fm.vp.mu)
    l2 = weighted_l2_norm(v, fm.dom, fm.cells, fm.vp.nu, fm.vp.mu)
    return quadratic - cert.c1 * vn ** 2 - cert.c2 * l2 ** 2


def continuity_ratio(u, v, fm):
    '''``|a(u, v)| / (||u||_V ||v||_V)``.'''
    u = coefficients(u, fm.dom)
    v = coefficients(v, fm.dom)
    nu_, mu_ = fm.vp.nu, fm.vp.mu
    un = v_norm(u, fm.dom, fm.cells, nu_, mu_)
    vn = v_norm(v, fm.dom, fm.cells, nu_, mu_)
    if un == 0 or vn == 0:
        raise ParameterError("continuity_ratio is undefined for a zero function")
    return abs(float(v.dot(fm.A.dot(u)))) / (un * vn)


def beurling_deny_defect(v, fm):
    '''
    ``a(v+, v-)`` for the nodal positive and negative parts of `v`. The
    continuous form gives zero on functions with disjoint supports; the
    discrete value measures how far the bilinear discretization is from that.
    '''
    v = coefficients(v, fm.dom)
    plus = np.maximum(v, 0.0)
    minus = np.maximum(-v, 0.0)
    return float(minus.dot(fm.A.dot(plus)))
