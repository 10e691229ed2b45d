'''
Batch front end::

    hestonvar feasibility|price|convergence|mc-compare --config run.hjson \\
        [--set section.key=value ...] [--out DIR] [-v]

Exit codes: 0 on success, 2 for infeasible parameters, 3 for numerical
failures, 4 for configuration or parameter errors.
'''
import os
import sys
import csv
import math
import logging
import argparse

import numpy as np

from hestonvar.version import version
from hestonvar.utils.base import HestonvarError, NumericalFailure, opened, fmt_float
from hestonvar.model import ParameterError, OptionSpec, OptionKind
from hestonvar.coercivity import InfeasibleError, certify, search_feasible
from hestonvar.config import RunConfig, ConfigError
from hestonvar.form import assemble
from hestonvar.solver import solve, TimeGrid
from hestonvar.oracle import heston_price, mc_price


logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())


EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3
EXIT_CONFIG = 4

COMPARE_HEADER = ['method', 'price', 'std_error', 'abs_diff_vs_analytic']


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    return str(value)


def write_rows(path, header, rows):
    with opened(path, 'w') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def obtain_certificate(cfg):
    '''
    Certify the configured tuple, or search for one when the configuration
    gives none.

    Returns
    -------
    vp, eps, delta, certificate

    Raises
    ------
    InfeasibleError
    '''
    if cfg.variational is not None:
        cert = certify(cfg.model, cfg.variational, cfg.epsilons, cfg.delta, domain=cfg.domain)
        cert.require()
        return cfg.variational, cfg.epsilons, cert.delta, cert
    return tuple(search_feasible(cfg.model, domain=cfg.domain, grid=cfg.search_grid,
                                 processes=cfg.processes))


def pde_solve(cfg, vp, spec, domain=None, nt=None, fm=None):
    domain = domain if domain is not None else cfg.domain
    if fm is None:
        fm = assemble(domain, cfg.quadrature, cfg.model, vp)
    tg = TimeGrid(spec.T, nt if nt is not None else cfg.time.nt, cfg.time.theta)
    return solve(fm, spec, tg, lumped=cfg.lumped)


def _other_kind(spec):
    kind = OptionKind.put if spec.kind == OptionKind.call else OptionKind.call
    return OptionSpec(spec.K, spec.T, kind)


def cmd_feasibility(cfg, out_dir):
    '''Certify or search, write ``certificate.json`` and print the
    constraint table.'''
    path = os.path.join(out_dir, "certificate.json")
    try:
        _, _, _, cert = obtain_certificate(cfg)
    except InfeasibleError as err:
        if err.report is not None:
            err.report.dump(path)
            print(err.report.format_table())
        raise
    cert.dump(path)
    print(cert.format_table())
    return cert


def pde_price(sr, S0, y0):
    '''
    The PDE price at spot `S0` from a solve of the rescaled contract, which
    prices spot 1.

    Raises
    ------
    ParameterError
        When spot 1 falls outside the truncated domain
    '''
    price = S0 * sr.price_at(1.0, y0)
    if not math.isfinite(price):
        raise ParameterError(
            "Spot S0=%r lies outside the truncated log-price range [%r, %r] of the rescaled "
            "contract" % (S0, S0 * math.exp(sr.dom.x_min), S0 * math.exp(sr.dom.x_max)))
    return price


def cmd_price(cfg, out_dir):
    '''
    Price with the PDE and both oracles. Writes ``certificate.json``,
    ``surface.csv``, ``norms.csv`` and ``compare.csv``.

    The PDE solves the contract with strike ``K / S0`` at spot 1; surface
    spots and prices are scaled back by ``S0``.

    Returns
    -------
    dict
        The prices by method
    '''
    vp, _, _, cert = obtain_certificate(cfg)
    cert.dump(os.path.join(out_dir, "certificate.json"))
    p, spec, dom = cfg.model, cfg.option, cfg.domain
    S0, y0 = cfg.S0, cfg.y0

    fm = assemble(dom, cfg.quadrature, p, vp)
    sr = pde_solve(cfg, vp, cfg.pde_option, fm=fm)
    sr.to_csv(os.path.join(out_dir, "norms.csv"))
    S_grid = np.exp(np.linspace(dom.x_min, dom.x_max, 35)[1:-1])
    y_grid = np.linspace(dom.a, dom.y_max, 17)
    sr.surface_to_csv(os.path.join(out_dir, "surface.csv"), S_grid, y_grid, scale=S0)

    pde = pde_price(sr, S0, y0)
    analytic = heston_price(p, spec, S0, y0)
    mc, std_error = mc_price(p, spec, S0, y0, cfg.mc, processes=cfg.processes)
    prices = {'analytic': analytic, 'pde': pde, 'mc': mc, 'mc_std_error': std_error}
    rows = [
        ('analytic', analytic, None, 0.0),
        ('pde', pde, None, abs(pde - analytic)),
        ('mc', mc, std_error, abs(mc - analytic)),
    ]
    if cfg.parity:
        other = _other_kind(cfg.pde_option)
        other_price = pde_price(pde_solve(cfg, vp, other, fm=fm), S0, y0)
        call, put = (pde, other_price) if spec.kind == OptionKind.call else (other_price, pde)
        forward_gap = S0 - spec.K * math.exp(-p.r * spec.T)
        rows.append(('pde-parity', call - put, None, abs(call - put - forward_gap)))
        prices['parity'] = call - put
        prices['parity_error'] = abs(call - put - forward_gap)
    write_rows(os.path.join(out_dir, "compare.csv"), COMPARE_HEADER, rows)
    logger.info("PDE %0.6f, analytic %0.6f, Monte Carlo %0.6f +/- %0.6f", pde, analytic, mc, std_error)
    return prices


def _observed_order(diffs):
    if len(diffs) < 2 or diffs[-1] == 0 or diffs[-2] == 0:
        return None
    return math.log(abs(diffs[-2]) / abs(diffs[-1]), 2)


def cmd_convergence(cfg, out_dir, levels=3):
    '''
    Refine ``nx``, ``ny``, ``nt`` and ``y_max`` one at a time, doubling at
    each level. ``y_max`` sweeps scale ``ny`` along so the cell height stays
    fixed. Writes ``convergence.csv``.
    '''
    vp = obtain_certificate(cfg)[0]
    spec, dom, S0, y0 = cfg.pde_option, cfg.domain, cfg.S0, cfg.y0
    base = pde_price(pde_solve(cfg, vp, spec), S0, y0)
    rows = []
    results = {}
    for axis in ('nx', 'ny', 'nt', 'y_max'):
        prices = [base]
        values = []
        for level in range(levels):
            factor = 2 ** level
            if axis == 'nx':
                value = dom.nx * factor
                args = dict(domain=dom._replace(nx=value))
            elif axis == 'ny':
                value = dom.ny * factor
                args = dict(domain=dom._replace(ny=value))
            elif axis == 'nt':
                value = cfg.time.nt * factor
                args = dict(nt=value)
            else:
                value = dom.a + (dom.y_max - dom.a) * factor
                args = dict(domain=dom._replace(y_max=value, ny=dom.ny * factor))
            values.append(value)
            if level > 0:
                prices.append(pde_price(pde_solve(cfg, vp, spec, **args), S0, y0))
        diffs = []
        for level, (value, price) in enumerate(zip(values, prices)):
            diff = price - prices[level - 1] if level > 0 else None
            if diff is not None:
                diffs.append(diff)
            order = _observed_order(diffs) if level >= 2 else None
            rows.append((axis, level, value, price, diff, order))
        results[axis] = prices
    write_rows(os.path.join(out_dir, "convergence.csv"),
               ['axis', 'level', 'value', 'price', 'difference', 'observed_order'], rows)
    return results


def cmd_mc_compare(cfg, out_dir):
    '''Semi-analytic against Monte Carlo, without the PDE. Writes
    ``compare.csv``.'''
    p, spec, S0, y0 = cfg.model, cfg.option, cfg.S0, cfg.y0
    analytic = heston_price(p, spec, S0, y0)
    mc, std_error = mc_price(p, spec, S0, y0, cfg.mc, processes=cfg.processes)
    write_rows(os.path.join(out_dir, "compare.csv"), COMPARE_HEADER, [
        ('analytic', analytic, None, 0.0),
        ('mc', mc, std_error, abs(mc - analytic)),
    ])
    return {'analytic': analytic, 'mc': mc, 'mc_std_error': std_error}


COMMANDS = {
    'feasibility': cmd_feasibility,
    'price': cmd_price,
    'convergence': cmd_convergence,
    'mc-compare': cmd_mc_compare,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="hjson or JSON run configuration")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="Override one configuration entry")
    common.add_argument("--out", default=None, help="Output directory (default: outputs.directory)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="hestonvar", description="Weighted variational Heston pricing toolkit")
    parser.add_argument("--version", action="version", version="%(prog)s " + version)
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True
    for name, func in sorted(COMMANDS.items()):
        commands.add_parser(name, parents=[common], help=(func.__doc__ or '').strip().split('\n')[0])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = max(logging.WARNING - 10 * args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config, args.overrides)
        out_dir = args.out or cfg.output_dir
        if not os.path.isdir(out_dir):
            os.makedirs(out_dir)
        COMMANDS[args.command](cfg, out_dir)
    except InfeasibleError as err:
        sys.stderr.write("infeasible: %s (constraint %s)\n" % (err, err.constraint))
        return EXIT_INFEASIBLE
    except NumericalFailure as err:
        sys.stderr.write("numerical failure: %s\n" % (err,))
        return EXIT_NUMERICAL
    except (ConfigError, ParameterError, HestonvarError) as err:
        sys.stderr.write("configuration error: %s\n" % (err,))
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
