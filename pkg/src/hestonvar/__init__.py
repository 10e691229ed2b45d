from hestonvar.version import version as __version__

from hestonvar.utils import HestonvarError, NumericalFailure
from hestonvar.model import (
    ParameterError, OptionKind, HestonParams, OptionSpec, feller_margin, bessel_dimension,
    payoff, recover_price, forward_transform)
from hestonvar.coercivity import (
    InfeasibleError, VariationalParams, EpsilonTriple, CoercivityCertificate, CertificateMode,
    certify, search_feasible, continuity_constant, delta_max, rho_bound)
from hestonvar.wspace import (
    TruncatedDomain, QuadratureRule, weighted_l2_norm, v_norm, project, interpolate)
from hestonvar.form import FormMatrices, assemble, dirac_source, garding_residual, continuity_ratio
from hestonvar.solver import TimeGrid, SolveResult, solve, decay_check, positivity_check, price_surface
from hestonvar.oracle import MCConfig, MCScheme, heston_price, mc_price, black_scholes_price


__all__ = [
    "__version__", "HestonvarError", "NumericalFailure",
    "ParameterError", "OptionKind", "HestonParams", "OptionSpec", "feller_margin",
    "bessel_dimension", "payoff", "recover_price", "forward_transform",
    "InfeasibleError", "VariationalParams", "EpsilonTriple", "CoercivityCertificate",
    "CertificateMode", "certify", "search_feasible", "continuity_constant", "delta_max",
    "rho_bound",
    "TruncatedDomain", "QuadratureRule", "weighted_l2_norm", "v_norm", "project", "interpolate",
    "FormMatrices", "assemble", "dirac_source", "garding_residual", "continuity_ratio",
    "TimeGrid", "SolveResult", "solve", "decay_check", "positivity_check", "price_surface",
    "MCConfig", "MCScheme", "heston_price", "mc_price", "black_scholes_price",
]
