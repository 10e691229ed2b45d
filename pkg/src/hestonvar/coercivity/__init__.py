from .constants import (
    InfeasibleError, VariationalParams, EpsilonTriple, AuxConstants, AlphaCoefficients,
    DEFAULT_CUTOFF, delta_max, rho_bound, tbar_of, aux_constants, alpha_coefficients,
    nu_bound, gating_functions, omega_discriminant, omega_upper_cap, omega_interval,
    eps3_window, beta_cap)

from .certificate import (
    CertificateMode, VarianceBand, ConstraintCheck, CoercivityCertificate,
    certify, continuity_constant, DEFAULT_SLACK)

from .search import SearchGrid, SearchResult, FeasibilitySearch, search_feasible


__all__ = [
    "InfeasibleError", "VariationalParams", "EpsilonTriple", "AuxConstants",
    "AlphaCoefficients", "DEFAULT_CUTOFF", "delta_max", "rho_bound", "tbar_of",
    "aux_constants", "alpha_coefficients", "nu_bound", "gating_functions",
    "omega_discriminant", "omega_upper_cap", "omega_interval", "eps3_window", "beta_cap",
    "CertificateMode", "VarianceBand", "ConstraintCheck", "CoercivityCertificate",
    "certify", "continuity_constant", "DEFAULT_SLACK",
    "SearchGrid", "SearchResult", "FeasibilitySearch", "search_feasible",
]
