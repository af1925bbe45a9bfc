"""Bures-Hall random-matrix ensembles: exact spectral densities, average
entanglement entropies, and log-gas Monte Carlo validation."""

__version__ = "0.1.0"

from .density import (
    DensityCurve,
    UnsupportedParamsError,
    correlation_unrestricted,
    default_cutoff,
    fixed_moment,
    level_density_fixed,
    level_density_unrestricted,
    tabulate_density,
    unrestricted_moment,
)
from .ensemble import (
    EnsembleParams,
    kernel_G,
    kernel_f,
    kernel_g,
    log_jpd_unrestricted,
    normalization_C,
    normalization_C_exact,
    normalization_CF,
    normalization_CF_exact,
)
from .entropy import (
    EntropyReport,
    IdentityCheck,
    avg_hct,
    avg_hct_exact,
    avg_hct_via_unrestricted,
    avg_purity,
    avg_purity_exact,
    avg_von_neumann,
    avg_von_neumann_exact,
    conjecture_purity,
    conjecture_purity_exact,
    conjecture_von_neumann,
    conjecture_von_neumann_exact,
    entropy_report,
    hs_purity,
    hs_purity_exact,
    hs_von_neumann,
    hs_von_neumann_exact,
    purity_difference_exact,
    verify_conjecture_identities,
)
from .exact import ExactScalar, digamma_exact, gamma_exact, to_float
from .loggas import (
    ChainConfig,
    ChainResult,
    energy,
    energy_delta,
    fixed_trace_samples,
    mc_entropy_estimates,
    run_chain,
    run_chains,
)
from .pfaffian import (
    build_H,
    build_H_exact,
    pf_H_closed,
    pf_H_closed_exact,
    pf_H_minor,
    pf_H_minor_exact,
    pfaffian_generic,
)
from .specfun import (
    DomainError,
    PoleError,
    digamma,
    exp_integral,
    exp_integral_scaled,
    inc_beta,
    log_gamma,
)

__all__ = [name for name in dir() if not name.startswith("_")]
