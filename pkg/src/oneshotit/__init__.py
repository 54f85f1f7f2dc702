"""Finite-alphabet toolkit for one-shot achievability analysis.

Exact evaluation of one-shot correct-probability bounds for seven classic
multi-terminal coding problems, executable stochastic-coding simulators that
verify those bounds by Monte Carlo, and finite-blocklength (second-order)
achievable rates and regions.
"""

from .bounds import (
    BoundResult,
    CodeSizes,
    DistortionSpec,
    berger_tung_bound,
    check_factorization,
    gp_bound,
    hb_kaspi_bound,
    jscc_mac_bound,
    marton2_bound,
    marton3_bound,
    md_bound,
    p2p_bound,
    validate_design,
)
from .codecsim import (
    Codebook,
    SimulationReport,
    TrialOutcome,
    build_codebook,
    random_binning,
    simulate,
    smc_draw,
    smc_weights,
)
from .densities import (
    DensitySpec,
    density_exponents,
    density_table,
    entropy_density,
    info_density,
)
from .errors import (
    BoundError,
    ConfigError,
    DensityError,
    GeometryError,
    OneshotError,
    PmfError,
    SimError,
)
from .pmf import (
    Alphabet,
    CommonPartLabeling,
    ConditionalKernel,
    JointPMF,
    Variable,
    build_joint,
    compose,
    compute_common_part,
    expectation,
    marginalize,
    sample,
)
from .secondorder import (
    GpRate,
    MomentResult,
    RateQuery,
    bc_moments,
    bc_region_membership,
    bc_region_witness,
    density_moments,
    gp_rate,
    mvn_cdf,
    qinv_contains,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "Variable", "JointPMF", "ConditionalKernel", "CommonPartLabeling",
    "build_joint", "marginalize", "compose", "expectation", "sample",
    "compute_common_part",
    "DensitySpec", "info_density", "entropy_density", "density_table",
    "density_exponents",
    "CodeSizes", "DistortionSpec", "BoundResult",
    "p2p_bound", "gp_bound", "marton2_bound", "marton3_bound",
    "berger_tung_bound", "hb_kaspi_bound", "md_bound", "jscc_mac_bound",
    "check_factorization", "validate_design",
    "Codebook", "TrialOutcome", "SimulationReport",
    "smc_draw", "smc_weights", "random_binning", "build_codebook", "simulate",
    "MomentResult", "RateQuery", "GpRate",
    "density_moments", "mvn_cdf", "qinv_contains", "gp_rate",
    "bc_moments", "bc_region_witness", "bc_region_membership",
    "OneshotError", "PmfError", "DensityError", "BoundError", "SimError",
    "GeometryError", "ConfigError",
]
