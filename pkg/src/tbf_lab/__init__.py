"""Thinned Bernoulli field on the integer line: kernels, g-function, chain and oracles."""

from .boundary import BoundaryCondition, TailKind, TailPattern, format_boundary, parse_boundary
from .errors import (
    BoundaryError,
    DomainError,
    EnumerationLimitError,
    InadmissibleError,
    PaddingInstabilityError,
    TruncationError,
)
from .gfunction import INFINITY, g, g_values, parity_limit, sweep_g, variation
from .ghoc import (
    GhocPath,
    StationaryDistribution,
    balance_residual,
    distance_sequence,
    foster_drift,
    past_distance,
    pattern_probability,
    sample_path,
    stationary,
    tau,
    transition,
)
from .oracle import (
    finite_conditional,
    gfunction_via_kernels,
    kernel_convergence,
    monte_carlo_thin,
    pushforward_marginal,
)
from .specification import (
    AreaDecomposition,
    Interval,
    KernelResult,
    decompose,
    finite_energy_ratio,
    kernel,
    lower_bound_exact,
    sensitivity_bounds,
    sensitivity_over_family,
    thin,
    unfixed_weight,
    witness_pair,
)
from .spectral import (
    Density,
    Spectrum,
    build_spectrum,
    isolation_weight,
    q_power,
    q_power_log,
    ratio_limit_onesided,
    ratio_limit_twosided,
)

__version__ = "0.1.0"
