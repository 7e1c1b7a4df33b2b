"""Exact capacities of classical and classical-quantum channels."""

from .errors import (
    CapacityError,
    ChannelFileError,
    DimensionError,
    InvalidDistribution,
    MaxIterExceeded,
    NoConvergence,
    NoSignChange,
    NotHermitian,
    RankDeficient,
    SingularChannel,
    SubsetSearchInconclusive,
)
from .exact import (
    CapacityOptions,
    CapacityReport,
    DualBasis,
    ExactSolution,
    NaturalParameters,
    SolverPath,
    Status,
    algorithm1,
    build_dual_basis,
    capacity,
    equal_divergence_residual,
    exact_solution,
    solve_mixture_exponential_intersection,
    solve_theta,
)
from .exact_cq import (
    CqCapacityReport,
    CqExactSolution,
    algorithm2,
    build_observable_basis,
    cq_capacity,
)
from .family import (
    binary_channel_capacity,
    candidate_capacities,
    epsilon_family_channel,
    piecewise_capacity,
    thresholds,
)
from .oracle import IterationTrace, blahut_arimoto, blahut_arimoto_cq, hybrid_support_detect
from .prob import (
    CapacityValue,
    ClassicalChannel,
    as_distribution,
    binary_entropy,
    bsc,
    entropy,
    kl_divergence,
    mutual_information,
    output_distribution,
)
from .quantum import (
    CqChannel,
    bloch_state,
    matrix_exp,
    matrix_log,
    quantum_relative_entropy,
    unvectorize,
    vectorize,
    von_neumann_entropy,
)

__version__ = "0.1.0"
