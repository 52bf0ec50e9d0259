"""Uncertainty, entropy, and information as optimal-loss reduction.

Knowledge states are partitions of a finite sample space; the uncertainty
of a random element between two knowledge states is the drop in optimal
expected loss.  Entropy, conditional entropy, information, and
conditional information are the four named corners of that one quantity,
for any plugged-in loss function.
"""

__version__ = "0.1.0"

from .errors import (
    GridError,
    InfiniteQuantityError,
    LossInfoError,
    PartitionMismatchError,
    ScenarioError,
    SolverError,
    UnboundedSearchError,
    UndefinedArithmeticError,
    ValidationError,
    ZeroMassBlockError,
)
from .extreal import ExtendedReal
from .space import (
    Partition,
    RandomElement,
    SampleSpace,
    conditional_expectation,
    enumerate_partitions,
    is_refinement,
    partition_join,
    partition_of_element,
    restrict_to_support,
    trivial_partition,
)
from .losses import (
    BayesActResult,
    ConvexFunction,
    LossModel,
    PointwiseMin,
    RealBox,
    Simplex,
    WeightedStates,
    bayes_act,
    bregman_loss,
    exponential_sum,
    kl_loss,
    log_loss,
    negative_entropy,
    pointwise_min_loss,
    scoring_divergence,
    square_error,
    squared_norm,
    tsallis_score,
)
from .uncertainty import (
    BeliefDecomposition,
    UncertaintyReport,
    belief_decomposition,
    bregman_information,
    check_pythagoras,
    check_telescope,
    conditional_entropy,
    conditional_information,
    entropy,
    information,
    optimal_risk,
    uncertainty_reduction,
)
from .continuous import (
    ContinuousEntropyEvidence,
    GridDensity,
    GridDensity2D,
    WitnessSequence,
    bivariate_gaussian_density,
    continuous_entropy,
    continuous_information,
    demonstrate_entropy_divergence,
    gaussian_density,
    hyvarinen_information,
    hyvarinen_witness_bound,
    hyvarinen_witness_score_at_center,
    logloss_witness_quadrature,
    logloss_witness_value,
    product_density,
    witness_density,
)
from .scenario import Scenario, load_scenario, parse_scenario

__all__ = [name for name in dir() if not name.startswith("_")]
