"""Network immunization under stochastic cascades.

Given a contact network where an infection spreads probabilistically from a
set of seed nodes, this package selects nodes (or groups of nodes with
probabilistic vaccine acceptance) to immunize so as to maximize the expected
utility of the people saved, and computes data-dependent guarantees on how
close the greedy choice provably is to the optimum.

Modules:
    graph     probabilistic graphs, random generators, transforms, file I/O
    cascade   live-edge sampling and Monte Carlo estimation
    immunize  greedy group selection with acceptance policies
    bounds    effective degrees and approximation factors
    oracle    exact enumeration for tiny instances
    cli       command-line front end
"""

from .bounds import (
    BoundReport,
    EffectiveDegreeProfile,
    effective_degree_ic,
    effective_degree_link,
    effective_degree_sir,
    effective_degrees,
    factor_vs_r0,
    household_factor,
    household_lambda,
    optimize_threshold,
    phi,
    recommended_replicates,
)
from .cascade import (
    IC,
    CascadeModel,
    EstimateResult,
    LiveEdgeSample,
    estimate_pi,
    estimate_sigma,
    reachable,
    sample_live_edges,
    saved_utility,
)
from .errors import (
    BudgetError,
    ConfigError,
    DomainError,
    GraphError,
    GraphFormatError,
    ImmunetError,
    InvalidProbabilityError,
    SizeCapError,
    ThresholdError,
)
from .graph import (
    GenConfig,
    HouseholdSpec,
    LayeredSpec,
    ProbGraph,
    build_households,
    build_layered,
    generate,
    load,
    save,
    split_for_link_immunization,
    thin_by_susceptibility,
)
from .immunize import (
    Deterministic,
    ExactEvaluator,
    Gain,
    Group,
    Independent,
    LeakyChain,
    MonteCarloEstimator,
    Selection,
    greedy,
    iteration_seed,
    load_groups,
    prefix_greedy,
    sample_acceptance,
    save_groups,
    singleton_groups,
)
from .oracle import (
    ExactEngine,
    ExactResult,
    counterexample_a,
    counterexample_b,
    critical_subset_check,
    exact_pi,
    exact_sigma,
    exhaustive_opt,
    submodularity_gap_check,
)

__version__ = "0.1.0"
