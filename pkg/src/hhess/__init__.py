"""Design and verification lab for hybrid hydrogen electrolyzer /
supercapacitor plants sharing a droop-controlled DC bus.

The package splits along the workflow:

* :mod:`hhess.droop` — the three droop laws, their closed-bus transfer
  functions, and the second-order characteristic they share.
* :mod:`hhess.design` — gain synthesis from time-domain targets, fleet
  aggregation, and expansion recalibration.
* :mod:`hhess.freq` — frequency-response tables and band-edge crossovers.
* :mod:`hhess.sim` — closed-loop time-domain simulation against an
  inertia-emulating grid, with step-response metrics and SC state of
  charge bookkeeping.
* :mod:`hhess.mpt` — marginal participation threshold stability test for
  the converter-level model, plus the power/capacitance sweep.
* :mod:`hhess.config` / :mod:`hhess.cli` — INI-file configuration and the
  ``hhess`` command line tool built on all of the above.
"""

from .config import ConfigError, RunConfig, default_config, load_config, parse_config
from .design import (
    DesignTargets,
    EquivalentBank,
    FleetSpec,
    InfeasibleDampingError,
    NonIdenticalWashoutError,
    aggregate,
    alpha_from_rating,
    expanded_equivalent,
    expansion_recalibrate,
    synthesize,
)
from .droop import (
    BranchPowers,
    DroopBank,
    PoleEvaluationError,
    SecondOrderChar,
    SharingIndices,
    ael_bus_voltage,
    branch_transfer,
    characteristic,
    denominator_coeffs,
    numerator_coeffs,
    sharing_indices,
    steady_state_powers,
)
from .freq import (
    DB_FLOOR,
    BodeTable,
    CrossoverReport,
    bode,
    branch_response,
    crossover_report,
)
from .mpt import (
    DQ_POWER_FACTOR,
    MU1_TERM_NAMES,
    MU2_TERM_NAMES,
    MptCircuit,
    MptOperatingPoint,
    SingularBranchTermError,
    SingularGridTermError,
    StabilityResult,
    SweepPlane,
    SweepSpec,
    extract_boundary,
    is_stable,
    mu1,
    mu2,
    sweep,
)
from .sim import (
    AllocationFilter,
    GridModel,
    InertiaParams,
    IntegrationDivergedError,
    NoStepEventError,
    Scenario,
    SocState,
    StepMetrics,
    TimeSeries,
    final_soc,
    realize_allocation_filter,
    simulate,
    soc_violations,
    step_metrics,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationFilter",
    "BodeTable",
    "BranchPowers",
    "ConfigError",
    "CrossoverReport",
    "DB_FLOOR",
    "DQ_POWER_FACTOR",
    "DesignTargets",
    "DroopBank",
    "EquivalentBank",
    "FleetSpec",
    "GridModel",
    "InertiaParams",
    "InfeasibleDampingError",
    "IntegrationDivergedError",
    "MptCircuit",
    "MptOperatingPoint",
    "MU1_TERM_NAMES",
    "MU2_TERM_NAMES",
    "NoStepEventError",
    "NonIdenticalWashoutError",
    "PoleEvaluationError",
    "RunConfig",
    "Scenario",
    "SecondOrderChar",
    "SharingIndices",
    "SingularBranchTermError",
    "SingularGridTermError",
    "SocState",
    "StabilityResult",
    "StepMetrics",
    "SweepPlane",
    "SweepSpec",
    "TimeSeries",
    "ael_bus_voltage",
    "aggregate",
    "alpha_from_rating",
    "bode",
    "branch_response",
    "branch_transfer",
    "characteristic",
    "crossover_report",
    "default_config",
    "denominator_coeffs",
    "expanded_equivalent",
    "expansion_recalibrate",
    "extract_boundary",
    "final_soc",
    "is_stable",
    "load_config",
    "mu1",
    "mu2",
    "numerator_coeffs",
    "parse_config",
    "realize_allocation_filter",
    "sharing_indices",
    "simulate",
    "soc_violations",
    "steady_state_powers",
    "step_metrics",
    "sweep",
    "synthesize",
]
