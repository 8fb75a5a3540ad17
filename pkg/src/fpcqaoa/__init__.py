"""Fixed-parameter-count QAOA and standard QAOA on an exact statevector simulator."""

from fpcqaoa.ising import (
    CapacityError,
    DegenerateInstanceError,
    InvalidInputError,
    IsingProblem,
    MetricsRecord,
    ShotHistogram,
    brute_force_ground,
    compute_eta,
    compute_r,
    energy_of_bitstring,
    expectation_from_histogram,
)
from fpcqaoa.schedules import ScheduleSet, build_interpolant, eval_schedule, linear_ramp_set
from fpcqaoa.ansatz import (
    Circuit,
    QaoaParams,
    TrotterConfig,
    build_fpc_circuit,
    build_qaoa_circuit,
    count_trainable,
)
from fpcqaoa.simulator import (
    SimConfig,
    StateVector,
    dense_oracle_evolve,
    exact_expectation,
    run_statevector,
    sample_histogram,
)
from fpcqaoa.problems import GraphSpec, TapInstance, gen_maxcut, gen_tap, gen_topology_ising, tap_to_ising
from fpcqaoa.optimize import (
    ObjectiveConfig,
    OptimizerConfig,
    RunRecord,
    cvar_from_counts,
    optimize,
    run_fpc,
    run_qaoa,
    run_random_sampling,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "Circuit",
    "DegenerateInstanceError",
    "GraphSpec",
    "InvalidInputError",
    "IsingProblem",
    "MetricsRecord",
    "ObjectiveConfig",
    "OptimizerConfig",
    "QaoaParams",
    "RunRecord",
    "ScheduleSet",
    "ShotHistogram",
    "SimConfig",
    "StateVector",
    "TapInstance",
    "TrotterConfig",
    "brute_force_ground",
    "build_fpc_circuit",
    "build_interpolant",
    "build_qaoa_circuit",
    "compute_eta",
    "compute_r",
    "count_trainable",
    "cvar_from_counts",
    "dense_oracle_evolve",
    "energy_of_bitstring",
    "eval_schedule",
    "exact_expectation",
    "expectation_from_histogram",
    "gen_maxcut",
    "gen_tap",
    "gen_topology_ising",
    "linear_ramp_set",
    "optimize",
    "run_fpc",
    "run_qaoa",
    "run_random_sampling",
    "run_statevector",
    "sample_histogram",
    "tap_to_ising",
]
