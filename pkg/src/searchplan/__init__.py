"""Planning, verification, and benchmarking of detection-maximizing search
schedules under a travel/search time budget with unreliable sensors."""

from .belief import (BeliefVector, ContradictionError, ExecutionTrace,
                     Observation, fast_posterior, one_step_update,
                     posterior_no_false_positive, recursive_posterior)
from .dp_solvers import (Instance1D, choose_discretization, solve_1d,
                         solve_ordered, solve_segment_1d, to_line_instance)
from .exact import (ExactLimits, KnapsackItems, knapsack_to_instance,
                    solve_exact, verify_reduction)
from .heuristics import (TourOrdering, UniformParams, allocate_equal,
                         solve_greedy, solve_tsp_dp, solve_uniform, tsp_order)
from .instances import (ConversionConfig, FormatError, OrienteeringRecord,
                        convert_orienteering, generate_random, load_json,
                        load_orienteering, save_json, subsample_records)
from .model import (Instance, Point, RawSchedule, Schedule, SolveResult,
                    SolverLimitError, SolverTimeout, canonicalize,
                    detection_probability, diameter, schedule_weight, validate)
from .simulator import (SimOutcome, SimStats, estimate_probability,
                        estimate_with_miss_counts, replay_posterior,
                        simulate_once, trial_rng)

__version__ = "0.1.0"

__all__ = [
    "BeliefVector", "ContradictionError", "ExecutionTrace", "Observation",
    "fast_posterior", "one_step_update", "posterior_no_false_positive",
    "recursive_posterior",
    "Instance1D", "choose_discretization", "solve_1d", "solve_ordered",
    "solve_segment_1d", "to_line_instance",
    "ExactLimits", "KnapsackItems", "knapsack_to_instance", "solve_exact",
    "verify_reduction",
    "TourOrdering", "UniformParams", "allocate_equal", "solve_greedy",
    "solve_tsp_dp", "solve_uniform", "tsp_order",
    "ConversionConfig", "FormatError", "OrienteeringRecord",
    "convert_orienteering", "generate_random", "load_json",
    "load_orienteering", "save_json", "subsample_records",
    "Instance", "Point", "RawSchedule", "Schedule", "SolveResult",
    "SolverLimitError", "SolverTimeout", "canonicalize",
    "detection_probability", "diameter", "schedule_weight", "validate",
    "SimOutcome", "SimStats", "estimate_probability",
    "estimate_with_miss_counts", "replay_posterior", "simulate_once",
    "trial_rng",
    "__version__",
]
