"""Zero-sum differential games driven by Caputo fractional dynamics.

The package couples a fractional-order controlled system with a
first-order retarded "guide" system built from Grunwald-Letnikov
differences, provides mutual-aiming feedback procedures for both players,
and estimates the game value by exhaustive search over per-step control
trees.
"""

__version__ = "0.1.0"

from .dynamics import (
    ControlSet,
    Dynamics,
    Partition,
    PiecewiseConstantControl,
    Position,
    QualityIndex,
    SystemBounds,
    bound_constants,
    check_isaacs,
    concatenate_controls,
    constant_position,
    motion_bound_check,
    solve_caputo,
)
from .experiments import (
    ExperimentReport,
    emit,
    emit_trajectory,
    run_lemma2_experiment,
    run_single,
    run_theorem1_experiment,
    run_value_sweep,
)
from .fractional import (
    FractionalOrder,
    GLCoefficients,
    SampledFunction,
    caputo_derivative,
    fractional_difference,
    gl_coefficients,
    mittag_leffler,
    rl_integral,
)
from .guide import (
    GuideConfig,
    GuideState,
    initial_guide_segment,
    reconstruct_state,
    reconstructed_path,
    step_guide,
)
from .scenarios import (
    ScenarioSpec,
    builtin_scenario,
    builtin_scenario_names,
    load_scenario,
    resolve_scenario,
)
from .strategies import (
    GameRunResult,
    ProcedureConfig,
    aiming_vector,
    control_with_guide_first,
    control_with_guide_second,
    mutual_aiming_first,
    mutual_aiming_second,
    pre_strategy_max,
    pre_strategy_min,
    run_mutual_aiming_first,
    run_mutual_aiming_second,
)
from .value import (
    ValueQuery,
    ValueResult,
    brute_force_value,
    optimal_guide_control,
    representation_bridge,
    value_convergence_sweep,
    value_map,
)

__all__ = [
    "ControlSet",
    "Dynamics",
    "ExperimentReport",
    "FractionalOrder",
    "GLCoefficients",
    "GameRunResult",
    "GuideConfig",
    "GuideState",
    "Partition",
    "PiecewiseConstantControl",
    "Position",
    "ProcedureConfig",
    "QualityIndex",
    "SampledFunction",
    "ScenarioSpec",
    "SystemBounds",
    "ValueQuery",
    "ValueResult",
    "aiming_vector",
    "bound_constants",
    "brute_force_value",
    "builtin_scenario",
    "builtin_scenario_names",
    "caputo_derivative",
    "check_isaacs",
    "concatenate_controls",
    "constant_position",
    "control_with_guide_first",
    "control_with_guide_second",
    "emit",
    "emit_trajectory",
    "fractional_difference",
    "gl_coefficients",
    "initial_guide_segment",
    "load_scenario",
    "mittag_leffler",
    "motion_bound_check",
    "mutual_aiming_first",
    "mutual_aiming_second",
    "optimal_guide_control",
    "pre_strategy_max",
    "pre_strategy_min",
    "reconstruct_state",
    "reconstructed_path",
    "representation_bridge",
    "resolve_scenario",
    "rl_integral",
    "run_lemma2_experiment",
    "run_mutual_aiming_first",
    "run_mutual_aiming_second",
    "run_single",
    "run_theorem1_experiment",
    "run_value_sweep",
    "solve_caputo",
    "step_guide",
    "value_convergence_sweep",
    "value_map",
    "__version__",
]
