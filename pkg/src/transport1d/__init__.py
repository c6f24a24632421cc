"""Transport solver for 1D continuity equations with bounded velocity.

The public surface mirrors the construction pipeline: sampled fields,
monotone envelopes, the space-time potential, weak characteristics, the
slab solver, and the mollified reference solver used as an independent
check.
"""

from .characteristics import CharCurve, backward_scan, division_points, level_curve
from .envelope import (
    Envelope,
    envelope_restriction,
    lower_increasing_envelope,
    upper_decreasing_envelope,
)
from .field import (
    BoundaryData,
    ConstructionError,
    FieldPair,
    Scenario,
    SpaceTimeGrid,
    build_grid,
    builtin_scenarios,
    sample_scenario,
    tabulated_scenario,
    total_variation,
)
from .oracle import extend_fields, mollify, oracle_solution, smooth_data, solve_smooth
from .potential import (
    Potential,
    boundary_time_derivative,
    build_potential,
    interior_time_quotients,
)
from .solver import (
    Solution,
    bv_in_space_check,
    check_boundary_condition,
    comparison_check,
    renormalized_trace_check,
    solve,
    solve_at_column,
    theta_time_trace,
    tilde_q_value,
)
from .verification import CRITERIA_ORDER, CriterionResult, run_criteria

__all__ = [
    "BoundaryData",
    "CharCurve",
    "ConstructionError",
    "CRITERIA_ORDER",
    "CriterionResult",
    "Envelope",
    "FieldPair",
    "Potential",
    "Scenario",
    "Solution",
    "SpaceTimeGrid",
    "backward_scan",
    "boundary_time_derivative",
    "build_grid",
    "build_potential",
    "builtin_scenarios",
    "bv_in_space_check",
    "check_boundary_condition",
    "comparison_check",
    "division_points",
    "envelope_restriction",
    "extend_fields",
    "interior_time_quotients",
    "level_curve",
    "lower_increasing_envelope",
    "mollify",
    "oracle_solution",
    "renormalized_trace_check",
    "sample_scenario",
    "smooth_data",
    "solve",
    "solve_at_column",
    "solve_smooth",
    "tabulated_scenario",
    "theta_time_trace",
    "tilde_q_value",
    "total_variation",
    "upper_decreasing_envelope",
    "run_criteria",
]
