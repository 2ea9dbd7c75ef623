"""数值核心模块

- dynamics: 双方动力学与捕获判定
- poly_roots: 多项式实根与一维搜索
- phase1: 饱和前几何解
- phase2: 饱和后数值解与可达集
- solver: 策略求解调度与开环计划
- simulation: 闭环仿真
- verification: 值函数梯度与 HJI 核验
"""

from .dynamics import is_captured, psi, step, step_evader, step_pursuer, validate_state
from .phase1 import (
    candidate_capture_times,
    gamma_quartic_coeffs,
    phase1_strategy,
    reachability_circles,
    saturation_time,
    saturation_time_bounds,
    tangency_point,
)
from .phase2 import (
    bracket_feasible_domain,
    capture_time_given_heading,
    min_semi_axis,
    optimal_heading,
    oval_center,
    reachable_set_boundary,
    solve_phase2,
    w_feasibility,
)
from .poly_roots import bisect, golden_section_max, real_roots, ternary_search_max
from .simulation import GameRunner, capture_time_table, run_game
from .solver import OpenLoopPlan, solve
from .verification import (
    check_report,
    finite_difference_gradient,
    gradient_phase1,
    gradient_phase2,
    hji_residual,
    run_verification,
    switch_continuity_check,
    value_gradient,
)

__all__ = [
    # 动力学
    "step",
    "step_pursuer",
    "step_evader",
    "psi",
    "is_captured",
    "validate_state",
    # 求根与搜索
    "real_roots",
    "bisect",
    "ternary_search_max",
    "golden_section_max",
    # 阶段一
    "saturation_time",
    "saturation_time_bounds",
    "reachability_circles",
    "gamma_quartic_coeffs",
    "candidate_capture_times",
    "tangency_point",
    "phase1_strategy",
    # 阶段二
    "w_feasibility",
    "capture_time_given_heading",
    "bracket_feasible_domain",
    "optimal_heading",
    "solve_phase2",
    "reachable_set_boundary",
    "oval_center",
    "min_semi_axis",
    # 求解与仿真
    "solve",
    "OpenLoopPlan",
    "GameRunner",
    "run_game",
    "capture_time_table",
    # 核验
    "gradient_phase1",
    "gradient_phase2",
    "value_gradient",
    "hji_residual",
    "finite_difference_gradient",
    "switch_continuity_check",
    "run_verification",
    "check_report",
]
