"""值函数梯度、HJI 残差与数值核验

解析梯度按隐函数求导给出：阶段一对 Γ(t)=0 求导，阶段二对捕获时间二次方程
求导（θ_P* 处 ∂t/∂θ_P = 0，方向的变化不进入一阶项）。
"""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..config import PRESETS, resolve_config
from ..exceptions import (
    FeasibilityBoundaryError,
    NoCrossingError,
    SingularDenominatorError,
    ToleranceError,
    ValidationError,
    WrongPhaseError,
)
from ..models import (
    CaptureSolution,
    ContinuityReport,
    GameParams,
    GameState,
    Phase,
    SolverConfig,
    StateCheck,
    ValueGradient,
    VerificationReport,
)
from ..utils import sampling
from ..utils.angles import angle_difference
from .phase2 import (
    capture_time_function,
    optimal_heading,
    post_saturation_times,
    pq_terms,
)
from .poly_roots import golden_section_max
from .solver import solve

logger = logging.getLogger(__name__)

# D 的奇异阈值（相对）
SINGULAR_TOL = 1e-12
# R₁cosθ + R₂sinθ = −1 的自检容差
R_IDENTITY_TOL = 1e-9

StateFamily = Callable[[float], Tuple[GameState, GameParams]]


def _require_phase(sol: CaptureSolution, phase: Phase) -> None:
    if sol.phase is not phase:
        raise WrongPhaseError(
            f"Gradient formula for {phase.value} called on {sol.phase.value} solution"
        )


def gradient_phase1(
    state: GameState, sol: CaptureSolution, params: GameParams
) -> ValueGradient:
    """饱和前值函数梯度

    ∂V/∂x_P = d_x/D，∂V/∂v_Px = d_x t_f/D，逃逸者分量取相反数，
    其中 d = x_P − x_E + v t_f，D = −d·v + (½āP t_f² − v̄E t_f)(āP t_f − v̄E)。

    Raises:
        WrongPhaseError: 解不是饱和前
        SingularDenominatorError: |D| 过小
    """
    _require_phase(sol, Phase.PRE_SATURATION)
    t = sol.t_f
    d_x = state.x_P - state.x_E + state.v_Px * t
    d_y = state.y_P - state.y_E + state.v_Py * t
    along = d_x * state.v_Px + d_y * state.v_Py
    radial = (0.5 * params.a_P_max * t * t - params.v_E_max * t) * (
        params.a_P_max * t - params.v_E_max
    )
    D = -along + radial
    scale = max(abs(d_x * state.v_Px) + abs(d_y * state.v_Py), abs(radial), 1.0)
    if abs(D) < SINGULAR_TOL * scale:
        raise SingularDenominatorError(
            "Phase-1 gradient denominator vanishes", context={"D": D, "t_f": t}
        )
    return ValueGradient(
        dV_dxP=d_x / D,
        dV_dyP=d_y / D,
        dV_dvPx=d_x * t / D,
        dV_dvPy=d_y * t / D,
        dV_dxE=-d_x / D,
        dV_dyE=-d_y / D,
    )


def r_terms(state: GameState, theta: float, params: GameParams) -> Tuple[float, float]:
    """R₁ = āP ∂t_θ/∂v_Px，R₂ = āP ∂t_θ/∂v_Py

    Raises:
        SingularDenominatorError: v̄P² = (v_Px sinθ − v_Py cosθ)²
    """
    c, s = math.cos(theta), math.sin(theta)
    cross = state.v_Px * s - state.v_Py * c
    S_sq = params.v_P_max**2 - cross * cross
    if S_sq <= 0.0:
        raise SingularDenominatorError(
            "Saturation-time derivative is singular", context={"theta": theta}
        )
    S = math.sqrt(S_sq)
    R1 = (-state.v_Px * s * s + state.v_Py * s * c) / S - c
    R2 = (state.v_Px * s * c - state.v_Py * c * c) / S - s
    return R1, R2


def gradient_phase2(
    state: GameState, sol: CaptureSolution, params: GameParams
) -> ValueGradient:
    """饱和后值函数梯度

    Raises:
        WrongPhaseError: 解不是饱和后
        FeasibilityBoundaryError: g = sqrt(w) ≤ 0
    """
    _require_phase(sol, Phase.POST_SATURATION)
    theta = sol.theta_P_star
    terms = pq_terms(state, theta, params)
    delta = params.delta
    h = terms.h
    w = h * h - delta * terms.q_norm_sq
    if w <= 0.0:
        raise FeasibilityBoundaryError(
            "State lies on the feasibility boundary g=0", context={"w": w}
        )
    g = math.sqrt(w)
    A = (h / g - 1.0) / delta
    p_x, p_y, q_x, q_y = terms.p_x, terms.p_y, terms.q_x, terms.q_y
    t_theta = terms.t_theta

    dt_dqx = A * p_x - q_x / g
    dt_dqy = A * p_y - q_y / g

    R1, R2 = r_terms(state, theta, params)
    c, s = math.cos(theta), math.sin(theta)
    identity = R1 * c + R2 * s
    if abs(identity + 1.0) > R_IDENTITY_TOL:
        logger.warning("R identity off by %.3g at theta=%.9g", identity + 1.0, theta)

    dV_dvPx = (
        A * (q_x * (1.0 + R1 * c) + q_y * R1 * s)
        - dt_dqx * R1 * c * t_theta
        - dt_dqy * R1 * s * t_theta
    )
    dV_dvPy = (
        A * (q_x * R2 * c + q_y * (1.0 + R2 * s))
        - dt_dqx * R2 * c * t_theta
        - dt_dqy * R2 * s * t_theta
    )
    return ValueGradient(
        dV_dxP=dt_dqx,
        dV_dyP=dt_dqy,
        dV_dvPx=dV_dvPx,
        dV_dvPy=dV_dvPy,
        dV_dxE=-dt_dqx,
        dV_dyE=-dt_dqy,
    )


def value_gradient(
    state: GameState, sol: CaptureSolution, params: GameParams
) -> ValueGradient:
    """按阶段选择梯度公式"""
    if sol.phase is Phase.PRE_SATURATION:
        return gradient_phase1(state, sol, params)
    return gradient_phase2(state, sol, params)


def hji_residual(
    state: GameState, params: GameParams, config: Optional[SolverConfig] = None
) -> float:
    """HJI 方程左端在最优控制下的值，理论上恒为 0"""
    result = solve(state, params, config)
    grad = value_gradient(state, result.solution, params)
    cmd = result.command
    return (
        grad.dV_dxP * state.v_Px
        + grad.dV_dyP * state.v_Py
        + grad.dV_dxE * cmd.v_E * math.cos(cmd.theta_E)
        + grad.dV_dyE * cmd.v_E * math.sin(cmd.theta_E)
        + grad.dV_dvPx * cmd.a_P * math.cos(cmd.theta_P)
        + grad.dV_dvPy * cmd.a_P * math.sin(cmd.theta_P)
        + 1.0
    )


def finite_difference_gradient(
    state: GameState,
    params: GameParams,
    config: Optional[SolverConfig] = None,
    step: Optional[float] = None,
) -> ValueGradient:
    """对 t_f 做中心差分，每个扰动状态都重新求解

    步长默认按基准状态所处阶段取 fd_step_phase1 / fd_step_phase2。
    """
    cfg = resolve_config(config)
    if step is None:
        phase = solve(state, params, cfg).solution.phase
        pre = phase is Phase.PRE_SATURATION
        step = cfg.fd_step_phase1 if pre else cfg.fd_step_phase2
    if not step > 0:
        raise ValidationError(f"Finite-difference step must be positive, got {step}")

    partials = []
    for index in range(6):
        forward = solve(state.perturbed(index, step), params, cfg).solution.t_f
        backward = solve(state.perturbed(index, -step), params, cfg).solution.t_f
        partials.append((forward - backward) / (2.0 * step))
    return ValueGradient.from_sequence(partials)


def gradient_relative_error(analytic: ValueGradient, reference: ValueGradient) -> float:
    """逐分量相对误差的最大值

    分母取 max(|f_i|, 1e-6 + 1e-3·max|f|)，避免接近零的分量放大误差。
    """
    a, f = analytic.as_array(), reference.as_array()
    floor = 1e-6 + 1e-3 * float(np.max(np.abs(f)))
    return float(np.max(np.abs(a - f) / np.maximum(np.abs(f), floor)))


def unimodality_check(
    state: GameState, params: GameParams, config: Optional[SolverConfig] = None
) -> Tuple[float, float]:
    """网格扫描复核三分搜索

    网格极大点再用黄金分割在相邻两格内细化，与三分搜索结果比较。

    Returns:
        (角度差, 网格值超过三分搜索值的相对量)
    """
    cfg = resolve_config(config)
    theta, t_star, domain = optimal_heading(state, params, cfg)
    lo, hi = domain.unrolled()
    grid = np.linspace(lo, hi, cfg.whole_circle_grid)
    values = post_saturation_times(state, grid, params)
    index = int(np.nanargmax(values))
    objective = capture_time_function(state, params, saturated_only=True)
    refined = golden_section_max(
        objective,
        float(grid[max(index - 1, 0)]),
        float(grid[min(index + 1, len(grid) - 1)]),
        cfg.ternary_tol,
        cfg.ternary_max_iter,
    )
    angle = abs(angle_difference(refined, theta))
    excess = (max(objective(refined), float(values[index])) - t_star) / max(1.0, t_star)
    return angle, excess


# ---------------------------------------------------------------------------
# 切换面连续性
# ---------------------------------------------------------------------------


def speed_family(state: GameState, params: GameParams) -> StateFamily:
    """固定状态，仅改变 v̄P 的单参数族"""

    def member(v_P_max: float) -> Tuple[GameState, GameParams]:
        return state, params.model_copy(update={"v_P_max": v_P_max})

    return member


def _solve_member(family: StateFamily, s: float, cfg: SolverConfig) -> CaptureSolution:
    state, params = family(s)
    return solve(state, params, cfg).solution


def switch_continuity_check(
    family: StateFamily,
    lo: float,
    hi: float,
    config: Optional[SolverConfig] = None,
    gap: float = 1e-8,
) -> ContinuityReport:
    """二分定位族参数上的阶段切换点，比较两侧的 t_f 与 θ_P*

    Raises:
        NoCrossingError: 两端阶段相同
    """
    cfg = resolve_config(config)
    sol_lo = _solve_member(family, lo, cfg)
    sol_hi = _solve_member(family, hi, cfg)
    if sol_lo.phase is sol_hi.phase:
        raise NoCrossingError(
            f"Family stays in {sol_lo.phase.value} on [{lo}, {hi}]",
            context={"t_f_lo": sol_lo.t_f, "t_f_hi": sol_hi.t_f},
        )

    phase_lo = sol_lo.phase
    while hi - lo > gap:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        sol_mid = _solve_member(family, mid, cfg)
        if sol_mid.phase is phase_lo:
            lo, sol_lo = mid, sol_mid
        else:
            hi, sol_hi = mid, sol_mid

    if phase_lo is Phase.PRE_SATURATION:
        pre, post = sol_lo, sol_hi
    else:
        pre, post = sol_hi, sol_lo
    report = ContinuityReport(
        crossing=0.5 * (lo + hi),
        gap=hi - lo,
        t_f_pre=pre.t_f,
        t_f_post=post.t_f,
        theta_pre=pre.theta_P_star,
        theta_post=post.theta_P_star,
    )
    logger.info(
        "Switch located at %.12g: jump %.3g, theta gap %.3g",
        report.crossing,
        report.jump,
        report.theta_gap,
    )
    return report


# ---------------------------------------------------------------------------
# 验证套件
# ---------------------------------------------------------------------------


def check_state(item: Tuple[int, GameState, GameParams, SolverConfig]) -> StateCheck:
    """对单个状态运行残差、梯度与单峰性检查（进程池的工作函数）"""
    index, state, params, cfg = item
    sol = solve(state, params, cfg).solution
    analytic = value_gradient(state, sol, params)
    reference = finite_difference_gradient(state, params, cfg)
    monitor: Tuple[Optional[float], Optional[float]] = (None, None)
    if sol.phase is Phase.POST_SATURATION:
        monitor = unimodality_check(state, params, cfg)
    return StateCheck(
        index=index,
        state=state,
        params=params,
        phase=sol.phase,
        t_f=sol.t_f,
        residual=hji_residual(state, params, cfg),
        gradient_error=gradient_relative_error(analytic, reference),
        monitor_angle=monitor[0],
        monitor_excess=monitor[1],
    )


def run_verification(
    sweep_size: Optional[int] = None,
    seed: Optional[int] = None,
    config: Optional[SolverConfig] = None,
    workers: Optional[int] = None,
) -> VerificationReport:
    """每个阶段抽取 sweep_size 个良态样本并运行全部检查，外加切换面连续性"""
    cfg = resolve_config(config)
    n = sweep_size if sweep_size is not None else cfg.sweep_size
    seed = seed if seed is not None else cfg.seed
    workers = workers if workers is not None else cfg.workers

    scenarios = sampling.sample_states(Phase.PRE_SATURATION, n, seed, cfg)
    scenarios += sampling.sample_states(Phase.POST_SATURATION, n, seed, cfg)
    items = [(i, state, params, cfg) for i, (state, params) in enumerate(scenarios)]
    checks: List[StateCheck] = sampling.run_sweep(check_state, items, workers)

    preset = PRESETS["scenario1"]
    family = speed_family(
        GameState.from_sequence(preset["initial_state"]), GameParams(**preset["params"])
    )
    continuity = switch_continuity_check(family, 1.2, preset["params"]["v_P_max"], cfg)

    report = VerificationReport(seed=seed, checks=checks, continuity=continuity)
    for key in ("residual", "gradient_error"):
        worst = report.worst(key)
        if worst is not None:
            logger.info(
                "Worst %s %.3g at state %s (index %d)",
                key,
                getattr(worst, key),
                worst.state,
                worst.index,
            )
    if report.monitor_disagreements:
        logger.warning(
            "Grid and ternary argmax disagree on %d states",
            report.monitor_disagreements,
        )
    return report


def check_report(report: VerificationReport) -> VerificationReport:
    """任一检查超出容差时抛出 ToleranceError，附带最差状态

    Raises:
        ToleranceError: 报告未通过
    """
    failures = report.failures()
    if not failures:
        return report
    key = {"residual": "residual", "gradient": "gradient_error"}.get(failures[0])
    worst = report.worst(key) if key else None
    if worst is None and failures[0] == "unimodality":
        worst = report.worst("monitor_excess")
    for check in failures:
        logger.warning("Verification check '%s' outside tolerance", check)
    raise ToleranceError(
        f"Verification failed: {', '.join(failures)}",
        check=failures[0],
        worst_state=worst.state if worst else None,
        context={
            "max_residual": report.max_residual,
            "max_gradient_error": report.max_gradient_error,
        },
    )
