"""饱和后（阶段二）数值求解

追击者沿 θ_P 加速到 v̄P 后匀速滑行。给定 θ_P，捕获时间满足二次方程
Δt² + 2ht + |q|² = 0（Δ = v̄P² − v̄E²），取 t = (g − h)/Δ，g = sqrt(w)。
最优方向是可行弧上 t(θ_P) 的极大点：先按固定步长扫描 w 的变号，
二分得到弧的两个端点，再在弧上做三分搜索。
"""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..config import resolve_config
from ..exceptions import (
    InfeasibleHeadingError,
    UniformSignError,
    ValidationError,
    WrongPhaseError,
)
from ..models import (
    CaptureSolution,
    FeasibleDomain,
    GameParams,
    GameState,
    Phase,
    Point,
    PQTerms,
    SolverConfig,
    StrategyCommand,
)
from ..utils.angles import TWO_PI, angle_difference, heading_to, normalize_angle
from .phase1 import saturation_time
from .poly_roots import bisect, golden_section_max, ternary_search_max

logger = logging.getLogger(__name__)

# 扫描起点恰好落在零点上时的偏移量
ANCHOR_SHIFT = math.pi / 1000
# 弧端点二分的角度容差
_ENDPOINT_TOL = 1e-13
# 扫描时每块的网格点数
_CHUNK = 200_000
# 饱和后公式只在 t ≥ t_θ 时成立，比较时的相对余量
SEAM_SLACK = 1e-9
# 单峰性监视：网格值超过三分搜索值的报警阈值（相对）
MONITOR_VALUE_TOL = 1e-6
MONITOR_ANGLE_TOL = 1e-4


def _require_capture_precondition(params: GameParams) -> float:
    delta = params.delta
    if delta <= 0:
        raise ValidationError(
            "Invalid params: v_P_max must exceed v_E_max", field="v_P_max"
        )
    return delta


def pq_terms(state: GameState, theta_P: float, params: GameParams) -> PQTerms:
    """给定方向下的 p = v⁰ + āP u t_θ 与 q = x_P − x_E − ½āP u t_θ²"""
    t_theta = saturation_time(state, theta_P, params)
    c, s = math.cos(theta_P), math.sin(theta_P)
    a = params.a_P_max
    return PQTerms(
        p_x=state.v_Px + a * c * t_theta,
        p_y=state.v_Py + a * s * t_theta,
        q_x=state.x_P - state.x_E - 0.5 * a * c * t_theta * t_theta,
        q_y=state.y_P - state.y_E - 0.5 * a * s * t_theta * t_theta,
        t_theta=t_theta,
    )


def w_feasibility(state: GameState, theta_P: float, params: GameParams) -> float:
    """w = h² − (v̄P² − v̄E²)|q|²，二次方程有实根当且仅当 w ≥ 0"""
    terms = pq_terms(state, theta_P, params)
    return terms.h**2 - params.delta * terms.q_norm_sq


def _pq_arrays(
    state: GameState, thetas: np.ndarray, params: GameParams
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """向量化计算 (h, |q|², t_θ)"""
    c, s = np.cos(thetas), np.sin(thetas)
    a = params.a_P_max
    cross = state.v_Px * s - state.v_Py * c
    along = state.v_Px * c + state.v_Py * s
    disc = np.maximum(params.v_P_max**2 - cross * cross, 0.0)
    t_theta = np.maximum((np.sqrt(disc) - along) / a, 0.0)
    p_x = state.v_Px + a * c * t_theta
    p_y = state.v_Py + a * s * t_theta
    half = 0.5 * a * t_theta * t_theta
    q_x = state.x_P - state.x_E - c * half
    q_y = state.y_P - state.y_E - s * half
    return p_x * q_x + p_y * q_y, q_x * q_x + q_y * q_y, t_theta


def signed_feasibility(
    state: GameState, thetas: np.ndarray, params: GameParams
) -> np.ndarray:
    """带符号可行性：h < 0 时为 w，否则为 −|w|

    正值恰好对应存在正捕获时间的方向；在 h = 0 处连续。
    """
    h, q_sq, _ = _pq_arrays(state, thetas, params)
    w = h * h - params.delta * q_sq
    return np.where(h < 0.0, w, -np.abs(w))


def capture_time_array(
    state: GameState, thetas: np.ndarray, params: GameParams
) -> np.ndarray:
    """向量化捕获时间，w 截断到非负；不可行方向为 NaN"""
    h, q_sq, _ = _pq_arrays(state, thetas, params)
    w = h * h - params.delta * q_sq
    t = (np.sqrt(np.maximum(w, 0.0)) - h) / params.delta
    return np.where(h < 0.0, t, np.nan)


def post_saturation_times(
    state: GameState, thetas: np.ndarray, params: GameParams
) -> np.ndarray:
    """同 capture_time_array，但 t < t_θ 的方向也记为 NaN

    这些方向的根在追击者饱和之前就到达，滑行公式对它们不成立。
    """
    h, q_sq, t_theta = _pq_arrays(state, thetas, params)
    w = h * h - params.delta * q_sq
    t = (np.sqrt(np.maximum(w, 0.0)) - h) / params.delta
    valid = (h < 0.0) & (t >= t_theta - SEAM_SLACK * (1.0 + t))
    return np.where(valid, t, np.nan)


def _feasibility_scalar(state: GameState, theta: float, params: GameParams) -> float:
    return float(signed_feasibility(state, np.array([theta]), params)[0])


def capture_time_function(
    state: GameState, params: GameParams, saturated_only: bool = False
) -> Callable[[float], float]:
    """三分搜索目标 t(θ)，纯 Python 实现以降低单点调用开销

    saturated_only=True 时，t < t_θ 的方向返回 −inf。
    """
    a, vmax, delta = params.a_P_max, params.v_P_max, params.delta
    v_x, v_y = state.v_Px, state.v_Py
    d_x, d_y = state.x_P - state.x_E, state.y_P - state.y_E

    def t_of(theta: float) -> float:
        c, s = math.cos(theta), math.sin(theta)
        cross = v_x * s - v_y * c
        along = v_x * c + v_y * s
        root = math.sqrt(max(vmax * vmax - cross * cross, 0.0))
        t_theta = max((root - along) / a, 0.0)
        half = 0.5 * a * t_theta * t_theta
        q_x, q_y = d_x - c * half, d_y - s * half
        h = (v_x + a * c * t_theta) * q_x + (v_y + a * s * t_theta) * q_y
        w = h * h - delta * (q_x * q_x + q_y * q_y)
        t = (math.sqrt(max(w, 0.0)) - h) / delta
        if saturated_only and t < t_theta - SEAM_SLACK * (1.0 + t):
            return -math.inf
        return t

    return t_of


def capture_time_given_heading(
    state: GameState, theta_P: float, params: GameParams
) -> float:
    """给定加速度方向下的饱和后捕获时间 t = (g − h)/Δ

    Raises:
        InfeasibleHeadingError: w < 0 或所得 t 不为正
        ValidationError: v̄P ≤ v̄E
    """
    delta = _require_capture_precondition(params)
    terms = pq_terms(state, theta_P, params)
    q_sq = terms.q_norm_sq
    if q_sq == 0.0:
        return 0.0
    h = terms.h
    w = h * h - delta * q_sq
    if w < 0.0:
        raise InfeasibleHeadingError(
            "No real capture time for heading", theta_P=theta_P, context={"w": w}
        )
    t = (math.sqrt(w) - h) / delta
    if t <= 0.0:
        raise InfeasibleHeadingError(
            "Capture time for heading is not positive",
            theta_P=theta_P,
            context={"t": t},
        )
    return t


def _scan_sign_changes(
    state: GameState, params: GameParams, anchor: float, step: float
) -> List[Tuple[float, float]]:
    """从 anchor 出发按 step 扫描整圈，返回所有变号区间"""
    n = int(math.ceil(TWO_PI / step))
    brackets: List[Tuple[float, float]] = []
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        grid = anchor + step * np.arange(start, stop + 1, dtype=float)
        if stop == n:
            grid[-1] = anchor + TWO_PI
        positive = signed_feasibility(state, grid, params) > 0
        for k in np.nonzero(positive[:-1] != positive[1:])[0]:
            brackets.append((float(grid[k]), float(grid[k + 1])))
    return brackets


def _locate_arcs(
    state: GameState, params: GameParams, brackets: List[Tuple[float, float]]
) -> List[Tuple[float, float]]:
    """二分每个变号区间得到零点，并配对成 (入口, 出口) 可行弧"""

    def f(theta: float) -> float:
        return _feasibility_scalar(state, theta, params)

    zeros: List[Tuple[float, bool]] = []
    for lo, hi in brackets:
        entering = f(lo) <= 0.0
        zeros.append((bisect(f, lo, hi, _ENDPOINT_TOL), entering))

    if not zeros[0][1]:
        # 起点位于可行弧内：第一个零点是出口，绕一圈后与最后一个入口配对
        first_exit = zeros.pop(0)
        zeros.append((first_exit[0] + TWO_PI, False))

    return [(zeros[i][0], zeros[i + 1][0]) for i in range(0, len(zeros) - 1, 2)]


def bracket_feasible_domain(
    state: GameState,
    params: GameParams,
    config: Optional[SolverConfig] = None,
    allow_whole_circle: bool = True,
) -> FeasibleDomain:
    """确定可行方向弧 [θ_P1, θ_P2]

    从 θ=0 以 bracket_step 扫描 w 的变号，找不到时步长缩小 10 倍重扫，
    最多 bracket_reductions 次；再用二分求出两个零点。

    Raises:
        UniformSignError: 扫描始终不变号。处处为负时总是抛出；
            处处为正时仅在 allow_whole_circle=False 时抛出，否则返回整圆
    """
    cfg = resolve_config(config)
    _require_capture_precondition(params)

    anchor = 0.0
    h, q_sq, _ = _pq_arrays(state, np.array([anchor]), params)
    scale = max(float(h[0] ** 2), params.delta * float(q_sq[0]), 1e-300)
    anchor_value = _feasibility_scalar(state, anchor, params)
    if abs(anchor_value) <= 1e-12 * scale:
        anchor = ANCHOR_SHIFT
        anchor_value = _feasibility_scalar(state, anchor, params)
        logger.info("Scan anchor lies on a zero of w; shifted to %.6g", anchor)

    step = cfg.bracket_step
    for reduction in range(cfg.bracket_reductions + 1):
        brackets = _scan_sign_changes(state, params, anchor, step)
        if brackets:
            break
        logger.debug("No sign change of w at step %.3g (%d)", step, reduction)
        step /= 10.0
    else:
        everywhere_positive = anchor_value > 0.0
        if everywhere_positive and allow_whole_circle:
            logger.debug("w positive on the whole circle")
            return FeasibleDomain(
                theta_lo=0.0, theta_hi=TWO_PI, wraps=False, whole_circle=True
            )
        raise UniformSignError(
            "Feasibility function w does not change sign",
            everywhere_positive=everywhere_positive,
            context={"state": str(state)},
        )

    arcs = _locate_arcs(state, params, brackets)
    if len(arcs) > 1:
        logger.warning("Found %d feasible arcs, keeping the largest t", len(arcs))
        best = max(arcs, key=lambda arc: _arc_peak(state, params, arc))
    else:
        best = arcs[0]

    lo, hi = normalize_angle(best[0]), normalize_angle(best[1])
    return FeasibleDomain(theta_lo=lo, theta_hi=hi, wraps=lo > hi)


def _arc_peak(state: GameState, params: GameParams, arc: Tuple[float, float]) -> float:
    samples = np.linspace(arc[0], arc[1], 257)
    values = post_saturation_times(state, samples, params)
    return float(np.nanmax(values)) if np.any(np.isfinite(values)) else -math.inf


def _monitor_unimodality(
    state: GameState,
    params: GameParams,
    bounds: Tuple[float, float],
    theta_star: float,
    t_star: float,
    grid_size: int,
) -> None:
    """用网格扫描复核三分搜索结果"""
    grid = np.linspace(bounds[0], bounds[1], grid_size)
    values = post_saturation_times(state, grid, params)
    if not np.any(np.isfinite(values)):
        return
    index = int(np.nanargmax(values))
    grid_best = float(values[index])
    if grid_best > t_star + MONITOR_VALUE_TOL * max(1.0, t_star):
        logger.warning(
            "Ternary search missed the maximum: grid t=%.12g at %.9g, "
            "ternary t=%.12g at %.9g (state %s)",
            grid_best,
            grid[index],
            t_star,
            theta_star,
            state,
        )
    elif abs(angle_difference(float(grid[index]), theta_star)) > MONITOR_ANGLE_TOL:
        logger.debug(
            "Grid and ternary argmax differ by %.3g rad with equal values",
            abs(angle_difference(float(grid[index]), theta_star)),
        )


def _grid_refined_max(
    state: GameState,
    params: GameParams,
    bounds: Tuple[float, float],
    config: SolverConfig,
) -> float:
    """网格上找 t ≥ t_θ 的最大值，再用黄金分割在相邻格点间细化

    Raises:
        WrongPhaseError: 区间内没有饱和后才捕获的方向
    """
    n = config.whole_circle_grid
    grid = np.linspace(bounds[0], bounds[1], n + 1)
    values = post_saturation_times(state, grid, params)
    if not np.any(np.isfinite(values)):
        raise WrongPhaseError(
            "No heading captures after saturation",
            context={"bounds": bounds, "state": str(state)},
        )
    index = int(np.nanargmax(values))
    best = float(grid[index])
    lo = float(grid[max(index - 1, 0)])
    hi = float(grid[min(index + 1, n)])
    objective = capture_time_function(state, params, saturated_only=True)
    theta = golden_section_max(
        objective, lo, hi, config.ternary_tol, config.ternary_max_iter
    )
    return theta if objective(theta) >= objective(best) else best


def optimal_heading(
    state: GameState, params: GameParams, config: Optional[SolverConfig] = None
) -> Tuple[float, float, FeasibleDomain]:
    """在可行弧上最大化 t(θ_P)

    Returns:
        (θ_P*, t_f, 可行域)
    """
    cfg = resolve_config(config)
    domain = bracket_feasible_domain(state, params, cfg)
    objective = capture_time_function(state, params)

    if domain.whole_circle:
        bounds = (0.0, TWO_PI)
        theta = _grid_refined_max(state, params, bounds, cfg)
    else:
        bounds = domain.unrolled()
        theta = ternary_search_max(
            objective, bounds[0], bounds[1], cfg.ternary_tol, cfg.ternary_max_iter
        )
        t_star = objective(theta)
        if saturation_time(state, theta, params) > t_star + SEAM_SLACK * (1.0 + t_star):
            logger.debug(
                "Ternary optimum %.9g lies before saturation, refining on a grid",
                theta,
            )
            theta = _grid_refined_max(state, params, bounds, cfg)

    t_f = objective(theta)
    _monitor_unimodality(state, params, bounds, theta, t_f, cfg.whole_circle_grid)
    return normalize_angle(theta), t_f, domain


def capture_point_post_saturation(
    state: GameState, theta_P: float, t_f: float, params: GameParams
) -> Point:
    """x_f = x_P + v_Px t_f + ½āP cosθ (2 t_f t_θ − t_θ²)"""
    t_theta = saturation_time(state, theta_P, params)
    k = 0.5 * params.a_P_max * (2.0 * t_f * t_theta - t_theta * t_theta)
    return (
        state.x_P + state.v_Px * t_f + k * math.cos(theta_P),
        state.y_P + state.v_Py * t_f + k * math.sin(theta_P),
    )


def solve_phase2(
    state: GameState, params: GameParams, config: Optional[SolverConfig] = None
) -> CaptureSolution:
    """饱和后最优解

    Raises:
        UniformSignError: w 处处为负
        WrongPhaseError: 极大点对应的捕获发生在饱和之前
    """
    _require_capture_precondition(params)
    theta, t_f, _ = optimal_heading(state, params, config)
    t_theta = saturation_time(state, theta, params)
    if t_f < t_theta - 1e-9 * (1.0 + t_f):
        raise WrongPhaseError(
            "Post-saturation optimum is reached before saturation",
            context={"t_f": t_f, "t_theta": t_theta},
        )
    point = capture_point_post_saturation(state, theta, t_f, params)
    return CaptureSolution(
        t_f=t_f,
        capture_point=point,
        theta_P_star=theta,
        theta_E_star=heading_to(state.x_E, state.y_E, point[0], point[1]),
        phase=Phase.POST_SATURATION,
        t_theta_star=t_theta,
    )


def phase2_command(
    state: GameState,
    solution: CaptureSolution,
    params: GameParams,
    config: Optional[SolverConfig] = None,
) -> StrategyCommand:
    """阶段二瞬时控制：未饱和时 a_P = āP，饱和后 a_P = 0"""
    cfg = resolve_config(config)
    threshold = cfg.tol_speed * params.v_P_max / params.a_P_max
    accelerating = solution.t_theta_star > threshold
    return StrategyCommand(
        a_P=params.a_P_max if accelerating else 0.0,
        theta_P=solution.theta_P_star,
        v_E=params.v_E_max,
        theta_E=solution.theta_E_star,
    )


# ---------------------------------------------------------------------------
# 饱和后可达集
# ---------------------------------------------------------------------------


def reachable_point_pre_saturation(
    state: GameState, theta_P: float, t: float, params: GameParams
) -> Point:
    """C_P(t) 边界上沿 θ_P 的点"""
    r = 0.5 * params.a_P_max * t * t
    return (
        state.x_P + state.v_Px * t + r * math.cos(theta_P),
        state.y_P + state.v_Py * t + r * math.sin(theta_P),
    )


def reachable_point_post_saturation(
    state: GameState, theta_P: float, t: float, params: GameParams
) -> Point:
    """沿 θ_P 加速至饱和后匀速滑行，t 时刻到达的位置

    Raises:
        WrongPhaseError: t < t_θ(θ_P)
    """
    t_theta = saturation_time(state, theta_P, params)
    if t < t_theta - 1e-12 * max(1.0, t_theta):
        raise WrongPhaseError(
            f"Time {t} precedes saturation time {t_theta}",
            context={"theta_P": theta_P},
        )
    k = 0.5 * params.a_P_max * (2.0 * t * t_theta - t_theta * t_theta)
    return (
        state.x_P + state.v_Px * t + k * math.cos(theta_P),
        state.y_P + state.v_Py * t + k * math.sin(theta_P),
    )


def reachable_set_boundary(
    state: GameState, t: float, params: GameParams, n: int = 720
) -> np.ndarray:
    """t 时刻各方向可达点，饱和前用圆，饱和后用滑行公式，返回 (n, 3) 数组 [θ, x, y]"""
    if t < 0:
        raise ValidationError(f"Time must be non-negative, got {t}", field="t")
    if n <= 0:
        raise ValidationError(f"Sample count must be positive, got {n}", field="n")
    thetas = np.linspace(0.0, TWO_PI, n, endpoint=False)
    _, _, t_theta = _pq_arrays(state, thetas, params)
    c, s = np.cos(thetas), np.sin(thetas)
    a = params.a_P_max
    tau = np.minimum(t_theta, t)
    # τ = min(t, t_θ)：t ≤ t_θ 时退化为 ½āP t²
    k = 0.5 * a * (2.0 * t * tau - tau * tau)
    x = state.x_P + state.v_Px * t + k * c
    y = state.y_P + state.v_Py * t + k * s
    return np.column_stack([thetas, x, y])


def oval_center(state: GameState, params: GameParams) -> Point:
    """c_P′ = x_P + v̄P v⁰ / āP"""
    factor = params.v_P_max / params.a_P_max
    return (state.x_P + factor * state.v_Px, state.y_P + factor * state.v_Py)


def min_semi_axis(state: GameState, t: float, params: GameParams) -> float:
    """d_Pmin = v̄P t − (|v⁰|² + v̄P²)/(2āP)"""
    speed_sq = state.v_Px**2 + state.v_Py**2
    return params.v_P_max * t - (speed_sq + params.v_P_max**2) / (2.0 * params.a_P_max)
