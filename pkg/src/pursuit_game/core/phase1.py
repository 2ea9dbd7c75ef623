"""饱和前（阶段一）几何求解

追击者以最大加速度沿固定方向加速时，t 时刻可达区域是圆 C_P(t)；
逃逸者的可达区域是圆 C_E(t)。C_E 内切于 C_P 的时刻由四次方程 Γ(t)=0 给出，
切点即捕获点，双方沿同一方向运动。
"""

import logging
import math
from typing import List, Optional, Tuple

from ..config import resolve_config
from ..exceptions import DegenerateTangencyError, InvalidStateError, ValidationError
from ..models import (
    GameParams,
    GameState,
    Point,
    PolyCoeffs,
    ReachabilityCircles,
    SolverConfig,
    StrategyCommand,
)
from ..utils.angles import normalize_angle
from .poly_roots import real_roots

logger = logging.getLogger(__name__)


def _check_speed(state: GameState, params: GameParams) -> None:
    if state.speed_P > params.speed_limit:
        raise InvalidStateError(
            "Infeasible state: pursuer speed exceeds v_P_max",
            context={"speed": state.speed_P, "v_P_max": params.v_P_max},
        )


def saturation_time(state: GameState, theta_P: float, params: GameParams) -> float:
    """沿 θ_P 以最大加速度加速到 v̄P 所需时间 t_θ(θ_P)

    Raises:
        InvalidStateError: 当前速度已超过 v̄P
    """
    _check_speed(state, params)
    c, s = math.cos(theta_P), math.sin(theta_P)
    cross = state.v_Px * s - state.v_Py * c
    along = state.v_Px * c + state.v_Py * s
    # 容差范围内 cross² 可能略大于 v̄P²
    disc = max(params.v_P_max**2 - cross * cross, 0.0)
    return max((math.sqrt(disc) - along) / params.a_P_max, 0.0)


def saturation_time_bounds(
    state: GameState, params: GameParams
) -> Tuple[float, float]:
    """t_θ 在所有方向上的取值范围 ((v̄P−|v|)/āP, (v̄P+|v|)/āP)"""
    _check_speed(state, params)
    speed = min(state.speed_P, params.v_P_max)
    return (
        (params.v_P_max - speed) / params.a_P_max,
        (params.v_P_max + speed) / params.a_P_max,
    )


def reachability_circles(
    state: GameState, t: float, params: GameParams
) -> ReachabilityCircles:
    """t 时刻的可达圆 C_P(t)、C_E(t)"""
    if t < 0:
        raise ValidationError(f"Time must be non-negative, got {t}", field="t")
    return ReachabilityCircles(
        c_P=(state.x_P + state.v_Px * t, state.y_P + state.v_Py * t),
        R_P=0.5 * params.a_P_max * t * t,
        c_E=(state.x_E, state.y_E),
        R_E=params.v_E_max * t,
        t=t,
    )


def gamma_quartic_coeffs(state: GameState, params: GameParams) -> PolyCoeffs:
    """Γ(t) = |d + v t|² − (½āP t² − v̄E t)² 展开后的系数（最高次在前）"""
    a, ve = params.a_P_max, params.v_E_max
    d_x, d_y = state.x_P - state.x_E, state.y_P - state.y_E
    v_x, v_y = state.v_Px, state.v_Py
    return PolyCoeffs(
        coefficients=(
            -0.25 * a * a,
            a * ve,
            v_x * v_x + v_y * v_y - ve * ve,
            2.0 * (d_x * v_x + d_y * v_y),
            d_x * d_x + d_y * d_y,
        )
    )


def gamma_value(state: GameState, t: float, params: GameParams) -> float:
    """直接（不展开）计算 Γ(t)"""
    d_x = state.x_P - state.x_E + state.v_Px * t
    d_y = state.y_P - state.y_E + state.v_Py * t
    radius_gap = 0.5 * params.a_P_max * t * t - params.v_E_max * t
    return d_x * d_x + d_y * d_y - radius_gap * radius_gap


def candidate_capture_times(
    state: GameState,
    params: GameParams,
    config: Optional[SolverConfig] = None,
) -> List[float]:
    """候选捕获时间集合 T（升序）

    只保留 t ≥ 2v̄E/āP − tol 的正根。
    """
    cfg = resolve_config(config)
    roots = real_roots(gamma_quartic_coeffs(state, params), cfg)
    threshold = params.inner_time - cfg.tol_candidate

    outer = [t for t in roots if t > 0.0 and t >= threshold]
    rejected = [t for t in roots if t <= 0.0 or t < threshold]
    if rejected:
        logger.debug("Filtered roots below 2vE/aP: %s", rejected)
    return outer


def _radius_gap(t: float, params: GameParams) -> float:
    """R_E(t) − R_P(t)"""
    return params.v_E_max * t - 0.5 * params.a_P_max * t * t


def _check_tangency(t: float, params: GameParams, cfg: SolverConfig) -> float:
    """返回 R_E − R_P，并拒绝两圆半径近似相等的退化情形"""
    if t <= 0:
        raise DegenerateTangencyError(f"Capture time must be positive, got {t}")
    if t <= params.inner_time + cfg.tol_candidate:
        raise DegenerateTangencyError(
            f"Capture time {t} is not beyond 2vE/aP = {params.inner_time}"
        )
    gap = _radius_gap(t, params)
    scale = max(0.5 * params.a_P_max * t * t, params.v_E_max * t)
    if abs(gap) <= cfg.tol_candidate * max(scale, 1.0):
        raise DegenerateTangencyError(
            f"Reachability radii coincide at t={t}", context={"gap": gap}
        )
    return gap


def tangency_point(
    state: GameState,
    t: float,
    params: GameParams,
    config: Optional[SolverConfig] = None,
) -> Point:
    """C_E(t) 与 C_P(t) 的切点 (x_f, y_f)

    Raises:
        DegenerateTangencyError: t ≤ 2v̄E/āP，分母趋于零
    """
    cfg = resolve_config(config)
    _check_tangency(t, params, cfg)
    a_t2 = params.a_P_max * t * t
    ve_2t = 2.0 * params.v_E_max * t
    denominator = a_t2 - ve_2t
    x_f = (a_t2 * state.x_E - ve_2t * (state.x_P + state.v_Px * t)) / denominator
    y_f = (a_t2 * state.y_E - ve_2t * (state.y_P + state.v_Py * t)) / denominator
    return (x_f, y_f)


def heading_components(
    state: GameState,
    t_f: float,
    params: GameParams,
    config: Optional[SolverConfig] = None,
) -> Tuple[float, float]:
    """最优方向的 (cos θ*, sin θ*)，未归一化"""
    cfg = resolve_config(config)
    gap = _check_tangency(t_f, params, cfg)
    cos_t = (state.x_P + state.v_Px * t_f - state.x_E) / gap
    sin_t = (state.y_P + state.v_Py * t_f - state.y_E) / gap
    return (cos_t, sin_t)


def phase1_strategy(
    state: GameState,
    t_f: float,
    params: GameParams,
    config: Optional[SolverConfig] = None,
) -> Tuple[StrategyCommand, float]:
    """阶段一最优策略：a_P = āP，v_E = v̄E，θ_P* = θ_E*

    Returns:
        (控制量, θ_P*)
    """
    cos_t, sin_t = heading_components(state, t_f, params, config)
    theta = normalize_angle(math.atan2(sin_t, cos_t))
    command = StrategyCommand(
        a_P=params.a_P_max, theta_P=theta, v_E=params.v_E_max, theta_E=theta
    )
    return command, theta
