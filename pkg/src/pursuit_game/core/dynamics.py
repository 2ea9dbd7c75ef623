"""双方动力学与终端条件

追击者为带速度饱和的双积分器，逃逸者为单积分器。
控制量在一步内保持不变，按半隐式欧拉推进：先更新速度（超速时投影），
再用新速度更新位置。
"""

import math
from typing import Optional

from ..exceptions import InvalidStateError, ValidationError
from ..models import GameParams, GameState, StrategyCommand
from ..utils.angles import unit_vector


def validate_state(state: GameState, params: Optional[GameParams] = None) -> GameState:
    """检查状态有限，且（给定参数时）追击者速度不超过上限

    Raises:
        InvalidStateError: 非有限值或速度超限
    """
    if not state.is_finite():
        raise InvalidStateError(f"State contains non-finite values: {state}")
    if params is not None and state.speed_P > params.speed_limit:
        raise InvalidStateError(
            "Infeasible state: pursuer speed exceeds v_P_max",
            context={"speed": state.speed_P, "v_P_max": params.v_P_max},
        )
    return state


def _check_step(dt: float, cmd: StrategyCommand) -> None:
    if not math.isfinite(dt):
        raise InvalidStateError(f"Non-finite time step: {dt}")
    if dt <= 0:
        raise ValidationError(f"Time step must be positive, got {dt}", field="dt")
    if not all(math.isfinite(v) for v in (cmd.a_P, cmd.v_E)):
        raise InvalidStateError(f"Command contains non-finite values: {cmd}")


def step_pursuer(
    state: GameState, cmd: StrategyCommand, dt: float, params: GameParams
) -> GameState:
    """追击者前进一步，超速时把新速度向量径向投影回 v̄P

    Args:
        state: 当前状态
        cmd: 控制量（只使用 a_P 与 theta_P）
        dt: 步长
        params: 博弈参数

    Returns:
        新状态，逃逸者字段不变
    """
    validate_state(state)
    _check_step(dt, cmd)
    if cmd.a_P > params.a_P_max * (1.0 + 1e-12):
        raise ValidationError(
            f"Acceleration {cmd.a_P} exceeds a_P_max {params.a_P_max}", field="a_P"
        )

    u_x, u_y = unit_vector(cmd.theta_P)
    v_x = state.v_Px + cmd.a_P * u_x * dt
    v_y = state.v_Py + cmd.a_P * u_y * dt
    speed = math.hypot(v_x, v_y)
    if speed > params.v_P_max:
        scale = params.v_P_max / speed
        v_x *= scale
        v_y *= scale

    return state.model_copy(
        update={
            "x_P": state.x_P + v_x * dt,
            "y_P": state.y_P + v_y * dt,
            "v_Px": v_x,
            "v_Py": v_y,
        }
    )


def step_evader(state: GameState, cmd: StrategyCommand, dt: float) -> GameState:
    """逃逸者前进一步"""
    validate_state(state)
    _check_step(dt, cmd)
    u_x, u_y = unit_vector(cmd.theta_E)
    return state.model_copy(
        update={
            "x_E": state.x_E + cmd.v_E * u_x * dt,
            "y_E": state.y_E + cmd.v_E * u_y * dt,
        }
    )


def step(
    state: GameState, cmd: StrategyCommand, dt: float, params: GameParams
) -> GameState:
    """双方同时前进一步"""
    return step_evader(step_pursuer(state, cmd, dt, params), cmd, dt)


def psi(state: GameState) -> float:
    """Ψ(x) = (x_P − x_E)² + (y_P − y_E)²"""
    return state.psi


def is_captured(state: GameState, capture_radius: float) -> bool:
    """Ψ ≤ r² 即视为捕获（边界包含在内）"""
    if capture_radius < 0:
        raise ValidationError(
            f"capture_radius must be non-negative, got {capture_radius}",
            field="capture_radius",
        )
    return state.psi <= capture_radius**2


def segment_closest_distance(before: GameState, after: GameState) -> float:
    """一步内相对位置线性插值时的最近距离"""
    r0x, r0y = before.x_P - before.x_E, before.y_P - before.y_E
    r1x, r1y = after.x_P - after.x_E, after.y_P - after.y_E
    dx, dy = r1x - r0x, r1y - r0y
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return math.hypot(r0x, r0y)
    s = min(max(-(r0x * dx + r0y * dy) / length_sq, 0.0), 1.0)
    return math.hypot(r0x + s * dx, r0y + s * dy)
