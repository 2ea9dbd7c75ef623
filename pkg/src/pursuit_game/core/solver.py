"""策略求解调度

按升序检查候选捕获时间 T：第一个满足 t_f ≤ t_θ(θ_P*) 的候选给出饱和前解；
T 用尽则转入饱和后求解。
"""

import logging
import math
from typing import List, Optional, Tuple

from ..config import resolve_config
from ..exceptions import DegenerateTangencyError, ValidationError
from ..models import (
    CaptureSolution,
    GameParams,
    GameState,
    Phase,
    Point,
    SolverConfig,
    SolverResult,
    StrategyCommand,
)
from .dynamics import validate_state
from .phase1 import (
    candidate_capture_times,
    phase1_strategy,
    saturation_time,
    tangency_point,
)
from .phase2 import phase2_command, solve_phase2

logger = logging.getLogger(__name__)

# Ψ 不超过该值即视为初始已捕获
TERMINAL_PSI = 1e-24


def check_params(params: GameParams) -> GameParams:
    """捕获保证的前提 v̄P > v̄E（绕过校验构造的参数也要拦住）"""
    if params.v_P_max <= params.v_E_max:
        raise ValidationError(
            "Invalid params: v_P_max must exceed v_E_max",
            field="v_P_max",
            context={"v_P_max": params.v_P_max, "v_E_max": params.v_E_max},
        )
    return params


def _immediate(state: GameState, params: GameParams) -> SolverResult:
    solution = CaptureSolution(
        t_f=0.0,
        capture_point=state.position_P,
        theta_P_star=0.0,
        theta_E_star=0.0,
        phase=Phase.PRE_SATURATION,
        t_theta_star=saturation_time(state, 0.0, params),
    )
    return SolverResult(command=StrategyCommand.idle(), solution=solution)


def solve(
    state: GameState,
    params: GameParams,
    config: Optional[SolverConfig] = None,
) -> SolverResult:
    """求解当前状态下双方的最优策略

    Args:
        state: 当前状态
        params: 博弈参数
        config: 求解配置

    Returns:
        SolverResult，command 为当前时刻的最优控制

    Raises:
        ValidationError: v̄P ≤ v̄E
        InvalidStateError: 状态非法
        SolverError: 下游求解失败
    """
    cfg = resolve_config(config)
    check_params(params)
    validate_state(state, params)

    if state.psi <= TERMINAL_PSI:
        return _immediate(state, params)

    examined: List[Tuple[float, float]] = []
    for t in candidate_capture_times(state, params, cfg):
        try:
            command, theta = phase1_strategy(state, t, params, cfg)
        except DegenerateTangencyError as e:
            logger.debug("Skipping degenerate candidate t=%.12g: %s", t, e)
            continue
        t_theta = saturation_time(state, theta, params)
        examined.append((t, t_theta))
        if t <= t_theta:
            point = tangency_point(state, t, params, cfg)
            solution = CaptureSolution(
                t_f=t,
                capture_point=point,
                theta_P_star=theta,
                theta_E_star=theta,
                phase=Phase.PRE_SATURATION,
                t_theta_star=t_theta,
            )
            return SolverResult(
                command=command, solution=solution, candidates_examined=examined
            )
        logger.debug("Rejected candidate t=%.12g (t_theta=%.12g)", t, t_theta)

    solution = solve_phase2(state, params, cfg)
    return SolverResult(
        command=phase2_command(state, solution, params, cfg),
        solution=solution,
        candidates_examined=examined,
    )


class OpenLoopPlan:
    """t=0 求得的开环最优计划

    追击者沿 θ_P* 以 āP 加速直到饱和（饱和后滑行），逃逸者以 v̄E 沿 θ_E* 直行。
    """

    def __init__(self, state: GameState, params: GameParams, result: SolverResult):
        self.state = state
        self.params = params
        self.result = result
        sol = result.solution
        self.t_f = sol.t_f
        self.theta_P = sol.theta_P_star
        self.theta_E = sol.theta_E_star
        self.v_E = result.command.v_E
        if sol.phase is Phase.PRE_SATURATION:
            # 饱和前解在 [0, t_f] 内始终加速
            self.t_switch = math.inf if sol.t_f > 0 else 0.0
        else:
            self.t_switch = sol.t_theta_star

    @classmethod
    def solve(
        cls,
        state: GameState,
        params: GameParams,
        config: Optional[SolverConfig] = None,
    ) -> "OpenLoopPlan":
        return cls(state, params, solve(state, params, config))

    def _accel_time(self, tau: float) -> float:
        return min(max(tau, 0.0), self.t_switch)

    def pursuer_position(self, tau: float) -> Point:
        s = self._accel_time(tau)
        k = 0.5 * self.params.a_P_max * (2.0 * tau * s - s * s)
        return (
            self.state.x_P + self.state.v_Px * tau + k * math.cos(self.theta_P),
            self.state.y_P + self.state.v_Py * tau + k * math.sin(self.theta_P),
        )

    def pursuer_velocity(self, tau: float) -> Point:
        s = self._accel_time(tau) * self.params.a_P_max
        return (
            self.state.v_Px + s * math.cos(self.theta_P),
            self.state.v_Py + s * math.sin(self.theta_P),
        )

    def evader_position(self, tau: float) -> Point:
        return (
            self.state.x_E + self.v_E * tau * math.cos(self.theta_E),
            self.state.y_E + self.v_E * tau * math.sin(self.theta_E),
        )

    def command_at(self, tau: float) -> StrategyCommand:
        """τ 时刻的计划控制量（bang-off）"""
        a_P = self.params.a_P_max if tau < self.t_switch and self.t_f > 0 else 0.0
        return StrategyCommand(
            a_P=a_P, theta_P=self.theta_P, v_E=self.v_E, theta_E=self.theta_E
        )

    def miss_distance(self) -> float:
        """t_f 时刻双方计划位置的距离（理论上为 0）"""
        p, e = self.pursuer_position(self.t_f), self.evader_position(self.t_f)
        return math.hypot(p[0] - e[0], p[1] - e[1])
