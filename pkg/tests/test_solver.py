"""测试策略求解调度与开环计划"""

import math

import pytest

from pursuit_game.core.phase1 import saturation_time
from pursuit_game.core.solver import OpenLoopPlan, check_params, solve
from pursuit_game.exceptions import InvalidStateError, ValidationError
from pursuit_game.models import GameParams, GameState, Phase
from pursuit_game.utils.sampling import sample_states


def _advance(plan, tau):
    """沿开环计划前进 τ 后的状态"""
    x_P, y_P = plan.pursuer_position(tau)
    v_Px, v_Py = plan.pursuer_velocity(tau)
    x_E, y_E = plan.evader_position(tau)
    return GameState(x_P=x_P, y_P=y_P, v_Px=v_Px, v_Py=v_Py, x_E=x_E, y_E=y_E)


class TestSolve:
    """测试求解调度"""

    def test_scenario1_pre_saturation(self, scenario1_state, scenario1_params):
        result = solve(scenario1_state, scenario1_params)
        sol = result.solution
        assert sol.phase is Phase.PRE_SATURATION
        assert sol.t_f == pytest.approx(2.437, abs=1e-3)
        assert sol.theta_P_star == sol.theta_E_star
        assert sol.t_f <= sol.t_theta_star
        assert result.candidates_examined[-1][0] == sol.t_f
        assert result.command.a_P == scenario1_params.a_P_max

    def test_scenario2_post_saturation(self, scenario2_state, scenario2_params):
        result = solve(scenario2_state, scenario2_params)
        sol = result.solution
        assert sol.phase is Phase.POST_SATURATION
        assert sol.t_f == pytest.approx(5.407, abs=1e-3)
        for t, t_theta in result.candidates_examined:
            assert t > t_theta

    def test_already_captured(self, scenario1_params):
        state = GameState(x_P=1.0, y_P=2.0, v_Px=0.5, v_Py=0.0, x_E=1.0, y_E=2.0)
        result = solve(state, scenario1_params)
        assert result.solution.t_f == 0.0
        assert result.command.a_P == 0.0
        assert result.command.v_E == 0.0

    def test_slower_pursuer_rejected(self, scenario1_state):
        params = GameParams.model_construct(
            a_P_max=1.0, v_P_max=0.5, v_E_max=0.5, tol_speed=1e-9, capture_radius=1e-3
        )
        with pytest.raises(ValidationError):
            solve(scenario1_state, params)
        with pytest.raises(ValidationError):
            check_params(params)

    def test_overspeed_rejected(self, scenario2_params):
        state = GameState(x_P=0, y_P=0, v_Px=2.5, v_Py=0, x_E=5, y_E=5)
        with pytest.raises(InvalidStateError):
            solve(state, scenario2_params)

    def test_non_finite_rejected(self, scenario2_params):
        state = GameState(x_P=math.nan, y_P=0, v_Px=0, v_Py=0, x_E=5, y_E=5)
        with pytest.raises(InvalidStateError):
            solve(state, scenario2_params)

    @pytest.mark.parametrize("preset", ["scenario1", "scenario2"])
    def test_translation_invariance(self, preset, request):
        state = request.getfixturevalue(f"{preset}_state")
        params = request.getfixturevalue(f"{preset}_params")
        base = solve(state, params).solution
        moved = solve(state.translated(3.0, -2.0), params).solution
        assert moved.t_f == pytest.approx(base.t_f, rel=1e-9)
        assert moved.phase is base.phase
        assert moved.capture_point[0] == pytest.approx(base.capture_point[0] + 3.0)
        assert moved.capture_point[1] == pytest.approx(base.capture_point[1] - 2.0)


class TestOpenLoopPlan:
    """测试开环计划"""

    @pytest.mark.parametrize("preset", ["scenario1", "scenario2"])
    def test_plan_meets_at_capture(self, preset, request):
        """计划轨迹在 t_f 处相遇"""
        state = request.getfixturevalue(f"{preset}_state")
        params = request.getfixturevalue(f"{preset}_params")
        plan = OpenLoopPlan.solve(state, params)
        assert plan.miss_distance() == pytest.approx(0.0, abs=1e-7)
        vx, vy = plan.pursuer_velocity(plan.t_f)
        assert math.hypot(vx, vy) <= params.v_P_max * (1 + 1e-9)

    def test_post_saturation_switch(self, scenario2_state, scenario2_params):
        plan = OpenLoopPlan.solve(scenario2_state, scenario2_params)
        assert 0 < plan.t_switch < plan.t_f
        assert plan.command_at(0.0).a_P == scenario2_params.a_P_max
        assert plan.command_at(plan.t_switch + 0.1).a_P == 0.0
        vx, vy = plan.pursuer_velocity(plan.t_switch + 0.1)
        assert math.hypot(vx, vy) == pytest.approx(scenario2_params.v_P_max)

    def test_pre_saturation_keeps_accelerating(self, scenario1_state, scenario1_params):
        plan = OpenLoopPlan.solve(scenario1_state, scenario1_params)
        assert math.isinf(plan.t_switch)
        assert plan.command_at(plan.t_f - 1e-3).a_P == scenario1_params.a_P_max

    @pytest.mark.parametrize("preset", ["scenario1", "scenario2"])
    def test_replanning_along_plan_is_consistent(self, preset, request):
        """沿最优轨迹重新求解，剩余时间与捕获点保持不变"""
        state = request.getfixturevalue(f"{preset}_state")
        params = request.getfixturevalue(f"{preset}_params")
        plan = OpenLoopPlan.solve(state, params)
        tau = 0.4 * plan.t_f
        later = solve(_advance(plan, tau), params)
        assert later.solution.t_f == pytest.approx(plan.t_f - tau, abs=1e-6)
        assert later.solution.capture_point == pytest.approx(
            plan.result.solution.capture_point, abs=1e-5
        )


@pytest.mark.slow
class TestDispatchSoundness:
    """随机状态上的阶段判定"""

    def test_pre_saturation_states(self):
        for state, params in sample_states(Phase.PRE_SATURATION, 20, seed=3):
            sol = solve(state, params).solution
            assert sol.t_f <= saturation_time(state, sol.theta_P_star, params)

    def test_post_saturation_states(self):
        for state, params in sample_states(Phase.POST_SATURATION, 20, seed=3):
            result = solve(state, params)
            assert result.solution.t_f > result.solution.t_theta_star
            for t, t_theta in result.candidates_examined:
                assert t > t_theta
