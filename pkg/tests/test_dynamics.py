"""测试动力学与终端条件"""

import math

import pytest

from pursuit_game.core.dynamics import (
    is_captured,
    psi,
    segment_closest_distance,
    step,
    step_evader,
    step_pursuer,
    validate_state,
)
from pursuit_game.exceptions import InvalidStateError, ValidationError
from pursuit_game.models import GameParams, GameState, StrategyCommand


@pytest.fixture
def params():
    return GameParams(a_P_max=1.0, v_P_max=2.0, v_E_max=0.5)


def _state(**values):
    base = {"x_P": 0.0, "y_P": 0.0, "v_Px": 0.0, "v_Py": 0.0, "x_E": 5.0, "y_E": 0.0}
    base.update(values)
    return GameState(**base)


class TestStepPursuer:
    """测试追击者积分"""

    def test_position_uses_new_velocity(self, params):
        """先更新速度，再用新速度推进位置"""
        cmd = StrategyCommand(a_P=1.0, theta_P=0.0, v_E=0.0)
        state = step_pursuer(_state(), cmd, 1.0, params)
        assert state.v_Px == pytest.approx(1.0)
        assert state.x_P == pytest.approx(1.0)

    def test_constant_acceleration(self, params):
        """十步之后位置为 dt² · (1 + 2 + … + 10)，比 ½at² 多 ½a·t·dt"""
        cmd = StrategyCommand(a_P=1.0, theta_P=0.0, v_E=0.0)
        state = _state()
        for _ in range(10):
            state = step_pursuer(state, cmd, 0.1, params)
        assert state.v_Px == pytest.approx(1.0)
        assert state.x_P == pytest.approx(0.55)
        assert state.y_P == pytest.approx(0.0, abs=1e-15)

    def test_speed_is_projected(self, params):
        """超速时径向投影回 v̄P，方向不变"""
        cmd = StrategyCommand(a_P=1.0, theta_P=0.0, v_E=0.0)
        state = step_pursuer(_state(v_Px=1.95), cmd, 0.1, params)
        assert state.speed_P == pytest.approx(2.0)
        assert state.v_Py == 0.0

    def test_projection_keeps_direction(self, params):
        cmd = StrategyCommand(a_P=1.0, theta_P=math.pi / 2, v_E=0.0)
        state = step_pursuer(_state(v_Px=2.0), cmd, 0.5, params)
        assert state.speed_P == pytest.approx(2.0)
        assert math.atan2(state.v_Py, state.v_Px) == pytest.approx(math.atan2(0.5, 2.0))

    def test_evader_unchanged(self, params):
        cmd = StrategyCommand(a_P=1.0, theta_P=1.0, v_E=0.5, theta_E=2.0)
        state = step_pursuer(_state(), cmd, 0.1, params)
        assert state.position_E == (5.0, 0.0)

    def test_rejects_excess_acceleration(self, params):
        cmd = StrategyCommand(a_P=1.5, theta_P=0.0, v_E=0.0)
        with pytest.raises(ValidationError):
            step_pursuer(_state(), cmd, 0.1, params)

    @pytest.mark.parametrize("dt", [0.0, -0.1])
    def test_rejects_non_positive_dt(self, params, dt):
        with pytest.raises(ValidationError):
            step_pursuer(_state(), StrategyCommand.idle(), dt, params)

    def test_rejects_non_finite(self, params):
        with pytest.raises(InvalidStateError):
            step_pursuer(_state(x_P=math.inf), StrategyCommand.idle(), 0.1, params)
        with pytest.raises(InvalidStateError):
            step_pursuer(_state(), StrategyCommand.idle(), math.nan, params)


class TestStepEvader:
    """测试逃逸者积分"""

    def test_moves_along_heading(self):
        cmd = StrategyCommand(a_P=0.0, v_E=0.5, theta_E=math.pi / 2)
        state = step_evader(_state(), cmd, 2.0)
        assert state.x_E == pytest.approx(5.0)
        assert state.y_E == pytest.approx(1.0)
        assert state.position_P == (0.0, 0.0)

    def test_joint_step(self, params):
        cmd = StrategyCommand(a_P=1.0, theta_P=0.0, v_E=0.5, theta_E=0.0)
        state = step(_state(), cmd, 1.0, params)
        assert state.x_P == pytest.approx(1.0)
        assert state.x_E == pytest.approx(5.5)


class TestTerminalCondition:
    """测试终端函数与捕获判定"""

    def test_psi(self):
        assert psi(_state(x_E=3.0, y_E=4.0)) == pytest.approx(25.0)

    def test_boundary_counts_as_captured(self):
        """Ψ = r² 恰好在边界上"""
        state = _state(x_E=0.5)
        assert is_captured(state, 0.5)
        assert not is_captured(state, 0.25)

    def test_negative_radius(self):
        with pytest.raises(ValidationError):
            is_captured(_state(), -1.0)

    def test_segment_closest_distance(self):
        """相对位置从 (−1, 1) 线性变到 (1, 1)，最近距离为 1"""
        before = _state(x_P=0.0, y_P=0.0, x_E=1.0, y_E=-1.0)
        after = _state(x_P=2.0, y_P=0.0, x_E=1.0, y_E=-1.0)
        assert segment_closest_distance(before, after) == pytest.approx(1.0)

    def test_segment_endpoint(self):
        before = _state(x_E=3.0)
        after = _state(x_E=4.0)
        assert segment_closest_distance(before, after) == pytest.approx(3.0)


class TestValidateState:
    def test_overspeed(self, params):
        with pytest.raises(InvalidStateError):
            validate_state(_state(v_Px=2.1), params)

    def test_within_tolerance(self, params):
        state = _state(v_Px=2.0 * (1 + 1e-12))
        assert validate_state(state, params) is state
