"""测试数据模型"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from pursuit_game.models import (
    CaptureSolution,
    CaptureTimeCell,
    ContinuityReport,
    FeasibleDomain,
    GameParams,
    GameState,
    Outcome,
    OutcomeKind,
    Phase,
    PolicyKind,
    PolyCoeffs,
    ReplanMode,
    ScenarioConfig,
    SolverConfig,
    StateCheck,
    StrategyCommand,
    Trajectory,
    TrajectorySample,
    ValueGradient,
    VerificationReport,
)


class TestGameState:
    """测试联合状态"""

    def test_derived_quantities(self, scenario1_state):
        """测试速率与终端函数"""
        assert scenario1_state.speed_P == pytest.approx(1.0)
        assert scenario1_state.psi == pytest.approx(2.0)
        assert scenario1_state.separation == pytest.approx(math.sqrt(2.0))

    def test_from_sequence_length(self):
        """测试序列长度检查"""
        with pytest.raises(ValueError):
            GameState.from_sequence([0.0, 1.0])

    def test_perturbed_and_translated(self, scenario1_state):
        """测试扰动与平移"""
        moved = scenario1_state.perturbed(3, 0.5)
        assert moved.v_Py == pytest.approx(1.5)
        assert moved.x_P == scenario1_state.x_P

        shifted = scenario1_state.translated(2.0, -1.0)
        assert shifted.position_P == (2.0, -1.0)
        assert shifted.position_E == (3.0, 0.0)
        assert shifted.velocity_P == scenario1_state.velocity_P
        assert shifted.psi == pytest.approx(scenario1_state.psi)

    def test_state_is_frozen(self, scenario1_state):
        """测试不可变"""
        with pytest.raises(ValidationError):
            scenario1_state.x_P = 3.0

    def test_non_finite_detection(self):
        """测试非有限值检测"""
        state = GameState(x_P=math.nan, y_P=0, v_Px=0, v_Py=0, x_E=1, y_E=1)
        assert not state.is_finite()

    def test_str_uses_nine_digits(self):
        state = GameState(x_P=1 / 3, y_P=0, v_Px=0, v_Py=0, x_E=1, y_E=1)
        assert str(state).startswith("(0.333333333,")


class TestGameParams:
    """测试博弈参数"""

    def test_valid_params(self, scenario2_params):
        assert scenario2_params.delta == pytest.approx(3.75)
        assert scenario2_params.inner_time == pytest.approx(1.0)
        assert scenario2_params.capture_radius == 1e-3

    def test_pursuer_must_be_faster(self):
        """测试 v̄P > v̄E 前提"""
        with pytest.raises(ValidationError):
            GameParams(a_P_max=1.0, v_P_max=1.0, v_E_max=1.0)

    @pytest.mark.parametrize(
        "field,value",
        [("a_P_max", 0.0), ("a_P_max", math.inf), ("v_E_max", -0.1), ("tol_speed", 0)],
    )
    def test_invalid_values(self, field, value):
        """测试非法取值"""
        values = {"a_P_max": 1.0, "v_P_max": 2.0, "v_E_max": 0.5, field: value}
        with pytest.raises(ValidationError):
            GameParams(**values)

    def test_speed_limit_includes_tolerance(self):
        params = GameParams(a_P_max=1.0, v_P_max=2.0, v_E_max=0.5, tol_speed=1e-6)
        assert params.speed_limit == pytest.approx(2.0 * (1 + 1e-6))


class TestStrategyCommand:
    """测试控制量模型"""

    def test_angles_are_normalized(self):
        """测试角度归一化到 [0, 2π)"""
        cmd = StrategyCommand(a_P=1.0, theta_P=-math.pi / 2, v_E=0.5, theta_E=7.0)
        assert cmd.theta_P == pytest.approx(1.5 * math.pi)
        assert cmd.theta_E == pytest.approx(7.0 - 2 * math.pi)

    def test_negative_magnitude_rejected(self):
        with pytest.raises(ValidationError):
            StrategyCommand(a_P=-1.0, v_E=0.5)

    def test_idle_and_replace(self):
        """测试零控制与替换"""
        cmd = StrategyCommand.idle().with_pursuer(1.0, math.pi).with_evader(0.5, 0.0)
        assert cmd.a_P == 1.0
        assert cmd.theta_P == pytest.approx(math.pi)
        assert cmd.v_E == 0.5


class TestCaptureSolution:
    """测试捕获解的阶段约束"""

    def test_pre_saturation_requires_t_f_below_t_theta(self):
        with pytest.raises(ValidationError):
            CaptureSolution(
                t_f=3.0,
                capture_point=(0.0, 0.0),
                theta_P_star=0.0,
                theta_E_star=0.0,
                phase=Phase.PRE_SATURATION,
                t_theta_star=2.0,
            )

    def test_post_saturation_requires_t_f_above_t_theta(self):
        with pytest.raises(ValidationError):
            CaptureSolution(
                t_f=1.0,
                capture_point=(0.0, 0.0),
                theta_P_star=0.0,
                theta_E_star=0.0,
                phase=Phase.POST_SATURATION,
                t_theta_star=2.0,
            )

    def test_valid_solution(self):
        sol = CaptureSolution(
            t_f=0.0,
            capture_point=(1.0, 2.0),
            theta_P_star=-0.5,
            theta_E_star=0.0,
            phase=Phase.PRE_SATURATION,
            t_theta_star=4.0,
        )
        assert sol.is_immediate
        assert sol.theta_P_star == pytest.approx(2 * math.pi - 0.5)


class TestPolyCoeffs:
    """测试多项式系数模型"""

    def test_leading_zeros_removed(self):
        poly = PolyCoeffs(coefficients=(0.0, 0.0, 1.0, -2.0))
        assert poly.normalized() == (1.0, -2.0)
        assert poly.degree == 1
        assert poly.evaluate(2.0) == pytest.approx(0.0)

    def test_too_many_coefficients(self):
        with pytest.raises(ValidationError):
            PolyCoeffs(coefficients=(1.0, 0.0, 0.0, 0.0, 0.0, 1.0))

    def test_non_finite_coefficients(self):
        with pytest.raises(ValidationError):
            PolyCoeffs(coefficients=(1.0, math.nan))


class TestFeasibleDomain:
    """测试可行方向弧"""

    def test_wrapping_arc(self):
        """测试跨越 2π 的弧"""
        domain = FeasibleDomain(theta_lo=5.5, theta_hi=0.5, wraps=True)
        assert domain.arc_length == pytest.approx(0.5 + 2 * math.pi - 5.5)
        lo, hi = domain.unrolled()
        assert lo == 5.5
        assert hi == pytest.approx(0.5 + 2 * math.pi)
        assert domain.contains(0.1)
        assert domain.contains(6.0)
        assert not domain.contains(3.0)

    def test_whole_circle(self):
        domain = FeasibleDomain(theta_lo=0.0, theta_hi=2 * math.pi, whole_circle=True)
        assert domain.arc_length == pytest.approx(2 * math.pi)
        assert domain.contains(4.0)


class TestValueGradient:
    def test_sequence_round_trip(self):
        grad = ValueGradient.from_sequence(np.arange(6.0))
        assert grad.dV_dvPx == 2.0
        np.testing.assert_array_equal(grad.as_array(), np.arange(6.0))

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            ValueGradient.from_sequence([0, 0, math.inf, 0, 0, 0])


def _linear_trajectory(slope, kind=OutcomeKind.TIMED_OUT):
    """逃逸者沿 x 轴运动，距离随时间线性变化"""
    dt = 0.1
    samples = []
    for k in range(50):
        t = k * dt
        state = GameState(x_P=0, y_P=0, v_Px=0, v_Py=0, x_E=5.0 + slope * t, y_E=0)
        samples.append(
            TrajectorySample(t=t, state=state, command=StrategyCommand.idle())
        )
    return Trajectory(samples=samples, outcome=Outcome(kind=kind, time=5.0), dt=dt)


class TestTrajectory:
    """测试仿真轨迹"""

    def test_rows_follow_column_order(self):
        trajectory = _linear_trajectory(-0.5)
        rows = trajectory.to_rows()
        assert rows.shape == (50, 11)
        assert rows[1, 0] == pytest.approx(0.1)
        assert rows[1, 5] == pytest.approx(4.95)

    def test_separation_trend(self):
        """测试末段距离斜率"""
        assert _linear_trajectory(-0.5).separation_trend() == pytest.approx(-0.5)
        assert _linear_trajectory(0.3).separation_trend() == pytest.approx(0.3)

    def test_divergence(self):
        """测试发散判定"""
        assert _linear_trajectory(0.3).is_diverging()
        assert not _linear_trajectory(-0.5).is_diverging()
        assert not _linear_trajectory(0.3, OutcomeKind.CAPTURED).is_diverging()

    def test_capture_time(self):
        assert _linear_trajectory(0.0).capture_time is None
        assert _linear_trajectory(0.0, OutcomeKind.CAPTURED).capture_time == 5.0

    def test_invalid_fraction(self):
        with pytest.raises(ValueError):
            _linear_trajectory(0.0).separation_trend(0.0)


class TestCaptureTimeCell:
    """测试对照表单元格"""

    def _cell(self, reference, kind, time):
        return CaptureTimeCell(
            scenario="scenario1",
            policies=PolicyKind(),
            replan=ReplanMode.OPEN_LOOP,
            reference=reference,
            outcome=Outcome(kind=kind, time=time),
            tolerance=5e-3,
        )

    def test_finite_reference(self):
        cell = self._cell(2.437, OutcomeKind.CAPTURED, 2.44)
        assert cell.error == pytest.approx(3e-3)
        assert cell.passed
        assert not self._cell(2.437, OutcomeKind.CAPTURED, 2.5).passed
        assert not self._cell(2.437, OutcomeKind.TIMED_OUT, 50.0).passed

    def test_uncapturable_reference(self):
        """参考值为 +∞ 时只接受超时"""
        assert self._cell(None, OutcomeKind.TIMED_OUT, 50.0).passed
        assert not self._cell(None, OutcomeKind.CAPTURED, 3.0).passed


def _check(residual=0.0, gradient_error=0.0, excess=None):
    state = GameState(x_P=0, y_P=0, v_Px=0, v_Py=1, x_E=1, y_E=1)
    params = GameParams(a_P_max=1.0, v_P_max=10.0, v_E_max=0.5)
    return StateCheck(
        index=0,
        state=state,
        params=params,
        phase=Phase.PRE_SATURATION,
        t_f=2.437,
        residual=residual,
        gradient_error=gradient_error,
        monitor_angle=None if excess is None else 0.0,
        monitor_excess=excess,
    )


class TestVerificationReport:
    """测试核验报告"""

    def test_passing_report(self):
        report = VerificationReport(seed=1, checks=[_check(1e-9, 1e-7)])
        assert report.passed
        assert report.count(Phase.PRE_SATURATION) == 1
        assert report.count(Phase.POST_SATURATION) == 0

    def test_worst_residual_uses_absolute_value(self):
        report = VerificationReport(seed=1, checks=[_check(1e-7), _check(-2e-5)])
        assert report.max_residual == pytest.approx(2e-5)
        assert report.failures() == ["residual"]

    def test_monitor_and_gradient_failures(self):
        report = VerificationReport(
            seed=1, checks=[_check(gradient_error=1e-3), _check(excess=1e-3)]
        )
        assert report.failures() == ["gradient", "unimodality"]
        assert not report.passed

    def test_negative_monitor_excess_passes(self):
        report = VerificationReport(seed=1, checks=[_check(excess=-1e-3)])
        assert report.max_monitor_excess == pytest.approx(-1e-3)
        assert report.passed

    def test_continuity_failures(self):
        continuity = ContinuityReport(
            crossing=1.7,
            gap=1e-8,
            t_f_pre=2.0,
            t_f_post=2.001,
            theta_pre=0.1,
            theta_post=2 * math.pi - 0.1,
        )
        assert continuity.theta_gap == pytest.approx(0.2)
        report = VerificationReport(seed=1, continuity=continuity)
        assert report.failures() == ["continuity", "continuity_theta"]


class TestConfigModels:
    """测试配置模型"""

    def test_solver_config_defaults(self):
        cfg = SolverConfig()
        assert cfg.dt == 1e-3
        assert cfg.horizon == 50.0
        assert cfg.bracket_step == pytest.approx(math.pi / 500)

    @pytest.mark.parametrize("field", ["dt", "horizon", "ternary_tol"])
    def test_solver_config_positive(self, field):
        with pytest.raises(ValidationError):
            SolverConfig(**{field: 0.0})

    def test_scenario_rejects_overspeed(self, scenario2_params):
        """初始速度超过 v̄P 的场景应被拒绝"""
        state = GameState(x_P=0, y_P=0, v_Px=3.0, v_Py=0, x_E=5, y_E=5)
        with pytest.raises(ValidationError):
            ScenarioConfig(initial_state=state, params=scenario2_params)
