"""数据模型定义

使用 Pydantic 进行类型安全的数据验证和模型定义。
所有模型都是不可变值对象，可以在任意线程间共享。
"""

import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .utils.angles import normalize_angle

Point = Tuple[float, float]

# 轨迹表格列，顺序与 CSV 表头一致
TRAJECTORY_COLUMNS = (
    "t",
    "x_P",
    "y_P",
    "v_Px",
    "v_Py",
    "x_E",
    "y_E",
    "a_P",
    "theta_P",
    "v_E",
    "theta_E",
)


class GameState(BaseModel):
    """博弈联合状态：追击者位置与速度、逃逸者位置"""

    x_P: float = Field(..., description="追击者 x 坐标")
    y_P: float = Field(..., description="追击者 y 坐标")
    v_Px: float = Field(..., description="追击者 x 方向速度")
    v_Py: float = Field(..., description="追击者 y 方向速度")
    x_E: float = Field(..., description="逃逸者 x 坐标")
    y_E: float = Field(..., description="逃逸者 y 坐标")

    model_config = ConfigDict(frozen=True)

    @property
    def position_P(self) -> Point:
        return (self.x_P, self.y_P)

    @property
    def velocity_P(self) -> Point:
        return (self.v_Px, self.v_Py)

    @property
    def position_E(self) -> Point:
        return (self.x_E, self.y_E)

    @property
    def speed_P(self) -> float:
        """追击者当前速率"""
        return math.hypot(self.v_Px, self.v_Py)

    @property
    def psi(self) -> float:
        """终端函数 Ψ：两者距离的平方"""
        return (self.x_P - self.x_E) ** 2 + (self.y_P - self.y_E) ** 2

    @property
    def separation(self) -> float:
        return math.sqrt(self.psi)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.as_tuple())

    def as_tuple(self) -> Tuple[float, float, float, float, float, float]:
        return (self.x_P, self.y_P, self.v_Px, self.v_Py, self.x_E, self.y_E)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @classmethod
    def from_sequence(cls, values: "np.ndarray | List[float]") -> "GameState":
        """从长度为 6 的序列构造状态"""
        if len(values) != 6:
            raise ValueError(f"GameState needs 6 values, got {len(values)}")
        x_P, y_P, v_Px, v_Py, x_E, y_E = (float(v) for v in values)
        return cls(x_P=x_P, y_P=y_P, v_Px=v_Px, v_Py=v_Py, x_E=x_E, y_E=y_E)

    def perturbed(self, index: int, delta: float) -> "GameState":
        """返回第 index 个分量加上 delta 的新状态（有限差分用）"""
        values = list(self.as_tuple())
        values[index] += delta
        return GameState.from_sequence(values)

    def translated(self, dx: float, dy: float) -> "GameState":
        """两名玩家同时平移"""
        return self.model_copy(
            update={
                "x_P": self.x_P + dx,
                "y_P": self.y_P + dy,
                "x_E": self.x_E + dx,
                "y_E": self.y_E + dy,
            }
        )

    def __str__(self) -> str:
        return "(" + ", ".join(f"{v:.9g}" for v in self.as_tuple()) + ")"


class GameParams(BaseModel):
    """博弈参数：三个边界以及数值容差"""

    a_P_max: float = Field(..., gt=0, description="追击者最大加速度 āP")
    v_P_max: float = Field(..., gt=0, description="追击者最大速度 v̄P")
    v_E_max: float = Field(..., ge=0, description="逃逸者最大速度 v̄E")
    tol_speed: float = Field(default=1e-9, gt=0, description="速度约束相对容差")
    capture_radius: float = Field(default=1e-3, ge=0, description="仿真捕获半径")

    model_config = ConfigDict(frozen=True)

    @field_validator("a_P_max", "v_P_max", "v_E_max", "tol_speed", "capture_radius")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        """验证必须为有限值"""
        if not math.isfinite(v):
            raise ValueError("Parameter must be finite")
        return v

    @model_validator(mode="after")
    def validate_capture_precondition(self) -> "GameParams":
        """追击者最大速度必须大于逃逸者最大速度"""
        if self.v_P_max <= self.v_E_max:
            raise ValueError(
                f"v_P_max ({self.v_P_max}) must exceed v_E_max ({self.v_E_max})"
            )
        return self

    @property
    def delta(self) -> float:
        """v̄P² − v̄E²"""
        return self.v_P_max**2 - self.v_E_max**2

    @property
    def speed_limit(self) -> float:
        """考虑容差后的追击者速度上限"""
        return self.v_P_max * (1.0 + self.tol_speed)

    @property
    def inner_time(self) -> float:
        """2v̄E/āP：两可达圆半径相等的时刻"""
        return 2.0 * self.v_E_max / self.a_P_max


class StrategyCommand(BaseModel):
    """瞬时控制量，角度统一归一化到 [0, 2π)"""

    a_P: float = Field(..., ge=0, description="追击者加速度大小")
    theta_P: float = Field(default=0.0, description="追击者加速度方向")
    v_E: float = Field(..., ge=0, description="逃逸者速度大小")
    theta_E: float = Field(default=0.0, description="逃逸者速度方向")

    model_config = ConfigDict(frozen=True)

    @field_validator("theta_P", "theta_E")
    @classmethod
    def normalize(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("Heading must be finite")
        return normalize_angle(v)

    @classmethod
    def idle(cls) -> "StrategyCommand":
        """零控制（已捕获时使用）"""
        return cls(a_P=0.0, theta_P=0.0, v_E=0.0, theta_E=0.0)

    def with_pursuer(self, a_P: float, theta_P: float) -> "StrategyCommand":
        return StrategyCommand(
            a_P=a_P, theta_P=theta_P, v_E=self.v_E, theta_E=self.theta_E
        )

    def with_evader(self, v_E: float, theta_E: float) -> "StrategyCommand":
        return StrategyCommand(
            a_P=self.a_P, theta_P=self.theta_P, v_E=v_E, theta_E=theta_E
        )


class Phase(str, Enum):
    """捕获阶段：饱和前 / 饱和后"""

    PRE_SATURATION = "PreSaturation"
    POST_SATURATION = "PostSaturation"


# 阶段一致性检查的相对容差
_PHASE_SLACK = 1e-9


class CaptureSolution(BaseModel):
    """捕获解：捕获时间、捕获点、最优方向和阶段"""

    t_f: float = Field(..., ge=0, description="捕获时间")
    capture_point: Point = Field(..., description="捕获点 (x_f, y_f)")
    theta_P_star: float = Field(..., description="追击者最优加速度方向")
    theta_E_star: float = Field(..., description="逃逸者最优速度方向")
    phase: Phase = Field(..., description="捕获阶段")
    t_theta_star: float = Field(..., ge=0, description="沿 θ_P* 的饱和时间")

    model_config = ConfigDict(frozen=True)

    @field_validator("theta_P_star", "theta_E_star")
    @classmethod
    def normalize(cls, v: float) -> float:
        return normalize_angle(v)

    @model_validator(mode="after")
    def validate_phase(self) -> "CaptureSolution":
        """饱和前 ⇒ t_f ≤ t_θ*；饱和后 ⇒ t_f > t_θ*"""
        slack = _PHASE_SLACK * (1.0 + self.t_f)
        if self.phase is Phase.PRE_SATURATION and self.t_f > self.t_theta_star + slack:
            raise ValueError("PreSaturation solution must satisfy t_f <= t_theta_star")
        if self.phase is Phase.POST_SATURATION and self.t_f < self.t_theta_star - slack:
            raise ValueError("PostSaturation solution must satisfy t_f > t_theta_star")
        return self

    @property
    def is_immediate(self) -> bool:
        return self.t_f == 0.0


class PolyCoeffs(BaseModel):
    """多项式系数，最高次在前，次数不超过 4"""

    coefficients: Tuple[float, ...] = Field(..., min_length=1, max_length=5)

    model_config = ConfigDict(frozen=True)

    @field_validator("coefficients")
    @classmethod
    def validate_finite(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not all(math.isfinite(c) for c in v):
            raise ValueError("Polynomial coefficients must be finite")
        return v

    def normalized(self) -> Tuple[float, ...]:
        """去掉前导零系数"""
        coeffs = list(self.coefficients)
        while coeffs and coeffs[0] == 0.0:
            coeffs.pop(0)
        return tuple(coeffs)

    @property
    def degree(self) -> int:
        return max(len(self.normalized()) - 1, 0)

    @property
    def scale(self) -> float:
        """系数最大绝对值"""
        return max(abs(c) for c in self.coefficients)

    def evaluate(self, t: float) -> float:
        return float(np.polyval(self.coefficients, t))


class ReachabilityCircles(BaseModel):
    """t 时刻双方的可达圆"""

    c_P: Point
    R_P: float = Field(..., ge=0)
    c_E: Point
    R_E: float = Field(..., ge=0)
    t: float = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)

    @property
    def center_distance(self) -> float:
        return math.hypot(self.c_P[0] - self.c_E[0], self.c_P[1] - self.c_E[1])

    @property
    def contains_evader_circle(self) -> bool:
        """C_E 是否内含于 C_P"""
        return self.center_distance <= self.R_P - self.R_E


class PQTerms(BaseModel):
    """给定方向下的饱和后中间量 p、q 和饱和时间"""

    p_x: float
    p_y: float
    q_x: float
    q_y: float
    t_theta: float = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)

    @property
    def h(self) -> float:
        """h = p·q"""
        return self.p_x * self.q_x + self.p_y * self.q_y

    @property
    def q_norm_sq(self) -> float:
        return self.q_x**2 + self.q_y**2

    @property
    def p_norm_sq(self) -> float:
        return self.p_x**2 + self.p_y**2


class FeasibleDomain(BaseModel):
    """可行方向弧 [θ_P1, θ_P2]，可能跨越 2π"""

    theta_lo: float = Field(..., description="弧起点 θ_P1")
    theta_hi: float = Field(..., description="弧终点 θ_P2")
    wraps: bool = Field(default=False, description="是否跨越 2π")
    whole_circle: bool = Field(default=False, description="整个圆周都可行")

    model_config = ConfigDict(frozen=True)

    @property
    def arc_length(self) -> float:
        if self.whole_circle:
            return 2.0 * math.pi
        return (self.theta_hi - self.theta_lo) % (2.0 * math.pi)

    def unrolled(self) -> Tuple[float, float]:
        """展开为连续区间 [θ_P1, θ_P1 + 弧长]"""
        return (self.theta_lo, self.theta_lo + self.arc_length)

    def contains(self, theta: float) -> bool:
        if self.whole_circle:
            return True
        offset = (theta - self.theta_lo) % (2.0 * math.pi)
        return offset <= self.arc_length


class SolverResult(BaseModel):
    """求解调度的输出：瞬时最优控制、捕获解和被检查过的候选"""

    command: StrategyCommand
    solution: CaptureSolution
    candidates_examined: List[Tuple[float, float]] = Field(
        default_factory=list, description="(t, t_θ) 候选对"
    )

    model_config = ConfigDict(frozen=True)


class ValueGradient(BaseModel):
    """值函数 V = t_f 对六个状态分量的偏导"""

    dV_dxP: float
    dV_dyP: float
    dV_dvPx: float
    dV_dvPy: float
    dV_dxE: float
    dV_dyE: float

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_finite(self) -> "ValueGradient":
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError("Gradient components must be finite")
        return self

    def as_tuple(self) -> Tuple[float, float, float, float, float, float]:
        return (
            self.dV_dxP,
            self.dV_dyP,
            self.dV_dvPx,
            self.dV_dvPy,
            self.dV_dxE,
            self.dV_dyE,
        )

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @classmethod
    def from_sequence(cls, values: "np.ndarray | List[float]") -> "ValueGradient":
        names = ("dV_dxP", "dV_dyP", "dV_dvPx", "dV_dvPy", "dV_dxE", "dV_dyE")
        return cls(**{n: float(v) for n, v in zip(names, values)})


class PursuerPolicy(str, Enum):
    OPTIMAL = "optimal"
    PURE_PURSUIT = "pure_pursuit"


class EvaderPolicy(str, Enum):
    OPTIMAL = "optimal"
    PURE_EVASION = "pure_evasion"


class ReplanMode(str, Enum):
    """最优玩家的重规划方式"""

    OPEN_LOOP = "open_loop"
    EVERY_STEP = "every_step"


class PolicyKind(BaseModel):
    """双方策略组合"""

    pursuer: PursuerPolicy = Field(default=PursuerPolicy.OPTIMAL)
    evader: EvaderPolicy = Field(default=EvaderPolicy.OPTIMAL)

    model_config = ConfigDict(frozen=True)

    @property
    def label(self) -> str:
        return f"{self.pursuer.value} vs {self.evader.value}"


class OutcomeKind(str, Enum):
    CAPTURED = "Captured"
    TIMED_OUT = "TimedOut"


class Outcome(BaseModel):
    """仿真终止记录"""

    kind: OutcomeKind
    time: float = Field(..., ge=0, description="捕获时间或仿真时域")
    miss_distance: Optional[float] = Field(
        default=None, description="最后一步内的最近距离"
    )

    model_config = ConfigDict(frozen=True)


class TrajectorySample(BaseModel):
    t: float
    state: GameState
    command: StrategyCommand

    model_config = ConfigDict(frozen=True)

    def as_row(self) -> Tuple[float, ...]:
        c = self.command
        return (self.t, *self.state.as_tuple(), c.a_P, c.theta_P, c.v_E, c.theta_E)


class Trajectory(BaseModel):
    """闭环仿真轨迹：等间隔采样加终止记录"""

    samples: List[TrajectorySample] = Field(default_factory=list)
    outcome: Outcome
    dt: float = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)

    @property
    def captured(self) -> bool:
        return self.outcome.kind is OutcomeKind.CAPTURED

    @property
    def capture_time(self) -> Optional[float]:
        return self.outcome.time if self.captured else None

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    def separations(self) -> np.ndarray:
        return np.array([s.state.separation for s in self.samples], dtype=float)

    def pursuer_speeds(self) -> np.ndarray:
        return np.array([s.state.speed_P for s in self.samples], dtype=float)

    def to_rows(self) -> np.ndarray:
        """转换为 (N, 11) 数组，列顺序见 TRAJECTORY_COLUMNS"""
        if not self.samples:
            return np.empty((0, len(TRAJECTORY_COLUMNS)))
        return np.array([s.as_row() for s in self.samples], dtype=float)

    def separation_trend(self, fraction: float = 0.2) -> float:
        """最后 fraction 部分采样上距离的最小二乘斜率"""
        if not 0 < fraction <= 1:
            raise ValueError("fraction must be in (0, 1]")
        n = len(self.samples)
        if n < 2:
            return 0.0
        start = min(int(n * (1.0 - fraction)), n - 2)
        t = self.times()[start:]
        d = self.separations()[start:]
        slope, _ = np.polyfit(t, d, 1)
        return float(slope)

    def is_diverging(self, fraction: float = 0.2, slack: float = 1e-9) -> bool:
        """超时且末段距离不减"""
        if self.captured:
            return False
        return self.separation_trend(fraction) >= -slack


class CaptureTimeCell(BaseModel):
    """捕获时间对照表的一格：场景 × 策略组合"""

    scenario: str
    policies: PolicyKind
    replan: ReplanMode
    reference: Optional[float] = Field(default=None, description="参考值，None 表示不可捕获")
    outcome: Outcome
    tolerance: float = Field(..., gt=0)
    diverging: bool = Field(default=False, description="超时且末段距离不减")
    capture_radius: float = Field(default=1e-3, ge=0, description="本格使用的捕获半径")

    model_config = ConfigDict(frozen=True)

    @property
    def simulated(self) -> Optional[float]:
        if self.outcome.kind is OutcomeKind.CAPTURED:
            return self.outcome.time
        return None

    @property
    def error(self) -> Optional[float]:
        if self.reference is None or self.simulated is None:
            return None
        return abs(self.simulated - self.reference)

    @property
    def passed(self) -> bool:
        """有限参考值要求误差在容差内；不可捕获参考值要求超时"""
        if self.reference is None:
            return self.outcome.kind is OutcomeKind.TIMED_OUT
        error = self.error
        return error is not None and error <= self.tolerance


class ContinuityReport(BaseModel):
    """策略切换面两侧的值函数跳变"""

    crossing: float = Field(..., description="切换面处的族参数")
    gap: float = Field(..., ge=0, description="两侧参数间距")
    t_f_pre: float
    t_f_post: float
    theta_pre: float
    theta_post: float

    model_config = ConfigDict(frozen=True)

    @property
    def jump(self) -> float:
        return abs(self.t_f_pre - self.t_f_post)

    @property
    def theta_gap(self) -> float:
        diff = (self.theta_pre - self.theta_post + math.pi) % (2.0 * math.pi)
        return abs(diff - math.pi)


class StateCheck(BaseModel):
    """单个随机状态的验证结果"""

    index: int = Field(..., ge=0)
    state: GameState
    params: GameParams
    phase: Phase
    t_f: float
    residual: float = Field(..., description="HJI 残差")
    gradient_error: float = Field(..., ge=0, description="解析梯度与差分梯度的相对误差")
    monitor_angle: Optional[float] = Field(
        default=None, description="网格与三分搜索极大点的角度差（仅阶段二）"
    )
    monitor_excess: Optional[float] = Field(
        default=None, description="网格值超过三分搜索值的相对量（仅阶段二）"
    )

    model_config = ConfigDict(frozen=True)


class VerificationReport(BaseModel):
    """验证套件汇总"""

    seed: int
    checks: List[StateCheck] = Field(default_factory=list)
    continuity: Optional[ContinuityReport] = None
    residual_tol: float = Field(default=1e-5, gt=0)
    gradient_tol: float = Field(default=1e-4, gt=0)
    jump_tol: float = Field(default=1e-5, gt=0)
    theta_tol: float = Field(default=1e-4, gt=0)
    monitor_tol: float = Field(default=1e-6, gt=0)

    model_config = ConfigDict(frozen=True)

    def count(self, phase: Phase) -> int:
        return sum(1 for c in self.checks if c.phase is phase)

    def worst(self, key: str) -> Optional[StateCheck]:
        """按 residual（取绝对值）/ gradient_error / monitor_excess 取最差状态"""
        candidates = [c for c in self.checks if getattr(c, key) is not None]
        if not candidates:
            return None
        if key == "residual":
            return max(candidates, key=lambda c: abs(c.residual))
        return max(candidates, key=lambda c: getattr(c, key))

    @property
    def max_residual(self) -> float:
        worst = self.worst("residual")
        return abs(worst.residual) if worst else 0.0

    @property
    def max_gradient_error(self) -> float:
        worst = self.worst("gradient_error")
        return worst.gradient_error if worst else 0.0

    @property
    def max_monitor_excess(self) -> float:
        excess = [c.monitor_excess for c in self.checks if c.monitor_excess is not None]
        return max(excess, default=0.0)

    @property
    def monitor_disagreements(self) -> int:
        return sum(
            1
            for c in self.checks
            if c.monitor_angle is not None and c.monitor_angle > self.theta_tol
        )

    def failures(self) -> List[str]:
        """超出容差的检查项名称"""
        failed = []
        if self.max_residual > self.residual_tol:
            failed.append("residual")
        if self.max_gradient_error > self.gradient_tol:
            failed.append("gradient")
        if self.max_monitor_excess > self.monitor_tol:
            failed.append("unimodality")
        if self.continuity is not None:
            if self.continuity.jump > self.jump_tol:
                failed.append("continuity")
            if self.continuity.theta_gap > self.theta_tol:
                failed.append("continuity_theta")
        return failed

    @property
    def passed(self) -> bool:
        return not self.failures()


class SolverConfig(BaseModel):
    """数值求解与仿真配置"""

    tol_speed: float = Field(default=1e-9, description="速度约束相对容差")
    tol_root: float = Field(default=1e-10, description="多项式根残差相对容差")
    tol_candidate: float = Field(default=1e-9, description="候选时间过滤容差")
    capture_radius: float = Field(default=1e-3, description="仿真捕获半径")
    dt: float = Field(default=1e-3, description="仿真步长")
    horizon: float = Field(default=50.0, description="仿真时域")
    replan_jump_tol: float = Field(
        default=0.1, description="重规划预测捕获时刻允许的最大后移"
    )
    ternary_tol: float = Field(default=1e-10, description="三分搜索角度容差")
    ternary_max_iter: int = Field(default=200, description="三分搜索最大迭代次数")
    bracket_step: float = Field(default=math.pi / 500, description="可行域扫描步长")
    bracket_reductions: int = Field(default=4, description="扫描步长缩小次数上限")
    whole_circle_grid: int = Field(default=2000, description="整圆网格点数")
    fd_step_phase1: float = Field(default=1e-6, description="阶段一有限差分步长")
    fd_step_phase2: float = Field(default=1e-5, description="阶段二有限差分步长")
    sweep_size: int = Field(default=50, description="每个阶段的随机状态数")
    seed: int = Field(default=42, description="随机种子")
    workers: int = Field(default=1, description="扫描并行进程数")
    debug_mode: bool = Field(default=False, description="调试模式，输出详细日志")

    model_config = ConfigDict(frozen=True)

    @field_validator(
        "tol_speed",
        "tol_root",
        "tol_candidate",
        "dt",
        "horizon",
        "replan_jump_tol",
        "ternary_tol",
        "bracket_step",
        "fd_step_phase1",
        "fd_step_phase2",
    )
    @classmethod
    def validate_positive_float(cls, v: float) -> float:
        """验证浮点数必须为正数"""
        if not (v > 0 and math.isfinite(v)):
            raise ValueError("Value must be positive and finite")
        return v

    @field_validator("ternary_max_iter", "whole_circle_grid", "sweep_size", "workers")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        """验证必须为正数"""
        if v <= 0:
            raise ValueError("Value must be positive")
        return v

    @field_validator("capture_radius", "bracket_reductions")
    @classmethod
    def validate_non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError("Value must be non-negative")
        return v


class ScenarioConfig(BaseModel):
    """场景配置：初始状态、参数、策略与仿真设置"""

    initial_state: GameState
    params: GameParams
    policies: PolicyKind = Field(default_factory=PolicyKind)
    dt: float = Field(default=1e-3, gt=0)
    horizon: float = Field(default=50.0, gt=0)
    replan: ReplanMode = Field(default=ReplanMode.OPEN_LOOP)
    seed: int = Field(default=42)
    sweep_size: int = Field(default=50, gt=0)
    output_path: str = Field(default="results")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_initial_speed(self) -> "ScenarioConfig":
        """初始速度必须满足饱和约束"""
        if not self.initial_state.is_finite():
            raise ValueError("initial state must be finite")
        if self.initial_state.speed_P > self.params.speed_limit:
            raise ValueError(
                f"initial pursuer speed {self.initial_state.speed_P} exceeds "
                f"v_P_max {self.params.v_P_max}"
            )
        return self
