"""pursuit-game - 速度受限追逃博弈求解器

双积分追击者（加速度、速度均有上界）对单积分逃逸者的最短捕获时间博弈：
解析/数值求解双方最优策略、闭环仿真，以及值函数的 HJI 核验
"""

from .cli import main
from .config import get_config, load_scenario_file, preset_scenario
from .core import (
    GameRunner,
    OpenLoopPlan,
    hji_residual,
    run_game,
    run_verification,
    solve,
    value_gradient,
)
from .exceptions import (
    ConfigurationError,
    PursuitGameException,
    SimulationError,
    SolverError,
    ToleranceError,
    ValidationError,
)
from .models import (
    CaptureSolution,
    GameParams,
    GameState,
    Phase,
    PolicyKind,
    ReplanMode,
    ScenarioConfig,
    SolverConfig,
    SolverResult,
    StrategyCommand,
    Trajectory,
    ValueGradient,
)

# 版本信息
__version__ = "1.0.0"
__title__ = "pursuit-game"
__description__ = "速度受限双积分追击者的追逃博弈求解器"
__license__ = "MIT"

# 公共API
__all__ = [
    # 求解与仿真
    "solve",
    "OpenLoopPlan",
    "GameRunner",
    "run_game",
    # 核验
    "value_gradient",
    "hji_residual",
    "run_verification",
    # 数据模型
    "GameState",
    "GameParams",
    "StrategyCommand",
    "CaptureSolution",
    "SolverResult",
    "Phase",
    "PolicyKind",
    "ReplanMode",
    "Trajectory",
    "ValueGradient",
    "ScenarioConfig",
    "SolverConfig",
    # 配置管理
    "get_config",
    "preset_scenario",
    "load_scenario_file",
    # 异常类
    "PursuitGameException",
    "ValidationError",
    "ConfigurationError",
    "SolverError",
    "SimulationError",
    "ToleranceError",
    # 命令行入口
    "main",
    # 元数据
    "__version__",
]


def get_version() -> str:
    """获取版本号"""
    return __version__
