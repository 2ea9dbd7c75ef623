"""配置管理模块

支持从环境变量、.env 文件加载求解器配置，以及场景文件的读写
"""

import math
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values
from pydantic import ValidationError as PydanticValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigurationError, ValidationError, wrap_exception
from .models import (
    EvaderPolicy,
    GameParams,
    GameState,
    PolicyKind,
    PursuerPolicy,
    ReplanMode,
    ScenarioConfig,
    SolverConfig,
)

ENV_PREFIX = "pursuit_game_"


class Settings(BaseSettings):
    """应用设置类，继承自 Pydantic BaseSettings"""

    # 数值容差
    pursuit_game_tol_speed: float = 1e-9
    pursuit_game_tol_root: float = 1e-10
    pursuit_game_tol_candidate: float = 1e-9

    # 仿真设置
    pursuit_game_capture_radius: float = 1e-3
    pursuit_game_dt: float = 1e-3
    pursuit_game_horizon: float = 50.0
    pursuit_game_replan_jump_tol: float = 0.1

    # 饱和后搜索
    pursuit_game_ternary_tol: float = 1e-10
    pursuit_game_ternary_max_iter: int = 200
    pursuit_game_bracket_step: float = math.pi / 500
    pursuit_game_bracket_reductions: int = 4
    pursuit_game_whole_circle_grid: int = 2000

    # 验证设置
    pursuit_game_fd_step_phase1: float = 1e-6
    pursuit_game_fd_step_phase2: float = 1e-5
    pursuit_game_sweep_size: int = 50
    pursuit_game_seed: int = 42
    pursuit_game_workers: int = 1

    pursuit_game_debug_mode: bool = False

    def to_config(self) -> SolverConfig:
        """转换为 SolverConfig 模型"""
        clean_config = {
            key[len(ENV_PREFIX) :]: value
            for key, value in self.model_dump().items()
            if key.startswith(ENV_PREFIX)
        }
        return SolverConfig(**clean_config)

    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", case_sensitive=False
    )


class ConfigManager:
    """配置管理器"""

    def __init__(self) -> None:
        self._config: Optional[SolverConfig] = None

    def get_config(self) -> SolverConfig:
        """获取配置，优先环境变量，然后使用默认值"""
        if self._config is not None:
            return self._config

        try:
            self._config = Settings().to_config()
            return self._config
        except Exception as e:
            raise ConfigurationError(f"Failed to validate configuration: {e}")

    def reset(self) -> None:
        """清除缓存的配置（测试或环境变量变化后使用）"""
        self._config = None


# 全局配置管理器实例
config_manager = ConfigManager()


def get_config() -> SolverConfig:
    """获取全局配置"""
    return config_manager.get_config()


def resolve_config(config: Optional[SolverConfig]) -> SolverConfig:
    """数值函数的 config 参数为空时回退到全局配置"""
    return config if config is not None else get_config()


# 环境变量检查
def check_environment() -> Dict[str, Any]:
    """检查环境变量配置"""
    return {
        key: value
        for key, value in os.environ.items()
        if key.startswith(ENV_PREFIX.upper())
    }


# ---------------------------------------------------------------------------
# 场景文件
# ---------------------------------------------------------------------------

STATE_KEYS = ("x_P", "y_P", "v_Px", "v_Py", "x_E", "y_E")
PARAM_KEYS = ("a_P_max", "v_P_max", "v_E_max", "tol_speed", "capture_radius")

PRESETS: Dict[str, Dict[str, Any]] = {
    "scenario1": {
        "initial_state": (0.0, 0.0, 0.0, 1.0, 1.0, 1.0),
        "params": {"a_P_max": 1.0, "v_P_max": 10.0, "v_E_max": 0.5},
    },
    "scenario2": {
        "initial_state": (0.0, 0.0, 0.0, 1.0, 5.0, 5.0),
        "params": {"a_P_max": 1.0, "v_P_max": 2.0, "v_E_max": 0.5},
    },
    # 可达集椭圆示例：追击者初速已达 v̄P
    "oval": {
        "initial_state": (0.0, 0.0, 0.0, 4.0, 10.0, 10.0),
        "params": {"a_P_max": 2.0, "v_P_max": 4.0, "v_E_max": 1.0},
    },
}


def preset_scenario(name: str, **overrides: Any) -> ScenarioConfig:
    """按名称构造预置场景，可覆盖 dt / horizon 等顶层字段"""
    if name not in PRESETS:
        raise ValidationError(
            f"Unknown preset '{name}', expected one of {sorted(PRESETS)}",
            field="preset",
        )
    preset = PRESETS[name]
    return build_scenario(
        initial_state=GameState.from_sequence(preset["initial_state"]),
        params=GameParams(**preset["params"]),
        **overrides,
    )


def build_scenario(**fields: Any) -> ScenarioConfig:
    """构造 ScenarioConfig，把 Pydantic 校验错误转换为应用异常"""
    try:
        return ScenarioConfig(**fields)
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid scenario: {_describe(e)}") from e


def scenario_to_flat(scenario: ScenarioConfig) -> Dict[str, str]:
    """展开为 key=value 形式，浮点数用 repr 保证往返一致"""
    flat: Dict[str, str] = {}
    state = scenario.initial_state
    for key in STATE_KEYS:
        flat[key] = repr(getattr(state, key))
    for key in PARAM_KEYS:
        flat[key] = repr(getattr(scenario.params, key))
    flat["pursuer_policy"] = scenario.policies.pursuer.value
    flat["evader_policy"] = scenario.policies.evader.value
    flat["dt"] = repr(scenario.dt)
    flat["horizon"] = repr(scenario.horizon)
    flat["replan"] = scenario.replan.value
    flat["seed"] = str(scenario.seed)
    flat["sweep_size"] = str(scenario.sweep_size)
    flat["output_path"] = scenario.output_path
    return flat


def scenario_from_flat(values: Dict[str, Optional[str]]) -> ScenarioConfig:
    """从 key=value 字典构造场景"""
    missing = [k for k in (*STATE_KEYS, *PARAM_KEYS[:3]) if values.get(k) is None]
    if missing:
        raise ValidationError(f"Missing scenario keys: {', '.join(missing)}")

    known = {*STATE_KEYS, *PARAM_KEYS, "pursuer_policy", "evader_policy", "dt"}
    known |= {"horizon", "replan", "seed", "sweep_size", "output_path"}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValidationError(f"Unknown scenario keys: {', '.join(unknown)}")

    try:
        present = {k: v for k, v in values.items() if v is not None}
        state = GameState(**{k: float(present[k]) for k in STATE_KEYS})
        params = GameParams(
            **{k: float(present[k]) for k in PARAM_KEYS if k in present}
        )
        fields: Dict[str, Any] = {
            "initial_state": state,
            "params": params,
            "policies": PolicyKind(
                pursuer=PursuerPolicy(values.get("pursuer_policy") or "optimal"),
                evader=EvaderPolicy(values.get("evader_policy") or "optimal"),
            ),
        }
        for key, cast in (("dt", float), ("horizon", float), ("seed", int)):
            if key in present:
                fields[key] = cast(present[key])
        if "sweep_size" in present:
            fields["sweep_size"] = int(present["sweep_size"])
        if "replan" in present:
            fields["replan"] = ReplanMode(present["replan"])
        if "output_path" in present:
            fields["output_path"] = present["output_path"]
    except PydanticValidationError as e:
        raise ValidationError(f"Invalid scenario: {_describe(e)}") from e
    except ValueError as e:
        raise ValidationError(f"Invalid scenario value: {e}") from e

    return build_scenario(**fields)


@wrap_exception
def load_scenario_file(path: Union[str, Path]) -> ScenarioConfig:
    """读取 key=value 场景文件"""
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigurationError(
            f"Scenario file not found: {file_path}", config_key="config"
        )
    return scenario_from_flat(dict(dotenv_values(file_path)))


@wrap_exception
def write_scenario_file(scenario: ScenarioConfig, path: Union[str, Path]) -> Path:
    """写出场景文件，读回后与原配置字段一致"""
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# pursuit-game scenario"]
    lines += [f"{key}={value}" for key, value in scenario_to_flat(scenario).items()]
    file_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return file_path


def _describe(error: PydanticValidationError) -> str:
    """把 Pydantic 错误压缩成一行，包含违反约束的字段名"""
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item.get("loc", ())) or "scenario"
        parts.append(f"{location}: {item.get('msg', '')}")
    return "; ".join(parts)


if __name__ == "__main__":
    # 测试配置管理
    print("Current config:", get_config())
    print("Environment variables:", check_environment())
