"""pytest配置文件"""

import io
import os

import numpy as np
import pytest
from rich.console import Console

from pursuit_game.config import ENV_PREFIX, config_manager
from pursuit_game.models import GameParams, GameState, SolverConfig


@pytest.fixture(autouse=True)
def clean_config(monkeypatch):
    """每个测试前后清空 PURSUIT_GAME_* 环境变量与缓存配置"""
    for key in list(os.environ):
        if key.upper().startswith(ENV_PREFIX.upper()):
            monkeypatch.delenv(key, raising=False)
    config_manager.reset()
    yield
    config_manager.reset()


@pytest.fixture
def scenario1_state():
    """场景一：追击者静止附近，饱和前捕获"""
    return GameState(x_P=0.0, y_P=0.0, v_Px=0.0, v_Py=1.0, x_E=1.0, y_E=1.0)


@pytest.fixture
def scenario1_params():
    return GameParams(a_P_max=1.0, v_P_max=10.0, v_E_max=0.5)


@pytest.fixture
def scenario2_state():
    """场景二：逃逸者较远，饱和后捕获"""
    return GameState(x_P=0.0, y_P=0.0, v_Px=0.0, v_Py=1.0, x_E=5.0, y_E=5.0)


@pytest.fixture
def scenario2_params():
    return GameParams(a_P_max=1.0, v_P_max=2.0, v_E_max=0.5)


@pytest.fixture
def solver_config():
    """默认求解配置"""
    return SolverConfig()


@pytest.fixture
def rng():
    """固定种子的随机数生成器"""
    return np.random.default_rng(20240611)


@pytest.fixture
def quiet_console():
    """把 Rich 输出写入内存"""
    return Console(file=io.StringIO(), width=120)
