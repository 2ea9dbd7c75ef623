"""随机状态采样与确定性扫描

每个样本使用独立的 numpy.random.Generator，种子为 (seed, index)，
因此结果与并行进程数无关。
"""

import logging
import math
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from ..config import resolve_config
from ..core.phase1 import gamma_quartic_coeffs
from ..core.phase2 import pq_terms
from ..core.solver import solve
from ..exceptions import SolverError
from ..models import GameParams, GameState, Phase, SolverConfig, SolverResult

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# 拒绝靠近切换面、相切退化和可行域边界的状态
MARGIN = 1e-3
# 每个所需样本允许的最多尝试次数
MAX_ATTEMPTS_PER_SAMPLE = 200

Scenario = Tuple[GameState, GameParams]

SCENARIO_KINDS = ("phase1", "phase2", "away")


def scenario_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def draw_scenario(rng: np.random.Generator, kind: str) -> Scenario:
    """按类型抽取一组 (状态, 参数)

    - phase1: v̄P 大、距离近，多数落在饱和前
    - phase2: v̄P 小、距离远，多数落在饱和后
    - away: 追击者初始速度背离逃逸者
    """
    if kind == "phase1":
        v_P = rng.uniform(8.0, 15.0)
        v_E = rng.uniform(0.1, 1.0)
        distance = rng.uniform(0.5, 3.0)
        speed = rng.uniform(0.0, 0.5) * v_P
    elif kind == "phase2":
        v_P = rng.uniform(1.5, 3.0)
        v_E = rng.uniform(0.1, v_P - 0.3)
        distance = rng.uniform(3.0, 8.0)
        speed = rng.uniform(0.0, 0.9) * v_P
    elif kind == "away":
        v_P = rng.uniform(1.5, 4.0)
        v_E = rng.uniform(0.1, v_P - 0.2)
        distance = rng.uniform(0.5, 8.0)
        speed = rng.uniform(0.2, 0.95) * v_P
    else:
        raise ValueError(f"Unknown scenario kind '{kind}', expected {SCENARIO_KINDS}")

    a_P = rng.uniform(0.5, 2.0)
    x_P, y_P = rng.uniform(-5.0, 5.0, size=2)
    bearing = rng.uniform(0.0, 2.0 * math.pi)
    if kind == "away":
        heading = bearing + math.pi + rng.uniform(-math.pi / 3, math.pi / 3)
    else:
        heading = rng.uniform(0.0, 2.0 * math.pi)

    state = GameState(
        x_P=float(x_P),
        y_P=float(y_P),
        v_Px=float(speed * math.cos(heading)),
        v_Py=float(speed * math.sin(heading)),
        x_E=float(x_P + distance * math.cos(bearing)),
        y_E=float(y_P + distance * math.sin(bearing)),
    )
    params = GameParams(a_P_max=float(a_P), v_P_max=float(v_P), v_E_max=float(v_E))
    return state, params


def well_conditioned(
    state: GameState,
    params: GameParams,
    phase: Phase,
    config: Optional[SolverConfig] = None,
) -> Optional[SolverResult]:
    """求解并检查状态离切换面、相切退化和可行域边界足够远

    Returns:
        满足条件时返回求解结果，否则返回 None
    """
    try:
        result = solve(state, params, config)
    except SolverError as e:
        logger.debug("Rejected sample %s: %s", state, e)
        return None

    sol = result.solution
    if sol.phase is not phase:
        return None
    if abs(sol.t_f - sol.t_theta_star) <= MARGIN * max(1.0, sol.t_f):
        return None
    if state.speed_P >= params.v_P_max * (1.0 - MARGIN):
        return None
    if phase is Phase.PRE_SATURATION:
        if sol.t_f <= params.inner_time + MARGIN:
            return None
        # Γ 在 t_f 处的斜率过小说明接近重根
        coeffs = np.array(gamma_quartic_coeffs(state, params).coefficients)
        slope = np.polyder(coeffs)
        if abs(np.polyval(slope, sol.t_f)) <= MARGIN * np.polyval(
            np.abs(slope), sol.t_f
        ):
            return None
    else:
        if sol.t_theta_star <= MARGIN:
            return None
        terms = pq_terms(state, sol.theta_P_star, params)
        w = terms.h**2 - params.delta * terms.q_norm_sq
        if w <= MARGIN * max(terms.h**2, 1.0):
            return None
    return result


def sample_states(
    phase: Phase,
    n: int,
    seed: int,
    config: Optional[SolverConfig] = None,
) -> List[Scenario]:
    """按 index 顺序抽取 n 个指定阶段的良态样本

    Raises:
        SolverError: 尝试次数耗尽
    """
    cfg = resolve_config(config)
    kind = "phase1" if phase is Phase.PRE_SATURATION else "phase2"
    # 两个阶段使用不同的种子流
    stream = 0 if phase is Phase.PRE_SATURATION else 1
    samples: List[Scenario] = []
    for index in range(n * MAX_ATTEMPTS_PER_SAMPLE):
        if len(samples) >= n:
            break
        state, params = draw_scenario(scenario_rng(seed, 2 * index + stream), kind)
        if well_conditioned(state, params, phase, cfg) is not None:
            samples.append((state, params))
    else:
        if len(samples) < n:
            raise SolverError(
                f"Sampler found only {len(samples)} of {n} {phase.value} states",
                context={"seed": seed},
            )
    logger.debug("Sampled %d %s states (seed %d)", len(samples), phase.value, seed)
    return samples


def run_sweep(
    func: Callable[[T], R], items: Sequence[T], workers: int = 1
) -> List[R]:
    """对 items 逐个调用 func，workers > 1 时使用进程池，结果保持输入顺序

    func 必须是模块级函数才能被子进程序列化。
    """
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with Pool(processes=min(workers, len(items))) as pool:
        return pool.map(func, items)
