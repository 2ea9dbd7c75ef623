"""角度工具函数"""

import math
from typing import Tuple

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """归一化到 [0, 2π)"""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod 对 -1e-17 之类的小负数会得到 2π 本身
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


def angle_difference(a: float, b: float) -> float:
    """a − b 折算到 [−π, π)"""
    return (a - b + math.pi) % TWO_PI - math.pi


def unit_vector(theta: float) -> Tuple[float, float]:
    return (math.cos(theta), math.sin(theta))


def heading_to(x0: float, y0: float, x1: float, y1: float) -> float:
    """从 (x0, y0) 指向 (x1, y1) 的方向角，两点重合时返回 0"""
    dx, dy = x1 - x0, y1 - y0
    if dx == 0.0 and dy == 0.0:
        return 0.0
    return normalize_angle(math.atan2(dy, dx))
