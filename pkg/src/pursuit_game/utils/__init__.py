"""工具模块

- angles: 角度归一化与方向计算
- sampling: 随机状态采样与确定性扫描
"""

from .angles import TWO_PI, angle_difference, heading_to, normalize_angle, unit_vector

__all__ = [
    "TWO_PI",
    "angle_difference",
    "heading_to",
    "normalize_angle",
    "unit_vector",
]
