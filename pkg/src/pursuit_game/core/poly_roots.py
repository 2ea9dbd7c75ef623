"""多项式实根与一维标量搜索

- real_roots: 伴随矩阵特征值求根 + Newton 修正
- bisect: 保持变号的二分法
- ternary_search_max / golden_section_max: 单峰函数的一维极大化
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from ..config import resolve_config
from ..exceptions import BracketError, DegeneratePolynomialError
from ..models import PolyCoeffs, SolverConfig

logger = logging.getLogger(__name__)

# 伴随矩阵特征值虚部的接受阈值（重根会分裂出 ~sqrt(eps) 量级的虚部）
_IMAG_TOL = 1e-6
# 相邻根合并阈值
_MERGE_TOL = 1e-8
_NEWTON_STEPS = 3

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

ScalarFunction = Callable[[float], float]


def _as_coeffs(p: Union[PolyCoeffs, Sequence[float]]) -> PolyCoeffs:
    if isinstance(p, PolyCoeffs):
        return p
    return PolyCoeffs(coefficients=tuple(float(c) for c in p))


def _residual_scale(coeffs: np.ndarray, r: float) -> float:
    """求值尺度：max(最大系数, Σ|c_i||r|^k)"""
    natural = float(np.polyval(np.abs(coeffs), abs(r)))
    return max(float(np.max(np.abs(coeffs))), natural)


def _polish(coeffs: np.ndarray, deriv: np.ndarray, r: float) -> float:
    """Newton 修正，只接受使残差下降的步"""
    value = float(np.polyval(coeffs, r))
    for _ in range(_NEWTON_STEPS):
        slope = float(np.polyval(deriv, r))
        if slope == 0.0 or value == 0.0:
            break
        candidate = r - value / slope
        candidate_value = float(np.polyval(coeffs, candidate))
        if abs(candidate_value) >= abs(value):
            break
        r, value = candidate, candidate_value
    return r


def real_roots(
    p: Union[PolyCoeffs, Sequence[float]], config: Optional[SolverConfig] = None
) -> List[float]:
    """返回多项式全部实根（升序，近似重根合并为一个）

    Args:
        p: 系数，最高次在前，次数 1–4
        config: 求解配置，提供 tol_root

    Returns:
        升序实根列表，可能为空

    Raises:
        DegeneratePolynomialError: 零次或全零多项式
    """
    cfg = resolve_config(config)
    poly = _as_coeffs(p)
    normalized = poly.normalized()
    if len(normalized) < 2:
        raise DegeneratePolynomialError(
            f"Polynomial has degree 0 or is identically zero: {poly.coefficients}"
        )

    coeffs = np.array(normalized, dtype=float)
    deriv = np.polyder(coeffs)
    candidates = np.roots(coeffs)

    accepted: List[float] = []
    for z in candidates:
        if abs(z.imag) > _IMAG_TOL * max(1.0, abs(z)):
            continue
        r = _polish(coeffs, deriv, float(z.real))
        residual = abs(float(np.polyval(coeffs, r)))
        if residual > cfg.tol_root * _residual_scale(coeffs, r):
            logger.debug("Discarding near-real root %.12g (residual %.3g)", r, residual)
            continue
        accepted.append(r)

    accepted.sort()
    merged: List[float] = []
    for r in accepted:
        if merged and abs(r - merged[-1]) <= _MERGE_TOL * max(1.0, abs(r)):
            continue
        merged.append(r)
    return merged


def bisect(
    f: ScalarFunction, lo: float, hi: float, tol: float, max_iter: int = 200
) -> float:
    """二分法求 f 在 [lo, hi] 上的零点

    每次迭代区间宽度减半，并始终保持两端异号。

    Raises:
        BracketError: 区间两端不变号或 lo >= hi
    """
    if not lo < hi:
        raise BracketError("Bracket must satisfy lo < hi", lo=lo, hi=hi)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo < 0.0) == (f_hi < 0.0):
        raise BracketError(
            "No sign change on bracket",
            lo=lo,
            hi=hi,
            context={"f_lo": f_lo, "f_hi": f_hi},
        )

    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # 已到浮点分辨率
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ternary_search_max(
    f: ScalarFunction, lo: float, hi: float, tol: float, max_iter: int = 200
) -> float:
    """三分搜索求单峰函数在 [lo, hi] 上的极大点"""
    if hi < lo:
        raise BracketError("Search interval must satisfy lo <= hi", lo=lo, hi=hi)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        third = (hi - lo) / 3.0
        m1, m2 = lo + third, hi - third
        if f(m1) < f(m2):
            lo = m1
        else:
            hi = m2
    return 0.5 * (lo + hi)


def golden_section_max(
    f: ScalarFunction, lo: float, hi: float, tol: float, max_iter: int = 200
) -> float:
    """黄金分割搜索求极大点"""
    if hi < lo:
        raise BracketError("Search interval must satisfy lo <= hi", lo=lo, hi=hi)
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    f_c, f_d = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f_c > f_d:
            hi, d, f_d = d, c, f_c
            c = hi - _GOLDEN * (hi - lo)
            f_c = f(c)
        else:
            lo, c, f_c = c, d, f_d
            d = lo + _GOLDEN * (hi - lo)
            f_d = f(d)
    return 0.5 * (lo + hi)
