"""测试多项式求根与一维搜索"""

import math

import numpy as np
import pytest

from pursuit_game.core.poly_roots import (
    bisect,
    golden_section_max,
    real_roots,
    ternary_search_max,
)
from pursuit_game.exceptions import BracketError, DegeneratePolynomialError
from pursuit_game.models import PolyCoeffs


class TestRealRoots:
    """测试实根提取"""

    def test_quadratic(self):
        assert real_roots([1.0, -3.0, 2.0]) == pytest.approx([1.0, 2.0])

    def test_quartic_with_four_roots(self):
        """(t−1)(t−2)(t−3)(t−4)"""
        roots = real_roots([1.0, -10.0, 35.0, -50.0, 24.0])
        assert roots == pytest.approx([1.0, 2.0, 3.0, 4.0], abs=1e-10)

    def test_known_roots_with_negative_leading(self):
        expected = [0.3, 1.7, 2.9, 4.4]
        coeffs = -0.25 * np.poly(expected)
        roots = real_roots(PolyCoeffs(coefficients=tuple(coeffs)))
        assert roots == pytest.approx(expected, abs=1e-9)

    def test_no_real_roots(self):
        assert real_roots([1.0, 0.0, 1.0]) == []

    def test_complex_pair_dropped(self):
        """(t² + 1)(t − 2)"""
        assert real_roots([1.0, -2.0, 1.0, -2.0]) == pytest.approx([2.0])

    def test_double_root(self):
        """重根可能分裂成相距 ~sqrt(eps) 的一对，不能丢失"""
        roots = real_roots([1.0, -2.0, 1.0])
        assert 1 <= len(roots) <= 2
        assert roots == pytest.approx([1.0] * len(roots), abs=1e-7)

    def test_leading_zeros(self):
        assert real_roots([0.0, 0.0, 1.0, -2.0]) == pytest.approx([2.0])

    @pytest.mark.parametrize("coeffs", [[3.0], [0.0, 0.0, 0.0]])
    def test_degenerate(self, coeffs):
        with pytest.raises(DegeneratePolynomialError):
            real_roots(coeffs)

    def test_roots_satisfy_polynomial(self, rng):
        """随机四次多项式的根残差很小"""
        for _ in range(50):
            coeffs = rng.uniform(-3.0, 3.0, size=5)
            for r in real_roots(coeffs):
                scale = np.polyval(np.abs(coeffs), abs(r))
                assert abs(np.polyval(coeffs, r)) <= 1e-9 * max(scale, 1.0)


class TestBisect:
    """测试二分法"""

    def test_sqrt_two(self):
        root = bisect(lambda x: x * x - 2.0, 0.0, 2.0, 1e-13)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_decreasing_function(self):
        root = bisect(lambda x: 1.0 - x, 0.0, 3.0, 1e-12)
        assert root == pytest.approx(1.0, abs=1e-11)

    def test_endpoint_zero(self):
        assert bisect(lambda x: x, 0.0, 1.0, 1e-12) == 0.0

    def test_no_sign_change(self):
        with pytest.raises(BracketError) as exc_info:
            bisect(lambda x: x * x + 1.0, -1.0, 1.0, 1e-12)
        assert exc_info.value.lo == -1.0

    def test_empty_bracket(self):
        with pytest.raises(BracketError):
            bisect(lambda x: x, 1.0, 1.0, 1e-12)


class TestUnimodalSearch:
    """测试单峰函数极大化"""

    @pytest.mark.parametrize("search", [ternary_search_max, golden_section_max])
    def test_parabola(self, search):
        peak = search(lambda x: -((x - 1.3) ** 2), -3.0, 4.0, 1e-10)
        assert peak == pytest.approx(1.3, abs=1e-6)

    @pytest.mark.parametrize("search", [ternary_search_max, golden_section_max])
    def test_peak_at_boundary(self, search):
        peak = search(lambda x: x, 0.0, 2.0, 1e-10)
        assert peak == pytest.approx(2.0, abs=1e-8)

    def test_degenerate_interval(self):
        assert ternary_search_max(lambda x: x, 1.0, 1.0, 1e-10) == 1.0

    def test_reversed_interval(self):
        with pytest.raises(BracketError):
            ternary_search_max(lambda x: x, 2.0, 1.0, 1e-10)
