"""异常定义模块

定义求解器、仿真与验证流程专用的异常类，并提供与命令行退出码的映射
"""

from functools import wraps
from typing import TYPE_CHECKING, Any, Callable, Dict, Optional, TypeVar, cast

if TYPE_CHECKING:
    from .models import Trajectory

F = TypeVar("F", bound=Callable[..., Any])


class PursuitGameException(Exception):
    """pursuit-game 基础异常类"""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}

    def _extra_parts(self) -> list:
        return []

    def __str__(self) -> str:
        parts = [self.message, *self._extra_parts()]
        if self.context:
            context_str = ", ".join(f"{k}={v}" for k, v in self.context.items())
            parts.append(f"Context: {context_str}")
        return " | ".join(parts)


class ValidationError(PursuitGameException):
    """参数或配置验证异常"""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, context)
        self.field = field

    def _extra_parts(self) -> list:
        return [f"Field: {self.field}"] if self.field else []


class ConfigurationError(PursuitGameException):
    """配置异常"""

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        config_value: Optional[Any] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, context)
        self.config_key = config_key
        self.config_value = config_value

    def _extra_parts(self) -> list:
        parts = []
        if self.config_key:
            parts.append(f"Key: {self.config_key}")
        if self.config_value is not None:
            parts.append(f"Value: {self.config_value}")
        return parts


class SolverError(PursuitGameException):
    """数值求解异常的公共基类"""

    pass


class InvalidStateError(SolverError):
    """状态非法：非有限值，或追击者速度超过上限"""

    pass


class DegeneratePolynomialError(SolverError):
    """多项式退化（零次或全零系数）"""

    pass


class BracketError(SolverError):
    """二分法区间两端没有变号"""

    def __init__(
        self,
        message: str,
        lo: Optional[float] = None,
        hi: Optional[float] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, context)
        self.lo = lo
        self.hi = hi

    def _extra_parts(self) -> list:
        if self.lo is None or self.hi is None:
            return []
        return [f"Bracket: [{self.lo}, {self.hi}]"]


class DegenerateTangencyError(SolverError):
    """切点公式分母趋于零（两圆半径相等）"""

    pass


class InfeasibleHeadingError(SolverError):
    """给定加速度方向下捕获时间方程无正实根"""

    def __init__(
        self,
        message: str,
        theta_P: Optional[float] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, context)
        self.theta_P = theta_P

    def _extra_parts(self) -> list:
        return [f"theta_P: {self.theta_P}"] if self.theta_P is not None else []


class WrongPhaseError(SolverError):
    """在错误的阶段调用了公式（例如饱和前调用饱和后公式）"""

    pass


class UniformSignError(SolverError):
    """可行性函数在整个周期上不变号"""

    def __init__(
        self,
        message: str,
        everywhere_positive: bool = False,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, context)
        self.everywhere_positive = everywhere_positive

    def _extra_parts(self) -> list:
        sign = "positive" if self.everywhere_positive else "negative"
        return [f"Sign: everywhere {sign}"]


class SingularDenominatorError(SolverError):
    """值函数梯度的分母奇异"""

    pass


class FeasibilityBoundaryError(SolverError):
    """状态处于可行域边界 g=0 上，梯度无定义"""

    pass


class NoCrossingError(SolverError):
    """状态族没有穿越策略切换面"""

    pass


class SimulationError(PursuitGameException):
    """仿真过程中求解失败，附带已生成的部分轨迹"""

    def __init__(
        self,
        message: str,
        trajectory: Optional["Trajectory"] = None,
        cause: Optional[BaseException] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, context)
        self.trajectory = trajectory
        self.cause = cause

    def _extra_parts(self) -> list:
        parts = []
        if self.trajectory is not None:
            parts.append(f"Samples: {len(self.trajectory.samples)}")
        if self.cause is not None:
            parts.append(f"Cause: {self.cause}")
        return parts


class ToleranceError(PursuitGameException):
    """验证结果超出容差"""

    def __init__(
        self,
        message: str,
        check: Optional[str] = None,
        worst_state: Optional[Any] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, context)
        self.check = check
        self.worst_state = worst_state

    def _extra_parts(self) -> list:
        parts = []
        if self.check:
            parts.append(f"Check: {self.check}")
        if self.worst_state is not None:
            parts.append(f"State: {self.worst_state}")
        return parts


# 异常类型到命令行退出码的映射
EXIT_CODES = {
    ValidationError: 1,
    ConfigurationError: 1,
    ToleranceError: 2,
    SolverError: 3,
    SimulationError: 3,
}


def exit_code_for(error: BaseException) -> int:
    """根据异常类型返回命令行退出码"""
    for exc_type, code in EXIT_CODES.items():
        if isinstance(error, exc_type):
            return code
    return 3


def wrap_exception(func: F) -> F:
    """异常包装装饰器 - 将标准异常转换为应用异常"""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except PursuitGameException:
            raise
        except (IOError, OSError) as e:
            raise ConfigurationError(f"File operation failed: {e}") from e
        except ArithmeticError as e:
            raise SolverError(f"Arithmetic error: {e}") from e
        except ValueError as e:
            raise ValidationError(f"Validation error: {e}") from e
        except Exception as e:
            raise PursuitGameException(f"Unexpected error: {e}") from e

    return cast(F, wrapper)
