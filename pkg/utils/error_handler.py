"""
Standardized error handling for qrmax.

Provides consistent error handling patterns across all modules:
- Custom exceptions
- Error logging utilities
- A safe-execution decorator for optional artifacts
"""
import logging
import sys
import traceback
from dataclasses import dataclass
from functools import wraps
from typing import Any, Callable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

# Type variable for the decorator
F = TypeVar('F', bound=Callable[..., Any])


# =============================================================================
# Custom Exceptions
# =============================================================================

class QRMaxError(Exception):
    """Base exception for all qrmax errors."""

    def __init__(self, message: str, module: str = "", context: Optional[dict] = None):
        super().__init__(message)
        self.module = module
        self.context = context or {}

    def __str__(self):
        if self.module:
            return f"[{self.module}] {super().__str__()}"
        return super().__str__()


class DomainError(QRMaxError):
    """Argument outside the domain of an operation."""

    def __init__(self, message: str, operation: str = ""):
        super().__init__(message, module=operation or "Domain")
        self.operation = operation


class ValidationError(QRMaxError):
    """Exception raised for invalid data."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message, module="Validation")
        self.field = field


class SetValidationError(ValidationError):
    """A closed set misses a sphere it is required to meet."""

    def __init__(self, message: str, radius: float, achieved: Optional[float] = None):
        super().__init__(message, field="set")
        self.module = "SetValidation"
        self.radius = radius
        self.achieved = achieved


class ConfigError(QRMaxError):
    """Configuration schema errors, collected per field."""

    def __init__(self, message: str, fields: Optional[List[str]] = None):
        super().__init__(message, module="Config")
        self.fields = list(fields or [])

    def __str__(self):
        base = super().__str__()
        if self.fields:
            return f"{base} (fields: {', '.join(self.fields)})"
        return base


class ScopeError(QRMaxError):
    """Requested construction lies outside the supported scope."""

    def __init__(self, message: str, feature: str = ""):
        super().__init__(message, module=feature or "Scope")
        self.feature = feature


class RefinementError(QRMaxError):
    """Adaptive refinement ran out of depth."""

    def __init__(self, message: str, depth: int = 0):
        super().__init__(message, module="Refinement")
        self.depth = depth


class BranchSetError(RefinementError):
    """A path runs through the image of the branch set."""

    def __init__(self, message: str, point: Optional[Any] = None):
        super().__init__(message)
        self.module = "BranchSet"
        self.point = point


class OutputError(QRMaxError):
    """Failure writing an output artifact."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message, module="Output", context={"path": path})
        self.path = path


# =============================================================================
# Error Logging Utilities
# =============================================================================

@dataclass
class ErrorContext:
    """Context information for error logging."""
    module: str
    function: str
    error: Exception
    traceback_str: Optional[str] = None
    extra_info: Optional[dict] = None


def log_error(error: Exception, level: int = logging.ERROR) -> ErrorContext:
    """
    Log an error with context information.

    Args:
        error: The exception to log
        level: Logging level (default: ERROR)

    Returns:
        ErrorContext with details about the error
    """
    exc_type, exc_value, exc_traceback = sys.exc_info()

    context = ErrorContext(
        module=getattr(error, 'module', 'Unknown'),
        function=_get_function_name(),
        error=error,
        traceback_str=''.join(traceback.format_exception(exc_type, exc_value, exc_traceback)) if exc_traceback else None,
        extra_info=getattr(error, 'context', None)
    )

    logger.log(
        level,
        f"[{context.module}] {type(error).__name__}: {str(error)}",
        exc_info=exc_traceback is not None and level >= logging.ERROR
    )

    return context


# =============================================================================
# Error Handling Decorator
# =============================================================================

def safe_execute(
    default_return: Any = None,
    log_errors: bool = True
) -> Callable[[F], F]:
    """
    Decorator that safely executes a function, catching all exceptions.

    Args:
        default_return: Value to return on exception
        log_errors: Whether to log errors

    Returns:
        Decorated function
    """
    def decorator(func: F) -> F:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                if log_errors:
                    logger.warning(f"[{func.__module__}] {func.__name__} failed: {str(e)}")
                return default_return
        return wrapper
    return decorator


# =============================================================================
# Utility Functions
# =============================================================================

def _get_function_name() -> str:
    """Get the name of the calling function."""
    return sys._getframe(2).f_code.co_name if sys._getframe(2) else "unknown"


def exit_code_for(error: Exception) -> int:
    """
    Map an exception to a CLI exit status.

    Configuration, scope, validation and output problems exit with 2;
    anything else is an internal failure and exits with 3.
    """
    if isinstance(error, (ConfigError, ScopeError, ValidationError, OutputError, DomainError)):
        return 2
    return 3
