"""
Utilities module for qrmax.

Exports the exception hierarchy and error handling helpers.
"""
from utils.error_handler import (
    # Custom exceptions
    QRMaxError,
    DomainError,
    ValidationError,
    SetValidationError,
    ConfigError,
    ScopeError,
    RefinementError,
    BranchSetError,
    OutputError,
    # Error logging
    ErrorContext,
    log_error,
    # Decorator
    safe_execute,
    # Utilities
    exit_code_for,
)

__all__ = [
    # Exceptions
    'QRMaxError',
    'DomainError',
    'ValidationError',
    'SetValidationError',
    'ConfigError',
    'ScopeError',
    'RefinementError',
    'BranchSetError',
    'OutputError',
    # Error logging
    'ErrorContext',
    'log_error',
    # Decorator
    'safe_execute',
    # Utilities
    'exit_code_for',
]
