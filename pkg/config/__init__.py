"""
Configuration module for qrmax.

Exports common constants and settings for easy import.
"""
from config.constants import (
    # Geometry
    MIN_DIMENSION,
    EXACT_TOLERANCE,
    ZORICH_PERIOD,
    # Pullback / Shrink
    DEFAULT_R_MAX,
    DEFAULT_SECTION_SAMPLES,
    SHRINK_ROUNDNESS_BOUND,
    # Growth
    DEFAULT_EPSILON,
    DEFAULT_SCHEDULE_COUNT,
    # Verification
    DEFAULT_SAMPLES_PER_SPHERE,
    ARGMAX_RTOL,
    HAUSDORFF_BOUND_FACTOR,
    DEFAULT_PROBE_RADIUS,
    # Output
    CSV_COLUMNS,
    SIGNIFICANT_DIGITS,
    # Helper functions
    format_decimal,
    default_sphere_samples,
    validate_tolerances,
)

from config.settings import (
    Settings,
    RuntimeSettings,
    LoggingSettings,
    OutputSettings,
    get_settings,
    reload_settings,
)

__all__ = [
    # Geometry
    'MIN_DIMENSION',
    'EXACT_TOLERANCE',
    'ZORICH_PERIOD',
    # Pullback / Shrink
    'DEFAULT_R_MAX',
    'DEFAULT_SECTION_SAMPLES',
    'SHRINK_ROUNDNESS_BOUND',
    # Growth
    'DEFAULT_EPSILON',
    'DEFAULT_SCHEDULE_COUNT',
    # Verification
    'DEFAULT_SAMPLES_PER_SPHERE',
    'ARGMAX_RTOL',
    'HAUSDORFF_BOUND_FACTOR',
    'DEFAULT_PROBE_RADIUS',
    # Output
    'CSV_COLUMNS',
    'SIGNIFICANT_DIGITS',
    # Helpers
    'format_decimal',
    'default_sphere_samples',
    'validate_tolerances',
    # Settings
    'Settings',
    'RuntimeSettings',
    'LoggingSettings',
    'OutputSettings',
    'get_settings',
    'reload_settings',
]
