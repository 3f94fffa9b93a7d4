"""
Shared constants for qrmax.

Centralizes tolerances, bounds and defaults used by the geometry, map
construction and verification modules so that tests, the CLI and the
property suites agree on the same numbers.
"""
import math
from typing import Tuple


# =============================================================================
# Geometry
# =============================================================================
MIN_DIMENSION = 2
EXACT_TOLERANCE = 1e-12        # membership tolerance for exact-formula sets

# Zorich beam cells have side 2 and the group translations have period 4
ZORICH_PERIOD = 4.0


# =============================================================================
# Pullback / Shrink
# =============================================================================
DEFAULT_R_MAX = 9.0            # search radius cap for pullback distances
DEFAULT_SECTION_SAMPLES = 512
DEFAULT_PULLBACK_RADII = (0.05, 40.0, 400)   # geometric min, max, count

SHRINK_ROUNDNESS_BOUND = 3.05
SHRINK_UPPER_STRETCH = 1.5     # L_f(x, r) / r
SHRINK_LOWER_STRETCH = 0.5     # l_f(x, r) / r
LIPSCHITZ_SLACK = 1e-9


# =============================================================================
# Path lifting
# =============================================================================
LIFT_MAX_DEPTH = 24
LIFT_AMBIGUITY_RATIO = 0.5     # best candidate must beat runner-up by this factor
LIFT_MAX_STEP = 1.0            # lifted step length limit (quarter period)
BRANCH_TOLERANCE = 1e-9


# =============================================================================
# Growth / Transcendental model
# =============================================================================
DEFAULT_EPSILON = 0.5
DEFAULT_SCHEDULE_COUNT = 5
BLEND_DISTORTION_BOUND = 100.0
MAX_SCHEDULE_COUNT = 12          # explicit lists; exp-exp overflows past 6


# =============================================================================
# Verification
# =============================================================================
DEFAULT_SAMPLES_PER_SPHERE = 2048
DEFAULT_REFINE_STARTS = 4
DEFAULT_REFINE_ITERATIONS = 200
ARGMAX_RTOL = 1e-9
HAUSDORFF_BOUND_FACTOR = 2.0
DISTORTION_EXCLUSION = 1e-6
DEFAULT_PROBE_RADIUS = 1e-3
DEFAULT_DISTORTION_SAMPLES = 1000
DEFAULT_PROPERTY_SAMPLES = 10000
DEFAULT_LIPSCHITZ_PAIRS = 10000
DISTORTION_QUANTILES: Tuple[float, ...] = (0.5, 0.9, 0.99, 1.0)
MODULUS_RTOL = 1e-9
IDENTITY_RTOL = 1e-9
DEGENERATE_SINGULAR_RATIO = 1e-14


# =============================================================================
# Output
# =============================================================================
CSV_COLUMNS: Tuple[str, ...] = ("r", "M_est", "argmax_count", "hausdorff", "in_exceptional")
SIGNIFICANT_DIGITS = 12
DEFAULT_OUTPUT_PREFIX = "qrmax"
PLOT_WIDTH = 800
PLOT_HEIGHT = 800
PLOT_TARGET_COLOR = "#1f77b4"
PLOT_MMS_COLOR = "#d62728"
PLOT_TARGET_RGB = (31, 119, 180)
PLOT_MMS_RGB = (214, 39, 40)


# =============================================================================
# Helper Functions
# =============================================================================

def format_decimal(value: float) -> str:
    """Format a float with the report precision (12 significant digits)."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def default_sphere_samples(dimension: int) -> int:
    """Default number of sphere samples for a dimension."""
    if dimension == 2:
        return DEFAULT_SAMPLES_PER_SPHERE
    if dimension == 3:
        return 4096
    return 8192


def validate_tolerances() -> bool:
    """
    Sanity check the tolerance table.

    Returns:
        True if the bounds are mutually consistent
    """
    if not 0 < ARGMAX_RTOL < 1e-3:
        return False
    if SHRINK_UPPER_STRETCH / SHRINK_LOWER_STRETCH > SHRINK_ROUNDNESS_BOUND:
        return False
    return 0 < DEFAULT_EPSILON < 1 and DEFAULT_R_MAX > 0
