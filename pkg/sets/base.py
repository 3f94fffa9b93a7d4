"""
Closed-set oracle abstraction for qrmax.

A target set T is a closed subset of R^n that contains the origin and
meets every sphere S(r). Implementations answer distance, membership and
sphere-section queries:
- exact formula sets (full space, rays, spirals, cones, origin spheres)
- point clouds backed by a spatial index
- finite unions of the above

Implementations register themselves with SetFactory at import time.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from config.constants import EXACT_TOLERANCE
from core_geom import PointLike, as_batch, grid_spacing, unit_sphere_grid
from utils.error_handler import ConfigError, DomainError, SetValidationError

logger = logging.getLogger(__name__)


class SetKind(str, Enum):
    FULL_SPACE = "full-space"
    RADIAL_RAY = "radial-ray"
    LOG_SPIRAL = "log-spiral"
    CONE = "cone"
    SPHERE = "sphere"
    POINT_CLOUD = "point-cloud"
    UNION = "union"


class OracleMode(str, Enum):
    EXACT = "exact-formula"
    SAMPLED = "sampled"


@dataclass
class SphereSection:
    """Finite sample of T intersected with S(r)."""
    radius: float
    points: np.ndarray
    resolution: float

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def is_empty(self) -> bool:
        return self.points.shape[0] == 0


@dataclass
class RadiusCheck:
    radius: float
    achieved: float
    allowed: float

    @property
    def passed(self) -> bool:
        return self.achieved <= self.allowed


@dataclass
class ValidationReport:
    """Outcome of validate_meets_every_sphere."""
    checks: List[RadiusCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[RadiusCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "radii_checked": len(self.checks),
            "failures": [
                {"r": c.radius, "achieved": c.achieved, "allowed": c.allowed}
                for c in self.failures
            ],
        }


class ClosedSetOracle(ABC):
    """
    Abstract base class for closed target sets.

    Subclasses implement distance_to_set and _section_points; membership
    and sphere_section build on them.
    """

    kind: SetKind

    def __init__(self, dimension: int, mode: OracleMode = OracleMode.EXACT):
        if dimension < 2:
            raise DomainError(f"dimension must be >= 2, got {dimension}", "ClosedSetOracle")
        self.dimension = dimension
        self.mode = OracleMode(mode)

    @property
    def tolerance(self) -> float:
        """Declared membership tolerance."""
        return EXACT_TOLERANCE

    @abstractmethod
    def distance_to_set(self, x: PointLike):
        """
        Euclidean distance from x to T.

        Args:
            x: point (n,) or batch (N, n)

        Returns:
            float for a single point, array for a batch
        """
        pass

    @abstractmethod
    def _section_points(self, r: float, count: int) -> np.ndarray:
        """Points of T on S(r) for r > 0, using `count` grid samples where needed."""
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Plain-dict description used in report echoes."""
        pass

    def _check_dimension(self, batch: np.ndarray) -> None:
        if batch.shape[1] != self.dimension:
            raise DomainError(
                f"point dimension {batch.shape[1]} does not match set dimension {self.dimension}",
                self.kind.value,
            )

    def membership(self, x: PointLike, tol: Optional[float] = None):
        """Whether x lies in T within tolerance."""
        tol = self.tolerance if tol is None else tol
        batch, single = as_batch(x)
        dist = np.atleast_1d(self.distance_to_set(batch))
        scale = np.maximum(1.0, np.linalg.norm(batch, axis=1)) if self.mode == OracleMode.EXACT else 1.0
        inside = dist <= tol * scale
        return bool(inside[0]) if single else inside

    def contains_origin(self) -> bool:
        return bool(self.membership(np.zeros(self.dimension)))

    def sphere_section(self, r: float, count: int) -> SphereSection:
        """
        Sample T intersected with S(r).

        Raises:
            DomainError: r < 0
            SetValidationError: the intersection is empty
        """
        if r < 0:
            raise DomainError(f"radius must be >= 0, got {r}", "sphere_section")
        resolution = grid_spacing(self.dimension, count, r)
        if r == 0:
            if not self.contains_origin():
                raise SetValidationError("origin is not in the target set", radius=0.0)
            return SphereSection(0.0, np.zeros((1, self.dimension)), 0.0)
        pts = self._section_points(r, count)
        if pts.shape[0] == 0:
            raise SetValidationError(f"target set misses the sphere of radius {r:.6g}", radius=r)
        return SphereSection(r, pts, resolution)


class SetFactory:
    """Registry of closed-set implementations keyed by kind."""

    _kinds: Dict[str, type] = {}

    @classmethod
    def register(cls, kind: str, oracle_class: type) -> None:
        """
        Register a set implementation.

        Args:
            kind: Set kind name
            oracle_class: Class inheriting from ClosedSetOracle with a from_params classmethod
        """
        if not issubclass(oracle_class, ClosedSetOracle):
            raise ValueError(f"{oracle_class} must inherit from ClosedSetOracle")
        cls._kinds[kind] = oracle_class

    @classmethod
    def create(cls, params: Dict[str, Any], dimension: int) -> ClosedSetOracle:
        """
        Build a set from a config block such as {"kind": "radial-ray", "direction": [1, 0]}.

        Raises:
            ConfigError: unknown kind or invalid parameters
        """
        kind = params.get("kind")
        if kind not in cls._kinds:
            available = ", ".join(sorted(cls._kinds))
            raise ConfigError(f"Unknown set kind: {kind}. Available: {available}", fields=["set.kind"])
        return cls._kinds[kind].from_params(params, dimension)

    @classmethod
    def list_kinds(cls) -> List[str]:
        return sorted(cls._kinds)


def validate_meets_every_sphere(
    target: ClosedSetOracle,
    r_grid: Iterable[float],
    samples: int = 2048,
) -> ValidationReport:
    """
    Check that T meets S(r) for every radius of the grid (and r = 0).

    The minimum of distance_to_set over a sample grid of S(r) must vanish
    within the grid spacing plus the set's tolerance.
    """
    radii = sorted(set(float(r) for r in r_grid) | {0.0})
    if radii[0] < 0:
        raise DomainError(f"radius grid contains a negative value {radii[0]}", "validate_meets_every_sphere")
    report = ValidationReport()
    directions = unit_sphere_grid(target.dimension, samples)
    for r in radii:
        if r == 0:
            achieved = float(target.distance_to_set(np.zeros(target.dimension)))
            report.checks.append(RadiusCheck(0.0, achieved, target.tolerance))
            continue
        achieved = float(np.min(target.distance_to_set(r * directions)))
        allowed = grid_spacing(target.dimension, samples, r) + target.tolerance * max(1.0, r)
        report.checks.append(RadiusCheck(r, achieved, allowed))
    if not report.passed:
        worst = max(report.failures, key=lambda c: c.achieved - c.allowed)
        logger.warning(
            f"[SetValidation] {target.kind.value} misses {len(report.failures)} spheres "
            f"(worst r={worst.radius:.6g}, distance {worst.achieved:.3g})"
        )
    return report
