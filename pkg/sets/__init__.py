"""
Closed target sets for qrmax.

Exports the oracle abstraction and registers the implementations.
"""
from sets.base import (
    ClosedSetOracle,
    OracleMode,
    SetFactory,
    SetKind,
    SphereSection,
    ValidationReport,
    validate_meets_every_sphere,
)

# Import implementations to register them
from sets.formula_sets import (
    ConeSet,
    FullSpaceSet,
    LogSpiralSet,
    OriginSphereSet,
    RadialRaySet,
)
from sets.cloud_sets import PointCloudSet, UnionSet

__all__ = [
    'ClosedSetOracle',
    'OracleMode',
    'SetFactory',
    'SetKind',
    'SphereSection',
    'ValidationReport',
    'validate_meets_every_sphere',
    'ConeSet',
    'FullSpaceSet',
    'LogSpiralSet',
    'OriginSphereSet',
    'RadialRaySet',
    'PointCloudSet',
    'UnionSet',
]
