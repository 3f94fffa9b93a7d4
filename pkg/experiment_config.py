"""
Experiment configuration.

One JSON file describes an experiment: dimension, seed, target set, map,
verification plan and output paths. Parsing collects every schema error
and raises a single ConfigError that lists the offending fields.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from config.constants import (
    ARGMAX_RTOL,
    DEFAULT_DISTORTION_SAMPLES,
    DEFAULT_EPSILON,
    DEFAULT_LIPSCHITZ_PAIRS,
    DEFAULT_OUTPUT_PREFIX,
    DEFAULT_PROBE_RADIUS,
    DEFAULT_PROPERTY_SAMPLES,
    DEFAULT_PULLBACK_RADII,
    DEFAULT_R_MAX,
    DEFAULT_REFINE_ITERATIONS,
    DEFAULT_REFINE_STARTS,
    DEFAULT_SCHEDULE_COUNT,
    DEFAULT_SECTION_SAMPLES,
    HAUSDORFF_BOUND_FACTOR,
    MIN_DIMENSION,
    default_sphere_samples,
)
from utils.error_handler import ConfigError, ScopeError

logger = logging.getLogger(__name__)

MAP_TYPES = ("polynomial", "transcendental", "building-block")
BUILDING_BLOCKS = ("identity", "zorich", "power", "shrink", "h1", "dtilde", "conjugated-square")
SCHEDULE_RULES = ("exp-exp", "explicit")
DISTORTION_MODES = ("jacobian", "roundness")


class _Errors:
    """Collects (field, message) pairs while a config is parsed."""

    def __init__(self):
        self.items: List[Tuple[str, str]] = []

    def add(self, name: str, message: str) -> None:
        self.items.append((name, message))

    def number(self, data: Dict[str, Any], key: str, name: str, default: float) -> float:
        value = data.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.add(name, f"expected a finite number, got {value!r}")
            return default
        return float(value)

    def integer(self, data: Dict[str, Any], key: str, name: str, default: Optional[int]) -> Optional[int]:
        value = data.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            self.add(name, f"expected an integer, got {value!r}")
            return default
        return value

    def numbers(self, data: Dict[str, Any], key: str, name: str) -> List[float]:
        value = data.get(key, [])
        if not isinstance(value, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) for v in value
        ):
            self.add(name, f"expected a list of finite numbers, got {value!r}")
            return []
        return [float(v) for v in value]

    def section(self, data: Dict[str, Any], key: str) -> Dict[str, Any]:
        value = data.get(key, {})
        if not isinstance(value, dict):
            self.add(key, "expected an object")
            return {}
        return value

    def raise_if_any(self) -> None:
        if self.items:
            message = "; ".join(f"{name}: {msg}" for name, msg in self.items)
            raise ConfigError(f"invalid experiment config ({message})", fields=[name for name, _ in self.items])


# =============================================================================
# Sections
# =============================================================================

@dataclass
class GridSpec:
    """Radius grid {spacing, min, max, count}."""
    spacing: str = "geometric"
    min: float = 0.1
    max: float = 20.0
    count: int = 200

    @classmethod
    def parse(cls, data: Dict[str, Any], name: str, errors: _Errors, default: 'GridSpec') -> 'GridSpec':
        spec = cls(
            spacing=data.get("spacing", default.spacing),
            min=errors.number(data, "min", f"{name}.min", default.min),
            max=errors.number(data, "max", f"{name}.max", default.max),
            count=errors.integer(data, "count", f"{name}.count", default.count),
        )
        if spec.spacing not in ("linear", "geometric"):
            errors.add(f"{name}.spacing", f"expected linear or geometric, got {spec.spacing!r}")
        if spec.count < 1:
            errors.add(f"{name}.count", "grid must contain at least one radius")
        if spec.min < 0 or spec.max < spec.min:
            errors.add(f"{name}.min", "need 0 <= min <= max")
        elif spec.spacing == "geometric" and spec.min <= 0:
            errors.add(f"{name}.min", "geometric grids need min > 0")
        return spec

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        if self.spacing == "geometric":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    def to_dict(self) -> Dict[str, Any]:
        return {"spacing": self.spacing, "min": self.min, "max": self.max, "count": self.count}


@dataclass
class PullbackSpec:
    mode: Optional[str] = None
    r_max: float = DEFAULT_R_MAX
    section_samples: int = DEFAULT_SECTION_SAMPLES
    radii: GridSpec = field(default_factory=lambda: GridSpec(
        "geometric", DEFAULT_PULLBACK_RADII[0], DEFAULT_PULLBACK_RADII[1], DEFAULT_PULLBACK_RADII[2]
    ))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "r_max": self.r_max,
            "section_samples": self.section_samples,
            "radii": self.radii.to_dict(),
        }


@dataclass
class ScheduleSpec:
    rule: str = "exp-exp"
    count: int = DEFAULT_SCHEDULE_COUNT
    radii: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        if self.rule == "explicit":
            return {"rule": self.rule, "radii": list(self.radii)}
        return {"rule": self.rule, "count": self.count}


@dataclass
class MapSpec:
    type: str = "polynomial"
    degree: int = 2
    epsilon: float = DEFAULT_EPSILON
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    block: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"type": self.type}
        if self.type == "polynomial" or self.block == "power":
            out["degree"] = self.degree
        if self.type == "transcendental" or self.block == "dtilde":
            out["epsilon"] = self.epsilon
            out["schedule"] = self.schedule.to_dict()
        if self.type == "building-block":
            out["block"] = self.block
        return out


@dataclass
class DistortionSpec:
    samples: int = DEFAULT_DISTORTION_SAMPLES
    probe_radius: float = DEFAULT_PROBE_RADIUS
    mode: str = "jacobian"

    def to_dict(self) -> Dict[str, Any]:
        return {"samples": self.samples, "probe_radius": self.probe_radius, "mode": self.mode}


@dataclass
class PlanSpec:
    r_grid: GridSpec = field(default_factory=GridSpec)
    samples_per_sphere: int = 2048
    refine_starts: int = DEFAULT_REFINE_STARTS
    refine_iterations: int = DEFAULT_REFINE_ITERATIONS
    argmax_rtol: float = ARGMAX_RTOL
    bound_factor: float = HAUSDORFF_BOUND_FACTOR
    exclude_exceptional: bool = True
    distortion: DistortionSpec = field(default_factory=DistortionSpec)
    property_samples: int = DEFAULT_PROPERTY_SAMPLES
    lipschitz_pairs: int = DEFAULT_LIPSCHITZ_PAIRS
    preimage_targets: int = 100

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r_grid": self.r_grid.to_dict(),
            "samples_per_sphere": self.samples_per_sphere,
            "refine_starts": self.refine_starts,
            "refine_iterations": self.refine_iterations,
            "argmax_rtol": self.argmax_rtol,
            "bound_factor": self.bound_factor,
            "exclude_exceptional": self.exclude_exceptional,
            "distortion": self.distortion.to_dict(),
            "property_samples": self.property_samples,
            "lipschitz_pairs": self.lipschitz_pairs,
            "preimage_targets": self.preimage_targets,
        }


@dataclass
class OutputSpec:
    dir: str = ""  # empty: QRMAX_OUTPUT_DIR
    prefix: str = DEFAULT_OUTPUT_PREFIX

    def to_dict(self) -> Dict[str, Any]:
        return {"dir": self.dir, "prefix": self.prefix}


# =============================================================================
# Experiment config
# =============================================================================

@dataclass
class ExperimentConfig:
    dimension: int
    seed: int
    set: Dict[str, Any]
    pullback: PullbackSpec = field(default_factory=PullbackSpec)
    map: MapSpec = field(default_factory=MapSpec)
    plan: PlanSpec = field(default_factory=PlanSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    source: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """Parse and validate; raises ConfigError listing every bad field."""
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object", fields=["<root>"])
        errors = _Errors()

        dimension = errors.integer(data, "dimension", "dimension", None)
        if dimension is None:
            errors.add("dimension", "required")
            dimension = MIN_DIMENSION
        elif dimension < MIN_DIMENSION:
            errors.add("dimension", f"must be >= {MIN_DIMENSION}")
        seed = errors.integer(data, "seed", "seed", None)
        if seed is None:
            errors.add("seed", "required (runs are seeded explicitly)")
            seed = 0

        target = errors.section(data, "set")
        if not target.get("kind"):
            errors.add("set.kind", "required")

        pb = errors.section(data, "pullback")
        pullback = PullbackSpec(
            mode=pb.get("mode"),
            r_max=errors.number(pb, "r_max", "pullback.r_max", DEFAULT_R_MAX),
            section_samples=errors.integer(pb, "section_samples", "pullback.section_samples", DEFAULT_SECTION_SAMPLES),
        )
        pullback.radii = GridSpec.parse(errors.section(pb, "radii"), "pullback.radii", errors, PullbackSpec().radii)
        if pullback.mode not in (None, "analytic", "sampled"):
            errors.add("pullback.mode", f"expected analytic or sampled, got {pullback.mode!r}")
        if pullback.r_max <= 0:
            errors.add("pullback.r_max", "must be positive")

        mp = errors.section(data, "map")
        sched = errors.section(mp, "schedule")
        schedule = ScheduleSpec(
            rule=sched.get("rule", "exp-exp"),
            count=errors.integer(sched, "count", "map.schedule.count", DEFAULT_SCHEDULE_COUNT),
            radii=errors.numbers(sched, "radii", "map.schedule.radii"),
        )
        map_spec = MapSpec(
            type=mp.get("type", "polynomial"),
            degree=errors.integer(mp, "degree", "map.degree", 2),
            epsilon=errors.number(mp, "epsilon", "map.epsilon", DEFAULT_EPSILON),
            schedule=schedule,
            block=mp.get("block"),
        )
        if map_spec.type not in MAP_TYPES:
            errors.add("map.type", f"expected one of {', '.join(MAP_TYPES)}")
        if map_spec.degree < 2:
            errors.add("map.degree", "degree must be an integer >= 2")
        if not 0 < map_spec.epsilon < 1:
            errors.add("map.epsilon", "must lie in (0, 1)")
        if schedule.rule not in SCHEDULE_RULES:
            errors.add("map.schedule.rule", f"expected one of {', '.join(SCHEDULE_RULES)}")
        elif schedule.rule == "explicit" and len(schedule.radii) < 2:
            errors.add("map.schedule.radii", "explicit schedules need at least two radii")
        if map_spec.type == "building-block" and map_spec.block not in BUILDING_BLOCKS:
            errors.add("map.block", f"expected one of {', '.join(BUILDING_BLOCKS)}")

        pl = errors.section(data, "plan")
        dist = errors.section(pl, "distortion")
        distortion = DistortionSpec(
            samples=errors.integer(dist, "samples", "plan.distortion.samples", DEFAULT_DISTORTION_SAMPLES),
            probe_radius=errors.number(dist, "probe_radius", "plan.distortion.probe_radius", DEFAULT_PROBE_RADIUS),
            mode=dist.get("mode", "jacobian"),
        )
        if distortion.mode not in DISTORTION_MODES:
            errors.add("plan.distortion.mode", f"expected one of {', '.join(DISTORTION_MODES)}")
        if distortion.probe_radius <= 0:
            errors.add("plan.distortion.probe_radius", "must be positive")
        plan = PlanSpec(
            r_grid=GridSpec.parse(errors.section(pl, "r_grid"), "plan.r_grid", errors, GridSpec()),
            samples_per_sphere=errors.integer(pl, "samples_per_sphere", "plan.samples_per_sphere",
                                              default_sphere_samples(dimension)),
            refine_starts=errors.integer(pl, "refine_starts", "plan.refine_starts", DEFAULT_REFINE_STARTS),
            refine_iterations=errors.integer(pl, "refine_iterations", "plan.refine_iterations", DEFAULT_REFINE_ITERATIONS),
            argmax_rtol=errors.number(pl, "argmax_rtol", "plan.argmax_rtol", ARGMAX_RTOL),
            bound_factor=errors.number(pl, "bound_factor", "plan.bound_factor", HAUSDORFF_BOUND_FACTOR),
            exclude_exceptional=bool(pl.get("exclude_exceptional", True)),
            distortion=distortion,
            property_samples=errors.integer(pl, "property_samples", "plan.property_samples", DEFAULT_PROPERTY_SAMPLES),
            lipschitz_pairs=errors.integer(pl, "lipschitz_pairs", "plan.lipschitz_pairs", DEFAULT_LIPSCHITZ_PAIRS),
            preimage_targets=errors.integer(pl, "preimage_targets", "plan.preimage_targets", 100),
        )
        if plan.samples_per_sphere < 1:
            errors.add("plan.samples_per_sphere", "must be >= 1")
        if not 0 <= plan.argmax_rtol < 1:
            errors.add("plan.argmax_rtol", "must lie in [0, 1)")

        out = errors.section(data, "output")
        output = OutputSpec(dir=str(out.get("dir", "")), prefix=str(out.get("prefix", DEFAULT_OUTPUT_PREFIX)))

        errors.raise_if_any()
        if dimension != 2 and (map_spec.type == "transcendental" or map_spec.block == "dtilde"):
            raise ScopeError(
                f"transcendental maps are modelled for n = 2 only (got n = {dimension})", "transcendental_composite"
            )
        return cls(dimension, seed, dict(target), pullback, map_spec, plan, output)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'ExperimentConfig':
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}", fields=["--config"])
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}", fields=["--config"])
        config = cls.from_dict(data)
        config.source = str(path)
        logger.info(f"[Config] loaded {path} (n={config.dimension}, map={config.map.type})")
        return config

    def to_dict(self) -> Dict[str, Any]:
        """Normalised form; from_dict(to_dict()) gives back an equal config."""
        return {
            "dimension": self.dimension,
            "seed": self.seed,
            "set": self.set,
            "pullback": self.pullback.to_dict(),
            "map": self.map.to_dict(),
            "plan": self.plan.to_dict(),
            "output": self.output.to_dict(),
        }
