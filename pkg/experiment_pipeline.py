"""
Experiment pipeline.

Builds the target set, its Zorich pullback, the shrink map and h1, the
outer map (power map or annulus gluing) and the composite h, then runs the
requested stages:

    build       construct everything and record metadata
    maxmod      M(r, h) on the r-grid
    mms         argmax sets on the r-grid compared with T
    distortion  distortion estimates of h and h1 (reported, not asserted)
    verify      property suites, including the M-set comparison
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from core_geom import StarSurface
from experiment_config import ExperimentConfig
from growth_transcend import AnnulusGluing, GrowthSchedule, smooth_conjugate, transcendental_composite
from map_expr import MapExpr, identity_map, sup_square_map
from property_suites import (
    SuiteResult,
    random_points,
    run_growth_suite,
    run_gluing_suite,
    run_mms_suite,
    run_modulus_gap_suite,
    run_pullback_suite,
    run_shrink_suite,
    run_zorich_suite,
    summarize,
)
from sets import ClosedSetOracle, SetFactory, validate_meets_every_sphere
from shrink import PullbackMode, PullbackSet, SamplingPlan, ShrinkMap
from verify import ComparisonReport, MMSExtract, SphereBudget, compare_to_target, distortion_probe, extract_mms
from utils.error_handler import SetValidationError
from zorich import PowerMap, ZorichMap

logger = logging.getLogger(__name__)

STAGES = ("build", "maxmod", "mms", "distortion", "verify")
PLOT_SECTION_SAMPLES = 256


@dataclass
class BuiltExperiment:
    """Every object constructed from a config; unused pieces stay None."""
    config: ExperimentConfig
    zorich: ZorichMap
    target: ClosedSetOracle
    composite: MapExpr
    pullback: Optional[PullbackSet] = None
    shrink: Optional[ShrinkMap] = None
    power: Optional[PowerMap] = None
    schedule: Optional[GrowthSchedule] = None
    gluing: Optional[AnnulusGluing] = None

    @property
    def claims_target(self) -> bool:
        """Whether M(h) = T (off S_eps) is the expected outcome."""
        return self.config.map.type in ("polynomial", "transcendental")


@dataclass
class RunReport:
    config: Dict[str, Any]
    stages: List[str]
    build: Dict[str, Any] = field(default_factory=dict)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    suites: List[SuiteResult] = field(default_factory=list)
    distortion: Dict[str, Any] = field(default_factory=dict)
    comparison: Optional[ComparisonReport] = None
    target_points: Optional[np.ndarray] = None
    mms_points: Optional[np.ndarray] = None
    notes: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return int(self.config["dimension"])

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> Dict[str, Any]:
        """JSON payload; timings are kept apart so the report is reproducible byte for byte."""
        out = {
            "config": self.config,
            "stages": self.stages,
            "build": self.build,
            "table": self.rows,
            "properties": summarize(self.suites),
            "distortion": self.distortion,
            "notes": self.notes,
        }
        if self.comparison is not None:
            out["comparison"] = self.comparison.to_dict()
        return out


# =============================================================================
# Construction
# =============================================================================

def build_schedule(config: ExperimentConfig) -> GrowthSchedule:
    spec = config.map.schedule
    if spec.rule == "explicit":
        return GrowthSchedule.explicit(spec.radii, config.map.epsilon)
    return GrowthSchedule.exp_exp(spec.count, config.map.epsilon)


def build_experiment(config: ExperimentConfig) -> BuiltExperiment:
    """Construct the oracles and maps a config describes."""
    n = config.dimension
    zorich = ZorichMap(n)
    target = SetFactory.create(config.set, n)
    kind = config.map.type
    block = config.map.block if kind == "building-block" else None
    built = BuiltExperiment(config=config, zorich=zorich, target=target, composite=identity_map(n))

    if kind != "building-block" or block in ("shrink", "h1"):
        spec = config.pullback
        plan = SamplingPlan(spec.radii.min, spec.radii.max, spec.radii.count, spec.section_samples)
        mode = PullbackMode(spec.mode) if spec.mode else None
        built.pullback = PullbackSet(target, zorich, mode=mode, r_max=spec.r_max, sampling=plan)
        built.shrink = ShrinkMap(built.pullback)
    if kind == "polynomial" or block == "power":
        built.power = PowerMap(zorich, config.map.degree)
    if kind == "transcendental" or block == "dtilde":
        built.schedule = build_schedule(config)
        built.gluing = AnnulusGluing(built.schedule)

    if kind == "polynomial":
        built.composite = built.power.as_expr().compose(built.shrink.h1_expr(), name="P o h1")
    elif kind == "transcendental":
        built.composite = transcendental_composite(built.gluing, built.shrink, zorich)
    elif block == "zorich":
        built.composite = zorich.as_expr()
    elif block == "power":
        built.composite = built.power.as_expr()
    elif block == "shrink":
        built.composite = MapExpr("shrink_f", n, built.shrink.evaluate, claimed_degree=1)
    elif block == "h1":
        built.composite = built.shrink.h1_expr()
    elif block == "dtilde":
        built.composite = built.gluing.as_expr()
    elif block == "conjugated-square":
        cube = StarSurface.sup_norm_cube(n)
        built.composite = smooth_conjugate(sup_square_map(n), cube, cube)
    logger.info(f"[Build] {built.composite.name} on {target.kind.value} (n={n})")
    return built


def describe_build(built: BuiltExperiment) -> Dict[str, Any]:
    info: Dict[str, Any] = {
        "map": built.composite.metadata(),
        "set": built.target.describe(),
    }
    if built.pullback is not None:
        info["pullback"] = built.pullback.describe()
    if built.power is not None:
        info["power"] = {
            "degree": built.power.degree,
            "topological_degree": built.power.topological_degree,
            "center": built.power.center.tolist(),
        }
    if built.schedule is not None:
        schedule = built.schedule
        nodes = [r for r in schedule.radii if r >= 1]
        info["schedule"] = schedule.to_dict()
        info["schedule"]["log_psi_at_nodes"] = [schedule.log_psi(r) for r in nodes]
        info["schedule"]["log_max_modulus_at_nodes"] = [float(built.gluing.log_max_modulus(r)) for r in nodes]
        info["schedule"]["exceptional_density"] = [
            {
                "R": r,
                "linear": schedule.exceptional_density(r),
                "logarithmic": schedule.exceptional_density(r, logarithmic=True) if r > 1 else None,
            }
            for r in schedule.radii[1:]
        ]
        info["schedule"]["blend_zero_radii"] = [
            built.gluing.blend_zero_radius(k) for k in range(1, schedule.count)
        ]
    return info


# =============================================================================
# Stages
# =============================================================================

def _budget(config: ExperimentConfig) -> SphereBudget:
    plan = config.plan
    return SphereBudget(
        samples=plan.samples_per_sphere,
        refine_starts=plan.refine_starts,
        refine_iterations=plan.refine_iterations,
        argmax_rtol=plan.argmax_rtol,
        seed=config.seed,
    )


def _rows(extract: MMSExtract, comparison: Optional[ComparisonReport]) -> List[Dict[str, Any]]:
    rows = []
    for i, res in enumerate(extract.results):
        hausdorff = float("nan")
        if comparison is not None and not comparison.rows[i].skipped:
            hausdorff = comparison.rows[i].hausdorff
        rows.append({
            "r": res.radius,
            "M_est": res.m_est,
            "argmax_count": res.argmax_count,
            "hausdorff": hausdorff,
            "in_exceptional": bool(extract.exceptional[i]),
        })
    return rows


def _target_plot_points(built: BuiltExperiment, radii: Iterable[float]) -> np.ndarray:
    chunks = []
    for r in radii:
        try:
            chunks.append(built.target.sphere_section(float(r), PLOT_SECTION_SAMPLES).points)
        except SetValidationError:
            continue
    return np.vstack(chunks) if chunks else np.empty((0, built.config.dimension))


def _run_distortion(built: BuiltExperiment, rng: np.random.Generator, r_range) -> Dict[str, Any]:
    spec = built.config.plan.distortion
    points = random_points(rng, spec.samples, built.config.dimension, r_range)
    out = {"h": distortion_probe(built.composite, points, spec.probe_radius, spec.mode).to_dict()}
    if built.shrink is not None and built.composite.name != "h1":
        out["h1"] = distortion_probe(built.shrink.h1_expr(), points, spec.probe_radius, spec.mode).to_dict()
    return out


def run_experiment(
    config: ExperimentConfig,
    stages: Optional[Iterable[str]] = None,
    workers: Optional[int] = None,
) -> RunReport:
    """
    Build the experiment and run the selected stages.

    Returns:
        RunReport with the per-radius table, suite results and timings
    """
    selected = [s for s in STAGES if stages is None or s in set(stages)]
    report = RunReport(config=config.to_dict(), stages=selected)
    rng = np.random.default_rng(config.seed)
    r_grid = config.plan.r_grid.values()
    positive = r_grid[r_grid > 0]
    r_range = (float(positive.min()), float(positive.max())) if positive.size else (0.1, 1.0)

    started = time.perf_counter()
    built = build_experiment(config)
    if built.claims_target:
        coverage = validate_meets_every_sphere(built.target, r_grid, config.plan.samples_per_sphere)
        if not coverage.passed:
            worst = coverage.failures[0]
            raise SetValidationError(
                f"target set misses {len(coverage.failures)} spheres of the r-grid", radius=worst.radius
            )
    report.build = describe_build(built)
    report.timings["build"] = time.perf_counter() - started
    logger.info(f"[1/5] built {built.composite.name}")

    extract: Optional[MMSExtract] = None
    if {"maxmod", "mms", "verify"} & set(selected):
        started = time.perf_counter()
        extract = extract_mms(built.composite, r_grid, _budget(config), built.schedule, workers)
        report.timings["maxmod"] = time.perf_counter() - started
        logger.info(f"[2/5] maximum modulus on {len(extract)} radii")

    if extract is not None and {"mms", "verify"} & set(selected):
        started = time.perf_counter()
        exclude = config.plan.exclude_exceptional and built.schedule is not None
        try:
            report.comparison = compare_to_target(extract, built.target, exclude, config.plan.bound_factor)
        except SetValidationError as e:
            if built.claims_target:
                raise
            report.notes.append(f"no M-set comparison: {e}")
        report.timings["mms"] = time.perf_counter() - started
        if report.comparison is not None:
            logger.info(f"[3/5] M-set comparison: max Hausdorff {report.comparison.max_hausdorff:.3g}")
        if config.dimension == 2:
            report.mms_points = extract.points
            report.target_points = _target_plot_points(built, extract.radii)
    if extract is not None:
        report.rows = _rows(extract, report.comparison)
    if config.dimension != 2:
        report.notes.append(f"plane plot omitted for n = {config.dimension}")

    if "distortion" in selected:
        started = time.perf_counter()
        report.distortion = _run_distortion(built, rng, r_range)
        report.timings["distortion"] = time.perf_counter() - started
        logger.info(f"[4/5] distortion estimates for {', '.join(report.distortion)}")

    if "verify" in selected:
        started = time.perf_counter()
        report.suites = run_property_suites(built, rng, r_range, report.comparison)
        report.timings["verify"] = time.perf_counter() - started
        failed = [s.name for s in report.suites if not s.passed]
        logger.info(f"[5/5] {len(report.suites)} suites, {len(failed)} failing" + (f": {', '.join(failed)}" if failed else ""))
    return report


def run_property_suites(
    built: BuiltExperiment,
    rng: np.random.Generator,
    r_range,
    comparison: Optional[ComparisonReport],
) -> List[SuiteResult]:
    plan = built.config.plan
    suites: List[SuiteResult] = []
    if built.power is not None:
        suites.append(run_zorich_suite(built.power, rng, plan.property_samples, plan.preimage_targets))
    if built.pullback is not None:
        suites.append(run_pullback_suite(built.pullback, rng, plan.lipschitz_pairs, r_range))
        suites.append(run_shrink_suite(
            built.shrink, built.target, rng, plan.property_samples,
            plan.distortion.samples, plan.distortion.probe_radius, r_range,
        ))
    if built.config.map.type == "polynomial":
        radii = np.geomspace(r_range[0], r_range[1], 8)
        suites.append(run_modulus_gap_suite(built.composite, built.shrink, built.power.degree, radii))
    if built.schedule is not None:
        suites.append(run_growth_suite(built.schedule))
        suites.append(run_gluing_suite(built.gluing, rng, plan.distortion.samples, plan.distortion.probe_radius))
    if comparison is not None and built.claims_target:
        suites.append(run_mms_suite(comparison))
    return suites
