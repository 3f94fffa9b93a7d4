"""Property suites: pass/fail checks run by the experiment pipeline."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from config.constants import (
    BLEND_DISTORTION_BOUND,
    IDENTITY_RTOL,
    LIPSCHITZ_SLACK,
    MODULUS_RTOL,
    SHRINK_LOWER_STRETCH,
    SHRINK_ROUNDNESS_BOUND,
    SHRINK_UPPER_STRETCH,
)
from core_geom import norms, unit_sphere_grid
from growth_transcend import AnnulusGluing, GrowthSchedule
from map_expr import MapExpr
from sets.base import ClosedSetOracle
from shrink import PullbackSet, ShrinkMap, p_of_distance
from utils.error_handler import SetValidationError
from verify import ComparisonReport, circle_degree, distortion_probe, lipschitz_probe
from zorich import PowerMap

logger = logging.getLogger(__name__)

SCHRODER_RTOL = 1e-9
GROUP_RTOL = 1e-12
PREIMAGE_RTOL = 1e-9
BRANCH_RTOL = 1e-10
H1_MODULUS_RTOL = 1e-10
CIRCLE_MODULUS_RTOL = 1e-9
CIRCLE_SAMPLES = 2048


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    measured: float = math.nan
    bound: float = math.nan
    is_critical: bool = True  # Critical failures make the run exit non-zero

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
            "measured": self.measured,
            "bound": self.bound,
            "is_critical": self.is_critical,
        }


@dataclass
class SuiteResult:
    name: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.is_critical)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _at_most(name: str, measured: float, bound: float, what: str, is_critical: bool = True) -> CheckResult:
    passed = bool(measured <= bound)
    relation = "<=" if passed else ">"
    return CheckResult(name, passed, f"{what}: {measured:.3g} {relation} {bound:.3g}", float(measured), float(bound), is_critical)


def _at_least(name: str, measured: float, bound: float, what: str) -> CheckResult:
    passed = bool(measured >= bound)
    relation = ">=" if passed else "<"
    return CheckResult(name, passed, f"{what}: {measured:.3g} {relation} {bound:.3g}", float(measured), float(bound))


def _relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.maximum(norms(np.atleast_2d(b)), 1e-300)
    return float(np.max(norms(np.atleast_2d(a) - np.atleast_2d(b)) / scale))


# =============================================================================
# Sample generators
# =============================================================================

def random_points(rng: np.random.Generator, count: int, dimension: int, r_range: Tuple[float, float]) -> np.ndarray:
    """Uniform directions with log-uniform radii."""
    g = rng.standard_normal((count, dimension))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radii = np.exp(rng.uniform(math.log(r_range[0]), math.log(r_range[1]), count))
    return g * radii[:, None]


def random_log_points(rng: np.random.Generator, count: int, dimension: int, t_range: Tuple[float, float]) -> np.ndarray:
    """Points of the log-coordinate space with x' in [-4, 4]^(n-1)."""
    s = rng.uniform(-4.0, 4.0, (count, dimension - 1))
    t = rng.uniform(t_range[0], t_range[1], count)
    return np.column_stack([s, t])


def random_pairs(
    rng: np.random.Generator, count: int, dimension: int, t_range: Tuple[float, float]
) -> Tuple[np.ndarray, np.ndarray]:
    """Pairs at log-uniform separations between 1e-3 and 3."""
    first = random_log_points(rng, count, dimension, t_range)
    offset = rng.standard_normal((count, dimension))
    offset /= np.linalg.norm(offset, axis=1, keepdims=True)
    offset *= np.exp(rng.uniform(math.log(1e-3), math.log(3.0), count))[:, None]
    return first, first + offset


# =============================================================================
# Suites
# =============================================================================

def run_zorich_suite(
    power: PowerMap, rng: np.random.Generator, samples: int, preimage_targets: int = 100
) -> SuiteResult:
    """Schroder identity, sphere law, group invariance and preimage count."""
    suite = SuiteResult("zorich")
    zorich = power.zorich
    n = zorich.dimension
    x = np.column_stack([rng.uniform(-4.0, 4.0, (samples, n - 1)), rng.uniform(-3.0, 3.0, samples)])
    zx = zorich.evaluate(x)
    expected = zorich.evaluate(power.dilate(x))
    suite.checks.append(_at_most(
        "schroder_identity", _relative_gap(power.evaluate(zx), expected), SCHRODER_RTOL, "max |P(Z x) - Z(A x)| / |Z(A x)|"
    ))
    radii = norms(zx)
    law = np.abs(norms(power.evaluate(zx)) - radii ** power.degree) / radii ** power.degree
    suite.checks.append(_at_most("sphere_law", float(law.max()), SCHRODER_RTOL, "max ||P(y)| - |y|^d| / |y|^d"))
    worst = max(_relative_gap(zorich.evaluate(g.apply(x)), zx) for g in zorich.group_generators())
    suite.checks.append(_at_most("group_invariance", worst, GROUP_RTOL, "max |Z(g x) - Z(x)| / |Z(x)|"))

    targets = random_points(rng, preimage_targets, n, (0.2, 5.0))
    expected_count = power.topological_degree
    bad_count, forward = 0, 0.0
    for y in targets:
        pre = power.preimages(y)
        if len(pre) != expected_count:
            bad_count += 1
        forward = max(forward, _relative_gap(power.evaluate(pre.points), np.tile(y, (len(pre), 1))))
    suite.checks.append(CheckResult(
        "preimage_count",
        bad_count == 0,
        f"{preimage_targets - bad_count}/{preimage_targets} targets have {expected_count} preimages",
        float(bad_count),
        0.0,
    ))
    suite.checks.append(_at_most("preimage_forward", forward, PREIMAGE_RTOL, "max |P(x_k) - y| / |y|"))
    return suite


def run_pullback_suite(
    pullback: PullbackSet, rng: np.random.Generator, pairs: int, r_range: Tuple[float, float]
) -> SuiteResult:
    """p o dist(., T') is 1-Lipschitz."""
    suite = SuiteResult("pullback")
    first, second = random_pairs(rng, pairs, pullback.dimension, (math.log(r_range[0]), math.log(r_range[1])))

    def field_value(y: np.ndarray) -> np.ndarray:
        return p_of_distance(np.atleast_1d(pullback.distance(y)))

    ratio = lipschitz_probe(field_value, first, second)
    suite.checks.append(_at_most("p_lipschitz", ratio, 1.0 + LIPSCHITZ_SLACK, f"max Lipschitz ratio over {pairs} pairs"))
    return suite


def _target_samples(target: ClosedSetOracle, r_range: Tuple[float, float], per_radius: int = 64) -> np.ndarray:
    chunks = []
    for r in np.geomspace(r_range[0], r_range[1], 8):
        try:
            chunks.append(target.sphere_section(float(r), per_radius).points)
        except SetValidationError:
            continue
    return np.vstack(chunks) if chunks else np.empty((0, target.dimension))


def run_shrink_suite(
    shrink: ShrinkMap,
    target: ClosedSetOracle,
    rng: np.random.Generator,
    samples: int,
    distortion_samples: int,
    probe_radius: float,
    r_range: Tuple[float, float],
) -> SuiteResult:
    """h1 modulus law, identity on T, branch independence and roundness of f."""
    suite = SuiteResult("shrink")
    zorich = shrink.zorich
    n = shrink.dimension
    x = random_points(rng, samples, n, r_range)
    y = zorich.invert(x)
    expected = norms(x) * np.exp(-0.5 * p_of_distance(np.atleast_1d(shrink.pullback.distance(y))))
    measured = norms(shrink.h1(x))
    suite.checks.append(_at_most(
        "h1_modulus_law", float(np.max(np.abs(measured - expected) / expected)), H1_MODULUS_RTOL,
        "max ||h1(x)| - |x| exp(-p/2)| / expected",
    ))

    on_target = _target_samples(target, r_range)
    on_target = on_target[norms(on_target) > 0]
    if on_target.shape[0]:
        gap = _relative_gap(shrink.h1(on_target), on_target)
        suite.checks.append(_at_most("h1_fixes_target", gap, IDENTITY_RTOL, f"max |h1(x) - x| / |x| on {len(on_target)} points of T"))

    baseline = zorich.evaluate(shrink.evaluate(y))
    worst = max(
        _relative_gap(zorich.evaluate(shrink.evaluate(g.apply(y))), baseline) for g in zorich.group_generators()
    )
    suite.checks.append(_at_most("h1_branch_independence", worst, BRANCH_RTOL, "max change of h1 under the group"))

    base = random_log_points(rng, distortion_samples, n, (math.log(r_range[0]), math.log(r_range[1])))
    f_expr = MapExpr("shrink_f", n, shrink.evaluate)
    report = distortion_probe(f_expr, base, probe_radius, mode="roundness")
    suite.checks.append(_at_most("f_roundness", report.maximum, SHRINK_ROUNDNESS_BOUND, "max L_f / l_f"))
    suite.checks.append(_at_most(
        "f_upper_stretch", float(report.upper_stretch.max()), SHRINK_UPPER_STRETCH + 1e-6, "max L_f(x, r) / r"
    ))
    suite.checks.append(_at_least(
        "f_lower_stretch", float(report.lower_stretch.min()), SHRINK_LOWER_STRETCH - 1e-6, "min l_f(x, r) / r"
    ))
    return suite


def run_modulus_gap_suite(
    composite: MapExpr, shrink: ShrinkMap, degree: int, radii: Sequence[float], per_radius: int = 256
) -> SuiteResult:
    """|h(x)| = (|x| exp(-p/2))^d for h = P o h1 on sampled spheres."""
    suite = SuiteResult("modulus_gap")
    n = composite.dimension
    directions = unit_sphere_grid(n, per_radius)
    worst = 0.0
    for r in radii:
        if r <= 0:
            continue
        x = float(r) * directions
        p = p_of_distance(np.atleast_1d(shrink.pullback.distance(shrink.zorich.invert(x))))
        expected = (float(r) * np.exp(-0.5 * p)) ** degree
        worst = max(worst, float(np.max(np.abs(norms(composite(x)) - expected) / expected)))
    suite.checks.append(_at_most("closed_form_gap", worst, MODULUS_RTOL, "max relative error of |h(x)| against (|x| e^(-p/2))^d"))
    return suite


def run_mms_suite(comparison: ComparisonReport) -> SuiteResult:
    suite = SuiteResult("mms")
    checked = [row for row in comparison.rows if not row.skipped]
    ratio = max((row.hausdorff / row.bound for row in checked if row.bound > 0), default=0.0)
    label = "off the exceptional set" if comparison.exclude_exceptional else "on every radius"
    suite.checks.append(_at_most(
        "mms_matches_target", ratio, 1.0,
        f"worst Hausdorff / bound {label} ({len(checked)} radii, {len(comparison.failures)} failing)",
    ))
    return suite


def run_growth_suite(schedule: GrowthSchedule) -> SuiteResult:
    """Node values of nu, monotone Psi, and the trend of the logarithmic density of E_eps."""
    suite = SuiteResult("growth")
    nodes = np.asarray(schedule.radii)
    node_error = float(np.max(np.abs(schedule.nu(nodes) - np.asarray(schedule.levels))))
    suite.checks.append(_at_most("nu_nodes", node_error, 0.0, "max |nu(r_n) - n|"))
    grid = np.geomspace(1.0, nodes[-1] * 4.0, 64)
    logs = np.array([schedule.log_psi(r) for r in grid])
    steps = np.diff(logs)
    suite.checks.append(CheckResult(
        "psi_increasing", bool(np.all(steps > 0)), "log Psi strictly increasing on a geometric grid",
        float(steps.min()), 0.0,
    ))
    probes = [r for r in nodes[1:4] if r > 1]
    if len(probes) >= 2:
        densities = [schedule.exceptional_density(r, logarithmic=True) for r in probes]
        decreasing = all(b < a for a, b in zip(densities, densities[1:]))
        suite.checks.append(CheckResult(
            "log_density_trend",
            decreasing,
            "logarithmic density of E_eps at r_2.. : " + ", ".join(f"{d:.4g}" for d in densities),
            float(densities[-1]),
            float(densities[0]),
            is_critical=False,
        ))
    return suite


def _good_radii(gluing: AnnulusGluing) -> List[float]:
    """One radius inside each good annulus, in increasing order."""
    radii = gluing.schedule.radii
    eps = gluing.schedule.epsilon
    out = [0.5 * eps * radii[1]]
    for k in range(1, len(radii)):
        upper = eps * radii[k + 1] if k + 1 < len(radii) else 4.0 * radii[k]
        out.append(math.sqrt(radii[k] * upper))
    return out


def run_gluing_suite(
    gluing: AnnulusGluing, rng: np.random.Generator, distortion_samples: int, probe_radius: float
) -> SuiteResult:
    """Round circles off E_eps, monotone maximum modulus, winding increments and blend distortion."""
    suite = SuiteResult("gluing")
    good = _good_radii(gluing)
    theta = 2.0 * np.pi * np.arange(CIRCLE_SAMPLES) / CIRCLE_SAMPLES
    circle = np.column_stack([np.cos(theta), np.sin(theta)])
    spread = 0.0
    for r in good:
        moduli = norms(gluing.evaluate(r * circle))
        if np.all(np.isfinite(moduli)):
            spread = max(spread, float(np.std(moduli) / np.mean(moduli)))
    suite.checks.append(_at_most("circle_modulus_constant", spread, CIRCLE_MODULUS_RTOL, "max relative spread of |D~| on good circles"))

    grid = np.geomspace(0.1, 4.0 * gluing.schedule.radii[-1], 400)
    steps = np.diff(gluing.log_max_modulus(grid))
    suite.checks.append(CheckResult(
        "max_modulus_increasing", bool(np.all(steps > 0)), "log M(r, D~) strictly increasing on the grid",
        float(steps.min()), 0.0,
    ))

    expr = gluing.as_expr()
    degrees = [circle_degree(expr, r) for r in good if gluing.log_max_modulus(r) < 700.0]
    increments = np.diff(degrees)
    suite.checks.append(CheckResult(
        "winding_increments",
        bool(np.all(increments == 1)),
        "winding degrees on good circles: " + ", ".join(str(d) for d in degrees),
        float(np.max(np.abs(increments - 1))) if increments.size else 0.0,
        0.0,
    ))

    worst = 0.0
    eps = gluing.schedule.epsilon
    for outer in gluing.schedule.radii[1:]:
        scale = float(gluing.log_max_modulus(outer))

        def scaled(w: np.ndarray, outer=outer, scale=scale) -> np.ndarray:
            return gluing.evaluate(outer * w, log_scale=scale)

        angles = rng.uniform(0.0, 2.0 * np.pi, distortion_samples)
        radii = np.exp(rng.uniform(math.log(eps), 0.0, distortion_samples))
        w = radii[:, None] * np.column_stack([np.cos(angles), np.sin(angles)])
        report = distortion_probe(MapExpr("blend", 2, scaled), w, probe_radius, mode="jacobian")
        worst = max(worst, report.maximum)
    suite.checks.append(_at_most("blend_distortion", worst, BLEND_DISTORTION_BOUND, "max singular value ratio on blend annuli"))
    return suite


def summarize(suites: Sequence[SuiteResult]) -> Dict[str, Any]:
    """Aggregate like a pre-flight report: passed, failed check names, suites."""
    failed = [f"{s.name}.{c.name}" for s in suites for c in s.checks if c.is_critical and not c.passed]
    return {
        "passed": not failed,
        "failed_checks": failed,
        "suites": [s.to_dict() for s in suites],
    }
