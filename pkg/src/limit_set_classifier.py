#!/usr/bin/env python3
"""
Limit Set Classifier Module
Global orbit verdicts: center resolution, alpha/omega limits, connections,
local elliptic-sector witnesses and trichotomy checks over seed sets
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .equilibrium_classifier import (
    DirectionSpectrum, SimpleKind, TimeDirection, classify_simple, definite_directions
)
from .equilibrium_finder import Equilibrium, Region
from .errors import Inconclusive, InvalidOrder, NoReturn, PreconditionError, WitnessFailed
from .flow_integrator import (
    FlowIntegrator, IntegrationConfig, Orbit, TerminationEvent, TerminationKind, poincare_return
)
from .function_model import FunctionModel

CENTER_RADIUS_FACTORS = (1e-2, 1e-3, 1e-4)
CENTER_THRESHOLD = 1e-8
DIRECTION_MATCH = 1e-3
WITNESS_START_FACTOR = 0.05
WITNESS_DISK_FACTOR = 20.0
WITNESS_SEEDS = 5
WITNESS_HALVINGS = 6
INTERIOR_SEED_FRACTIONS = (0.1, 0.2, 0.3)

SPIRAL_KINDS = {SimpleKind.StableFocus, SimpleKind.UnstableFocus, SimpleKind.Focus,
                SimpleKind.CenterOrFocus, SimpleKind.Center}
NODE_KINDS = {SimpleKind.StableNode, SimpleKind.UnstableNode}


class DescriptorKind(str, Enum):
    SingleEquilibrium = "SingleEquilibrium"
    PeriodicSelf = "PeriodicSelf"
    Escapes = "Escapes"
    Unknown = "Unknown"


@dataclass(frozen=True)
class LimitDescriptor:
    """
    One limit set of an orbit

    For SingleEquilibrium, `direction` is the matched definite direction (order >= 2)
    or the limiting angle of a node; `spiral` marks approach to a focus.
    """

    kind: DescriptorKind
    equilibrium: Optional[Equilibrium] = None
    direction: Optional[float] = None
    spiral: bool = False
    approach_angle: Optional[float] = None
    budget: Optional[float] = None


@dataclass(frozen=True)
class LimitVerdict:
    alpha: LimitDescriptor
    omega: LimitDescriptor


class ConnectionKind(str, Enum):
    Homoclinic = "Homoclinic"
    Heteroclinic = "Heteroclinic"
    NotAConnection = "NotAConnection"


@dataclass(frozen=True)
class ConnectionType:
    kind: ConnectionKind
    source: Optional[Equilibrium] = None
    target: Optional[Equilibrium] = None


NOT_A_CONNECTION = ConnectionType(ConnectionKind.NotAConnection)


@dataclass(frozen=True)
class CenterResolution:
    kind: SimpleKind
    radii: Tuple[float, ...]
    displacements: Tuple[float, ...]
    stable: Optional[bool] = None


@dataclass(eq=False)
class OrbitClassification:
    seed: complex
    verdict: LimitVerdict
    connection: ConnectionType
    forward: Orbit
    backward: Optional[Orbit]
    bounded: bool = False


@dataclass(frozen=True)
class WitnessSector:
    lower_direction: float
    upper_direction: float
    sample_seeds: Tuple[complex, ...]
    verdicts: Tuple[ConnectionType, ...]
    omega_direction: Optional[float] = None

    @property
    def witnessed(self) -> bool:
        return all(v.kind is ConnectionKind.Homoclinic for v in self.verdicts)

    @property
    def clockwise(self) -> Optional[bool]:
        """Orbits run from the upper to the lower boundary"""
        if self.omega_direction is None:
            return None
        return self.omega_direction == self.lower_direction


@dataclass(frozen=True)
class FedWitness:
    equilibrium: Equilibrium
    sector_count: int
    sectors: Tuple[WitnessSector, ...]
    witness_radius: float
    success: bool
    failed_sector: Optional[int] = None

    def require(self) -> 'FedWitness':
        if not self.success:
            raise WitnessFailed("Elliptic sector witness failed", self.failed_sector, self.witness_radius)
        return self


@dataclass(frozen=True)
class PbViolation:
    seed: complex
    reason: str


@dataclass
class PbReport:
    classifications: List[OrbitClassification]
    violations: List[PbViolation] = field(default_factory=list)
    excluded_seeds: List[complex] = field(default_factory=list)
    hypothesis_satisfied: bool = True


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _simple_kind(eq: Equilibrium) -> SimpleKind:
    if eq.kind is not None:
        return SimpleKind(eq.kind)
    return classify_simple(eq, eq.derivative)


def _spectra(equilibria: Sequence[Equilibrium]) -> Dict[complex, DirectionSpectrum]:
    return {eq.location: definite_directions(eq) for eq in equilibria if eq.order >= 2}


def local_scale(eq: Equilibrium, equilibria: Sequence[Equilibrium],
                region: Optional[Region] = None) -> float:
    """Distance from an equilibrium to the nearest other equilibrium or the region boundary"""
    distances = [abs(eq.location - other.location) for other in equilibria
                 if other.location != eq.location]
    if region is not None and region.contains(eq.location):
        distances.append(region.distance_to_boundary(eq.location))
    distances = [d for d in distances if d > 0]
    return min(distances) if distances else 1.0


def describe_termination(event: TerminationEvent,
                         spectra: Dict[complex, DirectionSpectrum]) -> LimitDescriptor:
    """Map an integrator termination event to a limit-set descriptor"""
    kind = event.kind
    if kind is TerminationKind.PeriodClosed:
        return LimitDescriptor(DescriptorKind.PeriodicSelf)
    if kind in (TerminationKind.Escaped, TerminationKind.BlowupInFiniteTime):
        return LimitDescriptor(DescriptorKind.Escapes)
    if kind is TerminationKind.TimeBudgetExhausted:
        return LimitDescriptor(DescriptorKind.Unknown, budget=event.budget)

    eq = event.equilibrium
    angle = event.approach_angle
    if eq.order >= 2:
        direction, distance = spectra[eq.location].nearest(angle)
        matched = direction.theta if distance <= DIRECTION_MATCH else None
        return LimitDescriptor(DescriptorKind.SingleEquilibrium, equilibrium=eq,
                               direction=matched, approach_angle=angle)
    if _simple_kind(eq) in SPIRAL_KINDS:
        return LimitDescriptor(DescriptorKind.SingleEquilibrium, equilibrium=eq,
                               spiral=True, approach_angle=angle)
    return LimitDescriptor(DescriptorKind.SingleEquilibrium, equilibrium=eq,
                           direction=angle, approach_angle=angle)


def _inside(orbit: Optional[Orbit], region: Region) -> bool:
    if orbit is None:
        return True
    points = orbit.points
    return bool(np.all((points.real >= region.lo.real) & (points.real <= region.hi.real)
                       & (points.imag >= region.lo.imag) & (points.imag <= region.hi.imag)))


# ---------------------------------------------------------------------------
# Center resolution
# ---------------------------------------------------------------------------

def resolve_center(eq: Equilibrium, f: FunctionModel, region: Optional[Region] = None,
                   equilibria: Sequence[Equilibrium] = (),
                   config: Optional[IntegrationConfig] = None) -> CenterResolution:
    """
    Decide center versus focus by return displacements at three radii

    Args:
        eq: Simple equilibrium with CenterOrFocus (or focus) verdict
        f: Right-hand side
        region: Analysis region (bounds the local scale)
        equilibria: All known equilibria
        config: Base integration settings (tolerances are tightened)

    Returns:
        CenterResolution with per-radius displacements
    """
    if eq.order != 1:
        raise InvalidOrder(f"Center resolution needs order 1, got {eq.order}")
    if _simple_kind(eq) in NODE_KINDS:
        raise PreconditionError(f"Equilibrium at {eq.location!r} is a node, not a center candidate")

    config = config or IntegrationConfig()
    equilibria = tuple(equilibria) or (eq,)
    scale = local_scale(eq, equilibria, region)
    radii = tuple(factor * scale for factor in CENTER_RADIUS_FACTORS)

    displacements = []
    for radius in radii:
        tightened = config.replace(rel_tol=1e-12, abs_tol=1e-14 * radius,
                                   escape_center=eq.location, escape_radius=scale)
        try:
            displacements.append(poincare_return(f, eq.location, 0.0, radius, tightened, equilibria))
        except NoReturn:
            displacements.append(math.nan)

    small = [abs(d) <= CENTER_THRESHOLD * r for d, r in zip(displacements, radii)]
    if all(small):
        return CenterResolution(SimpleKind.Center, radii, tuple(displacements))
    if any(small):
        raise Inconclusive(
            f"Return displacements {displacements} at radii {radii} straddle the center threshold"
        )
    finite = [d for d in displacements if math.isfinite(d)]
    stable = (sum(finite) < 0) if finite else (eq.derivative.real < 0)
    return CenterResolution(SimpleKind.Focus, radii, tuple(displacements), stable=stable)


# ---------------------------------------------------------------------------
# Orbit verdicts
# ---------------------------------------------------------------------------

def connection_type(verdict: LimitVerdict) -> ConnectionType:
    alpha, omega = verdict.alpha, verdict.omega
    if alpha.kind is not DescriptorKind.SingleEquilibrium or omega.kind is not DescriptorKind.SingleEquilibrium:
        return NOT_A_CONNECTION
    if alpha.equilibrium.location == omega.equilibrium.location:
        return ConnectionType(ConnectionKind.Homoclinic, alpha.equilibrium, omega.equilibrium)
    return ConnectionType(ConnectionKind.Heteroclinic, alpha.equilibrium, omega.equilibrium)


def trace_orbit(f: FunctionModel, seed: complex, config: Optional[IntegrationConfig] = None,
                equilibria: Sequence[Equilibrium] = (), region: Optional[Region] = None,
                integrator: Optional[FlowIntegrator] = None) -> OrbitClassification:
    """
    Integrate both halves of the orbit through a seed and classify its limit sets

    A forward return to the seed makes the orbit periodic, and the backward half is skipped.
    """
    integrator = integrator or FlowIntegrator(f, config, equilibria)
    spectra = _spectra(integrator.equilibria)

    forward = integrator.integrate(seed, TimeDirection.Forward)
    if forward.termination.kind is TerminationKind.PeriodClosed:
        periodic = LimitDescriptor(DescriptorKind.PeriodicSelf)
        verdict = LimitVerdict(alpha=periodic, omega=periodic)
        backward = None
    else:
        backward = integrator.integrate(seed, TimeDirection.Backward)
        verdict = LimitVerdict(alpha=describe_termination(backward.termination, spectra),
                               omega=describe_termination(forward.termination, spectra))

    bounded = (region is not None and _inside(forward, region) and _inside(backward, region)
               and DescriptorKind.Escapes not in (verdict.alpha.kind, verdict.omega.kind))
    return OrbitClassification(seed=complex(seed), verdict=verdict, connection=connection_type(verdict),
                               forward=forward, backward=backward, bounded=bounded)


def classify_orbit(f: FunctionModel, seed: complex, config: Optional[IntegrationConfig] = None,
                   equilibria: Sequence[Equilibrium] = ()) -> LimitVerdict:
    return trace_orbit(f, seed, config, equilibria).verdict


# ---------------------------------------------------------------------------
# Elliptic sector witness
# ---------------------------------------------------------------------------

def fed_witness(eq: Equilibrium, f: FunctionModel, spectrum: Optional[DirectionSpectrum] = None,
                config: Optional[IntegrationConfig] = None, equilibria: Sequence[Equilibrium] = (),
                region: Optional[Region] = None) -> FedWitness:
    """
    Sample every sector between adjacent definite directions and check that
    sample orbits return to the equilibrium in both time directions

    Args:
        eq: Equilibrium of order m >= 2
        f: Right-hand side
        spectrum: Its definite directions (computed if omitted)
        config: Base integration settings
        equilibria: All known equilibria
        region: Analysis region (bounds the starting radius)

    Returns:
        FedWitness with 2m-2 sectors; `success` is False if the radius
        was halved six times without every sample orbit returning
    """
    if eq.order < 2:
        raise InvalidOrder(f"Elliptic sector witness needs order >= 2, got {eq.order}")
    spectrum = spectrum or definite_directions(eq)
    config = config or IntegrationConfig()
    equilibria = tuple(equilibria) or (eq,)
    spectra = {eq.location: spectrum}

    angles = list(spectrum.angles)
    bounds = list(zip(angles, angles[1:] + [angles[0] + 2 * math.pi]))
    radius = WITNESS_START_FACTOR * local_scale(eq, equilibria, region)

    for attempt in range(WITNESS_HALVINGS + 1):
        local = config.replace(escape_center=eq.location, escape_radius=WITNESS_DISK_FACTOR * radius)
        integrator = FlowIntegrator(f, local, equilibria, detect_blowup=False)
        sectors = []
        failed = None
        for index, (lower, upper) in enumerate(bounds):
            seeds = tuple(eq.location + radius * np.exp(1j * (lower + j * (upper - lower) / (WITNESS_SEEDS + 1)))
                          for j in range(1, WITNESS_SEEDS + 1))
            verdicts = []
            omega_direction = None
            for seed in seeds:
                forward = integrator.integrate(complex(seed), TimeDirection.Forward)
                backward = integrator.integrate(complex(seed), TimeDirection.Backward)
                verdict = LimitVerdict(alpha=_local_limit(backward.termination, eq, spectra),
                                       omega=_local_limit(forward.termination, eq, spectra))
                verdicts.append(connection_type(verdict))
                if omega_direction is None and verdict.omega.direction is not None:
                    omega_direction = _sector_boundary(verdict.omega.direction, lower, upper)
            sector = WitnessSector(lower_direction=lower, upper_direction=upper % (2 * math.pi),
                                   sample_seeds=tuple(complex(s) for s in seeds),
                                   verdicts=tuple(verdicts), omega_direction=omega_direction)
            sectors.append(sector)
            if failed is None and not sector.witnessed:
                failed = index
        if failed is None:
            return FedWitness(eq, len(bounds), tuple(sectors), radius, success=True)
        if attempt == WITNESS_HALVINGS:
            return FedWitness(eq, len(bounds), tuple(sectors), radius, success=False, failed_sector=failed)
        radius /= 2


def _local_limit(event: TerminationEvent, eq: Equilibrium,
                 spectra: Dict[complex, DirectionSpectrum]) -> LimitDescriptor:
    """Limit descriptor inside the witness disk; capture elsewhere counts as leaving"""
    if event.kind is TerminationKind.CapturedByEquilibrium and event.equilibrium.location != eq.location:
        return LimitDescriptor(DescriptorKind.Escapes)
    return describe_termination(event, spectra)


def _sector_boundary(direction: float, lower: float, upper: float) -> Optional[float]:
    """Which boundary of a sector a matched direction is (as stored in WitnessSector)"""
    two_pi = 2 * math.pi
    if math.isclose(direction % two_pi, lower % two_pi, abs_tol=1e-9):
        return lower
    if math.isclose(direction % two_pi, upper % two_pi, abs_tol=1e-9):
        return upper % two_pi
    return None


def witness_alternates(witness: FedWitness) -> bool:
    """Orbit orientation flips between every pair of consecutive sectors"""
    orientations = [sector.clockwise for sector in witness.sectors]
    if any(o is None for o in orientations):
        return False
    return all(a != b for a, b in zip(orientations, orientations[1:] + orientations[:1]))


# ---------------------------------------------------------------------------
# Trichotomy over seed sets
# ---------------------------------------------------------------------------

def _winding_around(points: np.ndarray, p: complex) -> int:
    closed = np.append(points, points[0]) - p
    total = np.sum(np.angle(closed[1:] / closed[:-1]))
    return int(round(total / (2 * math.pi)))


def _capture_law_violations(classification: OrbitClassification,
                            spectra: Dict[complex, DirectionSpectrum]) -> List[PbViolation]:
    violations = []
    sides = ((classification.verdict.omega, TimeDirection.Forward),
             (classification.verdict.alpha, TimeDirection.Backward))
    for descriptor, expected in sides:
        if descriptor.kind is not DescriptorKind.SingleEquilibrium or descriptor.equilibrium.order < 2:
            continue
        if descriptor.direction is None:
            violations.append(PbViolation(classification.seed, (
                f"approach angle {descriptor.approach_angle:.6f} at {descriptor.equilibrium.location} "
                f"is not a definite direction"
            )))
            continue
        direction, _ = spectra[descriptor.equilibrium.location].nearest(descriptor.direction)
        if direction.time_sign is not expected:
            violations.append(PbViolation(classification.seed, (
                f"direction {direction.theta:.6f} carries time sign {direction.time_sign.value}, "
                f"expected {expected.value}"
            )))
    return violations


def pb_report(f: FunctionModel, region: Region, seeds: Sequence[complex],
              config: Optional[IntegrationConfig] = None, equilibria: Sequence[Equilibrium] = (),
              classifications: Optional[Sequence[OrbitClassification]] = None) -> PbReport:
    """
    Check the bounded-orbit trichotomy over a seed set

    Args:
        f: Right-hand side
        region: Analysis region; orbits leaving it are excluded
        seeds: Seed points
        config: Integration settings
        equilibria: Found and classified equilibria (centers resolved)
        classifications: Precomputed classifications of the seeds, if any

    Returns:
        PbReport; violations are data and are expected to be empty
    """
    integrator = FlowIntegrator(f, config, equilibria)
    spectra = _spectra(equilibria)
    if classifications is None:
        classifications = [trace_orbit(f, seed, config, equilibria, region, integrator) for seed in seeds]
    classifications = sorted(classifications, key=lambda c: (c.seed.real, c.seed.imag))
    report = PbReport(classifications=list(classifications), hypothesis_satisfied=not f.has_division)
    if not report.hypothesis_satisfied:
        return report

    for item in report.classifications:
        report.violations.extend(_capture_law_violations(item, spectra))
        if not item.bounded:
            report.excluded_seeds.append(item.seed)
            continue
        report.violations.extend(_trichotomy_violations(item, integrator))
    return report


def _trichotomy_violations(item: OrbitClassification, integrator: FlowIntegrator) -> List[PbViolation]:
    alpha, omega = item.verdict.alpha, item.verdict.omega
    kinds = {alpha.kind, omega.kind}

    if DescriptorKind.PeriodicSelf in kinds:
        if kinds != {DescriptorKind.PeriodicSelf}:
            return [PbViolation(item.seed, "periodic on one side only")]
        return _periodic_violations(item, integrator)
    if DescriptorKind.Escapes in kinds:
        return [PbViolation(item.seed, "bounded orbit classified as escaping")]
    for descriptor in (alpha, omega):
        if descriptor.kind is DescriptorKind.Unknown and descriptor.budget is None:
            return [PbViolation(item.seed, "undetermined limit without an exhausted budget")]
    return []


def _periodic_violations(item: OrbitClassification, integrator: FlowIntegrator) -> List[PbViolation]:
    enclosed = [eq for eq in integrator.equilibria
                if _winding_around(item.forward.points, eq.location) != 0]
    if len(enclosed) != 1:
        return [PbViolation(item.seed, f"periodic orbit encloses {len(enclosed)} equilibria")]
    center = enclosed[0]
    if center.kind != SimpleKind.Center.value:
        return [PbViolation(item.seed, f"periodic orbit encloses a {center.kind} equilibrium")]

    violations = []
    for fraction in INTERIOR_SEED_FRACTIONS:
        inner = item.seed + fraction * (center.location - item.seed)
        orbit = integrator.integrate(inner, TimeDirection.Forward)
        if orbit.termination.kind is not TerminationKind.PeriodClosed:
            violations.append(PbViolation(item.seed, (
                f"interior seed {inner} ended with {orbit.termination.kind.value}, not a closed orbit"
            )))
    return violations
