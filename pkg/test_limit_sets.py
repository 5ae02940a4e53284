#!/usr/bin/env python3
"""
Test center resolution, orbit verdicts, elliptic sector witnesses and trichotomy reports
"""

import math

import pytest

from src.equilibrium_classifier import SimpleKind, angular_distance, classify_equilibrium
from src.equilibrium_finder import Equilibrium, Region, find_equilibria
from src.errors import InvalidOrder, PreconditionError, WitnessFailed
from src.flow_analyzer import FlowAnalyzer, parse_seed_spec
from src.flow_integrator import IntegrationConfig
from src.function_model import FunctionModel
from src.limit_set_classifier import (
    NOT_A_CONNECTION, ConnectionKind, DescriptorKind, FedWitness, LimitDescriptor, LimitVerdict,
    classify_orbit, connection_type, fed_witness, pb_report, resolve_center, trace_orbit,
    witness_alternates
)

EXAMPLE_BOX = (-0.5, -0.75, 1.5, 0.75)


def analyzed(source: str, box, **overrides):
    """Function, region and fully classified equilibria"""
    analyzer = FlowAnalyzer(IntegrationConfig(), verbose=False, **overrides)
    f = FunctionModel.from_source(source)
    region = Region.from_box(*box)
    return f, region, analyzer.locate_equilibria(f, region), analyzer.config


def near(a: complex, b: complex, tolerance: float = 1e-8) -> bool:
    return abs(a - b) < tolerance


# ---------------------------------------------------------------------------
# Center resolution
# ---------------------------------------------------------------------------

def test_rotation_is_resolved_as_center():
    f = FunctionModel.from_source("i*z")
    region = Region.from_box(-2, -2, 2, 2)
    eq = classify_equilibrium(find_equilibria(f, region)[0], f)
    assert eq.kind == SimpleKind.CenterOrFocus.value

    outcome = resolve_center(eq, f, region, [eq])
    assert outcome.kind is SimpleKind.Center
    assert len(outcome.radii) == 3
    for d, r in zip(outcome.displacements, outcome.radii):
        assert abs(d) <= 1e-8 * r


def test_weak_spiral_is_resolved_as_unstable_focus():
    f = FunctionModel.from_source("(i+0.05)*z")
    region = Region.from_box(-2, -2, 2, 2)
    eq = find_equilibria(f, region)[0]
    outcome = resolve_center(eq, f, region, [eq])
    assert outcome.kind is SimpleKind.Focus
    assert outcome.stable is False
    assert all(d > 0 for d in outcome.displacements)


def test_nodes_are_not_center_candidates():
    f = FunctionModel.from_source("-z")
    eq = find_equilibria(f, Region.from_box(-1, -1, 1, 1))[0]
    with pytest.raises(PreconditionError):
        resolve_center(eq, f)


def test_center_resolution_needs_simple_equilibrium():
    eq = Equilibrium(location=0, order=2, leading_coefficient=1, index=2, derivative=0)
    with pytest.raises(InvalidOrder):
        resolve_center(eq, FunctionModel.from_source("z^2"))


@pytest.mark.parametrize("source, kind", [
    ("-z", SimpleKind.StableNode.value),
    ("z", SimpleKind.UnstableNode.value),
    ("(1+2i)*z", SimpleKind.UnstableFocus.value),
    ("(-1+i)*z", SimpleKind.StableFocus.value),
    ("i*z", SimpleKind.Center.value),
])
def test_simple_taxonomy_after_resolution(source, kind):
    _, _, equilibria, _ = analyzed(source, (-1, -1, 1, 1))
    assert [eq.kind for eq in equilibria] == [kind]


# ---------------------------------------------------------------------------
# Orbit verdicts
# ---------------------------------------------------------------------------

def test_orbit_between_triple_zeros_is_heteroclinic():
    f, region, equilibria, config = analyzed("z^3*(z-1)^3", (-2, -2, 2, 2))
    verdict = classify_orbit(f, 0.5, config, equilibria)

    assert verdict.alpha.kind is DescriptorKind.SingleEquilibrium
    assert near(verdict.alpha.equilibrium.location, 1)
    assert angular_distance(verdict.alpha.direction, math.pi) < 1e-9
    assert verdict.omega.kind is DescriptorKind.SingleEquilibrium
    assert near(verdict.omega.equilibrium.location, 0)
    assert angular_distance(verdict.omega.direction, 0.0) < 1e-9

    connection = connection_type(verdict)
    assert connection.kind is ConnectionKind.Heteroclinic
    assert near(connection.source.location, 1)
    assert near(connection.target.location, 0)


def test_rotation_orbit_is_periodic():
    f, region, equilibria, config = analyzed("i*z", (-2, -2, 2, 2))
    item = trace_orbit(f, 1.0, config, equilibria, region)
    assert item.verdict.alpha.kind is DescriptorKind.PeriodicSelf
    assert item.verdict.omega.kind is DescriptorKind.PeriodicSelf
    assert item.backward is None
    assert item.bounded
    assert item.connection == NOT_A_CONNECTION


def test_double_zero_orbit_on_positive_axis_escapes():
    f, region, equilibria, config = analyzed("z^2", (-1, -1, 1, 1))
    item = trace_orbit(f, 0.5, config, equilibria, region)
    assert item.verdict.alpha.kind is DescriptorKind.SingleEquilibrium
    assert angular_distance(item.verdict.alpha.direction, 0.0) < 1e-9
    assert item.verdict.omega.kind is DescriptorKind.Escapes
    assert not item.bounded


@pytest.mark.parametrize("source, box, seed", [
    ("z^3*(z-1)^3", EXAMPLE_BOX, 0.5),
    ("z^3*(z-1)^3", EXAMPLE_BOX, 0.25),
    ("z^2", (-1, -1, 1, 1), 0.3j),
    ("z^2", (-1, -1, 1, 1), -0.2 + 0.2j),
])
def test_connections_survive_nudge_along_flow(source, box, seed):
    f, region, equilibria, config = analyzed(source, box)
    velocity = f(seed)
    nudged = seed + 1e-4 * velocity / abs(velocity)

    original = connection_type(classify_orbit(f, seed, config, equilibria))
    moved = connection_type(classify_orbit(f, nudged, config, equilibria))
    assert original.kind in (ConnectionKind.Homoclinic, ConnectionKind.Heteroclinic)
    assert moved.kind is original.kind
    assert near(moved.source.location, original.source.location)
    assert near(moved.target.location, original.target.location)


def test_connection_type_rules():
    a = Equilibrium(location=0, order=2, leading_coefficient=1, index=2, derivative=0)
    b = Equilibrium(location=1, order=2, leading_coefficient=1, index=2, derivative=0)
    at = lambda eq: LimitDescriptor(DescriptorKind.SingleEquilibrium, equilibrium=eq, direction=0.0)

    assert connection_type(LimitVerdict(at(a), at(a))).kind is ConnectionKind.Homoclinic
    heteroclinic = connection_type(LimitVerdict(at(b), at(a)))
    assert heteroclinic.kind is ConnectionKind.Heteroclinic
    assert heteroclinic.source is b and heteroclinic.target is a
    assert connection_type(LimitVerdict(at(a), LimitDescriptor(DescriptorKind.Escapes))) == NOT_A_CONNECTION
    periodic = LimitDescriptor(DescriptorKind.PeriodicSelf)
    assert connection_type(LimitVerdict(periodic, periodic)) == NOT_A_CONNECTION


# ---------------------------------------------------------------------------
# Elliptic sector witnesses
# ---------------------------------------------------------------------------

def test_witness_for_two_triple_zeros():
    f, region, equilibria, config = analyzed("z^3*(z-1)^3", EXAMPLE_BOX)
    assert [eq.order for eq in equilibria] == [3, 3]
    for eq in equilibria:
        witness = fed_witness(eq, f, config=config, equilibria=equilibria, region=region)
        assert witness.success
        assert witness.sector_count == 4
        assert len(witness.sectors) == 4
        assert all(len(sector.sample_seeds) == 5 for sector in witness.sectors)
        assert witness_alternates(witness)
        assert witness.require() is witness


def test_witness_for_fifth_order_zero():
    f, region, equilibria, config = analyzed("z^5*exp(z)", (-1, -1, 1, 1))
    witness = fed_witness(equilibria[0], f, config=config, equilibria=equilibria, region=region)
    assert witness.success
    assert witness.sector_count == 8
    assert witness.witness_radius == pytest.approx(0.05)
    for sector in witness.sectors:
        assert sector.witnessed
        assert all(v.kind is ConnectionKind.Homoclinic for v in sector.verdicts)
    assert witness_alternates(witness)


def test_witness_for_double_zero_has_two_sectors():
    f, region, equilibria, config = analyzed("z^2", (-1, -1, 1, 1))
    witness = fed_witness(equilibria[0], f, config=config, equilibria=equilibria, region=region)
    assert witness.success
    assert witness.sector_count == 2
    assert [s.lower_direction for s in witness.sectors] == pytest.approx([0.0, math.pi])


def test_witness_needs_higher_order():
    f, region, equilibria, config = analyzed("-z", (-1, -1, 1, 1))
    with pytest.raises(InvalidOrder):
        fed_witness(equilibria[0], f, config=config)


def test_failed_witness_raises_on_require():
    eq = Equilibrium(location=0, order=2, leading_coefficient=1, index=2, derivative=0)
    failed = FedWitness(eq, sector_count=2, sectors=(), witness_radius=1e-3, success=False, failed_sector=1)
    with pytest.raises(WitnessFailed):
        failed.require()


# ---------------------------------------------------------------------------
# Trichotomy reports
# ---------------------------------------------------------------------------

def test_rotation_report_has_only_periodic_orbits():
    f, region, equilibria, config = analyzed("i*z", (-2, -2, 2, 2))
    report = pb_report(f, region, [0.2, 0.4, 0.6, 0.8, 1.0], config, equilibria)
    assert report.hypothesis_satisfied
    assert report.violations == []
    assert report.excluded_seeds == []
    assert all(c.verdict.omega.kind is DescriptorKind.PeriodicSelf for c in report.classifications)


def test_real_segment_between_triple_zeros_is_heteroclinic():
    f, region, equilibria, config = analyzed("z^3*(z-1)^3", EXAMPLE_BOX)
    report = pb_report(f, region, [0.2, 0.4, 0.6, 0.8], config, equilibria)
    assert report.violations == []
    for item in report.classifications:
        assert item.bounded
        assert item.connection.kind is ConnectionKind.Heteroclinic
        assert near(item.connection.source.location, 1)
        assert near(item.connection.target.location, 0)


def test_unbounded_orbit_from_fifth_order_zero_is_excluded():
    f, region, equilibria, config = analyzed("z^5*exp(z)", (-1, -1, 1, 1), escape_radius=5.0)
    seed = 0.3 * complex(math.cos(math.pi), math.sin(math.pi))
    report = pb_report(f, region, [seed], config, equilibria)

    item = report.classifications[0]
    assert item.verdict.alpha.kind is DescriptorKind.SingleEquilibrium
    assert near(item.verdict.alpha.equilibrium.location, 0)
    assert angular_distance(item.verdict.alpha.direction, math.pi) < 1e-9
    assert item.verdict.omega.kind is DescriptorKind.Escapes
    assert report.excluded_seeds == [item.seed]
    assert report.violations == []


def test_division_switches_off_trichotomy_assertions():
    f, region, equilibria, config = analyzed("z/(z+3)", (-1, -1, 1, 1))
    report = pb_report(f, region, [0.5], config, equilibria)
    assert report.hypothesis_satisfied is False
    assert report.violations == []


def test_trichotomy_over_seed_grid():
    f, region, equilibria, config = analyzed("z^3*(z-1)^3", EXAMPLE_BOX)
    analyzer = FlowAnalyzer(config, verbose=False)
    seeds = analyzer.seeds_for(parse_seed_spec("grid:15", Region.from_box(-0.5, -0.6, 0.75, 0.6)),
                               region, f, equilibria)
    report = pb_report(f, region, seeds, config, equilibria)

    assert report.hypothesis_satisfied
    assert report.violations == []
    on_segment = [c for c in report.classifications if c.seed.imag == 0 and 0 < c.seed.real < 1]
    assert len(on_segment) == 9
    for item in on_segment:
        assert item.connection.kind is ConnectionKind.Heteroclinic
        assert near(item.connection.source.location, 1)
        assert near(item.connection.target.location, 0)
    for item in report.classifications:
        if item.bounded:
            assert DescriptorKind.Unknown not in (item.verdict.alpha.kind, item.verdict.omega.kind)


if __name__ == "__main__":
    exit(pytest.main([__file__, "-v"]))
