#!/usr/bin/env python3
"""
Test zero counting, equilibrium location, orders and indices
"""

from functools import reduce

import numpy as np
import pytest

from src.equilibrium_finder import (
    Circle, Region, equilibrium_tolerance, find_equilibria, order_of, winding_count
)
from src.errors import BoundaryZeroError, ClusterError, PreconditionError
from src.expression_ast import Constant, IntPow, Mul, Sub, Variable
from src.function_model import FunctionModel


def model(source: str) -> FunctionModel:
    return FunctionModel.from_source(source)


def polynomial(roots, multiplicities) -> FunctionModel:
    """prod (z - r)^m built directly as a tree"""
    factors = [IntPow(Sub(Variable(), Constant(r)), m) for r, m in zip(roots, multiplicities)]
    return FunctionModel(reduce(Mul, factors))


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

def test_region_needs_ordered_corners():
    with pytest.raises(PreconditionError):
        Region(1 + 1j, 0)
    with pytest.raises(PreconditionError):
        Region(0, 1 + 0j)


def test_region_boundary_runs_counterclockwise_from_lo():
    region = Region.from_box(-1, -1, 1, 1)
    assert region.point(0.0) == -1 - 1j
    assert region.point(0.25) == 1 - 1j
    assert region.point(0.5) == 1 + 1j
    assert region.point(0.75) == -1 + 1j
    assert region.point(0.125) == -1j


def test_region_split_covers_parent():
    region = Region.from_box(-1, -2, 3, 2)
    children = region.split(0.5123)
    assert len(children) == 4
    assert sum(c.width * c.height for c in children) == pytest.approx(region.width * region.height)
    assert all(region.contains(c.lo) and region.contains(c.hi) for c in children)


# ---------------------------------------------------------------------------
# Winding numbers
# ---------------------------------------------------------------------------

def test_winding_count_known_values():
    assert winding_count(model("z"), Region.from_box(-0.5, -0.5, 0.5, 0.5)) == 1
    assert winding_count(model("z^5*exp(z)"), Region.from_box(-0.5, -0.5, 0.5, 0.5)) == 5
    assert winding_count(model("z^3*(z-1)^3"), Region.from_box(-2, -2, 2, 2)) == 6


def test_winding_count_on_circles():
    assert winding_count(model("z^2"), Circle(0.5, 1.0)) == 2
    assert winding_count(model("z^3*(z-1)^3"), Circle(1.0, 0.5)) == 3
    assert winding_count(model("z-3"), Circle(0, 1.0)) == 0


def test_winding_count_is_negative_around_poles():
    assert winding_count(model("1/(z*z)"), Circle(0, 1.0)) == -2


def test_zero_on_boundary_is_handled_by_growing_the_contour():
    # z = 0.5 is hit exactly by a boundary sample of the unperturbed square
    assert winding_count(model("z-0.5"), Region.from_box(-0.5, -0.5, 0.5, 0.5)) == 1


def test_identically_zero_function_is_a_boundary_zero():
    with pytest.raises(BoundaryZeroError):
        winding_count(model("z-z"), Region.from_box(-1, -1, 1, 1))


def test_fast_rotation_is_refined():
    # exp(8z) turns by about 4 radians between neighbouring samples on the vertical sides
    assert winding_count(model("exp(8*z)*(z-0.1)"), Region.from_box(-1, -1, 1, 1), samples=16) == 1


# ---------------------------------------------------------------------------
# Orders
# ---------------------------------------------------------------------------

def test_order_known_values():
    m, c = order_of(model("z^5*exp(z)"), 0)
    assert (m, c) == (5, pytest.approx(1))
    m, c = order_of(model("z^3*(z-1)^3"), 0)
    assert (m, c) == (3, pytest.approx(-1))
    m, c = order_of(model("z^3*(z-1)^3"), 1)
    assert (m, c) == (3, pytest.approx(1))


def test_order_requires_a_zero():
    with pytest.raises(PreconditionError):
        order_of(model("z^2"), 0.5, tolerance=1e-10)


def test_equilibrium_tolerance_scales_with_function():
    region = Region.from_box(-1, -1, 1, 1)
    assert equilibrium_tolerance(model("1000*z"), region) > equilibrium_tolerance(model("z"), region)
    assert equilibrium_tolerance(model("z-z"), region) == pytest.approx(1e-10)


# ---------------------------------------------------------------------------
# Locating equilibria
# ---------------------------------------------------------------------------

def test_find_single_high_order_zero():
    equilibria = find_equilibria(model("z^5*exp(z)"), Region.from_box(-1, -1, 1, 1))
    assert len(equilibria) == 1
    eq = equilibria[0]
    assert abs(eq.location) < 1e-8
    assert eq.order == 5
    assert eq.index == 5
    assert eq.leading_coefficient == pytest.approx(1)
    assert eq.kind is None


def test_find_two_triple_zeros_sorted():
    equilibria = find_equilibria(model("z^3*(z-1)^3"), Region.from_box(-2, -2, 2, 2))
    assert [eq.order for eq in equilibria] == [3, 3]
    assert abs(equilibria[0].location) < 1e-8
    assert abs(equilibria[1].location - 1) < 1e-8
    assert [eq.index for eq in equilibria] == [3, 3]


def test_find_simple_zeros_carry_derivative():
    equilibria = find_equilibria(model("z^2-1"), Region.from_box(-2, -2, 2, 2))
    assert [eq.order for eq in equilibria] == [1, 1]
    assert equilibria[0].location == pytest.approx(-1, abs=1e-10)
    assert equilibria[1].location == pytest.approx(1, abs=1e-10)
    assert equilibria[1].derivative == pytest.approx(2)


def test_find_nothing_in_empty_region():
    assert find_equilibria(model("z-5"), Region.from_box(-1, -1, 1, 1)) == []


def test_poles_in_region_are_rejected():
    with pytest.raises(PreconditionError):
        find_equilibria(model("1/(z*z)"), Region.from_box(-1, -1, 1, 1))


@pytest.mark.parametrize("source", ["z/(z-0.2)", "(z-0.5)^2/(z+0.5)"])
def test_pole_hidden_by_zero_count_is_rejected(source):
    # zeros and poles cancel in the boundary winding, so the denominator is checked directly
    with pytest.raises(PreconditionError, match="pole"):
        find_equilibria(model(source), Region.from_box(-1, -1, 1, 1))


def test_pole_outside_region_is_allowed():
    equilibria = find_equilibria(model("z/(z+3)"), Region.from_box(-1, -1, 1, 1))
    assert len(equilibria) == 1
    assert abs(equilibria[0].location) < 1e-10
    assert equilibria[0].derivative == pytest.approx(1 / 3)


def test_near_coincident_zeros_are_a_cluster():
    with pytest.raises(ClusterError):
        find_equilibria(model("(z-0.3)*(z-0.3000001)"), Region.from_box(-1, -1, 1, 1))


def test_zeros_are_stable_under_small_region_changes():
    f = model("z^3*(z-1)^3")
    reference = find_equilibria(f, Region.from_box(-2, -2, 2, 2))
    moved = find_equilibria(f, Region.from_box(-2 + 7e-5, -2 - 3e-5, 2 + 5e-5, 2 - 9e-5))
    assert len(moved) == len(reference)
    for a, b in zip(reference, moved):
        assert abs(a.location - b.location) < 1e-8
        assert a.order == b.order


@pytest.mark.parametrize("seed", [3, 11, 29])
def test_random_polynomial_zeros_are_recovered(seed):
    rng = np.random.default_rng(seed)
    while True:
        count = int(rng.integers(2, 5))
        roots = rng.uniform(-0.7, 0.7, count) + 1j * rng.uniform(-0.7, 0.7, count)
        gaps = [abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]]
        if min(gaps) >= 0.2:
            break
    multiplicities = [int(m) for m in rng.integers(1, 4, count)]

    equilibria = find_equilibria(polynomial(roots, multiplicities), Region.from_box(-1, -1, 1, 1))

    expected = sorted(zip(roots, multiplicities), key=lambda rm: (rm[0].real, rm[0].imag))
    assert len(equilibria) == len(expected)
    for eq, (root, m) in zip(equilibria, expected):
        assert abs(eq.location - root) < 1e-8
        assert eq.order == m
        assert eq.index == m


if __name__ == "__main__":
    exit(pytest.main([__file__, "-v"]))
