#!/usr/bin/env python3
"""
Equilibrium Finder Module
Locates the zeros of F in a rectangle by argument-principle subdivision,
polishes them by Newton iteration and determines order and index
"""

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import (
    BoundaryZeroError, ClusterError, ConsistencyError, EvaluationError, NonConvergence,
    OrderUndetermined, PreconditionError
)
from .expression_ast import denominators, to_source
from .function_model import FunctionModel
from .taylor_jet import DEFAULT_TRUNCATION

BOUNDARY_SAMPLES = 256
MAX_REFINE_DEPTH = 20
BOUNDARY_PERTURBATIONS = 3
PERTURBATION_FACTOR = 1.0 + 1e-3

CLUSTER_COUNT = 8
MIN_CELL_DIAMETER = 1e-3
MIN_SEPARATION = 1e-6
SPLIT_FRACTIONS = (0.5123, 0.4729, 0.5377)
NEWTON_STARTS = 5
NEWTON_ITERATIONS = 100
INDEX_RADIUS = 1e-2


@dataclass(frozen=True)
class Region:
    """Closed axis-aligned rectangle [lo.re, hi.re] x [lo.im, hi.im]"""

    lo: complex
    hi: complex

    def __post_init__(self):
        lo, hi = complex(self.lo), complex(self.hi)
        if not (cmath.isfinite(lo) and cmath.isfinite(hi)):
            raise PreconditionError("Region corners must be finite")
        if not (lo.real < hi.real and lo.imag < hi.imag):
            raise PreconditionError(f"Region needs lo < hi componentwise, got lo={lo}, hi={hi}")
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @classmethod
    def from_box(cls, x0: float, y0: float, x1: float, y1: float) -> 'Region':
        return cls(complex(x0, y0), complex(x1, y1))

    @property
    def width(self) -> float:
        return self.hi.real - self.lo.real

    @property
    def height(self) -> float:
        return self.hi.imag - self.lo.imag

    @property
    def center(self) -> complex:
        return (self.lo + self.hi) / 2

    @property
    def diameter(self) -> float:
        return abs(self.hi - self.lo)

    def contains(self, z: complex) -> bool:
        return (self.lo.real <= z.real <= self.hi.real
                and self.lo.imag <= z.imag <= self.hi.imag)

    def distance_to_boundary(self, z: complex) -> float:
        """Distance from an interior point to the nearest side"""
        return min(z.real - self.lo.real, self.hi.real - z.real,
                   z.imag - self.lo.imag, self.hi.imag - z.imag)

    def grown(self, factor: float) -> 'Region':
        half = (self.hi - self.lo) / 2 * factor
        return Region(self.center - half, self.center + half)

    def split(self, fraction: float = 0.5) -> List['Region']:
        """Four sub-rectangles cut at the given fraction of width and height"""
        x = self.lo.real + fraction * self.width
        y = self.lo.imag + fraction * self.height
        lo, hi = self.lo, self.hi
        return [
            Region(lo, complex(x, y)),
            Region(complex(x, lo.imag), complex(hi.real, y)),
            Region(complex(lo.real, y), complex(x, hi.imag)),
            Region(complex(x, y), hi),
        ]

    def corners(self) -> np.ndarray:
        """Corners in counterclockwise order starting at lo"""
        return np.array([self.lo, complex(self.hi.real, self.lo.imag),
                         self.hi, complex(self.lo.real, self.hi.imag)])

    def points(self, s) -> np.ndarray:
        """
        Counterclockwise boundary parametrization

        Args:
            s: Parameter values (taken mod 1; each side gets a quarter)

        Returns:
            Boundary points as a complex array
        """
        s = np.mod(np.asarray(s, dtype=float), 1.0)
        side = np.minimum((s * 4).astype(int), 3)
        u = s * 4 - side
        corners = self.corners()
        start = corners[side]
        end = corners[(side + 1) % 4]
        return start + u * (end - start)

    def point(self, s: float) -> complex:
        return complex(self.points(np.array([s]))[0])


@dataclass(frozen=True)
class Circle:
    """Counterclockwise circle used for index computations"""

    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise PreconditionError(f"Circle radius must be positive, got {self.radius}")
        object.__setattr__(self, 'center', complex(self.center))

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) <= self.radius

    def grown(self, factor: float) -> 'Circle':
        return Circle(self.center, self.radius * factor)

    def points(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self.center + self.radius * np.exp(2j * np.pi * s)

    def point(self, s: float) -> complex:
        return self.center + self.radius * cmath.exp(2j * math.pi * s)


Contour = Union[Region, Circle]


@dataclass(frozen=True)
class Equilibrium:
    """A zero of F with its local data"""

    location: complex
    order: int
    leading_coefficient: complex
    index: int
    derivative: complex  # F'(a)
    kind: Optional[str] = None


# ---------------------------------------------------------------------------
# Argument principle
# ---------------------------------------------------------------------------

def _refined_increment(f: FunctionModel, contour: Contour, s0: float, s1: float,
                       v0: complex, v1: complex, depth: int, eps_boundary: float) -> float:
    """Argument change along [s0, s1] by recursive bisection"""
    if depth > MAX_REFINE_DEPTH:
        raise NonConvergence(
            f"Argument refinement exceeded depth {MAX_REFINE_DEPTH} near s={s0:.6g}"
        )
    sm = (s0 + s1) / 2
    vm = f(contour.point(sm))
    if abs(vm) <= eps_boundary:
        raise BoundaryZeroError(f"F vanishes on the contour near {contour.point(sm)!r}")

    total = 0.0
    for a, b, va, vb in ((s0, sm, v0, vm), (sm, s1, vm, v1)):
        increment = cmath.phase(vb / va)
        if abs(increment) > math.pi / 2:
            increment = _refined_increment(f, contour, a, b, va, vb, depth + 1, eps_boundary)
        total += increment
    return total


def _winding_once(f: FunctionModel, contour: Contour, samples: int) -> int:
    s = np.linspace(0.0, 1.0, samples + 1)
    values = f.evaluate_many(contour.points(s))
    moduli = np.abs(values)
    eps_boundary = 1e-13 * max(float(np.max(moduli)), np.finfo(float).tiny)
    if np.any(moduli <= eps_boundary):
        where = contour.points(s[int(np.argmin(moduli))])
        raise BoundaryZeroError(f"F vanishes on the contour near {complex(where)!r}")

    increments = np.angle(values[1:] / values[:-1])
    total = float(np.sum(increments[np.abs(increments) <= math.pi / 2]))
    for k in np.flatnonzero(np.abs(increments) > math.pi / 2):
        total += _refined_increment(f, contour, s[k], s[k + 1], complex(values[k]),
                                    complex(values[k + 1]), 1, eps_boundary)

    turns = total / (2 * math.pi)
    count = round(turns)
    if abs(turns - count) > 0.25:
        raise NonConvergence(f"Winding {turns:.6f} is not close to an integer")
    return int(count)


def _count_with_perturbation(f: FunctionModel, contour: Contour,
                             samples: int) -> Tuple[int, Contour]:
    attempt = contour
    for _ in range(BOUNDARY_PERTURBATIONS):
        try:
            return _winding_once(f, attempt, samples), attempt
        except BoundaryZeroError:
            attempt = attempt.grown(PERTURBATION_FACTOR)
    return _winding_once(f, attempt, samples), attempt


def winding_count(f: FunctionModel, contour: Contour, samples: int = BOUNDARY_SAMPLES) -> int:
    """
    Number of zeros of F inside a contour, counted with multiplicity

    Args:
        f: Holomorphic function
        contour: Region (rectangle boundary) or Circle
        samples: Initial uniform samples along the contour

    Returns:
        Total argument change of F along the contour divided by 2*pi

    Raises:
        BoundaryZeroError: F vanishes on the contour after all perturbations
        NonConvergence: refinement depth exceeded
    """
    count, _ = _count_with_perturbation(f, contour, samples)
    return count


# ---------------------------------------------------------------------------
# Order and tolerance
# ---------------------------------------------------------------------------

def equilibrium_tolerance(f: FunctionModel, region: Region) -> float:
    """Scale-aware zero threshold from a 4x4 interior sample grid"""
    fractions = (np.arange(4) + 0.5) / 4
    xs = region.lo.real + fractions * region.width
    ys = region.lo.imag + fractions * region.height
    samples = (xs[None, :] + 1j * ys[:, None]).ravel()
    return 1e-10 * (1.0 + float(np.max(np.abs(f.evaluate_many(samples)))))


def order_of(f: FunctionModel, a: complex,
             tolerance: Optional[float] = None) -> Tuple[int, complex]:
    """
    Order of a zero and its leading Taylor coefficient

    Args:
        f: Holomorphic function
        a: Zero of F
        tolerance: If given, |F(a)| must not exceed it

    Returns:
        (m, c_m) with m the first non-negligible jet index k >= 1
    """
    if tolerance is not None and abs(f(a)) > tolerance:
        raise PreconditionError(f"|F({a})| = {abs(f(a)):.3g} exceeds zero tolerance {tolerance:.3g}")
    jet = f.jet(a, DEFAULT_TRUNCATION)
    for k in range(1, jet.truncation + 1):
        if not jet.is_negligible(k):
            return k, jet[k]
    raise OrderUndetermined(f"All Taylor coefficients at {a!r} up to order {jet.truncation} are negligible")


# ---------------------------------------------------------------------------
# Newton polishing
# ---------------------------------------------------------------------------

def _newton_quotient(f: FunctionModel, start: complex) -> complex:
    """Newton on g = F/F', whose zeros are all simple"""
    z = complex(start)
    for _ in range(NEWTON_ITERATIONS):
        c0, c1, c2 = f.jet(z, 2).coefficients
        if c0 == 0:
            return z
        denominator = c1 * c1 - 2 * c0 * c2
        if denominator == 0:
            raise NonConvergence(f"Newton quotient step undefined at {z!r}")
        step = c0 * c1 / denominator
        if not cmath.isfinite(step):
            raise NonConvergence(f"Newton step diverged at {z!r}")
        z -= step
        if abs(step) <= 1e-15 * (1 + abs(z)):
            return z
    raise NonConvergence(f"Newton did not converge from {start!r}")


def _polish_multiple(f: FunctionModel, z: complex, order: int) -> complex:
    """Newton on F^(order-1), which has a simple zero at a zero of order `order`"""
    for _ in range(NEWTON_ITERATIONS):
        jet = f.jet(z, order)
        if jet[order] == 0:
            return z
        step = jet[order - 1] / (order * jet[order])
        z -= step
        if abs(step) <= 1e-15 * (1 + abs(z)):
            break
    return z


def _try_resolve(f: FunctionModel, cell: Region, count: int,
                 eps_zero: float) -> Tuple[Optional[Tuple[complex, int, complex]], bool]:
    """
    Look for a single zero of order `count` inside a cell

    Returns:
        ((location, order, c_m) or None, whether some converged zero had another order)
    """
    spread = 0.1 * cell.diameter
    starts = [cell.center] + [
        cell.center + spread * cmath.exp(1j * (2 * math.pi * k / 4 + 0.3))
        for k in range(NEWTON_STARTS - 1)
    ]
    order_mismatch = False
    for start in starts:
        try:
            root = _newton_quotient(f, start)
            if count > 1:
                polished = _polish_multiple(f, root, count)
                if cell.contains(polished) and abs(f(polished)) <= abs(f(root)):
                    root = polished
            if not cell.contains(root) or abs(f(root)) > eps_zero:
                continue
            m, c_m = order_of(f, root)
        except (NonConvergence, EvaluationError, OrderUndetermined):
            continue
        if m == count:
            return (root, m, c_m), order_mismatch
        order_mismatch = True
    return None, order_mismatch


def _split_counted(f: FunctionModel, cell: Region, count: int) -> List[Tuple[Region, int]]:
    for fraction in SPLIT_FRACTIONS:
        try:
            children = [(child, _winding_once(f, child, BOUNDARY_SAMPLES))
                        for child in cell.split(fraction)]
        except (BoundaryZeroError, NonConvergence):
            continue
        if sum(n for _, n in children) == count:
            return children
    raise NonConvergence(f"Could not subdivide cell {cell} with zero count {count}")


def _reject_poles(f: FunctionModel, region: Region) -> None:
    """Raise if any Div denominator of F vanishes inside the region"""
    for denominator in denominators(f.ast):
        zeros = find_equilibria(FunctionModel(denominator), region)
        if zeros:
            raise PreconditionError(
                f"F has a pole at {zeros[0].location:.6g} (zero of {to_source(denominator)}) inside {region}"
            )


def find_equilibria(f: FunctionModel, region: Region) -> List[Equilibrium]:
    """
    All zeros of F in a region with order and index

    Args:
        f: Holomorphic function (not identically zero)
        region: Analysis rectangle (no zero on its boundary)

    Returns:
        Equilibria sorted by (re, im), kind left unset

    Raises:
        PreconditionError: a denominator of F vanishes in the region
    """
    _reject_poles(f, region)
    eps_zero = equilibrium_tolerance(f, region)
    total, contour = _count_with_perturbation(f, region, BOUNDARY_SAMPLES)
    if contour != region:
        _reject_poles(f, contour)
    if total < 0:
        raise PreconditionError(f"Negative zero count {total}: F has poles in the region")

    roots: List[Tuple[complex, int, complex]] = []
    stack = [(contour, total)]
    while stack:
        cell, count = stack.pop()
        if count == 0:
            continue
        mismatch = False
        if count <= CLUSTER_COUNT:
            resolved, mismatch = _try_resolve(f, cell, count, eps_zero)
            if resolved is not None:
                roots.append(resolved)
                continue
        if cell.diameter <= MIN_CELL_DIAMETER:
            if mismatch:
                raise ClusterError(f"{count} zeros in cell {cell} cannot be separated")
            raise NonConvergence(f"Newton failed from {NEWTON_STARTS} starts in cell {cell}")
        stack.extend(_split_counted(f, cell, count))

    roots.sort(key=lambda root: (root[0].real, root[0].imag))
    locations = [root[0] for root in roots]
    for i, a in enumerate(locations):
        for b in locations[i + 1:]:
            if abs(a - b) <= MIN_SEPARATION:
                raise ClusterError(f"Zeros {a!r} and {b!r} are closer than {MIN_SEPARATION}")
    if sum(root[1] for root in roots) != total:
        raise ConsistencyError(f"Orders sum to {sum(r[1] for r in roots)}, winding count is {total}")

    equilibria = []
    for a, m, c_m in roots:
        others = [abs(a - b) for b in locations if b != a]
        radius = min([INDEX_RADIUS] + [d / 2 for d in others])
        index = winding_count(f, Circle(a, radius))
        if index != m:
            raise ConsistencyError(f"Index {index} differs from order {m} at {a!r}")
        equilibria.append(Equilibrium(
            location=a, order=m, leading_coefficient=c_m, index=index,
            derivative=f.jet(a, 1)[1]
        ))
    return equilibria
