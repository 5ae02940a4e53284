#!/usr/bin/env python3
"""
Equilibrium Classifier Module
Local theory of holomorphic equilibria: simple-equilibrium taxonomy,
definite directions of higher-order zeros and the polar blow-up system
"""

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import ConsistencyError, InvalidOrder, NotADirection, PreconditionError
from .equilibrium_finder import Equilibrium
from .function_model import FunctionModel
from .taylor_jet import DEFAULT_TRUNCATION, Jet, homogeneous_parts

TWO_PI = 2 * math.pi
ELLIPTIC = "Elliptic"

# Below this radius the blow-up field is summed from the Taylor jet
JET_SWITCH_RADIUS = 1e-8


class SimpleKind(str, Enum):
    StableNode = "StableNode"
    UnstableNode = "UnstableNode"
    StableFocus = "StableFocus"
    UnstableFocus = "UnstableFocus"
    CenterOrFocus = "CenterOrFocus"
    Center = "Center"
    Focus = "Focus"


class TimeDirection(str, Enum):
    Forward = "Forward"
    Backward = "Backward"

    @property
    def sign(self) -> float:
        return 1.0 if self is TimeDirection.Forward else -1.0

    def reversed(self) -> 'TimeDirection':
        return TimeDirection.Backward if self is TimeDirection.Forward else TimeDirection.Forward


@dataclass(frozen=True)
class DefiniteDirection:
    theta: float
    lam: float
    time_sign: TimeDirection


@dataclass(frozen=True)
class DirectionSpectrum:
    equilibrium: Equilibrium
    beta: float
    m: int
    directions: Tuple[DefiniteDirection, ...]

    @property
    def angles(self) -> Tuple[float, ...]:
        return tuple(d.theta for d in self.directions)

    @property
    def gap(self) -> float:
        return math.pi / (self.m - 1)

    def nearest(self, theta: float) -> Tuple[DefiniteDirection, float]:
        """Closest direction to an angle and its circular distance"""
        best = min(self.directions, key=lambda d: angular_distance(d.theta, theta))
        return best, angular_distance(best.theta, theta)


def normalize_angle(theta: float) -> float:
    """Reduce an angle to [0, 2*pi)"""
    reduced = theta - TWO_PI * math.floor(theta / TWO_PI)
    return 0.0 if reduced >= TWO_PI else reduced


def angular_distance(a: float, b: float) -> float:
    d = normalize_angle(a - b)
    return min(d, TWO_PI - d)


# ---------------------------------------------------------------------------
# Simple equilibria
# ---------------------------------------------------------------------------

def eigen_pair(f_prime_at_a: complex) -> Tuple[complex, complex]:
    """Eigenvalues of the real Jacobian at a simple equilibrium: F'(a) and its conjugate"""
    f_prime_at_a = complex(f_prime_at_a)
    return f_prime_at_a, f_prime_at_a.conjugate()


def real_jacobian(f_prime_at_a: complex) -> np.ndarray:
    """Jacobian of (Re F, Im F) in (x, y), by the Cauchy-Riemann equations"""
    a, b = f_prime_at_a.real, f_prime_at_a.imag
    return np.array([[a, -b], [b, a]])


def assert_not_saddle(f_prime_at_a: complex) -> None:
    """
    Check that the real Jacobian has the eigenvalues F'(a), conj F'(a)
    and therefore no pair of real eigenvalues with opposite signs

    Raises:
        ConsistencyError: if either check fails
    """
    computed = np.sort_complex(np.linalg.eigvals(real_jacobian(f_prime_at_a)))
    expected = np.sort_complex(np.array(eigen_pair(f_prime_at_a)))
    if np.max(np.abs(computed - expected)) > 1e-12 * (1 + abs(f_prime_at_a)):
        raise ConsistencyError(f"Jacobian eigenvalues {computed} differ from {expected}")
    if np.all(np.abs(computed.imag) == 0) and computed[0].real * computed[1].real < 0:
        raise ConsistencyError(f"Saddle-type Jacobian at F'(a) = {f_prime_at_a}")


def classify_simple(eq: Equilibrium, f_prime_at_a: complex) -> SimpleKind:
    """
    Node / focus / center-or-focus verdict from F'(a) = alpha + i beta

    Args:
        eq: Equilibrium of order 1
        f_prime_at_a: F'(a), nonzero

    Returns:
        SimpleKind verdict
    """
    if eq.order != 1:
        raise InvalidOrder(f"Simple classification needs order 1, got {eq.order}")
    if f_prime_at_a == 0:
        raise PreconditionError("F'(a) vanishes at a simple equilibrium")

    threshold = 1e-12 * abs(f_prime_at_a)
    alpha = f_prime_at_a.real if abs(f_prime_at_a.real) > threshold else 0.0
    beta = f_prime_at_a.imag if abs(f_prime_at_a.imag) > threshold else 0.0
    if alpha == 0:
        return SimpleKind.CenterOrFocus
    if beta == 0:
        return SimpleKind.StableNode if alpha < 0 else SimpleKind.UnstableNode
    return SimpleKind.StableFocus if alpha < 0 else SimpleKind.UnstableFocus


# ---------------------------------------------------------------------------
# Higher-order equilibria
# ---------------------------------------------------------------------------

def _require_higher_order(eq: Equilibrium) -> None:
    if eq.order < 2:
        raise InvalidOrder(f"Operation needs order >= 2, got {eq.order}")
    if eq.leading_coefficient == 0:
        raise PreconditionError("Leading coefficient vanishes")


def definite_directions(eq: Equilibrium) -> DirectionSpectrum:
    """
    The 2m-2 definite directions of an equilibrium of order m >= 2

    Args:
        eq: Equilibrium with order and leading coefficient c_m

    Returns:
        Spectrum sorted by angle, each direction with lambda = cos(beta + (m-1) theta)
        and the time direction in which orbits approach along it
    """
    _require_higher_order(eq)
    m = eq.order
    beta = cmath.phase(eq.leading_coefficient)

    angles = sorted(normalize_angle((ell * math.pi - beta) / (m - 1)) for ell in range(2 * m - 2))
    directions = []
    for theta in angles:
        lam = math.cos(beta + theta * (m - 1))
        sign = TimeDirection.Forward if lam < 0 else TimeDirection.Backward
        directions.append(DefiniteDirection(theta=theta, lam=lam, time_sign=sign))
    return DirectionSpectrum(equilibrium=eq, beta=beta, m=m, directions=tuple(directions))


def h_tilde(eq: Equilibrium, theta: float) -> float:
    """
    Angular blow-up field on the exceptional circle, |c_m| sin(beta + (m-1) theta)

    Cross-checked against cos(theta) F2 - sin(theta) F1, with F1, F2 the real
    degree-m Taylor parts evaluated at (cos theta, sin theta).
    """
    _require_higher_order(eq)
    c, m = eq.leading_coefficient, eq.order
    closed_form = abs(c) * math.sin(cmath.phase(c) + (m - 1) * theta)

    f1, f2 = homogeneous_parts(c, m, math.cos(theta), math.sin(theta))
    from_parts = math.cos(theta) * f2 - math.sin(theta) * f1
    if abs(closed_form - from_parts) > 1e-10 * max(1.0, abs(c)):
        raise ConsistencyError(
            f"H~({theta}) closed form {closed_form} disagrees with Taylor parts {from_parts}"
        )
    return closed_form


class BlowupSystem:
    """Polar blow-up (rho, theta) of z' = F(z) at an equilibrium, time rescaled by rho^(m-1)"""

    def __init__(self, equilibrium: Equilibrium, function: FunctionModel):
        self.equilibrium = equilibrium
        self.function = function
        self.m = equilibrium.order
        self._jet: Optional[Jet] = None

    @property
    def jet(self) -> Jet:
        if self._jet is None:
            self._jet = self.function.jet(self.equilibrium.location, DEFAULT_TRUNCATION)
        return self._jet

    def rhs(self, rho: float, theta: float) -> Tuple[float, float]:
        """(rho', theta') at a blow-up point"""
        rotation = cmath.exp(1j * theta)
        if abs(rho) >= JET_SWITCH_RADIUS:
            w = self.function(self.equilibrium.location + rho * rotation) / rotation
            return w.real / rho ** (self.m - 1), w.imag / rho ** self.m

        # sum_{k>=m} c_k rho^(k-m) e^{i(k-1) theta}
        u = rho * rotation
        tail = 0j
        for c in reversed(self.jet.coefficients[self.m:]):
            tail = tail * u + c
        q = tail * cmath.exp(1j * (self.m - 1) * theta)
        return rho * q.real, q.imag

    __call__ = rhs


def blowup(eq: Equilibrium, f: FunctionModel) -> BlowupSystem:
    if eq.order < 1:
        raise InvalidOrder(f"Blow-up needs order >= 1, got {eq.order}")
    return BlowupSystem(eq, f)


def finite_difference_eigenvalues(system: BlowupSystem, theta0: float,
                                  step: float = 1e-5) -> np.ndarray:
    """Sorted real eigenvalues of the central-difference Jacobian of the blow-up at (0, theta0)"""
    plus_rho, minus_rho = system.rhs(step, theta0), system.rhs(-step, theta0)
    plus_theta, minus_theta = system.rhs(0.0, theta0 + step), system.rhs(0.0, theta0 - step)
    jacobian = np.array([
        [plus_rho[0] - minus_rho[0], plus_theta[0] - minus_theta[0]],
        [plus_rho[1] - minus_rho[1], plus_theta[1] - minus_theta[1]],
    ]) / (2 * step)
    return np.sort(np.linalg.eigvals(jacobian).real)


def blowup_linearization(eq: Equilibrium, theta0: float,
                         system: Optional[BlowupSystem] = None) -> Tuple[float, float]:
    """
    Eigenvalues of the blow-up system at (0, theta0)

    Args:
        eq: Equilibrium of order m >= 2
        theta0: A definite direction
        system: If given, the closed form is checked against finite differences of its rhs

    Returns:
        (lambda1, lambda2) with lambda2 = (m-1) lambda1
    """
    _require_higher_order(eq)
    if abs(h_tilde(eq, theta0)) > 1e-6:
        raise NotADirection(f"theta0={theta0} is not a definite direction")

    c, m = eq.leading_coefficient, eq.order
    lambda1 = abs(c) * math.cos(cmath.phase(c) + (m - 1) * theta0)
    if abs(lambda1) < 1e-9:
        raise NotADirection(f"Degenerate eigenvalue at theta0={theta0}")
    lambda2 = (m - 1) * lambda1

    if system is not None:
        numeric = finite_difference_eigenvalues(system, theta0)
        closed = np.sort([lambda1, lambda2])
        if np.any(np.abs(numeric - closed) > 1e-5 * np.abs(closed)):
            raise ConsistencyError(f"Finite-difference eigenvalues {numeric} differ from {closed}")
    return lambda1, lambda2


def classify_equilibrium(eq: Equilibrium, f: FunctionModel) -> Equilibrium:
    """Equilibrium with its kind filled in (SimpleKind value, or Elliptic for order >= 2)"""
    if eq.order >= 2:
        return replace(eq, kind=ELLIPTIC)
    f_prime = f.derivative(eq.location)
    assert_not_saddle(f_prime)
    return replace(eq, kind=classify_simple(eq, f_prime).value, derivative=f_prime)
