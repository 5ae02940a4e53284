#!/usr/bin/env python3
"""
Flow Integrator Module
Adaptive Dormand-Prince integration of z' = F(z) with event detection
"""

import cmath
import math
from dataclasses import dataclass, replace as dataclass_replace
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from .equilibrium_classifier import TimeDirection, normalize_angle
from .equilibrium_finder import Equilibrium
from .errors import EvaluationError, NoReturn, PreconditionError, StepUnderflow
from .function_model import FunctionModel

# Dormand-Prince 5(4) tableau, last row is the 5th order solution (FSAL)
DOPRI_A = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
DOPRI_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
PI_ALPHA = 0.17
PI_BETA = 0.04

CAPTURE_WINDOW = 10
ANGLE_FIT_WINDOW = 20
HIGHER_ORDER_STEP_FRACTION = 0.1
CROSSING_TOLERANCE = 1e-12
CLOSURE_TOLERANCE = 1e-6
VELOCITY_TOLERANCE = 1e-3
BLOWUP_DOUBLINGS = 6
BLOWUP_RATIO = 0.9


@dataclass(frozen=True)
class IntegrationConfig:
    """
    Tolerances and budgets for one orbit half

    max_time bounds the rescaled time s in which the integrator steps, not the
    physical time t recorded in Orbit.times. The two agree unless the field has
    equilibria of order >= 2, where ds/dt = 1 + sum 1/(|c_m| |z-a|^(m-1)) and t
    falls behind s near those zeros.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_time: float = 200.0
    escape_radius: float = 10.0
    equilibrium_capture_radius: float = 1e-7
    min_step: float = 1e-13
    max_samples: int = 2_000_000
    escape_center: complex = 0j

    def __post_init__(self):
        for name in ('rel_tol', 'abs_tol', 'max_time', 'escape_radius',
                     'equilibrium_capture_radius', 'min_step', 'max_samples'):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.rel_tol < 1e-13:
            raise ValueError(f"rel_tol must be at least 1e-13, got {self.rel_tol}")
        object.__setattr__(self, 'max_samples', int(self.max_samples))
        object.__setattr__(self, 'escape_center', complex(self.escape_center))

    def replace(self, **changes) -> 'IntegrationConfig':
        return dataclass_replace(self, **changes)


class TerminationKind(str, Enum):
    CapturedByEquilibrium = "CapturedByEquilibrium"
    Escaped = "Escaped"
    PeriodClosed = "PeriodClosed"
    TimeBudgetExhausted = "TimeBudgetExhausted"
    BlowupInFiniteTime = "BlowupInFiniteTime"


@dataclass(frozen=True)
class TerminationEvent:
    kind: TerminationKind
    equilibrium: Optional[Equilibrium] = None
    approach_angle: Optional[float] = None
    period: Optional[float] = None
    blowup_time: Optional[float] = None
    budget: Optional[float] = None


@dataclass(eq=False)
class Orbit:
    """Time-stamped samples of one orbit half"""

    seed: complex
    direction: TimeDirection
    times: np.ndarray
    points: np.ndarray
    termination: TerminationEvent

    @property
    def final_point(self) -> complex:
        return complex(self.points[-1])

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class AcceptedStep:
    y_prev: np.ndarray
    k_prev: np.ndarray
    h: float
    y_new: np.ndarray


def dopri_step(rhs: Callable, y, h: float, k1=None):
    """
    One Dormand-Prince 5(4) step

    Args:
        rhs: Right-hand side y -> y'
        y: Current state (scalar or numpy array)
        h: Step size
        k1: rhs(y), if already known

    Returns:
        (5th order solution, embedded error estimate, rhs at the new state)
    """
    stages = [rhs(y) if k1 is None else k1]
    y_stage = y
    for row in DOPRI_A:
        y_stage = y + h * sum(a * k for a, k in zip(row, stages))
        stages.append(rhs(y_stage))
    error = h * sum(e * k for e, k in zip(DOPRI_E, stages))
    return y_stage, error, stages[-1]


def approach_angle(points: np.ndarray, location: complex) -> float:
    """Limiting argument of z - a, fitted linearly against |z - a| over the final samples"""
    tail = np.asarray(points[-ANGLE_FIT_WINDOW:], dtype=complex) - location
    radii = np.abs(tail)
    angles = np.unwrap(np.angle(tail))
    if len(tail) >= 3 and np.ptp(radii) > 0:
        _, intercept = np.polyfit(radii, angles, 1)
        return normalize_angle(float(intercept))
    return normalize_angle(float(angles[-1]))


class _AdaptiveStepper:
    """Dormand-Prince stepping with a PI controller"""

    def __init__(self, rhs: Callable, y0: np.ndarray, h0: float, config: IntegrationConfig,
                 error_scale: Callable, step_bound: Callable):
        self.rhs = rhs
        self.y = y0
        self.k = rhs(y0)
        self.h = h0
        self.s = 0.0
        self.config = config
        self.error_scale = error_scale
        self.step_bound = step_bound
        self.err_prev = 1e-4

    def advance(self, remaining: float) -> Optional[AcceptedStep]:
        """Take one accepted step (None if less than min_step of budget is left)"""
        if remaining < self.config.min_step:
            return None
        h = min(self.h, self.step_bound(self.y, self.k), remaining)
        while True:
            if h < self.config.min_step:
                raise StepUnderflow("Step size fell below min_step",
                                    float(self.y[1].real), complex(self.y[0]))
            try:
                y_new, error, k_new = dopri_step(self.rhs, self.y, h, self.k)
                scale = self.error_scale(complex(self.y[0]), complex(y_new[0]))
                err = abs(error[0]) / (math.sqrt(2) * scale)
                usable = math.isfinite(err) and np.all(np.isfinite(y_new))
            except EvaluationError:
                usable = False

            if usable and err <= 1.0:
                if err == 0:
                    factor = MAX_FACTOR
                else:
                    factor = SAFETY * err ** -PI_ALPHA * self.err_prev ** PI_BETA
                    factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
                self.err_prev = max(err, 1e-4)
                step = AcceptedStep(y_prev=self.y, k_prev=self.k, h=h, y_new=y_new)
                self.y, self.k = y_new, k_new
                self.s += h
                self.h = h * factor
                return step

            h *= max(MIN_FACTOR, SAFETY * err ** -0.2) if usable else MIN_FACTOR


class FlowIntegrator:
    """Integrates orbits of z' = F(z) against a known set of equilibria"""

    def __init__(self, function: FunctionModel, config: Optional[IntegrationConfig] = None,
                 equilibria: Sequence[Equilibrium] = (), detect_blowup: bool = True):
        """
        Initialize the integrator

        Args:
            function: Right-hand side F
            config: Tolerances and budgets
            equilibria: Known zeros of F (capture targets)
            detect_blowup: Keep stepping beyond the escape radius for finite-time blow-up
        """
        self.function = function
        self.config = config or IntegrationConfig()
        self.equilibria = tuple(equilibria)
        self.detect_blowup = detect_blowup
        self._higher = [(eq.location, abs(eq.leading_coefficient), eq.order)
                        for eq in self.equilibria if eq.order >= 2]

    def capture_radius(self, eq: Equilibrium) -> float:
        return max(self.config.equilibrium_capture_radius, 1e-9 * abs(eq.location) + 1e-12)

    def stretch(self, z: complex) -> float:
        """Time rescale 1 + sum 1/(|c_m| |z-a|^(m-1)) over equilibria of order >= 2"""
        return 1.0 + sum(1.0 / (c * abs(z - a) ** (m - 1)) for a, c, m in self._higher)

    def _rhs(self, sigma: float) -> Callable:
        def rhs(y: np.ndarray) -> np.ndarray:
            z = complex(y[0])
            stretch = self.stretch(z)
            return np.array([sigma * self.function(z) * stretch, stretch], dtype=complex)
        return rhs

    def _error_scale(self, z: complex, z_new: complex) -> float:
        size = max(abs(z), abs(z_new))
        if self.equilibria:
            size = min(size, min(abs(z_new - eq.location) for eq in self.equilibria))
        return self.config.abs_tol + self.config.rel_tol * size

    def _step_bound(self, y: np.ndarray, k: np.ndarray) -> float:
        speed = abs(k[0])
        if speed == 0 or not self._higher:
            return math.inf
        z = complex(y[0])
        nearest = min(abs(z - a) for a, _, _ in self._higher)
        return HIGHER_ORDER_STEP_FRACTION * nearest / speed

    def _stepper(self, seed: complex, sigma: float) -> _AdaptiveStepper:
        rhs = self._rhs(sigma)
        y0 = np.array([seed, 0.0], dtype=complex)
        speed = abs(rhs(y0)[0])
        h0 = 0.01 * max(abs(seed), 1e-3) / speed if speed > 0 else 0.01
        h0 = min(0.1, max(10 * self.config.min_step, h0))
        return _AdaptiveStepper(rhs, y0, h0, self.config, self._error_scale, self._step_bound)

    def _captured(self, z: complex) -> Optional[Equilibrium]:
        for eq in self.equilibria:
            if abs(z - eq.location) <= self.capture_radius(eq):
                return eq
        return None

    @staticmethod
    def _locate_crossing(stepper: _AdaptiveStepper, step: AcceptedStep,
                         crossing: Callable[[complex], float], tolerance: float) -> np.ndarray:
        """Bisect the step length until the crossing function is within tolerance of zero"""
        lo, hi = 0.0, step.h
        y = step.y_new
        for _ in range(200):
            mid = (lo + hi) / 2
            y, _, _ = dopri_step(stepper.rhs, step.y_prev, mid, step.k_prev)
            value = crossing(complex(y[0]))
            if abs(value) <= tolerance or hi - lo <= 1e-16 * step.h:
                break
            if value < 0:
                lo = mid
            else:
                hi = mid
        return y

    def integrate(self, seed: complex, direction: TimeDirection = TimeDirection.Forward) -> Orbit:
        """
        Integrate one orbit half until the first termination event

        Args:
            seed: Initial point (not within capture radius of an equilibrium)
            direction: Forward integrates z' = F(z), Backward z' = -F(z)

        Returns:
            Orbit with physical times, samples and termination event
        """
        seed = complex(seed)
        captured = self._captured(seed)
        if captured is not None:
            raise PreconditionError(f"Seed {seed!r} lies within capture radius of {captured.location!r}")

        config = self.config
        sigma = direction.sign
        stepper = self._stepper(seed, sigma)
        velocity = complex(stepper.k[0])
        if velocity == 0:
            raise PreconditionError(f"Seed {seed!r} is an equilibrium")
        v0 = velocity / abs(velocity)
        transversal = lambda z: ((z - seed) * v0.conjugate()).real

        times: List[float] = [0.0]
        points: List[complex] = [seed]
        moduli: List[float] = [abs(self.function(seed))]

        def finish(event: TerminationEvent) -> Orbit:
            return Orbit(seed=seed, direction=direction, times=np.array(times),
                         points=np.array(points, dtype=complex), termination=event)

        budget = TerminationEvent(TerminationKind.TimeBudgetExhausted, budget=config.max_time)
        previous_g = 0.0
        while True:
            if len(points) >= config.max_samples:
                return finish(budget)
            try:
                step = stepper.advance(config.max_time - stepper.s)
            except StepUnderflow as e:
                if len(moduli) > 1 and moduli[-1] > moduli[max(0, len(moduli) - CAPTURE_WINDOW)]:
                    return finish(TerminationEvent(TerminationKind.BlowupInFiniteTime,
                                                   blowup_time=_one_digit(e.time)))
                raise
            if step is None:
                return finish(budget)

            z, t = complex(step.y_new[0]), float(step.y_new[1].real)
            times.append(t)
            points.append(z)
            moduli.append(abs(self.function(z)))

            eq = self._captured(z)
            if eq is not None and _nonincreasing(moduli[-CAPTURE_WINDOW:]):
                return finish(TerminationEvent(
                    TerminationKind.CapturedByEquilibrium, equilibrium=eq,
                    approach_angle=approach_angle(np.array(points), eq.location)
                ))

            if abs(z - config.escape_center) > config.escape_radius:
                if not self.detect_blowup:
                    return finish(TerminationEvent(TerminationKind.Escaped))
                return finish(self._follow_beyond_escape(stepper, step))

            g = transversal(z)
            if previous_g < 0 <= g:
                y = self._locate_crossing(stepper, step, transversal,
                                          CROSSING_TOLERANCE * (1 + abs(seed)))
                zc, tc = complex(y[0]), float(y[1].real)
                vc = complex(stepper.rhs(y)[0])
                closed = (abs(zc - seed) <= CLOSURE_TOLERANCE * (1 + abs(seed))
                          and vc != 0 and abs(cmath.phase(vc / v0)) <= VELOCITY_TOLERANCE)
                if closed:
                    times[-1], points[-1] = tc, zc
                    return finish(TerminationEvent(TerminationKind.PeriodClosed, period=tc))
            previous_g = g

    def _follow_beyond_escape(self, stepper: _AdaptiveStepper, step: AcceptedStep) -> TerminationEvent:
        """Keep integrating past the escape radius and look for collapsing crossing intervals"""
        center = self.config.escape_center
        marks = [self.config.escape_radius * 2 ** k for k in range(BLOWUP_DOUBLINGS + 1)]
        crossings: List[float] = []

        def record(previous: np.ndarray, current: np.ndarray) -> None:
            r0 = abs(complex(previous[0]) - center)
            r1 = abs(complex(current[0]) - center)
            t0, t1 = float(previous[1].real), float(current[1].real)
            while len(crossings) < len(marks) and r0 < marks[len(crossings)] <= r1:
                mark = marks[len(crossings)]
                u = (1 / r0 - 1 / mark) / (1 / r0 - 1 / r1)
                crossings.append(t0 + u * (t1 - t0))

        record(step.y_prev, step.y_new)
        samples = 0
        try:
            while len(crossings) < len(marks) and samples < self.config.max_samples:
                beyond_step = stepper.advance(self.config.max_time - stepper.s)
                if beyond_step is None:
                    break
                samples += 1
                if abs(complex(beyond_step.y_new[0]) - center) < self.config.escape_radius:
                    break
                record(beyond_step.y_prev, beyond_step.y_new)
        except (StepUnderflow, EvaluationError) as e:
            time = getattr(e, 'time', None)
            estimate = _blowup_estimate(crossings)
            if estimate is None:
                estimate = time if time is not None else float(stepper.y[1].real)
            return TerminationEvent(TerminationKind.BlowupInFiniteTime, blowup_time=_one_digit(estimate))

        estimate = _blowup_estimate(crossings)
        if estimate is not None:
            return TerminationEvent(TerminationKind.BlowupInFiniteTime, blowup_time=_one_digit(estimate))
        return TerminationEvent(TerminationKind.Escaped)


def _nonincreasing(values: Sequence[float]) -> bool:
    return all(b <= a * (1 + 1e-9) for a, b in zip(values, values[1:]))


def _blowup_estimate(crossings: Sequence[float]) -> Optional[float]:
    """Geometric extrapolation of radius-doubling crossing times, if their gaps shrink"""
    gaps = np.diff(crossings)
    if len(gaps) < 2 or np.any(gaps <= 0):
        return None
    ratios = gaps[1:] / gaps[:-1]
    if np.any(ratios >= BLOWUP_RATIO):
        return None
    q = ratios[-1]
    return float(crossings[-1] + gaps[-1] * q / (1 - q))


def _one_digit(value: float) -> float:
    return float(f"{value:.1g}")


def integrate(f: FunctionModel, seed: complex, direction: TimeDirection = TimeDirection.Forward,
              config: Optional[IntegrationConfig] = None,
              equilibria: Sequence[Equilibrium] = ()) -> Orbit:
    return FlowIntegrator(f, config, equilibria).integrate(seed, direction)


def poincare_return(f: FunctionModel, center: complex, theta: float, start_radius: float,
                    config: Optional[IntegrationConfig] = None,
                    equilibria: Sequence[Equilibrium] = ()) -> float:
    """
    Signed radial displacement after one return to a ray

    Args:
        f: Right-hand side F
        center: Equilibrium a at the root of the ray
        theta: Ray angle
        start_radius: Distance of the start point from a
        config: Integration settings
        equilibria: Known equilibria (should include a)

    Returns:
        New radius minus start radius at the first return with matching orientation

    Raises:
        NoReturn: capture, escape or budget exhaustion before a return
    """
    if not start_radius > 0:
        raise PreconditionError(f"start_radius must be positive, got {start_radius}")
    integrator = FlowIntegrator(f, config, equilibria, detect_blowup=False)
    config = integrator.config
    ray = cmath.exp(1j * theta)
    start = complex(center) + start_radius * ray
    stepper = integrator._stepper(start, 1.0)

    orientation = math.copysign(1.0, (complex(stepper.k[0]) / ray).imag)
    if (complex(stepper.k[0]) / ray).imag == 0:
        raise NoReturn(f"Flow is tangent to the ray at {start!r}")
    crossing = lambda z: orientation * ((z - center) / ray).imag

    previous = 0.0
    samples = 1
    while samples < config.max_samples:
        step = stepper.advance(config.max_time - stepper.s)
        if step is None:
            break
        samples += 1
        z = complex(step.y_new[0])
        if integrator._captured(z) is not None or abs(z - config.escape_center) > config.escape_radius:
            raise NoReturn(f"Orbit from {start!r} left the return neighbourhood")
        value = crossing(z)
        if previous < 0 <= value and ((z - center) / ray).real > 0:
            y = integrator._locate_crossing(stepper, step, crossing, CROSSING_TOLERANCE * start_radius)
            return abs(complex(y[0]) - center) - start_radius
        previous = value
    raise NoReturn(f"No return to the ray within time {config.max_time}")
