"""Closed-form dynamics of the two-type bisexual population.

With two female and two male types the evolution operator collapses, via
x2 = 1 - x1 and y2 = 1 - y1, to a planar map on the unit square,

    x' = x + a (1 - x) y,        y' = y (x + b (1 - x)),

driven by two mixing probabilities a, b in (0, 1).  The map fixes the whole
segment y = 0 and the whole edge x = 1, conserves the linear level
x / a + y / (1 - b), increases x and decreases y monotonically, and every
other point converges to a boundary point determined in closed form by its
conserved level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .construction import BisexualOperator
from .errors import FixedPointInputError
from .simplex import PopulationState, make_state

# Membership tolerance for the fixed-segment predicates.
SEGMENT_EPS = 1e-9

Point2 = tuple[float, float]


@dataclass(frozen=True)
class TwoTypeParams:
    """Mixing probabilities of the two-type case; both strictly inside (0, 1).

    ``a`` is the probability that a mixed pairing (type-2 mother, type-1
    father) produces a type-1 daughter; ``b`` the probability that it
    produces a type-1 son.
    """

    a: float
    b: float

    def __post_init__(self):
        for name, v in (("a", self.a), ("b", self.b)):
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly inside (0,1), got {v}")

    @classmethod
    def from_weights(cls, female: Sequence[float], male: Sequence[float]) -> "TwoTypeParams":
        """Parameters from positive cell weights: a = wf1/(wf1+wf2), b = wm1/(wm1+wm2)."""
        wf1, wf2 = female
        wm1, wm2 = male
        return cls(a=wf1 / (wf1 + wf2), b=wm1 / (wm1 + wm2))


def step(p: TwoTypeParams, s: Point2) -> Point2:
    """One step of the reduced planar map; maps the unit square into itself."""
    x, y = s
    return (x + p.a * (1.0 - x) * y, y * (x + p.b * (1.0 - x)))


def step_fn(p: TwoTypeParams):
    def _step(s: Point2) -> Point2:
        return step(p, s)

    return _step


def jacobian_matrix(p: TwoTypeParams, s: Point2) -> np.ndarray:
    """Jacobian of the reduced map: [[1-ay, a(1-x)], [y(1-b), x(1-b)+b]]."""
    x, y = s
    return np.array(
        [
            [1.0 - p.a * y, p.a * (1.0 - x)],
            [y * (1.0 - p.b), x * (1.0 - p.b) + p.b],
        ]
    )


def lift_operator(p: TwoTypeParams) -> BisexualOperator:
    """The full 2x2-type operator whose reduction is ``step``.

    Heredity rows: every parent pair breeds true except the (type-2 mother,
    type-1 father) pair, which yields type-1 daughters with probability
    ``a`` and type-1 sons with probability ``b``.
    """
    pf = np.zeros((2, 2, 2))
    pf[0, 0] = (1.0, 0.0)
    pf[0, 1] = (1.0, 0.0)
    pf[1, 0] = (p.a, 1.0 - p.a)
    pf[1, 1] = (0.0, 1.0)
    pm = np.zeros((2, 2, 2))
    pm[0, 0] = (1.0, 0.0)
    pm[0, 1] = (0.0, 1.0)
    pm[1, 0] = (p.b, 1.0 - p.b)
    pm[1, 1] = (0.0, 1.0)
    return BisexualOperator.from_tensors(pf, pm)


def reduce_state(state: PopulationState) -> Point2:
    """Project a full two-type state to its (x1, y1) coordinates."""
    return (state.female[0], state.male[0])


def lift_point(s: Point2) -> PopulationState:
    x, y = s
    return make_state([x, 1.0 - x], [y, 1.0 - y])


def invariant_line_level(p: TwoTypeParams, s: Point2) -> float:
    """The conserved level x/a + y/(1-b); constant along every trajectory."""
    x, y = s
    return x / p.a + y / (1.0 - p.b)


@dataclass(frozen=True)
class FixedSegments:
    """The two fixed segments of the reduced map: y = 0 and x = 1."""

    eps: float = SEGMENT_EPS

    def in_horizontal(self, s: Point2) -> bool:
        # y = 0 with x in [0, 1); the corner (1, 0) belongs to the edge set.
        x, y = s
        return abs(y) <= self.eps and -self.eps <= x < 1.0 - self.eps

    def in_right_edge(self, s: Point2) -> bool:
        x, y = s
        return abs(x - 1.0) <= self.eps and -self.eps <= y <= 1.0 + self.eps

    def contains(self, s: Point2) -> bool:
        x, y = s
        return abs(y) <= self.eps or abs(x - 1.0) <= self.eps

    def describe(self) -> dict:
        return {
            "horizontal": "y = 0, x in [0, 1)",
            "right_edge": "x = 1, y in [0, 1]",
        }


def fixed_segments(p: TwoTypeParams) -> FixedSegments:
    """Fixed-point set of the reduced map (independent of the parameters)."""
    return FixedSegments()


def is_fixed(s: Point2, eps: float = SEGMENT_EPS) -> bool:
    return FixedSegments(eps).contains(s)


def predict_limit(p: TwoTypeParams, start: Point2) -> Point2:
    """Closed-form trajectory limit for a non-fixed starting point.

    With level c = x0/a + y0/(1-b): the limit is (ac, 0) when ac < 1 and
    (1, (ac - 1)(1 - b)/a) when ac >= 1; at ac = 1 both expressions give
    the corner (1, 0).
    """
    if is_fixed(start):
        raise FixedPointInputError(f"{start} is already a fixed point")
    level = invariant_line_level(p, start)
    reach = p.a * level
    if reach < 1.0:
        return (reach, 0.0)
    return (1.0, (reach - 1.0) * (1.0 - p.b) / p.a)


def predict_limit_state(p: TwoTypeParams, state: PopulationState) -> PopulationState:
    """Limit of the full 2x2-type operator, lifted from the reduced prediction."""
    return lift_point(predict_limit(p, reduce_state(state)))
