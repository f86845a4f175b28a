"""Closed-form dynamics of the four-type bisexual population.

The operator on two 3-simplexes conserves the pairwise sums x1+x2, x3+x4,
y1+y2, y3+y4, so after one step every trajectory lives on a slice where
these sums are fixed constants (a0, 1-a0, c0, 1-c0).  On a slice the
dynamics splits into two independent planar subsystems: one for the
type-1/2 block in the coordinates (x, y) = (x1, y1), one for the type-3/4
block in (u, v) = (x3, y3); the second is the first under the parameter
swap a<->b, c<->d, a0<->1-a0, c0<->1-c0, and is implemented only through
that swap.

Away from the critical lines a+c = 1 and b+d = 1 each subsystem has two
isolated fixed points whose stability flips with the sign of a+c-1, and
every interior trajectory converges to a corner determined by those signs.
On a+c = 1 the fixed points form a curve, x+y is conserved, and the motion
along the diagonal section x+y = 1 reduces to a one-dimensional quadratic
self-map of [0, 1] with a single attracting fixed point and no periodic
orbits of period two or more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .construction import BisexualOperator
from .dynamics import FixedPointClass, classify_fixed_point_2d
from .errors import CriticalLineError, FixedPointInputError
from .simplex import DEFAULT_TOLERANCE, PopulationState, Tolerance, make_state

# Parameter sums within this distance of 1 are treated as critical.
CRITICAL_EPS = 1e-9

Point2 = tuple[float, float]
Coords8 = tuple[float, float, float, float, float, float, float, float]


@dataclass(frozen=True)
class FourTypeParams:
    """Mixing probabilities a, b, c, d and slice sums a0, c0, all in (0, 1).

    ``a`` and ``c`` drive the type-1/2 block (daughters and sons of mixed
    1-2 pairings), ``b`` and ``d`` the type-3/4 block; ``a0`` and ``c0``
    are the conserved female and male first-pair totals of the slice under
    study.
    """

    a: float
    b: float
    c: float
    d: float
    a0: float
    c0: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "a0", "c0"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly inside (0,1), got {v}")

    @classmethod
    def from_weights(
        cls,
        female: Sequence[float],
        male: Sequence[float],
        a0: float,
        c0: float,
    ) -> "FourTypeParams":
        """Parameters from positive cell weights, pair by pair."""
        wf1, wf2, wf3, wf4 = female
        wm1, wm2, wm3, wm4 = male
        return cls(
            a=wf1 / (wf1 + wf2),
            b=wf3 / (wf3 + wf4),
            c=wm1 / (wm1 + wm2),
            d=wm3 / (wm3 + wm4),
            a0=a0,
            c0=c0,
        )

    def on_critical_line(self) -> bool:
        return abs(self.a + self.c - 1.0) <= CRITICAL_EPS

    def mirror_on_critical_line(self) -> bool:
        return abs(self.b + self.d - 1.0) <= CRITICAL_EPS


def mirror_params(p: FourTypeParams) -> FourTypeParams:
    """The parameter swap turning the type-3/4 block into the type-1/2 block."""
    return FourTypeParams(a=p.b, b=p.a, c=p.d, d=p.c, a0=1.0 - p.a0, c0=1.0 - p.c0)


# ---------------------------------------------------------------------------
# The full eight-coordinate operator.
# ---------------------------------------------------------------------------


def full_step_raw(p: FourTypeParams, coords: Coords8) -> Coords8:
    """One step on bare coordinates (x1..x4, y1..y4); pairwise sums conserved."""
    x1, x2, x3, x4, y1, y2, y3, y4 = coords
    a, b, c, d = p.a, p.b, p.c, p.d
    return (
        x1 - (1.0 - a) * x1 * y2 + a * x2 * y1,
        x2 - a * x2 * y1 + (1.0 - a) * x1 * y2,
        x3 - (1.0 - b) * x3 * y4 + b * x4 * y3,
        x4 - b * x4 * y3 + (1.0 - b) * x3 * y4,
        y1 - (1.0 - c) * x2 * y1 + c * x1 * y2,
        y2 - c * x1 * y2 + (1.0 - c) * x2 * y1,
        y3 - (1.0 - d) * x4 * y3 + d * x3 * y4,
        y4 - d * x3 * y4 + (1.0 - d) * x4 * y3,
    )


def full_step(p: FourTypeParams, state: PopulationState) -> PopulationState:
    new = full_step_raw(p, state.coords())
    return make_state(new[:4], new[4:])


def full_step_fn(p: FourTypeParams) -> Callable[[Coords8], Coords8]:
    def _step(s: Coords8) -> Coords8:
        return full_step_raw(p, s)

    return _step


def slice_sums(state: PopulationState) -> tuple[float, float, float, float]:
    """The four conserved pairwise sums (x1+x2, x3+x4, y1+y2, y3+y4)."""
    x, y = state.female.probs, state.male.probs
    return (x[0] + x[1], x[2] + x[3], y[0] + y[1], y[2] + y[3])


def lift_operator(p: FourTypeParams) -> BisexualOperator:
    """The 4x4-type operator as heredity tensors (uses a, b, c, d only).

    Every parent pair breeds true except the four mixed pairings within a
    block, which redistribute the offspring type inside the block.
    """
    pf = np.zeros((4, 4, 4))
    pm = np.zeros((4, 4, 4))
    for i in range(4):
        for k in range(4):
            pf[i, k, i] = 1.0
            pm[i, k, k] = 1.0
    for i, k in ((0, 1), (1, 0)):
        pf[i, k] = (p.a, 1.0 - p.a, 0.0, 0.0)
        pm[i, k] = (p.c, 1.0 - p.c, 0.0, 0.0)
    for i, k in ((2, 3), (3, 2)):
        pf[i, k] = (0.0, 0.0, p.b, 1.0 - p.b)
        pm[i, k] = (0.0, 0.0, p.d, 1.0 - p.d)
    return BisexualOperator.from_tensors(pf, pm)


# ---------------------------------------------------------------------------
# The two decoupled planar subsystems on a slice.
# ---------------------------------------------------------------------------


def sub12_step(p: FourTypeParams, x: float, y: float) -> Point2:
    """Type-1/2 block: advance (x1, y1) inside the box [0,a0] x [0,c0]."""
    a, c, a0, c0 = p.a, p.c, p.a0, p.c0
    return (
        x - (1.0 - a) * x * (c0 - y) + a * (a0 - x) * y,
        y - (1.0 - c) * (a0 - x) * y + c * x * (c0 - y),
    )


def sub34_step(p: FourTypeParams, u: float, v: float) -> Point2:
    """Type-3/4 block, by delegation to the type-1/2 block under the swap."""
    return sub12_step(mirror_params(p), u, v)


def sub12_step_fn(p: FourTypeParams) -> Callable[[Point2], Point2]:
    def _step(s: Point2) -> Point2:
        return sub12_step(p, s[0], s[1])

    return _step


def sub12_jacobian(p: FourTypeParams, x: float, y: float) -> np.ndarray:
    a, c, a0, c0 = p.a, p.c, p.a0, p.c0
    return np.array(
        [
            [1.0 - (1.0 - a) * c0 + (1.0 - 2.0 * a) * y, a * a0 + (1.0 - 2.0 * a) * x],
            [c * c0 + (1.0 - 2.0 * c) * y, 1.0 - (1.0 - c) * a0 + (1.0 - 2.0 * c) * x],
        ]
    )


def fixed_curve(p: FourTypeParams) -> Callable[[float], float]:
    """On the critical line a+c = 1: y as a function of x along the fixed curve."""

    def curve(x: float) -> float:
        return p.c * p.c0 * x / (p.a * p.a0 + (p.c - p.a) * x)

    return curve


@dataclass(frozen=True)
class SubsystemFixedPoints:
    """Fixed points of a planar subsystem: two isolated points, or a curve."""

    critical: bool
    points: tuple[Point2, ...]
    curve: Callable[[float], float] | None = None

    def __iter__(self):
        return iter(self.points)


def sub12_fixed_points(p: FourTypeParams, curve_samples: int = 11) -> SubsystemFixedPoints:
    """Fixed points of the type-1/2 block.

    Off the critical line these are exactly the corners (0, 0) and
    (a0, c0).  On it, every point of the curve y = c c0 x / (a a0 + (c-a) x)
    is fixed; the curve is returned as a callable plus evenly sampled points
    (the curve passes through both corners).
    """
    if not p.on_critical_line():
        return SubsystemFixedPoints(critical=False, points=((0.0, 0.0), (p.a0, p.c0)))
    curve = fixed_curve(p)
    xs = np.linspace(0.0, p.a0, curve_samples)
    samples = tuple((float(x), float(curve(x))) for x in xs)
    return SubsystemFixedPoints(critical=True, points=samples, curve=curve)


def classify_sub12_fixed_points(
    p: FourTypeParams, tol: Tolerance = DEFAULT_TOLERANCE
) -> dict[Point2, FixedPointClass]:
    """Stability class of each fixed point of the type-1/2 block.

    Off the critical line the origin is attracting and (a0, c0) a saddle
    when a+c < 1, and vice versa when a+c > 1; on the line every curve
    point is non-hyperbolic (one unit eigenvalue).
    """
    fixed = sub12_fixed_points(p)
    return {
        pt: classify_fixed_point_2d(sub12_jacobian(p, pt[0], pt[1]), tol)
        for pt in fixed.points
    }


# ---------------------------------------------------------------------------
# Limit prediction on a slice (both parameter sums off their critical lines).
# ---------------------------------------------------------------------------

_SURVIVOR_LABELS = {
    (False, False): "f2,f4|m2,m4",
    (False, True): "f2,f3|m2,m3",
    (True, False): "f1,f4|m1,m4",
    (True, True): "f1,f3|m1,m3",
}


def limit_branch(p: FourTypeParams) -> tuple[bool, bool]:
    """Signs of (a+c-1, b+d-1) as booleans (True = sum above one)."""
    if p.on_critical_line() or p.mirror_on_critical_line():
        raise CriticalLineError(
            f"a+c={p.a + p.c}, b+d={p.b + p.d}: a parameter sum sits on the "
            "critical line; use the one-dimensional critical-line map"
        )
    return (p.a + p.c > 1.0, p.b + p.d > 1.0)


def survivor_label(p: FourTypeParams) -> str:
    """Compact tag of which types persist in the predicted limit."""
    return _SURVIVOR_LABELS[limit_branch(p)]


def predict_limit(
    p: FourTypeParams, state: PopulationState, tol: Tolerance = DEFAULT_TOLERANCE
) -> PopulationState:
    """Closed-form limit of the full operator from a non-fixed slice state.

    The slice sums of ``state`` must match the a0, c0 carried by the
    parameters.  Raises on critical parameter sums and on fixed starting
    states, which callers must treat as their own limit.
    """
    sums = slice_sums(state)
    if abs(sums[0] - p.a0) > tol.abs_eps or abs(sums[2] - p.c0) > tol.abs_eps:
        raise ValueError(
            f"state slice sums {sums[0]}, {sums[2]} disagree with a0={p.a0}, c0={p.c0}"
        )
    first_high, second_high = limit_branch(p)
    moved = max(abs(n - o) for n, o in zip(full_step_raw(p, state.coords()), state.coords()))
    if moved <= tol.abs_eps:
        raise FixedPointInputError("the starting state is already fixed")
    a0, c0 = p.a0, p.c0
    x = (a0, 0.0, 1.0 - a0, 0.0) if first_high else (0.0, a0, 1.0 - a0, 0.0)
    y = (c0, 0.0, 1.0 - c0, 0.0) if first_high else (0.0, c0, 1.0 - c0, 0.0)
    if not second_high:
        x = (x[0], x[1], 0.0, 1.0 - a0)
        y = (y[0], y[1], 0.0, 1.0 - c0)
    return make_state(x, y)


# ---------------------------------------------------------------------------
# The one-dimensional map on the diagonal section of the critical line.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalMapParams:
    """Parameters of the section map when a+c = 1 (c is implied as 1-a)."""

    a: float
    a0: float
    c0: float

    def __post_init__(self):
        for name in ("a", "a0", "c0"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly inside (0,1), got {v}")

    @property
    def is_affine(self) -> bool:
        # The quadratic coefficient 2a-1 vanishes at a = 1/2.
        return abs(2.0 * self.a - 1.0) <= 1e-12


def critical_step(cp: CriticalMapParams, x):
    """The section map x' = (2a-1) x^2 + ((1-a)(2-c0) - a a0) x + a a0.

    Maps [0, 1] into itself.  Accepts scalars or numpy arrays.
    """
    quad = 2.0 * cp.a - 1.0
    lin = (1.0 - cp.a) * (2.0 - cp.c0) - cp.a * cp.a0
    return quad * x * x + lin * x + cp.a * cp.a0


def critical_step_fn(cp: CriticalMapParams) -> Callable[[float], float]:
    """Scalar (and array) form of the section map, e.g. for periodic scans."""

    def _step(x):
        return critical_step(cp, x)

    return _step


def critical_orbit_fn(cp: CriticalMapParams) -> Callable[[tuple[float]], tuple[float]]:
    """The section map on 1-tuples, as the iteration engine expects."""

    def _step(s: tuple[float]) -> tuple[float]:
        return (critical_step(cp, s[0]),)

    return _step


@dataclass(frozen=True)
class CriticalFixedPoints:
    """Fixed points of the section map.

    ``point`` is the unique fixed point inside [0, 1]; ``spurious`` is the
    second root of the quadratic, which always falls outside [0, 1] and is
    reported for diagnostics only (None in the affine case a = 1/2).
    """

    point: float
    spurious: float | None
    discriminant: float | None


def critical_fixed_points(cp: CriticalMapParams) -> CriticalFixedPoints:
    """Solve the fixed-point equation of the section map in closed form.

    The quadratic case uses the cancellation-free root formula; the in-range
    root has derivative 1 - sqrt(D) there.  In the affine case the fixed
    point is a0 / (a0 + c0).
    """
    if cp.is_affine:
        return CriticalFixedPoints(
            point=cp.a0 / (cp.a0 + cp.c0), spurious=None, discriminant=None
        )
    a, a0, c0 = cp.a, cp.a0, cp.c0
    quad = 2.0 * a - 1.0
    k = 1.0 + a * a0 - (1.0 - a) * (2.0 - c0)
    disc = k * k - 4.0 * a * a0 * quad
    root = math.sqrt(max(disc, 0.0))
    # Roots of quad*t^2 - k*t + a*a0; pair the additions by sign to avoid
    # cancellation: the in-range root carries -sign(k)*sqrt(D).
    if k >= 0.0:
        q = (k + root) / 2.0
        inside, outside = (a * a0) / q, q / quad
    else:
        q = (k - root) / 2.0
        inside, outside = q / quad, (a * a0) / q
    return CriticalFixedPoints(point=inside, spurious=outside, discriminant=disc)


def critical_slope(cp: CriticalMapParams) -> float:
    """Derivative of the section map at its in-range fixed point.

    Equals 1 - sqrt(D) in the quadratic case and 1 - (a0+c0)/2 in the
    affine case; its absolute value is below one for all valid parameters,
    so the fixed point is always attracting.
    """
    t = critical_fixed_points(cp).point
    return 2.0 * (2.0 * cp.a - 1.0) * t + (1.0 - cp.a) * (2.0 - cp.c0) - cp.a * cp.a0


def predict_limit_critical(cp: CriticalMapParams, x0: float) -> float:
    """Every non-fixed point of [0, 1] converges to the in-range fixed point."""
    target = critical_fixed_points(cp).point
    if abs(x0 - target) <= 1e-9:
        raise FixedPointInputError(f"x0={x0} is already the fixed point")
    return target


# ---------------------------------------------------------------------------
# Brute-force periodic-point scan for one-dimensional maps.
# ---------------------------------------------------------------------------


def scan_periodic_points(
    step: Callable,
    period: int,
    grid: int = 100_000,
    domain: tuple[float, float] = (0.0, 1.0),
    exclude: Sequence[float] | None = None,
    exclude_radius: float = 1e-8,
    refine_eps: float = 1e-10,
) -> list[float]:
    """Roots of step^period(x) = x on the domain that are not fixed points.

    The composite map is evaluated by repeated application on a uniform
    grid (never expanded into polynomial coefficients), sign changes are
    bracketed and refined by bisection to ``refine_eps``, and any root
    within ``exclude_radius`` of a fixed point is dropped.  ``step`` must
    accept numpy arrays as well as scalars.  When ``exclude`` is None the
    fixed points are located by the same scan at period one.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    if grid < 2:
        raise ValueError("grid must be >= 2")
    lo, hi = domain
    if exclude is None:
        exclude = [] if period == 1 else scan_periodic_points(
            step, 1, grid=grid, domain=domain, exclude=[], exclude_radius=exclude_radius
        )

    def composite(x):
        for _ in range(period):
            x = step(x)
        return x

    xs = np.linspace(lo, hi, grid)
    gap = composite(xs) - xs
    roots: list[float] = []
    for i in range(grid - 1):
        gi, gj = gap[i], gap[i + 1]
        if gi == 0.0:
            roots.append(float(xs[i]))
            continue
        if gi * gj >= 0.0:
            continue
        left, right = float(xs[i]), float(xs[i + 1])
        g_left = float(gi)
        while right - left > refine_eps:
            mid = 0.5 * (left + right)
            g_mid = float(composite(mid) - mid)
            if g_mid == 0.0:
                left = right = mid
                break
            if (g_left < 0.0) == (g_mid < 0.0):
                left, g_left = mid, g_mid
            else:
                right = mid
        roots.append(0.5 * (left + right))
    if gap[-1] == 0.0:
        roots.append(float(xs[-1]))
    return [r for r in roots if all(abs(r - e) > exclude_radius for e in exclude)]
