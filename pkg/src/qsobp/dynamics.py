"""Trajectory iteration, Jacobians and fixed-point classification.

The engine is generic: it iterates any bisexual operator, and also bare
low-dimensional maps given as callables on coordinate tuples.  Convergence
is detected from successive-state distance, never from distance to a known
limit, so the same loop serves operators whose limits are unknown.
Classification of planar fixed points goes through the characteristic
polynomial of the Jacobian; root location is decided from the polynomial's
values at +1 and -1 together with its constant term.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .construction import BisexualOperator
from .errors import DimensionMismatchError
from .simplex import DEFAULT_TOLERANCE, PopulationState, Tolerance, make_state

# At most this many states are kept per trajectory; longer runs are thinned
# to every k-th state, always retaining the first and the last.
TRAJECTORY_STORE_CAP = 10_000

Point = tuple[float, ...]
MapStep = Callable[[Point], Point]


@dataclass(frozen=True)
class MapTrajectory:
    """Iteration record of a bare coordinate map.

    ``states`` may be thinned; ``state_steps`` holds the true step index of
    each stored state (first and last are always present).
    """

    states: tuple[Point, ...]
    state_steps: tuple[int, ...]
    converged: bool
    limit: Point | None
    steps_taken: int
    tracked_drift: float | None = None


@dataclass(frozen=True)
class Trajectory:
    """Iteration record of a bisexual operator."""

    states: tuple[PopulationState, ...]
    state_steps: tuple[int, ...]
    converged: bool
    limit: PopulationState | None
    steps_taken: int


def iterate_map(
    step: MapStep,
    start: Sequence[float],
    tol: Tolerance = DEFAULT_TOLERANCE,
    *,
    full_run: bool = False,
    track: Callable[[Point], float] | None = None,
    store_cap: int = TRAJECTORY_STORE_CAP,
) -> MapTrajectory:
    """Iterate ``step`` from ``start`` until successive states stop moving.

    Stops when the max-norm distance between successive states drops to
    ``tol.iter_eps`` (converged) or after ``tol.max_iters`` steps (not
    converged; that is a result, not an error).  ``steps_taken`` is the
    index of the first state that no longer moves, so a fixed starting
    point reports zero steps.

    Args:
        step: The map; takes and returns a coordinate tuple.
        start: Initial coordinates.
        tol: Iteration thresholds and budget.
        full_run: Run the whole budget even after convergence is reached
            (used for long-run conservation measurements).
        track: Optional functional whose maximal deviation from its initial
            value is recorded per step in ``tracked_drift``.
        store_cap: Thinning threshold for stored states.
    """
    state: Point = tuple(float(v) for v in start)
    stored: list[tuple[int, Point]] = [(0, state)]
    stride = 1
    base = track(state) if track is not None else 0.0
    drift = 0.0
    converged = False
    steps_taken = tol.max_iters
    total = 0
    for t in range(tol.max_iters):
        nxt = step(state)
        moved = max(abs(a - b) for a, b in zip(nxt, state))
        if track is not None:
            dev = abs(track(nxt) - base)
            if dev > drift:
                drift = dev
        total = t + 1
        if total % stride == 0:
            stored.append((total, nxt))
            if len(stored) > store_cap:
                stored = stored[::2]
                stride *= 2
        state = nxt
        if moved <= tol.iter_eps and not converged:
            converged = True
            steps_taken = t
            if not full_run:
                break
    if stored[-1][0] != total:
        stored.append((total, state))
    return MapTrajectory(
        states=tuple(s for _, s in stored),
        state_steps=tuple(t for t, _ in stored),
        converged=converged,
        limit=state if converged else None,
        steps_taken=steps_taken if converged else total,
        tracked_drift=drift if track is not None else None,
    )


def operator_step(op: BisexualOperator) -> MapStep:
    """The operator as a map on concatenated (female, male) coordinates."""

    def step(s: Point) -> Point:
        x, y = op.apply_raw(np.asarray(s[: op.n]), np.asarray(s[op.n :]))
        return tuple(x) + tuple(y)

    return step


def iterate(
    op: BisexualOperator, start: PopulationState, tol: Tolerance = DEFAULT_TOLERANCE
) -> Trajectory:
    """Iterate a bisexual operator from a population state."""
    if start.dims != (op.n, op.nu):
        raise DimensionMismatchError(f"state dims {start.dims}, operator ({op.n},{op.nu})")
    raw = iterate_map(operator_step(op), start.coords(), tol)

    def unpack(s: Point) -> PopulationState:
        return make_state(s[: op.n], s[op.n :])

    return Trajectory(
        states=tuple(unpack(s) for s in raw.states),
        state_steps=raw.state_steps,
        converged=raw.converged,
        limit=unpack(raw.limit) if raw.limit is not None else None,
        steps_taken=raw.steps_taken,
    )


def jacobian(op: BisexualOperator, state: PopulationState) -> np.ndarray:
    """Analytic Jacobian of the full coordinate map at ``state``.

    The map is quadratic, so the partials are linear:
    d x'_j / d x_i = sum_k pf[i,k,j] y_k, d x'_j / d y_k = sum_i pf[i,k,j] x_i,
    and likewise for the male block.  Rows are outputs (female block first),
    columns are inputs.
    """
    if state.dims != (op.n, op.nu):
        raise DimensionMismatchError(f"state dims {state.dims}, operator ({op.n},{op.nu})")
    x = np.array(state.female.probs)
    y = np.array(state.male.probs)
    pf, pm = op.tensors.pf, op.tensors.pm
    jxx = np.einsum("ikj,k->ji", pf, y)
    jxy = np.einsum("ikj,i->jk", pf, x)
    jyx = np.einsum("ikl,k->li", pm, y)
    jyy = np.einsum("ikl,i->lk", pm, x)
    return np.block([[jxx, jxy], [jyx, jyy]])


# ---------------------------------------------------------------------------
# Root location for monic quadratics and planar fixed-point classes.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticCharacteristic:
    """Coefficients of the monic quadratic q(t) = t^2 + B t + C."""

    B: float
    C: float

    def at(self, t: float) -> float:
        return t * t + self.B * t + self.C

    def roots(self) -> tuple[complex, complex]:
        disc = self.B * self.B - 4.0 * self.C
        if disc >= 0.0:
            s = math.sqrt(disc)
            return ((-self.B + s) / 2.0, (-self.B - s) / 2.0)
        s = math.sqrt(-disc)
        return (complex(-self.B / 2.0, s / 2.0), complex(-self.B / 2.0, -s / 2.0))


class RootLocation(enum.Enum):
    BOTH_INSIDE = "both_inside"
    BOTH_OUTSIDE = "both_outside"
    SPLIT = "split"
    ON_CIRCLE = "on_circle"
    ROOT_AT_ONE = "root_at_one"


@dataclass(frozen=True)
class RootVerdict:
    kind: RootLocation
    # For ROOT_AT_ONE: where the second root sits ("inside"/"outside"/"on").
    other: str | None = None


def classify_quadratic(qc: QuadraticCharacteristic) -> RootVerdict:
    """Locate the roots of t^2 + Bt + C relative to the unit circle.

    Decided purely from the signs of q(1), q(-1) and the constant term:
    with q(1) > 0 both roots are inside iff q(-1) > 0 and C < 1, both are
    outside iff q(-1) > 0 and C > 1, and they straddle the circle iff
    q(-1) < 0; q(1) = 0 puts a root at one, and its partner is C; q(1) < 0
    puts one root beyond one while q(-1) tells where the other sits.
    """
    at_one = qc.at(1.0)
    at_minus_one = qc.at(-1.0)
    if at_one == 0.0:
        # Roots are 1 and C.
        if abs(qc.C) < 1.0:
            other = "inside"
        elif abs(qc.C) > 1.0:
            other = "outside"
        else:
            other = "on"
        return RootVerdict(RootLocation.ROOT_AT_ONE, other)
    if at_one > 0.0:
        if at_minus_one < 0.0:
            return RootVerdict(RootLocation.SPLIT)
        if at_minus_one == 0.0:
            return RootVerdict(RootLocation.ON_CIRCLE)
        if qc.C < 1.0:
            return RootVerdict(RootLocation.BOTH_INSIDE)
        if qc.C > 1.0:
            return RootVerdict(RootLocation.BOTH_OUTSIDE)
        # C == 1 with q(+-1) > 0: conjugate pair of modulus one.
        return RootVerdict(RootLocation.ON_CIRCLE)
    # q(1) < 0: one root beyond +1.
    if at_minus_one < 0.0:
        return RootVerdict(RootLocation.BOTH_OUTSIDE)
    if at_minus_one == 0.0:
        return RootVerdict(RootLocation.ON_CIRCLE)
    return RootVerdict(RootLocation.SPLIT)


class StabilityKind(enum.Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    SADDLE = "saddle"
    NON_HYPERBOLIC = "non_hyperbolic"


@dataclass(frozen=True)
class FixedPointClass:
    kind: StabilityKind
    eigen_moduli: tuple[float, float]


def classify_fixed_point_2d(
    matrix: Sequence[Sequence[float]], tol: Tolerance = DEFAULT_TOLERANCE
) -> FixedPointClass:
    """Classify a planar fixed point from its 2x2 Jacobian.

    A point is hyperbolic when no eigenvalue modulus sits within
    ``tol.abs_eps`` of one; hyperbolic points are attracting, repelling or
    saddle according to whether both, neither or exactly one modulus is
    below one.  Near-unit moduli are reported as non-hyperbolic together
    with both moduli so the caller can inspect the marginal direction.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise DimensionMismatchError(f"expected a 2x2 matrix, got {m.shape}")
    qc = QuadraticCharacteristic(B=-float(np.trace(m)), C=float(np.linalg.det(m)))
    moduli = tuple(sorted((abs(r) for r in qc.roots()), reverse=True))
    if any(abs(mod - 1.0) <= tol.abs_eps for mod in moduli):
        kind = StabilityKind.NON_HYPERBOLIC
    elif all(mod < 1.0 for mod in moduli):
        kind = StabilityKind.ATTRACTING
    elif all(mod > 1.0 for mod in moduli):
        kind = StabilityKind.REPELLING
    else:
        kind = StabilityKind.SADDLE
    return FixedPointClass(kind=kind, eigen_moduli=moduli)


# ---------------------------------------------------------------------------
# Numerical fixed-point search for planar maps.
# ---------------------------------------------------------------------------

Step2D = Callable[[tuple[float, float]], tuple[float, float]]


def _fd_residual_jacobian(step: Step2D, p: np.ndarray, h: float = 1e-6) -> np.ndarray:
    j = np.empty((2, 2))
    for col in range(2):
        hi = p.copy()
        lo = p.copy()
        hi[col] += h
        lo[col] -= h
        fhi = np.array(step((hi[0], hi[1]))) - hi
        flo = np.array(step((lo[0], lo[1]))) - lo
        j[:, col] = (fhi - flo) / (2.0 * h)
    return j


def _refine_fixed_point(
    step: Step2D, seed: tuple[float, float], tol: Tolerance
) -> tuple[float, float] | None:
    """Damped least-squares descent on the fixed-point residual."""
    p = np.array(seed, dtype=float)
    residual = np.array(step((p[0], p[1]))) - p
    damping = 1e-3
    for _ in range(80):
        if np.abs(residual).max() <= 0.01 * tol.abs_eps:
            break
        j = _fd_residual_jacobian(step, p)
        lhs = j.T @ j + damping * np.eye(2)
        try:
            delta = np.linalg.solve(lhs, -j.T @ residual)
        except np.linalg.LinAlgError:
            damping *= 10.0
            continue
        candidate = p + delta
        cand_residual = np.array(step((candidate[0], candidate[1]))) - candidate
        if np.dot(cand_residual, cand_residual) < np.dot(residual, residual):
            p, residual = candidate, cand_residual
            damping = max(damping * 0.3, 1e-12)
        else:
            damping *= 10.0
            if damping > 1e10:
                break
    if np.abs(residual).max() <= tol.abs_eps:
        return (float(p[0]), float(p[1]))
    return None


def find_fixed_points_grid(
    step: Step2D,
    domain: tuple[tuple[float, float], tuple[float, float]],
    grid: int,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> list[tuple[float, float]]:
    """Seed a lattice over ``domain`` and refine each seed to a fixed point.

    Points whose final max-norm residual exceeds ``tol.abs_eps`` are
    dropped, as are points escaping the domain; survivors are deduplicated
    within ``10 * tol.abs_eps``.  A continuum of fixed points comes back as
    a cloud of nearby points, one per basin of the refinement.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    (x_lo, x_hi), (y_lo, y_hi) = domain
    margin = 1e-9
    candidates: list[tuple[float, float]] = []
    for xs in np.linspace(x_lo, x_hi, grid):
        for ys in np.linspace(y_lo, y_hi, grid):
            p = _refine_fixed_point(step, (float(xs), float(ys)), tol)
            if p is None:
                continue
            if not (x_lo - margin <= p[0] <= x_hi + margin):
                continue
            if not (y_lo - margin <= p[1] <= y_hi + margin):
                continue
            candidates.append(p)
    candidates.sort()
    kept: list[tuple[float, float]] = []
    for p in candidates:
        if all(max(abs(p[0] - q[0]), abs(p[1] - q[1])) > 10.0 * tol.abs_eps for q in kept):
            kept.append(p)
    return kept


def conserved_quantity_drift(trajectory, functional: Callable[..., float]) -> float:
    """Maximal deviation of ``functional`` from its initial value along a trajectory.

    Accepts either an operator ``Trajectory`` or a ``MapTrajectory``; the
    functional receives the stored states as-is.
    """
    states = trajectory.states
    if not states:
        raise ValueError("trajectory has no states")
    base = functional(states[0])
    return max(abs(functional(s) - base) for s in states)
