"""Probability vectors, product states and tolerance settings.

A population state is a pair of probability distributions: one over the
female types, one over the male types.  Everything downstream (operator
application, trajectory iteration, limit prediction) works with these
immutable value types.  Validation happens at construction; states are
never silently renormalized, so conservation bugs surface as validation
failures instead of being masked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatchError, NegativeEntryError, NotNormalizedError

# Construction-time tolerances.  Entries may undershoot zero by at most
# NEGATIVITY_EPS; the total may deviate from one by at most NORMALIZATION_EPS.
NEGATIVITY_EPS = 1e-12
NORMALIZATION_EPS = 1e-9


@dataclass(frozen=True)
class Distribution:
    """A point of the standard simplex: nonnegative entries summing to one."""

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) == 0:
            raise DimensionMismatchError("a distribution needs at least one entry")
        total = sum(self.probs)
        if not (abs(total - 1.0) <= NORMALIZATION_EPS):
            raise NotNormalizedError(f"entries sum to {total}, expected 1")
        smallest = min(self.probs)
        if not (smallest >= -NEGATIVITY_EPS):
            raise NegativeEntryError(f"entry {smallest} < -{NEGATIVITY_EPS}")

    @property
    def dim(self) -> int:
        return len(self.probs)

    def __iter__(self) -> Iterator[float]:
        return iter(self.probs)

    def __getitem__(self, i: int) -> float:
        return self.probs[i]


def make_distribution(values: Sequence[float]) -> Distribution:
    """Validate a sequence of probabilities and wrap it as a Distribution."""
    return Distribution(tuple(float(v) for v in values))


@dataclass(frozen=True)
class PopulationState:
    """Female and male type distributions, one point of a product of simplexes."""

    female: Distribution
    male: Distribution

    @property
    def dims(self) -> tuple[int, int]:
        return (self.female.dim, self.male.dim)

    def coords(self) -> tuple[float, ...]:
        """All coordinates, female block first."""
        return self.female.probs + self.male.probs


def make_state(female: Sequence[float], male: Sequence[float]) -> PopulationState:
    return PopulationState(make_distribution(female), make_distribution(male))


@dataclass(frozen=True)
class Tolerance:
    """Numerical knobs: comparison epsilon, iteration stop, iteration budget."""

    abs_eps: float = 1e-9
    iter_eps: float = 1e-12
    max_iters: int = 10**6

    def __post_init__(self):
        if not (self.abs_eps > 0 and self.iter_eps > 0 and self.max_iters > 0):
            raise ValueError("all tolerance fields must be strictly positive")


DEFAULT_TOLERANCE = Tolerance()


def state_distance(s1: PopulationState, s2: PopulationState) -> float:
    """Max-norm distance between two states over all coordinates.

    The max norm matches the per-coordinate limit statements the package
    verifies, and makes convergence thresholds dimension-independent.
    """
    if s1.dims != s2.dims:
        raise DimensionMismatchError(f"state dims {s1.dims} vs {s2.dims}")
    return max(abs(a - b) for a, b in zip(s1.coords(), s2.coords()))


def random_distribution(rng: np.random.Generator, dim: int) -> Distribution:
    """Uniform (flat Dirichlet) random point of the simplex."""
    return make_distribution(rng.dirichlet(np.ones(dim)))


def random_state(rng: np.random.Generator, n: int, nu: int) -> PopulationState:
    return PopulationState(random_distribution(rng, n), random_distribution(rng, nu))
