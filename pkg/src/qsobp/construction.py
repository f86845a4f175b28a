"""Constructive heredity tensors from a graph, an allele set and weights.

The construction: vertices of a finite simple graph carry alleles; a cell is
one full allele assignment.  The cells are split by the caller into a female
set and a male set, and every cell gets a strictly positive weight.  A child
cell is compatible with a parent pair when, on every connected component of
the graph, it coincides with the mother's assignment or with the father's.
Heredity coefficients are the weight of the child normalized over its
compatible set, so only weight ratios matter.

On a connected graph each compatible set collapses to the parent itself and
the resulting operator is the identity; mixing requires at least two
components.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyCompatibleSetError,
    PartitionIndexError,
    SchemaError,
    SizeOverflowError,
)
from .simplex import (
    DEFAULT_TOLERANCE,
    PopulationState,
    Tolerance,
    make_state,
    random_state,
    state_distance,
)

# A cell maps each vertex (positionally) to a 1-based allele index.
Cell = tuple[int, ...]

# Enumerating more cells than this is refused; tensors grow as n*nu*(n+nu).
DEFAULT_CELL_CAP = 2**20

# Stochasticity of constructed tensor rows is checked to this tolerance;
# individual entries may undershoot zero only by float dust.
ROW_SUM_EPS = 1e-12
NEG_ENTRY_EPS = 1e-15


@dataclass(frozen=True)
class Graph:
    """Finite simple graph; vertices are the 1-based labels 1..vertex_count."""

    vertex_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("vertex_count must be positive")
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"loop edge ({a},{b}) not allowed")
            if not (1 <= a < b <= self.vertex_count):
                raise ValueError(f"edge ({a},{b}) out of range or not normalized")


def make_graph(vertex_count: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a Graph from unordered vertex pairs (duplicates collapse)."""
    normalized = set()
    for e in edges:
        a, b = int(e[0]), int(e[1])
        if a == b:
            raise ValueError(f"loop edge ({a},{b}) not allowed")
        normalized.add((min(a, b), max(a, b)))
    return Graph(vertex_count, frozenset(normalized))


def connected_components(graph: Graph) -> tuple[tuple[int, ...], ...]:
    """Partition the vertices into maximal connected subgraphs.

    Returns the components as sorted vertex tuples, ordered by smallest
    vertex, so the result is deterministic.
    """
    adjacency: dict[int, set[int]] = {v: set() for v in range(1, graph.vertex_count + 1)}
    for a, b in graph.edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    seen: set[int] = set()
    components: list[tuple[int, ...]] = []
    for start in range(1, graph.vertex_count + 1):
        if start in seen:
            continue
        stack, component = [start], set()
        while stack:
            v = stack.pop()
            if v in component:
                continue
            component.add(v)
            stack.extend(adjacency[v] - component)
        seen |= component
        components.append(tuple(sorted(component)))
    return tuple(components)


def enumerate_cells(
    graph: Graph, allele_count: int, cap: int = DEFAULT_CELL_CAP
) -> tuple[Cell, ...]:
    """All allele assignments over the vertices, in lexicographic order."""
    if allele_count < 1:
        raise ValueError("allele_count must be positive")
    total = allele_count**graph.vertex_count
    if total > cap:
        raise SizeOverflowError(f"{total} cells exceed the cap of {cap}")
    return tuple(itertools.product(range(1, allele_count + 1), repeat=graph.vertex_count))


@dataclass(frozen=True)
class ConfigurationSpace:
    """Enumerated cells of a graph plus a female/male split of them.

    ``females`` and ``males`` hold 0-based indices into ``cells``, sorted
    ascending; female type ``i`` of the resulting operator is the ``i``-th
    entry of ``females`` (and likewise for males).
    """

    graph: Graph
    allele_count: int
    cells: tuple[Cell, ...]
    components: tuple[tuple[int, ...], ...]
    females: tuple[int, ...]
    males: tuple[int, ...]

    @classmethod
    def build(
        cls,
        graph: Graph,
        allele_count: int,
        females: Iterable[int],
        cap: int = DEFAULT_CELL_CAP,
    ) -> "ConfigurationSpace":
        """Enumerate the space and split it by the given female cell indices."""
        cells = enumerate_cells(graph, allele_count, cap)
        female_set = set(int(i) for i in females)
        for i in female_set:
            if not (0 <= i < len(cells)):
                raise PartitionIndexError(f"female cell index {i} out of range")
        if not female_set or len(female_set) == len(cells):
            raise PartitionIndexError("both partition classes must be nonempty")
        males = tuple(i for i in range(len(cells)) if i not in female_set)
        return cls(
            graph=graph,
            allele_count=allele_count,
            cells=cells,
            components=connected_components(graph),
            females=tuple(sorted(female_set)),
            males=males,
        )

    @property
    def n(self) -> int:
        return len(self.females)

    @property
    def nu(self) -> int:
        return len(self.males)


def _restriction(cell: Cell, component: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(cell[v - 1] for v in component)


def compatible_sets(
    space: ConfigurationSpace, f_idx: int, m_idx: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Child cells compatible with the parent pair, split by sex.

    A cell is compatible when its restriction to every component of the
    graph equals the mother's restriction or the father's restriction.
    The mother is always in the female set (she matches herself), and the
    father in the male set.  Returns (female indices, male indices).
    """
    if f_idx not in space.females:
        raise PartitionIndexError(f"cell {f_idx} is not in the female set")
    if m_idx not in space.males:
        raise PartitionIndexError(f"cell {m_idx} is not in the male set")
    mother, father = space.cells[f_idx], space.cells[m_idx]
    allowed = [
        {_restriction(mother, comp), _restriction(father, comp)}
        for comp in space.components
    ]

    def is_compatible(cell: Cell) -> bool:
        return all(
            _restriction(cell, comp) in allowed[k]
            for k, comp in enumerate(space.components)
        )

    female_side = tuple(i for i in space.females if is_compatible(space.cells[i]))
    male_side = tuple(j for j in space.males if is_compatible(space.cells[j]))
    if f_idx not in female_side or m_idx not in male_side:
        raise EmptyCompatibleSetError("a parent fell out of its own compatible set")
    return female_side, male_side


@dataclass(frozen=True)
class WeightPair:
    """Strictly positive weights over the female cells and over the male cells."""

    female_weights: Mapping[int, float]
    male_weights: Mapping[int, float]

    def __post_init__(self):
        for label, weights in (("female", self.female_weights), ("male", self.male_weights)):
            for idx, w in weights.items():
                if not w > 0:
                    raise ValueError(f"{label} weight for cell {idx} must be > 0, got {w}")


def uniform_weights(space: ConfigurationSpace) -> WeightPair:
    return WeightPair(
        {i: 1.0 for i in space.females},
        {j: 1.0 for j in space.males},
    )


@dataclass(frozen=True)
class HeredityTensors:
    """Stochastic heredity coefficients.

    ``pf[i, k, j]``: probability that mother type ``i`` and father type ``k``
    produce a female child of type ``j``; ``pm[i, k, l]`` the male analogue.
    Every (i, k) row sums to one.
    """

    n: int
    nu: int
    pf: np.ndarray
    pm: np.ndarray

    def __post_init__(self):
        if self.pf.shape != (self.n, self.nu, self.n):
            raise DimensionMismatchError(f"pf shape {self.pf.shape}")
        if self.pm.shape != (self.n, self.nu, self.nu):
            raise DimensionMismatchError(f"pm shape {self.pm.shape}")
        for name, t in (("pf", self.pf), ("pm", self.pm)):
            if t.min() < -NEG_ENTRY_EPS:
                raise ValueError(f"{name} has negative entries")
            row_sums = t.sum(axis=2)
            worst = np.abs(row_sums - 1.0).max()
            if worst > ROW_SUM_EPS:
                raise ValueError(f"{name} rows deviate from stochasticity by {worst}")
        self.pf.setflags(write=False)
        self.pm.setflags(write=False)


def build_heredity(space: ConfigurationSpace, weights: WeightPair) -> HeredityTensors:
    """Normalize the weights over each compatible set into heredity tensors."""
    missing_f = set(space.females) - set(weights.female_weights)
    missing_m = set(space.males) - set(weights.male_weights)
    if missing_f or missing_m:
        raise ValueError(f"weights missing for cells {sorted(missing_f | missing_m)}")
    n, nu = space.n, space.nu
    f_pos = {cell: t for t, cell in enumerate(space.females)}
    m_pos = {cell: t for t, cell in enumerate(space.males)}
    pf = np.zeros((n, nu, n))
    pm = np.zeros((n, nu, nu))
    for i, f_idx in enumerate(space.females):
        for k, m_idx in enumerate(space.males):
            female_side, male_side = compatible_sets(space, f_idx, m_idx)
            f_total = sum(weights.female_weights[c] for c in female_side)
            m_total = sum(weights.male_weights[c] for c in male_side)
            for c in female_side:
                pf[i, k, f_pos[c]] = weights.female_weights[c] / f_total
            for c in male_side:
                pm[i, k, m_pos[c]] = weights.male_weights[c] / m_total
    return HeredityTensors(n=n, nu=nu, pf=pf, pm=pm)


@dataclass(frozen=True)
class BisexualOperator:
    """Quadratic evolution operator on a product of two simplexes.

    On the simplex, applying the operator to a state (x, y) gives
    ``x'_j = sum_{i,k} pf[i,k,j] x_i y_k`` and
    ``y'_l = sum_{i,k} pm[i,k,l] x_i y_k``.  Internally the step is
    evaluated in the algebraically identical difference form
    ``x'_j = x_j + sum_{i,k} (pf[i,k,j] - [i=j]) x_i y_k``: the literal
    contraction multiplies the total mass of both blocks, so its float
    rounding would compound exponentially along a trajectory, while the
    difference form keeps normalization drift at the rounding level
    without ever renormalizing.  The literal contraction stays available
    as :meth:`quadratic_form` (it is the unrestricted coordinate map whose
    Jacobian the engine reports).
    """

    n: int
    nu: int
    tensors: HeredityTensors

    def __post_init__(self):
        if (self.n, self.nu) != (self.tensors.n, self.tensors.nu):
            raise DimensionMismatchError("operator dims disagree with tensor dims")
        # Mixing parts: heredity minus the breed-true identity pattern.
        qf = self.tensors.pf - np.eye(self.n)[:, None, :]
        qm = self.tensors.pm - np.eye(self.nu)[None, :, :]
        qf.setflags(write=False)
        qm.setflags(write=False)
        object.__setattr__(self, "_qf", qf)
        object.__setattr__(self, "_qm", qm)

    @classmethod
    def from_tensors(cls, pf: np.ndarray, pm: np.ndarray) -> "BisexualOperator":
        pf = np.asarray(pf, dtype=float)
        pm = np.asarray(pm, dtype=float)
        tensors = HeredityTensors(n=pf.shape[0], nu=pf.shape[1], pf=pf, pm=pm)
        return cls(n=tensors.n, nu=tensors.nu, tensors=tensors)

    def quadratic_form(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """The literal tensor contraction, defined for arbitrary coordinates."""
        new_x = np.einsum("ikj,i,k->j", self.tensors.pf, x, y)
        new_y = np.einsum("ikl,i,k->l", self.tensors.pm, x, y)
        return new_x, new_y

    def apply_raw(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One step on bare coordinate vectors, without simplex validation."""
        new_x = x + np.einsum("ikj,i,k->j", self._qf, x, y)
        new_y = y + np.einsum("ikl,i,k->l", self._qm, x, y)
        return new_x, new_y

    def apply(self, state: PopulationState) -> PopulationState:
        """One evolution step; the result is again a valid state."""
        if state.dims != (self.n, self.nu):
            raise DimensionMismatchError(f"state dims {state.dims}, operator ({self.n},{self.nu})")
        new_x, new_y = self.apply_raw(np.array(state.female.probs), np.array(state.male.probs))
        return make_state(new_x, new_y)


def build_operator(space: ConfigurationSpace, weights: WeightPair) -> BisexualOperator:
    tensors = build_heredity(space, weights)
    return BisexualOperator(n=tensors.n, nu=tensors.nu, tensors=tensors)


def is_identity(
    op: BisexualOperator,
    trials: int = 20,
    tol: Tolerance = DEFAULT_TOLERANCE,
    rng: np.random.Generator | None = None,
) -> bool:
    """Decide whether the operator is the identity map.

    Requires both that every heredity row is an indicator row and that
    ``trials`` random states come back unchanged within ``tol.abs_eps``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for t in (op.tensors.pf, op.tensors.pm):
        if np.abs(t.max(axis=2) - 1.0).max() > tol.abs_eps:
            return False
    if rng is None:
        rng = np.random.default_rng(0)
    for _ in range(trials):
        s = random_state(rng, op.n, op.nu)
        if state_distance(op.apply(s), s) > tol.abs_eps:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON interchange.
#
# Construction documents use 1-based cell indices (positions in the
# lexicographic enumeration) to match the 1-based vertex labels:
#   {"vertices": 2, "edges": [], "alleles": 2, "females": [1, 2],
#    "female_weights": {"1": 1.0, "2": 1.0}, "male_weights": {"3": 1.0, "4": 1.0}}
# Operator documents are plain tensor dumps:
#   {"n": 2, "nu": 2, "pf": [[[...]]], "pm": [[[...]]]}
# ---------------------------------------------------------------------------


def _require(doc: Mapping, field: str, kind: type):
    if field not in doc:
        raise SchemaError(field, "missing required field")
    value = doc[field]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(field, f"expected a number, got {type(value).__name__}")
        return float(value)
    if not isinstance(value, kind):
        raise SchemaError(field, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _weights_from_json(doc: Mapping, field: str, expected: tuple[int, ...]) -> dict[int, float]:
    raw = _require(doc, field, dict)
    weights: dict[int, float] = {}
    for key, value in raw.items():
        try:
            idx = int(key) - 1
        except ValueError:
            raise SchemaError(field, f"cell index {key!r} is not an integer") from None
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(field, f"weight for cell {key} is not a number")
        weights[idx] = float(value)
    missing = set(expected) - set(weights)
    extra = set(weights) - set(expected)
    if missing:
        raise SchemaError(field, f"missing weights for cells {sorted(i + 1 for i in missing)}")
    if extra:
        raise SchemaError(field, f"unexpected cells {sorted(i + 1 for i in extra)}")
    return weights


def construction_from_json(doc: Mapping) -> tuple[ConfigurationSpace, WeightPair]:
    """Parse a construction document into a space and weights."""
    vertices = _require(doc, "vertices", int)
    edges = _require(doc, "edges", list)
    alleles = _require(doc, "alleles", int)
    females_raw = _require(doc, "females", list)
    for e in edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            raise SchemaError("edges", f"edge {e!r} is not a pair of integers")
    if not all(isinstance(i, int) for i in females_raw):
        raise SchemaError("females", "cell indices must be integers")
    try:
        graph = make_graph(vertices, edges)
        space = ConfigurationSpace.build(graph, alleles, [i - 1 for i in females_raw])
    except (ValueError, PartitionIndexError, SizeOverflowError) as exc:
        raise SchemaError("construction", str(exc)) from exc
    weights = WeightPair(
        _weights_from_json(doc, "female_weights", space.females),
        _weights_from_json(doc, "male_weights", space.males),
    )
    return space, weights


def operator_to_json(op: BisexualOperator) -> dict:
    return {
        "n": op.n,
        "nu": op.nu,
        "pf": op.tensors.pf.tolist(),
        "pm": op.tensors.pm.tolist(),
    }


def operator_from_json(doc: Mapping) -> BisexualOperator:
    n = _require(doc, "n", int)
    nu = _require(doc, "nu", int)
    pf = np.asarray(_require(doc, "pf", list), dtype=float)
    pm = np.asarray(_require(doc, "pm", list), dtype=float)
    if pf.shape != (n, nu, n):
        raise SchemaError("pf", f"expected shape {(n, nu, n)}, got {pf.shape}")
    if pm.shape != (n, nu, nu):
        raise SchemaError("pm", f"expected shape {(n, nu, nu)}, got {pm.shape}")
    try:
        return BisexualOperator.from_tensors(pf, pm)
    except ValueError as exc:
        raise SchemaError("tensors", str(exc)) from exc


def load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
