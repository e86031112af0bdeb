"""Finite host graphs, coupling fields, and ghost augmentation.

Vertices are dense integer indices ``0..vertex_count-1``.  An unordered
pair is a tuple ``(u, v)`` with ``u < v`` and carries a single coupling
value, so the doubled bonds of a wrapped side-2 torus collapse into one
pair with twice the coupling.  A ghost vertex, when present, always takes
the index ``vertex_count`` of its base graph and absorbs the total
coupling from each vertex to the exterior of the finite volume.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping

import numpy as np
from scipy.special import zeta

Pair = tuple[int, int]

MAX_VERTICES = 1 << 20


class SizeError(ValueError):
    """Requested construction exceeds the configured vertex budget."""


class FamilyError(ValueError):
    """Construction arguments are inconsistent with the graph family."""


class PrecisionError(ValueError):
    """A requested numeric tolerance cannot be met."""


def ordered(u: int, v: int) -> Pair:
    if u == v:
        raise ValueError(f"self pair at vertex {u}")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class FiniteGraph:
    """A finite simple graph with per-vertex coordinate labels.

    ``meta`` records family parameters (side, dimension, wrap, degree,
    depth, length, exponent) and, for wrapped side-2 boxes, the bond
    multiplicities that were collapsed into single pairs.
    """

    vertex_count: int
    pairs: tuple[Pair, ...]
    coordinates: tuple[object, ...]
    family: str
    meta: Mapping[str, object] = field(default_factory=dict)

    def degree(self, x: int) -> int:
        return sum(1 for p in self.pairs if x in p)

    def pair_multiplicity(self, pair: Pair) -> int:
        mult = self.meta.get("pair_multiplicity")
        if mult is None:
            return 1
        return mult.get(pair, 1)


@dataclass(frozen=True)
class CouplingField:
    """Symmetric coupling values on the unordered pairs of a host graph.

    Keys absent from ``pair_weight`` are zero couplings.  Negative values
    are representable so that validation can report them; constructors in
    this module only produce nonnegative fields.
    """

    pair_weight: Mapping[Pair, float]
    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def weight(self, u: int, v: int) -> float:
        return self.pair_weight.get(ordered(u, v), 0.0)


@dataclass(frozen=True)
class GhostGraph:
    """A finite graph joined to a single ghost vertex.

    ``ghost_coupling[x]`` is the total coupling from vertex ``x`` to the
    exterior of the finite volume in the ambient family; ``tail_error``
    bounds the mass dropped when that total is an infinite series.
    """

    base: FiniteGraph
    coupling: CouplingField
    ghost_coupling: tuple[float, ...]
    tail_error: float = 0.0

    @property
    def ghost_index(self) -> int:
        return self.base.vertex_count


@dataclass(frozen=True)
class ConditionCheck:
    condition: str
    passed: bool
    witness: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"condition": c.condition, "passed": c.passed, "witness": c.witness}
                for c in self.checks
            ],
        }


# ---------------------------------------------------------------------------
# Family constructors


def _box_index(coord: tuple[int, ...], side: int) -> int:
    idx = 0
    for c in coord:
        idx = idx * side + c
    return idx


def build_box(dimension: int, side: int, wrap: bool = False) -> FiniteGraph:
    """Hypercubic box of the given side, optionally with periodic wrap.

    Nearest-neighbor pairs only.  On a wrapped side-2 box the two bonds
    between a vertex and its unique axis neighbor collapse into one pair
    recorded with multiplicity 2.
    """
    if dimension < 1 or side < 1:
        raise SizeError(f"need dimension >= 1 and side >= 1, got ({dimension}, {side})")
    if side**dimension > MAX_VERTICES:
        raise SizeError(f"box({dimension}, {side}) exceeds {MAX_VERTICES} vertices")
    coords = list(itertools.product(range(side), repeat=dimension))
    multiplicity: dict[Pair, int] = {}
    for coord in coords:
        u = _box_index(coord, side)
        for axis in range(dimension):
            c = coord[axis]
            if c + 1 < side:
                nb = coord[:axis] + (c + 1,) + coord[axis + 1 :]
            elif wrap:
                nb = coord[:axis] + (0,) + coord[axis + 1 :]
            else:
                continue
            v = _box_index(nb, side)
            if u == v:
                continue  # side-1 wrap is a self loop; drop it
            pair = ordered(u, v)
            # on a wrapped side-2 box both endpoints step onto the same
            # pair, which accumulates the collapsed multiplicity 2
            multiplicity[pair] = multiplicity.get(pair, 0) + 1
    pairs = tuple(sorted(multiplicity))
    meta: dict[str, object] = {"dimension": dimension, "side": side, "wrap": wrap}
    if any(m != 1 for m in multiplicity.values()):
        meta["pair_multiplicity"] = dict(multiplicity)
    return FiniteGraph(
        vertex_count=side**dimension,
        pairs=pairs,
        coordinates=tuple(coords),
        family="torus" if wrap else "box",
        meta=meta,
    )


def build_tree_ball(degree: int, depth: int) -> FiniteGraph:
    """Ball of the given depth in the infinite degree-regular tree.

    The root has ``degree`` children and every other internal vertex has
    ``degree - 1``.  Coordinates are child-index addresses from the root.
    """
    if degree < 2 or depth < 0:
        raise SizeError(f"need degree >= 2 and depth >= 0, got ({degree}, {depth})")
    addresses: list[tuple[int, ...]] = [()]
    pairs: list[Pair] = []
    frontier = [0]
    for level in range(depth):
        if len(addresses) > MAX_VERTICES:
            raise SizeError(f"tree({degree}, {depth}) exceeds {MAX_VERTICES} vertices")
        next_frontier = []
        for parent in frontier:
            n_children = degree if parent == 0 else degree - 1
            for child_slot in range(n_children):
                child = len(addresses)
                addresses.append(addresses[parent] + (child_slot,))
                pairs.append(ordered(parent, child))
                next_frontier.append(child)
        frontier = next_frontier
    if len(addresses) > MAX_VERTICES:
        raise SizeError(f"tree({degree}, {depth}) exceeds {MAX_VERTICES} vertices")
    return FiniteGraph(
        vertex_count=len(addresses),
        pairs=tuple(sorted(pairs)),
        coordinates=tuple(addresses),
        family="tree",
        meta={"degree": degree, "depth": depth},
    )


def build_long_range_chain(
    length: int, exponent: float, j0: float = 1.0
) -> tuple[FiniteGraph, CouplingField]:
    """Complete chain on ``0..length-1`` with couplings ``j0 / |i-j|^exponent``."""
    if length < 2 or length > MAX_VERTICES:
        raise SizeError(f"need 2 <= length <= {MAX_VERTICES}, got {length}")
    if not exponent > 1.0:
        raise FamilyError(
            f"exponent {exponent} <= 1 gives divergent ambient row sums"
        )
    _check_j0(j0)
    pairs = tuple((i, j) for i in range(length) for j in range(i + 1, length))
    weights = {(i, j): j0 * float(j - i) ** (-exponent) for (i, j) in pairs}
    graph = FiniteGraph(
        vertex_count=length,
        pairs=pairs,
        coordinates=tuple(range(length)),
        family="longrange",
        meta={"length": length, "exponent": exponent, "j0": j0},
    )
    field_ = CouplingField(
        pair_weight=weights,
        family="longrange",
        params={"exponent": exponent, "j0": j0},
    )
    return graph, field_


def _check_j0(j0: float) -> None:
    if not math.isfinite(j0) or j0 < 0:
        raise ValueError(f"coupling scale must be finite and nonnegative, got {j0}")


def nearest_neighbor_coupling(graph: FiniteGraph, j0: float = 1.0) -> CouplingField:
    """Constant coupling ``j0`` per bond, collapsed-bond multiplicities included."""
    _check_j0(j0)
    weights = {p: j0 * graph.pair_multiplicity(p) for p in graph.pairs}
    return CouplingField(pair_weight=weights, family="nearest_neighbor", params={"j0": j0})


# ---------------------------------------------------------------------------
# Ghost augmentation

_DEFAULT_AMBIENT = {"box": "lattice", "torus": "none", "tree": "tree", "longrange": "ray"}


def ghost_augment(
    graph: FiniteGraph,
    coupling: CouplingField,
    ambient: str | None = None,
    tail_tol: float = 1e-6,
) -> GhostGraph:
    """Join a ghost vertex absorbing each vertex's coupling to the exterior.

    Ambient families: ``lattice`` for an unwrapped box inside the full
    nearest-neighbor lattice, ``tree`` for a ball inside the infinite
    regular tree, ``ray`` (default) or ``line`` for a chain occupying the
    first ``length`` sites of the nonnegative or doubly infinite integers,
    and ``none`` for a wrapped box with empty exterior.
    """
    if ambient is None:
        ambient = _DEFAULT_AMBIENT.get(graph.family)
        if ambient is None:
            raise FamilyError(f"no default ambient for family {graph.family!r}")
    n = graph.vertex_count
    tail_error = 0.0
    if ambient == "none":
        if graph.family != "torus":
            raise FamilyError(f"ambient 'none' needs a wrapped box, got {graph.family}")
        ghost = [0.0] * n
    elif ambient == "lattice":
        if graph.family != "box" or coupling.family != "nearest_neighbor":
            raise FamilyError("ambient 'lattice' needs an unwrapped nearest-neighbor box")
        j0 = coupling.params["j0"]
        full = 2 * int(graph.meta["dimension"])
        ghost = [j0 * (full - graph.degree(x)) for x in range(n)]
    elif ambient == "tree":
        if graph.family != "tree" or coupling.family != "nearest_neighbor":
            raise FamilyError("ambient 'tree' needs a nearest-neighbor tree ball")
        j0 = coupling.params["j0"]
        full = int(graph.meta["degree"])
        ghost = [j0 * (full - graph.degree(x)) for x in range(n)]
    elif ambient in ("ray", "line"):
        if graph.family != "longrange":
            raise FamilyError(f"ambient {ambient!r} needs a long-range chain")
        s = float(coupling.params["exponent"])
        j0 = float(coupling.params["j0"])
        # Hurwitz zeta gives the exterior series to float precision, far
        # below any admissible tail_tol.
        if not tail_tol > 0:
            raise PrecisionError(f"tail_tol must be positive, got {tail_tol}")
        ghost = [j0 * float(zeta(s, n - i)) for i in range(n)]
        if ambient == "line":
            ghost = [g + j0 * float(zeta(s, i + 1)) for i, g in enumerate(ghost)]
        tail_error = 8 * np.finfo(float).eps * max(ghost)
        if tail_error > tail_tol:
            raise PrecisionError(f"cannot reach tail_tol={tail_tol} for exponent {s}")
    else:
        raise FamilyError(f"unknown ambient family {ambient!r}")
    return GhostGraph(
        base=graph,
        coupling=coupling,
        ghost_coupling=tuple(ghost),
        tail_error=tail_error,
    )


# ---------------------------------------------------------------------------
# Condition validation


def _torus_translations(graph: FiniteGraph) -> Iterator[list[int]]:
    side = int(graph.meta["side"])
    dimension = int(graph.meta["dimension"])
    for axis in range(dimension):
        perm = []
        for coord in graph.coordinates:
            shifted = list(coord)
            shifted[axis] = (shifted[axis] + 1) % side
            perm.append(_box_index(tuple(shifted), side))
        yield perm


def validate_conditions(graph: FiniteGraph, coupling: CouplingField) -> ValidationReport:
    """Check ferromagnetism, invariance, irreducibility, and local finiteness.

    Invariance is checked against the translation subgroup of wrapped
    boxes only; other families carry no nontrivial translations and pass
    vacuously.  Local finiteness of the ambient family fails exactly when
    a long-range exponent is at most 1.
    """
    checks = []

    witness = ""
    for pair, j in sorted(coupling.pair_weight.items()):
        if not math.isfinite(j):
            witness = f"J[{pair}] = {j}"
            break
        if j < 0:
            witness = f"J[{pair}] = {j}"
            break
    checks.append(ConditionCheck("ferromagnetic", witness == "", witness))

    witness = ""
    if graph.family == "torus":
        for perm in _torus_translations(graph):
            for pair, j in coupling.pair_weight.items():
                image = ordered(perm[pair[0]], perm[pair[1]])
                if coupling.pair_weight.get(image, 0.0) != j:
                    witness = f"J[{pair}] = {j} but J[{image}] = {coupling.weight(*image)}"
                    break
            if witness:
                break
        checks.append(ConditionCheck("translation_invariant", witness == "", witness))
    else:
        checks.append(
            ConditionCheck(
                "translation_invariant",
                True,
                "family carries no nontrivial translations; vacuous",
            )
        )

    adjacency: list[list[int]] = [[] for _ in range(graph.vertex_count)]
    for (u, v), j in coupling.pair_weight.items():
        if j > 0:
            adjacency[u].append(v)
            adjacency[v].append(u)
    seen = [False] * graph.vertex_count
    stack = [0]
    seen[0] = True
    while stack:
        x = stack.pop()
        for y in adjacency[x]:
            if not seen[y]:
                seen[y] = True
                stack.append(y)
    witness = ""
    if not all(seen):
        first = seen.index(False)
        witness = f"vertex {first} unreachable from vertex 0 through positive couplings"
    checks.append(ConditionCheck("irreducible", witness == "", witness))

    witness = ""
    row = [0.0] * graph.vertex_count
    for (u, v), j in coupling.pair_weight.items():
        row[u] += abs(j)
        row[v] += abs(j)
    for x, r in enumerate(row):
        if not math.isfinite(r):
            witness = f"row sum at vertex {x} is {r}"
            break
    if not witness and coupling.family == "longrange":
        s = float(coupling.params.get("exponent", 2.0))
        if s <= 1.0:
            witness = f"ambient row sum diverges for exponent {s} (harmonic comparison)"
    checks.append(ConditionCheck("locally_finite", witness == "", witness))

    return ValidationReport(checks=tuple(checks))


# ---------------------------------------------------------------------------
# Current-host systems


@dataclass(frozen=True)
class System:
    """The host a current lives on: vertices plus positive-coupling pairs.

    A ghost system keeps its base-graph vertex indices and appends the
    ghost at index ``vertex_count - 1``.
    """

    vertex_count: int
    pairs: tuple[Pair, ...]
    couplings: tuple[float, ...]
    ghost_index: int | None = None
    label: str = ""

    @cached_property
    def pair_index(self) -> dict[Pair, int]:
        return {p: i for i, p in enumerate(self.pairs)}

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.vertex_count)]
        for (u, v), j in zip(self.pairs, self.couplings):
            adj[u].append((v, j))
            adj[v].append((u, j))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def strength(self) -> tuple[float, ...]:
        """Total coupling incident to each vertex."""
        w = [0.0] * self.vertex_count
        for (u, v), j in zip(self.pairs, self.couplings):
            w[u] += j
            w[v] += j
        return tuple(w)

    def coupling_of(self, u: int, v: int) -> float:
        i = self.pair_index.get(ordered(u, v))
        return 0.0 if i is None else self.couplings[i]

    def base_vertices(self) -> range:
        if self.ghost_index is None:
            return range(self.vertex_count)
        return range(self.vertex_count - 1)

    def embeds_in(self, other: System) -> bool:
        """True when every pair here exists in ``other`` with equal coupling."""
        if self.vertex_count > other.vertex_count:
            return False
        return all(
            other.coupling_of(*p) == j for p, j in zip(self.pairs, self.couplings)
        )


def _positive_pairs(weights: Mapping[Pair, float]) -> tuple[tuple[Pair, ...], tuple[float, ...]]:
    items = sorted((p, j) for p, j in weights.items() if j != 0.0)
    for p, j in items:
        if not math.isfinite(j) or j < 0:
            raise ValueError(f"coupling J[{p}] = {j} is not finite and nonnegative")
    pairs = tuple(p for p, _ in items)
    vals = tuple(j for _, j in items)
    return pairs, vals


def free_system(graph: FiniteGraph, coupling: CouplingField, label: str = "") -> System:
    pairs, vals = _positive_pairs(coupling.pair_weight)
    for u, v in pairs:
        if not (0 <= u < graph.vertex_count and 0 <= v < graph.vertex_count):
            raise ValueError(f"pair ({u}, {v}) outside vertex range")
    return System(
        vertex_count=graph.vertex_count,
        pairs=pairs,
        couplings=vals,
        ghost_index=None,
        label=label or graph.family,
    )


def ghost_system(ghost: GhostGraph, label: str = "") -> System:
    base = ghost.base
    weights = dict(ghost.coupling.pair_weight)
    delta = ghost.ghost_index
    for x, j in enumerate(ghost.ghost_coupling):
        if j != 0.0:
            weights[(x, delta)] = j
    pairs, vals = _positive_pairs(weights)
    return System(
        vertex_count=base.vertex_count + 1,
        pairs=pairs,
        couplings=vals,
        ghost_index=delta,
        label=label or f"{base.family}+ghost",
    )
