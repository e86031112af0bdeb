"""Sparse integer currents on a host system and their combinatorics.

A current assigns a nonnegative integer multiplicity to each unordered
pair of its host.  Its weight is the product over pairs of
``(beta * J) ** m / m!``, carried in log space throughout.  The sources
are the vertices of odd incident multiplicity; connectivity notions below
always refer to the support multigraph, with multiplicities acting as
parallel-edge capacities for flows.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .graph import Pair, System, ordered

MAX_MULTIPLICITY = (1 << 31) - 1


class HostMismatchError(ValueError):
    """Two currents live on hosts that neither match nor embed."""


@dataclass(frozen=True)
class Current:
    """An integer-valued current; ``entries`` holds positive multiplicities only."""

    system: System
    entries: Mapping[Pair, int]

    def get(self, u: int, v: int) -> int:
        return self.entries.get(ordered(u, v), 0)

    def support(self) -> tuple[Pair, ...]:
        return tuple(sorted(self.entries))

    def total(self) -> int:
        return sum(self.entries.values())


def make_current(system: System, entries: Mapping[Pair, int]) -> Current:
    """Validate and normalize a multiplicity mapping into a current."""
    clean: dict[Pair, int] = {}
    for pair, m in entries.items():
        pair = ordered(*pair)
        if not isinstance(m, int) or isinstance(m, bool):
            raise ValueError(f"multiplicity at {pair} must be an int, got {m!r}")
        if m < 0:
            raise ValueError(f"negative multiplicity {m} at {pair}")
        if m > MAX_MULTIPLICITY:
            raise OverflowError(f"multiplicity {m} at {pair} exceeds {MAX_MULTIPLICITY}")
        if m == 0:
            continue
        if system.coupling_of(*pair) <= 0.0:
            raise ValueError(f"positive multiplicity on zero-coupling pair {pair}")
        clean[pair] = m
    return Current(system=system, entries=clean)


def zero_current(system: System) -> Current:
    return Current(system=system, entries={})


def sources(n: Current) -> frozenset[int]:
    """Vertices with odd total incident multiplicity."""
    parity = {}
    for (u, v), m in n.entries.items():
        if m & 1:
            parity[u] = not parity.get(u, False)
            parity[v] = not parity.get(v, False)
    return frozenset(x for x, odd in parity.items() if odd)


def log_weight(n: Current, beta: float) -> float:
    """Log of prod (beta*J)^m / m!;  minus infinity when beta is 0 on a
    nonempty current."""
    if beta < 0 or not math.isfinite(beta):
        raise ValueError(f"beta must be finite and nonnegative, got {beta}")
    if beta == 0.0:
        return 0.0 if not n.entries else float("-inf")
    total = 0.0
    for pair, m in n.entries.items():
        j = n.system.coupling_of(*pair)
        total += m * math.log(beta * j) - math.lgamma(m + 1)
    return total


def restrict(n: Current, pair: Pair) -> Current:
    """The current with the given pair's multiplicity set to zero."""
    pair = ordered(*pair)
    if pair not in n.entries:
        return n
    entries = dict(n.entries)
    del entries[pair]
    return Current(system=n.system, entries=entries)


def add(n1: Current, n2: Current) -> Current:
    """Entrywise sum; the result lives on the larger of two nested hosts."""
    if n1.system == n2.system:
        host = n1.system
    elif n1.system.embeds_in(n2.system):
        host = n2.system
    elif n2.system.embeds_in(n1.system):
        host = n1.system
    else:
        raise HostMismatchError("hosts neither match nor embed")
    entries = dict(n1.entries)
    for pair, m in n2.entries.items():
        total = entries.get(pair, 0) + m
        if total > MAX_MULTIPLICITY:
            raise OverflowError(f"multiplicity overflow at {pair}")
        entries[pair] = total
    return Current(system=host, entries=entries)


# ---------------------------------------------------------------------------
# Clusters and connectivity


class UnionFind:
    """Array-based union by size with path halving."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]


@dataclass(frozen=True)
class ClusterPartition:
    """Connected components of a current's support multigraph.

    Isolated vertices form singleton clusters.  ``representative[x]`` is a
    canonical member of x's cluster and ``sizes`` maps representatives to
    vertex counts.
    """

    representative: tuple[int, ...]
    sizes: Mapping[int, int]

    def same(self, x: int, y: int) -> bool:
        return self.representative[x] == self.representative[y]

    def size_of(self, x: int) -> int:
        return self.sizes[self.representative[x]]

    def members(self, x: int) -> frozenset[int]:
        rep = self.representative[x]
        return frozenset(v for v, r in enumerate(self.representative) if r == rep)


def clusters(n: Current) -> ClusterPartition:
    uf = UnionFind(n.system.vertex_count)
    for u, v in n.entries:
        uf.union(u, v)
    reps = tuple(uf.find(x) for x in range(n.system.vertex_count))
    sizes: dict[int, int] = {}
    for r in reps:
        sizes[r] = sizes.get(r, 0) + 1
    return ClusterPartition(representative=reps, sizes=sizes)


def _bfs_reach(n: Current, start: int, region: frozenset[int] | None) -> set[int]:
    adjacency: dict[int, list[int]] = {}
    for u, v in n.entries:
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adjacency.get(x, ()):
            if y in seen:
                continue
            if region is not None and y not in region:
                continue
            seen.add(y)
            queue.append(y)
    return seen


def connected_within(n: Current, x: int, y: int, region: Iterable[int] | None = None) -> bool:
    """True when a support path joins x to y through ``region`` vertices only."""
    reg = None if region is None else frozenset(region)
    if reg is not None and (x not in reg or y not in reg):
        raise ValueError("endpoints must lie in the region")
    if x == y:
        return True
    return y in _bfs_reach(n, x, reg)


# ---------------------------------------------------------------------------
# Flows: multiplicities act as parallel-edge capacities


def _max_flow(
    n: Current,
    source: int,
    targets: frozenset[int],
    region: frozenset[int] | None,
) -> int:
    if source in targets:
        raise ValueError("source must not be a target")
    residual: dict[tuple[int, int], int] = {}
    adjacency: dict[int, set[int]] = {}
    for (u, v), m in n.entries.items():
        if region is not None and (u not in region or v not in region):
            continue
        residual[(u, v)] = residual.get((u, v), 0) + m
        residual[(v, u)] = residual.get((v, u), 0) + m
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)
    flow = 0
    while True:
        # shortest augmenting path in the residual graph
        prev: dict[int, int] = {source: source}
        queue = deque([source])
        hit = -1
        while queue and hit < 0:
            x = queue.popleft()
            for y in adjacency.get(x, ()):
                if y in prev or residual.get((x, y), 0) <= 0:
                    continue
                prev[y] = x
                if y in targets:
                    hit = y
                    break
                queue.append(y)
        if hit < 0:
            return flow
        path = [hit]
        while path[-1] != source:
            path.append(prev[path[-1]])
        path.reverse()
        bottleneck = min(residual[(path[i], path[i + 1])] for i in range(len(path) - 1))
        for i in range(len(path) - 1):
            u, v = path[i], path[i + 1]
            # undirected edges: pushing u->v frees capacity v->u
            residual[(u, v)] -= bottleneck
            residual[(v, u)] = residual.get((v, u), 0) + bottleneck
        flow += bottleneck


def flow(n: Current, x: int, y: int, region: Iterable[int] | None = None) -> int:
    """Maximum number of edge-disjoint support paths from x to y."""
    if x == y:
        raise ValueError("flow endpoints must differ")
    reg = None if region is None else frozenset(region)
    if reg is not None and (x not in reg or y not in reg):
        raise ValueError("endpoints must lie in the region")
    return _max_flow(n, x, frozenset({y}), reg)


def flow_to_boundary(n: Current, x: int, boundary: Iterable[int]) -> int:
    """Maximum number of edge-disjoint support paths from x to the boundary set."""
    targets = frozenset(boundary)
    if not targets:
        raise ValueError("boundary must be nonempty")
    if x in targets:
        raise ValueError("x must not lie on the boundary")
    return _max_flow(n, x, targets, None)


# ---------------------------------------------------------------------------
# Defect events


def in_event_a_f(n: Current, x: int, y: int, region: Iterable[int] | None = None) -> bool:
    """Single-bond defect event on a ghost host.

    Requires multiplicity exactly 1 on ``{x, y}``; in the current with
    that pair removed, both x and y must reach the ghost while staying
    disconnected from each other inside ``region`` (the base vertex set
    by default).  Source constraints are not asserted here.
    """
    system = n.system
    if system.ghost_index is None:
        raise ValueError("event requires a ghost host")
    delta = system.ghost_index
    if x == delta or y == delta or x == y:
        raise ValueError("event endpoints must be distinct base vertices")
    if n.get(x, y) != 1:
        return False
    reduced = restrict(n, (x, y))
    reach_x = _bfs_reach(reduced, x, None)
    if delta not in reach_x:
        return False
    if delta not in _bfs_reach(reduced, y, None):
        return False
    reg = frozenset(region) if region is not None else frozenset(system.base_vertices())
    return not connected_within(reduced, x, y, reg)


def in_event_a_proxy(
    n: Current,
    x: int,
    y: int,
    inner_region: Iterable[int],
    outer_boundary: Iterable[int],
) -> bool:
    """Finite-volume proxy of the two-sided escape event.

    The two escape clauses are replaced by reachability from x and from y
    to ``outer_boundary`` in the reduced current, while x and y stay
    disconnected inside ``inner_region``.
    """
    if x == y:
        raise ValueError("event endpoints must differ")
    if n.get(x, y) != 1:
        return False
    outer = frozenset(outer_boundary)
    inner = frozenset(inner_region)
    if x in outer or y in outer:
        raise ValueError("endpoints must not lie on the outer boundary")
    reduced = restrict(n, (x, y))
    reach_x = _bfs_reach(reduced, x, None)
    if not (reach_x & outer):
        return False
    if not (_bfs_reach(reduced, y, None) & outer):
        return False
    return not connected_within(reduced, x, y, inner)


def u_set(
    n: Current,
    candidate_pairs: Iterable[Pair],
    inner_region: Iterable[int],
    outer_boundary: Iterable[int],
) -> set[Pair]:
    """Candidate pairs whose escape-event proxy holds in the current."""
    inner = frozenset(inner_region)
    outer = frozenset(outer_boundary)
    return {
        ordered(*p)
        for p in candidate_pairs
        if in_event_a_proxy(n, p[0], p[1], inner, outer)
    }


# ---------------------------------------------------------------------------
# Local maps


def increment(n: Current, pair: Pair) -> Current:
    """Add one unit on a positive-coupling pair.

    The weight changes by the factor ``beta * J / (m + 1)``.
    """
    pair = ordered(*pair)
    if n.system.coupling_of(*pair) <= 0.0:
        raise ValueError(f"cannot increment zero-coupling pair {pair}")
    m = n.entries.get(pair, 0)
    if m + 1 > MAX_MULTIPLICITY:
        raise OverflowError(f"multiplicity overflow at {pair}")
    entries = dict(n.entries)
    entries[pair] = m + 1
    return Current(system=n.system, entries=entries)


def decrement_two(n: Current, pair1: Pair, pair2: Pair) -> Current:
    """Remove one unit from each of two distinct occupied pairs.

    The weight changes by ``m1 * m2 / (beta**2 * J1 * J2)`` evaluated at
    the original multiplicities.
    """
    pair1, pair2 = ordered(*pair1), ordered(*pair2)
    if pair1 == pair2:
        raise ValueError("the two decremented pairs must be distinct")
    entries = dict(n.entries)
    for pair in (pair1, pair2):
        m = entries.get(pair, 0)
        if m < 1:
            raise ValueError(f"cannot decrement unoccupied pair {pair}")
        if m == 1:
            del entries[pair]
        else:
            entries[pair] = m - 1
    return Current(system=n.system, entries=entries)


def is_admissible(partition: ClusterPartition, x: int, y: int, xp: int, yp: int) -> bool:
    """True when x's cluster contains y and avoids both primed vertices."""
    return (
        partition.same(x, y)
        and not partition.same(x, xp)
        and not partition.same(x, yp)
    )


def _check_path(system: System, path: Sequence[int]) -> list[Pair]:
    if len(path) < 2:
        raise ValueError("path needs at least two vertices")
    pairs: list[Pair] = []
    seen: set[Pair] = set()
    for a, b in zip(path, path[1:]):
        if a == b:
            raise ValueError("path repeats a vertex consecutively")
        pair = ordered(a, b)
        if pair in seen:
            raise ValueError(f"path repeats the pair {pair}")
        if system.coupling_of(*pair) <= 0.0:
            raise ValueError(f"path pair {pair} has no positive coupling")
        seen.add(pair)
        pairs.append(pair)
    return pairs


def parity_flip_count(n: Current, path: Sequence[int], cap: int) -> int:
    """Number of currents differing from ``n`` exactly on the path pairs,
    each flipped to the opposite parity, nonzero, and at most ``cap``."""
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    count = 1
    for pair in _check_path(n.system, path):
        m = n.entries.get(pair, 0)
        # values in 1..cap with parity opposite to m
        count *= (cap + 1) // 2 if m % 2 == 0 else cap // 2
    return count


def k_constant(system: System, path: Sequence[int], beta: float) -> float:
    """Product over path pairs of the larger parity-flip mass ratio.

    Each factor is ``max(cosh(t)/sinh(t), sinh(t)/(cosh(t)-1))`` with
    ``t = beta * J`` and is at least 1; it diverges as t drops to 0.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    value = 1.0
    for pair in _check_path(system, path):
        t = beta * system.coupling_of(*pair)
        ch, sh = math.cosh(t), math.sinh(t)
        value *= max(ch / sh, sh / (ch - 1.0))
    return value


# ---------------------------------------------------------------------------
# Canonical text serialization


def to_text(n: Current) -> str:
    lines = [f"{u} {v} {m}" for (u, v), m in sorted(n.entries.items())]
    return "\n".join(lines) + ("\n" if lines else "")


def from_text(system: System, text: str) -> Current:
    entries: dict[Pair, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'u v multiplicity'")
        u, v, m = (int(p) for p in parts)
        pair = ordered(u, v)
        if pair in entries:
            raise ValueError(f"line {lineno}: duplicate pair {pair}")
        entries[pair] = m
    return make_current(system, entries)
