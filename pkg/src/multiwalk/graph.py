"""Graphs with ordered neighbourhoods, their n-walker virtual graphs, and
phase-defect patterns etched onto virtual graphs.

A walker mode is a directed edge ``(position, coin)`` with ``coin`` one of
the neighbours of ``position``.  Modes are numbered densely in lexicographic
order, so the modes of one position (a *bundle*) are contiguous.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement, product

import numpy as np

from .errors import InvalidSizeError, NotInGraphError, SymmetryConflictError, ValidationError

Multiset = tuple[int, ...]


@dataclass(frozen=True)
class Graph:
    """Finite undirected graph, self-loops allowed, no isolated vertices.

    ``neighbors[x]`` is the ascending, duplicate-free neighbour list of ``x``.
    """

    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        v = len(self.neighbors)
        if v == 0:
            raise InvalidSizeError("graph needs at least one vertex")
        for x, nbrs in enumerate(self.neighbors):
            if not nbrs:
                raise ValidationError(f"vertex {x} has no neighbours; its coin space would be empty")
            if any(not 0 <= y < v for y in nbrs):
                raise ValidationError(f"vertex {x} lists a neighbour outside 0..{v - 1}")
            if list(nbrs) != sorted(set(nbrs)):
                raise ValidationError(f"neighbour list of vertex {x} must be ascending and duplicate-free")
            for y in nbrs:
                if x not in self.neighbors[y]:
                    raise ValidationError(f"edge {x}->{y} has no reverse edge {y}->{x}")

    @property
    def n_vertices(self) -> int:
        return len(self.neighbors)

    def degree(self, x: int) -> int:
        self._check_vertex(x)
        return len(self.neighbors[x])

    @cached_property
    def modes(self) -> tuple[tuple[int, int], ...]:
        return tuple((x, c) for x, nbrs in enumerate(self.neighbors) for c in nbrs)

    @property
    def mode_count(self) -> int:
        return len(self.modes)

    @cached_property
    def _mode_lookup(self) -> dict[tuple[int, int], int]:
        return {mode: i for i, mode in enumerate(self.modes)}

    @cached_property
    def bundle_offsets(self) -> np.ndarray:
        """``bundle_offsets[x]:bundle_offsets[x+1]`` are the mode indices at ``x``."""
        return np.concatenate([[0], np.cumsum([len(n) for n in self.neighbors])]).astype(np.int64)

    def bundle(self, x: int) -> range:
        self._check_vertex(x)
        return range(int(self.bundle_offsets[x]), int(self.bundle_offsets[x + 1]))

    def mode_index(self, x: int, c: int) -> int:
        try:
            return self._mode_lookup[(int(x), int(c))]
        except KeyError:
            raise NotInGraphError(f"({x}, {c}) is not a mode: {c} is not a neighbour of {x}") from None

    @cached_property
    def mode_positions(self) -> np.ndarray:
        return np.array([x for x, _ in self.modes], dtype=np.int64)

    @cached_property
    def step_permutation(self) -> np.ndarray:
        """Image of every mode under ``(x, j) -> (j, x)``; an involution."""
        return np.array([self._mode_lookup[(c, x)] for x, c in self.modes], dtype=np.int64)

    def _check_vertex(self, x):
        if not 0 <= x < self.n_vertices:
            raise NotInGraphError(f"vertex {x} not in graph with {self.n_vertices} vertices")

    @cached_property
    def is_line(self) -> bool:
        v = self.n_vertices
        return v >= 2 and self == build_line(v)


def from_edges(n_vertices: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Graph on ``0..n_vertices-1`` from an undirected edge list (``(x, x)`` is a loop)."""
    if n_vertices < 1:
        raise InvalidSizeError("graph needs at least one vertex")
    nbrs: list[set[int]] = [set() for _ in range(n_vertices)]
    seen = set()
    for edge in edges:
        if len(edge) != 2:
            raise ValidationError(f"edge {edge!r} must have two endpoints")
        a, b = int(edge[0]), int(edge[1])
        if not (0 <= a < n_vertices and 0 <= b < n_vertices):
            raise ValidationError(f"edge ({a}, {b}) references a vertex outside 0..{n_vertices - 1}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise ValidationError(f"duplicate edge {key}")
        seen.add(key)
        nbrs[a].add(b)
        nbrs[b].add(a)
    return Graph(tuple(tuple(sorted(s)) for s in nbrs))


def build_line(V: int) -> Graph:
    """Path ``0 - 1 - ... - V-1``."""
    if V < 2:
        raise InvalidSizeError(f"a line needs at least 2 vertices, got {V}")
    return Graph(tuple(tuple(y for y in (x - 1, x + 1) if 0 <= y < V) for x in range(V)))


def build_cycle(V: int) -> Graph:
    if V < 3:
        raise InvalidSizeError(f"a cycle needs at least 3 vertices, got {V}")
    return Graph(tuple(tuple(sorted({(x - 1) % V, (x + 1) % V})) for x in range(V)))


def build_complete_with_loops(N: int) -> Graph:
    """Every vertex adjacent to every vertex including itself: ``N**2`` modes."""
    if N < 1:
        raise InvalidSizeError(f"need at least one vertex, got {N}")
    return Graph(tuple(tuple(range(N)) for _ in range(N)))


def line_coin_label(g: Graph, x: int, c: int) -> int:
    """-1 for the left neighbour, +1 for the right one (line graphs only)."""
    if not g.is_line:
        raise ValidationError("coin labels +-1 are only defined on line graphs")
    g.mode_index(x, c)
    return c - x


def line_coin_vertex(g: Graph, x: int, label: int) -> int:
    if not g.is_line:
        raise ValidationError("coin labels +-1 are only defined on line graphs")
    if label not in (-1, 1):
        raise ValidationError(f"line coin label must be -1 or +1, got {label}")
    c = x + label
    g.mode_index(x, c)
    return c


def canonical(vertex: Iterable[int]) -> Multiset:
    return tuple(sorted(int(v) for v in vertex))


@dataclass(frozen=True, eq=False)
class VirtualGraph:
    """Graph on size-``walkers`` position multisets of ``base``.

    ``adjacency[X]`` holds the distinct neighbour multisets of ``X``.  The
    coin space of ``X`` (see :meth:`coin_states`) can be larger than that
    list when two coin choices lead to the same multiset, i.e. the virtual
    graph is really a multigraph.
    """

    base: Graph
    walkers: int
    vertices: tuple[Multiset, ...]
    adjacency: Mapping[Multiset, tuple[Multiset, ...]]

    def __contains__(self, vertex) -> bool:
        return canonical(vertex) in self.adjacency

    def lookup(self, vertex: Iterable[int]) -> Multiset:
        key = canonical(vertex)
        if len(key) != self.walkers or key not in self.adjacency:
            raise NotInGraphError(f"{tuple(vertex)} is not a vertex of the {self.walkers}-walker virtual graph")
        return key

    def coin_states(self, vertex: Iterable[int]) -> tuple[tuple[int, ...], ...]:
        """Sorted mode-index tuples whose walkers sit exactly at ``vertex``.

        These are the n-boson Fock basis states over that position multiset.
        """
        key = self.lookup(vertex)
        return self._coin_states[key]

    @cached_property
    def _coin_states(self) -> dict[Multiset, tuple[tuple[int, ...], ...]]:
        g = self.base
        table = {}
        for key in self.vertices:
            groups = []
            for x in sorted(set(key)):
                groups.append(list(combinations_with_replacement(g.bundle(x), key.count(x))))
            table[key] = tuple(tuple(sorted(sum(parts, ()))) for parts in product(*groups))
        return table

    def neighbours_by_coin(self, vertex: Iterable[int]) -> tuple[Multiset, ...]:
        """One entry per coin state: the multiset that coin state steps into."""
        coins = self.base.modes
        return tuple(canonical(coins[m][1] for m in state) for state in self.coin_states(vertex))


def build_virtual_graph(g: Graph, n: int) -> VirtualGraph:
    """Virtual graph of ``n`` indistinguishable walkers on ``g``.

    ``X ~ Y`` iff the components of ``X`` can be paired with those of ``Y``
    along edges of ``g``.
    """
    if n < 1:
        raise InvalidSizeError(f"need at least one walker, got {n}")
    vertices = tuple(combinations_with_replacement(range(g.n_vertices), n))
    adjacency = {
        key: tuple(sorted({canonical(step) for step in product(*(g.neighbors[x] for x in key))}))
        for key in vertices
    }
    return VirtualGraph(g, n, vertices, adjacency)


def virtual_degree(vg: VirtualGraph, vertex: Iterable[int]) -> int:
    """Degree of a virtual vertex.

    With pairwise distinct positions this is the product of the base degrees,
    one coin state per outgoing edge.  When walkers share a position,
    identical walkers make several coin choices land on one neighbour, and
    the degree is the number of distinct neighbour multisets instead.  The
    coin space itself is ``len(vg.coin_states(vertex))``.
    """
    key = vg.lookup(vertex)
    if len(set(key)) == len(key):
        return math.prod(vg.base.degree(x) for x in key)
    return len(vg.adjacency[key])


@dataclass(frozen=True)
class DefectPattern:
    """Phases (radians) attached to virtual vertices."""

    walkers: int
    entries: Mapping[Multiset, float]

    def __len__(self):
        return len(self.entries)

    def phase(self, vertex: Iterable[int]) -> float:
        return self.entries.get(canonical(vertex), 0.0)


def _same_phase(a: float, b: float) -> bool:
    return abs(np.exp(1j * a) - np.exp(1j * b)) < 1e-12


def etch_defects(vg: VirtualGraph, requested: Iterable[tuple[Sequence[int], float]]) -> DefectPattern:
    """Validate and canonicalise requested phase defects.

    Position tuples are reduced to multisets; two requests landing on the
    same multiset must agree on the phase (mod 2 pi).
    """
    entries: dict[Multiset, float] = {}
    for positions, phase in requested:
        if len(positions) != vg.walkers:
            raise NotInGraphError(f"defect at {tuple(positions)} needs {vg.walkers} positions")
        for x in positions:
            if not 0 <= int(x) < vg.base.n_vertices:
                raise NotInGraphError(f"defect position {x} is not a vertex of the base graph")
        key = vg.lookup(positions)
        phase = float(phase)
        if key in entries and not _same_phase(entries[key], phase):
            raise SymmetryConflictError(
                f"defect {key} requested with phases {entries[key]} and {phase}; "
                "the virtual graph is symmetric so both orderings are one vertex"
            )
        entries[key] = phase
    return DefectPattern(vg.walkers, dict(sorted(entries.items())))
