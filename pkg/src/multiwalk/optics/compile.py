"""Walk schedules to optical networks and back.

Walk -> network: every coin becomes per-bundle triangular meshes, every step
a fixed relabelling of modes.

Network -> walk: modes are laid out on the complete graph with self-loops on
``N`` vertices, mode ``m`` being ``(m // N, m % N)``.  A beamsplitter between
two bundles is routed through the hub vertex 0: coin permutations move both
modes to coin slot 0, a step brings them into the hub bundle, a hub coin
applies the block, and the same step and permutations route them back.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from itertools import combinations_with_replacement
from dataclasses import dataclass

import numpy as np

from ..errors import SizingError, ValidationError
from ..fock import FockState
from ..graph import Graph, build_complete_with_loops
from ..walk import (
    CoinAssignment,
    CPhaseDefect,
    Defect,
    KerrDefect,
    PositionPhase,
    WalkSchedule,
    WalkStep,
    evolve,
    mode_unitary,
    position_cphases,
)
from .network import (
    SWAP,
    BeamSplitter,
    CPhase,
    Element,
    OpticalNetwork,
    Phase,
    Relabel,
    fock_operator,
    swaps_for_permutation,
)
from .reck import reck_decompose

HUB = 0


def _defect_elements(g: Graph, d: Defect) -> list[Element]:
    if isinstance(d, CPhaseDefect):
        return [CPhase(g.mode_index(*d.mode_a), g.mode_index(*d.mode_b), d.theta)]
    if isinstance(d, PositionPhase) and len(d.positions) == 1:
        return [Phase(tuple(g.bundle(d.positions[0])), d.theta)]
    if isinstance(d, PositionPhase) and len(d.positions) == 2:
        return [e for c in position_cphases(g, d.positions, d.theta) for e in _defect_elements(g, c)]
    if isinstance(d, KerrDefect):
        # phi * k(k-1)/2 coincides with the pair CPHASEs on the two-walker sector
        return [e for c in position_cphases(g, (d.position, d.position), d.phi) for e in _defect_elements(g, c)]
    raise ValidationError(f"defect {d!r} has no phase/cphase form")


def compile_walk_to_network(g: Graph, schedule: WalkSchedule) -> OpticalNetwork:
    """Optical network over ``g.mode_count`` modes equivalent to ``schedule``.

    Position defects on two walkers and Kerr defects are emitted as pair
    CPHASEs, which reproduce them exactly on the two-walker sector.
    """
    step = Relabel(tuple(int(p) for p in g.step_permutation))
    elements: list[Element] = []
    for s in schedule.steps:
        s.coins.validate(g)
        defects = [e for d in s.defects for e in _defect_elements(g, d)]
        if schedule.defects_first:
            elements.extend(defects)
        for x, coin in enumerate(s.coins.matrices):
            base = g.bundle(x).start
            for e in reck_decompose(coin).elements:
                if isinstance(e, Phase):
                    elements.append(Phase(tuple(base + m for m in e.targets), e.theta))
                else:
                    elements.append(BeamSplitter(base + e.i, base + e.j, e.block))
        elements.append(step)
        if not schedule.defects_first:
            elements.extend(defects)
    return OpticalNetwork(g.mode_count, tuple(elements))


@dataclass(frozen=True)
class RoutingOp:
    """One operator of a routing sequence.

    ``kind`` is ``"P"`` (coin permutation swapping two modes of one bundle),
    ``"S"`` (the step) or ``"B"`` (the target block as a coin).
    """

    kind: str
    modes: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class RoutingPlan:
    target: tuple[tuple[int, int], tuple[int, int]]
    sequence: tuple[RoutingOp, ...]

    @property
    def routed(self) -> bool:
        return len(self.sequence) > 1

    def is_palindromic(self) -> bool:
        kinds = [(op.kind, op.modes) for op in self.sequence]
        return kinds == kinds[::-1]


def routing_plan(mode_a: int, mode_b: int, vertices: int) -> RoutingPlan:
    """Operator sequence that brings two modes into one bundle and back.

    Both modes in one bundle: the block is a single coin.  Otherwise the
    seven-operator sandwich ``P P S B S P P`` through the hub vertex.
    """
    x1, c1 = divmod(int(mode_a), vertices)
    x2, c2 = divmod(int(mode_b), vertices)
    if (x1, c1) == (x2, c2):
        raise ValidationError("a beamsplitter needs two distinct modes")
    if x1 == x2:
        return RoutingPlan(((x1, c1), (x2, c2)), (RoutingOp("B", ((x1, c1), (x2, c2))),))
    p1 = RoutingOp("P", ((x1, HUB), (x1, c1)))
    p2 = RoutingOp("P", ((x2, HUB), (x2, c2)))
    s = RoutingOp("S")
    b = RoutingOp("B", ((HUB, x1), (HUB, x2)))
    return RoutingPlan(((x1, c1), (x2, c2)), (p1, p2, s, b, s, p1, p2))


class _Emitter:
    """Accumulates coins between steps and closes them into walk rounds."""

    def __init__(self, g: Graph, vertices: int):
        self.g = g
        self.N = vertices
        self.rounds: list[tuple[list[np.ndarray], tuple[Defect, ...]]] = []
        self.pending = self._identity()

    def _identity(self):
        return [np.eye(self.N, dtype=complex) for _ in range(self.N)]

    def local(self, x: int, coins: Sequence[int], block: np.ndarray):
        embed = np.eye(self.N, dtype=complex)
        embed[np.ix_(coins, coins)] = block
        self.pending[x] = embed @ self.pending[x]

    def swap(self, x: int, a: int, b: int):
        if a != b:
            self.local(x, [a, b], SWAP)

    def step(self, defects: tuple[Defect, ...] = ()):
        self.rounds.append((self.pending, defects))
        self.pending = self._identity()

    def diagonal(self, defects: tuple[Defect, ...]):
        # defects act right after the pending coin: conjugate through a step
        # and undo that step with an identity round
        moved = tuple(CPhaseDefect((d.mode_a[1], d.mode_a[0]), (d.mode_b[1], d.mode_b[0]), d.theta) for d in defects)
        self.step(moved)
        self.step()

    def finish(self) -> WalkSchedule:
        if any(not np.array_equal(m, np.eye(self.N)) for m in self.pending):
            self.step()
            self.step()
        return WalkSchedule(tuple(WalkStep(CoinAssignment(tuple(c)), d) for c, d in self.rounds))


def _bundles(e: Element, N: int) -> set[int]:
    return {m // N for m in e.modes}


def _expand(net: OpticalNetwork) -> list[Element]:
    out: list[Element] = []
    for e in net.elements:
        if isinstance(e, Relabel):
            out.extend(BeamSplitter(i, j, SWAP) for i, j in swaps_for_permutation(e.perm))
        else:
            out.append(e)
    return out


def compile_network_to_walk(
    net: OpticalNetwork, *, vertices: int | None = None, parallel: bool = False
) -> tuple[Graph, WalkSchedule]:
    """Walk on the complete graph with loops realising ``net``.

    ``vertices`` defaults to ``ceil(sqrt(M))``; modes past ``M`` are padding
    and are left untouched.  With ``parallel=True`` runs of elements on
    pairwise disjoint bundles share one routing round.
    """
    M = net.mode_count
    N = vertices if vertices is not None else math.isqrt(M - 1) + 1
    if N < 1 or N * N < M:
        raise SizingError(
            f"{M} modes do not fit on a complete graph with loops on {N} vertices "
            f"({N * N} modes); need at least {math.isqrt(M - 1) + 1} vertices"
        )
    g = build_complete_with_loops(N)
    em = _Emitter(g, N)
    batch: list[Element] = []

    def flush():
        if not batch:
            return
        routed = [e for e in batch if isinstance(e, BeamSplitter) and e.i // N != e.j // N]
        for e in batch:
            if e not in routed:
                _emit_local(em, e, N)
        if routed:
            for e in routed:
                em.swap(e.i // N, HUB, e.i % N)
                em.swap(e.j // N, HUB, e.j % N)
            em.step()
            for e in routed:
                em.local(HUB, [e.i // N, e.j // N], e.matrix)
            em.step()
            for e in routed:
                em.swap(e.i // N, HUB, e.i % N)
                em.swap(e.j // N, HUB, e.j % N)
        batch.clear()

    for e in _expand(net):
        if isinstance(e, CPhase):
            flush()
            em.diagonal(
                tuple(CPhaseDefect(divmod(e.control, N), divmod(t, N), e.theta) for t in e.targets)
            )
            continue
        if parallel and batch:
            used = set().union(*(_bundles(b, N) for b in batch))
            if _bundles(e, N) & used:
                flush()
        batch.append(e)
        if not parallel:
            flush()
    flush()
    return g, em.finish()


def _emit_local(em: _Emitter, e: Element, N: int) -> None:
    if isinstance(e, Phase):
        for m in e.targets:
            x, c = divmod(m, N)
            em.local(x, [c], np.array([[np.exp(1j * e.theta)]]))
    elif isinstance(e, BeamSplitter):
        x, c1 = divmod(e.i, N)
        _, c2 = divmod(e.j, N)
        em.local(x, [c1, c2], e.matrix)
    else:
        raise ValidationError(f"cannot place {e!r} in a single coin")


def walk_mode_map(g: Graph, schedule: WalkSchedule, mode_count: int | None = None) -> np.ndarray:
    """Single-walker map of ``schedule`` restricted to the first ``mode_count`` modes."""
    u = mode_unitary(g, schedule)
    if mode_count is None:
        return u
    return u[:mode_count, :mode_count]


def fock_distance(g: Graph, schedule: WalkSchedule, net: OpticalNetwork, bosons: int = 2) -> float:
    """Largest amplitude deviation between walk and network on all
    ``bosons``-boson states of the network's modes.

    Unlike the mode-map distance this also sees controlled phases.
    """
    M = net.mode_count
    if M > g.mode_count:
        raise ValidationError(f"network has {M} modes, walk graph only {g.mode_count}")
    offset = sum(math.comb(M + n - 1, n) for n in range(bosons))
    reference = fock_operator(net.elements, M, bosons)[offset:, offset:]
    basis = list(combinations_with_replacement(range(M), bosons))
    index = {k: i for i, k in enumerate(basis)}
    worst = 0.0
    for col, key in enumerate(basis):
        out = evolve(g, FockState({key: 1.0}, g.mode_count), schedule, max_walkers=max(bosons, 1))
        column = reference[:, col].copy()
        for k, amp in out.terms.items():
            if k not in index:
                worst = max(worst, abs(amp))
                continue
            column[index[k]] -= amp
        worst = max(worst, float(np.max(np.abs(column))))
    return worst
