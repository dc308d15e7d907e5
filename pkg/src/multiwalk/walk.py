"""Discrete-time evolution of indistinguishable bosonic walkers on a graph.

One step applies the coin assignment to every bundle, then the step
permutation ``(x, j) -> (j, x)``, then any phase defects.  Coin matrices are
written in the bundle's ascending-neighbour basis and act on coin amplitude
vectors (column convention, see :mod:`multiwalk.fock`).
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from math import factorial, sqrt

import numpy as np

from . import fock
from .errors import ArityError, CapExceededError, NotInGraphError, ValidationError
from .fock import FockState, SparseModeMap
from .graph import DefectPattern, Graph, Multiset, VirtualGraph, canonical

DEFAULT_MAX_WALKERS = 4
HARD_MAX_WALKERS = 6

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class CoinAssignment:
    """One coin matrix per vertex, sized by the vertex degree."""

    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(np.asarray(m, dtype=complex) for m in self.matrices))

    def validate(self, g: Graph) -> None:
        if len(self.matrices) != g.n_vertices:
            raise ValidationError(f"coin assignment lists {len(self.matrices)} vertices, graph has {g.n_vertices}")
        for x, mat in enumerate(self.matrices):
            d = g.degree(x)
            if mat.shape != (d, d):
                raise ValidationError(f"coin at vertex {x} has shape {mat.shape}, vertex degree is {d}")
            if not np.allclose(mat @ mat.conj().T, np.eye(d), rtol=0, atol=fock.UNITARY_ATOL):
                raise ValidationError(f"coin at vertex {x} is not unitary")

    def sparse_map(self, g: Graph) -> SparseModeMap:
        cached = self.__dict__.get("_map")
        if cached is not None and cached[0] is g:
            return cached[1]
        self.validate(g)
        mapping = SparseModeMap.from_blocks(g.mode_count, ((list(g.bundle(x)), m) for x, m in enumerate(self.matrices)))
        self.__dict__["_map"] = (g, mapping)
        return mapping

    def block_diagonal(self, g: Graph) -> np.ndarray:
        return self.sparse_map(g).dense()


def _preset_matrix(name: str, d: int, rng: np.random.Generator | None) -> np.ndarray:
    if name == "identity":
        return np.eye(d, dtype=complex)
    if name == "dft":
        k = np.arange(d)
        return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)
    if name == "hadamard":
        if d & (d - 1):
            raise ValidationError(f"no Hadamard coin of dimension {d}; use 'dft' for such vertices")
        mat = np.ones((1, 1), dtype=complex)
        while mat.shape[0] < d:
            mat = np.kron(HADAMARD, mat)
        return mat
    if name == "random":
        if rng is None:
            raise ValidationError("the random coin preset needs a seeded generator")
        return fock.random_unitary(d, rng)
    raise ValidationError(f"unknown coin preset {name!r}")


def coin_preset(g: Graph, name: str, rng: np.random.Generator | None = None) -> CoinAssignment:
    """``identity``, ``hadamard`` (Sylvester, power-of-two degrees), ``dft``
    or ``random`` (Haar, needs ``rng``) at every vertex."""
    return CoinAssignment(tuple(_preset_matrix(name, g.degree(x), rng) for x in range(g.n_vertices)))


@dataclass(frozen=True)
class CPhaseDefect:
    """Phase ``theta`` whenever both walker modes ``(x, c)`` are occupied."""

    mode_a: tuple[int, int]
    mode_b: tuple[int, int]
    theta: float = np.pi


@dataclass(frozen=True)
class PositionPhase:
    """Phase ``theta`` on every term whose walker positions form ``positions``."""

    positions: Multiset
    theta: float = np.pi

    def __post_init__(self):
        object.__setattr__(self, "positions", canonical(self.positions))


@dataclass(frozen=True)
class KerrDefect:
    """Phase ``phi * k (k - 1) / 2`` with ``k`` walkers at ``position``."""

    position: int
    phi: float


Defect = CPhaseDefect | PositionPhase | KerrDefect


@dataclass(frozen=True)
class WalkStep:
    coins: CoinAssignment
    defects: tuple[Defect, ...] = ()


@dataclass(frozen=True)
class WalkSchedule:
    """Ordered steps; ``defects_first`` moves each step's defects before its coin."""

    steps: tuple[WalkStep, ...]
    defects_first: bool = False

    def __len__(self):
        return len(self.steps)

    @classmethod
    def uniform(cls, coins: CoinAssignment, t: int, defects: Sequence[Defect] = (), defects_first: bool = False):
        if t < 0:
            raise ValidationError("step count must be non-negative")
        return cls(tuple(WalkStep(coins, tuple(defects)) for _ in range(t)), defects_first)


def position_cphases(g: Graph, positions: Sequence[int], theta: float = np.pi) -> tuple[CPhaseDefect, ...]:
    """CPHASE gates over every coin pair at a two-walker position multiset.

    With exactly two walkers at most one of them fires, so together they put
    ``theta`` on precisely the terms with walkers at ``positions``.
    """
    x1, x2 = canonical(positions)
    if x1 == x2:
        coins = g.neighbors[x1]
        pairs = [(a, b) for i, a in enumerate(coins) for b in coins[i:]]
    else:
        pairs = [(a, b) for a in g.neighbors[x1] for b in g.neighbors[x2]]
    return tuple(CPhaseDefect((x1, a), (x2, b), theta) for a, b in pairs)


def _defect_phase_fn(g: Graph, defect: Defect, n: int):
    pos = g.mode_positions
    if isinstance(defect, CPhaseDefect):
        a = g.mode_index(*defect.mode_a)
        b = g.mode_index(*defect.mode_b)
        theta = defect.theta
        if a == b:
            return lambda key: theta if key.count(a) >= 2 else 0.0
        return lambda key: theta if a in key and b in key else 0.0
    if isinstance(defect, PositionPhase):
        target = defect.positions
        if len(target) != n:
            raise ValidationError(f"position defect {target} needs {n} positions for {n} walkers")
        for x in target:
            g._check_vertex(x)
        theta = defect.theta
        return lambda key: theta if tuple(sorted(int(pos[m]) for m in key)) == target else 0.0
    if isinstance(defect, KerrDefect):
        g._check_vertex(defect.position)
        x, phi = defect.position, defect.phi

        def kerr(key):
            k = sum(1 for m in key if pos[m] == x)
            return phi * k * (k - 1) / 2

        return kerr
    raise ValidationError(f"unknown defect {defect!r}")


def _apply_defects(g: Graph, s: FockState, defects: Sequence[Defect]) -> FockState:
    for defect in defects:
        s = fock.apply_key_phase(s, _defect_phase_fn(g, defect, s.n))
    return s


def _check_walkers(n: int, max_walkers: int) -> None:
    if max_walkers > HARD_MAX_WALKERS:
        raise CapExceededError(f"walker cap {max_walkers} exceeds the hard ceiling {HARD_MAX_WALKERS}")
    if n > max_walkers:
        raise CapExceededError(f"{n} walkers requested; the cap is {max_walkers}")


def iter_evolve(g: Graph, initial: FockState, schedule: WalkSchedule, *, max_walkers: int = DEFAULT_MAX_WALKERS) -> Iterator[FockState]:
    """Yield the state after each step of ``schedule``."""
    if initial.mode_count != g.mode_count:
        raise ValidationError(f"state has {initial.mode_count} modes, graph has {g.mode_count}")
    _check_walkers(initial.n, max_walkers)
    for step in schedule.steps:
        step.coins.validate(g)
    s = initial
    for step in schedule.steps:
        if schedule.defects_first:
            s = _apply_defects(g, s, step.defects)
        s = fock.apply_sparse_map(s, step.coins.sparse_map(g))
        s = fock.apply_mode_permutation(s, g.step_permutation)
        if not schedule.defects_first:
            s = _apply_defects(g, s, step.defects)
        yield s


def evolve(g: Graph, initial: FockState, schedule: WalkSchedule, *, max_walkers: int = DEFAULT_MAX_WALKERS) -> FockState:
    s = initial
    for s in iter_evolve(g, initial, schedule, max_walkers=max_walkers):
        pass
    if not len(schedule):
        _check_walkers(initial.n, max_walkers)
    return s


def mode_unitary(g: Graph, schedule: WalkSchedule) -> np.ndarray:
    """Single-walker map of the whole schedule as a dense ``M x M`` matrix.

    Multi-walker defects do nothing to one walker; single-position phase
    defects do and are included.
    """
    M = g.mode_count
    step = np.zeros((M, M))
    step[g.step_permutation, np.arange(M)] = 1
    total = np.eye(M, dtype=complex)
    for s in schedule.steps:
        phase = np.ones(M, dtype=complex)
        for d in s.defects:
            if isinstance(d, PositionPhase) and len(d.positions) == 1:
                phase[g.mode_positions == d.positions[0]] *= np.exp(1j * d.theta)
        layer = step @ s.coins.block_diagonal(g)
        layer = layer * phase[None, :] if schedule.defects_first else phase[:, None] * layer
        total = layer @ total
    return total


def basis_state(g: Graph, modes: Iterable[tuple[int, int]]) -> FockState:
    """``prod w(x, c)^dag |0>`` normalised."""
    return fock.create([g.mode_index(x, c) for x, c in modes], g.mode_count)


def symmetric_coin(g: Graph, x: int) -> dict[int, complex]:
    """``sum_k i^k |n_x[k]> / sqrt(d)``: ``(|L> + i|R>)/sqrt 2`` inside a line."""
    bundle = g.bundle(x)
    d = len(bundle)
    return {m: 1j**k / np.sqrt(d) for k, m in enumerate(bundle)}


def symmetric_walkers(g: Graph, positions: Sequence[int]) -> FockState:
    """One walker per listed position, each in the symmetric coin state."""
    return fock.product_state([symmetric_coin(g, x) for x in positions], g.mode_count)


def position_distribution(g: Graph, s: FockState) -> dict[int, float]:
    """Mean walker density per position divided by the walker number.

    Sums to one; for a single walker it is the usual position distribution.
    """
    if s.n == 0:
        raise ArityError("the vacuum has no position distribution")
    pos = g.mode_positions
    dist: dict[int, float] = defaultdict(float)
    for key, amp in s.terms.items():
        p = abs(amp) ** 2 / s.n
        for m in key:
            dist[int(pos[m])] += p
    return dict(sorted(dist.items()))


def coincidence_distribution(g: Graph, s: FockState) -> dict[Multiset, float]:
    """Probability of each walker position multiset, coins summed out."""
    if s.n < 2:
        raise ArityError(f"coincidences need at least two walkers, state has {s.n}")
    pos = g.mode_positions
    dist: dict[Multiset, float] = defaultdict(float)
    for key, amp in s.terms.items():
        dist[tuple(sorted(int(pos[m]) for m in key))] += abs(amp) ** 2
    return dict(sorted(dist.items()))


def spread_statistics(dist: Mapping[int, float], origin: float = 0.0) -> tuple[float, float]:
    """Mean and standard deviation of ``position - origin``."""
    if not dist:
        raise ValidationError("empty distribution")
    x = np.array(list(dist.keys()), dtype=float) - origin
    p = np.array(list(dist.values()), dtype=float)
    total = p.sum()
    if total <= 0:
        raise ValidationError("distribution carries no probability")
    p = p / total
    mean = float(p @ x)
    var = float(p @ (x - mean) ** 2)
    return mean, sqrt(max(var, 0.0))


def classical_line_distribution(t: int) -> dict[int, float]:
    """Unbiased +-1 random walk after ``t`` steps, keyed by displacement."""
    p = np.array([1.0])
    for _ in range(t):
        p = np.convolve(p, [0.5, 0.5])
    return {2 * k - t: float(v) for k, v in enumerate(p) if v > 0}


def l1_distance(a: Mapping, b: Mapping) -> float:
    return float(sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b)))


@dataclass(eq=False)
class _VirtualSpace:
    """Single-walker state space of a virtual graph: (vertex, coin state)."""

    vg: VirtualGraph
    keys: list[tuple[int, ...]] = field(init=False)

    def __post_init__(self):
        self.keys = [state for v in self.vg.vertices for state in self.vg.coin_states(v)]
        self.index = {k: i for i, k in enumerate(self.keys)}
        pos = self.vg.base.mode_positions
        self.vertex_of = [tuple(sorted(int(pos[m]) for m in k)) for k in self.keys]
        step = self.vg.base.step_permutation
        self.step = np.array([self.index[tuple(sorted(int(step[m]) for m in k))] for k in self.keys], dtype=np.int64)

    @cached_property
    def vertex_ids(self) -> np.ndarray:
        order = {v: i for i, v in enumerate(self.vg.vertices)}
        return np.array([order[v] for v in self.vertex_of], dtype=np.int64)

    def coin_operator(self, coins: CoinAssignment) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """COO triplets of the symmetrised product coin on every vertex."""
        g = self.vg.base
        coins.validate(g)
        offsets = g.bundle_offsets
        pos = g.mode_positions
        rows, cols, vals = [], [], []
        for v in self.vg.vertices:
            states = self.vg.coin_states(v)
            split = [_split_by_position(s, pos) for s in states]
            norms = [_multiplicity_factor(s) for s in states]
            for ci, src in enumerate(split):
                for ri, dst in enumerate(split):
                    amp = 1.0 + 0j
                    for x, src_modes in src.items():
                        block = coins.matrices[x]
                        local_in = [m - offsets[x] for m in src_modes]
                        local_out = [m - offsets[x] for m in dst[x]]
                        amp *= fock.permanent(block[np.ix_(local_out, local_in)])
                        if amp == 0:
                            break
                    if amp != 0:
                        rows.append(self.index[states[ri]])
                        cols.append(self.index[states[ci]])
                        vals.append(amp / (norms[ri] * norms[ci]))
        return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(vals, dtype=complex)


def _split_by_position(state, pos) -> dict[int, list[int]]:
    out: dict[int, list[int]] = defaultdict(list)
    for m in state:
        out[int(pos[m])].append(m)
    return out


def _multiplicity_factor(key) -> float:
    counts = np.unique(key, return_counts=True)[1]
    return sqrt(float(np.prod([factorial(int(c)) for c in counts])))


def simulate_virtual(
    vg: VirtualGraph,
    defects: DefectPattern | None,
    initial: FockState | Sequence[int],
    coins: CoinAssignment | Sequence[CoinAssignment],
    t: int,
    *,
    defects_first: bool = False,
) -> dict[Multiset, float]:
    """Single walker on the virtual graph; returns the vertex distribution.

    The coin at a virtual vertex is the product of the base coins of its
    positions, symmetrised over walkers sharing a position.  ``initial`` is
    either an ``n``-walker state on the base graph (read as a virtual walker
    state) or a virtual vertex, which starts every walker in the symmetric
    coin state.
    """
    g = vg.base
    if isinstance(coins, CoinAssignment):
        coins = [coins] * t
    if len(coins) != t:
        raise ValidationError(f"{len(coins)} coin assignments for {t} steps")
    if not isinstance(initial, FockState):
        initial = symmetric_walkers(g, vg.lookup(initial))
    if initial.n != vg.walkers or initial.mode_count != g.mode_count:
        raise ValidationError("initial state does not live on this virtual graph")
    space = _VirtualSpace(vg)
    phases = np.ones(len(space.keys), dtype=complex)
    if defects is not None:
        if defects.walkers != vg.walkers:
            raise ValidationError("defect pattern was etched for a different walker number")
        for vertex, theta in defects.entries.items():
            if vertex not in vg.adjacency:
                raise NotInGraphError(f"defect at {vertex} is not a virtual vertex")
            phases[space.vertex_ids == vg.vertices.index(vertex)] = np.exp(1j * theta)

    psi = np.zeros(len(space.keys), dtype=complex)
    for key, amp in initial.terms.items():
        psi[space.index[key]] = amp
    operators: dict[int, tuple] = {}
    for c in coins:
        op = operators.get(id(c))
        if op is None:
            op = operators[id(c)] = space.coin_operator(c)
        rows, cols, vals = op
        if defects_first:
            psi = psi * phases
        contrib = vals * psi[cols]
        new = np.bincount(rows, weights=contrib.real, minlength=len(psi)) + 1j * np.bincount(
            rows, weights=contrib.imag, minlength=len(psi)
        )
        psi = np.empty_like(new)
        psi[space.step] = new
        if not defects_first:
            psi = psi * phases

    prob = np.bincount(space.vertex_ids, weights=np.abs(psi) ** 2, minlength=len(vg.vertices))
    return {v: float(p) for v, p in zip(vg.vertices, prob) if p > 0}
