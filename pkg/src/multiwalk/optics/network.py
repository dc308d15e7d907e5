"""Linear-optics networks: element types, composition, Fock-space action and
the line-oriented JSON serialisation.

Elements are listed in time order.  Every 2x2 block acts on the amplitude
pair ``(mode i, mode j)`` in the column convention used throughout the
package.

Serialised form (one JSON value per line)::

    {"schema": 1, "modes": 9}
    {"bs": [i, j, [[re, im], [re, im], [re, im], [re, im]]]}   # row-major 2x2
    {"ph": [i, theta]}            # or {"ph": [[i, k, ...], theta]}
    {"cp": [i, j, theta]}         # or {"cp": [i, [j, k, ...], theta]}
    {"perm": [p0, p1, ...]}       # content of mode i moves to mode p_i

Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .. import fock
from ..errors import ValidationError
from ..fock import FockState, ModeUnitary

SCHEMA_VERSION = 1
SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


def _as_block(matrix) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    u = np.asarray(matrix, dtype=complex)
    if u.shape != (2, 2):
        raise ValidationError(f"beamsplitter block must be 2x2, got {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(2), rtol=0, atol=fock.UNITARY_ATOL):
        raise ValidationError("beamsplitter block is not unitary")
    return ((complex(u[0, 0]), complex(u[0, 1])), (complex(u[1, 0]), complex(u[1, 1])))


@dataclass(frozen=True)
class BeamSplitter:
    i: int
    j: int
    block: tuple[tuple[complex, complex], tuple[complex, complex]]

    def __post_init__(self):
        if self.i == self.j:
            raise ValidationError("beamsplitter needs two distinct modes")
        object.__setattr__(self, "block", _as_block(self.block))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.block, dtype=complex)

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.i, self.j)

    @property
    def is_swap(self) -> bool:
        return bool(np.allclose(self.matrix, SWAP, rtol=0, atol=fock.UNITARY_ATOL))


@dataclass(frozen=True)
class Phase:
    """Phase ``theta`` on each listed mode."""

    targets: tuple[int, ...]
    theta: float

    def __post_init__(self):
        targets = (self.targets,) if isinstance(self.targets, (int, np.integer)) else self.targets
        targets = tuple(int(m) for m in targets)
        if not targets or len(set(targets)) != len(targets):
            raise ValidationError("phase element needs distinct target modes")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def modes(self) -> tuple[int, ...]:
        return self.targets


@dataclass(frozen=True)
class CPhase:
    """Controlled phase: ``theta`` for every target occupied together with
    the control (a target equal to the control needs two bosons there)."""

    control: int
    targets: tuple[int, ...]
    theta: float = np.pi

    def __post_init__(self):
        targets = (self.targets,) if isinstance(self.targets, (int, np.integer)) else self.targets
        targets = tuple(int(m) for m in targets)
        if not targets or len(set(targets)) != len(targets):
            raise ValidationError("controlled phase needs distinct target modes")
        object.__setattr__(self, "control", int(self.control))
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(dict.fromkeys((self.control, *self.targets)))


@dataclass(frozen=True)
class Relabel:
    """Mode permutation: the content of mode ``i`` moves to ``perm[i]``."""

    perm: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValidationError("relabel element must be a permutation of 0..M-1")
        object.__setattr__(self, "perm", perm)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.perm) if p != i)


Element = BeamSplitter | Phase | CPhase | Relabel


def beamsplitter(i: int, j: int, matrix) -> BeamSplitter:
    return BeamSplitter(int(i), int(j), matrix)


def phase(i, theta: float) -> Phase:
    return Phase(i, theta)


def cphase(i: int, j, theta: float = np.pi) -> CPhase:
    return CPhase(i, j, theta)


def swap(i: int, j: int) -> BeamSplitter:
    return BeamSplitter(int(i), int(j), SWAP)


def is_diagonal(e: Element) -> bool:
    return isinstance(e, (Phase, CPhase))


@dataclass(frozen=True)
class OpticalNetwork:
    mode_count: int
    elements: tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.mode_count < 1:
            raise ValidationError("network needs at least one mode")
        for k, e in enumerate(self.elements):
            if isinstance(e, Relabel):
                if len(e.perm) != self.mode_count:
                    raise ValidationError(f"element {k}: relabel covers {len(e.perm)} modes, network has {self.mode_count}")
            elif any(not 0 <= m < self.mode_count for m in e.modes):
                raise ValidationError(f"element {k} references a mode outside 0..{self.mode_count - 1}")

    def __len__(self):
        return len(self.elements)

    def count(self, kind: type) -> int:
        return sum(isinstance(e, kind) for e in self.elements)


def element_matrix(e: Element, mode_count: int) -> np.ndarray:
    """Single-boson action of one element; controlled phases act trivially."""
    u = np.eye(mode_count, dtype=complex)
    if isinstance(e, BeamSplitter):
        u[np.ix_([e.i, e.j], [e.i, e.j])] = e.matrix
    elif isinstance(e, Phase):
        u[e.targets, e.targets] = np.exp(1j * e.theta)
    elif isinstance(e, Relabel):
        u = np.zeros((mode_count, mode_count), dtype=complex)
        u[list(e.perm), np.arange(mode_count)] = 1
    return u


def network_mode_map(net: OpticalNetwork) -> np.ndarray:
    total = np.eye(net.mode_count, dtype=complex)
    for e in net.elements:
        total = element_matrix(e, net.mode_count) @ total
    return total


def mode_map_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest entrywise deviation between two mode maps."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValidationError(f"mode maps have shapes {a.shape} and {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def _cphase_fn(e: CPhase):
    c, targets, theta = e.control, e.targets, e.theta

    def phase_of(key):
        if c not in key:
            return 0.0
        hits = 0
        for t in targets:
            if t == c:
                hits += key.count(c) >= 2
            else:
                hits += t in key
        return theta * hits

    return phase_of


def apply_element(s: FockState, e: Element) -> FockState:
    if isinstance(e, BeamSplitter):
        return fock.apply_mode_unitary(s, ModeUnitary(e.matrix, (e.i, e.j)))
    if isinstance(e, Phase):
        return fock.apply_mode_unitary(s, ModeUnitary(np.eye(len(e.targets)) * np.exp(1j * e.theta), e.targets))
    if isinstance(e, CPhase):
        return fock.apply_key_phase(s, _cphase_fn(e))
    if isinstance(e, Relabel):
        return fock.apply_mode_permutation(s, e.perm)
    raise ValidationError(f"unknown element {e!r}")


def apply_network(s: FockState, net: OpticalNetwork) -> FockState:
    if s.mode_count != net.mode_count:
        raise ValidationError(f"state has {s.mode_count} modes, network has {net.mode_count}")
    for e in net.elements:
        s = apply_element(s, e)
    return s


def fock_operator(elements: Sequence[Element], mode_count: int, max_bosons: int = 2) -> np.ndarray:
    """Dense matrix of an element sequence on all states with <= ``max_bosons``.

    Basis order: by boson number, then lexicographic key.
    """
    basis = [key for n in range(max_bosons + 1) for key in combinations_with_replacement(range(mode_count), n)]
    index = {k: i for i, k in enumerate(basis)}
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, key in enumerate(basis):
        s = FockState({key: 1.0}, mode_count, _trusted=True)
        for e in elements:
            s = apply_element(s, e)
        for k, amp in s.terms.items():
            out[index[k], col] = amp
    return out


class NetworkParseError(ValidationError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _complex(pair) -> complex:
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise ValueError(f"complex numbers are [re, im] pairs, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def element_to_json(e: Element) -> dict:
    if isinstance(e, BeamSplitter):
        return {"bs": [e.i, e.j, [[z.real, z.imag] for row in e.block for z in row]]}
    if isinstance(e, Phase):
        return {"ph": [e.targets[0] if len(e.targets) == 1 else list(e.targets), e.theta]}
    if isinstance(e, CPhase):
        return {"cp": [e.control, e.targets[0] if len(e.targets) == 1 else list(e.targets), e.theta]}
    if isinstance(e, Relabel):
        return {"perm": list(e.perm)}
    raise ValidationError(f"unknown element {e!r}")


def element_from_json(obj) -> Element:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("each element line must be an object with exactly one key")
    ((kind, args),) = obj.items()
    if kind == "bs":
        i, j, flat = args
        if len(flat) != 4:
            raise ValueError("beamsplitter block needs 4 [re, im] entries")
        return BeamSplitter(int(i), int(j), np.array([_complex(z) for z in flat]).reshape(2, 2))
    if kind == "ph":
        targets, theta = args
        return Phase(targets if isinstance(targets, int) else tuple(targets), float(theta))
    if kind == "cp":
        control, targets, theta = args
        return CPhase(int(control), targets if isinstance(targets, int) else tuple(targets), float(theta))
    if kind == "perm":
        return Relabel(tuple(args))
    raise ValueError(f"unknown element kind {kind!r}")


def dumps_network(net: OpticalNetwork) -> str:
    lines = [json.dumps({"schema": SCHEMA_VERSION, "modes": net.mode_count})]
    lines.extend(json.dumps(element_to_json(e)) for e in net.elements)
    return "\n".join(lines) + "\n"


def loads_network(text: str) -> OpticalNetwork:
    header = None
    elements = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise NetworkParseError(exc.msg, lineno, exc.colno + len(raw) - len(raw.lstrip())) from None
        if header is None:
            if not isinstance(obj, dict) or obj.get("schema") != SCHEMA_VERSION or "modes" not in obj:
                raise NetworkParseError(f'first line must be {{"schema": {SCHEMA_VERSION}, "modes": M}}', lineno)
            header = int(obj["modes"])
            continue
        try:
            e = element_from_json(obj)
            # checks mode ranges against the header
            OpticalNetwork(header, (e,))
        except (ValueError, TypeError) as exc:
            raise NetworkParseError(str(exc), lineno) from None
        elements.append(e)
    if header is None:
        raise NetworkParseError("missing header line", 1)
    try:
        return OpticalNetwork(header, tuple(elements))
    except ValidationError as exc:
        raise NetworkParseError(str(exc), 1) from None


def relabel_element(e: Element, mapping: dict[int, int]) -> Element:
    """Same element acting on ``mapping[m]`` instead of ``m``."""
    f = lambda m: mapping.get(m, m)  # noqa: E731
    if isinstance(e, BeamSplitter):
        return BeamSplitter(f(e.i), f(e.j), e.block)
    if isinstance(e, Phase):
        return Phase(tuple(f(m) for m in e.targets), e.theta)
    if isinstance(e, CPhase):
        return CPhase(f(e.control), tuple(f(m) for m in e.targets), e.theta)
    if isinstance(e, Relabel):
        perm = [0] * len(e.perm)
        for i, p in enumerate(e.perm):
            perm[f(i)] = f(p)
        return Relabel(tuple(perm))
    raise ValidationError(f"unknown element {e!r}")


def swaps_for_permutation(perm: Sequence[int]) -> list[tuple[int, int]]:
    """Transpositions, in application order, realising ``i -> perm[i]``."""
    perm = list(perm)
    inverse = [0] * len(perm)
    for i, p in enumerate(perm):
        inverse[p] = i
    loc = list(range(len(perm)))  # where original content i currently sits
    at = list(range(len(perm)))  # which original content sits at each slot
    swaps = []
    for slot in range(len(perm)):
        want = inverse[slot]
        here = loc[want]
        if here != slot:
            swaps.append((slot, here))
            other = at[slot]
            at[slot], at[here] = want, other
            loc[want], loc[other] = slot, here
    return swaps


def touched(elements: Iterable[Element]) -> list[int]:
    seen: dict[int, None] = {}
    for e in elements:
        seen.update(dict.fromkeys(e.modes))
    return sorted(seen)
